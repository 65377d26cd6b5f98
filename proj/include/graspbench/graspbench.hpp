#pragma once

#include "graspbench/error.hpp"
#include "graspbench/geometry.hpp"
#include "graspbench/rng.hpp"
#include "graspbench/scene.hpp"
#include "graspbench/perception.hpp"
#include "graspbench/grasp.hpp"
#include "graspbench/topsurface.hpp"
#include "graspbench/mask.hpp"
#include "graspbench/io.hpp"
#include "graspbench/toml_util.hpp"
#include "graspbench/scene_io.hpp"
#include "graspbench/adapter.hpp"
#include "graspbench/bench.hpp"
#include "graspbench/bench_config.hpp"
#include "graspbench/report.hpp"
