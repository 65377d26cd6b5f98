#!/usr/bin/env python3
"""Example external planner for `graspbench bench`.

Reads one request line on stdin, answers one grasp line on stdout.
Grasps the points above the table across their minor principal axis.
Standard library only.
"""
import json
import math
import struct
import sys
import zlib


def read_gray16_png(path):
    with open(path, "rb") as f:
        data = f.read()
    if data[:8] != b"\x89PNG\r\n\x1a\n":
        raise ValueError("not a PNG")
    pos, idat, width, height = 8, b"", 0, 0
    while pos < len(data):
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        kind = data[pos + 4:pos + 8]
        body = data[pos + 8:pos + 8 + length]
        if kind == b"IHDR":
            width, height, depth, color = struct.unpack(">IIBB", body[:10])
            if depth != 16 or color != 0:
                raise ValueError("expected 16-bit grayscale")
        elif kind == b"IDAT":
            idat += body
        pos += 12 + length
    raw = zlib.decompress(idat)
    stride = width * 2
    rows, prev = [], bytearray(stride)
    for v in range(height):
        ftype = raw[v * (stride + 1)]
        line = bytearray(raw[v * (stride + 1) + 1:(v + 1) * (stride + 1)])
        for i in range(stride):
            a = line[i - 2] if i >= 2 else 0
            b = prev[i]
            c = prev[i - 2] if i >= 2 else 0
            if ftype == 1:
                line[i] = (line[i] + a) & 0xFF
            elif ftype == 2:
                line[i] = (line[i] + b) & 0xFF
            elif ftype == 3:
                line[i] = (line[i] + (a + b) // 2) & 0xFF
            elif ftype == 4:
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                pred = a if pa <= pb and pa <= pc else (b if pb <= pc else c)
                line[i] = (line[i] + pred) & 0xFF
        rows.append(struct.unpack(">%dH" % width, bytes(line)))
        prev = line
    return width, height, rows


def plan(req):
    with open(req["intrinsics"]) as f:
        k = json.load(f)
    width, height, rows = read_gray16_png(req["depth_png"])
    g = req["gripper"]
    h = k["camera_height"]
    cy_, sy_ = math.cos(k.get("yaw", 0.0)), math.sin(k.get("yaw", 0.0))
    ox, oy = k["planar_offset"]
    pts = []
    for v in range(0, height, 2):
        for u in range(0, width, 2):
            d = rows[v][u] / 10000.0
            if d <= 0.0:
                continue
            z = h - d
            if z < 0.01:
                continue
            a = d * (u - k["cx"]) / k["fx"]
            b = -d * (v - k["cy"]) / k["fy"]
            pts.append((ox + cy_ * a - sy_ * b, oy + sy_ * a + cy_ * b, z))
    if not pts:
        raise RuntimeError("nothing above the table")
    n = len(pts)
    mx = sum(p[0] for p in pts) / n
    my = sum(p[1] for p in pts) / n
    sxx = sum((p[0] - mx) ** 2 for p in pts) / n
    syy = sum((p[1] - my) ** 2 for p in pts) / n
    sxy = sum((p[0] - mx) * (p[1] - my) for p in pts) / n
    major = 0.5 * math.atan2(2 * sxy, sxx - syy)
    theta = (major + math.pi / 2) % math.pi
    ct, st = math.cos(theta), math.sin(theta)
    proj = [(p[0] - mx) * ct + (p[1] - my) * st for p in pts]
    span = max(proj) - min(proj)
    mid = (max(proj) + min(proj)) / 2
    top = max(p[2] for p in pts)
    width_ = min(max(span + 0.01, g["min_opening"]), g["max_opening"])
    z = max(top - g["engagement_depth"], g["fingertip_clearance"])
    return {"x": mx + mid * ct, "y": my + mid * st, "z": z, "theta_rad": theta, "width": width_, "quality": 0.5}


def main():
    req = json.loads(sys.stdin.readline())
    sys.stdout.write(json.dumps(plan(req)) + "\n")
    sys.stdout.flush()


if __name__ == "__main__":
    main()
