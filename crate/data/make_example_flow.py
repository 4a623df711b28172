"""Regenerates tidal_flow_example.csv: an illustrative semi-diurnal record
(M2 period 44712 s) with two slow gust components, sampled at 1 s."""

import math

M2 = 44712.0

with open("tidal_flow_example.csv", "w", newline="\n") as f:
    f.write("t_s,u_mps,ti\n")
    for t in range(0, 10001):
        u = (1.30 + 0.82 * math.sin(2 * math.pi * t / M2)
             + 0.06 * math.sin(2 * math.pi * t / 37.0 + 0.4)
             + 0.04 * math.sin(2 * math.pi * t / 13.3 + 1.1))
        f.write(f"{t},{max(u, 0.0):.4f},0.10\n")
