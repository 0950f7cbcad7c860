"""The full placement space of a benchmark with three hot kernels.

Every subset of blocks gets a point in (energy, cycles).  Grouping the
points by where the three hottest blocks live gives eight clusters.  Sweeping
the RAM budget, and separately the time limit, walks the optimum down the
lower edge of the space.
"""

import math

from blockplace import benchmarks, default_hw, enumerate_space, extract_problem, pareto_front, sweep_constraint
from blockplace.tradeoff import cluster_points, dominant_blocks

hw = default_hw()
problem = extract_problem(benchmarks.load("mm3"), hw)
points = enumerate_space(problem)
print(f"{len(problem)} blocks, {len(points)} placements")

hot = dominant_blocks(problem, 3)
print("hottest blocks:", hot)
for key, members in cluster_points(points, hot).items():
    in_ram = [b for j, b in enumerate(hot) if key >> j & 1] or ["none"]
    energies = [p.energy for p in members]
    print(f"  cluster {key:03b} ({', '.join(in_ram):22s}) energy {min(energies):7.1f} .. {max(energies):7.1f}")

front = pareto_front(points)
print(f"\nPareto front: {len(front)} points")
for p in front[:8]:
    print(f"  energy {p.energy:7.1f} cycles {p.cycles:6.0f} ram {p.ram_bytes:4.0f}")

total = sum(b.size + b.instr_size for b in problem.blocks)
print("\nRAM budget sweep")
for v, sol in sweep_constraint(problem, "ram", range(0, total + 1, 16)):
    print(f"  r_spare {v:4d}  energy {sol.energy:7.1f}  ram set {sorted(sol.in_ram)}")

print("\ntime limit sweep")
for v, sol in sweep_constraint(problem, "time", [1.0, 1.01, 1.02, 1.05, 1.1, math.inf]):
    print(f"  x_limit {v:5}  energy {sol.energy:7.1f}  time factor {sol.metrics.time_factor:.3f}")
