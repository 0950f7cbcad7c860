"""Static loop-depth estimates against measured block counts.

For each bundled benchmark, solve once with the 10 ** depth estimate and once
with counts from a simulator run, then measure both placements in the
simulator.
"""

from blockplace import (
    apply_placement,
    benchmarks,
    default_hw,
    extract_problem,
    measure_image,
    profile_frequencies,
    simulate,
    solve,
)

hw = default_hw()
print(f"{'benchmark':10s} {'baseline':>9s} {'static':>9s} {'profile':>9s}   RAM budget")
for name in benchmarks.SUITE:
    program = benchmarks.load(name)
    budget = 0.25 * measure_image(program, hw)[0]
    base = simulate(program, hw)
    prof = profile_frequencies(base)
    results = []
    for freq in (None, prof):
        problem = extract_problem(program, hw, freq, r_spare=budget, x_limit=1.33)
        moved, _ = apply_placement(program, solve(problem).in_ram, hw)
        run = simulate(moved, hw)
        assert run.trace == base.trace
        results.append(run.energy)
    print(f"{name:10s} {base.energy:9.1f} {results[0]:9.1f} {results[1]:9.1f}   {budget:.1f} B")
