"""Walk one small program through the whole flow.

The cheapest RAM set for ``sum5`` is found from static frequency estimates.
The program is then rewritten for a tighter budget and checked against the
original in the simulator.
"""

from blockplace import (
    Profile,
    apply_placement,
    benchmarks,
    default_hw,
    evaluate_assignment,
    extract_problem,
    print_program,
    profile_frequencies,
    simulate,
    solve,
)

hw = default_hw()
program = benchmarks.load("sum5")
print(print_program(program))

# Static estimate: 10 ** loop depth.
problem = extract_problem(program, hw, r_spare=64, x_limit=1.5)
for b in problem.blocks:
    print(f"{b.id:6s} S={b.size:3d} C={b.cycles:2d} F={b.freq:3d} K={b.instr_size:2d} T={b.instr_cycles}")

sol = solve(problem)
base = evaluate_assignment(problem, ())
print("\nRAM set:", sorted(sol.in_ram))
print(f"model energy {base.energy} -> {sol.energy}, time factor {sol.metrics.time_factor:.3f}")

# A tighter budget forces a split placement; the rewritten program now
# carries long jumps between the memories.
tight = extract_problem(program, hw, r_spare=16)
partial = solve(tight)
print("\nwith 16 bytes of RAM:", sorted(partial.in_ram))
moved, report = apply_placement(program, partial.in_ram, hw)
print(print_program(moved))
print("rewritten terminators:", report.rewritten)

before = simulate(program, hw)
after = simulate(moved, hw)
assert before.trace == after.trace
print(f"trace {after.trace}: cycles {before.cycles} -> {after.cycles}, energy {before.energy} -> {after.energy}")

# Profiled counts replace the static guess.
prof = profile_frequencies(before)
print("profile:", dict(prof.counts))
print("re-solved with profile:", sorted(solve(extract_problem(program, hw, prof, r_spare=16)).in_ram))
