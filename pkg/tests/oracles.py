"""Reference computations written directly from the cost-model definitions.

Nothing here imports the code under test except plain data containers, so a
bug in the library cannot be mirrored by the oracle.
"""

from __future__ import annotations

import math
from itertools import combinations


def block_energy(b, in_ram: set, e_flash: float, e_ram: float) -> float:
    """(C + T*[instrumented] + L*[in RAM]) * energy-per-cycle * frequency."""
    here = b.id in in_ram
    crosses = any((s in in_ram) != here for s in b.succ)
    cycles = b.cycles + (b.instr_cycles if crosses else 0) + (b.stall if here else 0)
    return cycles * (e_ram if here else e_flash) * b.freq


def energy(problem, in_ram) -> float:
    in_ram = set(in_ram)
    return sum(block_energy(b, in_ram, problem.e_flash, problem.e_ram) for b in problem.blocks)


def cycles(problem, in_ram) -> float:
    in_ram = set(in_ram)
    total = 0
    for b in problem.blocks:
        here = b.id in in_ram
        crosses = any((s in in_ram) != here for s in b.succ)
        total += (b.cycles + (b.instr_cycles if crosses else 0) + (b.stall if here else 0)) * b.freq
    return total


def ram_bytes(problem, in_ram) -> float:
    in_ram = set(in_ram)
    total = 0
    for b in problem.blocks:
        if b.id in in_ram:
            crosses = any(s not in in_ram for s in b.succ)
            total += b.size + (b.instr_size if crosses else 0)
    return total


def feasible(problem, in_ram, r_spare, x_limit) -> bool:
    if ram_bytes(problem, in_ram) > r_spare:
        return False
    if x_limit == math.inf:
        return True
    base = sum(b.cycles * b.freq for b in problem.blocks)
    return cycles(problem, in_ram) - base <= (x_limit - 1) * base


def best_energy(problem, r_spare=math.inf, x_limit=math.inf) -> float:
    ids = [b.id for b in problem.blocks]
    best = math.inf
    for k in range(len(ids) + 1):
        for subset in combinations(ids, k):
            if feasible(problem, subset, r_spare, x_limit):
                best = min(best, energy(problem, subset))
    return best


def case_energies(e0, t_a, p_s, k_e, k_t, T):
    """Unoptimized and optimized energy of one wake/sleep period."""
    plain = e0 + p_s * (T - t_a)
    opt = k_e * e0 + p_s * (T - k_t * t_a)
    return plain, opt
