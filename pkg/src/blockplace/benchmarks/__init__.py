"""Bundled synthetic programs and problem instances.

``SUITE`` lists the benchmark programs; ``sum5`` and ``loop3`` are small
reference inputs used throughout the tests and demos.
"""

from __future__ import annotations

from importlib import resources

from ..analysis import PlacementProblem, problem_from_json
from ..ir import Program, parse_program

SUITE = ("mm3", "fir", "bubble", "checksum", "countdown")
REFERENCE = ("sum5", "loop3")


def source(name: str) -> str:
    return resources.files(__package__).joinpath(f"{name}.cfgir").read_text()


def load(name: str) -> Program:
    return parse_program(source(name))


def load_problem(name: str = "loop3") -> PlacementProblem:
    return problem_from_json(resources.files(__package__).joinpath(f"{name}.json").read_text())


def names() -> list[str]:
    return sorted(p.name[: -len(".cfgir")] for p in resources.files(__package__).iterdir() if p.name.endswith(".cfgir"))
