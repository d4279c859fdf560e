# ccwb/builtins.py
"""
Named tables and fooling families the CLI accepts wherever a ccmat path is expected.

    u, m, m-figure, s-figure, f4, g3, gn:N, eq:N, ip:N, disj:N, depth3
"""

from pathlib import Path

from ccwb.constructions import honest, separation
from ccwb.errors import UsageError
from ccwb.protocols import example_depth3_table
from ccwb.rectangles import FoolingFamily
from ccwb.tables import NAMED_FAMILIES, ValueTable, gen_g3, gen_gn, gen_named, read_ccmat

TABLE_BUILTINS = ("u", "m", "m-figure", "s-figure", "f4", "g3", "gn:N", "eq:N", "ip:N", "disj:N", "depth3")
FAMILY_BUILTINS = ("u-horizontal", "u-vertical", "m-horizontal", "m-vertical")


def _parameter(name: str) -> tuple[str, int | None]:
    if ":" not in name:
        return name, None
    family, _, n = name.partition(":")
    try:
        return family, int(n)
    except ValueError:
        raise UsageError(f"bad size in builtin '{name}'") from None


def builtin_table(name: str) -> ValueTable:
    family, n = _parameter(name.lower())
    if n is not None:
        if family == "gn":
            return gen_gn(n)
        if family in NAMED_FAMILIES:
            return gen_named(family, n)
        raise UsageError(f"unknown builtin '{name}'")
    builders = {
        "u": separation.build_U,
        "m": separation.build_M,
        "m-figure": separation.figure_M,
        "s-figure": separation.figure_S,
        "f4": honest.f4_table,
        "g3": gen_g3,
        "depth3": example_depth3_table,
    }
    if family not in builders:
        raise UsageError(f"unknown builtin '{name}' (choose from {', '.join(TABLE_BUILTINS)})")
    return builders[family]()


def resolve_table(source: str) -> ValueTable:
    """A ccmat path if one exists under that name, otherwise a builtin."""
    path = Path(source)
    if path.is_file():
        return read_ccmat(path)
    return builtin_table(source)


def builtin_family(name: str) -> FoolingFamily:
    builders = {
        "u-horizontal": separation.fooling_family_horizontal,
        "u-vertical": separation.fooling_family_vertical,
        "m-horizontal": lambda: separation.m_family(separation.fooling_family_horizontal()),
        "m-vertical": lambda: separation.m_family(separation.fooling_family_vertical()),
    }
    if name not in builders:
        raise UsageError(f"unknown family '{name}' (choose from {', '.join(FAMILY_BUILTINS)})")
    return builders[name]()
