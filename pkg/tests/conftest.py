"""Session-wide caches: builders, discovered fusion data, and bases."""

from __future__ import annotations

from types import SimpleNamespace

import pytest

from biunitary import (
    LoopBasis,
    StringBasis,
    build_cyclic_group,
    build_dynkin,
    build_trivial,
    discover_irreducibles,
)


def make_builder(name: str):
    kind, _, arg = name.partition(":")
    if kind == "dynkin":
        return build_dynkin(arg)
    if kind == "trivial":
        return build_trivial(int(arg))
    if kind == "cyclic":
        return build_cyclic_group(int(arg))
    raise ValueError(name)


ALL_BUILDERS = [
    "dynkin:A3", "dynkin:A4", "dynkin:A5", "dynkin:A6", "dynkin:A7",
    "dynkin:D4", "dynkin:D5", "dynkin:E6",
    "trivial:2", "trivial:3",
    "cyclic:2", "cyclic:3", "cyclic:4", "cyclic:5",
]


@pytest.fixture(scope="session")
def systems():
    """name -> namespace with the raw connection, fusion data, reps, and bases."""
    cache: dict[str, SimpleNamespace] = {}

    def get(name: str) -> SimpleNamespace:
        if name not in cache:
            conn = make_builder(name)
            fd, reps, wn = discover_irreducibles(conn, seed=3)
            cache[name] = SimpleNamespace(name=name, conn=conn, fd=fd, reps=reps,
                                          wn=wn, _bases={})
        return cache[name]

    return get


@pytest.fixture(scope="session")
def bases_for(systems):
    """(name, k) -> (string basis, loop basis) on the normalized weights."""

    def get(name: str, k: int):
        sys_ = systems(name)
        if k not in sys_._bases:
            sb = StringBasis(sys_.wn.top, k)
            lb = LoopBasis(sb, sys_.wn.mu)
            sys_._bases[k] = (sb, lb)
        return sys_._bases[k]

    return get
