from pathlib import Path

import pytest
from hypothesis import strategies as st

from wsppbt import Constraint, Instance, Kind
from wsppbt.fileio import read_instance
from wsppbt.generator import GenConfig, generate

DATA = Path(__file__).parent / "data"
FIG1 = DATA / "fig1.wsp"

# plan matching the example's authorising assignment
FIG1_PLAN = {0: 2, 1: 2, 2: 0, 3: 4, 4: 4}


@pytest.fixture
def fig1() -> Instance:
    return read_instance(str(FIG1))


@pytest.fixture
def fig1_separations(fig1) -> Instance:
    """The example with its binding pair dropped (solver input needs no equals)."""
    return Instance(fig1.k, fig1.n, fig1.auth,
                    tuple(c for c in fig1.constraints if c.kind is not Kind.EQUALS))


@st.composite
def small_instances(draw, k_range=(1, 6), n_range=(1, 8), kinds=("ne", "am", "al")):
    """Random instances with arbitrary authorisations and a mix of constraint kinds."""
    k = draw(st.integers(*k_range))
    n = draw(st.integers(*n_range))
    auth = tuple(frozenset(draw(st.sets(st.integers(0, k - 1), max_size=k))) for _ in range(n))
    cons = []
    steps = st.integers(0, k - 1)
    if k >= 2 and "ne" in kinds:
        for _ in range(draw(st.integers(0, 4))):
            a, b = draw(st.lists(steps, min_size=2, max_size=2, unique=True))
            cons.append(Constraint.not_equals(a, b))
    if k >= 2:
        for kind in ("am", "al"):
            if kind not in kinds:
                continue
            for _ in range(draw(st.integers(0, 2))):
                scope = draw(st.lists(steps, min_size=2, max_size=min(k, 5), unique=True))
                r = draw(st.integers(1, len(scope)))
                cons.append(Constraint.at_most(r, scope) if kind == "am"
                            else Constraint.at_least(r, scope))
    uniq = {(c.kind, c.scope): c for c in cons}
    return Instance(k, n, auth, tuple(uniq.values()))


def wig(k, n, e, gamma, seed, auth_sizes="half"):
    return generate(GenConfig(k, n, e, gamma, seed, auth_sizes))
