"""Random WSP instances: WIG(k, n, e, gamma).

Each family of random choices draws from its own SplitMix64 stream derived
from the seed.  Consequently two configurations that differ only in ``e``
share authorisations and counting constraints, and the smaller not-equals
set is a prefix of the larger one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .core import Constraint, Instance, WSPError
from .rng import SplitMix64, derive_seed

SCOPE_SIZE = 5
COUNT_R = 3

_AUTH, _NE, _AT_MOST, _AT_LEAST = range(4)

# Largest authorisation-list size: "half" draws from 1..floor(k/2); "footnote"
# from 1..floor((k-1)/2), which differs for even k.
AUTH_SIZES = {"half": lambda k: k // 2, "footnote": lambda k: (k - 1) // 2}


def max_auth_size(k: int, auth_sizes: str = "half") -> int:
    return AUTH_SIZES[auth_sizes](k)


class GeneratorConfigError(WSPError):
    pass


@dataclass(frozen=True)
class GenConfig:
    k: int
    n: int
    e: int
    gamma: int
    seed: int = 0
    auth_sizes: str = "half"

    def validate(self) -> None:
        if self.auth_sizes not in AUTH_SIZES:
            raise GeneratorConfigError(f"auth_sizes must be one of {sorted(AUTH_SIZES)}")
        if self.k < 2:
            raise GeneratorConfigError("k must be at least 2")
        if max_auth_size(self.k, self.auth_sizes) < 1:
            raise GeneratorConfigError(f"no valid authorisation size for k={self.k} with {self.auth_sizes!r}")
        if self.n < 0 or self.e < 0 or self.gamma < 0:
            raise GeneratorConfigError("n, e and gamma must be non-negative")
        if self.e > comb(self.k, 2):
            raise GeneratorConfigError(
                f"e={self.e} exceeds the {comb(self.k, 2)} distinct step pairs for k={self.k}")
        if self.gamma > 0 and self.k < SCOPE_SIZE:
            raise GeneratorConfigError(f"gamma > 0 needs k >= {SCOPE_SIZE}")
        if self.gamma > comb(self.k, SCOPE_SIZE):
            raise GeneratorConfigError(
                f"gamma={self.gamma} exceeds the {comb(self.k, SCOPE_SIZE)} distinct 5-scopes")


def _stream(seed: int, family: int) -> SplitMix64:
    return SplitMix64(derive_seed(seed, family))


def _scopes(rng: SplitMix64, k: int, count: int, size: int) -> list[tuple[int, ...]]:
    seen: set[tuple[int, ...]] = set()
    out = []
    while len(out) < count:
        scope = tuple(sorted(rng.sample(k, size)))
        if scope not in seen:
            seen.add(scope)
            out.append(scope)
    return out


def generate(cfg: GenConfig) -> Instance:
    cfg.validate()
    k = cfg.k
    top = max_auth_size(k, cfg.auth_sizes)
    rng = _stream(cfg.seed, _AUTH)
    auth = []
    for _ in range(cfg.n):
        size = 1 + rng.below(top)
        auth.append(frozenset(rng.sample(k, size)))

    cons = [Constraint.not_equals(*p) for p in _scopes(_stream(cfg.seed, _NE), k, cfg.e, 2)]
    cons += [Constraint.at_most(COUNT_R, s)
             for s in _scopes(_stream(cfg.seed, _AT_MOST), k, cfg.gamma, SCOPE_SIZE)]
    cons += [Constraint.at_least(COUNT_R, s)
             for s in _scopes(_stream(cfg.seed, _AT_LEAST), k, cfg.gamma, SCOPE_SIZE)]
    return Instance(k, cfg.n, tuple(auth), tuple(cons))


def expected_auth_fraction(k: int, auth_sizes: str = "half") -> Fraction:
    """Expected fraction of users authorised for a fixed step."""
    if k < 2:
        raise GeneratorConfigError("k must be at least 2")
    top = max_auth_size(k, auth_sizes)
    if top < 1:
        raise GeneratorConfigError(f"no valid authorisation size for k={k} with {auth_sizes!r}")
    return Fraction(top + 1, 2) / k
