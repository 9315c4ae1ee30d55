"""Global numeric policy and typed Bethe parameters.

Every stochastic routine in the package draws from a generator derived from
(seed, label), so results are reproducible and independent of call order.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

MAX_RANK = 8

ANNULUS_LO = 0.5
ANNULUS_HI = 2.0


def _label_entropy(label: str) -> int:
    return int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "little")


@dataclass(frozen=True)
class DeformationContext:
    """Deformation parameter q together with tolerances and RNG policy.

    q must be generic: nonzero and q^(2k) != 1 for k up to 2*MAX_RANK, so that
    no denominator of the trigonometric kernels can degenerate identically.
    """

    q: complex
    tol_identity: float = 1e-10
    tol_operator: float = 1e-10
    n_samples: int = 25
    seed: int = 0
    pole_margin: float = 1e-3

    def __post_init__(self):
        q = complex(self.q)
        if q == 0:
            raise DomainError("q must be nonzero")
        for k in range(1, 2 * MAX_RANK + 1):
            if abs(q ** (2 * k) - 1.0) < 1e-9:
                raise DomainError(f"q^{2 * k} is numerically a root of unity; q={q}")
        for name in ("tol_identity", "tol_operator"):
            tol = getattr(self, name)
            if not 0 < tol < 1e-3:
                raise DomainError(f"{name} must lie in (0, 1e-3), got {tol}")
        if self.n_samples < 1:
            raise DomainError("n_samples must be positive")
        if self.pole_margin <= 0:
            raise DomainError("pole_margin must be positive")

    def rng(self, label: str = "") -> np.random.Generator:
        """Deterministic generator for the stream named by `label`."""
        return np.random.default_rng(
            np.random.SeedSequence([self.seed & 0xFFFFFFFFFFFFFFFF, _label_entropy(label)])
        )


def sample_annulus(rng: np.random.Generator, n: int,
                   lo: float = ANNULUS_LO, hi: float = ANNULUS_HI) -> np.ndarray:
    """n complex points, area-uniform on the annulus lo <= |z| <= hi."""
    r = np.sqrt(rng.uniform(lo * lo, hi * hi, n))
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    return r * np.exp(1j * theta)


def random_context(seed: int, **overrides) -> DeformationContext:
    """Context with q drawn uniformly from the real interval [1.2, 1.8]."""
    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, _label_entropy("q")]))
    q = float(rng.uniform(1.2, 1.8))
    return DeformationContext(q=q, seed=seed, **overrides)


@dataclass(frozen=True)
class BetheParameterSet:
    """Typed spectral parameters: values[a-1] holds the type-a entries t_1^a..t_{n_a}^a.

    The boundary conventions n_0 = n_N = 0 are implicit; an empty type is an
    empty tuple. Values must be nonzero and pairwise distinct within a type.
    """

    values: tuple[tuple[complex, ...], ...] = field(default_factory=tuple)

    def __post_init__(self):
        vals = tuple(tuple(complex(v) for v in grp) for grp in self.values)
        object.__setattr__(self, "values", vals)
        for a, grp in enumerate(vals, start=1):
            for v in grp:
                if v == 0:
                    raise DomainError(f"type-{a} parameter is zero")
            for i in range(len(grp)):
                for k in range(i + 1, len(grp)):
                    if grp[i] == grp[k]:
                        raise DomainError(f"coincident type-{a} parameters at {grp[i]}")

    @property
    def nbar(self) -> tuple[int, ...]:
        return tuple(len(grp) for grp in self.values)

    @property
    def total(self) -> int:
        return sum(self.nbar)

    def type_values(self, a: int) -> tuple[complex, ...]:
        """Entries of type a (1-based); types outside the layout are empty."""
        if 1 <= a <= len(self.values):
            return self.values[a - 1]
        return ()

    def value(self, a: int, j: int) -> complex:
        return self.values[a - 1][j - 1]

    def all_values(self) -> tuple[complex, ...]:
        return tuple(v for grp in self.values for v in grp)

    def min_relative_separation(self) -> float:
        """Smallest same-type relative gap (inf when fewer than two entries)."""
        best = np.inf
        for grp in self.values:
            for i in range(len(grp)):
                for k in range(i + 1, len(grp)):
                    sep = abs(grp[i] - grp[k]) / max(abs(grp[i]), abs(grp[k]))
                    best = min(best, sep)
        return best

    def ensure_separated(self, margin: float) -> None:
        if self.min_relative_separation() <= margin:
            raise DomainError(
                f"same-type parameters closer than margin {margin}"
            )

    def replace_type(self, a: int, new_values) -> "BetheParameterSet":
        vals = list(self.values)
        vals[a - 1] = tuple(new_values)
        return BetheParameterSet(tuple(vals))

    def scaled(self, c: complex) -> "BetheParameterSet":
        return BetheParameterSet(tuple(tuple(c * v for v in grp) for grp in self.values))
