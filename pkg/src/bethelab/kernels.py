"""Scalar rational kernels of the nested Bethe ansatz.

All formal series are evaluated pointwise as rational functions of the
spectral variables; every kernel is a finite product/sum of the two atoms

    coupling(x, y)  = (q - x/(q y)) / (1 - x/y)
    crossing(t, u)  = (q t - u/q) / (t - u)

and therefore homogeneous of degree zero under simultaneous scaling of all
spectral arguments. Evaluation points too close to a denominator zero raise
PoleError instead of returning garbage.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .context import BetheParameterSet, DeformationContext, sample_annulus
from .errors import DomainError, PoleError, SamplingExhaustedError

LambdaLike = Callable[[complex], complex]


def _guard(num: complex, scale: float, margin: float, what: str) -> None:
    if abs(num) <= margin * max(scale, 1e-300):
        raise PoleError(f"{what}: denominator {abs(num):.3e} below margin")


def coupling(x: complex, y: complex, ctx: DeformationContext) -> complex:
    """(q - q^-1 x/y) / (1 - x/y), the weight attached to an ordered pair."""
    q = ctx.q
    _guard(y - x, max(abs(x), abs(y)), ctx.pole_margin, "coupling")
    return (q - x / (q * y)) / (1.0 - x / y)


def crossing(t: complex, u: complex, ctx: DeformationContext) -> complex:
    """(q t - q^-1 u) / (t - u)."""
    q = ctx.q
    _guard(t - u, max(abs(t), abs(u)), ctx.pole_margin, "crossing")
    return (q * t - u / q) / (t - u)


# ---------------------------------------------------------------------------
# transfer-matrix eigenvalue and Bethe equations


def _tau_terms(lambdas: Sequence[LambdaLike], params: BetheParameterSet,
               t: complex, ctx: DeformationContext,
               margin: float | None = None) -> list[complex]:
    q = ctx.q
    margin = ctx.pole_margin if margin is None else margin
    terms = []
    for i in range(1, len(lambdas) + 1):
        term = complex(lambdas[i - 1](t))
        for u in params.type_values(i - 1):
            _guard(t - u, max(abs(t), abs(u)), margin, "transfer_eigenvalue")
            term *= (q * t - u / q) / (t - u)
        for u in params.type_values(i):
            _guard(t - u, max(abs(t), abs(u)), margin, "transfer_eigenvalue")
            term *= (t / q - q * u) / (t - u)
        terms.append(term)
    return terms


def transfer_eigenvalue(lambdas: Sequence[LambdaLike], params: BetheParameterSet,
                        t: complex, ctx: DeformationContext) -> complex:
    """Candidate transfer-matrix eigenvalue at spectral point t.

    lambdas are the N vacuum eigenvalue functions; params holds the N-1 typed
    groups of Bethe parameters (empty groups give bare sum of lambdas).
    """
    return sum(_tau_terms(lambdas, params, t, ctx))


def bethe_rhs(i: int, j: int, params: BetheParameterSet, ctx: DeformationContext) -> complex:
    """Right-hand side of Bethe equation (i, j): the triple product over
    same-type and adjacent-type parameters."""
    q = ctx.q
    tji = params.value(i, j)
    rhs = 1.0 + 0j
    for m, u in enumerate(params.type_values(i), start=1):
        if m == j:
            continue
        _guard(tji / q - q * u, max(abs(tji), abs(u)), ctx.pole_margin, "bethe_rhs")
        rhs *= (q * tji - u / q) / (tji / q - q * u)
    for u in params.type_values(i - 1):
        _guard(q * tji - u / q, max(abs(tji), abs(u)), ctx.pole_margin, "bethe_rhs")
        rhs *= (tji - u) / (q * tji - u / q)
    for u in params.type_values(i + 1):
        _guard(tji - u, max(abs(tji), abs(u)), ctx.pole_margin, "bethe_rhs")
        rhs *= (tji / q - q * u) / (tji - u)
    return rhs


def bethe_residual(i: int, j: int, params: BetheParameterSet,
                   lambdas: Sequence[LambdaLike], ctx: DeformationContext) -> complex:
    """lambda_i/lambda_{i+1} at t_j^i minus the Bethe RHS; zero iff equation (i,j) holds."""
    if not (1 <= i <= len(lambdas) - 1):
        raise DomainError(f"equation type {i} outside 1..{len(lambdas) - 1}")
    if not (1 <= j <= len(params.type_values(i))):
        raise DomainError(f"equation index {j} outside type-{i} range")
    tji = params.value(i, j)
    lam_ratio = complex(lambdas[i - 1](tji)) / complex(lambdas[i](tji))
    return lam_ratio - bethe_rhs(i, j, params, ctx)


def transfer_eigenvalue_residue(lambdas: Sequence[LambdaLike], params: BetheParameterSet,
                                a: int, j: int, ctx: DeformationContext,
                                radius_rel: float = 1e-4,
                                n_points: int = 64) -> tuple[float, float]:
    """Contour residue of the eigenvalue at t = t_j^a, with a local scale.

    Returns (|net residue|, scale) / |t_j^a|, where the scale is the largest
    per-term contour residue: the two terms adjacent to type a carry opposite
    pole contributions that cancel exactly on shell, so residue/scale measures
    cancellation quality independently of the contour radius.
    """
    center = params.value(a, j)
    r = radius_rel * abs(center)
    n_terms = len(lambdas)
    acc = np.zeros(n_terms, dtype=complex)
    for k in range(n_points):
        w = np.exp(2j * np.pi * k / n_points)
        terms = _tau_terms(lambdas, params, center + r * w, ctx, margin=1e-12)
        acc += w * np.asarray(terms)
    acc *= r / n_points
    residue = abs(acc.sum()) / abs(center)
    scale = float(np.max(np.abs(acc))) / abs(center)
    return residue, scale


# ---------------------------------------------------------------------------
# modified-vector prefactor and nesting coefficients


def same_type_weight(params: BetheParameterSet, ctx: DeformationContext) -> complex:
    """Product of coupling(t_l^a, t_l'^a) over all ordered same-type pairs l < l'."""
    out = 1.0 + 0j
    for a in range(1, len(params.values) + 1):
        grp = params.type_values(a)
        for l in range(len(grp)):
            for lp in range(l + 1, len(grp)):
                out *= coupling(grp[l], grp[lp], ctx)
    return out


def nesting_overlap(upper: Sequence[complex], lower: Sequence[complex],
                    ctx: DeformationContext) -> complex:
    """Rank-lowering coefficient coupling k upper-type to k lower-type points.

    Slot m pairs lower[m] with upper[m]; later lower slots couple to earlier
    upper slots through the ordinary pair weight.
    """
    if len(upper) != len(lower):
        raise DomainError("nesting_overlap needs equal-length tuples")
    k = len(upper)
    out = 1.0 + 0j
    for m in range(k):
        _guard(upper[m] - lower[m], max(abs(upper[m]), abs(lower[m])),
               ctx.pole_margin, "nesting_overlap")
        out *= 1.0 / (1.0 - lower[m] / upper[m])
        for mp in range(m + 1, k):
            out *= coupling(lower[mp], upper[m], ctx)
    return out


def nesting_overlap_alt(upper: Sequence[complex], lower: Sequence[complex],
                        ctx: DeformationContext) -> complex:
    """Second printed form of the nesting coefficient; must agree with
    nesting_overlap as a rational identity."""
    if len(upper) != len(lower):
        raise DomainError("nesting_overlap_alt needs equal-length tuples")
    k = len(upper)
    out = 1.0 + 0j
    for m in range(k):
        _guard(upper[m] - lower[m], max(abs(upper[m]), abs(lower[m])),
               ctx.pole_margin, "nesting_overlap_alt")
        out *= 1.0 / (1.0 - lower[m] / upper[m])
        for mp in range(m):
            out *= coupling(lower[m], upper[mp], ctx)
    return out


def string_overlap(params: BetheParameterSet, ctx: DeformationContext) -> complex:
    """Product of nesting overlaps across adjacent types for a layout with
    non-increasing counts m_1 >= m_2 >= ... (the admissible string shapes)."""
    mbar = params.nbar
    for a in range(len(mbar) - 1):
        if mbar[a] < mbar[a + 1]:
            raise DomainError(f"inadmissible layout {mbar}: counts must be non-increasing")
    out = 1.0 + 0j
    for a in range(1, len(mbar)):
        k = mbar[a]  # count of type a+1
        if k == 0:
            continue
        upper = [params.value(a + 1, m) for m in range(1, k + 1)]
        lower = [params.value(a, mbar[a - 1] - k + m) for m in range(1, k + 1)]
        out *= nesting_overlap(upper, lower, ctx)
    return out


def split_weight(params: BetheParameterSet, sbar: Sequence[int], ctx: DeformationContext,
                 lbar: Sequence[int] | None = None,
                 rbar: Sequence[int] | None = None) -> complex:
    """Cross-type weight created when each type-a segment (l_a, r_a] is split
    at s_a: couples the high part of type a to the low part of type a+1."""
    K = len(params.values)
    lbar = tuple(lbar) if lbar is not None else (0,) * K
    rbar = tuple(rbar) if rbar is not None else params.nbar
    sbar = tuple(sbar)
    if not (len(lbar) == len(rbar) == len(sbar) == K):
        raise DomainError("split indices must cover every type")
    for a in range(K):
        if not lbar[a] <= sbar[a] <= rbar[a]:
            raise DomainError(f"need l <= s <= r for type {a + 1}")
    out = 1.0 + 0j
    for a in range(1, K):
        for ell in range(sbar[a - 1] + 1, rbar[a - 1] + 1):
            for ellp in range(lbar[a] + 1, sbar[a] + 1):
                out *= coupling(params.value(a, ell), params.value(a + 1, ellp), ctx)
    return out


def top_split_weight(m: int, params: BetheParameterSet, ctx: DeformationContext) -> complex:
    """Weight attached to peeling the top index off each of the first m types."""
    nbar = params.nbar
    if m < 1:
        raise DomainError("m must be >= 1")
    for a in range(1, m + 1):
        if a <= len(nbar) and nbar[a - 1] == 0:
            raise DomainError(f"type {a} is empty; top index undefined")
    out = 1.0 + 0j
    for a in range(1, m):
        top_a = params.value(a, nbar[a - 1])
        top_next = params.value(a + 1, nbar[a])
        _guard(top_next - top_a, max(abs(top_a), abs(top_next)), ctx.pole_margin,
               "top_split_weight")
        out *= 1.0 / (1.0 - top_a / top_next)
        for jj in range(1, nbar[a]):
            out *= coupling(top_a, params.value(a + 1, jj), ctx)
    top_m = params.value(m, nbar[m - 1])
    for jj in range(1, len(params.type_values(m + 1)) + 1):
        out *= coupling(top_m, params.value(m + 1, jj), ctx)
    return out


def shift_weight(m: int, j: int, params: BetheParameterSet, ctx: DeformationContext) -> complex:
    """Weight produced when a dual coordinate cascades from depth j down to m."""
    if j < 2 or m < 0 or m > j - 2:
        raise DomainError(f"need 0 <= m <= j-2 with j >= 2, got m={m} j={j}")
    nbar = params.nbar
    for a in range(max(m, 1), j):
        if a > len(nbar) or nbar[a - 1] == 0:
            raise DomainError(f"type {a} required nonempty for shift_weight(m={m}, j={j})")
    out = 1.0 + 0j
    for a in range(m + 1, j - 1):
        x = params.value(a, 1)
        y = params.value(a + 1, 1)
        _guard(y - x, max(abs(x), abs(y)), ctx.pole_margin, "shift_weight")
        out *= (x / y) / (1.0 - x / y)
        for kk in range(2, nbar[a - 1] + 1):
            out *= coupling(params.value(a, kk), y, ctx)
    if m >= 1:
        y = params.value(m + 1, 1)
        for kk in range(1, nbar[m - 1]):
            out *= coupling(params.value(m, kk), y, ctx)
    return out


def partial_fraction_residual(j: int, t: complex, points: Sequence[complex]) -> float:
    """|three-group telescoping expression| for chain points s_1..s_{j-1}.

    The expression vanishes identically: the gap sum over consecutive
    differences telescopes to s_{j-1} - s_1.
    """
    if j < 3:
        raise DomainError("telescoping identity needs j >= 3")
    pts = [complex(p) for p in points]
    if len(pts) != j - 1:
        raise DomainError(f"need {j - 1} chain points, got {len(pts)}")
    everything = pts + [complex(t)]
    for ii in range(len(everything)):
        for kk in range(ii + 1, len(everything)):
            if everything[ii] == everything[kk]:
                raise PoleError("coincident points in partial_fraction_residual")
    gaps = [pts[a + 1] - pts[a] for a in range(j - 2)]
    inv_all = 1.0 + 0j
    for g in gaps:
        inv_all /= g
    first = inv_all / (t - pts[-1])
    second = inv_all / (t - pts[0])
    third = 0.0 + 0j
    for m in range(1, j - 1):
        acc = 1.0 + 0j
        for a in range(j - 2):
            if a != m - 1:
                acc /= gaps[a]
        third += acc
    third /= (t - pts[-1]) * (t - pts[0])
    return abs(first - second - third)


# ---------------------------------------------------------------------------
# rational functions and probabilistic equality


@dataclass(frozen=True)
class RationalFunction:
    """Black-box rational function: named slots, a pointwise evaluator, and an
    optional relative distance to the declared pole locus."""

    slots: tuple[str, ...]
    fn: Callable[..., complex]
    pole_distance: Callable[..., float] | None = None

    def __call__(self, *args: complex) -> complex:
        if len(args) != len(self.slots):
            raise DomainError(f"expected {len(self.slots)} arguments, got {len(args)}")
        return complex(self.fn(*args))

    def distance(self, *args: complex) -> float:
        if self.pole_distance is None:
            return math.inf
        return float(self.pole_distance(*args))


def hyperplane_distance(*conditions: Callable[..., tuple[complex, float]]):
    """Build a pole_distance callable from conditions returning (value, scale)."""
    def dist(*args: complex) -> float:
        best = math.inf
        for cond in conditions:
            val, scale = cond(*args)
            best = min(best, abs(val) / max(scale, 1e-300))
        return best
    return dist


@dataclass
class EqualityReport:
    label: str
    passed: bool
    points: list[tuple[complex, ...]] = field(default_factory=list)
    diffs: list[float] = field(default_factory=list)

    @property
    def max_diff(self) -> float:
        return max(self.diffs) if self.diffs else 0.0


def rational_equal(f: RationalFunction, g: RationalFunction, ctx: DeformationContext,
                   label: str = "rational_equal") -> tuple[bool, EqualityReport]:
    """Randomized equality test on the sampling annulus.

    True iff the relative difference stays within tol_identity at all
    n_samples points, every point kept clear of both declared pole loci.
    """
    if f.slots != g.slots:
        raise DomainError(f"slot mismatch: {f.slots} vs {g.slots}")
    rng = ctx.rng(label)
    nvar = len(f.slots)
    report = EqualityReport(label=label, passed=True)
    for _ in range(ctx.n_samples):
        failures = 0
        while True:
            pt = tuple(sample_annulus(rng, nvar))
            if f.distance(*pt) > ctx.pole_margin and g.distance(*pt) > ctx.pole_margin:
                break
            failures += 1
            if failures >= 100:
                raise SamplingExhaustedError(
                    f"{label}: could not sample clear of the pole locus")
        fv, gv = f(*pt), g(*pt)
        denom = max(abs(fv), abs(gv))
        rel = abs(fv - gv) / denom if denom > 0 else 0.0
        report.points.append(pt)
        report.diffs.append(rel)
        if rel > ctx.tol_identity:
            report.passed = False
    return report.passed, report


class KernelId(enum.Enum):
    """Closed tag set; each tag names exactly one scalar kernel."""

    TRANSFER_EIGENVALUE = "transfer_eigenvalue"
    BETHE_RHS = "bethe_rhs"
    PAIR_WEIGHT = "same_type_weight"
    NESTING_OVERLAP = "nesting_overlap"
    STRING_OVERLAP = "string_overlap"
    SPLIT_WEIGHT = "split_weight"
    TOP_SPLIT_WEIGHT = "top_split_weight"
    SHIFT_WEIGHT = "shift_weight"

    @property
    def implementation(self) -> Callable:
        return _KERNEL_TABLE[self]


_KERNEL_TABLE = {
    KernelId.TRANSFER_EIGENVALUE: transfer_eigenvalue,
    KernelId.BETHE_RHS: bethe_rhs,
    KernelId.PAIR_WEIGHT: same_type_weight,
    KernelId.NESTING_OVERLAP: nesting_overlap,
    KernelId.STRING_OVERLAP: string_overlap,
    KernelId.SPLIT_WEIGHT: split_weight,
    KernelId.TOP_SPLIT_WEIGHT: top_split_weight,
    KernelId.SHIFT_WEIGHT: shift_weight,
}
