"""Off-shell nested Bethe vectors and their transfer-matrix action.

Construction fixed here (and locked by the recursion-consistency tests):
the rank-N vector for typed parameters (tbar^1, ..., tbar^{N-1}) is built
from the rank-(N-1) vector of the auxiliary chain whose sites carry the
type-1 parameters as inhomogeneities and whose twist drops the first entry;
auxiliary color b maps to creation entry T_{1, b+1}. Creation operators are
applied with ascending parameter index acting first on the left:

    w = sum_c  aux_c  T_{1,a_1}(t_1^1) ... T_{1,a_n}(t_n^1) Omega.

Whether same-type creation entries commute is measured, never assumed; the
asserted invariant under parameter exchange is collinearity of the modified
vector, not equality.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .context import BetheParameterSet
from .errors import DegenerateVectorError, DomainError, IllPosedDecompositionError, PoleError
from .kernels import bethe_residual, same_type_weight, transfer_eigenvalue
from .repcore import ChainSpec, monodromy, transfer, vacuum_data

RANK_DEFICIENCY_TOL = 1e-8


@dataclass(frozen=True)
class BetheVector:
    chain: ChainSpec
    params: BetheParameterSet
    vector: np.ndarray
    form: str  # "plain" or "modified"

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


def is_admissible(chain: ChainSpec, nbar: tuple[int, ...]) -> bool:
    """Sector shape check: L >= n_1 >= n_2 >= ... >= n_{N-1} >= 0."""
    seq = (chain.L,) + tuple(nbar)
    return all(seq[i] >= seq[i + 1] for i in range(len(seq) - 1))


def occupancy(index: int, N: int, L: int) -> tuple[int, ...]:
    """Color counts of a basis state (site 1 is the slowest index)."""
    digits = []
    x = index
    for _ in range(L):
        digits.append(x % N)
        x //= N
    return tuple(digits.count(c) for c in range(N))


def expected_occupancy(L: int, nbar: tuple[int, ...]) -> tuple[int, ...]:
    counts = (L,) + tuple(nbar) + (0,)
    return tuple(counts[c] - counts[c + 1] for c in range(len(nbar) + 1))


def _check_parameters_clear_of_poles(chain: ChainSpec, params: BetheParameterSet) -> None:
    q = chain.ctx.q
    margin = chain.ctx.pole_margin
    for t in params.type_values(1):
        for zl in chain.z:
            if abs(q * t - zl / q) <= margin * max(abs(t), abs(zl)):
                raise PoleError(f"type-1 parameter {t} hits an R-matrix pole at site {zl}")


def nested_vector(chain: ChainSpec, params: BetheParameterSet) -> BetheVector:
    """Plain off-shell vector by recursion over the rank.

    Inadmissible layouts return the zero vector with a warning (zero is the
    analytically correct value for an over-filled sector).
    """
    nbar = params.nbar
    if len(nbar) != chain.N - 1:
        raise DomainError(f"expected {chain.N - 1} parameter types, got {len(nbar)}")
    if not is_admissible(chain, nbar):
        warnings.warn(f"inadmissible sector {nbar} for L={chain.L}: vector vanishes",
                      stacklevel=2)
        return BetheVector(chain, params, np.zeros(chain.dim, dtype=complex), "plain")
    _check_parameters_clear_of_poles(chain, params)
    vec = _nested(chain, params)
    return BetheVector(chain, params, vec, "plain")


def _nested(chain: ChainSpec, params: BetheParameterSet) -> np.ndarray:
    N, L = chain.N, chain.L
    omega = np.zeros(chain.dim, dtype=complex)
    omega[0] = 1.0
    nbar = params.nbar
    if params.total == 0:
        return omega
    n1 = nbar[0]
    creators = [monodromy(chain, t) for t in params.type_values(1)]
    if N == 2:
        vec = omega
        for pos in range(n1 - 1, -1, -1):
            vec = creators[pos].entry(1, 2) @ vec
        return vec
    aux_chain = ChainSpec(N=N - 1, L=n1, z=params.type_values(1),
                          kappa=chain.kappa[1:], ctx=chain.ctx)
    aux_params = BetheParameterSet(params.values[1:])
    aux = _nested(aux_chain, aux_params)
    out = np.zeros(chain.dim, dtype=complex)
    base = N - 1
    for idx in np.flatnonzero(np.abs(aux) > 0):
        digits = []
        x = int(idx)
        for _ in range(n1):
            digits.append(x % base)
            x //= base
        digits.reverse()  # site 1 first
        vec = omega
        for pos in range(n1 - 1, -1, -1):
            vec = creators[pos].entry(1, digits[pos] + 2) @ vec
        out += aux[idx] * vec
    return out


def modified_vector(chain: ChainSpec, params: BetheParameterSet) -> BetheVector:
    """Plain vector rescaled by the pair weight and the vacuum eigenvalues of
    the next-type diagonal coordinate at each parameter."""
    plain = nested_vector(chain, params)
    _, lambdas = vacuum_data(chain)
    pref = same_type_weight(params, chain.ctx)
    for a in range(2, chain.N + 1):
        for t in params.type_values(a - 1):
            pref *= lambdas[a - 1](t)
    return BetheVector(chain, params, pref * plain.vector, "modified")


def on_shell_residual(chain: ChainSpec, params: BetheParameterSet,
                      t: complex) -> tuple[float, complex]:
    """Eigenvector residual ||T(t) w - tau w|| / ||w|| for the modified vector,
    together with the eigenvalue candidate tau."""
    w = modified_vector(chain, params)
    if w.norm < 1e-12:
        raise DegenerateVectorError(
            f"vanishing vector in sector {params.nbar} (L={chain.L})")
    _, lambdas = vacuum_data(chain)
    tau = transfer_eigenvalue(lambdas, params, t, chain.ctx)
    resid = np.linalg.norm(transfer(chain, t) @ w.vector - tau * w.vector) / w.norm
    return float(resid), tau


@dataclass(frozen=True)
class UnwantedReport:
    """Decomposition of the off-eigenvector remainder over the candidate basis
    with one Bethe parameter replaced by the spectral point."""

    coefficients: tuple[complex, ...]
    closed_form: tuple[complex, ...]
    fit_residual: float
    remainder_norm: float
    bethe_residuals: tuple[complex, ...]
    scale: float
    basis_condition: float


def unwanted_closed_form(chain: ChainSpec, params: BetheParameterSet,
                         t: complex) -> tuple[complex, ...]:
    """Rank-2 coefficient of the m-th candidate vector, fixed against a
    least-squares oracle on one and two excitations and asserted beyond:

        c_m = (q - 1/q) t_m/(t - t_m) [ lam_1(t_m) prod_{j != m} (q t_j - t_m/q)/(t_j - t_m)
                                      - lam_2(t_m) prod_{j != m} (q t_m - t_j/q)/(t_m - t_j) ].
    """
    q = chain.ctx.q
    _, lambdas = vacuum_data(chain)
    roots = params.type_values(1)
    out = []
    for m, tm in enumerate(roots):
        p1 = 1.0 + 0j
        p2 = 1.0 + 0j
        for j, tj in enumerate(roots):
            if j == m:
                continue
            p1 *= (q * tj - tm / q) / (tj - tm)
            p2 *= (q * tm - tj / q) / (tm - tj)
        out.append((q - 1 / q) * tm / (t - tm)
                   * (lambdas[0](tm) * p1 - lambdas[1](tm) * p2))
    return tuple(out)


def unwanted_decomposition(chain: ChainSpec, params: BetheParameterSet,
                           t: complex) -> UnwantedReport:
    """Rank-2 unwanted-term extraction by least squares against the basis
    Phi_m = T_{1,2}(t) prod_{j != m} T_{1,2}(t_j) Omega.

    The basis is generically independent only when the number of excitations
    does not exceed the dimension of its weight block (n <= C(L, n)); outside
    that regime the decomposition is structurally rank deficient and raises.
    """
    if chain.N != 2:
        raise DomainError("unwanted-term decomposition is a rank-2 operation")
    n = params.nbar[0]
    if n > 4:
        raise DomainError("unwanted-term decomposition capped at 4 excitations")
    _, lambdas = vacuum_data(chain)
    w = nested_vector(chain, params)
    tau = transfer_eigenvalue(lambdas, params, t, chain.ctx)
    r = transfer(chain, t) @ w.vector - tau * w.vector

    omega = np.zeros(chain.dim, dtype=complex)
    omega[0] = 1.0
    roots = params.type_values(1)
    creators = [monodromy(chain, u).entry(1, 2) for u in roots]
    creator_t = monodromy(chain, t).entry(1, 2)
    basis = []
    for m in range(n):
        vec = omega
        for pos in range(n - 1, -1, -1):
            if pos == m:
                continue
            vec = creators[pos] @ vec
        basis.append(creator_t @ vec)
    A = np.stack(basis, axis=1)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[0] == 0 or sv[-1] / sv[0] < RANK_DEFICIENCY_TOL:
        raise IllPosedDecompositionError(
            f"candidate basis rank-deficient (sv ratio {sv[-1] / max(sv[0], 1e-300):.2e}); "
            "resample t or enlarge the chain")
    coeff, *_ = np.linalg.lstsq(A, r, rcond=None)
    fit = float(np.linalg.norm(A @ coeff - r) / max(np.linalg.norm(r), 1e-300))
    residuals = tuple(bethe_residual(1, m, params, lambdas, chain.ctx)
                      for m in range(1, n + 1))
    scale = float(np.linalg.norm(transfer(chain, t) @ w.vector) / max(w.norm, 1e-300))
    return UnwantedReport(
        coefficients=tuple(complex(c) for c in coeff),
        closed_form=unwanted_closed_form(chain, params, t),
        fit_residual=fit,
        remainder_norm=float(np.linalg.norm(r) / max(w.norm, 1e-300)),
        bethe_residuals=residuals,
        scale=scale,
        basis_condition=float(sv[0] / sv[-1]),
    )
