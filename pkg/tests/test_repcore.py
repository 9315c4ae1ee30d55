"""R-matrix, monodromy, transfer and vacuum tests with independent assembly
oracles for the tensor conventions."""
import itertools

import numpy as np
import pytest

from bethelab import (
    CapacityError,
    ChainSpec,
    DeformationContext,
    DomainError,
    PoleError,
    monodromy,
    r_matrix,
    rll_residual,
    sample_annulus,
    transfer,
    transfer_commutator_residual,
    vacuum_data,
    vacuum_residuals,
    yang_baxter_residual,
    zero_modes,
)
from bethelab.repcore import permutation_operator

from conftest import make_chain, separated_points


def slow_embed(op, N, L, site):
    """Index-loop embedding of a two-leg operator on (aux, site): the oracle
    for the einsum-based fast path."""
    dims = [N] * (L + 1)
    D = N ** (L + 1)
    op4 = op.reshape(N, N, N, N)
    M = np.zeros((D, D), dtype=complex)

    def flat(idxs):
        f = 0
        for i in idxs:
            f = f * N + i
        return f

    for idxs in itertools.product(*[range(N) for _ in dims]):
        col = flat(idxs)
        a, b = idxs[0], idxs[site]
        for anew in range(N):
            for bnew in range(N):
                amp = op4[anew, bnew, a, b]
                if amp != 0:
                    out = list(idxs)
                    out[0], out[site] = anew, bnew
                    M[flat(out), col] += amp
    return M


def slow_monodromy(chain, t):
    N, L, d = chain.N, chain.L, chain.dim
    full = np.kron(np.diag(chain.kappa), np.eye(d)).astype(complex)
    for site in range(L, 0, -1):
        full = full @ slow_embed(r_matrix(t, chain.z[site - 1], N, chain.ctx), N, L, site)
    return full.reshape(N, d, N, d).transpose(0, 2, 1, 3)


# ---------------------------------------------------------------------------
# R-matrix


def test_r_matrix_hand_entry():
    # N = 2, q = 2, u = 4, v = 1: coefficient of E11 (x) E22 is 3 / 7.5 = 0.4
    ctx = DeformationContext(q=2.0)
    R = r_matrix(4.0, 1.0, 2, ctx)
    assert abs(R[1, 1] - 0.4) < 1e-14


def test_r_matrix_equal_points_is_permutation(ctx, rng):
    for N in (2, 3, 4):
        u = complex(sample_annulus(rng, 1)[0])
        R = r_matrix(u, u, N, ctx)
        assert np.max(np.abs(R - permutation_operator(N))) < 1e-14


def test_r_matrix_classical_limit(rng):
    ctx = DeformationContext(q=1.0 + 1e-8)
    R = r_matrix(1.7, 0.6, 3, ctx)
    assert np.max(np.abs(R - np.eye(9))) < 1e-6


def test_r_matrix_pole(ctx):
    q = ctx.q
    v = 1.3 + 0.4j
    with pytest.raises(PoleError):
        r_matrix(v / q ** 2, v, 2, ctx)


def test_yang_baxter_random_points(ctx, rng):
    for N in (2, 3, 4):
        for _ in range(5):
            u, v, w = sample_annulus(rng, 3)
            assert yang_baxter_residual(u, v, w, N, ctx) < 1e-12


# ---------------------------------------------------------------------------
# monodromy and transfer


def test_empty_chain_monodromy(ctx):
    chain = ChainSpec(N=3, L=0, z=(), kappa=(1.1, 0.7, 2.0), ctx=ctx)
    T = monodromy(chain, 0.9)
    for i in range(1, 4):
        for j in range(1, 4):
            want = chain.kappa[i - 1] * np.eye(1) if i == j else np.zeros((1, 1))
            assert np.allclose(T.entry(i, j), want)
    assert np.allclose(transfer(chain, 0.9), sum(chain.kappa) * np.eye(1))


def test_monodromy_matches_slow_assembly(ctx, rng):
    chain = make_chain(2, 2, ctx, rng)
    t = 1.4 + 0.8j
    fast = monodromy(chain, t).blocks
    slow = slow_monodromy(chain, t)
    assert np.max(np.abs(fast - slow)) < 1e-13


def test_rank2_transfer_trace_against_direct_assembly(ctx, rng):
    chain = make_chain(2, 1, ctx, rng)
    t = 0.8 - 0.3j
    T = monodromy(chain, t)
    direct = slow_monodromy(chain, t)
    tr = transfer(chain, t)
    assert np.allclose(tr, direct[0, 0] + direct[1, 1])


@pytest.mark.parametrize("N,L", [(2, 0), (2, 1), (3, 3)])
def test_rll_relation(ctx, rng, N, L):
    chain = make_chain(N, L, ctx, rng)
    for _ in range(3):
        u, v = sample_annulus(rng, 2)
        assert rll_residual(chain, u, v) < 1e-10


def test_transfer_commutes(ctx, rng):
    for (N, L) in [(2, 3), (3, 2)]:
        chain = make_chain(N, L, ctx, rng)
        for _ in range(4):
            u, v = sample_annulus(rng, 2)
            assert transfer_commutator_residual(chain, u, v) < 1e-10


# ---------------------------------------------------------------------------
# vacuum


def test_vacuum_empty_chain(ctx):
    chain = ChainSpec(N=2, L=0, z=(), kappa=(1.5, 0.4), ctx=ctx)
    omega, lambdas = vacuum_data(chain)
    assert omega.shape == (1,)
    assert abs(lambdas[0](2.0) - 1.5) < 1e-14
    assert abs(lambdas[1](2.0) - 0.4) < 1e-14


def test_vacuum_single_site_eigenvalue(ctx, rng):
    chain = make_chain(2, 1, ctx, rng)
    q = ctx.q
    z = chain.z[0]
    t = 1.9 + 0.2j
    T = monodromy(chain, t)
    omega, lambdas = vacuum_data(chain)
    want = chain.kappa[1] * (t - z) / (q * t - z / q)
    assert abs(lambdas[1](t) - want) < 1e-13
    assert np.linalg.norm(T.entry(2, 2) @ omega - want * omega) < 1e-13


def test_vacuum_annihilated_by_lowering_entries(ctx, rng):
    chain = make_chain(2, 3, ctx, rng)
    omega, _ = vacuum_data(chain)
    t = complex(sample_annulus(rng, 1)[0])
    assert np.linalg.norm(monodromy(chain, t).entry(2, 1) @ omega) < 1e-13


def test_vacuum_residuals_random_points(ctx, rng):
    chain = make_chain(3, 2, ctx, rng)
    for _ in range(20):
        t = complex(sample_annulus(rng, 1)[0])
        tri, eig = vacuum_residuals(chain, t)
        assert tri < 1e-12 and eig < 1e-12


# ---------------------------------------------------------------------------
# zero modes


def test_zero_modes_empty_chain(ctx):
    chain = ChainSpec(N=2, L=0, z=(), kappa=(1.2, 0.9), ctx=ctx)
    plus, minus = zero_modes(chain)
    for op in (plus, minus):
        assert np.allclose(op.entry(1, 1), 1.2 * np.eye(1))
        assert np.allclose(op.entry(2, 2), 0.9 * np.eye(1))


def test_zero_modes_single_site_block(ctx, rng):
    chain = make_chain(2, 1, ctx, rng)
    q = ctx.q
    plus, _ = zero_modes(chain)
    E21 = np.zeros((2, 2))
    E21[1, 0] = 1.0
    want = chain.kappa[0] * (q - 1 / q) / q * E21
    assert np.max(np.abs(plus.entry(1, 2) - want)) < 1e-14


def test_zero_modes_triangular_and_match_limits(ctx, rng):
    chain = make_chain(3, 2, ctx, rng)
    plus, minus = zero_modes(chain)
    for i in range(1, 4):
        for j in range(1, 4):
            if i > j:
                assert np.max(np.abs(plus.entry(i, j))) == 0.0
            if i < j:
                assert np.max(np.abs(minus.entry(i, j))) == 0.0
    big = monodromy(chain, 1e8).blocks
    small = monodromy(chain, 1e-8).blocks
    assert np.max(np.abs(plus.blocks - big)) < 1e-6
    assert np.max(np.abs(minus.blocks - small)) < 1e-6


def test_zero_mode_diagonal_products_recorded(ctx, rng, capsys):
    # the diagonal products are kappa_i^2 times identity here; recorded for
    # information, deliberately not constrained
    chain = make_chain(2, 2, ctx, rng)
    plus, minus = zero_modes(chain)
    for i in range(1, 3):
        prod = plus.entry(i, i) @ minus.entry(i, i)
        print(f"diagonal zero-mode product {i}: "
              f"{np.diag(prod).round(12).tolist()}")
        assert np.linalg.cond(prod) < 1e8  # invertibility only


# ---------------------------------------------------------------------------
# chain validation


def test_chain_validation(ctx):
    with pytest.raises(DomainError):
        ChainSpec(N=1, L=1, z=(1.0,), kappa=(1.0,), ctx=ctx)
    with pytest.raises(DomainError):
        ChainSpec(N=2, L=2, z=(1.0, 1.0), kappa=(1.0, 2.0), ctx=ctx)
    with pytest.raises(DomainError):
        ChainSpec(N=2, L=1, z=(0.0,), kappa=(1.0, 2.0), ctx=ctx)
    with pytest.raises(DomainError):
        ChainSpec(N=2, L=1, z=(1.0,), kappa=(1.0, 0.0), ctx=ctx)
    with pytest.raises(CapacityError):
        ChainSpec(N=2, L=13, z=tuple(range(1, 14)), kappa=(1.0, 2.0), ctx=ctx)
