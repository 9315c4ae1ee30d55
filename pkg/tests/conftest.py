import numpy as np
import pytest

from bethelab import ChainSpec, DeformationContext, sample_annulus


@pytest.fixture
def ctx():
    return DeformationContext(q=1.5, seed=1234)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_chain(N, L, ctx, rng, spread=1.0):
    z = _distinct(rng, L)
    kappa = tuple(sample_annulus(rng, N) * spread)
    return ChainSpec(N=N, L=L, z=z, kappa=kappa, ctx=ctx)


def _distinct(rng, count, min_sep=0.1):
    out = []
    while len(out) < count:
        cand = complex(sample_annulus(rng, 1)[0])
        if all(abs(cand - v) / max(abs(cand), abs(v)) > min_sep for v in out):
            out.append(cand)
    return tuple(out)


@pytest.fixture
def chain_factory(ctx, rng):
    def factory(N, L, q=None, seed=None):
        local_ctx = ctx if q is None else DeformationContext(q=q, seed=ctx.seed)
        local_rng = rng if seed is None else np.random.default_rng(seed)
        return make_chain(N, L, local_ctx, local_rng)
    return factory


def separated_points(rng, n, min_sep=0.1):
    return _distinct(rng, n, min_sep)
