"""Batch front-end: configuration parsing, suite orchestration, JSON reports.

Config files are flat ``key = value`` text; ``#`` starts a comment. Keys:

    N, L            integers (defaults 2, 2)
    q               complex literal or "random" (uniform on [1.2, 1.8])
    z               comma list of complex or "random"
    kappa           comma list of complex or "random"
    sectors         "all" or semicolon list of comma tuples, e.g. "1,0; 1,1"
    chains          number of random chain replicas (default 1)
    seed            unsigned 64-bit integer
    tol_identity, tol_operator, n_samples, pole_margin
    out             report path
    suites          comma list of suite names (for the `all` subcommand)

Command-line flags override file values. Exit codes: 0 all checks passed,
1 at least one tolerance failure, 2 invalid configuration or capacity cap.
"""
from __future__ import annotations

import argparse
import os
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable

import numpy as np

from . import __version__
from .context import BetheParameterSet, DeformationContext, sample_annulus
from .errors import BetheLabError, CapacityError, ConfigError, DomainError
from .gauss import (CoordinateIdentity, coordinate_identity_residual,
                    gauss_decompose, normal_order_transfer_residual)
from .kernels import (nesting_overlap, nesting_overlap_alt, partial_fraction_residual,
                      same_type_weight, shift_weight, split_weight, string_overlap,
                      top_split_weight, transfer_eigenvalue, transfer_eigenvalue_residue)
from .qsym import (cyclic_identity_sides, decomposition_sides, qsym_values,
                   shift_expansion_backward, shift_expansion_forward)
from .repcore import (ChainSpec, monodromy, permutation_operator, r_matrix,
                      rll_residual, transfer, transfer_commutator_residual,
                      vacuum_data, vacuum_residuals, yang_baxter_residual, zero_modes)
from .report import CheckRecord, Report, encode_complex, inputs_digest
from .solver import (SolverOptions, admissible_sectors, solve_bethe,
                     spectrum_reconcile)
from .vectors import is_admissible, modified_vector, unwanted_decomposition

SUITES = ("yang-baxter", "rll", "gauss", "identities", "solve", "verify",
          "offshell", "spectrum")


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    N: int = 2
    L: int = 2
    q_spec: str = "random"
    z_spec: str = "random"
    kappa_spec: str = "random"
    sectors_spec: str = "all"
    chains: int = 1
    seed: int = 0
    tol_identity: float = 1e-10
    tol_operator: float = 1e-10
    n_samples: int = 25
    pole_margin: float = 1e-3
    out: str = ""
    suites: tuple[str, ...] = SUITES
    raw: dict = field(default_factory=dict)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"bad complex literal {text!r}") from exc


def parse_config_file(path: str) -> dict[str, str]:
    raw = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = stripped.split("=", 1)
            raw[key.strip()] = value.strip()
    return raw


def build_config(args: argparse.Namespace) -> RunConfig:
    raw = parse_config_file(args.config) if args.config else {}
    cfg = RunConfig(raw=dict(raw))

    def take(key, cast, current):
        if key in raw:
            try:
                return cast(raw[key])
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc
        return current

    cfg.N = take("N", int, cfg.N)
    cfg.L = take("L", int, cfg.L)
    cfg.q_spec = take("q", str, cfg.q_spec)
    cfg.z_spec = take("z", str, cfg.z_spec)
    cfg.kappa_spec = take("kappa", str, cfg.kappa_spec)
    cfg.sectors_spec = take("sectors", str, cfg.sectors_spec)
    cfg.chains = take("chains", int, cfg.chains)
    cfg.seed = take("seed", int, cfg.seed)
    cfg.tol_identity = take("tol_identity", float, cfg.tol_identity)
    cfg.tol_operator = take("tol_operator", float, cfg.tol_operator)
    cfg.n_samples = take("n_samples", int, cfg.n_samples)
    cfg.pole_margin = take("pole_margin", float, cfg.pole_margin)
    cfg.out = take("out", str, cfg.out)
    if "suites" in raw:
        cfg.suites = tuple(s.strip() for s in raw["suites"].split(",") if s.strip())

    if args.seed is not None:
        cfg.seed = args.seed
    if args.tol is not None:
        cfg.tol_identity = args.tol
        cfg.tol_operator = args.tol
    if args.out:
        cfg.out = args.out
    if args.sector:
        cfg.sectors_spec = args.sector
    if args.chains is not None:
        cfg.chains = args.chains

    if cfg.N < 2:
        raise ConfigError("N must be at least 2")
    if cfg.L < 0:
        raise ConfigError("L must be non-negative")
    if cfg.chains < 1:
        raise ConfigError("chains must be positive")
    if not 0 < cfg.tol_identity < 1e-3 or not 0 < cfg.tol_operator < 1e-3:
        raise ConfigError("tolerances must lie in (0, 1e-3)")
    for s in cfg.suites:
        if s not in SUITES:
            raise ConfigError(f"unknown suite {s!r}")
    return cfg


@dataclass
class Materialized:
    ctx: DeformationContext
    chains: list[ChainSpec]
    sectors: list[tuple[int, ...]]

    def __post_init__(self):
        self._solve_cache: dict = {}
        self._solve_lock = threading.Lock()

    def solved(self, chain_index: int, nbar: tuple[int, ...], opts: SolverOptions):
        """Memoized solve_bethe; safe under the worker pool."""
        key = (chain_index, tuple(nbar))
        with self._solve_lock:
            hit = self._solve_cache.get(key)
        if hit is not None:
            return hit
        result = solve_bethe(self.chains[chain_index], nbar, opts)
        with self._solve_lock:
            self._solve_cache[key] = result
        return result


def materialize(cfg: RunConfig) -> Materialized:
    seed_rng = np.random.default_rng(
        np.random.SeedSequence([cfg.seed & 0xFFFFFFFFFFFFFFFF, 0x6D61]))
    if cfg.q_spec == "random":
        q = complex(seed_rng.uniform(1.2, 1.8))
    else:
        q = _parse_complex(cfg.q_spec)
    try:
        ctx = DeformationContext(q=q, tol_identity=cfg.tol_identity,
                                 tol_operator=cfg.tol_operator,
                                 n_samples=cfg.n_samples, seed=cfg.seed,
                                 pole_margin=cfg.pole_margin)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    chains = []
    for c in range(cfg.chains):
        rng = ctx.rng(f"chain:{c}")
        if cfg.z_spec == "random":
            z = _sample_distinct(rng, cfg.L)
        else:
            z = tuple(_parse_complex(s) for s in cfg.z_spec.split(",") if s.strip())
        if cfg.kappa_spec == "random":
            kappa = tuple(sample_annulus(rng, cfg.N))
        else:
            kappa = tuple(_parse_complex(s) for s in cfg.kappa_spec.split(",") if s.strip())
        try:
            chains.append(ChainSpec(N=cfg.N, L=cfg.L, z=z, kappa=kappa, ctx=ctx))
        except (DomainError, CapacityError) as exc:
            raise ConfigError(f"chain {c}: {exc}") from exc

    if cfg.sectors_spec.strip() == "all":
        sectors = list(admissible_sectors(chains[0]))
    else:
        sectors = []
        for part in cfg.sectors_spec.split(";"):
            part = part.strip()
            if not part:
                continue
            try:
                nbar = tuple(int(x) for x in part.split(","))
            except ValueError as exc:
                raise ConfigError(f"bad sector {part!r}") from exc
            if len(nbar) != cfg.N - 1:
                raise ConfigError(f"sector {nbar} needs {cfg.N - 1} entries")
            sectors.append(nbar)
    return Materialized(ctx=ctx, chains=chains, sectors=sectors)


def _sample_distinct(rng: np.random.Generator, count: int,
                     min_sep: float = 0.05) -> tuple[complex, ...]:
    out: list[complex] = []
    guard = 0
    while len(out) < count:
        cand = complex(sample_annulus(rng, 1)[0])
        if all(abs(cand - v) / max(abs(cand), abs(v)) > min_sep for v in out):
            out.append(cand)
        guard += 1
        if guard > 100 * max(count, 1):
            raise ConfigError("failed to sample distinct inhomogeneities")
    return tuple(out)


# ---------------------------------------------------------------------------
# checks


@dataclass
class Check:
    check_id: str
    anchor: str
    tolerance: float
    inputs: dict
    thunk: Callable[[], float]


def _run_checks(checks: list[Check], workers: int) -> list[CheckRecord]:
    def run_one(check: Check) -> CheckRecord:
        start = time.perf_counter()
        error = ""
        try:
            residual = float(check.thunk())
        except BetheLabError as exc:
            residual = float("inf")
            error = f"{type(exc).__name__}: {exc}"
        wall = time.perf_counter() - start
        return CheckRecord(
            check_id=check.check_id, anchor=check.anchor,
            inputs=inputs_digest(check.inputs), residual=residual,
            tolerance=check.tolerance, passed=residual <= check.tolerance,
            wall_time=wall, error=error)

    if workers <= 1 or len(checks) <= 1:
        return [run_one(c) for c in checks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_one, checks))


def _chain_inputs(chain: ChainSpec) -> dict:
    return {
        "N": chain.N, "L": chain.L,
        "q": encode_complex(chain.ctx.q),
        "z": [encode_complex(v) for v in chain.z],
        "kappa": [encode_complex(v) for v in chain.kappa],
    }


# --- yang-baxter ---


def suite_yang_baxter(mat: Materialized, cfg: RunConfig) -> list[Check]:
    ctx = mat.ctx
    checks = []
    for N in (2, 3, 4):
        def ybe_thunk(N=N):
            rng = ctx.rng(f"ybe:{N}")
            worst = 0.0
            for _ in range(34):
                qi = float(rng.uniform(1.2, 1.8))
                ci = DeformationContext(q=qi, seed=ctx.seed)
                u, v, w = sample_annulus(rng, 3)
                worst = max(worst, yang_baxter_residual(u, v, w, N, ci))
            return worst

        checks.append(Check(
            check_id=f"yang-baxter/N{N}",
            anchor="R12 R13 R23 = R23 R13 R12",
            tolerance=1e-12, inputs={"N": N, "samples": 34},
            thunk=ybe_thunk))

    def point_degeneracy():
        rng = ctx.rng("r-equal-points")
        worst = 0.0
        for N in (2, 3, 4):
            u = complex(sample_annulus(rng, 1)[0])
            R = r_matrix(u, u, N, ctx)
            worst = max(worst, float(np.max(np.abs(R - permutation_operator(N)))))
        return worst

    checks.append(Check(
        check_id="yang-baxter/permutation-point",
        anchor="R(u,u) = P",
        tolerance=1e-14, inputs={"q": encode_complex(ctx.q)},
        thunk=point_degeneracy))

    def classical_limit():
        rng = ctx.rng("r-classical")
        ci = DeformationContext(q=1.0 + 1e-8, seed=ctx.seed)
        worst = 0.0
        for N in (2, 3, 4):
            u, v = sample_annulus(rng, 2)
            while abs(u - v) < 0.3:
                u, v = sample_annulus(rng, 2)
            R = r_matrix(u, v, N, ci)
            worst = max(worst, float(np.max(np.abs(R - np.eye(N * N)))))
        return worst

    checks.append(Check(
        check_id="yang-baxter/identity-limit",
        anchor="R -> 1 as q -> 1",
        tolerance=1e-6, inputs={"q": [1.0 + 1e-8, 0.0]},
        thunk=classical_limit))
    return checks


# --- rll ---


def suite_rll(mat: Materialized, cfg: RunConfig) -> list[Check]:
    checks = []
    for c, chain in enumerate(mat.chains):
        ctx = chain.ctx
        base = f"rll/chain{c}"
        inputs = _chain_inputs(chain)

        def rll_thunk(chain=chain, c=c):
            rng = chain.ctx.rng(f"rll:{c}")
            worst = 0.0
            for _ in range(5):
                u, v = sample_annulus(rng, 2)
                worst = max(worst, rll_residual(chain, u, v))
            return worst

        checks.append(Check(f"{base}/exchange",
                            "R (T x 1)(1 x T) = (1 x T)(T x 1) R",
                            1e-10, inputs, rll_thunk))

        def commut_thunk(chain=chain, c=c):
            rng = chain.ctx.rng(f"commut:{c}")
            worst = 0.0
            for _ in range(10):
                u, v = sample_annulus(rng, 2)
                worst = max(worst, transfer_commutator_residual(chain, u, v))
            return worst

        checks.append(Check(f"{base}/transfer-commute",
                            "[T(u), T(v)] = 0",
                            1e-10, inputs, commut_thunk))

        def vacuum_thunk(chain=chain, c=c):
            rng = chain.ctx.rng(f"vacuum:{c}")
            worst = 0.0
            for _ in range(20):
                t = complex(sample_annulus(rng, 1)[0])
                tri, eig = vacuum_residuals(chain, t)
                worst = max(worst, tri, eig)
            return worst

        checks.append(Check(f"{base}/vacuum",
                            "T_{i>j} Omega = 0 and T_{ii} Omega = lambda_i Omega",
                            1e-12, inputs, vacuum_thunk))

        def zero_mode_thunk(chain=chain):
            plus, minus = zero_modes(chain)
            worst = 0.0
            for i in range(1, chain.N + 1):
                for j in range(1, chain.N + 1):
                    if i > j:
                        worst = max(worst, float(np.max(np.abs(plus.entry(i, j)))))
                    elif i < j:
                        worst = max(worst, float(np.max(np.abs(minus.entry(i, j)))))
            return worst

        checks.append(Check(f"{base}/zero-mode-triangular",
                            "L(inf) block upper / L(0) block lower triangular",
                            1e-14, inputs, zero_mode_thunk))
    return checks


# --- gauss ---


def suite_gauss(mat: Materialized, cfg: RunConfig) -> list[Check]:
    checks = []
    for c, chain in enumerate(mat.chains):
        base = f"gauss/chain{c}"
        inputs = _chain_inputs(chain)

        def recon_thunk(chain=chain, c=c):
            rng = chain.ctx.rng(f"gauss-recon:{c}")
            worst = 0.0
            for _ in range(5):
                t = complex(sample_annulus(rng, 1)[0])
                T = monodromy(chain, t)
                data = gauss_decompose(T)
                diff = data.reconstruct() - T.blocks
                worst = max(worst, float(np.linalg.norm(diff) / np.linalg.norm(T.blocks)))
            return worst

        checks.append(Check(f"{base}/reconstruction",
                            "L = (1 + F) . k . (1 + E)",
                            1e-10, inputs, recon_thunk))

        def normal_thunk(chain=chain, c=c):
            rng = chain.ctx.rng(f"gauss-normal:{c}")
            worst = 0.0
            for _ in range(5):
                t = complex(sample_annulus(rng, 1)[0])
                worst = max(worst, normal_order_transfer_residual(chain, t))
            return worst

        checks.append(Check(f"{base}/normal-order-transfer",
                            "trace T = sum_i ( k_i + sum_{j>i} F_{j,i} k_j E_{i,j} )",
                            1e-10, inputs, normal_thunk))

        kinds = {
            CoordinateIdentity.F_LOWERING: "(q - 1/q) F_{j,i} = S_i(F_{j,i+1})",
            CoordinateIdentity.E_LOWERING: "(q - 1/q) E_{i,j} = S^_i(E_{i+1,j})",
            CoordinateIdentity.E_ITERATED: "E_{i,j} from iterated dual screenings",
            CoordinateIdentity.CARTAN_SHIFT: "S^_i(psi_{i+1}) = (q - 1/q) psi_{i+1} E_{i,i+1}",
        }
        for kind, anchor in kinds.items():
            pairs = _identity_indices(kind, chain.N)
            if not pairs:
                continue

            def identity_thunk(chain=chain, kind=kind, pairs=pairs, c=c):
                rng = chain.ctx.rng(f"gauss-{kind.value}:{c}")
                worst = 0.0
                for _ in range(5):
                    t = complex(sample_annulus(rng, 1)[0])
                    for ij in pairs:
                        worst = max(worst, coordinate_identity_residual(kind, ij, t, chain))
                return worst

            checks.append(Check(f"{base}/{kind.value}", anchor,
                                1e-9, inputs, identity_thunk))
    return checks


def _identity_indices(kind: CoordinateIdentity, N: int) -> list[tuple[int, int]]:
    if kind is CoordinateIdentity.CARTAN_SHIFT:
        return [(i, 0) for i in range(1, N - 1)]
    return [(i, j) for j in range(1, N + 1) for i in range(1, j - 1)]


# --- identities (scalar + qsym) ---


def suite_identities(mat: Materialized, cfg: RunConfig) -> list[Check]:
    ctx = mat.ctx
    q = ctx.q
    checks = []
    tol = ctx.tol_identity

    for k in range(1, 6):
        def overlap_thunk(k=k):
            rng = ctx.rng(f"overlap:{k}")
            worst = 0.0
            for _ in range(25):
                upper = _separated(rng, k)
                lower = _separated(rng, k)
                a = nesting_overlap(upper, lower, ctx)
                b = nesting_overlap_alt(upper, lower, ctx)
                worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
            return worst

        checks.append(Check(f"identities/overlap-two-forms/k{k}",
                            "both product forms of the nesting overlap agree",
                            tol, {"k": k, "q": encode_complex(q)}, overlap_thunk))

    test_fn = _sample_function
    for n in (2, 3, 4):
        def idem_thunk(n=n):
            rng = ctx.rng(f"idem:{n}")
            worst = 0.0
            for _ in range(25):
                vals = _separated(rng, n)
                once = qsym_values(test_fn, vals, q)
                twice = qsym_values(lambda *t: qsym_values(test_fn, t, q), vals, q)
                worst = max(worst, abs(once - twice) / max(abs(once), 1e-300))
            return worst

        checks.append(Check(f"identities/qsym-idempotent/n{n}",
                            "qsym . qsym = qsym",
                            tol, {"n": n}, idem_thunk))

    for n, s in ((2, 1), (3, 1), (3, 2), (4, 2)):
        def decomp_thunk(n=n, s=s):
            rng = ctx.rng(f"decomp:{n}:{s}")
            worst = 0.0
            for _ in range(10):
                vals = _separated(rng, n)
                full, split = decomposition_sides(test_fn, vals, q, s)
                worst = max(worst, abs(full - split) / max(abs(full), 1e-300))
            return worst

        checks.append(Check(f"identities/qsym-shuffle/n{n}s{s}",
                            "qsym equals its shuffle decomposition",
                            tol, {"n": n, "s": s}, decomp_thunk))

    for n in (2, 3, 4):
        def shift_thunk(n=n):
            rng = ctx.rng(f"shift:{n}")
            worst = 0.0
            for _ in range(25):
                vals = _separated(rng, n)
                lhs = n * qsym_values(test_fn, vals, q)
                fwd = shift_expansion_forward(test_fn, vals, q)
                bwd = shift_expansion_backward(test_fn, vals, q)
                worst = max(worst,
                            abs(fwd - lhs) / max(abs(lhs), 1e-300),
                            abs(bwd - lhs) / max(abs(lhs), 1e-300))
            return worst

        checks.append(Check(f"identities/qsym-shift/n{n}",
                            "moving one variable to either end expands n · qsym",
                            tol, {"n": n}, shift_thunk))

        def cyc_thunk(n=n):
            rng = ctx.rng(f"cyclic:{n}")
            worst = 0.0
            for _ in range(25):
                vals = _separated(rng, n)
                a, b = cyclic_identity_sides(test_fn, vals, q)
                worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
            return worst

        checks.append(Check(f"identities/qsym-cyclic/n{n}",
                            "weighting the first variable equals cyclic rotation",
                            tol, {"n": n}, cyc_thunk))

    for j in (3, 4, 5, 6):
        def pf_thunk(j=j):
            rng = ctx.rng(f"pf:{j}")
            worst = 0.0
            for _ in range(25):
                pts = _separated(rng, j - 1)
                t = complex(sample_annulus(rng, 1)[0])
                worst = max(worst, partial_fraction_residual(j, t, pts))
            return worst

        checks.append(Check(f"identities/partial-fraction/j{j}",
                            "telescoping partial-fraction identity",
                            1e-12, {"j": j}, pf_thunk))

    def homogeneity_thunk():
        rng = ctx.rng("homogeneity")
        worst = 0.0
        for _ in range(10):
            params = BetheParameterSet((tuple(_separated(rng, 2)),
                                        tuple(_separated(rng, 2))))
            t = complex(sample_annulus(rng, 1)[0])
            c = complex(sample_annulus(rng, 1)[0])
            lambdas = [lambda tt: 1.3 + 0j, lambda tt: 0.7 + 0.1j, lambda tt: 1.9 + 0j]
            pairs = [
                (transfer_eigenvalue(lambdas, params, t, ctx),
                 transfer_eigenvalue(lambdas, params.scaled(c), c * t, ctx)),
                (same_type_weight(params, ctx),
                 same_type_weight(params.scaled(c), ctx)),
                (string_overlap(params, ctx),
                 string_overlap(params.scaled(c), ctx)),
                (split_weight(params, (1, 1), ctx),
                 split_weight(params.scaled(c), (1, 1), ctx)),
                (top_split_weight(1, params, ctx),
                 top_split_weight(1, params.scaled(c), ctx)),
                (shift_weight(0, 3, params, ctx),
                 shift_weight(0, 3, params.scaled(c), ctx)),
            ]
            for a, b in pairs:
                worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-300))
        return worst

    checks.append(Check("identities/kernel-homogeneity",
                        "kernels are degree-0 under simultaneous scaling",
                        tol, {"q": encode_complex(q)}, homogeneity_thunk))
    return checks


def _sample_function(*t: complex) -> complex:
    out = t[0] ** 2
    for i, v in enumerate(t[1:], start=2):
        out += v ** i / t[0] + 0.37 * v
    return out / t[-1]


def _separated(rng, n: int, min_sep: float = 0.05) -> list[complex]:
    vals: list[complex] = []
    while len(vals) < n:
        cand = complex(sample_annulus(rng, 1)[0])
        if all(abs(cand - v) / max(abs(cand), abs(v)) > min_sep for v in vals):
            vals.append(cand)
    return vals


# --- solve / verify / spectrum / offshell ---


def suite_solve(mat: Materialized, cfg: RunConfig) -> list[Check]:
    checks = []
    opts = SolverOptions()
    for c, chain in enumerate(mat.chains):
        for nbar in mat.sectors:
            if not is_admissible(chain, nbar):
                continue
            inputs = {**_chain_inputs(chain), "sector": list(nbar)}

            def solve_thunk(chain=chain, nbar=nbar, c=c):
                result = mat.solved(c, nbar, opts)
                return max((s.max_residual for s in result), default=0.0)

            sector_id = "-".join(map(str, nbar))
            checks.append(Check(f"solve/chain{c}/sector{sector_id}",
                                "Bethe residuals vanish at every returned root set",
                                1e-10, inputs, solve_thunk))
    return checks


def suite_verify(mat: Materialized, cfg: RunConfig) -> list[Check]:
    checks = []
    opts = SolverOptions()
    for c, chain in enumerate(mat.chains):
        can_diagonalize = chain.dim <= 256
        for nbar in mat.sectors:
            if not is_admissible(chain, nbar):
                continue
            inputs = {**_chain_inputs(chain), "sector": list(nbar)}
            sector_id = "-".join(map(str, nbar))

            def onshell_thunk(chain=chain, nbar=nbar, c=c):
                result = mat.solved(c, nbar, opts)
                _, lambdas = vacuum_data(chain)
                rng = chain.ctx.rng(f"verify:{c}:{nbar}")
                worst = 0.0
                for sol in result:
                    w = modified_vector(chain, sol.params)
                    if w.norm < 1e-12:
                        continue
                    for _ in range(20):
                        t = complex(sample_annulus(rng, 1)[0])
                        tau = transfer_eigenvalue(lambdas, sol.params, t, chain.ctx)
                        resid = np.linalg.norm(transfer(chain, t) @ w.vector
                                               - tau * w.vector) / w.norm
                        worst = max(worst, float(resid))
                return worst

            checks.append(Check(f"verify/chain{c}/sector{sector_id}/on-shell",
                                "T(t) w = tau(t) w at solver roots",
                                1e-8, inputs, onshell_thunk))

            if can_diagonalize:
                def tau_match_thunk(chain=chain, nbar=nbar, c=c):
                    result = mat.solved(c, nbar, opts)
                    _, lambdas = vacuum_data(chain)
                    rng = chain.ctx.rng(f"verify-tau:{c}:{nbar}")
                    t = complex(sample_annulus(rng, 1)[0])
                    eigs = np.linalg.eigvals(transfer(chain, t))
                    worst = 0.0
                    for sol in result:
                        tau = transfer_eigenvalue(lambdas, sol.params, t, chain.ctx)
                        rel = np.min(np.abs(eigs - tau) / np.maximum(np.abs(eigs), 1e-300))
                        worst = max(worst, float(rel))
                    return worst

                checks.append(Check(f"verify/chain{c}/sector{sector_id}/tau-in-spectrum",
                                    "tau(t) matches a dense transfer eigenvalue",
                                    1e-8, inputs, tau_match_thunk))

            def residue_thunk(chain=chain, nbar=nbar, c=c):
                if sum(nbar) == 0:
                    return 0.0
                result = mat.solved(c, nbar, opts)
                _, lambdas = vacuum_data(chain)
                worst = 0.0
                for sol in result:
                    for a in range(1, chain.N):
                        for j in range(1, nbar[a - 1] + 1):
                            resid, scale = transfer_eigenvalue_residue(
                                lambdas, sol.params, a, j, chain.ctx)
                            worst = max(worst, resid / max(scale, 1e-300))
                return worst

            checks.append(Check(f"verify/chain{c}/sector{sector_id}/residue",
                                "eigenvalue residue at each root vanishes on shell",
                                1e-8, inputs, residue_thunk))
    return checks


def suite_spectrum(mat: Materialized, cfg: RunConfig) -> list[Check]:
    checks = []
    opts = SolverOptions()
    for c, chain in enumerate(mat.chains):
        if chain.dim > 256:
            raise CapacityError(
                f"spectrum suite needs dimension <= 256, chain has {chain.dim}")
        inputs = _chain_inputs(chain)

        def spectrum_thunk(chain=chain, c=c):
            sols = {nbar: mat.solved(c, nbar, opts).solutions
                    for nbar in admissible_sectors(chain)}
            rng = chain.ctx.rng(f"spectrum:{c}")
            t = complex(sample_annulus(rng, 1)[0])
            rep = spectrum_reconcile(chain, sols, t)
            missing = rep.total_states - rep.matched
            return float(missing + rep.duplicates)

        checks.append(Check(f"spectrum/chain{c}",
                            "every dense eigenvalue matched exactly once",
                            0.5, inputs, spectrum_thunk))
    return checks


def suite_offshell(mat: Materialized, cfg: RunConfig) -> list[Check]:
    if any(chain.N != 2 for chain in mat.chains):
        raise ConfigError("offshell suite requires N = 2")
    checks = []
    opts = SolverOptions()
    for c, chain in enumerate(mat.chains):
        inputs = _chain_inputs(chain)
        well_posed = [n for n in range(1, min(chain.L, 4) + 1)
                      if _weight_block_dim(chain.L, n) >= n]

        def span_thunk(chain=chain, c=c, sizes=tuple(well_posed)):
            rng = chain.ctx.rng(f"offshell-span:{c}")
            worst = 0.0
            for n in sizes:
                params = BetheParameterSet((tuple(_separated(rng, n)),))
                t = complex(sample_annulus(rng, 1)[0])
                rep = unwanted_decomposition(chain, params, t)
                worst = max(worst, rep.fit_residual)
            return worst

        checks.append(Check(f"offshell/chain{c}/span",
                            "unwanted remainder lies in the candidate span",
                            1e-8, inputs, span_thunk))

        def closed_form_thunk(chain=chain, c=c, sizes=tuple(well_posed)):
            rng = chain.ctx.rng(f"offshell-closed:{c}")
            worst = 0.0
            for n in sizes:
                params = BetheParameterSet((tuple(_separated(rng, n)),))
                t = complex(sample_annulus(rng, 1)[0])
                rep = unwanted_decomposition(chain, params, t)
                for got, want in zip(rep.coefficients, rep.closed_form):
                    worst = max(worst, abs(got - want) / max(abs(want), 1e-300))
            return worst

        checks.append(Check(f"offshell/chain{c}/closed-form",
                            "unwanted coefficients match the closed form",
                            1e-8, inputs, closed_form_thunk))

        def vanishing_thunk(chain=chain, c=c, sizes=tuple(well_posed)):
            rng = chain.ctx.rng(f"offshell-vanish:{c}")
            worst = 0.0
            for n in sizes:
                result = mat.solved(c, (n,), opts)
                for sol in result:
                    t = complex(sample_annulus(rng, 1)[0])
                    rep = unwanted_decomposition(chain, sol.params, t)
                    scale = max(rep.scale, 1e-300)
                    worst = max(worst, max((abs(cm) for cm in rep.coefficients),
                                           default=0.0) / scale)
            return worst

        checks.append(Check(f"offshell/chain{c}/on-shell-vanishing",
                            "unwanted coefficients vanish at solver roots",
                            1e-8, inputs, vanishing_thunk))
    return checks


def _weight_block_dim(L: int, n: int) -> int:
    from math import comb
    return comb(L, n)


SUITE_BUILDERS = {
    "yang-baxter": suite_yang_baxter,
    "rll": suite_rll,
    "gauss": suite_gauss,
    "identities": suite_identities,
    "solve": suite_solve,
    "verify": suite_verify,
    "offshell": suite_offshell,
    "spectrum": suite_spectrum,
}


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bethelab",
        description="Verification suites for the nested Bethe ansatz laboratory")
    parser.add_argument("command", choices=list(SUITES) + ["all"],
                        help="suite to run")
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed")
    parser.add_argument("--out", help="report output path")
    parser.add_argument("--tol", type=float, default=None,
                        help="override identity and operator tolerances")
    parser.add_argument("--sector", help="semicolon list of sectors, e.g. '1,0;1,1'")
    parser.add_argument("--chains", type=int, default=None,
                        help="number of random chain replicas")
    return parser


def run_command(argv: list[str]) -> tuple[int, Report | None]:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), None
    try:
        cfg = build_config(args)
        mat = materialize(cfg)
        suite_names = cfg.suites if args.command == "all" else (args.command,)
        checks: list[Check] = []
        for name in suite_names:
            checks.extend(SUITE_BUILDERS[name](mat, cfg))
    except (ConfigError, CapacityError, DomainError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2, None

    workers = int(os.environ.get("BETHELAB_WORKERS", "4") or "4")
    records = _run_checks(checks, max(1, workers))

    report = Report(
        command=args.command, seed=cfg.seed, version=__version__,
        config=cfg.raw,
        materialized={
            "q": encode_complex(mat.ctx.q),
            "tol_identity": mat.ctx.tol_identity,
            "tol_operator": mat.ctx.tol_operator,
            "n_samples": mat.ctx.n_samples,
            "pole_margin": mat.ctx.pole_margin,
            "chains": [_chain_inputs(ch) for ch in mat.chains],
            "sectors": [list(s) for s in mat.sectors],
        },
        checks=records,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )

    _print_table(report)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    summary = report.summary()
    return (0 if summary["status"] == "pass" else 1), report


def _print_table(report: Report) -> None:
    rows = sorted(report.checks, key=lambda c: c.check_id)
    width = max((len(r.check_id) for r in rows), default=10) + 2
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        line = f"{r.check_id:<{width}} {r.residual:>12.3e}  (tol {r.tolerance:.0e})  {status}"
        if r.error:
            line += f"  [{r.error}]"
        print(line)
    s = report.summary()
    print(f"{s['passed']}/{s['total']} checks passed -> {s['status'].upper()}")


def main() -> None:
    code, _ = run_command(sys.argv[1:])
    sys.exit(code)


if __name__ == "__main__":
    main()
