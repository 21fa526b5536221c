"""Batch front door: plan schedules, run experiments, verify inequality suites.

Subcommands:
    plan    print an (h, k) schedule for a strong, weak or halving regime
    run     execute a config file; writes a JSON report plus metric CSVs
    verify  run a named property suite and report margins

Exit codes: 0 pass, 1 run/verify failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .chain import (
    GAUSSIAN_1_OVER_M,
    GaussianInit,
    PointInit,
    TraceRow,
    coupled_run,
    init_ensemble,
    step,
    trace_csv,
)
from .gaussian_oracle import (
    GaussianLaw,
    exact_flow_law,
    fisher_info_relative,
    kl_gaussian,
    stationary_law,
    target_law,
    tv_gaussian_1d,
    ula_step_law,
    w2_gaussian,
)
from .grid_oracle import (
    default_grid,
    discretize_law,
    estimate_h_prime,
    kl_grid,
    second_moment_grid,
    target_density_grid,
    tv_grid,
    ula_step_grid,
    w2_grid_1d,
)
from .metrics import summarize, z_scores_vs_oracle
from .planner import (
    PlanningError,
    WeakPlanInputs,
    kl_init_bound,
    plan_halving,
    plan_strong,
    plan_strong_tv,
    plan_strong_w2,
    plan_weak,
)
from .potentials import construct_potential, validate_constants

MARGIN_TOL = -1e-9


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# plan


def _plan_from_args(args):
    if args.regime == "strong":
        for name in ("m", "L", "d"):
            if getattr(args, name) is None:
                raise UsageError(f"--{name} is required for the strong regime")
        if args.target == "kl":
            if args.eps is None:
                raise UsageError("--eps is required for --target kl")
            return [plan_strong(args.m, args.L, args.d, args.eps)]
        if args.delta is None:
            raise UsageError(f"--delta is required for --target {args.target}")
        fn = plan_strong_tv if args.target == "tv" else plan_strong_w2
        return [fn(args.m, args.L, args.d, args.delta)]
    if args.regime == "weak":
        for name in ("L", "d", "eps", "c1", "c2", "kl0"):
            if getattr(args, name) is None:
                raise UsageError(f"--{name} is required for the weak regime")
        h_prime = math.inf if args.h_prime is None else args.h_prime
        inputs = WeakPlanInputs(c1=args.c1, c2=args.c2, h_prime=h_prime, kl0=args.kl0)
        return [plan_weak(inputs, args.L, args.d, args.eps)]
    # halving
    for name in ("m", "L", "d", "eps"):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required for the halving regime")
    kl0 = args.kl0 if args.kl0 is not None else kl_init_bound(args.m, args.L, args.d)
    return plan_halving(args.m, args.L, args.d, args.eps, kl0)


class UsageError(Exception):
    pass


def _plan_dict(p) -> dict:
    return {"h": p.h, "k": p.k, "epsilon": p.epsilon, "regime": p.regime, "notes": p.notes}


def cmd_plan(args) -> int:
    try:
        plans = _plan_from_args(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PlanningError as exc:
        print(f"planning error: {exc}", file=sys.stderr)
        return 1
    if args.json:
        doc = _plan_dict(plans[0]) if len(plans) == 1 else {"stages": [_plan_dict(p) for p in plans]}
        print(json.dumps(doc, sort_keys=True))
        return 0
    if not plans:
        print("no stages needed: kl0 <= epsilon")
        return 0
    for p in plans:
        print(f"regime={p.regime} h={p.h!r} k={p.k} epsilon={p.epsilon!r}")
        print(f"  notes: {p.notes}")
    if len(plans) > 1:
        print(f"total steps: {sum(p.k for p in plans)}")
    return 0


# ---------------------------------------------------------------------------
# run config


@dataclass
class RunConfig:
    regime: str
    epsilon: float
    n_chains: int
    seed: int
    record_every: int
    out_dir: str
    potential_kind: str
    potential_params: dict
    init_kind: str
    init_params: dict
    gaussian_oracle: bool
    grid_oracle: bool
    grid_x_min: float | None
    grid_x_max: float | None
    grid_n: int
    grid_max_steps: int
    weak: dict = field(default_factory=dict)
    halving_kl0: float | None = None
    raw: dict = field(default_factory=dict)


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def _matrix(text: str) -> list[list[float]]:
    # rows on separate (indented) lines or separated by "|"
    return [_floats(row) for row in text.replace("|", "\n").splitlines() if row.strip()]


def load_config(path: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    try:
        run = cp["run"]
        regime = run.get("regime", "strong")
        if regime not in ("strong", "weak", "halving"):
            raise ConfigError(f"unknown regime {regime!r}")
        pot = cp["potential"]
        kind = pot.get("kind")
        params: dict = {}
        if kind == "quadratic-diagonal":
            params["diag"] = _floats(pot.get("diag"))
        elif kind == "quadratic-full":
            params["matrix"] = _matrix(pot.get("matrix"))
        elif kind == "huber":
            params["delta"] = pot.getfloat("delta")
            params["dim"] = pot.getint("dim", fallback=1)
        else:
            raise ConfigError(f"unknown potential kind {kind!r}")
        init = cp["init"] if cp.has_section("init") else {}
        init_kind = init.get("kind", GAUSSIAN_1_OVER_M)
        init_params: dict = {}
        if init_kind == "gaussian":
            init_params["mean"] = _floats(init.get("mean"))
            init_params["cov_diag"] = _floats(init.get("cov_diag"))
        elif init_kind == "point":
            init_params["x"] = _floats(init.get("x"))
        elif init_kind != GAUSSIAN_1_OVER_M:
            raise ConfigError(f"unknown init kind {init_kind!r}")
        oracles = cp["oracles"] if cp.has_section("oracles") else {}
        weak = dict(cp["weak"]) if cp.has_section("weak") else {}
        cfg = RunConfig(
            regime=regime,
            epsilon=run.getfloat("epsilon"),
            n_chains=run.getint("n_chains", fallback=1000),
            seed=run.getint("seed", fallback=0),
            record_every=run.getint("record_every", fallback=1),
            out_dir=run.get("out_dir", "out"),
            potential_kind=kind,
            potential_params=params,
            init_kind=init_kind,
            init_params=init_params,
            gaussian_oracle=(
                oracles.getboolean("gaussian", fallback=False)
                if hasattr(oracles, "getboolean")
                else False
            ),
            grid_oracle=(
                oracles.getboolean("grid", fallback=False)
                if hasattr(oracles, "getboolean")
                else False
            ),
            grid_x_min=oracles.getfloat("grid_x_min", fallback=None)
            if hasattr(oracles, "getfloat")
            else None,
            grid_x_max=oracles.getfloat("grid_x_max", fallback=None)
            if hasattr(oracles, "getfloat")
            else None,
            grid_n=oracles.getint("grid_n", fallback=4096) if hasattr(oracles, "getint") else 4096,
            grid_max_steps=run.getint("grid_max_steps", fallback=100_000),
            weak=weak,
            halving_kl0=cp["halving"].getfloat("kl0", fallback=None)
            if cp.has_section("halving")
            else None,
            raw={s: dict(cp[s]) for s in cp.sections()},
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config {path}: {exc}") from exc
    if cfg.epsilon is None or not cfg.epsilon > 0:
        raise ConfigError("run.epsilon must be a positive number")
    if cfg.n_chains < 2:
        raise ConfigError("run.n_chains must be >= 2")
    if cfg.record_every < 1:
        raise ConfigError("run.record_every must be >= 1")
    return cfg


def _build_init(cfg: RunConfig):
    if cfg.init_kind == GAUSSIAN_1_OVER_M:
        return GAUSSIAN_1_OVER_M
    if cfg.init_kind == "gaussian":
        return GaussianInit(
            mean=np.asarray(cfg.init_params["mean"], dtype=float),
            cov_diag=np.asarray(cfg.init_params["cov_diag"], dtype=float),
        )
    return PointInit(x=np.asarray(cfg.init_params["x"], dtype=float))


def _init_law(init, pot) -> GaussianLaw:
    if isinstance(init, str) and init == GAUSSIAN_1_OVER_M:
        if not pot.m > 0:
            raise ConfigError("gaussian_1_over_m init needs m > 0")
        return GaussianLaw(np.zeros(pot.d), np.eye(pot.d) / pot.m)
    if isinstance(init, GaussianInit):
        return GaussianLaw(np.asarray(init.mean, dtype=float), np.diag(np.asarray(init.cov_diag, dtype=float)))
    raise ConfigError("the gaussian oracle needs a gaussian init (point laws are degenerate)")


def _weak_value(weak: dict, key: str):
    v = weak.get(key, "estimate").strip()
    if v == "estimate":
        return "estimate"
    if v == "inf":
        return math.inf
    return float(v)


# ---------------------------------------------------------------------------
# run execution


@dataclass
class Verdict:
    name: str
    claim: str
    margin: float
    passed: bool


def _verdict(name: str, claim: str, margin: float, tol: float = MARGIN_TOL) -> Verdict:
    return Verdict(name=name, claim=claim, margin=float(margin), passed=bool(margin >= tol))


def _fmt_row(values) -> str:
    return ",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in values)


def _json_safe(obj):
    """Replace non-finite floats (h_prime=inf, trivial margins) for strict JSON."""
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def execute_run(cfg: RunConfig) -> tuple[dict, bool]:
    pot = construct_potential(cfg.potential_kind, **cfg.potential_params)
    init = _build_init(cfg)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        report, ok = _execute_inner(cfg, pot, init, out_dir, written)
    except BaseException:
        for f in written:
            f.unlink(missing_ok=True)
        raise
    return report, ok


def _execute_inner(cfg, pot, init, out_dir, written):
    resolved: dict = {}
    verdicts: list[Verdict] = []

    A = None
    law = None
    gauss_target = None
    if cfg.gaussian_oracle:
        if pot.kind == "quadratic-diagonal":
            A = np.diag(pot.diag)
        elif pot.kind == "quadratic-full":
            A = pot.matrix
        else:
            raise ConfigError("the gaussian oracle supports quadratic potentials only")
        law = _init_law(init, pot)
        gauss_target = target_law(A)

    grid = None
    grid_target = None
    gx = None
    if cfg.grid_oracle:
        if pot.d != 1:
            raise ConfigError("the grid oracle supports d = 1 only")
        lo, hi, n = default_grid(pot)
        gx = (
            cfg.grid_x_min if cfg.grid_x_min is not None else lo,
            cfg.grid_x_max if cfg.grid_x_max is not None else hi,
            cfg.grid_n or n,
        )
        grid_target = target_density_grid(pot, *gx)
        grid_init = init if not isinstance(init, str) else GaussianInit(
            mean=np.zeros(1), cov_diag=np.full(1, 1.0 / pot.m)
        )
        grid = discretize_law(grid_init, *gx)

    # resolve plans
    if cfg.regime == "strong":
        plans = [plan_strong(pot.m, pot.L, pot.d, cfg.epsilon)]
    elif cfg.regime == "halving":
        kl0 = cfg.halving_kl0 if cfg.halving_kl0 is not None else kl_init_bound(pot.m, pot.L, pot.d)
        resolved["halving_kl0"] = kl0
        plans = plan_halving(pot.m, pot.L, pot.d, cfg.epsilon, kl0)
    else:
        if grid is None:
            need = [k for k in ("c1", "c2", "h_prime", "kl0") if _weak_value(cfg.weak, k) == "estimate"]
            if need:
                raise ConfigError(f"weak inputs {need} say 'estimate' but the grid oracle is off")
        c1 = _weak_value(cfg.weak, "c1")
        if c1 == "estimate":
            c1 = w2_grid_1d(grid, grid_target)
        c2 = _weak_value(cfg.weak, "c2")
        if c2 == "estimate":
            c2 = math.sqrt(second_moment_grid(grid_target))
        kl0 = _weak_value(cfg.weak, "kl0")
        if kl0 == "estimate":
            kl0 = kl_grid(grid, grid_target)
        h_prime = _weak_value(cfg.weak, "h_prime")
        if h_prime == "estimate":
            h_prime = estimate_h_prime(pot, c1, *gx)
        resolved.update({"c1": c1, "c2": c2, "h_prime": h_prime, "kl0": kl0})
        plans = [plan_weak(WeakPlanInputs(c1=c1, c2=c2, h_prime=h_prime, kl0=kl0), pot.L, pot.d, cfg.epsilon)]

    ens = init_ensemble(pot, init, cfg.n_chains, cfg.seed)
    bound_4dm = 4.0 * pot.d / pot.m if pot.m > 0 else math.inf

    chain_rows = []
    gauss_rows = []
    grid_rows = []
    stage_kls = []

    def record(step_idx: int):
        s = summarize(ens)
        chain_rows.append(
            TraceRow(
                step=step_idx,
                second_moment=s.second_moment,
                mean_norm=float(np.linalg.norm(s.mean)),
                second_moment_se=s.second_moment_se,
            )
        )
        if law is not None:
            sm = float(np.trace(law.cov) + law.mean @ law.mean)
            gauss_rows.append(
                (
                    step_idx,
                    kl_gaussian(law, gauss_target),
                    w2_gaussian(law, gauss_target),
                    fisher_info_relative(law, A),
                    sm,
                )
            )
        if grid is not None:
            grid_rows.append(
                (
                    step_idx,
                    kl_grid(grid, grid_target),
                    tv_grid(grid, grid_target),
                    w2_grid_1d(grid, grid_target),
                    second_moment_grid(grid),
                )
            )

    record(0)
    if law is not None and isinstance(init, str) and pot.m > 0:
        kl0_exact = kl_gaussian(law, gauss_target)
        verdicts.append(
            _verdict(
                "kl_init_bound",
                "KL(N(0, I/m), p*) <= d*L/m",
                kl_init_bound(pot.m, pot.L, pot.d) - kl0_exact,
            )
        )

    oracle_sm_worst = math.inf  # margin vs 4d/m along the law trajectory
    w2_contract_worst = math.inf  # most negative allowed increase of W2 to pi_h
    global_step = 0
    # with the grid oracle in lockstep the whole run is capped at grid_max_steps
    budget = cfg.grid_max_steps if grid is not None else None
    for plan in plans:
        k_eff = plan.k if budget is None else min(plan.k, budget - global_step)
        if k_eff <= 0:
            resolved["steps_capped_at"] = budget
            break
        if k_eff < plan.k:
            resolved["steps_capped_at"] = budget
        pi_h = stationary_law(A, plan.h) if law is not None else None
        w2_prev = w2_gaussian(law, pi_h) if law is not None else None
        for i in range(k_eff):
            ens = step(ens, plan.h)
            if law is not None:
                law = ula_step_law(law, A, plan.h)
                sm = float(np.trace(law.cov) + law.mean @ law.mean)
                oracle_sm_worst = min(oracle_sm_worst, bound_4dm - sm)
                w2_now = w2_gaussian(law, pi_h)
                w2_contract_worst = min(w2_contract_worst, w2_prev - w2_now)
                w2_prev = w2_now
            if grid is not None:
                grid = ula_step_grid(grid, pot, plan.h)
            global_step += 1
            if global_step % cfg.record_every == 0 or i == k_eff - 1:
                record(global_step)
        if law is not None:
            stage_kls.append((plan.epsilon, kl_gaussian(law, gauss_target)))

    # verdicts
    if law is not None:
        kl_final = kl_gaussian(law, gauss_target)
        target_eps = plans[-1].epsilon if plans else cfg.epsilon
        name = "strong_kl_final" if cfg.regime != "halving" else "halving_kl_final"
        verdicts.append(
            _verdict(name, "final KL(p_k, p*) <= epsilon under the planned schedule", target_eps - kl_final)
        )
        if cfg.regime == "halving" and stage_kls:
            verdicts.append(
                _verdict(
                    "halving_stage_targets",
                    "KL <= kl0/2^(j+1) at the end of every halving stage",
                    min(eps_j - kl_j for eps_j, kl_j in stage_kls),
                )
            )
        if pot.d == 1:
            verdicts.append(
                _verdict(
                    "tv_target",
                    "TV(p_k, p*) <= sqrt(epsilon)",
                    math.sqrt(target_eps) - tv_gaussian_1d(law, gauss_target),
                )
            )
        if pot.m > 0:
            verdicts.append(
                _verdict(
                    "w2_target",
                    "W2(p_k, p*) <= sqrt(2*epsilon/m)",
                    math.sqrt(2.0 * target_eps / pot.m) - w2_gaussian(law, gauss_target),
                )
            )
            verdicts.append(
                _verdict(
                    "second_moment_bound",
                    "law second moment <= 4d/m at every step",
                    oracle_sm_worst,
                )
            )
            emp_margin = min(
                bound_4dm + 5.0 * r.second_moment_se - r.second_moment for r in chain_rows
            )
            verdicts.append(
                _verdict(
                    "second_moment_bound_empirical",
                    "ensemble second moment <= 4d/m + 5 SE at every recorded step",
                    emp_margin,
                )
            )
        verdicts.append(
            _verdict(
                "w2_stationary_contraction",
                "W2(p_k, pi_h) is non-increasing in k",
                w2_contract_worst,
                tol=-1e-12,
            )
        )
        zs = z_scores_vs_oracle(summarize(ens), law)
        zmax = max(
            float(np.max(np.abs(zs["mean"]))),
            float(np.max(np.abs(zs["cov"]))),
            abs(zs["second_moment"]),
        )
        verdicts.append(
            _verdict(
                "sampler_matches_oracle",
                "final ensemble moments within 5 SE of the exact law",
                5.0 - zmax,
            )
        )

    if grid is not None:
        kls = [r[1] for r in grid_rows]
        verdicts.append(
            _verdict(
                "weak_kl_final" if cfg.regime == "weak" else "grid_kl_final",
                "final grid KL(p_k, p*) <= epsilon",
                cfg.epsilon - kls[-1],
            )
        )
        diffs = np.diff(kls)
        verdicts.append(
            _verdict(
                "kl_decreasing",
                "grid KL to p* decreases along the recorded run",
                float(-diffs.max()) if diffs.size else 0.0,
                tol=-1e-12,
            )
        )
        if cfg.regime == "weak":
            c1, c2 = resolved["c1"], resolved["c2"]
            cap = 4.0 * (c1 * c1 + c2 * c2)
            verdicts.append(
                _verdict(
                    "weak_second_moment_bound",
                    "grid second moment <= 4*(C1^2 + C2^2) along the run",
                    min(cap - r[4] for r in grid_rows),
                )
            )

    # persist
    def write_csv(name: str, header: str, rows, cols) -> str:
        path = out_dir / name
        with path.open("w") as fh:
            fh.write(header + "\n")
            for r in rows:
                fh.write(_fmt_row([r[i] for i in cols]) + "\n")
        written.append(path)
        return str(path)

    chain_path = out_dir / "chain.csv"
    chain_path.write_text(trace_csv(chain_rows))
    written.append(chain_path)
    outputs = {"chain_csv": str(chain_path)}
    if gauss_rows:
        outputs["gaussian_csv"] = write_csv(
            "gaussian.csv", "step,kl,w2,fisher,second_moment", gauss_rows, (0, 1, 2, 3, 4)
        )
    if grid_rows:
        outputs["grid_csv"] = write_csv(
            "grid.csv", "step,kl,tv,w2,second_moment", grid_rows, (0, 1, 2, 3, 4)
        )

    report = {
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.raw,
        "potential": {"kind": pot.kind, "m": pot.m, "L": pot.L, "d": pot.d},
        "plan": [_plan_dict(p) for p in plans],
        "resolved": resolved,
        "verdicts": [vars(v) for v in verdicts],
        "outputs": outputs,
    }
    path = out_dir / "report.json"
    path.write_text(json.dumps(_json_safe(report), sort_keys=True, indent=2, allow_nan=False) + "\n")
    written.append(path)
    return report, all(v.passed for v in verdicts)


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        report, ok = execute_run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (PlanningError, ValueError, RuntimeError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    for v in report["verdicts"]:
        status = "pass" if v["passed"] else "FAIL"
        print(f"{status} {v['name']} margin={v['margin']:.6g}")
    print(f"report: {Path(cfg.out_dir) / 'report.json'}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# verify suites


def _rand_law_1d(rng) -> GaussianLaw:
    return GaussianLaw(
        np.array([rng.normal(0.0, 2.0)]), np.array([[float(rng.uniform(0.3, 4.0))]])
    )


def _rand_spd(rng, d: int) -> np.ndarray:
    w = rng.uniform(0.3, 3.0, size=d)
    if d == 1:
        return np.array([[w[0]]])
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    return (Q * w) @ Q.T


def _rand_law(rng, d: int) -> GaussianLaw:
    return GaussianLaw(rng.normal(0.0, 1.0, size=d), _rand_spd(rng, d))


def _suite_inequalities(seed: int):
    rng = np.random.default_rng(seed)
    checks = []

    worst = math.inf
    for _ in range(100):
        p, q = _rand_law_1d(rng), _rand_law_1d(rng)
        worst = min(worst, math.sqrt(kl_gaussian(p, q) / 2.0) - tv_gaussian_1d(p, q))
    checks.append(("pinsker_tv_le_sqrt_kl_half", worst))

    worst = math.inf
    for _ in range(100):
        d = int(rng.integers(1, 4))
        A = _rand_spd(rng, d)
        m = float(np.linalg.eigvalsh(A)[0])
        p = _rand_law(rng, d)
        tgt = target_law(A)
        worst = min(worst, (2.0 / m) * kl_gaussian(p, tgt) - w2_gaussian(p, tgt) ** 2)
    checks.append(("talagrand_w2sq_le_2kl_over_m", worst))

    worst = math.inf
    for _ in range(100):
        d = int(rng.integers(1, 4))
        A = _rand_spd(rng, d)
        m = float(np.linalg.eigvalsh(A)[0])
        p = _rand_law(rng, d)
        worst = min(
            worst, fisher_info_relative(p, A) / (2.0 * m) - kl_gaussian(p, target_law(A))
        )
    checks.append(("log_sobolev_kl_le_fisher_over_2m", worst))

    worst = math.inf
    for _ in range(100):
        d = int(rng.integers(1, 4))
        A = _rand_spd(rng, d)
        p = _rand_law(rng, d)
        tgt = target_law(A)
        worst = min(
            worst,
            math.sqrt(fisher_info_relative(p, A)) * w2_gaussian(p, tgt) - kl_gaussian(p, tgt),
        )
    checks.append(("convex_kl_le_sqrt_fisher_times_w2", worst))

    worst = math.inf
    delta = 1e-5
    for _ in range(20):
        d = int(rng.integers(1, 4))
        a = rng.uniform(0.3, 3.0, size=d)
        A = np.diag(a)
        init = GaussianLaw(rng.uniform(-2.0, 2.0, size=d), np.diag(rng.uniform(0.4, 3.0, size=d)))
        t = float(rng.uniform(0.05, 1.0))
        tgt = target_law(A)
        dkl = (
            kl_gaussian(exact_flow_law(A, init, t + delta), tgt)
            - kl_gaussian(exact_flow_law(A, init, t - delta), tgt)
        ) / (2.0 * delta)
        fisher = fisher_info_relative(exact_flow_law(A, init, t), A)
        rel = abs(dkl + fisher) / max(fisher, 1e-300)
        worst = min(worst, 1e-3 - rel)
    checks.append(("dissipation_dkl_dt_eq_minus_fisher", worst))
    return checks


def _suite_oracle_equivalence(seed: int):
    pot = construct_potential("quadratic-diagonal", diag=[1.0])
    A = np.diag(pot.diag)
    lo, hi, n = -8.0, 8.0, 4096
    tgt_grid = target_density_grid(pot, lo, hi, n)
    grid = discretize_law(GaussianInit(mean=np.zeros(1), cov_diag=np.ones(1)), lo, hi, n)
    law = GaussianLaw(np.zeros(1), np.eye(1))
    tgt_law = target_law(A)
    h = 0.1
    worst = math.inf
    for _ in range(50):
        grid = ula_step_grid(grid, pot, h)
        law = ula_step_law(law, A, h)
        diff = abs(kl_grid(grid, tgt_grid) - kl_gaussian(law, tgt_law))
        worst = min(worst, 1e-3 - diff)
    return [("grid_vs_gaussian_kl_within_1e3", worst)]


def _suite_contraction(seed: int):
    checks = []
    quad = construct_potential("quadratic-diagonal", diag=[1.0])
    trace = coupled_run(
        quad, PointInit(np.array([1.0])), PointInit(np.array([-1.0])), h=0.5, k=8, n=4, seed=seed
    )
    expected = 2.0 * 0.5 ** np.arange(9)
    checks.append(("coupled_quadratic_exact_halving", 1e-12 - float(np.max(np.abs(trace.rms - expected)))))

    hub = construct_potential("huber", delta=1.0)
    tr = coupled_run(
        hub,
        GaussianInit(mean=np.zeros(1), cov_diag=np.full(1, 4.0)),
        GaussianInit(mean=np.full(1, 2.0), cov_diag=np.full(1, 1.0)),
        h=0.1,
        k=100,
        n=4000,
        seed=seed,
    )
    margins = tr.rms[:-1] + 5.0 * tr.se[:-1] - tr.rms[1:]
    checks.append(("coupled_huber_nonincreasing_5se", float(margins.min())))

    A = np.diag([1.0, 2.0])
    law = GaussianLaw(np.zeros(2), np.eye(2))
    pi_h = stationary_law(A, 0.01)
    prev = w2_gaussian(law, pi_h)
    worst = math.inf
    for _ in range(300):
        law = ula_step_law(law, A, 0.01)
        now = w2_gaussian(law, pi_h)
        worst = min(worst, prev - now + 1e-12)
        prev = now
    checks.append(("oracle_w2_to_stationary_nonincreasing", worst))
    return checks


def _suite_moments(seed: int):
    checks = []
    pot = construct_potential("quadratic-diagonal", diag=[1.0, 2.0])
    A = np.diag(pot.diag)
    bound = 4.0 * pot.d / pot.m
    law = GaussianLaw(np.zeros(2), np.eye(2))
    worst = math.inf
    for _ in range(400):
        law = ula_step_law(law, A, 0.01)
        worst = min(worst, bound - float(np.trace(law.cov) + law.mean @ law.mean))
    checks.append(("oracle_second_moment_le_4d_over_m", worst))

    ens = init_ensemble(pot, GAUSSIAN_1_OVER_M, 4000, seed)
    worst = math.inf
    for _ in range(300):
        ens = step(ens, 0.01)
        s = np.sum(ens.states * ens.states, axis=1)
        se = float(s.std(ddof=1) / math.sqrt(s.size))
        worst = min(worst, bound + 5.0 * se - float(s.mean()))
    checks.append(("empirical_second_moment_le_4d_over_m_5se", worst))

    rep = validate_constants(pot, 200, seed)
    checks.append(("potential_constants_hold", -rep.max_violation))
    return checks


SUITES = {
    "inequalities": _suite_inequalities,
    "oracle-equivalence": _suite_oracle_equivalence,
    "contraction": _suite_contraction,
    "moments": _suite_moments,
}


def cmd_verify(args) -> int:
    checks = SUITES[args.suite](args.seed)
    failed = False
    for name, margin in checks:
        ok = margin >= MARGIN_TOL
        failed |= not ok
        print(f"{'PASS' if ok else 'FAIL'} {name} margin={margin:.6g}")
    worst = min(m for _, m in checks)
    print(f"suite {args.suite}: {'FAIL' if failed else 'PASS'} (worst margin {worst:.6g})")
    return 1 if failed else 0


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="langevin-kl",
        description="Plan, run and verify unadjusted Langevin sampling experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="print an (h, k) schedule")
    p.add_argument("--regime", choices=["strong", "weak", "halving"], required=True)
    p.add_argument("--m", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--target", choices=["kl", "tv", "w2"], default="kl")
    p.add_argument("--delta", type=float)
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--h-prime", dest="h_prime", type=float)
    p.add_argument("--kl0", type=float)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_plan)

    r = sub.add_parser("run", help="execute a run config (INI)")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
