"""Experiment driver: config parsing, runs, sweeps, timing studies, CSV output.

Configs are TOML files with [run], [model], [policy], [sampling] and an
optional [sweep] section; unknown keys are rejected.  Every run writes
``trajectory.csv`` and ``summary.json`` into its output directory; the
sweep entry points add one aggregate CSV each.  Reruns with the same
config and seed produce identical CSVs except for wall-time columns.

Randomness: a single root seed feeds ``numpy.random.SeedSequence``;
each model draws from its own spawned stream (toy rotation generators,
random expansion coefficients, random diffusion samples), so changing
one model's draws never shifts another's.
"""

from __future__ import annotations

import hashlib
import json
import time

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .errors import BaselineSingular, ConfigError, ModelBlowup
from .integrators import (
    MdeModel,
    RankPolicy,
    StepDiagnostics,
    fom_solve,
    initial_state,
    relative_error,
    tdb_cur_step,
)
from .integrators import dlra_step as _dlra_step
from .integrators import do_step as _do_step
from .lowrank import error_proxy, write_checkpoint
from .models import AdrSpec, BurgersSpec, ToySpec, adr_model, burgers_model, toy_model
from .schemes import SchemeSpec, scheme

_METHODS = ("tdb_cur", "dlra", "do", "fom")
_MODELS = ("toy", "burgers", "adr")
_SELECTORS = ("deim", "qdeim")
_COMPARE = ("none", "exact", "fom")


@dataclass(frozen=True)
class ExperimentConfig:
    method: str
    scheme_kind: str
    dt: float
    t_final: float
    seed: int
    model_kind: str
    model_params: dict
    policy: RankPolicy
    selector: str = "deim"
    rank_pad: bool = False
    compare: str = "none"
    compare_every: int = 0  # steps between error samples; 0 = final only
    checkpoint_every: int = 0
    threads: int = 1
    sweep: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        out = asdict(self)
        out["policy"] = asdict(self.policy)
        return out

    def hash(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_RUN_KEYS = {
    "method": str,
    "scheme": str,
    "dt": float,
    "t_final": float,
    "seed": int,
    "compare": str,
    "compare_every": int,
    "checkpoint_every": int,
    "threads": int,
}
_POLICY_KEYS = {
    "r0": int,
    "r_min": int,
    "r_max": int,
    "eps_l": float,
    "eps_u": float,
    "m": int,
    "adapt": bool,
    "rank_pad": bool,
}
_SAMPLING_KEYS = {"selector": str}
_MODEL_KEYS: dict[str, dict] = {
    "toy": {"n": int, "rank_deficient": bool},
    "burgers": {
        "n": int,
        "s": int,
        "nu": float,
        "d": int,
        "sigma_noise": float,
        "kernel_length": float,
        "penalty_tau": float,
    },
    "adr": {
        "nx": int,
        "ny": int,
        "s": int,
        "xi_mean": float,
        "xi_std": float,
        "u_max": float,
        "with_reaction": bool,
        "neumann_outflow": bool,
    },
}
_SWEEP_KEYS = {
    "ranks": list,
    "dts": list,
    "sizes": list,
    "methods": list,
    "timed_steps": int,
    "warmup_steps": int,
    "fom_max_bytes": int,
}


def _take(section: dict, schema: dict, where: str) -> dict:
    unknown = set(section) - set(schema)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in [{where}]")
    out = {}
    for key, value in section.items():
        want = schema[key]
        if want is float and isinstance(value, (int, float)) and not isinstance(value, bool):
            out[key] = float(value)
        elif want is int and isinstance(value, int) and not isinstance(value, bool):
            out[key] = int(value)
        elif want is bool and isinstance(value, bool):
            out[key] = value
        elif want is str and isinstance(value, str):
            out[key] = value
        elif want is list and isinstance(value, list):
            out[key] = value
        else:
            raise ConfigError(f"key '{key}' in [{where}] must be of type {want.__name__}")
    return out


def load_config(path: str | Path, seed_override: int | None = None,
                threads_override: int | None = None,
                checkpoint_override: int | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    known_sections = {"run", "model", "policy", "sampling", "sweep"}
    unknown = set(raw) - known_sections
    if unknown:
        raise ConfigError(f"unknown section(s) {sorted(unknown)}")
    run = _take(raw.get("run", {}), _RUN_KEYS, "run")
    model = dict(raw.get("model", {}))
    kind = model.pop("kind", None)
    if kind not in _MODELS:
        raise ConfigError(f"[model] kind must be one of {_MODELS}, got {kind!r}")
    params = _take(model, _MODEL_KEYS[kind], "model")
    pol_raw = _take(raw.get("policy", {}), _POLICY_KEYS, "policy")
    rank_pad = pol_raw.pop("rank_pad", False)
    samp = _take(raw.get("sampling", {}), _SAMPLING_KEYS, "sampling")
    sweep = _take(raw.get("sweep", {}), _SWEEP_KEYS, "sweep")

    for req in ("method", "dt", "t_final"):
        if req not in run:
            raise ConfigError(f"[run] is missing required key '{req}'")
    if run["method"] not in _METHODS:
        raise ConfigError(f"[run] method must be one of {_METHODS}")
    if run.get("compare", "none") not in _COMPARE:
        raise ConfigError(f"[run] compare must be one of {_COMPARE}")
    selector = samp.get("selector", "deim")
    if selector not in _SELECTORS:
        raise ConfigError(f"[sampling] selector must be one of {_SELECTORS}")
    if "r0" not in pol_raw:
        raise ConfigError("[policy] is missing required key 'r0'")
    if run["dt"] <= 0 or run["t_final"] <= 0:
        raise ConfigError("[run] dt and t_final must be positive")
    defaults = {"r_min": 1, "r_max": 2**31, "eps_l": 0.0, "eps_u": 1.0,
                "m": 0, "adapt": False}
    policy_args = {**defaults, **pol_raw}
    try:
        policy = RankPolicy(**policy_args)
    except ValueError as exc:
        raise ConfigError(f"[policy] {exc}") from exc

    seed = seed_override if seed_override is not None else run.get("seed", 0)
    return ExperimentConfig(
        method=run["method"],
        scheme_kind=run.get("scheme", "rk4_classic"),
        dt=run["dt"],
        t_final=run["t_final"],
        seed=int(seed),
        model_kind=kind,
        model_params=params,
        policy=policy,
        selector=selector,
        rank_pad=rank_pad,
        compare=run.get("compare", "none"),
        compare_every=run.get("compare_every", 0),
        checkpoint_every=(checkpoint_override if checkpoint_override is not None
                          else run.get("checkpoint_every", 0)),
        threads=(threads_override if threads_override is not None
                 else run.get("threads", 1)),
        sweep=sweep,
    )


# ---------------------------------------------------------------------------
# Model construction


def build_model(config: ExperimentConfig):
    """Instantiate the configured model; returns (model, v0, exact_or_None).

    v0 is a factored pair (L, R) with V0 = L @ R.T where the model
    provides one, else a dense array.
    """
    params = dict(config.model_params)
    if config.model_kind == "toy":
        spec = ToySpec(seed=config.seed, **params)
        model, exact = toy_model(spec)
        return model, model.initial_value(), exact
    if config.model_kind == "burgers":
        spec = BurgersSpec(seed=config.seed, dt=config.dt, t_final=config.t_final, **params)
        model, v0 = burgers_model(spec)
        return model, v0, None
    spec = AdrSpec(seed=config.seed, dt=config.dt, t_final=config.t_final, **params)
    model, v0 = adr_model(spec)
    return model, v0, None


class _ThreadedColumns(MdeModel):
    """Evaluate independent columns in a thread pool, block by block.

    Results are assembled in block order, so the output is identical to
    the serial evaluation; only wall time changes.
    """

    def __init__(self, inner: MdeModel, threads: int):
        self.inner = inner
        self.threads = threads
        self.n, self.s, self.adjacency = inner.n, inner.s, inner.adjacency

    def rhs_cols(self, t, v_cols, cols):
        cols = np.asarray(cols)
        k = v_cols.shape[1]
        if self.threads <= 1 or k < 2 * self.threads:
            return self.inner.rhs_cols(t, v_cols, cols)
        blocks = np.array_split(np.arange(k), self.threads)
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            parts = list(
                pool.map(
                    lambda blk: self.inner.rhs_cols(t, v_cols[:, blk], cols[blk]), blocks
                )
            )
        return np.concatenate(parts, axis=1)

    def rhs_rows(self, t, v_sub, rows, adjacent):
        return self.inner.rhs_rows(t, v_sub, rows, adjacent)

    def rhs_full(self, t, v):
        return self.inner.rhs_full(t, v)


# ---------------------------------------------------------------------------
# Single runs


@dataclass
class RunRecord:
    config: ExperimentConfig
    rows: list[dict]
    summary: dict
    final: object | None = None


def _dense_rk_step(model, v, t, dt, spec: SchemeSpec):
    a, b, c = spec.a, spec.b, spec.c
    stage_f = []
    for i in range(len(b)):
        x = v
        for j in range(i):
            if a[i, j] != 0.0:
                x = x + (dt * a[i, j]) * stage_f[j]
        stage_f.append(model.rhs_full(t + c[i] * dt, x))
    for bi, fi in zip(b, stage_f):
        if bi != 0.0:
            v = v + (dt * bi) * fi
    return v


def _svals_to_row(svals: np.ndarray, width: int) -> list:
    vals = list(np.asarray(svals, dtype=float))
    return vals + [""] * (width - len(vals))


class _Reference:
    """Error reference advanced in lockstep with the run (dense, or exact)."""

    def __init__(self, config: ExperimentConfig, model, v0, exact):
        self.kind = config.compare
        self.exact = exact
        self.spec = scheme(config.scheme_kind)
        self.dt = config.dt
        if self.kind == "exact" and exact is None:
            raise ConfigError("compare = 'exact' needs a model with a closed-form solution")
        self.v = _dense_v0(v0) if self.kind == "fom" else None
        self.model = model

    def advance(self, t):
        if self.kind == "fom":
            self.v = _dense_rk_step(self.model, self.v, t, self.dt, self.spec)

    def value(self, t):
        if self.kind == "exact":
            return self.exact(t)
        return self.v


def _dense_v0(v0) -> np.ndarray:
    if isinstance(v0, tuple):
        left, right = v0
        return left @ right.T
    return np.asarray(v0, dtype=np.float64)


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None,
                   keep_final: bool = False) -> RunRecord:
    """Execute one configured run and write its artifacts.

    A model blowup or baseline failure mid-run is recorded (partial
    trajectory plus a failure marker in the summary) rather than raised;
    the caller inspects ``summary['failed']``.

    BLAS pools are pinned to the configured thread count: the factors
    here are small on at least one side, where oversubscribed BLAS
    threading costs far more than it buys.
    """
    with threadpool_limits(limits=max(1, config.threads)):
        return _run_experiment(config, out_dir, keep_final)


def _run_experiment(config: ExperimentConfig, out_dir: str | Path | None,
                    keep_final: bool) -> RunRecord:
    model, v0, exact = build_model(config)
    if config.threads > 1 and not model.adjacency.full_coupling:
        model = _ThreadedColumns(model, config.threads)
    spec = scheme(config.scheme_kind)
    steps = int(round(config.t_final / config.dt))
    if abs(steps * config.dt - config.t_final) > 1e-9 * config.t_final:
        raise ConfigError("t_final must be an integer multiple of dt")
    reference = _Reference(config, model, v0, exact) if config.compare != "none" else None

    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)

    rows: list[dict] = []
    failure: dict | None = None
    final = None
    err_every = config.compare_every
    t_start = time.perf_counter()

    try:
        if config.method == "tdb_cur":
            state = initial_state(v0, config.policy.r0, pad_to_rank=config.rank_pad)
            # rank growth must leave room for the oversampled rows
            policy = replace(
                config.policy,
                r_max=min(config.policy.r_max, model.s, model.n - config.policy.m),
            )
            for k in range(steps):
                state, diag = tdb_cur_step(
                    state, model, config.dt, spec, policy, config.selector
                )
                if reference is not None:
                    reference.advance(state.t - config.dt)
                want_err = reference is not None and (
                    k == steps - 1 or (err_every and (k + 1) % err_every == 0)
                )
                err = ""
                if want_err:
                    err = relative_error(state, reference.value(state.t))
                rows.append(
                    {
                        "t": state.t,
                        "r": diag.rank,
                        "epsilon": diag.epsilon,
                        "svals": diag.sigma,
                        "eta_p": diag.eta_p,
                        "eta_s": diag.eta_s if diag.eta_s is not None else "",
                        "error": err,
                        "wall_ms": 1e3 * diag.wall_total,
                    }
                )
                if out_path is not None and config.checkpoint_every and (
                    (k + 1) % config.checkpoint_every == 0
                ):
                    with open(out_path / f"checkpoint_{k + 1:08d}.bin", "wb") as fh:
                        write_checkpoint(state, fh)
            if keep_final:
                final = state
        elif config.method in ("dlra", "do"):
            state0 = initial_state(v0, config.policy.r0, pad_to_rank=config.rank_pad)
            t = 0.0
            if config.method == "dlra":
                u, core, y = state0.u, np.diag(state0.sigma), state0.y
            else:
                u, y = state0.u, state0.y * state0.sigma
            for k in range(steps):
                tic = time.perf_counter()
                if config.method == "dlra":
                    u, core, y = _dlra_step(u, core, y, model, t, config.dt, spec)
                    svals = np.linalg.svd(core, compute_uv=False)
                else:
                    u, y = _do_step(u, y, model, t, config.dt, spec)
                    svals = np.linalg.svd(y, compute_uv=False)
                wall = time.perf_counter() - tic
                t += config.dt
                if reference is not None:
                    reference.advance(t - config.dt)
                want_err = reference is not None and (
                    k == steps - 1 or (err_every and (k + 1) % err_every == 0)
                )
                err = ""
                if want_err:
                    dense = (u @ core) @ y.T if config.method == "dlra" else u @ y.T
                    ref = reference.value(t)
                    err = float(np.linalg.norm(dense - ref) / np.linalg.norm(ref))
                rows.append(
                    {
                        "t": t,
                        "r": len(svals),
                        "epsilon": error_proxy(svals) if svals[0] > 0 else "",
                        "svals": svals,
                        "eta_p": "",
                        "eta_s": "",
                        "error": err,
                        "wall_ms": 1e3 * wall,
                    }
                )
            if keep_final:
                final = (u @ core) @ y.T if config.method == "dlra" else u @ y.T
        elif config.method == "fom":
            v = _dense_v0(v0)
            t = 0.0
            for k in range(steps):
                tic = time.perf_counter()
                v = _dense_rk_step(model, v, t, config.dt, spec)
                wall = time.perf_counter() - tic
                t += config.dt
                if not np.isfinite(v).all():
                    raise ModelBlowup(t, "dense solution")
                if reference is not None:
                    reference.advance(t - config.dt)
                want_err = reference is not None and (
                    k == steps - 1 or (err_every and (k + 1) % err_every == 0)
                )
                err = ""
                if want_err:
                    ref = reference.value(t)
                    err = float(np.linalg.norm(v - ref) / np.linalg.norm(ref))
                rows.append(
                    {
                        "t": t,
                        "r": "",
                        "epsilon": "",
                        "svals": np.empty(0),
                        "eta_p": "",
                        "eta_s": "",
                        "error": err,
                        "wall_ms": 1e3 * wall,
                    }
                )
            if keep_final:
                final = v
        else:  # pragma: no cover - guarded by config validation
            raise ConfigError(f"unknown method {config.method}")
    except (ModelBlowup, BaselineSingular) as exc:
        failure = {
            "kind": type(exc).__name__,
            "detail": str(exc),
            "t": getattr(exc, "t", rows[-1]["t"] if rows else 0.0),
        }

    total_wall = time.perf_counter() - t_start
    max_rank = max((row["r"] for row in rows if row["r"] != ""), default="")
    final_error = next(
        (row["error"] for row in reversed(rows) if row["error"] != ""), ""
    )
    summary = {
        "config": config.resolved(),
        "config_hash": config.hash(),
        "version": __version__,
        "failed": failure is not None,
        "failure": failure,
        "steps_completed": len(rows),
        "steps_requested": steps,
        "final_error": final_error,
        "max_rank": max_rank,
        "total_wall_s": total_wall,
        "notes": {
            "eta_s_basis": "current-step parametric basis at the previously selected columns",
        },
    }
    record = RunRecord(config=config, rows=rows, summary=summary, final=final)
    if out_path is not None:
        _write_trajectory(out_path / "trajectory.csv", record)
        (out_path / "summary.json").write_text(json.dumps(summary, indent=2, default=str))
    return record


def _write_trajectory(path: Path, record: RunRecord) -> None:
    width = max((len(r["svals"]) for r in record.rows), default=0)
    header = (
        ["t", "r", "epsilon"]
        + [f"sigma_{i + 1}" for i in range(width)]
        + ["eta_p", "eta_s", "error", "step_wall_ms"]
    )
    lines = [",".join(header)]
    for row in record.rows:
        cells = [
            _fmt(row["t"]),
            str(row["r"]),
            _fmt(row["epsilon"]),
            *[_fmt(v) for v in _svals_to_row(row["svals"], width)],
            _fmt(row["eta_p"]),
            _fmt(row["eta_s"]),
            _fmt(row["error"]),
            _fmt(row["wall_ms"]),
        ]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def _fmt(value) -> str:
    if value == "":
        return ""
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


# ---------------------------------------------------------------------------
# Sweeps


def _final_dense(record_cfg: ExperimentConfig):
    """Dense final value of the configured reference (exact or dense solve)."""
    model, v0, exact = build_model(record_cfg)
    if exact is not None:
        return exact(record_cfg.t_final), model
    spec = scheme(record_cfg.scheme_kind)
    traj = fom_solve(model, _dense_v0(v0), record_cfg.dt, spec, record_cfg.t_final)
    return traj.final, model


def _run_to_final_error(config: ExperimentConfig):
    """Run one method to t_final; returns (error or None-on-failure, record)."""
    record = run_experiment(config, out_dir=None)
    if record.summary["failed"]:
        return None, record
    err = record.summary["final_error"]
    if err == "":
        return None, record
    return float(err), record


def sweep_rank(config: ExperimentConfig, out_dir: str | Path) -> Path:
    """Final error versus rank for the configured methods.

    Adds rows for the truncated-SVD optimum of the dense reference, the
    floor any rank-r approximation of the final value can reach.
    """
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    ranks = [int(r) for r in config.sweep.get("ranks", [])]
    if not ranks:
        raise ConfigError("[sweep] ranks is required for sweep-rank")
    methods = config.sweep.get("methods", [config.method])
    reference, _ = _final_dense(config)
    ref_norm = np.linalg.norm(reference)
    svals = np.linalg.svd(reference, compute_uv=False)
    lines = ["method,r,error,failed"]
    for method in methods:
        for r in ranks:
            cfg = replace(
                config,
                method=method,
                compare=config.compare if config.compare != "none" else
                ("exact" if config.model_kind == "toy" else "fom"),
                policy=replace(config.policy, r0=r,
                               r_max=max(r, config.policy.r_max),
                               adapt=False),
            )
            err, record = _run_to_final_error(cfg)
            failed = err is None or not np.isfinite(err) or err > 1e3
            lines.append(
                f"{method},{r},{_fmt(err if err is not None else '')},{int(failed)}"
            )
    for r in ranks:
        tail = float(np.sqrt((svals[r:] ** 2).sum()) / ref_norm)
        lines.append(f"svd_optimal,{r},{_fmt(tail)},0")
    target = out_path / "error_vs_rank.csv"
    target.write_text("\n".join(lines) + "\n")
    return target


def sweep_dt(config: ExperimentConfig, out_dir: str | Path) -> Path:
    """Final error versus step size at fixed rank."""
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    dts = [float(v) for v in config.sweep.get("dts", [])]
    if not dts:
        raise ConfigError("[sweep] dts is required for sweep-dt")
    methods = config.sweep.get("methods", [config.method])
    lines = ["method,r,dt,error,failed"]
    for method in methods:
        for dt in dts:
            cfg = replace(
                config,
                method=method,
                dt=dt,
                compare=config.compare if config.compare != "none" else
                ("exact" if config.model_kind == "toy" else "fom"),
            )
            err, record = _run_to_final_error(cfg)
            failed = err is None or not np.isfinite(err) or err > 1e3
            lines.append(
                f"{method},{cfg.policy.r0},{_fmt(dt)},"
                f"{_fmt(err if err is not None else '')},{int(failed)}"
            )
    target = out_path / "error_vs_dt.csv"
    target.write_text("\n".join(lines) + "\n")
    return target


def scaling_study(config: ExperimentConfig, out_dir: str | Path) -> Path:
    """Median per-step wall time versus problem size at fixed rank.

    Runs the configured model at n = s for each size, timing
    ``timed_steps`` steps after ``warmup_steps``.  Dense methods are
    skipped for sizes whose working set would exceed ``fom_max_bytes``.

    The step size shrinks with the square of the refinement relative to
    the smallest size: per-step cost does not depend on dt, but the
    explicit diffusion and penalty stability limits do, and a timed run
    must actually survive its steps.
    """
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    sizes = [int(v) for v in config.sweep.get("sizes", [])]
    if not sizes:
        raise ConfigError("[sweep] sizes is required for scaling")
    methods = config.sweep.get("methods", ["fom", "dlra", "tdb_cur"])
    warmup = int(config.sweep.get("warmup_steps", 5))
    timed = int(config.sweep.get("timed_steps", 50))
    budget = int(config.sweep.get("fom_max_bytes", 6_000_000_000))
    lines = ["method,n,s,median_step_ms,steps_timed,skipped"]
    size_ref = min(sizes)
    for size in sizes:
        for method in methods:
            dense_bytes = 8 * size * size * 8  # state + stage temporaries
            if method in ("fom", "dlra") and dense_bytes > budget:
                lines.append(f"{method},{size},{size},,0,1")
                continue
            params = dict(config.model_params)
            if config.model_kind == "burgers":
                params["n"] = size
                params["s"] = size
            elif config.model_kind == "adr":
                params["s"] = size
            else:
                params["n"] = size
            dt = config.dt * (size_ref / size) ** 2
            cfg = replace(
                config,
                method=method,
                model_params=params,
                dt=dt,
                t_final=dt * (warmup + timed),
                compare="none",
            )
            record = run_experiment(cfg, out_dir=None)
            walls = [row["wall_ms"] for row in record.rows[warmup:]]
            if record.summary["failed"] or not walls:
                lines.append(f"{method},{size},{size},,0,1")
                continue
            med = float(np.median(walls))
            lines.append(f"{method},{size},{size},{_fmt(med)},{len(walls)},0")
    target = out_path / "scaling.csv"
    target.write_text("\n".join(lines) + "\n")
    return target


def compare_fom(config: ExperimentConfig, out_dir: str | Path) -> Path:
    """Relative error against the dense reference, sampled over time."""
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    cfg = replace(
        config,
        compare=("exact" if config.model_kind == "toy" else "fom"),
        compare_every=config.compare_every or max(1, int(round(config.t_final / config.dt)) // 50),
    )
    record = run_experiment(cfg, out_dir=None)
    lines = ["t,r,error"]
    for row in record.rows:
        if row["error"] != "":
            lines.append(f"{_fmt(row['t'])},{row['r']},{_fmt(row['error'])}")
    target = out_path / "error_vs_time.csv"
    target.write_text("\n".join(lines) + "\n")
    if record.summary["failed"]:
        (out_path / "summary.json").write_text(
            json.dumps(record.summary, indent=2, default=str)
        )
    return target
