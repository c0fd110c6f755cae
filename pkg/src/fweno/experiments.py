"""Declarative experiment configs and the commands that run them.

A config is flat ``key = value`` text; ``#`` starts a comment and list
values are comma separated::

    experiment = advection
    variant = fweno, yc
    r = 3
    N = 10, 20, 40, 80

Each command writes its tables and figures under an output directory and
returns an exit status: 0 on success, 2 when an acceptance threshold fails.
"""

from __future__ import annotations

import dataclasses
import hashlib
import logging
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as fio
from .coeffgen import DiscretizationMode, R_MAX, R_MIN, generate_table
from .costs import closed_form
from .kernels import DEFAULT_EPS, KINDS, WenoVariant, instrumented_costs
from .models import Splitting, primitive_from_conserved
from .problems import Problem, get_problem, restrict
from .solver import DtRule, RunResult, SolverConfig, error_norms, run

log = logging.getLogger(__name__)

EXPERIMENTS = ("advection", "burgers-smooth", "burgers-shock", "shu-osher", "sod", "dmr",
               "riemann2d", "uniform2d", "bench-kernels", "convergence")

COMMAND_EXPERIMENTS = {
    "convergence": ("advection", "burgers-smooth", "convergence"),
    "shock": ("burgers-shock", "shu-osher", "sod"),
    "run2d": ("dmr", "riemann2d", "uniform2d"),
    "bench": ("bench-kernels",),
}

# grids used when a config leaves N out
DEFAULT_GRIDS = {
    "dmr": [(512, 128)],
    "riemann2d": [(256, 256)],
    "uniform2d": [(32, 32)],
    "bench-kernels": [100, 200, 400],
}

EXIT_OK, EXIT_ERROR, EXIT_THRESHOLD = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    experiment: str
    variants: list = field(default_factory=lambda: ["fweno"])
    r: list = field(default_factory=lambda: [3])
    grids: list = field(default_factory=list)
    cfl: float | None = None
    s: int | None = None
    s1: int | None = None
    s2: int | None = None
    eps: float = DEFAULT_EPS
    splitting: Splitting | None = None
    T: float | None = None
    dt_rule: DtRule | None = None
    problem: str | None = None
    reference_N: tuple | None = None
    reference_variant: str = "js"
    lf_margin: float = 0.1
    windows: int = 1_000_000
    seed: int = 0
    instrument: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if not self.grids:
            self.grids = list(DEFAULT_GRIDS.get(self.experiment, []))
        if not self.grids:
            raise ConfigError(f"{self.experiment} needs a non-empty grid list (key N)")
        if self.cfl is not None and not 0 < self.cfl <= 1:
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}")
        for v in self.variants:
            if v not in KINDS:
                raise ConfigError(f"unknown variant {v!r}; expected one of {KINDS}")
        for r in self.r:
            if not R_MIN <= r <= R_MAX:
                raise ConfigError(f"r={r} outside [{R_MIN}, {R_MAX}]")
        if self.windows < 1:
            raise ConfigError("windows must be positive")

    def problem_name(self) -> str:
        if self.problem:
            return self.problem
        if self.experiment == "convergence":
            return "advection"
        if self.experiment == "bench-kernels":
            return "shu-osher"
        return self.experiment

    def load_problem(self) -> Problem:
        return get_problem(self.problem_name())

    def variant(self, kind: str, problem: Problem | None = None) -> WenoVariant:
        s2 = self.s2 if self.s2 is not None else (problem.s2 if problem is not None else 1)
        return WenoVariant(kind, s=self.s, s1=self.s1, s2=s2, eps=self.eps)

    def solver_config(self, problem: Problem, kind: str, r: int, N, *, instrument=None) -> SolverConfig:
        grids = problem.grids(*_as_tuple(N))
        return SolverConfig(
            model=problem.model, r=r, variant=self.variant(kind, problem),
            splitting=self.splitting or problem.splitting, grids=grids, bcs=problem.bcs,
            T=self.T if self.T is not None else problem.T,
            cfl=self.cfl if self.cfl is not None else problem.cfl,
            dt_rule=self.dt_rule or problem.dt_rule, lf_margin=self.lf_margin,
            instrument=self.instrument if instrument is None else instrument,
        )


def _as_tuple(N) -> tuple:
    return tuple(N) if isinstance(N, (tuple, list)) else (int(N),)


def _parse_grid(text: str):
    parts = text.lower().split("x")
    if len(parts) == 1:
        return int(parts[0])
    if len(parts) == 2:
        return (int(parts[0]), int(parts[1]))
    raise ValueError(f"bad grid size {text!r}")


def _split_list(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",")]
    if any(not t for t in items):
        raise ValueError("empty list entry")
    return items


def _parse_cfl(text: str) -> float:
    val = float(text)
    if not 0 < val <= 1:
        raise ValueError(f"cfl must lie in (0, 1], got {val}")
    return val


def _parse_bool(text: str) -> bool:
    key = text.strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_KEYS = {
    "experiment": ("experiment", str.strip),
    "variant": ("variants", lambda v: [x.lower() for x in _split_list(v)]),
    "variants": ("variants", lambda v: [x.lower() for x in _split_list(v)]),
    "r": ("r", lambda v: [int(x) for x in _split_list(v)]),
    "n": ("grids", lambda v: [_parse_grid(x) for x in _split_list(v)]),
    "cfl": ("cfl", lambda v: _parse_cfl(v)),
    "s": ("s", int),
    "s1": ("s1", int),
    "s2": ("s2", int),
    "eps": ("eps", float),
    "epsilon": ("eps", float),
    "splitting": ("splitting", Splitting.parse),
    "t": ("T", float),
    "dt_rule": ("dt_rule", DtRule.parse),
    "problem": ("problem", str.strip),
    "reference_n": ("reference_N", lambda v: _as_tuple(_parse_grid(v.strip())) if v.strip() != "0" else ()),
    "reference_variant": ("reference_variant", lambda v: v.strip().lower()),
    "lf_margin": ("lf_margin", float),
    "windows": ("windows", lambda v: int(float(v))),
    "seed": ("seed", int),
    "instrument": ("instrument", _parse_bool),
}


def parse_config(text: str, source: str = "<config>") -> ExperimentSpec:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key = key.strip().lower()
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        attr, conv = _KEYS[key]
        try:
            values[attr] = conv(value.strip())
        except ValueError as e:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {e}") from None
    if "experiment" not in values:
        raise ConfigError(f"{source}: missing required key 'experiment'")
    try:
        return ExperimentSpec(**values)
    except ConfigError as e:
        raise ConfigError(f"{source}: {e}") from None


def load_config(path) -> ExperimentSpec:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


# ------------------------------------------------------------- references

def reference_solution(spec: ExperimentSpec, problem: Problem, r: int, cache_dir: Path | None):
    """High-resolution run of the reference variant, cached on disk by its settings."""
    N = spec.reference_N if spec.reference_N is not None else _as_tuple(problem.notes.get("reference_N", ()))
    if not N:
        return None
    cfg = spec.solver_config(problem, spec.reference_variant, r, N, instrument=False)
    key = repr((problem.name, cfg.r, cfg.variant, cfg.splitting, cfg.T, cfg.cfl, cfg.dt_rule, N,
                cfg.lf_margin, cfg.model.gamma))
    digest = hashlib.sha1(key.encode()).hexdigest()[:16]
    path = None
    if cache_dir is not None:
        cache_dir.mkdir(parents=True, exist_ok=True)
        path = cache_dir / f"{problem.name}_ref_{digest}.npy"
        if path.exists():
            return cfg.grids, np.load(path)
    log.info("computing %s reference at N=%s", problem.name, N)
    res = run(cfg, problem.initial(cfg.grids))
    if path is not None:
        np.save(path, res.U)
    return cfg.grids, res.U


def _cache_dir(out: Path) -> Path:
    env = os.environ.get("FWENO_CACHE")
    return Path(env) if env else out / "references"


def _label(N) -> str:
    return "x".join(str(n) for n in _as_tuple(N))


# ------------------------------------------------------------- commands

@dataclass
class CommandResult:
    status: int
    outputs: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    messages: list = field(default_factory=list)


def _check_command(cmd: str, spec: ExperimentSpec):
    if spec.experiment not in COMMAND_EXPERIMENTS[cmd]:
        raise ConfigError(f"experiment {spec.experiment!r} cannot run under '{cmd}'; "
                          f"expected one of {COMMAND_EXPERIMENTS[cmd]}")


def cmd_convergence(spec: ExperimentSpec, out) -> CommandResult:
    """Error and observed-order tables against the exact solution."""
    _check_command("convergence", spec)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    problem = spec.load_problem()
    if problem.exact is None:
        raise ConfigError(f"{problem.name} has no exact solution for a convergence study")
    result = CommandResult(EXIT_OK)
    for kind in spec.variants:
        for r in spec.r:
            Ns, l1, linf, times = [], [], [], []
            for N in spec.grids:
                cfg = spec.solver_config(problem, kind, r, N)
                try:
                    res = run(cfg, problem.initial(cfg.grids), exact=lambda t: problem.exact(cfg.grids, t))
                except Exception as e:
                    raise RuntimeError(f"{problem.name} {kind} r={r} N={N}: {e}") from e
                Ns.append(_as_tuple(N)[0])
                l1.append(res.errors["l1"])
                linf.append(res.errors["linf"])
                times.append(res.kernel_seconds)
            rows = fio.convergence_rows(Ns, l1, linf)
            path = fio.write_convergence_csv(out / f"{spec.experiment}_{kind}_r{r}.csv", rows)
            result.outputs.append(path)
            result.data[(kind, r)] = rows
            if len(rows) > 1:
                target = 2 * r - 1 - 0.5
                final = rows[-1]["L1_order"]
                if not final >= target:
                    result.status = EXIT_THRESHOLD
                    result.messages.append(f"{kind} r={r}: finest-pair L1 order {final:.3f} below {target}")
    return result


def _max_principle_violation(u0: np.ndarray, u: np.ndarray) -> float:
    return float(max(u.max() - u0.max(), u0.min() - u.min(), 0.0))


def cmd_shock(spec: ExperimentSpec, out) -> CommandResult:
    """Shock runs: field dumps, distance to a fine reference, admissibility checks."""
    _check_command("shock", spec)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    problem = spec.load_problem()
    result = CommandResult(EXIT_OK)
    refs = {}
    for kind in spec.variants:
        for r in spec.r:
            if r not in refs:
                refs[r] = reference_solution(spec, problem, r, _cache_dir(out))
            ref = refs[r]
            rows = []
            for N in spec.grids:
                cfg = spec.solver_config(problem, kind, r, N)
                U0 = problem.initial(cfg.grids)
                try:
                    res = run(cfg, U0)
                except Exception as e:
                    raise RuntimeError(f"{problem.name} {kind} r={r} N={N}: {e}") from e
                dump = out / f"{spec.experiment}_{kind}_r{r}_N{_label(N)}.dat"
                fio.write_field(dump, res.U, [g.h for g in cfg.grids], res.t, cfg.model.gamma, cfg.model.name)
                result.outputs.append(dump)
                row = {"N": _as_tuple(N)[0], "L1": math.nan, "Linf": math.nan,
                       "kernel_seconds": res.kernel_seconds, "total_seconds": res.total_seconds,
                       "steps": res.steps}
                if ref is not None:
                    fine_grids, Uref = ref
                    coarse = restrict(Uref, fine_grids, cfg.grids)
                    e = error_norms(res.U[0], coarse[0], cfg.grids)
                    row["L1"], row["Linf"] = e["l1"], e["linf"]
                if cfg.model.is_euler:
                    prim = primitive_from_conserved(res.U, cfg.model.gamma)
                    row["min_rho"], row["min_p"] = float(prim[0].min()), float(prim[-1].min())
                else:
                    row["overshoot"] = _max_principle_violation(U0, res.U)
                    if row["overshoot"] > 1e-10:
                        result.status = EXIT_THRESHOLD
                        result.messages.append(f"{kind} r={r} N={N}: maximum principle violated by "
                                               f"{row['overshoot']:.3e}")
                if res.op_counts is not None:
                    row["ops"] = res.op_counts.total
                rows.append(row)
                result.data[(kind, r, _as_tuple(N)[0])] = (row, res)
            keys = list(rows[0])
            summary = fio.write_csv(out / f"{spec.experiment}_{kind}_r{r}.csv", keys,
                                    [[row.get(k) for k in keys] for row in rows])
            result.outputs.append(summary)
    from .plotting import plot_shock

    result.outputs.append(plot_shock(result.data, problem, refs, out / f"{spec.experiment}.png"))
    return result


def cmd_2d(spec: ExperimentSpec, out) -> CommandResult:
    """2D run: field dump and Schlieren image per variant."""
    from .plotting import plot_density_2d

    _check_command("run2d", spec)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    problem = spec.load_problem()
    result = CommandResult(EXIT_OK)
    for kind in spec.variants:
        for r in spec.r:
            for N in spec.grids:
                cfg = spec.solver_config(problem, kind, r, N)
                U0 = problem.initial(cfg.grids)
                try:
                    res = run(cfg, U0)
                except Exception as e:
                    raise RuntimeError(f"{problem.name} {kind} r={r} N={_label(N)}: {e}") from e
                stem = out / f"{spec.experiment}_{kind}_r{r}_N{_label(N)}"
                gx, gy = cfg.grids
                dump = fio.write_field(stem.with_suffix(".dat"), res.U, (gx.h, gy.h), res.t,
                                       cfg.model.gamma, cfg.model.name)
                img = fio.schlieren(res.U[0], gx.h, gy.h)
                pgm = fio.write_pgm(stem.with_suffix(".pgm"), img)
                png = plot_density_2d(res.U[0], cfg.grids, stem.with_suffix(".png"),
                                      f"{problem.name} {kind} order {2 * r - 1}, t={res.t:g}")
                result.outputs += [dump, pgm, png]
                prim = primitive_from_conserved(res.U, cfg.model.gamma)
                info = {"min_rho": float(prim[0].min()), "min_p": float(prim[-1].min()),
                        "kernel_seconds": res.kernel_seconds, "total_seconds": res.total_seconds,
                        "steps": res.steps}
                if problem.exact is not None:
                    info["max_change"] = float(np.max(np.abs(res.U - problem.exact(cfg.grids, res.t))))
                result.data[(kind, r, _label(N))] = (info, res)
    _pairwise_density_differences(result, spec, out)
    return result


def _pairwise_density_differences(result: CommandResult, spec: ExperimentSpec, out: Path):
    """Relative L1 distance of each variant's density to YC's, when both ran."""
    rows = []
    for (kind, r, N), (info, res) in result.data.items():
        base = result.data.get(("yc", r, N))
        row = [kind, r, N, info["min_rho"], info["min_p"], info["kernel_seconds"], info["total_seconds"]]
        rel = ""
        if base is not None:
            ref_rho = base[1].U[0]
            rel = float(np.sum(np.abs(res.U[0] - ref_rho)) / np.sum(np.abs(ref_rho)))
            info["rel_l1_vs_yc"] = rel
        rows.append(row + [rel])
    path = fio.write_csv(out / f"{spec.experiment}_summary.csv",
                         ["variant", "r", "N", "min_rho", "min_p", "kernel_seconds", "total_seconds",
                          "rel_l1_rho_vs_yc"], rows)
    result.outputs.append(path)


# ------------------------------------------------------------- benchmarks

def op_count_report(r_values=range(R_MIN, R_MAX + 1), s2_values=(1, 2)) -> list[dict]:
    """Instrumented pipeline totals next to the closed forms, per variant, r and s2."""
    rows = []
    for r in r_values:
        table = generate_table(r, DiscretizationMode.CELL_AVERAGE)
        for kind in KINDS:
            for s2 in (s2_values if kind != "js" else (1,)):
                v = WenoVariant(kind, s2=s2).for_order(r)
                got = instrumented_costs(table, v)["total"]
                want = closed_form(v, r)
                rows.append({"variant": kind, "r": r, "s": v.s, "s1": v.s1, "s2": v.s2,
                             "adds": got.additions, "mults": got.multiplications, "divs": got.divisions,
                             "total": got.total, "formula_total": want.total,
                             "match": got.as_tuple() == want.as_tuple()})
    return rows


def _time_kernel(fn, *args, min_seconds: float = 0.2) -> float:
    """Best seconds per call; repeats grow until one batch exceeds ``min_seconds``."""
    fn(*args)
    reps = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(reps):
            fn(*args)
        elapsed = time.perf_counter() - t0
        if elapsed >= min_seconds:
            break
        reps *= 2 if elapsed == 0 else max(2, int(min_seconds / elapsed) + 1)
    best = elapsed / reps
    for _ in range(2):
        t0 = time.perf_counter()
        for _ in range(reps):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / reps)
    return best


def time_indicators(r: int, windows: int = 1_000_000, seed: int = 0, min_seconds: float = 0.2) -> dict:
    """Seconds per window for the fast and the Jiang-Shu indicators, and full reconstructions."""
    from . import _jit
    from .models import table_args, variant_args

    table = generate_table(r, DiscretizationMode.CELL_AVERAGE)
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((windows, 2 * r - 1))
    out = np.empty((windows, r))
    fast = _time_kernel(_jit.batch_fast_indicators, W, out, min_seconds=min_seconds)
    js = _time_kernel(_jit.batch_js_indicators, W, table.js_perm, table.js_beta, table.js_gamma, out,
                      min_seconds=min_seconds)
    res = {"r": r, "windows": windows, "fast_indicators": fast / windows, "js_indicators": js / windows}
    # YC weights use the Jiang-Shu indicators, so the indicator-only ratio is the same
    res["ratio_js"] = js / fast
    res["ratio_yc"] = js / fast
    # full reconstructions through the solver's batched kernel
    tab = table_args(table)
    WT = np.ascontiguousarray(W.T).ravel()
    S = np.empty((_jit.scratch_rows(r), windows))
    q = np.empty(windows)
    for kind in KINDS:
        vp = variant_args(WenoVariant(kind), r)
        sec = _time_kernel(_jit.weno_batch, WT, 0, windows, windows, r, tab, vp, q, S, min_seconds=min_seconds)
        res[f"reconstruct_{kind}"] = sec / windows
    res["reconstruct_ratio_js"] = res["reconstruct_js"] / res["reconstruct_fweno"]
    res["reconstruct_ratio_yc"] = res["reconstruct_yc"] / res["reconstruct_fweno"]
    return res


def cmd_bench(spec: ExperimentSpec, out) -> CommandResult:
    """Efficiency table, op-count check and indicator timings."""
    _check_command("bench", spec)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    result = CommandResult(EXIT_OK)

    ops = op_count_report()
    keys = list(ops[0])
    result.outputs.append(fio.write_csv(out / "bench-kernels_opcounts.csv", keys, [[o[k] for k in keys] for o in ops]))
    result.data["opcounts"] = ops
    bad = [o for o in ops if not o["match"]]
    if bad:
        result.status = EXIT_THRESHOLD
        for o in bad:
            result.messages.append(f"op count mismatch {o['variant']} r={o['r']} s2={o['s2']}: "
                                   f"{o['total']} vs {o['formula_total']}")

    timings = [time_indicators(r, spec.windows, spec.seed) for r in spec.r]
    tkeys = list(timings[0])
    result.outputs.append(fio.write_csv(out / "bench-kernels_indicators.csv", tkeys,
                                        [[t[k] for k in tkeys] for t in timings]))
    result.data["indicators"] = timings

    problem = spec.load_problem()
    eff = []
    for r in spec.r:
        ref = reference_solution(spec, problem, r, _cache_dir(out))
        for kind in spec.variants:
            for N in spec.grids:
                cfg = spec.solver_config(problem, kind, r, N)
                res = run(cfg, problem.initial(cfg.grids))
                l1 = math.nan
                if ref is not None:
                    coarse = restrict(ref[1], ref[0], cfg.grids)
                    l1 = error_norms(res.U[0], coarse[0], cfg.grids)["l1"]
                elif problem.exact is not None:
                    l1 = error_norms(res.U[0], problem.exact(cfg.grids, res.t)[0], cfg.grids)["l1"]
                eff.append([kind, r, _label(N), l1, res.kernel_seconds, res.total_seconds])
    path = fio.write_csv(out / "bench-kernels_efficiency.csv",
                         ["variant", "r", "N", "L1", "kernel_seconds", "total_seconds"], eff)
    result.outputs.append(path)
    result.data["efficiency"] = eff
    from .plotting import plot_efficiency

    result.outputs.append(plot_efficiency(eff, out / "bench-kernels_efficiency.png", problem.name))
    return result


COMMANDS = {"convergence": cmd_convergence, "shock": cmd_shock, "run2d": cmd_2d, "bench": cmd_bench}


def with_overrides(spec: ExperimentSpec, **changes) -> ExperimentSpec:
    return dataclasses.replace(spec, **changes)
