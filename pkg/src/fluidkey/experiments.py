"""Reproducible experiment runner and its flat key-value config format.

Configs are plain text, one `section.key = value` per line, `#` comments;
unknown keys are rejected so typos fail fast.  Every output file embeds the
fully resolved config and the seed, and all summary statistics are
recomputable from the emitted per-seed traces.  Floats are printed with nine
significant digits so reruns with the same seeds produce byte-identical
files (timing columns aside).
"""

from __future__ import annotations

import dataclasses
import json
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .ao import AO_PSO_DEFAULTS, AoResult, PgdConfig, run_ao
from .baselines import run_random_baseline, run_upa_baseline, upa_layout
from .constraints import PenaltyConfig
from .pso import OptTrace, PsoConfig, run_pso
from .rng import stream
from .scenario import PathSet, Region, Scenario, sample_paths

__all__ = [
    "ExperimentConfig",
    "default_config",
    "parse_config",
    "load_config",
    "cmd_compare",
    "cmd_layout",
    "cmd_sweep",
]

METHODS = ("joint_pso", "ao", "upa", "random")
TIMING_COLUMNS = ("elapsed_ms", "wall_ms_median")


@dataclass
class ExperimentConfig:
    scenario: Scenario = field(default_factory=Scenario)
    total_power: float = 1.0
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    methods: tuple[str, ...] = METHODS
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    sweep: tuple[int, ...] = (4, 6, 8, 10)
    covariance: str = "analytic"
    out_dir: str = "results"
    pso: PsoConfig = field(default_factory=PsoConfig)
    ao_pso: PsoConfig = field(default_factory=lambda: AO_PSO_DEFAULTS)
    ao_rounds: int = 1
    pgd: PgdConfig = field(default_factory=PgdConfig)
    random_trials: int = 0  # 0 means: match the joint swarm's evaluation budget

    def __post_init__(self):
        if not self.methods:
            raise ValueError("method set must be non-empty")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method '{m}' (choose from {METHODS})")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if any(l < 1 for l in self.sweep):
            raise ValueError("sweep path counts must be >= 1")
        if self.covariance not in ("analytic", "monte_carlo"):
            raise ValueError("covariance must be 'analytic' or 'monte_carlo'")

    @property
    def n_random_trials(self) -> int:
        if self.random_trials > 0:
            return self.random_trials
        return self.pso.n_particles * self.pso.max_iters

    def echo(self) -> dict[str, str]:
        """Fully resolved flat key-value view, embedded in every output file."""
        s, r = self.scenario, self.scenario.region
        items = {
            "scenario.n_antennas": s.n_antennas,
            "scenario.n_pilots": s.n_pilots,
            "scenario.n_paths": s.n_paths,
            "scenario.wavelength": s.wavelength,
            "scenario.p_max": s.p_max,
            "scenario.noise_var": s.noise_var,
            "scenario.d_min": s.d_min,
            "scenario.region": f"{r.x_lo}, {r.x_hi}, {r.y_lo}, {r.y_hi}",
            "scenario.mc_samples": s.mc_samples,
            "scenario.seed": s.seed,
            "paths.total_power": self.total_power,
            "penalty.coefficient": self.penalty.coefficient,
            "experiment.methods": ", ".join(self.methods),
            "experiment.seeds": ", ".join(str(x) for x in self.seeds),
            "experiment.sweep": ", ".join(str(x) for x in self.sweep),
            "experiment.covariance": self.covariance,
            "experiment.out_dir": self.out_dir,
            "pso.n_particles": self.pso.n_particles,
            "pso.max_iters": self.pso.max_iters,
            "pso.c1": self.pso.c1,
            "pso.c2": self.pso.c2,
            "pso.w_max": self.pso.w_max,
            "pso.w_min": self.pso.w_min,
            "pso.v_max": "none" if self.pso.v_max is None else self.pso.v_max,
            "ao.pso_particles": self.ao_pso.n_particles,
            "ao.pso_iters": self.ao_pso.max_iters,
            "ao.n_rounds": self.ao_rounds,
            "pgd.max_steps": self.pgd.max_steps,
            "pgd.step_size": self.pgd.step_size,
            "pgd.backtrack_factor": self.pgd.backtrack_factor,
            "pgd.max_halvings": self.pgd.max_halvings,
            "pgd.grad_tol": self.pgd.grad_tol,
            "random.n_trials": self.n_random_trials,
        }
        return {k: str(v) for k, v in items.items()}


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


def _parse_value(key: str, raw: str, kind: str):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "str":
            return raw
        if kind == "int_list":
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if kind == "str_list":
            return tuple(x.strip() for x in raw.split(",") if x.strip())
        if kind == "float4":
            vals = [float(x) for x in raw.split(",")]
            if len(vals) != 4:
                raise ValueError
            return tuple(vals)
        if kind == "opt_float":
            return None if raw.lower() in ("none", "") else float(raw)
    except ValueError:
        raise ValueError(f"config key '{key}': cannot parse value '{raw}' as {kind}") from None
    raise AssertionError(kind)


_KEY_KINDS = {
    "scenario.n_antennas": "int",
    "scenario.n_pilots": "int",
    "scenario.n_paths": "int",
    "scenario.wavelength": "float",
    "scenario.p_max": "float",
    "scenario.noise_var": "float",
    "scenario.d_min": "float",
    "scenario.region": "float4",
    "scenario.mc_samples": "int",
    "scenario.seed": "int",
    "paths.total_power": "float",
    "penalty.coefficient": "float",
    "experiment.methods": "str_list",
    "experiment.seeds": "int_list",
    "experiment.sweep": "int_list",
    "experiment.covariance": "str",
    "experiment.out_dir": "str",
    "pso.n_particles": "int",
    "pso.max_iters": "int",
    "pso.c1": "float",
    "pso.c2": "float",
    "pso.w_max": "float",
    "pso.w_min": "float",
    "pso.v_max": "opt_float",
    "ao.pso_particles": "int",
    "ao.pso_iters": "int",
    "ao.n_rounds": "int",
    "pgd.max_steps": "int",
    "pgd.step_size": "float",
    "pgd.backtrack_factor": "float",
    "pgd.max_halvings": "int",
    "pgd.grad_tol": "float",
    "random.n_trials": "int",
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat dotted-key format; unknown keys are errors."""
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got '{line}'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _KEY_KINDS:
            raise ValueError(f"config line {lineno}: unknown key '{key}'")
        values[key] = _parse_value(key, raw, _KEY_KINDS[key])

    def take(key, fallback):
        return values.get(key, fallback)

    base = default_config()
    region = base.scenario.region
    if "scenario.region" in values:
        region = Region(*values["scenario.region"])
    scenario = Scenario(
        n_antennas=take("scenario.n_antennas", base.scenario.n_antennas),
        n_pilots=take("scenario.n_pilots", base.scenario.n_pilots),
        n_paths=take("scenario.n_paths", base.scenario.n_paths),
        wavelength=take("scenario.wavelength", base.scenario.wavelength),
        p_max=take("scenario.p_max", base.scenario.p_max),
        noise_var=take("scenario.noise_var", base.scenario.noise_var),
        d_min=take("scenario.d_min", base.scenario.d_min),
        region=region,
        mc_samples=take("scenario.mc_samples", base.scenario.mc_samples),
        seed=take("scenario.seed", base.scenario.seed),
    )
    pso = PsoConfig(
        n_particles=take("pso.n_particles", base.pso.n_particles),
        max_iters=take("pso.max_iters", base.pso.max_iters),
        c1=take("pso.c1", base.pso.c1),
        c2=take("pso.c2", base.pso.c2),
        w_max=take("pso.w_max", base.pso.w_max),
        w_min=take("pso.w_min", base.pso.w_min),
        v_max=take("pso.v_max", base.pso.v_max),
    )
    ao_pso = PsoConfig(
        n_particles=take("ao.pso_particles", base.ao_pso.n_particles),
        max_iters=take("ao.pso_iters", base.ao_pso.max_iters),
        c1=pso.c1,
        c2=pso.c2,
        w_max=pso.w_max,
        w_min=pso.w_min,
        v_max=pso.v_max,
    )
    pgd = PgdConfig(
        max_steps=take("pgd.max_steps", base.pgd.max_steps),
        step_size=take("pgd.step_size", base.pgd.step_size),
        backtrack_factor=take("pgd.backtrack_factor", base.pgd.backtrack_factor),
        max_halvings=take("pgd.max_halvings", base.pgd.max_halvings),
        grad_tol=take("pgd.grad_tol", base.pgd.grad_tol),
    )
    return ExperimentConfig(
        scenario=scenario,
        total_power=take("paths.total_power", base.total_power),
        penalty=PenaltyConfig(
            coefficient=take("penalty.coefficient", base.penalty.coefficient),
            d_min=scenario.d_min,
        ),
        methods=take("experiment.methods", base.methods),
        seeds=take("experiment.seeds", base.seeds),
        sweep=take("experiment.sweep", base.sweep),
        covariance=take("experiment.covariance", base.covariance),
        out_dir=take("experiment.out_dir", base.out_dir),
        pso=pso,
        ao_pso=ao_pso,
        ao_rounds=take("ao.n_rounds", base.ao_rounds),
        pgd=pgd,
        random_trials=take("random.n_trials", base.random_trials),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


# ---------------------------------------------------------------------------
# output formatting
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


def _write_csv(path: Path, header: list[str], rows: list[list], echo: dict[str, str]):
    lines = [f"# {k} = {v}" for k, v in echo.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _trace_rows(trace: OptTrace, with_sample: bool) -> list[list]:
    rows = []
    for rec in trace.records:
        row = [rec.iteration, rec.best_fitness, rec.best_kgr, rec.penalty, rec.elapsed_ms]
        if with_sample:
            row.append(rec.sample_kgr if rec.sample_kgr is not None else float("nan"))
        rows.append(row)
    return rows


def write_trace_csv(path: Path, trace: OptTrace, echo: dict[str, str], seed: int, method: str):
    header = ["iteration", "best_fitness", "best_kgr", "penalty", "elapsed_ms"]
    with_sample = any(rec.sample_kgr is not None for rec in trace.records)
    if with_sample:
        header.append("sample_kgr")
    run_echo = dict(echo)
    run_echo["run.method"] = method
    run_echo["run.seed"] = str(seed)
    _write_csv(path, header, _trace_rows(trace, with_sample), run_echo)


def _summary_json(trace: OptTrace, paths: PathSet, echo, seed, method, converged):
    return {
        "method": method,
        "seed": seed,
        "converged_kgr": converged,
        "config": echo,
        "paths": json.loads(paths.to_json()),
        "best_precoder_re": np.asarray(trace.best_precoder).real.tolist(),
        "best_precoder_im": np.asarray(trace.best_precoder).imag.tolist(),
        "best_layout": np.asarray(trace.best_layout).tolist(),
    }


# ---------------------------------------------------------------------------
# single runs
# ---------------------------------------------------------------------------


def run_method(cfg: ExperimentConfig, method: str, seed: int):
    """One (method, seed) run.  Returns (trace, converged_kgr, paths, ao_result)."""
    scen = replace(cfg.scenario, seed=seed)
    paths = sample_paths(scen, stream(seed, "paths"), total_power=cfg.total_power)
    pen = dataclasses.replace(cfg.penalty, d_min=scen.d_min)
    if method == "joint_pso":
        trace = run_pso(
            scen, paths, cfg.pso, stream(seed, "pso"), penalty=pen, cov_mode=cfg.covariance
        )
        return trace, trace.best_kgr, paths, None
    if method == "upa":
        trace = run_upa_baseline(
            scen, paths, cfg.pso, stream(seed, "upa"), penalty=pen, cov_mode=cfg.covariance
        )
        return trace, trace.best_kgr, paths, None
    if method == "random":
        trace = run_random_baseline(
            scen, paths, cfg.n_random_trials, stream(seed, "random"), cov_mode=cfg.covariance
        )
        return trace, trace.best_kgr, paths, None
    if method == "ao":
        result = run_ao(
            scen,
            paths,
            cfg.pgd,
            cfg.ao_pso,
            stream(seed, "ao"),
            n_rounds=cfg.ao_rounds,
            penalty=pen,
            cov_mode=cfg.covariance,
        )
        return result.pso_trace, result.best_kgr, paths, result
    raise ValueError(f"unknown method '{method}'")


def _write_ao_phases_csv(path: Path, result: AoResult, echo: dict[str, str], seed: int):
    header = ["phase", "iteration", "objective"]
    rows: list[list] = []
    for rnd, (ptrace, strace) in enumerate(zip(result.pgd_traces, result.pso_traces), start=1):
        for i, loss in enumerate(ptrace.losses):
            rows.append([f"pgd_{rnd}", i, loss])
        for rec in strace.records:
            rows.append([f"pso_{rnd}", rec.iteration, rec.best_fitness])
    run_echo = dict(echo)
    run_echo["run.method"] = "ao"
    run_echo["run.seed"] = str(seed)
    lines = [f"# {k} = {v}" for k, v in run_echo.items()]
    lines.append(",".join(header))
    for phase, it, obj in rows:
        lines.append(f"{phase},{it},{_fmt(obj)}")
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_compare(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> dict:
    """Run every configured method over every seed and summarize convergence."""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    echo = cfg.echo()
    converged: dict[str, list[float]] = {m: [] for m in cfg.methods}
    wall: dict[str, list[float]] = {m: [] for m in cfg.methods}
    files = []
    for method in cfg.methods:
        for seed in cfg.seeds:
            trace, kgr_value, paths, ao_result = run_method(cfg, method, seed)
            converged[method].append(float(kgr_value))
            wall[method].append(
                ao_result.elapsed_ms if ao_result is not None else trace.elapsed_ms
            )
            csv_path = out / f"compare_{method}_seed{seed}.csv"
            write_trace_csv(csv_path, trace, echo, seed, method)
            files.append(csv_path)
            json_path = out / f"compare_{method}_seed{seed}.json"
            json_path.write_text(
                json.dumps(_summary_json(trace, paths, echo, seed, method, float(kgr_value)), indent=1)
            )
            files.append(json_path)
            if ao_result is not None:
                phases_path = out / f"ao_phases_seed{seed}.csv"
                _write_ao_phases_csv(phases_path, ao_result, echo, seed)
                files.append(phases_path)

    upa_median = statistics.median(converged["upa"]) if "upa" in converged else None
    header = ["method", "kgr_median", "kgr_min", "kgr_max", "wall_ms_median", "improvement_over_upa"]
    rows = []
    summary = {}
    for method in cfg.methods:
        vals = converged[method]
        med = statistics.median(vals)
        improvement = (med / upa_median - 1.0) if upa_median else float("nan")
        rows.append([method, med, min(vals), max(vals), statistics.median(wall[method]), improvement])
        summary[method] = {
            "median": med,
            "min": min(vals),
            "max": max(vals),
            "per_seed": vals,
            "improvement_over_upa": improvement,
            "wall_ms_median": statistics.median(wall[method]),
        }
    summary_path = out / "compare_summary.csv"
    _write_csv(summary_path, header, rows, echo)
    files.append(summary_path)
    return {"summary": summary, "files": files}


def cmd_layout(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> dict:
    """Dump the grid layout and each optimizer's final positions for one seed."""
    bad = [m for m in cfg.methods if m not in ("joint_pso", "ao")]
    if bad:
        raise ValueError(f"layout command supports joint_pso and ao only, got {bad}")
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg.seeds[0]
    upa = upa_layout(cfg.scenario)
    payload = {
        "config": cfg.echo(),
        "seed": seed,
        "upa": upa.tolist(),
        "methods": {},
    }
    for method in cfg.methods:
        trace, kgr_value, _, _ = run_method(cfg, method, seed)
        pos = np.asarray(trace.best_layout)
        disp = np.linalg.norm(pos - upa, axis=1)
        payload["methods"][method] = {
            "positions": pos.tolist(),
            "displacements": disp.tolist(),
            "converged_kgr": float(kgr_value),
        }
    path = out / "layout.json"
    path.write_text(json.dumps(payload, indent=1))
    return {"payload": payload, "files": [path]}


def cmd_sweep(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> dict:
    """Joint-swarm convergence for each configured multipath count."""
    if not cfg.sweep:
        raise ValueError("sweep list is empty")
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    echo = cfg.echo()
    files = []
    summary = {}
    rows = []
    for n_paths in cfg.sweep:
        sub = replace(cfg, scenario=replace(cfg.scenario, n_paths=n_paths))
        vals = []
        for seed in sub.seeds:
            trace, kgr_value, _, _ = run_method(sub, "joint_pso", seed)
            vals.append(float(kgr_value))
            csv_path = out / f"sweep_L{n_paths}_seed{seed}.csv"
            run_echo = dict(echo)
            run_echo["scenario.n_paths"] = str(n_paths)
            write_trace_csv(csv_path, trace, run_echo, seed, "joint_pso")
            files.append(csv_path)
        med = statistics.median(vals)
        rows.append([n_paths, med, min(vals), max(vals)])
        summary[n_paths] = {"median": med, "min": min(vals), "max": max(vals), "per_seed": vals}
    summary_path = out / "sweep_summary.csv"
    _write_csv(summary_path, ["n_paths", "kgr_median", "kgr_min", "kgr_max"], rows, echo)
    files.append(summary_path)
    return {"summary": summary, "files": files}
