"""Declarative scenario configs and their execution engine.

A scenario file is a YAML tree: a kind, a parameter block, optional sweep
axes, a seed, and output settings.  Execution is deterministic: per-cell
seeds derive from the root seed and the cell index, sweep cells may run
in a worker pool, and result files are byte-stable apart from a single
timing field.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np
import yaml

from . import protocols
from .constants import EPR_BOUND
from .gaussian import GaussianError, check_physical, epr_variance, vacuum
from .interactions import InteractionParams, kappa_effective, nonqnd_two_cell, qnd_two_cell
from .levels import cesium_d2_tables, z_from_scheme
from .lindblad import (
    NoUniqueSteadyState,
    add_noise_channel,
    build_ideal_model,
    entanglement_report,
    evolve,
    is_unique,
    steady_state,
)

SCENARIO_KINDS = (
    "z_parameter",
    "dissipative_steady_state",
    "dissipative_timecourse",
    "memory",
    "magnetometry",
    "squeezing_scan",
    "hybrid_optomech",
)


class ConfigError(ValueError):
    """Scenario file fails schema or physics validation."""


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    name: str
    params: dict
    sweep: tuple[SweepAxis, ...] = ()
    seed: int | None = None
    output_format: str = "json"

    @property
    def stochastic(self) -> bool:
        return self.kind in ("memory",) and bool(self.params.get("sample", False))


@dataclass(frozen=True)
class ResultRecord:
    scenario: str
    kind: str
    point: dict
    outputs: dict
    diagnostics: dict
    seed: int | None
    wall_time_s: float


def load_config(path: str | Path) -> ScenarioConfig:
    raw = yaml.safe_load(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ConfigError("scenario file must be a mapping")
    return config_from_dict(raw, default_name=Path(path).stem)


def config_from_dict(raw: dict, default_name: str = "scenario") -> ScenarioConfig:
    kind = raw.get("kind")
    if kind not in SCENARIO_KINDS:
        raise ConfigError(f"kind: unknown scenario kind {kind!r}; options {SCENARIO_KINDS}")
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params: must be a mapping")
    axes = []
    for ax in raw.get("sweep", []) or []:
        if not isinstance(ax, dict) or "name" not in ax or "values" not in ax:
            raise ConfigError("sweep: each axis needs 'name' and 'values'")
        axes.append(SweepAxis(str(ax["name"]), tuple(float(v) for v in ax["values"])))
    seed = raw.get("seed")
    fmt = raw.get("format", raw.get("output_format", "json"))
    if fmt not in ("json", "csv"):
        raise ConfigError(f"format: must be json or csv, got {fmt!r}")
    cfg = ScenarioConfig(
        kind=kind,
        name=str(raw.get("name", default_name)),
        params=params,
        sweep=tuple(axes),
        seed=None if seed is None else int(seed),
        output_format=fmt,
    )
    return cfg


# ---------------------------------------------------------------------------
# validation

_NUMERIC_PRECONDITIONS = {
    # field: (min, max, strict_min, strict_max)
    "Z": (0.0, None, True, False),
    "gamma_s": (0.0, None, False, False),
    "T": (0.0, None, True, False),
    "d": (0.0, None, True, False),
    "Gamma": (0.0, None, True, False),
    "eta": (0.0, 1.0, False, True),
    "N_A": (0.0, None, True, False),
    "tau": (0.0, None, True, False),
    "T2": (0.0, None, True, False),
    "n_bar": (0.0, None, False, False),
    "kappa": (0.0, None, False, False),
    "gain": (0.0, None, False, False),
    "detuning_mhz": (None, None, False, False),
    "classical_benchmark": (0.0, 1.0, False, False),
}


def validate_config(cfg: ScenarioConfig) -> list[str]:
    """Schema plus physics preconditions; returns a list of violations
    (empty means valid), each naming the offending field path."""
    problems = []
    known = set(cfg.params)
    for ax in cfg.sweep:
        if ax.name not in known:
            problems.append(f"sweep.{ax.name}: unknown sweep axis (not in params)")
        if not ax.values:
            problems.append(f"sweep.{ax.name}: empty value list")
    for key, val in cfg.params.items():
        if key not in _NUMERIC_PRECONDITIONS:
            continue
        lo, hi, strict_lo, strict_hi = _NUMERIC_PRECONDITIONS[key]
        vals = [val] if not isinstance(val, (list, tuple)) else val
        for ax in cfg.sweep:
            if ax.name == key:
                vals = list(vals) + list(ax.values)
        for v in vals:
            if not isinstance(v, (int, float)):
                problems.append(f"params.{key}: not numeric ({v!r})")
                continue
            if lo is not None and (v <= lo if strict_lo else v < lo):
                op = "<=" if strict_lo else "<"
                problems.append(f"params.{key}: value {v} {op} {lo}")
            if hi is not None and (v >= hi if strict_hi else v > hi):
                op = ">=" if strict_hi else ">"
                problems.append(f"params.{key}: value {v} violates bound {hi}")
    if cfg.stochastic and cfg.seed is None:
        problems.append("seed: mandatory for stochastic scenarios")
    return problems


# ---------------------------------------------------------------------------
# per-kind runners (pure functions of a parameter point + seed)


def _run_z_parameter(p: dict, seed: int | None) -> tuple[dict, dict]:
    scheme = cesium_d2_tables(
        detuning_mhz=float(p.get("detuning_mhz", 850.0)),
        drive_polarization=p.get("drive_polarization", "y"),
    )
    res = z_from_scheme(scheme)
    out = {
        "Z": res.Z,
        "r": res.r,
        "mu": res.mu,
        "nu": res.nu,
        "active_dominated": int(res.active_dominated),
        "degenerate": int(res.degenerate),
    }
    return out, {"n_paths": len(scheme.dipole_paths)}


def _ideal_model_from(p: dict):
    Z = float(p.get("Z", 2.5))
    mu, nu = 0.5 * (Z + 1 / Z), 0.5 * (Z - 1 / Z)
    return build_ideal_model(mu, nu, float(p.get("d", 30.0)), float(p.get("Gamma", 1.0)))


def _apply_noise_block(model, p: dict):
    for ch in p.get("noise", []) or []:
        model = add_noise_channel(
            model,
            ch["kind"],
            float(ch["rate"]),
            n_thermal=float(ch.get("n_thermal", 0.0)),
        )
    return model


def _run_dissipative_steady_state(p: dict, seed: int | None) -> tuple[dict, dict]:
    model = _apply_noise_block(_ideal_model_from(p), p)
    unique, ev = is_unique(model)
    out = {"unique": int(unique)}
    diag = {"drift_eig_real": sorted(float(x) for x in ev.real)}
    if unique:
        ss = steady_state(model)
        rep = entanglement_report(ss, (model.modes[0], model.modes[1]))
        out["epr_variance"] = rep.epr_variance
        out["entangled"] = int(rep.entangled)
        Z = float(p.get("Z", 2.5))
        out["epr_closed_form"] = 1.0 / Z**2
        phys = check_physical(ss)
        diag["min_symplectic_margin"] = phys.min_eigenvalue_margin
        if not phys.physical:
            raise GaussianError("steady state failed physicality check")
    return out, diag


def _run_dissipative_timecourse(p: dict, seed: int | None) -> tuple[dict, dict]:
    model = _apply_noise_block(_ideal_model_from(p), p)
    gamma_s = model.gamma_s
    times = [float(t) for t in p.get("times", [0.1, 0.3, 1.0, 3.0, 10.0])]
    decay_rate = 0.0
    for ch in p.get("noise", []) or []:
        if ch["kind"] == "single_atom_decay":
            decay_rate += float(ch["rate"])
    state = vacuum(model.modes)
    rows = []
    flip_time = None
    for t in times:
        st = evolve(model, state, t / gamma_s)
        threshold = EPR_BOUND * math.exp(-decay_rate * t / gamma_s)
        rep = entanglement_report(st, (model.modes[0], model.modes[1]), threshold)
        rows.append(
            {
                "t_gamma": t,
                "epr_variance": rep.epr_variance,
                "threshold": rep.threshold,
                "entangled": int(rep.entangled),
            }
        )
        if flip_time is None and rows and len(rows) > 1:
            if rows[-2]["entangled"] and not rows[-1]["entangled"]:
                flip_time = t
    out = {
        "final_epr": rows[-1]["epr_variance"],
        "ever_entangled": int(any(r["entangled"] for r in rows)),
        "entangled_at_end": int(rows[-1]["entangled"]),
        "flip_time_gamma": float("nan") if flip_time is None else flip_time,
    }
    return out, {"trace": rows}


def _run_memory(p: dict, seed: int | None) -> tuple[dict, dict]:
    cfg = protocols.MemoryConfig(
        Z=float(p.get("Z", 2.5)),
        gamma_s=float(p.get("gamma_s", 1.0)),
        T=float(p.get("T", _memory_T_for_kappa(p))),
        gain=float(p.get("gain", 1.0)),
        pre_probe_kappa=float(p.get("pre_probe_kappa", 0.0)),
        classical_benchmark=float(p.get("classical_benchmark", 0.0)),
        displacement_range=float(p.get("displacement_range", 3.8)),
        squeezing_db=float(p.get("squeezing_db", 6.0)),
        grid=tuple(p.get("grid", (5, 5))),
    )
    rep = protocols.memory_fidelity_report(cfg)
    closed = protocols.memory_closed_form_moments(cfg)
    out = {
        "mean_fidelity": rep.mean_fidelity,
        "min_fidelity": rep.min_fidelity,
        "beats_benchmark": int(rep.beats_benchmark),
        "var_x_fin": float(closed[0, 0]),
        "var_p_fin": float(closed[1, 1]),
        "kappa": cfg.params.kappa,
    }
    return out, {"n_inputs": rep.n_inputs, "benchmark": rep.benchmark}


def _memory_T_for_kappa(p: dict) -> float:
    """Default T giving kappa = 1 for the configured Z, gamma_s."""
    Z = float(p.get("Z", 2.5))
    gs = float(p.get("gamma_s", 1.0))
    kappa = float(p.get("kappa", 1.0))
    if kappa >= Z:
        raise ConfigError(f"params.kappa: requested kappa {kappa} >= Z {Z} is unreachable")
    return -math.log1p(-(kappa / Z) ** 2) / (2.0 * gs)


def _run_magnetometry(p: dict, seed: int | None) -> tuple[dict, dict]:
    cfg = protocols.MagnetometryConfig(
        N_A=float(p.get("N_A", 1.5e12)),
        B_rf=float(p.get("B_rf", 3.6e-14)),
        tau=float(p.get("tau", 0.022)),
        T2=float(p.get("T2", 0.030)),
        probe_kappa=float(p.get("kappa", 1.0)),
        technical_noise_var=float(p.get("technical_noise_var", 0.0)),
    )
    res = protocols.magnetometry_run(cfg)
    out = {
        "mean_displacement": res.mean_displacement,
        "pn_variance": res.pn_variance,
        "shot_variance": res.shot_variance,
        "snr": res.snr,
        "sensitivity_T_per_rtHz": res.sensitivity,
    }
    diag = {}
    if p.get("entanglement_assisted", False):
        taus = [float(t) for t in p.get("assist_taus", [0.001, 0.003, 0.01, 0.022, 0.05])]
        rows = protocols.entanglement_assisted_snr(
            cfg,
            float(p.get("pre_probe_kappa", 1.0)),
            taus,
            squeezing_decay_rate=float(p.get("squeezing_decay_rate", 50.0)),
        )
        diag["assisted"] = rows
        out["assisted_short_tau_ratio"] = rows[0]["ratio"]
        out["assisted_long_tau_ratio"] = rows[-1]["ratio"]
    return out, diag


def _run_squeezing_scan(p: dict, seed: int | None) -> tuple[dict, dict]:
    if "d" in p and "eta" in p:
        budget = protocols.SqueezingBudget(
            d=float(p["d"]), eta=float(p["eta"]), a=float(p.get("a", 0.0)),
            N_A=float(p.get("N_A", 1e6)),
        )
        xi = protocols.spin_squeezing_xi(budget)
        eta_star, xi_min = protocols.optimize_eta(budget)
        return {"xi": xi, "eta_star": eta_star, "xi_min": xi_min}, {}
    n_lo = float(p.get("N_min", 1e3))
    n_hi = float(p.get("N_max", 1e7))
    n_pts = int(p.get("N_points", 9))
    depth_per_atom = float(p.get("depth_per_atom", 1e-4))
    Ns = np.logspace(math.log10(n_lo), math.log10(n_hi), n_pts)
    scan = protocols.heisenberg_scan(lambda N: depth_per_atom * N, Ns, a=float(p.get("a", 0.0)))
    out = {
        "precision_slope": scan["precision_slope"],
        "xi_slope": scan["xi_slope"],
        "css_precision_slope": scan["css_precision_slope"],
        "xi_times_N_first": scan["rows"][0]["xi_times_N"],
        "xi_times_N_last": scan["rows"][-1]["xi_times_N"],
    }
    return out, {"rows": scan["rows"]}


def _run_hybrid_optomech(p: dict, seed: int | None) -> tuple[dict, dict]:
    if "n_bar" in p:
        n_bar = float(p["n_bar"])
        params = None
    else:
        params = protocols.desk_preset()
        n_bar = params.n_bar
    kappa = float(p.get("kappa", 1.0))
    res = protocols.hybrid_epr_protocol(n_bar, kappa)
    out = {
        "n_bar": n_bar,
        "kappa": kappa,
        "epr_closed_form": res.closed_form,
        "epr_pipeline": res.pipeline,
        "epr_pipeline_joint": res.pipeline_joint,
        "entangled": int(res.entangled),
    }
    diag = {}
    if params is not None:
        diag["kappa_om_preset"] = protocols.optomech_kappa(params)
        diag["x_zpf"] = params.x_zpf
    return out, diag


_RUNNERS = {
    "z_parameter": _run_z_parameter,
    "dissipative_steady_state": _run_dissipative_steady_state,
    "dissipative_timecourse": _run_dissipative_timecourse,
    "memory": _run_memory,
    "magnetometry": _run_magnetometry,
    "squeezing_scan": _run_squeezing_scan,
    "hybrid_optomech": _run_hybrid_optomech,
}


# ---------------------------------------------------------------------------
# sweep engine


def _cells(cfg: ScenarioConfig) -> list[dict]:
    if not cfg.sweep:
        return [dict(cfg.params)]
    names = [ax.name for ax in cfg.sweep]
    out = []
    for combo in product(*(ax.values for ax in cfg.sweep)):
        p = dict(cfg.params)
        p.update(dict(zip(names, combo)))
        out.append(p)
    return out


def _cell_seed(root: int | None, index: int) -> int | None:
    if root is None:
        return None
    return int(np.random.SeedSequence((root, index)).generate_state(1)[0])


def _run_cell(args) -> ResultRecord:
    cfg_kind, cfg_name, point, seed, axis_names = args
    t0 = time.perf_counter()
    outputs, diagnostics = _RUNNERS[cfg_kind](point, seed)
    wall = time.perf_counter() - t0
    shown = {k: point[k] for k in axis_names} if axis_names else {}
    return ResultRecord(
        scenario=cfg_name,
        kind=cfg_kind,
        point=shown,
        outputs=outputs,
        diagnostics=diagnostics,
        seed=seed,
        wall_time_s=wall,
    )


def execute(cfg: ScenarioConfig, jobs: int = 1) -> list[ResultRecord]:
    """Run all sweep cells; results come back in deterministic cell order."""
    problems = validate_config(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    cells = _cells(cfg)
    axis_names = [ax.name for ax in cfg.sweep]
    tasks = [
        (cfg.kind, cfg.name, point, _cell_seed(cfg.seed, i), axis_names)
        for i, point in enumerate(cells)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_cell, tasks))
    return [_run_cell(t) for t in tasks]


# ---------------------------------------------------------------------------
# writers


def _round_floats(obj, ndigits=12):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        return float(f"{obj:.{ndigits}g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v, ndigits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, ndigits) for v in obj]
    return obj


def records_to_json(records: list[ResultRecord], include_timing: bool = True) -> str:
    body = {
        "scenario": records[0].scenario if records else "",
        "kind": records[0].kind if records else "",
        "results": [
            {
                "point": _round_floats(r.point),
                "outputs": _round_floats(r.outputs),
                "diagnostics": _round_floats(r.diagnostics),
                "seed": r.seed,
            }
            for r in records
        ],
    }
    if include_timing:
        body["timing"] = {"total_wall_time_s": sum(r.wall_time_s for r in records)}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def records_to_csv(records: list[ResultRecord]) -> str:
    if not records:
        return ""
    point_keys = sorted({k for r in records for k in r.point})
    out_keys = sorted({k for r in records for k in r.outputs})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario", "seed", *point_keys, *out_keys])
    for r in records:
        row = [r.scenario, "" if r.seed is None else r.seed]
        row += [_csv_num(r.point.get(k)) for k in point_keys]
        row += [_csv_num(r.outputs.get(k)) for k in out_keys]
        w.writerow(row)
    return buf.getvalue()


def _csv_num(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return v


def write_results(records: list[ResultRecord], out_dir: str | Path, fmt: str) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = records[0].scenario if records else "results"
    path = out_dir / f"{name}.{fmt}"
    if fmt == "csv":
        path.write_text(records_to_csv(records))
    else:
        path.write_text(records_to_json(records))
    return path
