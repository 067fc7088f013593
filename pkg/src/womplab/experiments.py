"""Experiment drivers behind the command-line interface.

Each driver takes a plain config dict (already merged from defaults, an
optional INI file, and CLI overrides), runs one experiment family, writes
CSV output, and returns the record objects.  Every CSV starts with a
comment line echoing the section config, so any row can be reproduced
from the file alone.
"""

from __future__ import annotations

import configparser
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from copy import deepcopy
from dataclasses import dataclass

import numpy as np

from .classes import ClassSpec, default_truncation_level, sample_class_function
from .discretization import (DiscretizationReport, PointSet, build_sampled,
                             check_usd, draw_points, read_pointset,
                             uniform_grid_points, write_pointset)
from .recovery import (adversary_gap, recover, reconstruct, write_fooling,
                       write_recovery_csv)
from .greedy import DiscreteHilbert, womp, write_trace_csv
from .trig import TrigPolynomial, TrigSystem, lp_norm


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps this to exit code 2."""


DEFAULTS = {
    "common": {
        "seed": 0,
        "out": "womplab-out",
        "threads": 1,
    },
    "find-points": {
        "d": 1,
        "degree": 4,
        "u": 2,
        "m0": 8,
        "m_cap": 4096,
        "mode": "two-sided",
        "grid": False,
        "subset_cap": 2_000_000,
    },
    "check-disc": {
        "d": 1,
        "degree": 4,
        "u": 2,
        "p": 2.0,
        "mode": "two-sided",
        "method": "exhaustive",
        "trials": 500,
        "m": 64,
        "points_file": "",
        "grid": False,
        "subset_cap": 2_000_000,
    },
    "recover": {
        "d": 1,
        "degree": 4,
        "v": 1,
        "p": 2.0,
        "t": 1.0,
        "c_emp": 2.0,
        "m": 64,
        "target": "dense",  # dense | sparse | saturated-spread | single-spike | random-support
        "sparsity": 2,
        "r": 2.0,
        "beta": 1.0,
        "J": -1,  # -1 means the default level for the given v
        "density": 0.5,
        "selection": "argmax",
        "certify": True,
        "points_file": "",
        "oversample": 8,
    },
    "rate-sweep": {
        "d": 1,
        "r": 2.0,
        "beta": 1.0,
        "profile": "saturated-spread",
        "density": 0.5,
        "p_list": "2,4",
        "v_list": "1,2,3,4,6,8",
        "seeds": 20,
        "a": 30.0,
        "schedule": "log4",  # log4 | log3
        "t": 1.0,
        "c_emp": 2.0,
        "certify": False,
        "J": -1,
        "oversample": 8,
    },
    "fooling": {
        "d": 1,
        "box_list": "8,16,32",
        "m_rule": "quarter",  # quarter | explicit
        "m_list": "",
        "seeds": 10,
        "p": 4.0,
        "q": 2.0,
        "run_recovery": True,
        "oversample": 8,
        "dump_instances": True,
    },
    "verify": {
        "criteria": "all",
        "lebesgue_ratio": 3.0,
        "pipeline_factor": 6.0,
        "slope_margin": 0.35,
        "scaling_pass_min": 45,
        "scaling_fail_max": 10,
    },
}


def default_config() -> dict:
    return deepcopy(DEFAULTS)


def dump_config(cfg: dict) -> str:
    """Render a config dict in the INI format parse_config reads."""
    lines = []
    for section in cfg:
        lines.append(f"[{section}]")
        for key, val in cfg[section].items():
            lines.append(f"{key} = {val}")
        lines.append("")
    return "\n".join(lines)


def _coerce(section, key, raw, default):
    if isinstance(default, bool):
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"[{section}] {key}: expected a boolean, got {raw!r}")
    try:
        if isinstance(default, int):
            return int(str(raw).strip())
        if isinstance(default, float):
            return float(str(raw).strip())
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None
    return str(raw).strip()


def parse_config(path: str | None, overrides: dict | None = None) -> dict:
    """Merge DEFAULTS <- INI file <- CLI overrides into one config dict."""
    cfg = default_config()
    if path:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        parser.optionxform = str  # keys are case-sensitive (J vs j)
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from None
        for section in parser.sections():
            if section not in cfg:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser[section].items():
                if key not in cfg[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                cfg[section][key] = _coerce(section, key, raw, cfg[section][key])
    for key, val in (overrides or {}).items():
        if val is not None:
            cfg["common"][key] = val
    return cfg


def _int_list(text, section, key):
    try:
        vals = [int(tok) for tok in str(text).replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected integers, got {text!r}") from None
    if not vals:
        raise ConfigError(f"[{section}] {key}: empty list")
    return vals


def _float_list(text, section, key):
    try:
        vals = [float(tok) for tok in str(text).replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected numbers, got {text!r}") from None
    if not vals:
        raise ConfigError(f"[{section}] {key}: empty list")
    return vals


def _echo(section_cfg) -> str:
    return " ".join(f"{k}={v}" for k, v in sorted(section_cfg.items()))


def _write_csv(path, header, rows, echo):
    with open(path, "w") as fh:
        fh.write(f"# config: {echo}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _outdir(cfg) -> str:
    out = cfg["common"]["out"]
    os.makedirs(out, exist_ok=True)
    return out


# ---------------------------------------------------------------- find-points

def run_find_points(cfg: dict):
    """Double m until the two-sided certificate holds; emit the trail.

    Returns (pointset_or_None, list_of_reports).  Attempt k redraws points
    with seed seed+k, so the trail is reproducible row by row.  Failure to
    certify within the cap is reported, not raised.
    """
    sec = cfg["find-points"]
    seed = cfg["common"]["seed"]
    d, degree, u = sec["d"], sec["degree"], sec["u"]
    system = TrigSystem(d, (degree,) * d)
    if u > system.size:
        raise ConfigError(f"u = {u} exceeds system size {system.size}")
    out = _outdir(cfg)
    reports = []
    found = None

    if sec["grid"]:
        n = 2 * degree + 1
        pts = uniform_grid_points(n, d)
        rep = check_usd(build_sampled(system, pts), u, 2.0, sec["mode"],
                        "exhaustive", subset_cap=sec["subset_cap"])
        reports.append(rep)
        found = pts if rep.holds else None
    else:
        m = sec["m0"]
        attempt = 0
        while m <= sec["m_cap"]:
            pts = draw_points(m, d, seed + attempt)
            rep = check_usd(build_sampled(system, pts), u, 2.0, sec["mode"],
                            "exhaustive", subset_cap=sec["subset_cap"])
            reports.append(rep)
            if rep.holds:
                found = pts
                break
            m *= 2
            attempt += 1

    echo = _echo({**sec, "seed": seed})
    _write_csv(os.path.join(out, "find_points_trail.csv"),
               DiscretizationReport.CSV_HEADER,
               [r.csv_row() for r in reports], echo)
    if found is not None:
        write_pointset(found, os.path.join(out, "points.txt"))
    return found, reports


# ----------------------------------------------------------------- check-disc

def _pointset_from(sec, system, seed):
    if sec.get("points_file"):
        return read_pointset(sec["points_file"])
    if sec.get("grid"):
        return uniform_grid_points(2 * max(system.box) + 1, system.dim)
    return draw_points(sec["m"], system.dim, seed)


def run_check_disc(cfg: dict) -> DiscretizationReport:
    sec = cfg["check-disc"]
    seed = cfg["common"]["seed"]
    system = TrigSystem(sec["d"], (sec["degree"],) * sec["d"])
    pts = _pointset_from(sec, system, seed)
    if pts.dim != system.dim:
        raise ConfigError("point set dimension does not match the system")
    rep = check_usd(build_sampled(system, pts), sec["u"], sec["p"], sec["mode"],
                    sec["method"], trials=sec["trials"], seed=seed,
                    subset_cap=sec["subset_cap"])
    out = _outdir(cfg)
    _write_csv(os.path.join(out, "discretization.csv"),
               DiscretizationReport.CSV_HEADER, [rep.csv_row()],
               _echo({**sec, "seed": seed}))
    return rep


# -------------------------------------------------------------------- recover

def _make_target(sec, system, seed):
    kind = sec["target"]
    rng = np.random.default_rng(seed)
    if kind == "dense":
        coeff = rng.standard_normal(system.size) + 1j * rng.standard_normal(system.size)
        return TrigPolynomial(system.dim,
                              dict(zip(system.indices(), coeff)))
    if kind == "sparse":
        v = sec["sparsity"]
        cols = rng.choice(system.size, size=v, replace=False)
        coeff = rng.standard_normal(v) + 1j * rng.standard_normal(v)
        return reconstruct(system, cols, coeff)
    if kind in ("saturated-spread", "single-spike", "random-support"):
        J = sec["J"] if sec["J"] >= 0 else default_truncation_level(max(sec.get("v", 1), 1))
        spec = ClassSpec(sec["r"], sec["beta"], J)
        if 2 ** (J + 1) - 1 > max(system.box):
            raise ConfigError(
                f"truncation level J={J} needs box degree >= {2 ** (J + 1) - 1}")
        return sample_class_function(spec, kind, seed, dim=system.dim,
                                     density=sec["density"])
    raise ConfigError(f"unknown target kind {kind!r}")


def run_recover(cfg: dict):
    sec = cfg["recover"]
    seed = cfg["common"]["seed"]
    system = TrigSystem(sec["d"], (sec["degree"],) * sec["d"])
    pts = _pointset_from(sec, system, seed)
    f0 = _make_target(sec, system, seed)
    report = recover(f0, system, pts, v=sec["v"], p=sec["p"], t=sec["t"],
                     c_emp=sec["c_emp"], certify=sec["certify"],
                     selection=sec["selection"], oversample=sec["oversample"],
                     seed=seed)
    out = _outdir(cfg)
    echo = _echo({**sec, "seed": seed})
    _write_csv(os.path.join(out, "recovery.csv"),
               type(report).CSV_HEADER, [report.csv_row()], echo)
    if report.trace is not None:
        write_trace_csv(report.trace, os.path.join(out, "womp_trace.csv"))
    return report


# ----------------------------------------------------------------- rate-sweep

@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(median error) against log v."""

    p: float
    v_values: tuple
    medians: tuple
    slope: float
    intercept: float
    target_exponent: float
    n_seeds: int


def target_exponent(p: float, beta: float, r: float, d: int) -> float:
    """Predicted decay exponent 1 - 1/p - 1/beta - r/d of the error in v."""
    return 1.0 - 1.0 / p - 1.0 / beta - r / d


def schedule_m(v: int, a: float, kind: str = "log4") -> int:
    """Sample budget a * v * log(2v)^4 (or ^3 for the alternate schedule)."""
    power = 4 if kind == "log4" else 3
    return int(math.ceil(a * v * math.log(2 * v) ** power))


def fit_rate(v_values, medians, p, target, n_seeds) -> RateFit:
    """Fit the decay slope; refuses with fewer than 4 surviving v points."""
    keep = [(v, e) for v, e in zip(v_values, medians) if e > 0]
    if len(keep) < 4:
        raise ValueError(f"only {len(keep)} usable v values; need at least 4")
    lv = np.log([v for v, _ in keep])
    le = np.log([e for _, e in keep])
    slope, intercept = np.polyfit(lv, le, 1)
    return RateFit(float(p), tuple(v for v, _ in keep), tuple(e for _, e in keep),
                   float(slope), float(intercept), target, n_seeds)


def _sweep_cell(args):
    """One (v, seed) cell: draw points, sample the target, recover, measure."""
    sec, base_seed, v, seed_idx = args
    d = sec["d"]
    J = sec["J"] if sec["J"] >= 0 else default_truncation_level(v)
    spec = ClassSpec(sec["r"], sec["beta"], J)
    degree = 2 ** J - 1
    system = TrigSystem(d, (degree,) * d)
    m = schedule_m(v, sec["a"], sec["schedule"])
    steps = int(math.ceil(sec["c_emp"] * v))
    if m < steps:
        return None
    cell_seed = base_seed + 100_003 * v + seed_idx
    pts = draw_points(m, d, cell_seed)
    f0 = sample_class_function(spec, sec["profile"], cell_seed, dim=d,
                               density=sec["density"])
    p_list = _float_list(sec["p_list"], "rate-sweep", "p_list")
    report = recover(f0, system, pts, v=v, p=p_list[0], t=sec["t"],
                     c_emp=sec["c_emp"], certify=sec["certify"],
                     compute_sigma=False, oversample=sec["oversample"],
                     seed=seed_idx)
    errors = {p_list[0]: report.error_lp_mu}
    for p in p_list[1:]:
        errors[p] = lp_norm(f0 - report.approximant, p, "mu",
                            oversample=sec["oversample"])
    return {"v": v, "seed": seed_idx, "m": m, "J": J, "size": system.size,
            "steps": report.trace.steps, "errors": errors, "report": report}


def rate_sweep_compute(sec: dict, base_seed: int = 0, threads: int = 1):
    """Run all sweep cells and fit slopes; returns (cells, fits, dropped_v).

    Pure compute path (no files), shared by the CLI driver and the
    acceptance gate.  Cells whose sample budget falls below the greedy
    step count are dropped and their v reported back.
    """
    v_list = _int_list(sec["v_list"], "rate-sweep", "v_list")
    p_list = _float_list(sec["p_list"], "rate-sweep", "p_list")
    if sec["schedule"] not in ("log4", "log3"):
        raise ConfigError(f"unknown schedule {sec['schedule']!r}")
    if any(v < 1 for v in v_list):
        raise ConfigError("v_list entries must be >= 1")
    n_seeds = sec["seeds"]
    jobs = [(sec, base_seed, v, s) for v in v_list for s in range(n_seeds)]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(_sweep_cell, jobs))
    else:
        cells = [_sweep_cell(job) for job in jobs]
    dropped = sorted({job[2] for job, cell in zip(jobs, cells) if cell is None})
    cells = [c for c in cells if c is not None]

    fits = {}
    for p in p_list:
        medians = []
        vs = []
        for v in v_list:
            errs = [c["errors"][p] for c in cells if c["v"] == v]
            if errs:
                vs.append(v)
                medians.append(float(np.median(errs)))
        fits[p] = fit_rate(vs, medians, p,
                           target_exponent(p, sec["beta"], sec["r"], sec["d"]),
                           n_seeds)
    return cells, fits, dropped


def run_rate_sweep(cfg: dict):
    """Full decay-rate experiment; returns (cells, fits dict keyed by p)."""
    sec = cfg["rate-sweep"]
    base_seed = cfg["common"]["seed"]
    cells, fits, dropped = rate_sweep_compute(sec, base_seed,
                                              cfg["common"]["threads"])
    p_list = _float_list(sec["p_list"], "rate-sweep", "p_list")

    out = _outdir(cfg)
    echo = _echo({**sec, "seed": base_seed})
    rows = []
    for c in cells:
        for p in p_list:
            rep = c["report"]
            rows.append(f"{c['seed']},{sec['d']},{c['size']},{c['m']},{c['v']},"
                        f"{rep.u},{p:g},{sec['t']:g},{sec['c_emp']:g},,,,"
                        f"{c['errors'][p]:.12g},,,{c['steps']}")
    _write_csv(os.path.join(out, "rate_cells.csv"),
               "seed,d,N,m,v,u,p,t,c_emp,cert_holds,c_low,c_high,"
               "error_Lp_mu,sigma_ref,ratio,steps_used", rows, echo)

    summary = {}
    for p, fit in fits.items():
        with open(os.path.join(out, f"rate_medians_p{p:g}.dat"), "w") as fh:
            fh.write(f"# log(v) log(median_error)  slope={fit.slope:.6g} "
                     f"intercept={fit.intercept:.6g} target={fit.target_exponent:g}\n")
            for v, e in zip(fit.v_values, fit.medians):
                fh.write(f"{math.log(v):.12g} {math.log(e):.12g}\n")
        summary[f"p={p:g}"] = {
            "slope": fit.slope, "intercept": fit.intercept,
            "target_exponent": fit.target_exponent,
            "v_values": list(fit.v_values), "medians": list(fit.medians),
            "seeds": fit.n_seeds, "dropped_v": dropped,
        }
    with open(os.path.join(out, "rate_fit.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    return cells, fits


# -------------------------------------------------------------------- fooling

def zero_data_recovery(system: TrigSystem, pts):
    """Sample-based recovery map used against the adversary: greedy on the
    box dictionary.  On all-zero samples it returns the zero polynomial."""
    if pts.m == 0:
        return lambda samples: TrigPolynomial(system.dim, {})
    sampled = build_sampled(system, pts)
    h = DiscreteHilbert.from_sampled(sampled)

    def recover_map(samples):
        trace = womp(h, samples, steps=min(h.m, h.size))
        return reconstruct(system, trace.selected, trace.coefficients)

    return recover_map


def run_fooling(cfg: dict):
    """Adversary grid over box sizes; returns the list of gap records."""
    sec = cfg["fooling"]
    seed = cfg["common"]["seed"]
    d = sec["d"]
    boxes = _int_list(sec["box_list"], "fooling", "box_list")
    if sec["m_rule"] == "explicit":
        m_list = _int_list(sec["m_list"], "fooling", "m_list")
        if len(m_list) != len(boxes):
            raise ConfigError("m_list length must match box_list")
    elif sec["m_rule"] == "quarter":
        m_list = [TrigSystem(d, (b,) * d).size // 4 for b in boxes]
    else:
        raise ConfigError(f"unknown m_rule {sec['m_rule']!r}")

    out = _outdir(cfg)
    records = []
    rows = []
    for box, m in zip(boxes, m_list):
        system = TrigSystem(d, (box,) * d)
        theta = system.size
        for s in range(sec["seeds"]):
            pts = (draw_points(m, d, seed + 7919 * box + s) if m > 0
                   else PointSet(d, np.zeros((0, d))))
            rec_map = zero_data_recovery(system, pts) if sec["run_recovery"] else None
            gap = adversary_gap(pts, (box,) * d, p=sec["p"], q=sec["q"],
                                recovery=rec_map, oversample=sec["oversample"])
            records.append(gap)
            inst = gap.instance
            ratio = gap.guaranteed_error / theta ** (1 - 1 / sec["p"])
            rows.append(f"{box},{theta},{m},{s},{inst.norm_q:.12g},"
                        f"{inst.norm_p:.12g},{gap.guaranteed_error:.12g},"
                        f"{ratio:.12g},{inst.vanishing_defect:.3g},"
                        f"{'' if gap.recovery_fooled is None else gap.recovery_fooled}")
            if sec["dump_instances"] and s == 0:
                write_fooling(inst, os.path.join(out, f"fooling_box{box}.txt"))
    _write_csv(os.path.join(out, "fooling.csv"),
               "box,theta,m,seed,norm_q,norm_p,guaranteed_error,"
               "ratio_to_theta,vanishing_defect,recovery_fooled",
               rows, _echo({**sec, "seed": seed}))
    return records
