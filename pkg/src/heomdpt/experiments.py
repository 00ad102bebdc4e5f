"""
Declarative sweep runner behind the command line interface.

Configuration files are INI-style::

    [experiment]
    name = lmg_markov
    preset = lmg_collective_decay
    N = 10
    gamma = 1
    kappa = 50
    omega = 1
    k_max = 2            ; an integer, "default" (per-N table) or "auto"
    tasks = steady, gap
    threads = 1
    tol = 1e-3           ; threshold used by k_max = auto and converge

    [sweep:V]            ; one section per swept parameter, nested in
    start = 0            ; file order (first section outermost)
    stop = 1
    steps = 11

    [task:spectrum]      ; optional per-task options
    count = 10

Each task writes ``<name>_<task>.csv`` plus a ``.json`` sidecar holding the
resolved configuration, the library version and per-row diagnostics
(residuals, wall times). The CSV files never contain timings, so they are
byte-identical across reruns and thread counts.
"""
import configparser
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import __version__
from .embedding import (LINDBLAD_ALIASES, LINDBLAD_PRESETS,
                        canonical_lindblad_name, assemble_markovian,
                        convergence_measures, default_symmetry, dim_ratio,
                        lindblad_preset, matched_selection)
from .errors import ConfigError
from .hierarchy import assemble_heom
from .meanfield import critical_points, fixed_points, stability
from .models import PRESET_PARAMETERS, preset
from .operators import build_spin
from .spectra import (ordered_spectrum, propagate, sector_gaps,
                      steady_state)

__all__ = [
    "Sweep",
    "ExperimentConfig",
    "SweepRow",
    "TASKS",
    "ALL_PRESETS",
    "parse_config",
    "load_config",
    "dump_config",
    "validate_config",
    "run_experiment",
    "run_task",
    "default_k_max",
    "format_csv",
]

TASKS = ("steady", "gap", "sector_gaps", "spectrum", "meanfield", "converge",
         "compare_embedding", "propagate")
HEOM_PRESETS = tuple(PRESET_PARAMETERS)
ALL_PRESETS = (HEOM_PRESETS + tuple(LINDBLAD_PRESETS)
               + tuple(LINDBLAD_ALIASES))
LINDBLAD_TASKS = ("steady", "gap", "spectrum", "propagate")
PARAM_NAMES = ("N", "V", "gamma", "kappa", "omega", "h", "g", "omega0",
               "g_over_gc")
MEANFIELD_KIND = {"lmg_collective_decay": "model1_full",
                  "lmg_sx": "model2_full",
                  "lindblad_eliminated": "model1_spin"}
FP_LABELS = {"model1_full": ("pole", "equator-minus", "equator-plus"),
             "model1_spin": ("pole", "equator-minus", "equator-plus"),
             "model2_full": ("phase-I", "phase-II", "phase-IIb", "phase-III")}
CRIT_NAMES = {"model1_full": ("V_c_plus", "V_c_minus", "V_c_markov"),
              "model1_spin": ("V_c_plus", "V_c_minus", "V_c_markov"),
              "model2_full": ("V1", "V2")}
FLOAT_FMT = "%.11e"


def default_k_max(N):
    """Per-N hierarchy depth: 6 up to N = 30, 7 up to 60, 9 beyond."""
    N = int(N)
    if N <= 30:
        return 6
    if N <= 60:
        return 7
    return 9


@dataclass(frozen=True)
class Sweep:
    param: str
    start: float
    stop: float
    steps: int

    def values(self):
        vals = np.linspace(self.start, self.stop, self.steps)
        if self.param == "N":
            return [int(round(v)) for v in vals]
        return [float(v) for v in vals]


@dataclass
class ExperimentConfig:
    name: str
    preset: str
    params: dict
    tasks: tuple
    k_max: object = "default"
    sweeps: tuple = ()
    task_options: dict = field(default_factory=dict)
    out_dir: str = "."
    threads: int = 1
    tol: float = 1e-3

    def grid(self):
        """Parameter dictionaries of every sweep point, in sweep order."""
        if not self.sweeps:
            return [dict(self.params)]
        pts = []
        for combo in product(*[s.values() for s in self.sweeps]):
            p = dict(self.params)
            for s, v in zip(self.sweeps, combo):
                p[s.param] = v
            pts.append(p)
        return pts

    def option(self, task, key, default):
        return self.task_options.get(task, {}).get(key, default)


@dataclass
class SweepRow:
    value: object
    columns: dict
    error: str = ""
    residual: float = float("nan")
    wall_time: float = 0.0
    params: dict = field(default_factory=dict)


def _number(text, key):
    try:
        val = float(text)
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {text!r}") from exc
    return int(val) if key == "N" and val == int(val) else val


def parse_config(text):
    """Parse configuration text into an :class:`ExperimentConfig`."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    if "experiment" not in cp:
        raise ConfigError("configuration needs an [experiment] section")
    ex = cp["experiment"]
    for key in ("preset", "tasks"):
        if key not in ex:
            raise ConfigError(f"[experiment] is missing {key!r}")
    params = {k: _number(ex[k], k) for k in PARAM_NAMES if k in ex}
    known = set(PARAM_NAMES) | {"name", "preset", "tasks", "k_max", "threads",
                                "tol", "out_dir"}
    unknown = sorted(set(ex) - known)
    if unknown:
        raise ConfigError("unknown [experiment] key(s): " + ", ".join(unknown))
    k_text = ex.get("k_max", "default").strip()
    if k_text in ("default", "auto"):
        k_max = k_text
    else:
        try:
            k_max = int(k_text)
        except ValueError as exc:
            raise ConfigError(f"k_max must be an integer, 'default' or "
                              f"'auto', got {k_text!r}") from exc
    sweeps = []
    options = {}
    for sec in cp.sections():
        if sec.startswith("sweep:"):
            s = cp[sec]
            param = sec.split(":", 1)[1].strip()
            try:
                sweeps.append(Sweep(param, float(s["start"]), float(s["stop"]),
                                    int(s["steps"])))
            except KeyError as exc:
                raise ConfigError(f"[{sec}] is missing {exc.args[0]!r}") from exc
            except ValueError as exc:
                raise ConfigError(f"[{sec}]: {exc}") from exc
        elif sec.startswith("task:"):
            options[sec.split(":", 1)[1].strip()] = dict(cp[sec])
        elif sec != "experiment":
            raise ConfigError(f"unknown section [{sec}]")
    tasks = tuple(t.strip() for t in ex["tasks"].split(",") if t.strip())
    cfg = ExperimentConfig(
        name=ex.get("name", "experiment").strip(),
        preset=ex["preset"].strip(), params=params, tasks=tasks, k_max=k_max,
        sweeps=tuple(sweeps), task_options=options,
        out_dir=ex.get("out_dir", ".").strip(),
        threads=int(ex.get("threads", "1")), tol=float(ex.get("tol", "1e-3")))
    validate_config(cfg)
    return cfg


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt_number(v):
    return repr(v) if isinstance(v, float) else str(v)


def dump_config(cfg):
    """Serialize ``cfg``; :func:`parse_config` inverts it exactly."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    ex = {"name": cfg.name, "preset": cfg.preset,
          "tasks": ", ".join(cfg.tasks), "k_max": str(cfg.k_max),
          "threads": str(cfg.threads), "tol": repr(float(cfg.tol)),
          "out_dir": cfg.out_dir}
    for k in PARAM_NAMES:
        if k in cfg.params:
            ex[k] = _fmt_number(cfg.params[k])
    cp["experiment"] = ex
    for s in cfg.sweeps:
        cp[f"sweep:{s.param}"] = {"start": repr(float(s.start)),
                                  "stop": repr(float(s.stop)),
                                  "steps": str(s.steps)}
    for task, opts in cfg.task_options.items():
        cp[f"task:{task}"] = {k: str(v) for k, v in opts.items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def _required(preset_name):
    preset_name = canonical_lindblad_name(preset_name)
    if preset_name in PRESET_PARAMETERS:
        return PRESET_PARAMETERS[preset_name]
    return LINDBLAD_PRESETS[preset_name][1]


def validate_config(cfg):
    """Raise :class:`ConfigError` describing the first problem found."""
    if cfg.preset not in ALL_PRESETS:
        raise ConfigError(f"unknown preset {cfg.preset!r}; choose from "
                          + ", ".join(ALL_PRESETS))
    if not cfg.tasks:
        raise ConfigError("no tasks requested")
    base = canonical_lindblad_name(cfg.preset)
    for t in cfg.tasks:
        if t not in TASKS:
            raise ConfigError(f"unknown task {t!r}; choose from "
                              + ", ".join(TASKS))
        if base in LINDBLAD_PRESETS and t not in LINDBLAD_TASKS:
            raise ConfigError(f"task {t!r} needs a hierarchy preset, not "
                              f"{cfg.preset!r}")
        if t == "meanfield" and base not in MEANFIELD_KIND:
            raise ConfigError(f"no mean-field equations for {cfg.preset!r}")
    swept = {s.param for s in cfg.sweeps}
    for s in cfg.sweeps:
        if s.param not in PARAM_NAMES:
            raise ConfigError(f"cannot sweep unknown parameter {s.param!r}")
        if s.steps < 1:
            raise ConfigError(f"sweep over {s.param} needs steps >= 1, got "
                              f"{s.steps}")
    have = set(cfg.params) | swept
    if "g_over_gc" in have:
        have.add("g")
    missing = [k for k in _required(cfg.preset) if k not in have]
    if missing:
        raise ConfigError(f"preset {cfg.preset!r} is missing parameter(s): "
                          + ", ".join(missing))
    if isinstance(cfg.k_max, int) and cfg.k_max < 0:
        raise ConfigError(f"k_max must be >= 0, got {cfg.k_max}")
    if cfg.threads < 1:
        raise ConfigError(f"threads must be >= 1, got {cfg.threads}")
    if not cfg.tol > 0:
        raise ConfigError(f"tol must be > 0, got {cfg.tol}")
    return cfg


def _resolve(cfg, p):
    p = dict(p)
    if "g_over_gc" in p and cfg.preset == "dicke_two_mode":
        gc = critical_points("model3", {**p, "g": 0.0})["g_c"]
        p["g"] = p["g_over_gc"] * gc
    return p


def _model(cfg, p):
    if canonical_lindblad_name(cfg.preset) in LINDBLAD_PRESETS:
        return lindblad_preset(cfg.preset, **p), None
    return None, preset(cfg.preset, **p)


def _k_max(cfg, model, p, spin):
    if isinstance(cfg.k_max, int):
        return cfg.k_max
    if cfg.k_max == "default":
        return default_k_max(p["N"])
    rep = convergence_measures(model, list(range(1, 11)), spin.Sz,
                               eps=cfg.tol)
    if rep.selected_k_max is None:
        raise RuntimeError(f"no k_max in 1..10 met tol={cfg.tol}")
    return rep.selected_k_max


def _ev_cols(prefix, z):
    return {f"{prefix}_re": float(np.real(z)), f"{prefix}_im": float(np.imag(z))}


def _spin_cols(spin, rho):
    N = spin.N
    half = N / 2
    ex = lambda O: float(np.real(np.trace(O @ rho)))
    return {"sz": ex(spin.Sz), "sz_norm": ex(spin.Sz) / half,
            "sx2_norm": ex(spin.Sx @ spin.Sx) / half ** 2,
            "sy2_norm": ex(spin.Sy @ spin.Sy) / half ** 2,
            "sz2_norm": ex(spin.Sz @ spin.Sz) / half ** 2}


def _charges(cfg):
    opt = cfg.option("sector_gaps", "charges", None)
    if opt is None:
        return (-1, 0, 1) if cfg.preset == "dicke_two_mode" else (0, 1)
    return tuple(int(q) for q in str(opt).split(","))


def _task_columns(cfg, task):
    """Column names for ``task``; independent of the computed values."""
    sweep_cols = [s.param for s in cfg.sweeps]
    base = sweep_cols + ["k_max"]
    spin = ["sz", "sz_norm", "sx2_norm", "sy2_norm", "sz2_norm"]
    if task == "steady":
        return base + spin + ["residual"]
    if task == "gap":
        return base + ["lambda1_0_re", "lambda1_0_im", "lambda0_1_re",
                       "lambda0_1_im"]
    if task == "sector_gaps":
        cols = []
        for q in _charges(cfg):
            cols += [f"lambda0_q{q}_re", f"lambda0_q{q}_im",
                     f"lambda1_q{q}_re", f"lambda1_q{q}_im"]
        return base + cols
    if task == "spectrum":
        n = int(cfg.option("spectrum", "count", 10))
        cols = []
        for i in range(n):
            cols += [f"lambda{i}_re", f"lambda{i}_im"]
        return base + cols
    if task == "meanfield":
        kind = MEANFIELD_KIND[canonical_lindblad_name(cfg.preset)]
        cols = []
        for lab in FP_LABELS[kind]:
            cols += [f"n_{lab}", f"stable_{lab}"]
        return sweep_cols + cols + list(CRIT_NAMES[kind])
    if task == "converge":
        ks = _k_range(cfg)
        return (sweep_cols + [f"C_{k}" for k in ks] + [f"S_{k}" for k in ks]
                + ["selected_k_max"])
    if task == "compare_embedding":
        return sweep_cols + ["k_max", "Nc", "sz_heom", "sz_embedding",
                             "abs_diff", "dim_ratio"]
    if task == "propagate":
        return base + ["t", "sz", "trace"]
    raise ConfigError(f"unknown task {task!r}")


def _k_range(cfg):
    lo = int(cfg.option("converge", "k_min", 2))
    hi = int(cfg.option("converge", "k_stop", 6))
    return list(range(lo, hi + 1))


def _compute(cfg, task, p):
    p = _resolve(cfg, p)
    spin = build_spin(int(p["N"]))
    lind, model = _model(cfg, p)
    out = {}
    residual = float("nan")
    if task == "meanfield":
        kind = MEANFIELD_KIND[canonical_lindblad_name(cfg.preset)]
        fps = fixed_points(kind, p)
        for lab in FP_LABELS[kind]:
            pts = [f for f in fps if f.label == lab]
            out[f"n_{lab}"] = len(pts)
            out[f"stable_{lab}"] = sum(stability(kind, p, f).verdict == "stable"
                                       for f in pts)
        out.update(critical_points(kind, p))
        return [out], residual
    if task == "converge":
        sel = cfg.option("converge", "selector", "gap")
        rep = convergence_measures(model, _k_range(cfg), spin.Sz,
                                   selector=None if sel == "none" else sel,
                                   eps=cfg.tol)
        for k, c, s in zip(rep.k_values, rep.C, rep.S):
            out[f"C_{k}"] = c
            out[f"S_{k}"] = s
        out["selected_k_max"] = (np.nan if rep.selected_k_max is None
                                 else rep.selected_k_max)
        return [out], residual
    if task == "compare_embedding":
        if isinstance(cfg.k_max, int):
            k = nc = cfg.k_max
        else:
            rep = matched_selection(model, spin.Sz, eps=cfg.tol,
                                    k_max_range=range(1, 11),
                                    cutoff_range=range(1, 16))
            if rep.selected_k_max is None or rep.selected_Nc is None:
                raise RuntimeError(f"truncation selection failed at "
                                   f"tol={cfg.tol}")
            k, nc = rep.selected_k_max, rep.selected_Nc
        heom = assemble_heom(model, k)
        ss = steady_state(heom, sym=default_symmetry(heom))
        emb = steady_state(assemble_markovian(model, cutoffs=nc))
        a = float(np.real(np.trace(spin.Sz @ ss.rho)))
        b = float(np.real(np.trace(spin.Sz @ emb.rho)))
        out.update(k_max=k, Nc=nc, sz_heom=a, sz_embedding=b,
                   abs_diff=abs(a - b),
                   dim_ratio=dim_ratio(model.M, k, nc, model.d))
        return [out], max(ss.residual, emb.residual)

    if lind is not None:
        gen, sym, k = lind, None, 0
    else:
        k = _k_max(cfg, model, p, spin)
        gen = assemble_heom(model, k)
        sym = default_symmetry(gen)
    out["k_max"] = k
    if task == "steady":
        ss = steady_state(gen, sym=sym)
        out.update(_spin_cols(spin, ss.rho))
        out["residual"] = ss.residual
        return [out], ss.residual
    if task == "gap":
        if sym is None:
            res = ordered_spectrum(gen, count=2)
            out.update(_ev_cols("lambda1_0", res.eigenvalues[1]))
            out.update(_ev_cols("lambda0_1", np.nan))
        else:
            g = sector_gaps(gen, sym, charges=(0, 1), count=2)
            out.update(_ev_cols("lambda1_0", g[0][1]))
            out.update(_ev_cols("lambda0_1", g[1][0]))
        return [out], residual
    if task == "sector_gaps":
        qs = _charges(cfg)
        g = sector_gaps(gen, sym, charges=qs, count=2)
        for q in qs:
            vals = list(g[q]) + [np.nan] * (2 - len(g[q]))
            out.update(_ev_cols(f"lambda0_q{q}", vals[0]))
            out.update(_ev_cols(f"lambda1_q{q}", vals[1]))
        return [out], residual
    if task == "spectrum":
        n = int(cfg.option("spectrum", "count", 10))
        res = ordered_spectrum(gen, count=n)
        vals = list(res.eigenvalues) + [np.nan] * (n - len(res.eigenvalues))
        for i in range(n):
            out.update(_ev_cols(f"lambda{i}", vals[i]))
        return [out], residual
    if task == "propagate":
        t_max = float(cfg.option("propagate", "t_max", 10.0))
        steps = int(cfg.option("propagate", "steps", 11))
        t = np.linspace(0.0, t_max, steps)
        rho0 = np.zeros((spin.dim, spin.dim), dtype=complex)
        start = str(cfg.option("propagate", "initial", "up"))
        rho0[0 if start == "up" else -1, 0 if start == "up" else -1] = 1.0
        init = gen.initial_state(rho0) if hasattr(gen, "initial_state") \
            else rho0.reshape(-1)
        tr = propagate(gen, init, t, observables={"sz": spin.Sz})
        rows = []
        for i, ti in enumerate(t):
            r = dict(out)
            r.update(t=float(ti), sz=float(np.real(tr.expectations["sz"][i])),
                     trace=float(np.real(tr.physical_trace[i])))
            rows.append(r)
        return rows, float(np.max(np.abs(tr.physical_trace - 1)))
    raise ConfigError(f"unknown task {task!r}")


def _one(cfg, task, p):
    t0 = time.perf_counter()
    try:
        rows, residual = _compute(cfg, task, p)
        err = ""
    except Exception as exc:  # failures are recorded per row
        rows, residual = [{}], float("nan")
        err = f"{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - t0
    sweep_vals = {s.param: p[s.param] for s in cfg.sweeps}
    value = tuple(sweep_vals.values())
    value = value[0] if len(value) == 1 else value
    out = []
    for r in rows:
        cols = dict(sweep_vals)
        cols.update(r)
        out.append(SweepRow(value=value, columns=cols, error=err,
                            residual=residual, wall_time=wall, params=dict(p)))
    return out


def run_task(cfg, task, threads=None):
    """Evaluate ``task`` over the sweep grid; rows come back in sweep order."""
    threads = cfg.threads if threads is None else threads
    grid = cfg.grid()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda p: _one(cfg, task, p), grid))
    else:
        chunks = [_one(cfg, task, p) for p in grid]
    return [row for chunk in chunks for row in chunk]


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    v = float(v)
    if np.isnan(v):
        return "nan"
    return FLOAT_FMT % v


def format_csv(columns, rows):
    """Render rows as CSV text: header, LF endings, 12 significant digits."""
    lines = [",".join(columns + ["error"])]
    for r in rows:
        cells = [_cell(r.columns.get(c)) for c in columns]
        err = r.error.replace("\n", " ").replace(",", ";").replace('"', "'")
        lines.append(",".join(cells + [err]))
    return "\n".join(lines) + "\n"


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if not np.isfinite(v) else v
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def run_experiment(cfg, out_dir=None, threads=None, tol=None):
    """Run every task of ``cfg`` and write its CSV and JSON files.

    Returns
    -------
    dict
        ``{task: (csv_path, json_path)}``.
    """
    if tol is not None:
        cfg.tol = float(tol)
    if threads is not None:
        cfg.threads = int(threads)
    validate_config(cfg)
    out_dir = cfg.out_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    for task in cfg.tasks:
        rows = run_task(cfg, task)
        cols = _task_columns(cfg, task)
        base = os.path.join(out_dir, f"{cfg.name}_{task}")
        with open(base + ".csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(format_csv(cols, rows))
        meta = {
            "version": __version__,
            "task": task,
            "config": dump_config(cfg),
            "columns": cols,
            "rows": [{"index": i,
                      "params": {k: _jsonable(v) for k, v in r.params.items()},
                      "residual": _jsonable(r.residual),
                      "wall_time": r.wall_time,
                      "error": r.error} for i, r in enumerate(rows)],
        }
        with open(base + ".json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        paths[task] = (base + ".csv", base + ".json")
    return paths
