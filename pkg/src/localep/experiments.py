"""Declarative Monte Carlo experiments and their CSV output.

A config is a JSON document with the sections listed in :data:`CONFIG_KEYS`.
Each experiment is split into ``(seed, n)`` cells; cells are independent,
every random draw inside a cell is keyed by ``(seed, n)``, and rows are
merged in cell order, so the output does not depend on how many worker
processes ran the cells.

Shipped experiments
-------------------
EXP-A
    Normalized uniform increments ``E_n(t, .)`` on an interval net:
    ``sup_dist`` over the t-grid and optionally ``min_theta_dist``.
EXP-B
    Oscillation ratio ``osc_ratio``.
EXP-C
    KDE sup statistics ``kde_ratio_f`` (divided by ``sqrt f``) and
    ``kde_ratio``.
EXP-D
    ``L_n(z, .)`` on a rectangle net over a z-grid of ``J``: ``sup_dist`` and
    optionally ``min_theta_dist``.
DIAG-COV, DIAG-FACT6, DIAG-GAUSS, DIAG-LDP
    Poissonization diagnostics; ``stderr`` and ``theoretical`` go to ``aux``.
"""

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from localep.densities import make_density, smoothed_density
from localep.function_classes import build_net, kernel_norm_sq
from localep.limit_set import LimitBallModel
from localep.local_process import (BandwidthSchedule, SampleIndex, _kde_values,
                                   centering_terms, increment_process, local_empirical,
                                   oscillation_modulus, validate_schedule)
from localep import poissonization as pz

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "CSV_COLUMNS",
    "load_config",
    "run_experiment",
    "run_exp_a",
    "run_exp_b",
    "run_exp_c",
    "run_exp_d",
    "emit",
    "read_rows",
    "rows_to_csv",
    "summarize",
]

CSV_COLUMNS = ("experiment_id", "seed", "n", "h", "statistic", "value", "aux")

EXPERIMENTS = ("EXP-A", "EXP-B", "EXP-C", "EXP-D",
               "DIAG-COV", "DIAG-FACT6", "DIAG-GAUSS", "DIAG-LDP")

CONFIG_KEYS = ("experiment_id", "density", "net", "schedule", "n_list", "grids",
               "target_theta", "seeds", "reps", "params", "solver")

_GRID_KEYS = {"t_step", "z_points"}
_NET_KEYS = {"kind", "q", "levels", "d", "mesh_delta", "names", "name", "members"}
_SCHEDULE_KEYS = {"kind", "alpha", "scale", "table", "threshold"}
_THETA_KEYS = {"xi", "coefficients", "values"}
_SOLVER_KEYS = {"tol", "rank_cutoff"}
_PARAM_KEYS = {
    "EXP-A": set(), "EXP-B": set(),
    "EXP-C": {"kernel"},
    "EXP-D": set(),
    "DIAG-COV": {"z"},
    "DIAG-FACT6": {"z_list", "events"},
    "DIAG-GAUSS": {"z"},
    "DIAG-LDP": {"z", "lambda"},
}


def _reject_unknown(section, given, allowed):
    unknown = set(given) - set(allowed)
    if unknown:
        raise ValueError(f"unknown keys in {section}: {sorted(unknown)}")


def _plain(x):
    """Convert numpy scalars/arrays inside ``x`` to JSON-ready Python values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    experiment_id: str
    density: dict
    net: dict
    schedule: dict = field(default_factory=lambda: {"kind": "power", "alpha": 0.5})
    n_list: list = field(default_factory=list)
    grids: dict = field(default_factory=dict)
    target_theta: dict = None
    seeds: list = field(default_factory=lambda: [0])
    reps: int = 1
    params: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        _reject_unknown("config", doc, CONFIG_KEYS)
        if doc.get("experiment_id") == "EXP-B":
            doc.setdefault("net", {"kind": "intervals", "q": 1})
        for key in ("experiment_id", "density", "net", "n_list"):
            if key not in doc:
                raise ValueError(f"config is missing required key {key!r}")
        cfg = cls(**doc)
        cfg.resolve()
        return cfg

    def resolve(self):
        """Fill defaults, validate every section and build the engine objects."""
        eid = self.experiment_id
        if eid not in EXPERIMENTS:
            raise ValueError(f"unknown experiment_id {eid!r}; expected one of {EXPERIMENTS}")
        _reject_unknown("net", self.net, _NET_KEYS)
        _reject_unknown("schedule", self.schedule, _SCHEDULE_KEYS)
        _reject_unknown("grids", self.grids, _GRID_KEYS)
        _reject_unknown("solver", self.solver, _SOLVER_KEYS)
        _reject_unknown(f"params for {eid}", self.params, _PARAM_KEYS[eid])
        if self.target_theta is not None:
            _reject_unknown("target_theta", self.target_theta, _THETA_KEYS)
            if eid not in ("EXP-A", "EXP-D"):
                raise ValueError("target_theta applies to EXP-A and EXP-D only")

        self.n_list = [int(n) for n in self.n_list]
        if not self.n_list or min(self.n_list) < 1:
            raise ValueError("n_list must hold positive sample sizes")
        self.seeds = [int(s) for s in self.seeds]
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        self.reps = int(self.reps)
        if self.reps < 1:
            raise ValueError("reps must be positive")

        sched = dict(self.schedule)
        threshold = float(sched.pop("threshold", 10.0))
        self.schedule_obj = BandwidthSchedule.from_dict(sched)
        self.schedule = {**self.schedule_obj.to_dict(), "threshold": threshold}
        for n in self.n_list:
            try:
                h = self.schedule_obj(n)
            except KeyError as exc:
                raise ValueError(exc.args[0]) from None
            if not 0 < h < 1:
                raise ValueError(f"schedule gives h={h} at n={n}; bandwidths must lie in (0, 1)")
        self.schedule_report = validate_schedule(self.schedule_obj, self.n_list, threshold)
        if not self.schedule_report.ok:
            raise ValueError(f"schedule fails validation over n_list: {self.schedule_report.summary()}")

        self.density_obj = make_density(self.density)
        self.density = self.density_obj.to_dict()
        self.net_obj = build_net(self.net)
        self.net = dict(self.net_obj.spec) if getattr(self.net_obj, "spec", None) else dict(self.net)

        grids = {"t_step": 0.05, "z_points": 50}
        grids.update(self.grids)
        self.grids = {"t_step": float(grids["t_step"]), "z_points": int(grids["z_points"])}
        if not 0 < self.grids["t_step"] <= 1 or self.grids["z_points"] < 1:
            raise ValueError("grids need 0 < t_step <= 1 and z_points >= 1")
        self.solver = {"tol": float(self.solver.get("tol", 1e-6)),
                       "rank_cutoff": float(self.solver.get("rank_cutoff", 1e-12))}

        check = {"EXP-A": self._check_a, "EXP-B": self._check_b, "EXP-C": self._check_c,
                 "EXP-D": self._check_d, "DIAG-FACT6": self._check_fact6,
                 "DIAG-LDP": self._check_ldp}.get(eid)
        if check is not None:
            check()
        if self.target_theta is not None:
            theta = self.theta_vector()
            model = self.model()
            rate = float(model.rate(theta))
            if not rate <= 1.0 + 1e-9:
                raise ValueError(f"target_theta has I(theta) = {rate} > 1; it is not in the limit ball")
        return self

    # -- per-experiment checks ------------------------------------------------
    def _check_a(self):
        d = self.density_obj
        if d.kind != "uniform-box" or d.d != 1 or d.support_lo[0] != 0 or d.support_hi[0] != 1:
            raise ValueError("EXP-A needs the uniform density on [0, 1]")
        if self.net_obj.name != "intervals":
            raise ValueError("EXP-A needs an 'intervals' net")

    def _check_b(self):
        d = self.density_obj
        if d.kind != "uniform-box" or d.d != 1 or d.support_lo[0] != 0 or d.support_hi[0] != 1:
            raise ValueError("EXP-B needs the uniform density on [0, 1]")

    def _check_c(self):
        if self.net_obj.name != "kernel" or self.net_obj.q != 1:
            raise ValueError("EXP-C needs a 'kernel' net (a single kernel)")
        if self.net_obj.d != self.density_obj.d:
            raise ValueError("kernel and density dimensions differ")

    def _check_d(self):
        if self.density_obj.d != 2:
            raise ValueError("EXP-D runs in d = 2")
        if self.net_obj.d != 2:
            raise ValueError("EXP-D needs a net on I^2")

    def _check_fact6(self):
        z_list = self.params.get("z_list")
        if not z_list:
            raise ValueError("DIAG-FACT6 needs params.z_list")
        if not self.params.get("events"):
            raise ValueError("DIAG-FACT6 needs params.events")
        for n in self.n_list:
            cond = pz.window_condition(self.density_obj, z_list, self.schedule_obj(n))
            if cond > 0.5:
                raise pz.ConditionError(cond)

    def _check_ldp(self):
        if "lambda" not in self.params:
            raise ValueError("DIAG-LDP needs params.lambda")

    # -- derived objects ------------------------------------------------------
    def model(self):
        return LimitBallModel(rank_cutoff=self.solver["rank_cutoff"],
                              solver_tol=self.solver["tol"]).fit(self.net_obj.gram)

    def theta_vector(self):
        th = self.target_theta
        if "values" in th:
            v = np.asarray(th["values"], dtype=float)
        elif "coefficients" in th:
            v = self.net_obj.gram @ np.asarray(th["coefficients"], dtype=float)
        elif "xi" in th:
            # constant xi on the interval class: theta_l = xi * t_l
            if self.net_obj.name not in ("intervals", "anchored-intervals"):
                raise ValueError("target_theta.xi applies to interval nets")
            v = float(th["xi"]) * np.asarray(self.net_obj.spec["levels"], dtype=float)
        else:
            raise ValueError("target_theta needs one of xi, coefficients, values")
        if v.shape != (self.net_obj.q,):
            raise ValueError(f"target_theta has length {v.size}, net has {self.net_obj.q}")
        return v

    def z_grid(self):
        m = self.grids["z_points"]
        d = self.density_obj
        axes = [np.linspace(a, b, m) for a, b in zip(d.J_lo, d.J_hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)

    def to_dict(self):
        out = {k: getattr(self, k) for k in CONFIG_KEYS}
        return _plain(out)

    def cells(self):
        return [(s, n) for s in self.seeds for n in sorted(self.n_list)]


def load_config(path_or_doc):
    """Parse a config file (or an already loaded dict)."""
    if isinstance(path_or_doc, ExperimentConfig):
        return path_or_doc
    if isinstance(path_or_doc, dict):
        return ExperimentConfig.from_dict(path_or_doc)
    path = Path(path_or_doc)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"config {path} is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(doc)


# ---------------------------------------------------------------------------
# rows and CSV
# ---------------------------------------------------------------------------

@dataclass
class ResultRow:
    experiment_id: str
    seed: int
    n: int
    h: float
    statistic: str
    value: float
    aux: dict = field(default_factory=dict)

    def key(self):
        return (self.experiment_id, self.seed, self.n)

    def as_csv(self):
        return [self.experiment_id, str(self.seed), str(self.n), repr(float(self.h)),
                self.statistic, repr(float(self.value)),
                json.dumps(_plain(self.aux), sort_keys=True, separators=(",", ":"))]


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in sorted(rows, key=ResultRow.key):
        w.writerow(r.as_csv())
    return buf.getvalue()


def read_rows(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        return [ResultRow(e, int(s), int(n), float(h), st, float(v), json.loads(a))
                for e, s, n, h, st, v, a in reader]


def summarize(rows, config=None):
    """Per-experiment, per-statistic medians over seeds for each ``n``."""
    med = {}
    for r in rows:
        med.setdefault(r.experiment_id, {}).setdefault(r.statistic, {}).setdefault(r.n, []).append(r.value)
    medians = {e: {s: {str(n): float(np.median(v)) for n, v in sorted(by_n.items())}
                   for s, by_n in sorted(stats.items())}
               for e, stats in sorted(med.items())}
    out = {"medians": medians, "rows": len(rows)}
    if config is not None:
        out["config"] = config.to_dict()
        out["schedule_report"] = _plain(config.schedule_report.to_dict())
    return out


def emit(rows, destination, config=None):
    """Write the CSV (and a ``.summary.json`` next to it)."""
    path = Path(destination)
    if path.suffix != ".csv":
        eid = config.experiment_id if config is not None else "results"
        path = path / f"{eid}.csv"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(rows_to_csv(rows))
        summary = json.dumps(summarize(rows, config), indent=2, sort_keys=True)
        path.with_suffix(".summary.json").write_text(summary + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


# ---------------------------------------------------------------------------
# cells
# ---------------------------------------------------------------------------

def _sup_distance(model, psi):
    """``max_i dist(psi_i)`` over rows, solving only rows that can matter.

    Rows inside the ball have distance 0. For the rest, cheap bounds
    ``lo <= dist <= up`` are computed in bulk and rows are solved in order
    of decreasing ``up`` until ``up`` drops below the best exact value.
    """
    psi = np.atleast_2d(psi)
    qf = model.quad_form(psi)
    outside = np.flatnonzero(qf > 1.0 + model.solver_tol)
    if outside.size == 0:
        return 0.0, int(np.argmax(np.max(np.abs(psi), axis=1)))
    P = psi[outside]
    norm = np.max(np.abs(P), axis=1)
    finite = np.isfinite(qf[outside])
    up = norm.copy()
    up[finite] = norm[finite] * (1.0 - 1.0 / np.sqrt(qf[outside][finite]))
    diag = np.sqrt(np.clip(np.diag(model.gram_), 0.0, None))
    lo = np.max(np.clip(np.abs(P) - diag, 0.0, None), axis=1)
    best, arg = float(lo.max()), int(outside[np.argmax(lo)])
    for k in np.argsort(-up, kind="stable"):
        if up[k] <= best:
            break
        d = model.distance(P[k])
        if d > best:
            best, arg = d, int(outside[k])
    return float(best), arg


def _cell_exp_a(cfg, seed, n):
    h = cfg.schedule_obj(n)
    sample = cfg.density_obj.sample(n, seed, rep=n)
    index = SampleIndex(sample.points)
    step = cfg.grids["t_step"] * h
    m = int(np.floor((1.0 - h) / step + 1e-9)) + 1
    t = np.minimum(np.arange(m) * step, 1.0 - h)
    levels = np.asarray(cfg.net_obj.spec["levels"], dtype=float)
    psi = increment_process(index, t, h, levels, normalized=True).psi
    model = cfg.model()
    sup, arg = _sup_distance(model, psi)
    aux = {"t_points": m, "q": cfg.net_obj.q, "mesh_delta": cfg.net_obj.mesh_delta,
           "solver_tol": cfg.solver["tol"], "argmax_t": float(t[arg]),
           "max_norm": float(np.max(np.abs(psi)))}
    rows = [ResultRow("EXP-A", seed, n, h, "sup_dist", sup, aux)]
    if cfg.target_theta is not None:
        theta = cfg.theta_vector()
        gaps = np.max(np.abs(psi - theta[None, :]), axis=1)
        k = int(np.argmin(gaps))
        rows.append(ResultRow("EXP-A", seed, n, h, "min_theta_dist", float(gaps[k]),
                              {"t_points": m, "argmin_t": float(t[k]),
                               "rate_theta": float(model.rate(theta))}))
    return rows


def _cell_exp_b(cfg, seed, n):
    h = cfg.schedule_obj(n)
    sample = cfg.density_obj.sample(n, seed, rep=n)
    osc = oscillation_modulus(sample.points, h)
    ratio = osc / math.sqrt(2.0 * h * math.log(1.0 / h))
    return [ResultRow("EXP-B", seed, n, h, "osc_ratio", ratio,
                      {"oscillation": osc, "theoretical": 1.0})]


def _cell_exp_c(cfg, seed, n):
    h = cfg.schedule_obj(n)
    dens = cfg.density_obj
    K = cfg.net_obj.members[0]
    Z = cfg.z_grid()
    sample = dens.sample(n, seed, rep=n)
    index = SampleIndex(sample.points)
    expected = np.array([smoothed_density(dens, K, h, z) for z in Z])
    fn = _kde_values(index, K, h, Z)
    dev = np.sqrt(n * h) * np.abs(fn - expected) / np.sqrt(2.0 * kernel_norm_sq(K) * math.log(1.0 / h))
    f = dens.pdf(Z)
    if np.any(f <= 0):
        raise ValueError("EXP-C z-grid meets f = 0; the f-normalized statistic is undefined")
    dev_f = dev / np.sqrt(f)
    kf, k = int(np.argmax(dev_f)), int(np.argmax(dev))
    grid = {"z_points": int(Z.shape[0])}
    return [
        ResultRow("EXP-C", seed, n, h, "kde_ratio", float(dev[k]),
                  {**grid, "theoretical": dens.sup_sqrt_on_J(), "argmax_z": Z[k]}),
        ResultRow("EXP-C", seed, n, h, "kde_ratio_f", float(dev_f[kf]),
                  {**grid, "theoretical": 1.0, "argmax_z": Z[kf]}),
    ]


def _cell_exp_d(cfg, seed, n):
    h = cfg.schedule_obj(n)
    dens, net = cfg.density_obj, cfg.net_obj
    Z = cfg.z_grid()
    sample = dens.sample(n, seed, rep=n)
    index = SampleIndex(sample.points)
    psi = np.array([local_empirical(index, z, h, net, dens, "L").psi for z in Z])
    model = cfg.model()
    sup, arg = _sup_distance(model, psi)
    aux = {"z_points": int(Z.shape[0]), "q": net.q, "mesh_delta": net.mesh_delta,
           "solver_tol": cfg.solver["tol"], "argmax_z": Z[arg],
           "max_norm": float(np.max(np.abs(psi)))}
    rows = [ResultRow("EXP-D", seed, n, h, "sup_dist", sup, aux)]
    if cfg.target_theta is not None:
        theta = cfg.theta_vector()
        gaps = np.max(np.abs(psi - theta[None, :]), axis=1)
        k = int(np.argmin(gaps))
        rows.append(ResultRow("EXP-D", seed, n, h, "min_theta_dist", float(gaps[k]),
                              {"z_points": int(Z.shape[0]), "argmin_z": Z[k],
                               "rate_theta": float(model.rate(theta))}))
    return rows


def _z_param(cfg):
    z = cfg.params.get("z")
    if z is None:
        z = 0.5 * (cfg.density_obj.J_lo + cfg.density_obj.J_hi)
    return np.asarray(z, dtype=float).reshape(cfg.density_obj.d)


def _cell_diag_cov(cfg, seed, n):
    h = cfg.schedule_obj(n)
    rep = pz.covariance_check(cfg.density_obj, n, _z_param(cfg), h, cfg.net_obj, cfg.reps, seed)
    return [ResultRow("DIAG-COV", seed, n, h, "max_cov_deviation", rep["max_deviation"],
                      {"stderr": rep["stderr_at_max"], "max_stderr": rep["max_stderr"],
                       "theoretical": 0.0, "reps": cfg.reps, "deviation": rep["deviation"]})]


def _bound(x, missing):
    # null (whole bound or single entry) means unbounded on that side
    if x is None:
        return missing
    if isinstance(x, (list, tuple)):
        return np.array([_bound(v, missing) for v in x], dtype=float)
    return float(x)


def _event_bounds(ev):
    lo, hi = ev
    return _bound(lo, -np.inf), _bound(hi, np.inf)


def _cell_diag_fact6(cfg, seed, n):
    h = cfg.schedule_obj(n)
    events = [_event_bounds(ev) for ev in cfg.params["events"]]
    rep = pz.fact6_check(cfg.density_obj, n, cfg.params["z_list"], h, cfg.net_obj,
                         events, cfg.reps, seed)
    rows = []
    for i, e in enumerate(rep["events"]):
        rows.append(ResultRow("DIAG-FACT6", seed, n, h, f"event_{i:02d}", e["p_L"],
                              {"stderr": e["se_L"], "p_Pi": e["p_Pi"], "stderr_Pi": e["se_Pi"],
                               "theoretical": e["bound"], "holds": e["holds"],
                               "condition": rep["condition"]}))
    return rows


def _cell_diag_gauss(cfg, seed, n):
    res = pz.gaussian_compare(cfg.density_obj, [n], _z_param(cfg), cfg.schedule_obj,
                              cfg.net_obj, cfg.reps, seed)[0]
    null99 = 1.628 * math.sqrt(2.0 / cfg.reps)
    return [ResultRow("DIAG-GAUSS", seed, n, res["h"], "max_ks", res["max_ks"],
                      {"ks": res["ks"], "null_q99": null99, "reps": cfg.reps})]


def _cell_diag_ldp(cfg, seed, n):
    lam = float(cfg.params["lambda"])
    res = pz.ldp_tail_rate(cfg.density_obj, [n], _z_param(cfg), cfg.schedule_obj,
                           cfg.net_obj, lam, cfg.reps, seed)[0]
    aux = {"hits": res["hits"], "p_hat": res["p_hat"], "theoretical": res["theoretical"],
           "bound": res["bound"], "reps": cfg.reps}
    return [
        ResultRow("DIAG-LDP", seed, n, res["h"], "eps_log_p", res["value"], aux),
        ResultRow("DIAG-LDP", seed, n, res["h"], "ldp_abs_error",
                  abs(res["value"] - res["theoretical"]), aux),
    ]


_CELLS = {
    "EXP-A": _cell_exp_a, "EXP-B": _cell_exp_b, "EXP-C": _cell_exp_c, "EXP-D": _cell_exp_d,
    "DIAG-COV": _cell_diag_cov, "DIAG-FACT6": _cell_diag_fact6,
    "DIAG-GAUSS": _cell_diag_gauss, "DIAG-LDP": _cell_diag_ldp,
}


def _run_cell(doc, seed, n):
    cfg = ExperimentConfig.from_dict(doc)
    return _CELLS[cfg.experiment_id](cfg, seed, n)


def run_experiment(config, workers=1, out=None):
    """Run every ``(seed, n)`` cell and return the sorted rows.

    ``workers > 1`` distributes cells over processes; the rows are identical
    for any worker count. With ``out`` the rows are also written by
    :func:`emit`.
    """
    cfg = load_config(config)
    cells = cfg.cells()
    if workers is None or workers <= 1 or len(cells) == 1:
        parts = [_CELLS[cfg.experiment_id](cfg, s, n) for s, n in cells]
    else:
        doc = cfg.to_dict()
        with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            futures = [pool.submit(_run_cell, doc, s, n) for s, n in cells]
            parts = [f.result() for f in futures]
    rows = sorted((r for part in parts for r in part), key=ResultRow.key)
    if out is not None:
        emit(rows, out, cfg)
    return rows


def _runner(eid):
    def run(config, workers=1, out=None):
        cfg = load_config(config)
        if cfg.experiment_id != eid:
            raise ValueError(f"config is for {cfg.experiment_id}, not {eid}")
        return run_experiment(cfg, workers, out)
    run.__name__ = f"run_exp_{eid[-1].lower()}"
    run.__doc__ = f"Run an {eid} config; see :func:`run_experiment`."
    return run


run_exp_a = _runner("EXP-A")
run_exp_b = _runner("EXP-B")
run_exp_c = _runner("EXP-C")
run_exp_d = _runner("EXP-D")


def default_workers():
    return max(1, int(os.environ.get("LOCALEP_WORKERS", "1")))
