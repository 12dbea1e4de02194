"""Command-line front end and experiment harness.

Usage::

    normrays theorem1 --config exp.yaml --out results/
    normrays suite hermlab-metrics --seed 1
    normrays toric --p 1,2,inf --tmax 40

Every verb writes a JSON report (and CSV tables where there are any) to
``--out`` and exits with status 0 exactly when all of its checks pass.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import hermlab, filtrations, measures, rays, secring, toricgeo, toeplitz

logger = logging.getLogger("normrays")

SCHEMA_VERSION = 1
DEFAULT_TOL = 0.05

# named weight profiles g on [0, 1]: degree-k weights k g(a/k)
PROFILES = {
    "trivial": (lambda y: 0.0 * np.asarray(y, float), lambda y: 0.0 * np.asarray(y, float), ()),
    "linear": (lambda y: np.asarray(y, float), lambda y: 1.0 + 0.0 * np.asarray(y, float), ()),
    "reversed": (lambda y: 1.0 - np.asarray(y, float), lambda y: -1.0 + 0.0 * np.asarray(y, float), ()),
    "tent": (lambda y: np.minimum(np.asarray(y, float), 1.0 - np.asarray(y, float)),
             lambda y: np.where(np.asarray(y, float) < 0.5, 1.0, -1.0), (0.5,)),
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------


def _parse_p(value) -> float:
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("inf", ".inf", "infinity"):
            return math.inf
        return float(v)
    return float(value)


def _p_label(p: float) -> str:
    return "inf" if math.isinf(p) else f"{p:g}"


@dataclass
class ExperimentConfig:
    """Validated experiment description.

    Attributes
    ----------
    experiment : str
    kmax, kmin : int
    t_grid : list of float
    p_list : list of float
    filtrations : dict
        ``name -> {"kind": "profile", "name": ...}`` or
        ``{"kind": "table", "weights": {k: [...]}}``.
    metric : dict
        ``{"kind": "fubini_study"}``.
    tolerance : float
    expected : str or None
        ``"power_mean_uniform"`` compares with ``(1/(p+1))^{1/p}``.
    seed : int
    """

    experiment: str = "theorem1"
    kmax: int = 24
    kmin: int = 2
    t_grid: list = field(default_factory=lambda: [1.0, 5.0, 10.0, 20.0, 40.0])
    p_list: list = field(default_factory=lambda: [1.0, 2.0, 4.0, math.inf])
    filtrations: dict = field(default_factory=lambda: {"F1": {"kind": "profile", "name": "linear"},
                                                       "F2": {"kind": "profile", "name": "trivial"}})
    metric: dict = field(default_factory=lambda: {"kind": "fubini_study"})
    tolerance: float = DEFAULT_TOL
    expected: str | None = "power_mean_uniform"
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
        known = {"schema_version", "experiment", "kmax", "kmin", "t_grid", "p", "filtrations", "metric",
                 "tolerance", "expected", "seed"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown keys: {sorted(extra)}")
        cfg = cls()
        cfg.experiment = str(data.get("experiment", cfg.experiment))
        cfg.kmax = int(data.get("kmax", cfg.kmax))
        cfg.kmin = int(data.get("kmin", cfg.kmin))
        cfg.t_grid = [float(t) for t in data.get("t_grid", cfg.t_grid)]
        cfg.p_list = [_parse_p(p) for p in data.get("p", cfg.p_list)]
        cfg.filtrations = dict(data.get("filtrations", cfg.filtrations))
        cfg.metric = dict(data.get("metric", cfg.metric))
        cfg.tolerance = float(data.get("tolerance", cfg.tolerance))
        cfg.expected = data.get("expected", cfg.expected)
        cfg.seed = int(data.get("seed", cfg.seed))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def validate(self):
        if not 1 <= self.kmin <= self.kmax:
            raise ConfigError("need 1 <= kmin <= kmax")
        if not self.t_grid or min(self.t_grid) <= 0:
            raise ConfigError("t_grid must be nonempty and positive")
        if any(p < 1 for p in self.p_list):
            raise ConfigError("p values must be >= 1")
        if set(self.filtrations) != {"F1", "F2"}:
            raise ConfigError("filtrations must define exactly F1 and F2")
        for name, spec in self.filtrations.items():
            _filtration_from_spec(spec)
        if self.metric.get("kind") != "fubini_study":
            raise ConfigError("only the fubini_study base metric is supported")
        if self.expected not in (None, "power_mean_uniform"):
            raise ConfigError(f"unknown expected value rule {self.expected!r}")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "kmax": self.kmax,
            "kmin": self.kmin,
            "t_grid": list(self.t_grid),
            "p": [_p_label(p) for p in self.p_list],
            "filtrations": self.filtrations,
            "metric": self.metric,
            "tolerance": self.tolerance,
            "expected": self.expected,
            "seed": self.seed,
        }


def _filtration_from_spec(spec: dict):
    """``(MonomialFiltration, profile or None)`` from a config entry."""
    kind = spec.get("kind")
    if kind == "profile":
        name = spec.get("name")
        if name not in PROFILES:
            raise ConfigError(f"unknown profile {name!r}; known: {sorted(PROFILES)}")
        g, dg, kinks = PROFILES[name]
        return secring.MonomialFiltration.from_profile(g, name), (g, dg, kinks)
    if kind == "table":
        table = {int(k): np.asarray(v, float) for k, v in spec.get("weights", {}).items()}
        for k, w in table.items():
            if w.size != k + 1:
                raise ConfigError(f"weight table for degree {k} needs {k + 1} entries")

        def fn(k, a, table=table):
            if k not in table:
                raise ConfigError(f"no weights given for degree {k}")
            return table[k][np.asarray(a, int)]

        return secring.MonomialFiltration(fn, "table"), None
    raise ConfigError(f"unknown filtration kind {kind!r}")


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


@dataclass
class Report:
    """Structured result of a verb: named tables, checks and metadata."""

    name: str
    tables: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def check(self, name: str, value: float, bound: float, kind: str = "le", note: str = "") -> bool:
        """Record ``value <= bound`` (``kind="le"``) or ``value >= bound`` (``"ge"``)."""
        ok = value <= bound if kind == "le" else value >= bound
        if not np.isfinite(value):
            ok = False
        margin = (bound - value) if kind == "le" else (value - bound)
        self.checks.append({"check": name, "value": _num(value), "bound": _num(bound), "margin": _num(margin),
                            "passed": bool(ok), "note": note})
        return ok

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {"name": self.name, "version": __version__, "passed": self.passed, "meta": self.meta,
                "checks": self.checks, "tables": self.tables}


def _num(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def to_json(report: Report) -> str:
    return json.dumps(_clean(report.to_dict()), indent=2, sort_keys=True) + "\n"


def table_to_csv(rows: list) -> str:
    """CSV with the header taken from the first row's keys (in order)."""
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()})
    return buf.getvalue()


def emit(report: Report, out_dir, fmt: str = "both") -> list:
    """Write ``<name>.json`` and one ``<name>_<table>.csv`` per table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        path = out / f"{report.name}.json"
        path.write_text(to_json(report), encoding="utf-8")
        written.append(path)
    if fmt in ("csv", "both"):
        for tname, rows in report.tables.items():
            path = out / f"{report.name}_{tname}.csv"
            path.write_text(table_to_csv(rows), encoding="utf-8")
            written.append(path)
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    return written


# --------------------------------------------------------------------------
# Theorem 1 pipeline
# --------------------------------------------------------------------------


def _expected_value(rule, p: float):
    if rule == "power_mean_uniform":
        return 1.0 if math.isinf(p) else (1.0 / (p + 1.0)) ** (1.0 / p)
    return None


def _rel_gap(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-12)


def _tail_flag(values, tol: float) -> bool:
    """Last two entries agree to ``tol`` (relative)."""
    if len(values) < 2:
        return True
    a, b = values[-2], values[-1]
    return abs(a - b) <= tol * max(abs(b), 1e-12) or abs(a - b) <= 1e-12


def run_theorem1(cfg: ExperimentConfig) -> Report:
    """Algebraic, quantized and analytic chordal traces for a filtration pair.

    * algebraic: ``d_p(F1_k, F2_k) / k`` for ``k = kmin..kmax``;
    * quantized: ``d_p(H1_{t,k}, H2_{t,k}) / (k t)`` for the rays of norms
      started at ``Hilb_k`` of the base metric;
    * analytic: chordal slope of the toric rays ``u_0 - 2 t g_i``;
    * fs: the same distance between the metrics ``FS(H_{t,k})^{1/k}``.

    The final comparison uses ``k = kmax`` and ``t = max(t_grid)``.
    """
    report = Report("theorem1", meta={"config": cfg.to_dict()})
    f1, prof1 = _filtration_from_spec(cfg.filtrations["F1"])
    f2, prof2 = _filtration_from_spec(cfg.filtrations["F2"])
    h0 = secring.fubini_study()
    hilb = secring.hilb_graded(h0)
    ks = list(range(cfg.kmin, cfg.kmax + 1))
    ts = sorted(cfg.t_grid)
    t_max = ts[-1]

    alg, quant, ana, fsq = [], [], [], []
    finals = {}
    for p in cfg.p_list:
        pl = _p_label(p)
        a_vals = []
        for k in ks:
            w1, w2 = f1.weights(k), f2.weights(k)
            val = filtrations.dp_filtrations(filtrations.Filtration.diagonal(w1), filtrations.Filtration.diagonal(w2), p) / k
            a_vals.append(val)
            alg.append({"p": pl, "k": k, "value": val})
        q_vals = {}
        for k in (ks[-1],) if len(ks) > 6 else ks:
            base = hermlab.HermNorm.diag(np.exp(hilb(k).log_gram))
            r1 = rays.HermRay(base, f1.piece(k))
            r2 = rays.HermRay(base, f2.piece(k))
            for t in ts:
                val = rays.chordal_slope(r1, r2, p, t) / k
                q_vals[(k, t)] = val
                quant.append({"p": pl, "k": k, "t": t, "value": val})
        # a coarse k-sweep at t_max for the quantized trace
        for k in ks[:: max(1, len(ks) // 6)]:
            if (k, t_max) in q_vals:
                continue
            base = hermlab.HermNorm.diag(np.exp(hilb(k).log_gram))
            val = rays.chordal_slope(rays.HermRay(base, f1.piece(k)), rays.HermRay(base, f2.piece(k)), p, t_max) / k
            q_vals[(k, t_max)] = val
            quant.append({"p": pl, "k": k, "t": t_max, "value": val})
        an_val = None
        if prof1 is not None and prof2 is not None:
            ray1 = toricgeo.toric_filtration_ray(prof1[0], prof1[1], h0, kinks=prof1[2], label="F1")
            ray2 = toricgeo.toric_filtration_ray(prof2[0], prof2[1], h0, kinks=prof2[2], label="F2")
            tr = toricgeo.chordal_dp_toric(ray1, ray2, p, ts)
            for t, s in zip(tr.ts, tr.slopes):
                ana.append({"p": pl, "t": float(t), "value": float(s)})
            an_val = tr.limit
        k = ks[-1]
        fs_vals = []
        for t in ts:
            m1 = secring.phong_sturm_ray(f1, h0, t, ls=[k]).metric
            m2 = secring.phong_sturm_ray(f2, h0, t, ls=[k]).metric
            val = 0.5 * toricgeo.toric_dp(m1, m2, p) / t
            fs_vals.append(val)
            fsq.append({"p": pl, "k": k, "t": t, "value": val})

        final = {"algebraic": a_vals[-1], "quantized": q_vals[(ks[-1], t_max)], "fs": fs_vals[-1],
                 "analytic": an_val, "expected": _expected_value(cfg.expected, p)}
        finals[pl] = final
        report.meta.setdefault("convergence_flags", {})[pl] = {
            "algebraic_tail": _tail_flag(a_vals, cfg.tolerance),
            "fs_tail": _tail_flag(fs_vals, cfg.tolerance),
        }
        names = [n for n in ("algebraic", "quantized", "fs", "analytic") if final[n] is not None]
        ref = final["expected"] if final["expected"] is not None else final["algebraic"]
        for n in names:
            if final["expected"] is None and n == "algebraic":
                continue
            report.check(f"{n}[p={pl}] vs {'expected' if final['expected'] is not None else 'algebraic'}",
                         _rel_gap(final[n], ref), cfg.tolerance)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                report.check(f"{a} vs {b} [p={pl}]", _rel_gap(final[a], final[b]), cfg.tolerance)
    report.tables = {"algebraic": alg, "quantized": quant, "analytic": ana, "fs": fsq}
    report.meta["final"] = finals
    return report


# --------------------------------------------------------------------------
# Invariant suites
# --------------------------------------------------------------------------


def _suite_hermlab(rng, report, kmax, tmax):
    rows = []
    for n in (2, 3, 5):
        for _ in range(10):
            h0, h1, h2 = (hermlab.random_herm(n, rng) for _ in range(3))
            for p in (1.0, 2.0, math.inf):
                d01 = hermlab.dp_distance(h0, h1, p)
                sym = abs(d01 - hermlab.dp_distance(h1, h0, p))
                tri = d01 - hermlab.dp_distance(h0, h2, p) - hermlab.dp_distance(h2, h1, p)
                t = rng.uniform(0, 1)
                speed = abs(hermlab.dp_distance(h0, hermlab.geodesic(h0, h1, t), p) - t * d01)
                rows.append({"dim": n, "p": _p_label(p), "d": d01, "symmetry": sym, "triangle": tri, "speed": speed})
    report.tables["metrics"] = rows
    report.check("symmetry", max(r["symmetry"] for r in rows), 1e-12)
    report.check("triangle slack", max(r["triangle"] for r in rows), 1e-9)
    report.check("geodesic speed", max(r["speed"] for r in rows), 1e-9)


def _suite_filtrations(rng, report, kmax, tmax):
    worst = 0.0
    rows = []
    for n in (2, 3, 4, 5):
        f1 = filtrations.random_filtration(n, rng, integer=True, spread=3)
        f2 = filtrations.random_filtration(n, rng, integer=True, spread=3)
        jb = filtrations.joint_diagonalize(f1, f2)
        d = filtrations.dp_filtrations(f1, f2, 2.0)
        for i in range(n):
            v = jb.vectors[:, i]
            worst = max(worst, abs(filtrations.weight(f1, v) - jb.w1[i]), abs(filtrations.weight(f2, v) - jb.w2[i]))
        rows.append({"dim": n, "d2": d, "certificate_pairs": len(jb.certificate)})
    report.tables["joint"] = rows
    report.check("joint basis weights", worst, 1e-9)


def _suite_rays(rng, report, kmax, tmax):
    rows = []
    worst_rel, worst_mono, worst_up = 0.0, -math.inf, -math.inf
    for n in (2, 3, 4, 5):
        for _ in range(3):
            base = hermlab.random_herm(n, rng)
            r0 = rays.HermRay(base, filtrations.random_filtration(n, rng, integer=True, spread=3))
            r1 = rays.HermRay(base, filtrations.random_filtration(n, rng, integer=True, spread=3))
            tr = rays.chordal_trace(r0, r1, 2.0, [1.0, 5.0, 20.0, tmax])
            rows.extend({"dim": n, **row} for row in tr.rows())
            worst_rel = max(worst_rel, abs(tr.slopes[-1] - tr.limit) / max(tr.limit, 1e-12))
            worst_mono = max(worst_mono, tr.monotone_violation)
            worst_up = max(worst_up, tr.upper_violation)
    report.tables["slopes"] = rows
    report.check("slope at tmax vs limit (relative)", worst_rel, 0.05)
    report.check("Buseman monotonicity", worst_mono, 1e-9)
    report.check("finite-t upper bound", worst_up, 1e-9)


def _suite_secring(rng, report, kmax, tmax):
    h0 = secring.fubini_study()
    ks = list(range(2, kmax + 1))
    gaps = []
    for k in ks:
        lg = secring.hilb_log_diag(h0, k)
        gaps.append(float(np.max(np.abs(lg - np.log(secring.hilb_fs_exact(k))))))
    report.check("Hilb_k(FS) closed form", max(gaps), 1e-8)
    lin, triv = secring.MonomialFiltration.linear(), secring.MonomialFiltration.trivial()
    rows = []
    ray_lin, ray_tr = toricgeo.linear_ray(h0), toricgeo.trivial_ray(h0)
    worst = 0.0
    for p in (1.0, 2.0):
        t = tmax
        m1 = secring.phong_sturm_ray(lin, h0, t, ls=[kmax]).metric
        m2 = secring.phong_sturm_ray(triv, h0, t, ls=[kmax]).metric
        quant = 0.5 * toricgeo.toric_dp(m1, m2, p)
        exact = 0.5 * toricgeo.toric_dp(ray_lin.at(t), ray_tr.at(t), p)
        rows.append({"p": _p_label(p), "k": kmax, "t": t, "quantized": quant, "analytic": exact})
        worst = max(worst, _rel_gap(quant, exact))
    report.tables["isometry"] = rows
    report.check("quantized vs analytic d_p", worst, 0.05)


def _suite_toric(rng, report, kmax, tmax):
    h0 = secring.fubini_study()
    worst = 0.0
    for _ in range(5):
        s = rng.uniform(-3, 3)
        h1 = h0.translated(s)
        worst = max(worst, toricgeo.pythagorean_residual(h0, h1, 2.0))
    report.check("Pythagorean residual (translates)", worst, 1e-3)
    worst = 0.0
    for _ in range(5):
        worst = max(worst, toricgeo.pythagorean_residual(toricgeo.random_toric_metric(rng),
                                                         toricgeo.random_toric_metric(rng), 2.0))
    report.check("Pythagorean residual (random pairs)", worst, 1e-3)
    report.check("biduality", toricgeo.biduality_error(h0), 1e-8)


def _suite_measures(rng, report, kmax, tmax):
    lin, triv = secring.MonomialFiltration.linear(), secring.MonomialFiltration.trivial()
    ks = list(range(1, kmax + 1))
    tr = measures.weak_convergence_trace(lambda k: measures.graded_spectral_measure(lin, triv, k), ks, "uniform")
    report.tables["w1"] = list(tr.rows())
    report.check("W1 to Lebesgue times k", float(np.max(tr.to_reference * np.array(ks))), 2.0)
    worst = 0.0
    for k in ks:
        mu = measures.graded_spectral_measure(lin, triv, k)
        for p in (1.0, 2.0, 3.0):
            d = hermlab.p_mean(lin.weights(k) - triv.weights(k), p) / k
            worst = max(worst, abs(mu.moment(p) - d))
    report.check("moment/distance identity", worst, 1e-12)


def _suite_toeplitz(rng, report, kmax, tmax):
    base = secring.from_symplectic(secring.FS_DATA.add(lambda y: 0.3 * y**3, lambda y: 0.9 * y**2, lambda y: 1.8 * y))
    fs = {"y": lambda y: y, "cos": lambda y: np.cos(np.pi * y), "exp": lambda y: np.exp(-y)}
    k = max(2 * kmax, 16)
    tr = toeplitz.trace_asymptotics(fs, [k], {1.0: base})
    report.tables["traces"] = tr.rows
    report.check(f"trace deviation at k={k}", tr.max_deviation, 0.02)
    jm = toeplitz.jensen_toeplitz_check(lambda y, th: np.sin(th) + y - 0.3, 3.0, min(k, 16), base)
    report.check("Jensen margin", jm.margin, -1e-9, kind="ge")


SUITES = {
    "empty": lambda *a: None,
    "hermlab-metrics": _suite_hermlab,
    "filtrations-joint": _suite_filtrations,
    "rays-buseman": _suite_rays,
    "secring-isometry": _suite_secring,
    "toric-geodesics": _suite_toric,
    "measures-convergence": _suite_measures,
    "toeplitz-traces": _suite_toeplitz,
}

VERB_SUITES = {
    "norms": "hermlab-metrics",
    "filtrations": "filtrations-joint",
    "rays": "rays-buseman",
    "secring": "secring-isometry",
    "toric": "toric-geodesics",
    "measures": "measures-convergence",
    "toeplitz": "toeplitz-traces",
}


def run_suite(name: str, seed: int = 0, kmax: int = 8, tmax: float = 100.0) -> Report:
    """Run a named invariant suite; the report records per-check margins."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {sorted(SUITES)}")
    report = Report(f"suite_{name}", meta={"suite": name, "seed": seed, "kmax": kmax, "tmax": tmax})
    rng = np.random.default_rng(seed)
    SUITES[name](rng, report, kmax, tmax)
    return report


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normrays", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, help="YAML experiment file")
        sp.add_argument("--out", type=Path, default=Path("normrays-out"), help="output directory")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--kmax", type=int, default=None)
        sp.add_argument("--tmax", type=float, default=None)
        sp.add_argument("--p", type=str, default=None, help="comma-separated p values, e.g. 1,2,inf")
        sp.add_argument("--format", choices=("json", "csv", "both"), default="both")
        sp.add_argument("-v", "--verbose", action="store_true")

    for verb in list(VERB_SUITES) + ["theorem1"]:
        common(sub.add_parser(verb))
    sp = sub.add_parser("suite")
    sp.add_argument("name", choices=sorted(SUITES))
    common(sp)
    return parser


def _config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.kmax is not None:
        cfg.kmax = args.kmax
    if args.tmax is not None:
        cfg.t_grid = [t for t in cfg.t_grid if t < args.tmax] + [args.tmax]
    if args.p is not None:
        cfg.p_list = [_parse_p(x) for x in args.p.split(",")]
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    start = time.perf_counter()
    try:
        if args.verb == "theorem1":
            report = run_theorem1(_config_from_args(args))
        else:
            name = args.name if args.verb == "suite" else VERB_SUITES[args.verb]
            cfg = _config_from_args(args) if args.config else None
            seed = args.seed if args.seed is not None else (cfg.seed if cfg else 0)
            kmax = args.kmax if args.kmax is not None else (cfg.kmax if cfg else 8)
            tmax = args.tmax if args.tmax is not None else 100.0
            report = run_suite(name, seed=seed, kmax=kmax, tmax=tmax)
        emit(report, args.out, args.format)
    except (ConfigError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    logger.info("finished in %.1f s", time.perf_counter() - start)
    for c in report.checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['check']}  value={c['value']}  bound={c['bound']}")
    print(f"{report.name}: {'PASS' if report.passed else 'FAIL'} ({len(report.checks)} checks)")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
