"""Batch experiments: simulate, learn kernels, reconstruct, evaluate, export."""
import csv
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sfmkl.evaluation import error_slice, evaluate_field, make_grid, write_slice_csv
from sfmkl.kernels import build_gram_set, default_bank, uniform_bank
from sfmkl.mkl import sparsity_fraction, solve_l1, solve_l2
from sfmkl.ridge import EstimatorState, fit_ridge, objective_J
from sfmkl.scene import observe

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ("frequency_hz", "method", "seed", "nmse_db", "sparsity", "num_weights",
                  "iterations", "converged", "objective")
SUMMARY_COLUMNS = ("frequency_hz", "method", "num_seeds", "nmse_db_mean", "nmse_db_min",
                   "nmse_db_max", "sparsity_mean", "iterations_mean")


class CaseError(RuntimeError):
    """A failure inside one (frequency, method, seed) case."""


def _g(x):
    """Round-trip-stable 9 significant digit float."""
    return float(f"{x:.9g}")


def _fmt(x):
    return f"{x:.9g}"


@dataclass
class CaseResult:
    frequency: float
    method: str
    seed: int
    nmse_db: float
    sparsity: float
    iterations: int
    converged: bool
    objective: float
    gamma: np.ndarray = field(repr=False)
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self):
        return {
            "frequency_hz": _g(self.frequency),
            "method": self.method,
            "seed": int(self.seed),
            "nmse_db": _g(self.nmse_db),
            "sparsity": _g(self.sparsity),
            "num_weights": int(len(self.gamma)),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "objective": _g(self.objective),
            "gamma": [_g(x) for x in self.gamma],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["frequency_hz"], d["method"], d["seed"], d["nmse_db"], d["sparsity"],
                   d["iterations"], d["converged"], d["objective"], np.asarray(d["gamma"], dtype=float))


@dataclass
class RunReport:
    name: str
    records: list
    methods: tuple = ()
    banks: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self):
        return len(self.records)

    def select(self, method=None, frequency=None):
        return [r for r in self.records
                if (method is None or r.method == method)
                and (frequency is None or np.isclose(r.frequency, frequency))]

    def aggregates(self):
        """Mean/min/max NMSE over seeds for each (frequency, method)."""
        groups = {}
        for r in self.records:
            groups.setdefault((r.frequency, r.method), []).append(r)
        rows = []
        for (freq, method), recs in groups.items():
            nm = np.array([r.nmse_db for r in recs])
            rows.append({
                "frequency_hz": _g(freq),
                "method": method,
                "num_seeds": len(recs),
                "nmse_db_mean": _g(nm.mean()),
                "nmse_db_min": _g(nm.min()),
                "nmse_db_max": _g(nm.max()),
                "sparsity_mean": _g(np.mean([r.sparsity for r in recs])),
                "iterations_mean": _g(np.mean([r.iterations for r in recs])),
            })
        return rows

    def mean_nmse(self, method, frequency):
        return float(np.mean([r.nmse_db for r in self.select(method, frequency)]))

    def to_dict(self):
        return {"name": self.name, "methods": list(self.methods),
                "records": [r.to_dict() for r in self.records]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["name"], [CaseResult.from_dict(r) for r in d["records"]], tuple(d.get("methods", ())))


def make_bank(config, method, k):
    if method == "uniform":
        return uniform_bank(k)
    b = config.bank
    return default_bank(b.d_eta, b.d_beta, k, beta_start=b.beta_start, beta_step=b.beta_step,
                        zeniths=b.zeniths)


def fit_method(method, gram_set, s, config):
    """Learn weights (if any) and return ``(EstimatorState, iterations, converged, J)``."""
    if method == "uniform":
        gamma = np.ones(1)
        state = fit_ridge(gram_set, gamma, s, config.lam)
        J = objective_J(gram_set, gamma, s, config.lam)
        return state, 0, True, J
    solver = solve_l1 if method == "l1" else solve_l2
    opts = config.l1 if method == "l1" else config.l2
    res = solver(gram_set, s, config.lam, opts)
    state = EstimatorState(res.alpha, gram_set.mic_array, gram_set.bank, res.gamma)
    return state, res.iterations, res.converged, objective_J(gram_set, res.gamma, s, config.lam)


def run_case(config, frequency, seed, gram_sets, grid, mic_array, slice_dir=None):
    """All methods for one (frequency, seed) pair."""
    obs = observe(config.scene, mic_array, frequency, config.snr_db, seed)
    out = []
    for method in config.methods:
        try:
            t0 = time.perf_counter()
            gs = gram_sets[method]
            state, iters, conv, J = fit_method(method, gs, obs.values, config)
            ev = evaluate_field(state, config.scene, frequency, grid)
            wall = time.perf_counter() - t0
            out.append(CaseResult(frequency, method, seed, ev.nmse_db, sparsity_fraction(state.gamma),
                                  iters, conv, J, state.gamma.copy(), wall))
            if slice_dir is not None:
                for plane in config.slices:
                    sl = error_slice(state, config.scene, frequency, plane, config.grid_spacing)
                    write_slice_csv(Path(slice_dir) / slice_filename(plane, frequency, method, seed), sl,
                                    value="full")
        except Exception as exc:
            raise CaseError(f"frequency={frequency:g} Hz, method={method}, seed={seed}: {exc}") from exc
    return out


def slice_filename(plane, frequency, method, seed):
    tag = plane.replace("=", "").replace(" ", "").replace("-", "m").replace(".", "p")
    return f"slice_{tag}_{frequency:g}_{method}_{seed}.csv"


def run_experiment(config, threads=1, slice_dir=None):
    """Run every (frequency, method, seed) case of ``config``.

    Cases for different (frequency, seed) pairs run concurrently when
    ``threads > 1``; the record order is always frequency, then method
    (in config order), then seed.
    """
    mic_array = config.mic_array()
    grid = make_grid(config.scene.target_region, config.grid_spacing)
    gram_cache = {}
    banks = {}
    for freq in config.frequencies:
        k = config.scene.wavenumber(freq)
        gram_cache[freq] = {}
        for method in config.methods:
            key = "uniform" if method == "uniform" else "learned"
            if key not in banks.get(freq, {}):
                bank = make_bank(config, method, k)
                banks.setdefault(freq, {})[key] = (bank, build_gram_set(mic_array, bank))
            gram_cache[freq][method] = banks[freq][key][1]

    cases = [(f, s) for f in config.frequencies for s in config.seeds]

    def work(case):
        f, s = case
        return run_case(config, f, s, gram_cache[f], grid, mic_array, slice_dir)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, cases))
    else:
        results = [work(c) for c in cases]

    records = [r for batch in results for r in batch]
    order = {m: i for i, m in enumerate(config.methods)}
    records.sort(key=lambda r: (r.frequency, order[r.method], r.seed))
    return RunReport(config.name, records, tuple(config.methods),
                     banks={f: {k: v[0] for k, v in d.items()} for f, d in banks.items()})


def _write_rows(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row[c]) for c in columns])


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt(v)
    return str(v)


def gamma_filename(frequency, method, seed):
    return f"gamma_{frequency:g}_{method}_{seed}.csv"


def write_gamma_csv(path, gamma, bank=None):
    rows = []
    for i, g in enumerate(gamma):
        row = {"index": i, "gamma": float(g)}
        if bank is not None:
            p = bank.params[i]
            row.update(azimuth_deg=float(np.rad2deg(p.azimuth)), zenith_deg=float(np.rad2deg(p.zenith)),
                       beta=float(p.beta))
        rows.append(row)
    cols = ("index", "azimuth_deg", "zenith_deg", "beta", "gamma") if bank is not None else ("index", "gamma")
    _write_rows(path, cols, rows)


def write_report_csv(path, records):
    _write_rows(path, REPORT_COLUMNS, (r.to_dict() for r in records))


def write_summary_csv(path, rows):
    _write_rows(path, SUMMARY_COLUMNS, rows)


def dumps_report_json(report):
    return json.dumps(report.to_dict(), indent=2, sort_keys=False) + "\n"


def export_report(report, out_dir, fmt="csv"):
    """Write the report files into ``out_dir`` and return their paths.

    ``report.csv`` (or ``report.json``), ``summary.csv`` and one
    ``gamma_<freq>_<method>_<seed>.csv`` per case are deterministic for a
    given configuration. Wall-clock times go to ``timing.csv`` only.
    """
    if fmt not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths = []
    if fmt == "csv":
        p = out / "report.csv"
        write_report_csv(p, report.records)
    else:
        p = out / "report.json"
        p.write_text(dumps_report_json(report))
    paths.append(p)
    p = out / "summary.csv"
    write_summary_csv(p, report.aggregates())
    paths.append(p)
    for r in report.records:
        bank = None
        key = "uniform" if r.method == "uniform" else "learned"
        if r.frequency in report.banks:
            bank = report.banks[r.frequency].get(key)
        p = out / gamma_filename(r.frequency, r.method, r.seed)
        write_gamma_csv(p, r.gamma, bank)
        paths.append(p)
    p = out / "timing.csv"
    _write_rows(p, ("frequency_hz", "method", "seed", "wall_time_s"),
                ({"frequency_hz": _g(r.frequency), "method": r.method, "seed": r.seed,
                  "wall_time_s": float(r.wall_time)} for r in report.records))
    paths.append(p)
    return paths


def load_report_json(path):
    return RunReport.from_dict(json.loads(Path(path).read_text()))
