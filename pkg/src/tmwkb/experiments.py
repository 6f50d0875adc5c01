"""Energy sweeps, error analysis against exact references, and step-count studies."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import ConfigError, TunnelingError
from .exact import TcResult, exact_tc, has_exact, wkb_tc
from .polar import DEFAULT_STEPS as DE_DEFAULT_STEPS
from .polar import compute_tc_de
from .potentials import Potential
from .transfer import compute_tc_tm

log = logging.getLogger(__name__)

TM_METHODS = ("tm-pw", "tm-wkb1", "tm-wkb3")
DE_METHODS = ("de-pw", "de-wkb")
NUMERICAL_METHODS = TM_METHODS + DE_METHODS
METHODS = NUMERICAL_METHODS + ("wkb-formula", "exact")
AVERAGES = ("mean", "geomean", "median")

# energies whose exact TC falls below this are left out of averages
EXACT_FLOOR = 1e-12
# the three improvement ratios quoted for the parabola
HEADLINE_RATIOS = (("tm-pw", "tm-wkb1"), ("tm-wkb1", "tm-wkb3"), ("tm-pw", "tm-wkb3"))

TC_HEADER = ("energy_J", "method", "n_steps", "tc")
ERROR_HEADER = ("energy_J", "method", "n_steps", "tc", "tc_exact", "rel_error")


@dataclass(frozen=True)
class SweepConfig:
    """One method evaluated over a uniform energy grid.

    ``n_steps`` counts transfer-matrix segments; DE methods use ``de_steps``
    integrator steps instead.
    """

    potential: Potential
    method: str
    n_steps: int = 100_000
    e_min: float = -2e-19
    e_max: float = 2e-19
    e_points: int = 101
    de_steps: int = DE_DEFAULT_STEPS
    out: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.e_points < 2:
            raise ConfigError(f"energy grid needs at least 2 points, got {self.e_points}")
        if not (math.isfinite(self.e_min) and math.isfinite(self.e_max)) or self.e_max <= self.e_min:
            raise ConfigError(f"energy grid must be increasing, got [{self.e_min}, {self.e_max}]")
        if self.n_steps < 1 or self.de_steps < 1:
            raise ConfigError("step counts must be positive")

    @property
    def energies(self) -> np.ndarray:
        # convex combination keeps the endpoints exact and the midpoint of a symmetric grid at 0
        t = np.arange(self.e_points) / (self.e_points - 1)
        return self.e_min * (1.0 - t) + self.e_max * t

    @property
    def steps(self) -> int:
        """Step count recorded in output rows (0 for analytic methods)."""
        if self.method in TM_METHODS:
            return self.n_steps
        if self.method in DE_METHODS:
            return self.de_steps
        return 0

    def with_method(self, method: str, **changes) -> "SweepConfig":
        return replace(self, method=method, **changes)


def evaluate(potential: Potential, method: str, energy: float, n_steps: int) -> TcResult:
    """Transmission at one energy. Raises on failure."""
    energy = float(energy)
    if method in TM_METHODS:
        return compute_tc_tm(potential, energy, n_steps, method[3:])
    if method in DE_METHODS:
        return compute_tc_de(potential, energy, method[3:], n_steps)
    if method == "wkb-formula":
        return TcResult(energy, wkb_tc(potential, energy), method)
    if method == "exact":
        return TcResult(energy, exact_tc(potential, energy), method)
    raise ConfigError(f"unknown method {method!r}")


def _safe_evaluate(args: tuple[Potential, str, float, int]) -> TcResult:
    potential, method, energy, n_steps = args
    try:
        return evaluate(potential, method, energy, n_steps)
    except (TunnelingError, ArithmeticError, ValueError) as exc:
        log.warning("%s failed at E=%g J: %s", method, energy, exc)
        return TcResult(float(energy), float("nan"), method, n_steps, f"{type(exc).__name__}: {exc}")


def _map(tasks: list, workers: int) -> list[TcResult]:
    if workers <= 1 or len(tasks) < 2:
        return [_safe_evaluate(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_safe_evaluate, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def run_tc_sweep(config: SweepConfig, *, workers: int = 1) -> list[TcResult]:
    """One row per energy in increasing order. Failures become rows with ``tc = nan``."""
    if config.method == "exact" and not has_exact(config.potential):
        exact_tc(config.potential, 0.0)  # raises with the supported list
    tasks = [(config.potential, config.method, e, config.steps) for e in config.energies]
    return _map(tasks, workers)


@dataclass(frozen=True)
class ErrorRow:
    energy: float
    method: str
    n_steps: int
    tc: float
    tc_exact: float
    rel_error: float
    error: str = ""


@dataclass
class ErrorReport:
    rows: list[ErrorRow]
    averages: dict[str, float]
    ratios: dict[str, float] = field(default_factory=dict)
    average: str = "mean"

    def ratio(self, worse: str, better: str) -> float:
        return self.averages[worse] / self.averages[better]

    def errors(self, method: str) -> np.ndarray:
        return np.array([r.rel_error for r in self.rows if r.method == method])

    def summary(self) -> dict:
        return {"average": self.average, "averages": dict(self.averages), "ratios": dict(self.ratios)}


def _require_exact(potential: Potential) -> None:
    if not has_exact(potential):
        exact_tc(potential, 0.0)


def error_rows(results: Iterable[TcResult], potential: Potential) -> list[ErrorRow]:
    """Relative error ``|TC - TC_exact| / TC_exact`` for each result."""
    rows = []
    for res in results:
        ref = exact_tc(potential, res.energy)
        rel = abs(res.tc - ref) / ref if ref > 0 else float("nan")
        rows.append(ErrorRow(res.energy, res.method, res.n_steps, res.tc, ref, rel, res.error))
    return rows


def average_error(rows: Iterable[ErrorRow], how: str = "mean") -> float:
    """Energy average over successful rows with ``TC_exact >= EXACT_FLOOR``.

    ``geomean`` skips exact zeros since their logarithm is undefined.
    """
    vals = np.array([r.rel_error for r in rows if not r.error and r.tc_exact >= EXACT_FLOOR and math.isfinite(r.rel_error)])
    if how not in AVERAGES:
        raise ConfigError(f"unknown average {how!r}; choose from {', '.join(AVERAGES)}")
    if vals.size == 0:
        return float("nan")
    if how == "mean":
        return float(np.mean(vals))
    if how == "median":
        return float(np.median(vals))
    pos = vals[vals > 0]
    return float(np.exp(np.mean(np.log(pos)))) if pos.size else 0.0


def run_error_analysis(
    configs: Sequence[SweepConfig], *, average: str = "mean", workers: int = 1
) -> ErrorReport:
    """Sweep each config and compare against the exact reference.

    All configs must share the potential and energy grid so the ratios
    compare like with like. ``ratios`` holds ``"a/b" -> avg(a) / avg(b)`` for
    every ordered pair of methods present.
    """
    if not configs:
        raise ConfigError("no methods to analyse")
    first = configs[0]
    for c in configs[1:]:
        if c.potential != first.potential or (c.e_min, c.e_max, c.e_points) != (first.e_min, first.e_max, first.e_points):
            raise ConfigError("error analysis needs a common potential and energy grid")
    methods = [c.method for c in configs]
    if len(set(methods)) != len(methods):
        raise ConfigError("duplicate methods in error analysis")
    if average not in AVERAGES:
        raise ConfigError(f"unknown average {average!r}; choose from {', '.join(AVERAGES)}")
    _require_exact(first.potential)

    rows: list[ErrorRow] = []
    averages = {}
    for c in configs:
        mrows = error_rows(run_tc_sweep(c, workers=workers), c.potential)
        averages[c.method] = average_error(mrows, average)
        rows.extend(mrows)
    ratios = {f"{a}/{b}": averages[a] / averages[b] for a in methods for b in methods if a != b and averages[b] > 0}
    return ErrorReport(rows, averages, ratios, average)


def run_n_sweep(
    config: SweepConfig,
    n_list: Sequence[int],
    *,
    include_de: bool = True,
    average: str = "mean",
    workers: int = 1,
) -> tuple[list[ErrorRow], dict[tuple[str, int], float]]:
    """Error of ``config.method`` at each step count, plus a DE-WKB reference.

    Returns the per-energy rows and the averaged error keyed by ``(method, N)``.
    """
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise ConfigError("empty step-count list")
    if any(n < 1 for n in n_list) or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError(f"step counts must be positive and strictly ascending, got {n_list}")
    if config.method not in NUMERICAL_METHODS:
        raise ConfigError(f"step-count sweep needs a numerical method, got {config.method!r}")
    _require_exact(config.potential)

    # only the count that matters for the method ends up in the rows
    runs = [config.with_method(config.method, n_steps=n, de_steps=n) for n in n_list]
    if include_de and config.method != "de-wkb":
        runs.append(config.with_method("de-wkb"))
    rows: list[ErrorRow] = []
    averaged = {}
    for c in runs:
        mrows = error_rows(run_tc_sweep(c, workers=workers), c.potential)
        averaged[(c.method, c.steps)] = average_error(mrows, average)
        rows.extend(mrows)
    return rows, averaged


def _fmt(x: float) -> str:
    return f"{x:.16e}" if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def write_tc_csv(results: Iterable[TcResult], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(TC_HEADER)
    for r in results:
        w.writerow((_fmt(r.energy), r.method, r.n_steps, _fmt(r.tc)))


def write_error_csv(rows: Iterable[ErrorRow], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(ERROR_HEADER)
    for r in rows:
        w.writerow((_fmt(r.energy), r.method, r.n_steps, _fmt(r.tc), _fmt(r.tc_exact), _fmt(r.rel_error)))


def _json_float(x: float):
    return x if math.isfinite(x) else None


def tc_json(results: Iterable[TcResult]) -> str:
    data = [
        {"energy_J": r.energy, "method": r.method, "n_steps": r.n_steps, "tc": _json_float(r.tc), "error": r.error or None}
        for r in results
    ]
    return json.dumps({"rows": data}, indent=1) + "\n"


def error_json(rows: Iterable[ErrorRow], summary: dict | None = None) -> str:
    data = []
    for r in rows:
        d = asdict(r)
        d["energy_J"] = d.pop("energy")
        for key in ("tc", "tc_exact", "rel_error"):
            d[key] = _json_float(d[key])
        d["error"] = d["error"] or None
        data.append(d)
    out = {"rows": data}
    if summary is not None:
        out["summary"] = {
            k: ({kk: _json_float(vv) for kk, vv in v.items()} if isinstance(v, dict) else v) for k, v in summary.items()
        }
    return json.dumps(out, indent=1) + "\n"


def tc_csv_text(results: Iterable[TcResult]) -> str:
    buf = io.StringIO()
    write_tc_csv(results, buf)
    return buf.getvalue()


def error_csv_text(rows: Iterable[ErrorRow]) -> str:
    buf = io.StringIO()
    write_error_csv(rows, buf)
    return buf.getvalue()
