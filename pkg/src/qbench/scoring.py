"""Composite score: width aggregation, baseline normalization and benchmark weights.

Raw values are first averaged across circuit widths with weights proportional
to width, then divided by the baseline device's aggregate (inverted for
lower-is-better metrics) and scaled to 100. Benchmarks are combined with
weights proportional to their effective width sum(n^2)/sum(n).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .registry import DIRECTIONS, HIGHER_BETTER, LOWER_BETTER
from .system.bseq import bseq_score_values

Number = float
# width key used for whole-device benchmarks declared with a reference scale
WHOLE_DEVICE = None


def width_weights(widths: Sequence[int]) -> list[float]:
    if not widths:
        raise ValueError("at least one width is required")
    if any(n <= 0 for n in widths):
        raise ValueError("widths must be positive")
    total = float(sum(widths))
    return [n / total for n in widths]


def width_aggregate(values: Sequence[float], weights: Sequence[float]) -> float:
    if len(values) != len(weights):
        raise ValueError("values and weights differ in length")
    return float(sum(a * v for a, v in zip(weights, values)))


def baseline_normalize(value: float | None, base: float | None, direction: str = HIGHER_BETTER) -> float:
    """100 at parity with the baseline; 0 when either side is missing or unusable."""
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    if value is None or base is None:
        return 0.0
    if direction == HIGHER_BETTER:
        return 100.0 * value / base if base > 0 else 0.0
    return 100.0 * base / value if value > 0 else 0.0


def effective_width(widths: Sequence[int] | None = None, n_ref: float | None = None) -> float:
    if n_ref is not None:
        if n_ref <= 0:
            raise ValueError("reference scale must be positive")
        return float(n_ref)
    if not widths:
        raise ValueError("need widths or a reference scale")
    return float(sum(n * n for n in widths)) / float(sum(widths))


def benchmark_weights(mu: Mapping[str, float]) -> dict[str, float]:
    if any(v <= 0 for v in mu.values()):
        raise ValueError("effective widths must be positive")
    total = float(sum(mu.values()))
    return {b: v / total for b, v in mu.items()}


def metriq_score(subscores: Mapping[str, float | None], weights: Mapping[str, float]) -> float:
    """Weighted sum of subscores; benchmarks without a subscore contribute 0."""
    if not math.isclose(sum(weights.values()), 1.0, abs_tol=1e-9):
        raise ValueError("benchmark weights must sum to 1")
    return float(sum(w * (subscores.get(b) or 0.0) for b, w in weights.items()))


@dataclass(frozen=True)
class Component:
    """One selected result: a metric of a benchmark at one width."""

    benchmark: str
    metric: str
    width: int | None
    direction: str = HIGHER_BETTER
    selector: tuple = ()

    def __post_init__(self) -> None:
        if self.width is not None and self.width < 1:
            raise ValueError("width must be at least 1")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")


@dataclass(frozen=True)
class BenchmarkEntry:
    benchmark: str
    metric: str
    widths: tuple[int, ...] = ()
    n_ref: float | None = None
    direction: str = HIGHER_BETTER
    # "ratio" is the generic normalization; "bseq" blends LCCS and connection fraction
    normalization: str = "ratio"

    def __post_init__(self) -> None:
        if not self.widths and self.n_ref is None:
            raise ValueError(f"{self.benchmark}: give widths or n_ref")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if self.normalization not in ("ratio", "bseq"):
            raise ValueError("normalization must be 'ratio' or 'bseq'")

    @property
    def mu(self) -> float:
        return effective_width(self.widths, self.n_ref)

    def components(self) -> list[Component]:
        if not self.widths:
            return [Component(self.benchmark, self.metric, WHOLE_DEVICE, self.direction)]
        return [Component(self.benchmark, self.metric, n, self.direction) for n in self.widths]

    def to_dict(self) -> dict:
        out: dict = {"benchmark": self.benchmark, "metric": self.metric, "direction": self.direction}
        if self.widths:
            out["widths"] = list(self.widths)
        if self.n_ref is not None:
            out["n_ref"] = self.n_ref
        if self.normalization != "ratio":
            out["normalization"] = self.normalization
        return out

    @classmethod
    def from_dict(cls, data: dict) -> BenchmarkEntry:
        return cls(
            benchmark=data["benchmark"],
            metric=data["metric"],
            widths=tuple(int(n) for n in data.get("widths", ())),
            n_ref=data.get("n_ref"),
            direction=data.get("direction", HIGHER_BETTER),
            normalization=data.get("normalization", "ratio"),
        )


@dataclass
class SeriesSpec:
    series: str
    baseline_device: str
    entries: list[BenchmarkEntry]

    def __post_init__(self) -> None:
        names = [e.benchmark for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("each benchmark may appear once per series")

    @property
    def benchmarks(self) -> list[str]:
        return [e.benchmark for e in self.entries]

    def effective_widths(self) -> dict[str, float]:
        return {e.benchmark: e.mu for e in self.entries}

    def weights(self) -> dict[str, float]:
        return benchmark_weights(self.effective_widths())

    def components(self) -> list[Component]:
        return [c for e in self.entries for c in e.components()]

    def to_dict(self) -> dict:
        return {
            "series": self.series,
            "baseline_device": self.baseline_device,
            "components": [e.to_dict() for e in self.entries],
        }

    @classmethod
    def from_dict(cls, data: dict) -> SeriesSpec:
        return cls(data["series"], data["baseline_device"], [BenchmarkEntry.from_dict(c) for c in data["components"]])

    @classmethod
    def load(cls, path: str | Path) -> SeriesSpec:
        return cls.from_dict(json.loads(Path(path).read_text()))


def bundled_series(name: str = "v0.4") -> SeriesSpec:
    from importlib import resources

    text = resources.files("qbench.data").joinpath(f"series_{name}.json").read_text()
    return SeriesSpec.from_dict(json.loads(text))


@dataclass
class DeviceScore:
    device: str
    raw: dict[str, dict] = field(default_factory=dict)
    aggregates: dict[str, float | None] = field(default_factory=dict)
    subscores: dict[str, float] = field(default_factory=dict)
    score: float = 0.0


@dataclass
class ScoreTable:
    series: str
    baseline_device: str
    benchmarks: list[str]
    weights: dict[str, float]
    rows: list[DeviceScore]

    def row(self, device: str) -> DeviceScore:
        for r in self.rows:
            if r.device == device:
                return r
        raise KeyError(device)

    def to_dict(self) -> dict:
        return {
            "series": self.series,
            "baseline_device": self.baseline_device,
            "weights": self.weights,
            "devices": [
                {
                    "device": r.device,
                    "aggregates": r.aggregates,
                    "subscores": r.subscores,
                    "metriq_score": r.score,
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["device", *self.benchmarks, "metriq_score"])
        writer.writerow(["weight", *(f"{self.weights[b]:.4f}" for b in self.benchmarks), ""])
        for r in self.rows:
            writer.writerow([r.device, *(f"{r.subscores.get(b, 0.0):.2f}" for b in self.benchmarks), f"{r.score:.2f}"])
        return buf.getvalue()


def _aggregate(entry: BenchmarkEntry, values: Mapping | None):
    """Width aggregate of one device's values for ``entry``; None when nothing was measured.

    Missing widths count as 0 for higher-is-better metrics. For lower-is-better
    metrics a zero would read as perfect, so the aggregate is taken over the
    measured widths and the coverage (sum of their alphas) is returned
    alongside it to scale the subscore down instead.
    """
    if not values:
        return None, 0.0
    if not entry.widths:
        v = values.get(WHOLE_DEVICE)
        return (v, 1.0) if v is not None else (None, 0.0)
    alphas = width_weights(entry.widths)
    present = [(a, values.get(n)) for a, n in zip(alphas, entry.widths) if values.get(n) is not None]
    if not present:
        return None, 0.0
    if entry.direction == HIGHER_BETTER:
        return width_aggregate([values.get(n) or 0.0 for n in entry.widths], alphas), 1.0
    cover = sum(a for a, _ in present)
    return width_aggregate([v for _, v in present], [a / cover for a, _ in present]), cover


def _subscore(entry: BenchmarkEntry, agg, cover: float, base_agg) -> float:
    if agg is None or base_agg is None:
        return 0.0
    if entry.normalization == "bseq":
        # aggregates are (lccs, connection_fraction) pairs
        try:
            return bseq_score_values(agg[0], agg[1], base_agg[0], base_agg[1])
        except ValueError:
            return 0.0
    return cover * baseline_normalize(agg, base_agg, entry.direction)


def compute_score_table(spec: SeriesSpec, values: Mapping[str, Mapping[str, Mapping]]) -> ScoreTable:
    """Score every device in ``values`` = {device: {benchmark: {width: raw value}}}.

    Whole-device benchmarks store their value under the ``None`` width key.
    The baseline device must be present.
    """
    if spec.baseline_device not in values:
        raise KeyError(f"baseline device {spec.baseline_device!r} has no values")
    weights = spec.weights()
    base_aggs = {e.benchmark: _aggregate(e, values[spec.baseline_device].get(e.benchmark))[0] for e in spec.entries}
    rows = []
    for device in sorted(values, key=lambda d: (d != spec.baseline_device, d)):
        row = DeviceScore(device)
        for e in spec.entries:
            raw = values[device].get(e.benchmark) or {}
            agg, cover = _aggregate(e, raw)
            row.raw[e.benchmark] = dict(raw)
            row.aggregates[e.benchmark] = agg
            row.subscores[e.benchmark] = _subscore(e, agg, cover, base_aggs[e.benchmark])
        row.score = metriq_score(row.subscores, weights)
        rows.append(row)
    return ScoreTable(spec.series, spec.baseline_device, spec.benchmarks, weights, rows)


def score_subscores(
    subscores: Mapping[str, Mapping[str, float | None]],
    weights: Mapping[str, float],
) -> dict[str, float]:
    """Composite score straight from a table of subscores (missing entries count as 0)."""
    return {device: metriq_score(row, weights) for device, row in subscores.items()}


@dataclass
class Table1Row:
    device: str
    vendor: str
    cloud: str
    qubits: int
    subscores: dict[str, float | None]
    metriq_score: float
    flags: dict[str, str]


TABLE1_COLUMNS = {
    "bseq": "BSEQ",
    "eplg": "EPLG",
    "mirror": "Mirror Circuits",
    "clops": "CLOPS",
    "qml": "QML Kernel",
    "lr_qaoa": "Linear Ramp QAOA",
    "wit": "WIT",
    "qft": "Quantum Fourier Transform",
}


def load_table1(path: str | Path | None = None) -> list[Table1Row]:
    """Bundled device summary table: subscores per benchmark plus the printed composite.

    Empty cells are unavailable results. A cell suffixed with ``*`` marks a
    failed run whose subscore counts as 0 and ``+`` marks a restricted
    compilation mode; both markers are kept in ``flags``.
    """
    if path is None:
        from importlib import resources

        text = resources.files("qbench.data").joinpath("table1.csv").read_text()
    else:
        text = Path(path).read_text()
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        subs: dict[str, float | None] = {}
        flags: dict[str, str] = {}
        for col, bench in TABLE1_COLUMNS.items():
            cell = rec[col].strip()
            if cell and cell[-1] in "*+":
                flags[bench] = "failed" if cell[-1] == "*" else "restricted"
                cell = cell[:-1]
            subs[bench] = float(cell) if cell else None
            if flags.get(bench) == "failed":
                subs[bench] = 0.0
        rows.append(
            Table1Row(rec["device"], rec["vendor"], rec["cloud"], int(rec["qubits"]), subs, float(rec["metriq_score"]), flags)
        )
    return rows


def table1_matrix(rows: Iterable[Table1Row]) -> tuple[list[str], list[str], list[list[float | None]]]:
    """Devices, benchmark names and the subscore matrix (None where absent)."""
    rows = list(rows)
    benches = list(TABLE1_COLUMNS.values())
    return [r.device for r in rows], benches, [[r.subscores[b] for b in benches] for r in rows]


def values_from_records(records: Iterable, spec: SeriesSpec) -> dict[str, dict[str, dict]]:
    """Raw score inputs {device: {benchmark: {width: value}}} from benchmark records.

    For each (device, benchmark, width) the most recent record wins; equal
    timestamps fall back to the larger content hash so the choice is stable.
    """
    from .runtime.runners import result_points

    metrics = {e.benchmark: e for e in spec.entries}
    best: dict[tuple, tuple] = {}
    for rec in records:
        entry = metrics.get(rec.benchmark_name)
        if entry is None:
            continue
        for width, point in result_points(rec.benchmark_name, rec.params, rec.results).items():
            if not entry.widths:
                width = WHOLE_DEVICE
            elif width not in entry.widths:
                continue
            value = point.get(entry.metric)
            if value is None:
                continue
            key = (rec.device, rec.benchmark_name, width)
            rank = (rec.timestamp, rec.id)
            if key not in best or rank > best[key][0]:
                best[key] = (rank, value)
    out: dict[str, dict[str, dict]] = {}
    for (device, bench, width), (_, value) in best.items():
        out.setdefault(device, {}).setdefault(bench, {})[width] = value
    return out
