"""Cross-benchmark analysis of a device x benchmark subscore matrix.

Spearman correlations, the variance share of the first principal component of
z-scored log subscores, and a log-linear ridge model scored by
leave-one-device-out cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .scoring import Table1Row, load_table1, table1_matrix

DEFAULT_LAMBDA = 0.01
# CLOPS is a throughput figure reported for only part of the fleet; the
# quality-score columns form the default PCA input
PCA_COLUMNS = (
    "BSEQ",
    "EPLG",
    "Mirror Circuits",
    "QML Kernel",
    "Linear Ramp QAOA",
    "WIT",
    "Quantum Fourier Transform",
)
SYSTEM_FEATURES = ("BSEQ", "EPLG", "Mirror Circuits")


@dataclass
class ScoreMatrix:
    devices: list[str]
    benchmarks: list[str]
    values: np.ndarray  # NaN marks a missing entry

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.devices), len(self.benchmarks)):
            raise ValueError("matrix shape does not match labels")

    @classmethod
    def from_rows(cls, rows: Sequence[Table1Row]) -> ScoreMatrix:
        devices, benches, raw = table1_matrix(rows)
        vals = np.array([[np.nan if v is None else v for v in r] for r in raw], dtype=float)
        return cls(devices, benches, vals)

    @classmethod
    def table1(cls) -> ScoreMatrix:
        return cls.from_rows(load_table1())

    @classmethod
    def from_score_table(cls, table) -> ScoreMatrix:
        """Subscores of a computed score table; zeros (failed or missing) become NaN."""
        vals = [[r.subscores.get(b) or np.nan for b in table.benchmarks] for r in table.rows]
        return cls([r.device for r in table.rows], list(table.benchmarks), vals)

    @property
    def mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.benchmarks.index(name)]

    def select(self, names: Sequence[str]) -> np.ndarray:
        return self.values[:, [self.benchmarks.index(b) for b in names]]


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average ranks (ties share the mean rank)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D and equal length")
    if len(x) < 3:
        raise ValueError("need at least 3 paired values")
    rx, ry = stats.rankdata(x), stats.rankdata(y)
    if np.ptp(rx) == 0 or np.ptp(ry) == 0:
        return float("nan")
    return float(np.corrcoef(rx, ry)[0, 1])


def pairwise_spearman(x: Sequence[float], y: Sequence[float]) -> tuple[float, int]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    if ok.sum() < 3:
        return float("nan"), int(ok.sum())
    return spearman(x[ok], y[ok]), int(ok.sum())


def correlation_matrix(matrix: ScoreMatrix) -> np.ndarray:
    k = len(matrix.benchmarks)
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            rho, _ = pairwise_spearman(matrix.values[:, i], matrix.values[:, j])
            out[i, j] = out[j, i] = rho
    return out


def _zscore(x: np.ndarray, mean=None, sd=None):
    mean = x.mean(axis=0) if mean is None else mean
    sd = x.std(axis=0, ddof=1) if sd is None else sd
    # constant columns (up to rounding of the mean) carry no signal
    sd = np.where(sd > 1e-12 * np.maximum(1.0, np.abs(mean)), sd, 1.0)
    return (x - mean) / sd, mean, sd


def complete_positive_rows(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    return np.all(np.isfinite(x) & (x > 0), axis=1)


def pca_first_variance(data: ScoreMatrix | np.ndarray, columns: Sequence[str] | None = PCA_COLUMNS) -> float:
    """Share of variance on the first principal component of z-scored logs.

    Rows with any missing or non-positive entry are dropped first.
    """
    if isinstance(data, ScoreMatrix):
        x = data.select(columns) if columns is not None else data.values
    else:
        x = np.asarray(data, dtype=float)
    x = x[complete_positive_rows(x)]
    if x.shape[0] < 2:
        raise ValueError("need at least two complete rows")
    z, _, _ = _zscore(np.log(x))
    eig = np.linalg.eigvalsh(np.cov(z, rowvar=False))
    total = eig.sum()
    return float(eig[-1] / total) if total > 0 else float("nan")


@dataclass
class RidgeReport:
    r2_log: float
    lam: float
    n: int
    features: list[str]
    predictions: list[float] = field(default_factory=list)
    observed: list[float] = field(default_factory=list)
    excluded: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "r2_log": self.r2_log,
            "lambda": self.lam,
            "n": self.n,
            "features": self.features,
            "excluded_rows": self.excluded,
        }


def _ridge_fit_predict(x_tr: np.ndarray, y_tr: np.ndarray, x_te: np.ndarray, lam: float) -> np.ndarray:
    z, mean, sd = _zscore(x_tr)
    y_mean = y_tr.mean()
    k = z.shape[1]
    beta = np.linalg.solve(z.T @ z + lam * np.eye(k), z.T @ (y_tr - y_mean))
    return y_mean + ((x_te - mean) / sd) @ beta


def ridge_loo_r2_log(
    x: np.ndarray,
    y: Sequence[float],
    lam: float = DEFAULT_LAMBDA,
    features: Sequence[str] | None = None,
) -> RidgeReport:
    """Leave-one-out R^2 of a ridge model on log values.

    Each fold z-scores the log features with training-fold statistics, fits
    ridge with an unpenalized intercept and predicts the held-out log target.
    R^2 is computed over the pooled held-out predictions.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float)
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    ok = complete_positive_rows(np.column_stack([x, y]))
    excluded = [int(i) for i in np.flatnonzero(~ok)]
    lx, ly = np.log(x[ok]), np.log(y[ok])
    n = len(ly)
    if n < 4:
        raise ValueError("need at least 4 usable rows")
    pred = np.empty(n)
    for i in range(n):
        train = np.arange(n) != i
        pred[i] = _ridge_fit_predict(lx[train], ly[train], lx[i : i + 1], lam)[0]
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum((ly - pred) ** 2)) / ss_tot if ss_tot > 0 else float("nan")
    names = list(features) if features is not None else [f"x{j}" for j in range(x.shape[1])]
    return RidgeReport(r2, lam, n, names, pred.tolist(), ly.tolist(), excluded)


def analyze(
    matrix: ScoreMatrix,
    target: str = "QML Kernel",
    features: Sequence[str] = SYSTEM_FEATURES,
    lam: float = DEFAULT_LAMBDA,
    pca_columns: Sequence[str] | None = PCA_COLUMNS,
) -> dict:
    """Correlation matrix, PCA summary and ridge report as one JSON-ready dict."""
    corr = correlation_matrix(matrix)
    ridge = ridge_loo_r2_log(matrix.select(features), matrix.column(target), lam, features)
    sensitivity = {
        str(l): ridge_loo_r2_log(matrix.select(features), matrix.column(target), l, features).r2_log
        for l in (0.01, 0.1, 1.0, 10.0)
    }
    single = {
        f: ridge_loo_r2_log(matrix.select([f]), matrix.column(target), lam, [f]).r2_log for f in features
    }
    return {
        "devices": matrix.devices,
        "benchmarks": matrix.benchmarks,
        "spearman": [[None if np.isnan(v) else float(v) for v in row] for row in corr],
        "pca": {
            "columns": list(pca_columns) if pca_columns is not None else matrix.benchmarks,
            "first_component_variance": pca_first_variance(matrix, pca_columns),
        },
        "ridge": {
            **ridge.to_dict(),
            "target": target,
            "excluded_devices": [matrix.devices[i] for i in ridge.excluded],
            "lambda_sensitivity": sensitivity,
            "single_feature_r2_log": single,
        },
    }


def correlation_csv(matrix: ScoreMatrix) -> str:
    corr = correlation_matrix(matrix)
    lines = ["," + ",".join(f'"{b}"' for b in matrix.benchmarks)]
    for b, row in zip(matrix.benchmarks, corr):
        lines.append(f'"{b}",' + ",".join("" if np.isnan(v) else f"{v:.4f}" for v in row))
    return "\n".join(lines) + "\n"
