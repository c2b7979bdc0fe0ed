"""qbench: simulated quantum benchmark suite with a composite score."""

__version__ = "0.1.0"

from .circuits.circuit import Circuit  # noqa: E402
from .circuits.devices import DeviceModel, load_device, load_registry  # noqa: E402
from .dataset.records import BenchmarkRecord  # noqa: E402
from .scoring import SeriesSpec, bundled_series, compute_score_table, metriq_score  # noqa: E402

__all__ = [
    "__version__",
    "BenchmarkRecord",
    "Circuit",
    "DeviceModel",
    "SeriesSpec",
    "bundled_series",
    "compute_score_table",
    "load_device",
    "load_registry",
    "metriq_score",
]
