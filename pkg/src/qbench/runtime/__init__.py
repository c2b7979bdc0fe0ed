from .cost import CostEstimate, PricingError, PricingModel, estimate_cost, hqc_credits
from .jobs import (
    Job,
    JobError,
    JobLog,
    JobManager,
    QueueModel,
    SuiteSpec,
    UnknownDeviceError,
    UnknownJobError,
    bundled_suite,
    execute,
    stream_seed,
)
from .runners import RUNNERS, dispatch_data, iter_circuits, result_points, run_benchmark

__all__ = [
    "CostEstimate",
    "Job",
    "JobError",
    "JobLog",
    "JobManager",
    "PricingError",
    "PricingModel",
    "QueueModel",
    "RUNNERS",
    "SuiteSpec",
    "UnknownDeviceError",
    "UnknownJobError",
    "bundled_suite",
    "dispatch_data",
    "estimate_cost",
    "execute",
    "hqc_credits",
    "iter_circuits",
    "result_points",
    "run_benchmark",
    "stream_seed",
]
