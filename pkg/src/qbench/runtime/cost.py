"""Pre-run cost estimates from circuit statistics.

Circuits are built and lowered to the device basis but never simulated.
Three pricing shapes are supported: a per-task plus per-shot tariff, a
credit formula driven by gate and measurement counts, and device time.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from ..circuits.devices import DeviceModel
from ..dataset.validate import validate_benchmark_params
from ..sim.execute import native
from ..system.clops import critical_path_ns
from .runners import iter_circuits

PRICING_MODELS = ("per_task_shot", "hqc", "runtime")

# credit formula: base + (c1 * N1q + c2 * N2q + cm * Nmeas) * shots / divisor, per task
HQC_DEFAULTS = {"base": 5.0, "c1": 1.0, "c2": 10.0, "cm": 5.0, "divisor": 5000.0}


class PricingError(ValueError):
    pass


@dataclass
class PricingModel:
    model: str
    constants: dict

    @classmethod
    def from_dict(cls, data: dict) -> PricingModel:
        if "model" not in data:
            raise PricingError("pricing model needs a 'model' field")
        model = data["model"]
        if model not in PRICING_MODELS:
            raise PricingError(f"model must be one of {PRICING_MODELS}")
        consts = {k: v for k, v in data.items() if k != "model"}
        if model == "per_task_shot":
            missing = [k for k in ("per_task", "per_shot") if k not in consts]
            if missing:
                raise PricingError(f"per_task_shot pricing is missing {missing}")
        elif model == "hqc":
            consts = {**HQC_DEFAULTS, **consts}
        elif model == "runtime" and "per_second" not in consts:
            consts["per_second"] = 0.0
        return cls(model, consts)

    @classmethod
    def load(cls, path: str | Path) -> PricingModel:
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class CostEstimate:
    tasks: int
    total_shots: int
    one_qubit_gates: int
    two_qubit_gates: int
    measurements: int
    hqc: float | None
    runtime_estimate: float | None
    cost: float | None
    model: str | None

    def to_dict(self) -> dict:
        return asdict(self)


def hqc_credits(n1: int, n2: int, nm: int, shots: int, base: float = 5.0, c1: float = 1.0,
                c2: float = 10.0, cm: float = 5.0, divisor: float = 5000.0) -> float:
    return base + (c1 * n1 + c2 * n2 + cm * nm) * shots / divisor


def estimate_cost(params: dict, device: DeviceModel, pricing: PricingModel | None = None, seed=0) -> CostEstimate:
    """Count tasks, shots and native gates; apply ``pricing`` when given."""
    params = validate_benchmark_params(params)
    tasks = shots_total = n1 = n2 = nm = 0
    hqc = 0.0 if pricing and pricing.model == "hqc" else None
    seconds = 0.0 if device.timing is not None else None
    cache: dict[int, tuple] = {}
    for circ, shots in iter_circuits(params, device, seed):
        key = id(circ)
        if key not in cache:
            low = native(circ, device)
            a, b, m = low.gate_counts()
            dur = critical_path_ns(low, device.timing) if device.timing is not None else None
            cache[key] = (a, b, m, dur, circ)
        a, b, m, dur, _ = cache[key]
        tasks += 1
        shots_total += shots
        n1, n2, nm = n1 + a, n2 + b, nm + m
        if hqc is not None:
            c = pricing.constants
            hqc += hqc_credits(a, b, m, shots, c["base"], c["c1"], c["c2"], c["cm"], c["divisor"])
        if seconds is not None:
            t = device.timing
            seconds += shots * (dur * 1e-9 + t.rep_delay_us * 1e-6) + t.overhead_us * 1e-6
    cost = None
    if pricing is not None:
        c = pricing.constants
        if pricing.model == "per_task_shot":
            cost = c["per_task"] * tasks + c["per_shot"] * shots_total
        elif pricing.model == "hqc":
            cost = hqc * c.get("per_credit", 1.0)
        elif seconds is not None:
            cost = seconds * c["per_second"]
    return CostEstimate(
        tasks=tasks,
        total_shots=shots_total,
        one_qubit_gates=n1,
        two_qubit_gates=n2,
        measurements=nm,
        hqc=hqc,
        runtime_estimate=seconds,
        cost=cost,
        model=pricing.model if pricing else None,
    )
