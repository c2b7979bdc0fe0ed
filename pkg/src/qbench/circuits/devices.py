"""Device models: coupling graph, noise profile, timing model and native basis."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

from .graphs import Edge, complete_edges, normalize_edges

REGISTRY_ENV = "QBENCH_DEVICE_REGISTRY"


def _edge_key(a: int, b: int) -> str:
    return f"{min(a, b)}-{max(a, b)}"


@dataclass(frozen=True)
class NoiseProfile:
    """Depolarizing gate noise plus symmetric readout flips.

    ``overrides`` may hold ``{"qubits": {"3": {"p1": ..., "readout_eps": ...}},
    "edges": {"3-4": {"p2": ...}}}`` for per-qubit and per-edge values.
    """

    p1: float = 0.0
    p2: float = 0.0
    readout_eps: float = 0.0
    overrides: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("p1", "p2", "readout_eps"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")

    def _qubit(self, q: int) -> dict:
        return self.overrides.get("qubits", {}).get(str(q), {})

    def p1_for(self, q: int) -> float:
        return float(self._qubit(q).get("p1", self.p1))

    def p2_for(self, a: int, b: int) -> float:
        return float(self.overrides.get("edges", {}).get(_edge_key(a, b), {}).get("p2", self.p2))

    def readout_for(self, q: int) -> float:
        return float(self._qubit(q).get("readout_eps", self.readout_eps))

    @property
    def is_noiseless(self) -> bool:
        if self.p1 or self.p2 or self.readout_eps:
            return False
        for group in self.overrides.values():
            for entry in group.values():
                if any(float(v) for v in entry.values()):
                    return False
        return True

    def to_dict(self) -> dict:
        return {"p1": self.p1, "p2": self.p2, "readout_eps": self.readout_eps, "overrides": self.overrides}

    @classmethod
    def from_dict(cls, data: dict | None) -> NoiseProfile:
        data = data or {}
        return cls(
            p1=float(data.get("p1", 0.0)),
            p2=float(data.get("p2", 0.0)),
            readout_eps=float(data.get("readout_eps", 0.0)),
            overrides=data.get("overrides", {}) or {},
        )


NOISELESS = NoiseProfile()


@dataclass(frozen=True)
class TimingModel:
    """Gate durations and fixed overheads used for CLOPS and runtime estimates.

    ``overhead_us`` is charged once per circuit, ``rep_delay_us`` once per
    shot and ``compile_us`` once per compilation.
    """

    gate_ns: dict[str, float]
    overhead_us: float = 0.0
    rep_delay_us: float = 0.0
    compile_us: float = 0.0

    def duration_ns(self, name: str) -> float:
        if name in self.gate_ns:
            return float(self.gate_ns[name])
        return float(self.gate_ns.get("default", 0.0))

    def scaled(self, factor: float) -> TimingModel:
        return replace(self, gate_ns={k: v * factor for k, v in self.gate_ns.items()})

    def to_dict(self) -> dict:
        return {
            "gate_ns": dict(self.gate_ns),
            "overhead_us": self.overhead_us,
            "rep_delay_us": self.rep_delay_us,
            "compile_us": self.compile_us,
        }

    @classmethod
    def from_dict(cls, data: dict | None) -> TimingModel | None:
        if not data:
            return None
        return cls(
            gate_ns={k: float(v) for k, v in data["gate_ns"].items()},
            overhead_us=float(data.get("overhead_us", 0.0)),
            rep_delay_us=float(data.get("rep_delay_us", 0.0)),
            compile_us=float(data.get("compile_us", 0.0)),
        )


@dataclass(frozen=True)
class DeviceModel:
    device_id: str
    num_qubits: int
    edges: tuple[Edge, ...]
    noise: NoiseProfile = NOISELESS
    timing: TimingModel | None = None
    basis_gates: tuple[str, ...] = ("rz", "rx", "cz")
    provider: str = "local"
    all_to_all: bool = False

    def __post_init__(self) -> None:
        edges = tuple(normalize_edges(self.edges))
        for a, b in edges:
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise ValueError(f"edge ({a}, {b}) outside device {self.device_id}")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def all_to_all_device(cls, device_id: str, num_qubits: int, **kwargs: Any) -> DeviceModel:
        return cls(device_id, num_qubits, tuple(complete_edges(num_qubits)), all_to_all=True, **kwargs)

    def with_noise(self, noise: NoiseProfile) -> DeviceModel:
        return replace(self, noise=noise)

    def noiseless(self) -> DeviceModel:
        return replace(self, noise=NOISELESS)

    def to_dict(self) -> dict:
        out = {
            "device_id": self.device_id,
            "provider": self.provider,
            "qubits": self.num_qubits,
            "all_to_all": self.all_to_all,
            "noise": self.noise.to_dict(),
            "timing": self.timing.to_dict() if self.timing else None,
            "basis_gates": list(self.basis_gates),
        }
        if not self.all_to_all:
            out["edges"] = [list(e) for e in self.edges]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> DeviceModel:
        n = int(data["qubits"])
        all_to_all = bool(data.get("all_to_all", False))
        edges = complete_edges(n) if all_to_all else [tuple(e) for e in data["edges"]]
        return cls(
            device_id=data["device_id"],
            num_qubits=n,
            edges=tuple(edges),
            noise=NoiseProfile.from_dict(data.get("noise")),
            timing=TimingModel.from_dict(data.get("timing")),
            basis_gates=tuple(data.get("basis_gates", ("rz", "rx", "cz"))),
            provider=data.get("provider", "local"),
            all_to_all=all_to_all,
        )

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _default_registry_text() -> str:
    return resources.files("qbench.data").joinpath("devices.json").read_text()


def load_registry(path: str | os.PathLike | None = None) -> dict[str, DeviceModel]:
    """Load every device from a JSON registry (bundled fixtures by default)."""
    path = path or os.environ.get(REGISTRY_ENV)
    text = Path(path).read_text() if path else _default_registry_text()
    raw = json.loads(text)
    devices = {}
    for entry in raw["devices"]:
        dev = DeviceModel.from_dict(entry)
        devices[dev.device_id] = dev
    for alias, target in raw.get("aliases", {}).items():
        devices[alias] = devices[target]
    return devices


def load_device(name: str, registry: str | os.PathLike | None = None) -> DeviceModel:
    devices = load_registry(registry)
    try:
        return devices[name]
    except KeyError:
        raise KeyError(f"unknown device {name!r}; known: {', '.join(sorted(devices))}") from None
