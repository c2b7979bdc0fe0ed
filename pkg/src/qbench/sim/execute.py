"""Run logical circuits on a simulated device."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..circuits.circuit import Circuit
from ..circuits.devices import DeviceModel
from ..circuits.lowering import lower_to_basis
from .sampler import as_rng, counts_from_bits, sample_bits


def native(circuit: Circuit, device: DeviceModel) -> Circuit:
    """Lower ``circuit`` to the device basis (unchanged if no basis is declared)."""
    if not device.basis_gates:
        return circuit
    return lower_to_basis(circuit, device.basis_gates)


def run_bits(
    circuits: Sequence[Circuit],
    device: DeviceModel,
    shots: int,
    seed=None,
    lower: bool = True,
) -> list[np.ndarray]:
    """Sample every circuit on ``device``; returns one (shots, m) bit array each."""
    rng = as_rng(seed)
    out = []
    for circ in circuits:
        if circ.num_qubits > device.num_qubits:
            raise ValueError(f"circuit needs {circ.num_qubits} qubits, {device.device_id} has {device.num_qubits}")
        target = native(circ, device) if lower else circ
        bits, _ = sample_bits(target, shots, device.noise, rng)
        out.append(bits)
    return out


def run_counts(circuits, device, shots, seed=None, lower=True) -> list[dict[str, int]]:
    return [counts_from_bits(b) for b in run_bits(circuits, device, shots, seed, lower)]
