"""Placement of small logical registers onto device qubits."""

from __future__ import annotations

import numpy as np

from ..circuits.devices import DeviceModel
from ..circuits.graphs import random_chain


def line_layout(device: DeviceModel, n: int, rng: np.random.Generator) -> list[int]:
    """``n`` device qubits forming a path, so logical neighbors are coupled."""
    if n > device.num_qubits:
        raise ValueError(f"{n} qubits requested, {device.device_id} has {device.num_qubits}")
    if device.all_to_all or not device.edges:
        return list(range(n))
    chain = random_chain(device.edges, n, rng)
    if len(chain) < n:
        raise ValueError(f"no {n}-qubit chain on {device.device_id}")
    return chain
