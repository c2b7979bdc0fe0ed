"""Unitary matrices for the gate vocabulary."""

from __future__ import annotations

import numpy as np

from .circuit import GateOp

_SQ2 = 1.0 / np.sqrt(2.0)

_FIXED = {
    "id": np.eye(2, dtype=complex),
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "cx": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
    "iswap": np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex),
}

PAULI_MATRICES = (_FIXED["id"], _FIXED["x"], _FIXED["y"], _FIXED["z"])


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


def r(theta: float, phi: float) -> np.ndarray:
    """Rotation by ``theta`` about the equatorial axis at azimuth ``phi``."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -1j * np.exp(-1j * phi) * s], [-1j * np.exp(1j * phi) * s, c]], dtype=complex
    )


def rzz(theta: float) -> np.ndarray:
    a, b = np.exp(-0.5j * theta), np.exp(0.5j * theta)
    return np.diag([a, b, b, a])


def gate_matrix(name: str, params: tuple[float, ...] = ()) -> np.ndarray:
    if name in _FIXED:
        return _FIXED[name]
    if name == "rx":
        return rx(params[0])
    if name == "ry":
        return ry(params[0])
    if name == "rz":
        return rz(params[0])
    if name == "r":
        return r(params[0], params[1])
    if name == "rzz":
        return rzz(params[0])
    raise ValueError(f"gate {name!r} has no unitary matrix")


def op_matrix(op: GateOp) -> np.ndarray:
    return gate_matrix(op.name, op.params)


def is_diagonal(name: str) -> bool:
    return name in ("id", "z", "s", "sdg", "rz", "cz", "rzz")
