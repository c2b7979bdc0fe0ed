"""Linear-ramp QAOA on weighted MaxCut, scored against uniform random sampling."""

from __future__ import annotations

import warnings

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from ..circuits.circuit import Circuit
from ..circuits.devices import DeviceModel
from ..circuits.graphs import connected_region, edge_coloring, induced_edges, random_chain
from ..sim.execute import run_bits
from ..sim.sampler import MAX_STATEVECTOR_QUBITS, SimulationError, as_rng
from .maxcut import MaxCutInstance, make_instance

GRAPH_TYPES = ("1D", "NL", "FC")
SCORE_WIDTHS = (10, 20, 50, 100)


@dataclass
class QaoaSchedule:
    p: int
    delta_beta: float
    delta_gamma: float

    @property
    def gammas(self) -> np.ndarray:
        j = np.arange(1, self.p + 1)
        return j * self.delta_gamma / self.p

    @property
    def betas(self) -> np.ndarray:
        j = np.arange(1, self.p + 1)
        return (self.p + 1 - j) * self.delta_beta / self.p


@dataclass
class LrQaoaResult:
    p: int
    approximation_ratio: float
    random_baseline: float
    r_eff: float
    optimal_hit_prob: float
    p_value: float
    confidence_level: float
    t_test_pass: bool
    trial_ratios: list[float] = field(default_factory=list)
    random_trial_ratios: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "approximation_ratio": self.approximation_ratio,
            "random_baseline": self.random_baseline,
            "r_eff": self.r_eff,
            "optimal_hit_prob": self.optimal_hit_prob,
            "p_value": self.p_value,
            "confidence_level": self.confidence_level,
            "t_test_pass": self.t_test_pass,
        }


def effective_ratio(r: float, r_random: float) -> float:
    if r_random >= 1.0:
        raise ValueError("random baseline must be below 1")
    return (r - r_random) / (1.0 - r_random)


def problem_layout(device: DeviceModel, graph_type: str, n: int, rng: np.random.Generator):
    """Physical qubits and problem edges (on 0..n-1) for a graph type."""
    if graph_type not in GRAPH_TYPES:
        raise ValueError(f"graph_type must be one of {GRAPH_TYPES}")
    if n > device.num_qubits:
        raise ValueError(f"{n} nodes exceed {device.num_qubits} qubits")
    if graph_type == "FC":
        if not device.all_to_all:
            raise ValueError("fully connected instances need an all-to-all device (no SWAP network)")
        return list(range(n)), [(i, j) for i in range(n) for j in range(i + 1, n)]
    if graph_type == "1D":
        if device.all_to_all:
            qubits = list(range(n))
        else:
            qubits = random_chain(device.edges, n, rng)
            if len(qubits) < n:
                raise ValueError(f"no {n}-qubit chain on {device.device_id}")
        return qubits, [(i, i + 1) for i in range(n - 1)]
    if device.all_to_all:
        raise ValueError("native layout is undefined for all-to-all devices")
    qubits = connected_region(device.edges, n, rng=rng)
    if len(qubits) < n:
        raise ValueError(f"no connected {n}-qubit region on {device.device_id}")
    local = {q: i for i, q in enumerate(qubits)}
    return qubits, [(local[a], local[b]) for a, b in induced_edges(device.edges, qubits)]


def build_lr_qaoa_circuit(
    instance: MaxCutInstance,
    schedule: QaoaSchedule,
    qubits: Sequence[int] | None = None,
    num_qubits: int | None = None,
) -> Circuit:
    """|+>^n, then per layer rzz(2 gamma w) on every edge and rx(-2 beta) on every qubit.

    Edges are applied in edge-color order so each color class is one
    parallel layer. The mixer sign makes |+> the ground state of the driver,
    so the ramp anneals toward the maximum cut.
    """
    n = instance.num_nodes
    qubits = list(range(n)) if qubits is None else list(qubits)
    circ = Circuit(num_qubits if num_qubits is not None else max(qubits) + 1)
    weight = {e: w for e, w in zip(instance.edges, instance.weights)}
    weight.update({(b, a): w for (a, b), w in zip(instance.edges, instance.weights)})
    classes = edge_coloring(instance.edges) if instance.edges else []
    for q in qubits:
        circ.h(q)
    for gamma, beta in zip(schedule.gammas, schedule.betas):
        for cls in classes:
            for a, b in cls:
                circ.rzz(2.0 * gamma * weight[(a, b)], qubits[a], qubits[b])
        for q in qubits:
            circ.rx(-2.0 * beta, q)
    for q in qubits:
        circ.append("measure", (q,))
    return circ


def approximation_ratio(bits: np.ndarray, instance: MaxCutInstance) -> float:
    return float(np.mean(instance.cut_values(bits)) / instance.optimal_value)


def random_trials(instance: MaxCutInstance, num_trials: int, shots: int, rng: np.random.Generator) -> np.ndarray:
    ratios = np.empty(num_trials)
    for t in range(num_trials):
        bits = rng.integers(0, 2, size=(shots, instance.num_nodes), dtype=np.uint8)
        ratios[t] = approximation_ratio(bits, instance)
    return ratios


def welch_greater(sample: np.ndarray, baseline: np.ndarray) -> float:
    """One-sided Welch p-value for mean(sample) > mean(baseline)."""
    if len(sample) < 2 or len(baseline) < 2:
        return float("nan")
    if np.ptp(sample) == 0 and np.ptp(baseline) == 0:
        return 0.0 if sample[0] > baseline[0] else 1.0
    with warnings.catch_warnings():
        # one constant group is fine for Welch's test; scipy still flags its moments
        warnings.filterwarnings("ignore", "Precision loss", RuntimeWarning)
        return float(stats.ttest_ind(sample, baseline, equal_var=False, alternative="greater").pvalue)


def evaluate_samples(
    trial_bits: Sequence[np.ndarray],
    instance: MaxCutInstance,
    random_ratios: np.ndarray,
    p: int,
    confidence_level: float,
) -> LrQaoaResult:
    """Score sampled bitstrings (one array per trial) against the random baseline."""
    trial_ratios = np.array([approximation_ratio(b, instance) for b in trial_bits])
    pooled = np.concatenate(trial_bits)
    cuts = instance.cut_values(pooled)
    r = float(np.mean(cuts) / instance.optimal_value)
    r_random = float(np.mean(random_ratios))
    p_value = welch_greater(trial_ratios, random_ratios)
    return LrQaoaResult(
        p=p,
        approximation_ratio=r,
        random_baseline=r_random,
        r_eff=effective_ratio(r, r_random),
        optimal_hit_prob=float(np.mean(cuts >= instance.optimal_value - 1e-9)),
        p_value=p_value,
        confidence_level=confidence_level,
        t_test_pass=bool(p_value < 1.0 - confidence_level),
        trial_ratios=trial_ratios.tolist(),
        random_trial_ratios=random_ratios.tolist(),
    )


def lr_qaoa_run(
    device: DeviceModel,
    graph_type: str = "1D",
    num_qubits: int = 10,
    qaoa_layers: Sequence[int] = (10,),
    delta_beta: float = 0.3,
    delta_gamma: float = 0.6,
    shots: int = 1000,
    trials: int = 10,
    num_random_trials: int = 10,
    confidence_level: float = 0.999,
    seed=None,
    instance_rng=None,
) -> tuple[MaxCutInstance, list[LrQaoaResult]]:
    """Run every depth in ``qaoa_layers``; each trial re-executes the same instance.

    ``instance_rng`` (default: the run generator) draws the layout and weights,
    so a fixed instance can be sampled under different run seeds.
    """
    if num_qubits > MAX_STATEVECTOR_QUBITS:
        raise SimulationError(f"{num_qubits} qubits exceed the simulation cap of {MAX_STATEVECTOR_QUBITS}")
    rng = as_rng(seed)
    inst_rng = rng if instance_rng is None else as_rng(instance_rng)
    qubits, edges = problem_layout(device, graph_type, num_qubits, inst_rng)
    instance = make_instance(num_qubits, edges, inst_rng)
    random_ratios = random_trials(instance, num_random_trials, shots, rng)
    results = []
    for p in qaoa_layers:
        circ = build_lr_qaoa_circuit(instance, QaoaSchedule(int(p), delta_beta, delta_gamma), qubits, device.num_qubits)
        order = circ.measured_qubits()
        col = [order.index(q) for q in qubits]
        # trials repeat one circuit, so one pooled run split by trial is equivalent
        (pooled,) = run_bits([circ], device, shots * trials, rng)
        trial_bits = np.split(pooled[:, col], trials)
        results.append(evaluate_samples(trial_bits, instance, random_ratios, int(p), confidence_level))
    return instance, results


def lr_qaoa_score(r_eff: dict[int, float | None], widths: Sequence[int] = SCORE_WIDTHS) -> float:
    """Width-weighted effective ratio; missing widths count as 0."""
    total = float(sum(widths))
    return float(sum(n * (r_eff.get(n) or 0.0) for n in widths) / total)
