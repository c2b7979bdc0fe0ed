"""Benchmark dispatch table: run, describe and enumerate circuits for each benchmark."""

from __future__ import annotations

from typing import Callable, Iterator

import numpy as np

from ..apps.layout import line_layout
from ..apps.lr_qaoa import QaoaSchedule, build_lr_qaoa_circuit, lr_qaoa_run, problem_layout
from ..apps.maxcut import make_instance
from ..apps.qft import build_qft_circuit, qft_run, qft_widths
from ..apps.qml_kernel import build_qml_overlap, qml_run
from ..apps.wit import build_wit_circuit, wit_run
from ..circuits.circuit import Circuit
from ..circuits.devices import DeviceModel
from ..circuits.graphs import edge_coloring, random_chain
from ..registry import canonical_name
from ..sim.sampler import MAX_STATEVECTOR_QUBITS, as_rng
from ..system.bseq import BASES, bseq_run, chsh_circuit, default_max_colors
from ..system.clops import clops_run, clops_template, random_angles
from ..system.eplg import drb_circuit, eplg_run, sublayers
from ..system.mirror import build_mirror_circuit, mirror_run, sample_mirror_spec


def _bseq(device, p, seed):
    return bseq_run(device, shots=p["shots"], max_colors=p.get("max_colors"), seed=seed).to_dict()


def _eplg(device, p, seed):
    res = eplg_run(
        device,
        num_samples=p["num_samples"],
        shots=p["shots"],
        lengths=p["lengths"],
        num_qubits_in_chain=p["num_qubits_in_chain"],
        seed=seed,
    )
    return res.to_dict()


def _mirror(device, p, seed):
    return mirror_run(
        device,
        width=p["width"],
        num_layers=p["num_layers"],
        two_qubit_gate_prob=p["two_qubit_gate_prob"],
        num_circuits=p["num_circuits"],
        shots=p["shots"],
        seed=seed,
    ).to_dict()


def _clops(device, p, seed):
    return clops_run(
        device,
        num_qubits=p["num_qubits"],
        num_layers=p["num_layers"],
        num_circuits=p["num_circuits"],
        shots=p["shots"],
        mode=p["mode"],
        seed=seed,
        two_qubit_gate=p["two_qubit_gate"],
    ).to_dict()


def _qml(device, p, seed):
    return qml_run(device, p["num_qubits"], shots=p["shots"], seed=seed).to_dict()


def _wit(device, p, seed):
    return wit_run(device, p["num_qubits"], shots=p["shots"], seed=seed).to_dict()


def _lr_qaoa(device, p, seed):
    # the instance seed in the parameters fixes the graph weights; the run seed drives sampling
    instance_seed = p.get("seed")
    rng = as_rng(seed)
    inst_rng = np.random.default_rng(instance_seed) if instance_seed is not None else rng
    instance, results = lr_qaoa_run(
        device,
        graph_type=p["graph_type"],
        num_qubits=p["num_qubits"],
        qaoa_layers=p["qaoa_layers"],
        delta_beta=p["delta_beta"],
        delta_gamma=p["delta_gamma"],
        shots=p["shots"],
        trials=p["trials"],
        num_random_trials=p["num_random_trials"],
        confidence_level=p["confidence_level"],
        seed=rng,
        instance_rng=inst_rng,
    )
    return {
        "num_qubits": p["num_qubits"],
        "graph_type": p["graph_type"],
        "instance": instance.to_dict(),
        "layers": [r.to_dict() for r in results],
        "r_eff": results[0].r_eff,
        "approximation_ratio": results[0].approximation_ratio,
    }


def _qft(device, p, seed):
    return qft_run(
        device,
        min_qubits=p["min_qubits"],
        max_qubits=p["max_qubits"],
        skip_qubits=p["skip_qubits"],
        max_circuits=p["max_circuits"],
        shots=p["shots"],
        method=p["method"],
        seed=seed,
        use_midcircuit_measurement=p["use_midcircuit_measurement"],
    ).to_dict()


RUNNERS: dict[str, Callable[[DeviceModel, dict, object], dict]] = {
    "BSEQ": _bseq,
    "EPLG": _eplg,
    "Mirror Circuits": _mirror,
    "CLOPS": _clops,
    "QML Kernel": _qml,
    "WIT": _wit,
    "Linear Ramp QAOA": _lr_qaoa,
    "Quantum Fourier Transform": _qft,
}


def run_benchmark(params: dict, device: DeviceModel, seed) -> dict:
    """Execute validated ``params`` on ``device``; returns the results mapping."""
    return RUNNERS[canonical_name(params["benchmark_name"])](device, params, seed)


def dispatch_data(params: dict, device: DeviceModel) -> dict:
    """Metadata fixed at dispatch time (sizes the poll step will need)."""
    name = canonical_name(params["benchmark_name"])
    data: dict = {"benchmark_name": name, "device_qubits": device.num_qubits}
    if name == "BSEQ":
        data["num_color_classes"] = len(edge_coloring(device.edges, params.get("max_colors") or default_max_colors(device)))
    elif name == "EPLG":
        data["num_qubits_in_chain"] = params["num_qubits_in_chain"]
        data["num_lengths"] = len(params["lengths"])
    elif name == "Quantum Fourier Transform":
        data["widths"] = qft_widths(params["min_qubits"], params["max_qubits"], params["skip_qubits"])
    elif "num_qubits" in params:
        data["num_qubits"] = params["num_qubits"]
    elif "width" in params:
        data["width"] = params["width"]
    return data


def iter_circuits(params: dict, device: DeviceModel, seed=None) -> Iterator[tuple[Circuit, int]]:
    """Yield (circuit, shots) for every task a run would submit, without executing."""
    name = canonical_name(params["benchmark_name"])
    rng = as_rng(seed)
    shots = params.get("shots", 0)
    if name == "BSEQ":
        for cls in edge_coloring(device.edges, params.get("max_colors") or default_max_colors(device)):
            for basis in BASES:
                yield chsh_circuit(device.num_qubits, cls, basis), shots
    elif name == "EPLG":
        n = params["num_qubits_in_chain"]
        chain = list(range(n)) if device.all_to_all else random_chain(device.edges, n, rng)
        for pairs, idles in sublayers(chain):
            for depth in params["lengths"]:
                for _ in range(params["num_samples"]):
                    yield drb_circuit(device.num_qubits, pairs, idles, depth, rng), shots
    elif name == "Mirror Circuits":
        for _ in range(params["num_circuits"]):
            spec = sample_mirror_spec(device, params["width"], params["num_layers"], params["two_qubit_gate_prob"], rng)
            yield build_mirror_circuit(spec, device.num_qubits), shots
    elif name == "CLOPS":
        n = min(params["num_qubits"], device.num_qubits)
        qubits = list(range(n)) if device.all_to_all else random_chain(device.edges, n, rng)
        template = clops_template(
            device.num_qubits, qubits, params["num_layers"], params["two_qubit_gate"],
            random_angles(params["num_layers"], len(qubits), rng),
        )
        # every circuit of the workload shares the template's gate counts
        for _ in range(params["num_circuits"]):
            yield template, shots
    elif name == "QML Kernel":
        qubits = line_layout(device, params["num_qubits"], rng)
        yield build_qml_overlap(params["num_qubits"], seed=rng, qubits=qubits, num_qubits=device.num_qubits), shots
    elif name == "WIT":
        qubits = line_layout(device, params["num_qubits"], rng)
        yield build_wit_circuit(params["num_qubits"], qubits, device.num_qubits), shots
    elif name == "Linear Ramp QAOA":
        inst_rng = np.random.default_rng(params["seed"]) if params.get("seed") is not None else rng
        qubits, edges = problem_layout(device, params["graph_type"], params["num_qubits"], inst_rng)
        instance = make_instance(params["num_qubits"], edges, inst_rng)
        for p in params["qaoa_layers"]:
            circ = build_lr_qaoa_circuit(instance, QaoaSchedule(int(p), params["delta_beta"], params["delta_gamma"]), qubits, device.num_qubits)
            for _ in range(params["trials"]):
                yield circ, shots
    elif name == "Quantum Fourier Transform":
        for n in qft_widths(params["min_qubits"], params["max_qubits"], params["skip_qubits"]):
            if n > device.num_qubits or n > MAX_STATEVECTOR_QUBITS:
                continue
            qubits = line_layout(device, n, rng)
            for x in rng.integers(0, 2**n, size=min(params["max_circuits"], 2**n)):
                yield build_qft_circuit(n, int(x), params["method"], qubits, device.num_qubits), shots
    else:
        raise KeyError(name)


def result_points(benchmark_name: str, params: dict, results: dict) -> dict:
    """{width or None: {metric: value}} extracted from a stored record."""
    name = canonical_name(benchmark_name)
    if name == "BSEQ":
        pair = None
        if results.get("lccs") is not None and results.get("connection_fraction") is not None:
            pair = (float(results["lccs"]), float(results["connection_fraction"]))
        return {None: {"bseq_score": pair, "lccs": results.get("lccs"), "connection_fraction": results.get("connection_fraction")}}
    if name == "EPLG":
        out = {int(k): {"eplg": v} for k, v in results.get("eplg_by_length", {}).items()}
        chain = len(results.get("chain", []))
        if chain and results.get("eplg") is not None:
            out.setdefault(chain, {"eplg": results["eplg"]})
        return out
    if name == "Mirror Circuits":
        return {int(params["width"]): {"polarization": results.get("polarization"), "success_prob": results.get("success_prob")}}
    if name == "CLOPS":
        return {None: {"clops": results.get("clops"), "steady_state_clops": results.get("steady_state_clops")}}
    if name == "QML Kernel":
        return {int(params["num_qubits"]): {"accuracy": results.get("accuracy")}}
    if name == "WIT":
        return {int(params["num_qubits"]): {"expectation": results.get("expectation"), "f2q_proxy": results.get("f2q_proxy")}}
    if name == "Linear Ramp QAOA":
        return {int(params["num_qubits"]): {"r_eff": results.get("r_eff"), "approximation_ratio": results.get("approximation_ratio")}}
    if name == "Quantum Fourier Transform":
        unsupported = set(results.get("unsupported", []))
        return {
            int(k): {"fidelity": v}
            for k, v in results.get("fidelities", {}).items()
            if int(k) not in unsupported
        }
    raise KeyError(name)
