import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qbench import _accel
from qbench.circuits.circuit import Circuit, GateOp
from qbench.circuits.devices import NoiseProfile
from qbench.sim.clifford import Pauli, clifford_conjugate_pauli, clifford_group, is_clifford_circuit
from qbench.sim.execute import run_bits, run_counts
from qbench.sim.sampler import (
    MAX_STATEVECTOR_QUBITS,
    SimulationError,
    counts_from_bits,
    exact_probabilities,
    probabilities,
    sample_bits,
    sample_counts,
    simulate_statevector,
)

from conftest import line_device  # noqa: E402

CLIFFORD_1Q = ["h", "s", "sdg", "x", "y", "z"]
CLIFFORD_2Q = ["cx", "cz", "swap"]


def random_clifford(n, depth, rng, measure=True):
    c = Circuit(n)
    for _ in range(depth):
        if n > 1 and rng.random() < 0.4:
            a, b = rng.choice(n, 2, replace=False)
            c.append(CLIFFORD_2Q[rng.integers(len(CLIFFORD_2Q))], [int(a), int(b)])
        else:
            c.append(CLIFFORD_1Q[rng.integers(len(CLIFFORD_1Q))], [int(rng.integers(n))])
    return c.measure_all() if measure else c


def random_circuit(n, depth, rng):
    c = Circuit(n)
    for _ in range(depth):
        if n > 1 and rng.random() < 0.35:
            a, b = rng.choice(n, 2, replace=False)
            c.cx(int(a), int(b))
        else:
            c.append(["rx", "ry", "rz"][rng.integers(3)], [int(rng.integers(n))], [float(rng.uniform(-math.pi, math.pi))])
    return c.measure_all()


def tvd(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def freq(counts: dict) -> dict:
    total = sum(counts.values())
    return {k: v / total for k, v in counts.items()}


@pytest.fixture
def both_backends():
    """Run a callable under numba and numpy kernels; restores the previous backend."""
    previous = _accel.backend_name()

    def run(fn):
        out = {}
        for name in ("numba", "numpy"):
            _accel.set_backend(name)
            out[name] = fn()
        return out

    yield run
    _accel.set_backend(previous)


class TestStatevector:
    def test_ghz(self):
        c = Circuit(4).h(0).cx(0, 1).cx(1, 2).cx(2, 3)
        p = probabilities(c)
        assert p[0] == pytest.approx(0.5) and p[-1] == pytest.approx(0.5)

    @given(st.floats(-4, 4))
    def test_ry_probability(self, theta):
        p = probabilities(Circuit(1).ry(theta, 0))
        assert p[1] == pytest.approx(math.sin(theta / 2) ** 2, abs=1e-12)

    def test_norm_preserved(self, rng):
        psi = simulate_statevector(random_circuit(6, 60, rng))
        assert np.linalg.norm(psi) == pytest.approx(1.0)

    def test_width_limit(self):
        n = MAX_STATEVECTOR_QUBITS + 1
        c = Circuit(n).rx(0.3, 0)
        for q in range(n - 1):
            c.cx(q, q + 1)
        with pytest.raises(SimulationError):
            sample_bits(c, 10)

    def test_independent_blocks_split(self):
        # two disconnected 15-qubit non-Clifford blocks stay within the limit
        c = Circuit(30)
        for base in (0, 15):
            c.rx(0.4, base)
            for q in range(base, base + 14):
                c.cx(q, q + 1)
        bits, _ = sample_bits(c.measure_all(), 50, seed=1)
        assert bits.shape == (50, 30)
        assert np.all(bits[:, :15] == bits[:, :1]) and np.all(bits[:, 15:] == bits[:, 15:16])

    def test_rejects_mid_circuit_measurement(self):
        c = Circuit(2).h(0).append("measure", [0]).cx(0, 1)
        with pytest.raises((SimulationError, ValueError)):
            sample_bits(c, 10)

    def test_zero_shots(self):
        with pytest.raises(ValueError):
            sample_bits(Circuit(1).h(0), 0)

    def test_counts_order(self):
        bits = np.array([[1, 0], [1, 0], [0, 1]], dtype=np.uint8)
        assert counts_from_bits(bits) == {"10": 2, "01": 1}


class TestNoiseChannels:
    @pytest.mark.parametrize("p1,eps", [(0.0, 0.1), (0.3, 0.0), (0.2, 0.05)])
    def test_single_qubit_exact(self, p1, eps):
        c = Circuit(1).x(0).measure_all()
        probs = exact_probabilities(c, NoiseProfile(p1=p1, readout_eps=eps))
        flip = 2 * p1 / 3
        expected_one = (1 - flip) * (1 - eps) + flip * eps
        assert probs["1"] == pytest.approx(expected_one)

    def test_two_qubit_depolarizing_marginal(self):
        # 8 of the 15 non-identity Paulis flip the control
        probs = exact_probabilities(Circuit(2).cx(0, 1).measure_all(), NoiseProfile(p2=0.3))
        p_first = probs.get("10", 0) + probs.get("11", 0)
        assert p_first == pytest.approx(8 * 0.3 / 15)

    @pytest.mark.parametrize("method", ["stabilizer", "statevector", "density"])
    def test_sampled_rates_match_channel(self, method):
        noise = NoiseProfile(p1=0.15, readout_eps=0.05)
        c = Circuit(1).x(0).measure_all()
        bits, _ = sample_bits(c, 40000, noise, seed=3, method=method)
        expected = (1 - 0.1) * 0.95 + 0.1 * 0.05
        assert bits.mean() == pytest.approx(expected, abs=4 * math.sqrt(expected * (1 - expected) / 40000))

    def test_density_vs_trajectories(self, rng):
        c = random_circuit(4, 30, rng)
        noise = NoiseProfile(p1=0.01, p2=0.05, readout_eps=0.02)
        exact = exact_probabilities(c, noise)
        shots = 20000
        sampled = freq(sample_counts(c, shots, noise, seed=9, method="statevector"))
        # generous bound: TVD of an empirical distribution over 16 outcomes
        assert tvd(exact, sampled) < 0.03

    def test_noiseless_density_equals_statevector(self, rng):
        c = random_circuit(3, 20, rng)
        ideal = exact_probabilities(c)
        dens = exact_probabilities(c, NoiseProfile(p1=0.0, p2=0.0, overrides={"qubits": {"0": {"p1": 0.0}}}))
        assert tvd(ideal, dens) < 1e-12


class TestClifford:
    def test_detection(self):
        assert is_clifford_circuit(Circuit(2).h(0).cx(0, 1).rz(math.pi / 2, 1).ops)
        assert not is_clifford_circuit(Circuit(1).rz(0.3, 0).ops)

    @pytest.mark.parametrize("seed", range(20))
    def test_tableau_matches_statevector(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 11))
        c = random_clifford(n, 40, rng)
        exact = exact_probabilities(c)
        shots = 4000
        sampled = freq(sample_counts(c, shots, seed=seed, method="stabilizer"))
        # support size bounds the expected shot-noise TVD
        sigma = math.sqrt(len(exact) / shots)
        assert tvd(exact, sampled) < 3 * sigma
        assert set(sampled) <= set(exact)

    def test_pauli_conjugation(self):
        p = clifford_conjugate_pauli(Circuit(2).h(0).cx(0, 1).ops, Pauli.from_label("ZI"))
        assert p.label() in ("+XX", "XX")

    @given(st.integers(0, 10_000))
    def test_group_inverse(self, seed):
        g = clifford_group(2)
        rng = np.random.default_rng(seed)
        ops = g.sample(rng, (0, 1))
        table = g.identity_table()
        g.update(table, ops, {0: 0, 1: 1})
        c = Circuit(2).extend(ops).extend(g.inverse_ops(table, (0, 1)))
        # inverse is exact modulo a Pauli, so the output is a basis state
        assert probabilities(c).max() == pytest.approx(1.0)

    def test_group_sizes(self):
        assert len(clifford_group(1).words) == 6
        assert len(clifford_group(2).words) == 720


class TestBackends:
    """numba and numpy kernels must give identical samples for identical seeds."""

    def test_statevector_trajectories(self, both_backends, rng):
        c = random_circuit(6, 50, rng)
        noise = NoiseProfile(p1=0.01, p2=0.03, readout_eps=0.01)
        out = both_backends(lambda: sample_bits(c, 500, noise, seed=11, method="statevector")[0])
        np.testing.assert_array_equal(out["numba"], out["numpy"])

    def test_noiseless_statevector(self, both_backends, rng):
        c = random_circuit(8, 60, rng)
        out = both_backends(lambda: simulate_statevector(c))
        np.testing.assert_allclose(out["numba"], out["numpy"], atol=1e-12)

    def test_stabilizer_frames(self, both_backends, rng):
        c = random_clifford(30, 300, rng)
        noise = NoiseProfile(p1=0.01, p2=0.02, readout_eps=0.01)
        out = both_backends(lambda: sample_bits(c, 300, noise, seed=5, method="stabilizer")[0])
        np.testing.assert_array_equal(out["numba"], out["numpy"])

    def test_stabilizer_noiseless(self, both_backends, rng):
        c = random_clifford(12, 120, rng)
        out = both_backends(lambda: sample_bits(c, 200, seed=2, method="stabilizer")[0])
        np.testing.assert_array_equal(out["numba"], out["numpy"])

    def test_env_flag(self):
        import subprocess
        import sys

        code = "from qbench import _accel; print(_accel.backend_name())"
        env = {"QBENCH_NO_NUMBA": "1", "PATH": "/usr/bin:/bin"}
        out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
        assert out.stdout.strip() == "numpy"


class TestExecute:
    def test_run_counts_lowers_and_respects_size(self):
        dev = line_device(3)
        counts = run_counts([Circuit(3).h(0).cx(0, 1).measure_all()], dev, 1000, seed=1)[0]
        assert set(counts) <= {"000", "110"}
        with pytest.raises(ValueError):
            run_bits([Circuit(4).h(0)], dev, 10)

    def test_seeded_determinism(self, rng):
        dev = line_device(4, NoiseProfile(p1=0.01, p2=0.02, readout_eps=0.01))
        c = random_circuit(4, 20, rng)
        a = run_bits([c], dev, 200, seed=7)[0]
        b = run_bits([c], dev, 200, seed=7)[0]
        np.testing.assert_array_equal(a, b)


class TestGroupMatrices:
    @given(st.integers(1, 2), st.lists(st.integers(0, 10_000), min_size=1, max_size=6))
    def test_matrices_compose_like_updates(self, k, picks):
        g = clifford_group(k)
        qubits = tuple(range(k))
        table = g.identity_table()
        by_matrix = g.identity_table().astype(np.int64)
        for pick in picks:
            cls = pick % len(g)
            g.update(table, [GateOp(name, qs) for name, qs in g.words[cls]], dict(zip(qubits, qubits)))
            by_matrix = (by_matrix @ g.matrices[cls]) & 1
        np.testing.assert_array_equal(table, by_matrix)


class TestReferenceSampling:
    def test_reference_is_ideal_outcome(self):
        from qbench.sim.sampler import sample_bits_with_reference

        c = Circuit(3).x(0).h(1).h(1).x(2)
        c.append("measure", (0,)).append("measure", (2,))
        bits, ref, order = sample_bits_with_reference(c, 500, NoiseProfile(p1=0.05, readout_eps=0.05), seed=1)
        assert order == [0, 2] and ref.tolist() == [1, 1]
        assert 0 < (bits != ref).mean() < 0.2

    def test_rejects_non_clifford(self):
        from qbench.sim.sampler import SimulationError, sample_bits_with_reference

        with pytest.raises(SimulationError):
            sample_bits_with_reference(Circuit(1).rx(0.3, 0), 10)

    def test_trusted_circuit_matches_checked(self):
        c = Circuit(2).h(0).cx(0, 1)
        t = Circuit.trusted(2, list(c.ops))
        assert t.ops == c.ops and t.metadata == {} and len(t) == 2
