import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qbench.circuits.devices import DeviceModel, NoiseProfile
from qbench.circuits.graphs import edge_coloring, grid_edges
from qbench.sim.sampler import probabilities
from qbench.system.bseq import (
    BASES,
    BseqResult,
    bseq_run,
    bseq_score_values,
    chsh_circuit,
    chsh_value,
    shot_noise_sigma,
)
from qbench.system.clops import clops_run, clops_value, workload_times
from qbench.system.eplg import (
    ChainSamplingError,
    drb_circuit,
    eplg_from_lf,
    eplg_run,
    eplg_score,
    layer_fidelity,
    sublayers,
)
from qbench.system.mirror import (
    PANEL_WEIGHTS,
    PASS_THRESHOLD,
    build_mirror_circuit,
    expected_mirror_bitstring,
    mc_score,
    mirror_run,
    polarization,
    sample_mirror_spec,
)
from qbench.system.rb_fit import fit_rb_decay, process_fidelity

from conftest import line_device  # noqa: E402

TORINO_EPLG = {10: 4.88, 20: 5.41, 50: 9.21, 100: 10.79}


class TestBseq:
    def test_chsh_circuit_ideal_correlators(self):
        # Bell pair on (0, 1): the four correlators combine to 2 sqrt 2
        corr = {}
        for basis in BASES:
            p = probabilities(chsh_circuit(2, [(0, 1)], basis))
            corr[basis] = p[0] + p[3] - p[1] - p[2]
        assert chsh_value(corr) == pytest.approx(2 * math.sqrt(2))

    def test_noiseless_grid(self):
        dev = DeviceModel("grid", 12, tuple(grid_edges(3, 4)))
        res = bseq_run(dev, shots=2000, seed=3)
        assert res.num_color_classes == len(edge_coloring(dev.edges))
        sigma = shot_noise_sigma(2000)
        for s in res.per_edge_S.values():
            assert abs(s - 2 * math.sqrt(2)) < 3 * sigma + 1e-9
        assert res.lccs == 12 and res.connection_fraction == 1.0

    def test_heavy_noise_breaks_violation(self):
        dev = line_device(6, NoiseProfile(p2=0.6))
        res = bseq_run(dev, shots=500, seed=1)
        assert res.lccs <= 1
        assert res.connection_fraction <= 1 / 6

    def test_partial_violation_components(self):
        # one very noisy edge splits a 6-qubit line in two
        noise = NoiseProfile(overrides={"edges": {"2-3": {"p2": 0.9}}})
        res = bseq_run(line_device(6, noise), shots=2000, seed=2)
        assert res.lccs == 3 and res.connection_fraction == pytest.approx(0.5)

    def test_score_goldens(self):
        base = (113, 113 / 133)
        assert round(bseq_score_values(156, 1.0, *base), 2) == 135.51
        assert round(bseq_score_values(56, 1.0, *base), 2) == 58.08
        assert bseq_score_values(113, 113 / 133, *base) == pytest.approx(100.0)

    def test_round_trip(self):
        res = bseq_run(line_device(4), shots=200, seed=0)
        again = BseqResult.from_dict(res.to_dict())
        assert again.lccs == res.lccs and again.per_edge_S == pytest.approx(res.per_edge_S)

    def test_seeded(self):
        dev = line_device(5, NoiseProfile(p2=0.05, readout_eps=0.02))
        assert bseq_run(dev, 300, seed=9).to_dict() == bseq_run(dev, 300, seed=9).to_dict()


class TestRbFit:
    @given(st.floats(0.5, 0.999), st.floats(0.3, 0.9), st.sampled_from([1, 2]))
    def test_recovers_noiseless_model(self, alpha, a, m):
        lengths = np.array([1, 2, 4, 8, 16, 30, 50, 70, 100])
        b = 2.0**-m
        fit = fit_rb_decay(lengths, a * alpha**lengths + b, m)
        assert fit.alpha == pytest.approx(alpha, abs=1e-6)

    def test_process_fidelity(self):
        assert process_fidelity(1.0, 2) == 1.0
        # 1 - (d^2 - 1)/d^2 (1 - alpha) for d = 4
        assert process_fidelity(0.9, 2) == pytest.approx(1 - 15 / 16 * 0.1)

    def test_alpha_bounded(self):
        fit = fit_rb_decay([1, 2, 4, 8], [0.3, 0.31, 0.2, 0.4], 1)
        assert 0.0 <= fit.alpha <= 1.0


class TestEplg:
    def test_sublayers_partition_chain(self):
        chain = [4, 7, 1, 9, 3]
        layers = sublayers(chain)
        assert len(layers) == 2
        pairs = [p for ps, _ in layers for p in ps]
        assert sorted(map(tuple, pairs)) == sorted(zip(chain, chain[1:]))
        for ps, idles in layers:
            used = [q for p in ps for q in p] + list(idles)
            assert sorted(used) == sorted(chain)

    def test_formulas(self):
        assert layer_fidelity([0.9, 0.8]) == pytest.approx(0.72)
        assert eplg_from_lf(0.99**9, 9) == pytest.approx(0.01)

    def test_drb_noiseless_returns_to_reference(self, rng):
        from qbench.sim.sampler import sample_counts

        c = drb_circuit(4, [(0, 1), (2, 3)], [], 6, rng)
        counts = sample_counts(c, 100, seed=1)
        assert len(counts) == 1

    def test_injected_noise(self):
        dev = line_device(12, NoiseProfile(p2=4e-3))
        res = eplg_run(dev, num_samples=4, shots=500, lengths=[2, 4, 8, 16, 30, 50], num_qubits_in_chain=12, seed=1)
        assert res.eplg == pytest.approx(4e-3, rel=0.3)
        assert len(res.chain) == 12 and res.n_2q == 11

    def test_noiseless_is_zero(self):
        res = eplg_run(line_device(6), num_samples=2, shots=100, lengths=[2, 4, 8], num_qubits_in_chain=6, seed=0)
        assert res.eplg == pytest.approx(0.0, abs=1e-9)
        assert res.layer_fidelity == pytest.approx(1.0)

    def test_chain_too_long(self):
        with pytest.raises(ChainSamplingError):
            eplg_run(line_device(5), num_qubits_in_chain=10)

    def test_chain_not_found(self):
        # a star has no 4-qubit path
        star = DeviceModel("star", 5, ((0, 1), (0, 2), (0, 3), (0, 4)))
        with pytest.raises(ChainSamplingError):
            eplg_run(star, num_samples=1, shots=10, lengths=[2], num_qubits_in_chain=4, seed=0, restarts=20)

    def test_score_goldens(self):
        assert eplg_score({10: 1.64, 20: 2.16, 50: 2.45, 100: 3.08}, TORINO_EPLG) == pytest.approx(338.40, abs=0.5)
        assert eplg_score({10: 4.53, 20: 8.10}, TORINO_EPLG) == pytest.approx(12.75, abs=0.5)
        assert eplg_score(TORINO_EPLG, TORINO_EPLG) == pytest.approx(100.0)


class TestMirror:
    def test_polarization(self):
        assert polarization(1.0, 4) == 1.0
        assert polarization(1 / 16, 4) == pytest.approx(0.0)
        assert PASS_THRESHOLD == pytest.approx(1 / math.e)

    def test_panel_weights(self):
        assert sum(PANEL_WEIGHTS) == pytest.approx(1.0)
        assert PANEL_WEIGHTS[-1] == pytest.approx(16 / 34)

    def test_mc_score_goldens(self):
        assert mc_score([0.7477, 0.4952, 0.4317, 0.4707, 0.2661, 0.1122]) == pytest.approx(0.26, abs=1e-6)
        assert mc_score([0.3172, 0.2757, 0.1268, 0.0336, 0.0037, 0.0]) == pytest.approx(0.041559, abs=1e-6)
        # unsupported panel points contribute zero
        assert mc_score([1, 1, 1, 1, None, None]) == pytest.approx(10 / 34)

    @given(st.integers(0, 10_000), st.integers(1, 6), st.integers(1, 5))
    def test_expected_bitstring_matches_statevector(self, seed, width, layers):
        dev = line_device(6)
        spec = sample_mirror_spec(dev, width, layers, 0.5, seed)
        circ = build_mirror_circuit(spec, dev.num_qubits)
        p = probabilities(circ)
        k = int(np.argmax(p))
        assert p[k] == pytest.approx(1.0)
        bits = [(k >> (dev.num_qubits - 1 - q)) & 1 for q in range(dev.num_qubits)]
        want = expected_mirror_bitstring(spec)
        assert [bits[q] for q in spec.qubits] == list(want)

    def test_noiseless_run(self):
        res = mirror_run(line_device(8), width=8, num_layers=4, num_circuits=3, shots=200, seed=1)
        assert res.polarization == pytest.approx(1.0) and res.pass_flag

    def test_noisy_run_decays(self):
        dev = line_device(8, NoiseProfile(p1=0.01, p2=0.05, readout_eps=0.02))
        res = mirror_run(dev, width=8, num_layers=8, num_circuits=3, shots=300, seed=1)
        assert 0.0 <= res.polarization < 0.9

    def test_width_exceeds_device_scores_zero(self):
        res = mirror_run(line_device(4), width=6, num_layers=2)
        assert res.polarization == 0.0 and not res.pass_flag and res.shots_total == 0
        with pytest.raises(ValueError):
            sample_mirror_spec(line_device(4), 6, 2)


class TestClops:
    def test_formula(self):
        assert clops_value(100, 1000, 100, 40.0) == pytest.approx(250000.0)
        with pytest.raises(ValueError):
            clops_value(1, 1, 1, 0.0)

    def test_modes_and_steady_state(self, timing):
        dev = DeviceModel("t", 20, tuple((i, i + 1) for i in range(19)), timing=timing)
        results = {m: clops_run(dev, num_qubits=10, num_layers=10, num_circuits=50, shots=20, mode=m, seed=0) for m in
                   ("instantiated", "parameterized", "twirled")}
        # recompiling every circuit is the slowest mode
        assert results["instantiated"].clops < results["twirled"].clops
        assert results["parameterized"].clops == pytest.approx(results["twirled"].clops)
        tw = results["twirled"]
        assert tw.steady_state_clops >= tw.clops
        assert tw.clops == pytest.approx(10 * 50 * 20 / tw.t_total)

    def test_workload_times(self, timing):
        t = workload_times(1000.0, timing, 3, 10, "twirled")
        per = 10 * (1e-6 + 250e-6) + 100e-6
        np.testing.assert_allclose(t, [per + 50e-6, per, per])
        with pytest.raises(ValueError):
            workload_times(1.0, timing, 1, 1, "bogus")

    def test_no_timing_model(self):
        res = clops_run(line_device(4), num_qubits=4, num_layers=2, num_circuits=2, shots=1)
        assert res.clops is None
