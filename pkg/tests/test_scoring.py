import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from qbench.dataset.records import BenchmarkRecord
from qbench.registry import HIGHER_BETTER, LOWER_BETTER
from qbench.scoring import (
    WHOLE_DEVICE,
    BenchmarkEntry,
    SeriesSpec,
    baseline_normalize,
    benchmark_weights,
    bundled_series,
    compute_score_table,
    effective_width,
    load_table1,
    metriq_score,
    score_subscores,
    values_from_records,
    width_aggregate,
    width_weights,
)

widths_st = st.lists(st.integers(1, 200), min_size=1, max_size=8)


def worked_example():
    spec = SeriesSpec("ex", "base", [
        BenchmarkEntry("BenchA", "v", (56,)),
        BenchmarkEntry("BenchB", "v", (10, 20)),
    ])
    values = {
        "base": {"BenchA": {56: 0.60}, "BenchB": {10: 0.82, 20: 0.76}},
        "dev": {"BenchA": {56: 0.75}, "BenchB": {10: 0.88, 20: 0.70}},
    }
    return spec, values


class TestFormulas:
    def test_width_weights(self):
        assert width_weights([10, 20]) == pytest.approx([1 / 3, 2 / 3])
        with pytest.raises(ValueError):
            width_weights([])
        with pytest.raises(ValueError):
            width_weights([0, 4])

    @given(widths_st)
    def test_width_weights_sum_to_one(self, widths):
        assert sum(width_weights(widths)) == pytest.approx(1.0)

    @given(widths_st)
    def test_effective_width_bounds(self, widths):
        mu = effective_width(widths)
        assert min(widths) - 1e-9 <= mu <= max(widths) + 1e-9

    def test_effective_width_reference(self):
        assert effective_width([10, 20]) == pytest.approx(500 / 30)
        assert effective_width(n_ref=100) == 100.0
        with pytest.raises(ValueError):
            effective_width()

    def test_normalize_directions(self):
        assert baseline_normalize(0.9, 0.6) == pytest.approx(150.0)
        assert baseline_normalize(2.0, 4.0, LOWER_BETTER) == pytest.approx(200.0)
        assert baseline_normalize(None, 1.0) == 0.0
        assert baseline_normalize(0.0, 1.0, LOWER_BETTER) == 0.0
        with pytest.raises(ValueError):
            baseline_normalize(1, 1, "sideways")

    @given(st.floats(0.01, 100), st.floats(0.01, 100), st.floats(0.01, 100))
    def test_normalize_scale_invariant(self, v, b, k):
        for d in (HIGHER_BETTER, LOWER_BETTER):
            assert baseline_normalize(v * k, b * k, d) == pytest.approx(baseline_normalize(v, b, d))

    @given(st.dictionaries(st.text("abcdef", min_size=1, max_size=3), st.floats(0.1, 500), min_size=1, max_size=8))
    def test_benchmark_weights_sum_to_one(self, mu):
        w = benchmark_weights(mu)
        assert sum(w.values()) == pytest.approx(1.0)
        assert all(v > 0 for v in w.values())

    def test_metriq_score_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            metriq_score({"a": 1.0}, {"a": 0.5})
        assert metriq_score({"a": 100.0, "b": None}, {"a": 0.25, "b": 0.75}) == 25.0

    def test_width_aggregate(self):
        assert width_aggregate([1.0, 4.0], [0.5, 0.5]) == 2.5
        with pytest.raises(ValueError):
            width_aggregate([1.0], [0.5, 0.5])


class TestCompositeScore:
    def test_worked_example(self):
        spec, values = worked_example()
        table = compute_score_table(spec, values)
        w = table.weights
        assert w["BenchA"] == pytest.approx(0.771, abs=5e-4)
        assert w["BenchB"] == pytest.approx(0.229, abs=5e-4)
        dev = table.row("dev")
        assert dev.subscores["BenchA"] == pytest.approx(125.0)
        assert dev.subscores["BenchB"] == pytest.approx(97.4, abs=0.05)
        assert dev.score == pytest.approx(118.7, abs=0.1)
        assert table.row("base").score == pytest.approx(100.0)

    @given(st.dictionaries(st.sampled_from(["A", "B", "C"]), st.floats(0.05, 5.0), min_size=3, max_size=3))
    def test_baseline_scores_100(self, vals):
        spec = SeriesSpec("s", "base", [BenchmarkEntry(b, "v", (4, 8)) for b in "ABC"])
        values = {"base": {b: {4: v, 8: v} for b, v in vals.items()}}
        assert compute_score_table(spec, values).row("base").score == pytest.approx(100.0)

    @given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10))
    def test_joint_rescale_invariant(self, a, b, k):
        spec = SeriesSpec("s", "base", [BenchmarkEntry("A", "v", (4, 8), direction=LOWER_BETTER)])
        v1 = {"base": {"A": {4: a, 8: b}}, "dev": {"A": {4: b, 8: a}}}
        v2 = {d: {"A": {w: x * k for w, x in r["A"].items()}} for d, r in v1.items()}
        s1 = compute_score_table(spec, v1).row("dev").score
        s2 = compute_score_table(spec, v2).row("dev").score
        assert s1 == pytest.approx(s2)

    def test_missing_width_counts_zero(self):
        spec = SeriesSpec("s", "base", [BenchmarkEntry("A", "v", (10, 30))])
        values = {"base": {"A": {10: 0.5, 30: 0.5}}, "dev": {"A": {10: 0.5}}}
        assert compute_score_table(spec, values).row("dev").subscores["A"] == pytest.approx(25.0)

    def test_lower_better_coverage(self):
        # a missing lower-is-better width must not read as a perfect zero
        spec = SeriesSpec("s", "base", [BenchmarkEntry("E", "v", (10, 30), direction=LOWER_BETTER)])
        values = {"base": {"E": {10: 2.0, 30: 2.0}}, "dev": {"E": {10: 2.0}}}
        assert compute_score_table(spec, values).row("dev").subscores["E"] == pytest.approx(25.0)

    def test_missing_benchmark_and_baseline(self):
        spec, values = worked_example()
        values["other"] = {"BenchA": {56: 0.6}}
        table = compute_score_table(spec, values)
        assert table.row("other").subscores["BenchB"] == 0.0
        with pytest.raises(KeyError):
            compute_score_table(spec, {"dev": values["dev"]})

    def test_outputs(self):
        spec, values = worked_example()
        table = compute_score_table(spec, values)
        assert table.rows[0].device == "base"
        assert table.to_csv().splitlines()[0] == "device,BenchA,BenchB,metriq_score"
        assert '"metriq_score"' in table.to_json()

    def test_series_validation(self):
        with pytest.raises(ValueError):
            SeriesSpec("s", "b", [BenchmarkEntry("A", "v", (1,)), BenchmarkEntry("A", "w", (2,))])
        with pytest.raises(ValueError):
            BenchmarkEntry("A", "v")
        spec, _ = worked_example()
        assert SeriesSpec.from_dict(spec.to_dict()) == spec


class TestPublishedSeries:
    def test_effective_widths(self):
        spec = bundled_series("v0.4")
        mu = spec.effective_widths()
        assert sum(mu.values()) == pytest.approx(483.5, abs=0.5)
        w = spec.weights()
        assert w["BSEQ"] == pytest.approx(0.2069, abs=5e-4)
        assert w["EPLG"] == pytest.approx(0.1494, abs=5e-4)
        assert w["Mirror Circuits"] == pytest.approx(0.1703, abs=5e-4)

    def test_table1_reconstruction(self):
        weights = bundled_series("v0.4").weights()
        rows = load_table1()
        recon = score_subscores({r.device: r.subscores for r in rows}, weights)
        for r in rows:
            assert recon[r.device] == pytest.approx(r.metriq_score, abs=0.5), r.device

    def test_table1_flags(self):
        rows = {r.device: r for r in load_table1()}
        assert rows["quantinuum_h2_2"].subscores["CLOPS"] is None
        assert any(r.flags for r in rows.values())


def _rec(device, bench, params, results, ts):
    return BenchmarkRecord(bench, "local", device, {"benchmark_name": bench, **params}, results, {}, ts)


class TestValuesFromRecords:
    def test_latest_wins_and_widths_filtered(self):
        spec = bundled_series("v0.4")
        recs = [
            _rec("d", "QML Kernel", {"num_qubits": 10}, {"accuracy": 0.5}, "2026-01-01T00:00:00Z"),
            _rec("d", "QML Kernel", {"num_qubits": 10}, {"accuracy": 0.7}, "2026-02-01T00:00:00Z"),
            _rec("d", "QML Kernel", {"num_qubits": 11}, {"accuracy": 0.9}, "2026-03-01T00:00:00Z"),
            _rec("d", "CLOPS", {}, {"clops": 1234.0}, "2026-01-01T00:00:00Z"),
        ]
        vals = values_from_records(recs, spec)
        assert vals["d"]["QML Kernel"] == {10: 0.7}
        assert vals["d"]["CLOPS"] == {WHOLE_DEVICE: 1234.0}

    def test_bseq_pairs(self):
        spec = bundled_series("v0.4")
        recs = [
            _rec("base", "BSEQ", {"shots": 10}, {"lccs": 113, "connection_fraction": 113 / 133}, "2026-01-01T00:00:00Z"),
            _rec("dev", "BSEQ", {"shots": 10}, {"lccs": 156, "connection_fraction": 1.0}, "2026-01-01T00:00:00Z"),
        ]
        vals = values_from_records(recs, spec)
        spec = SeriesSpec("s", "base", [e for e in spec.entries if e.benchmark == "BSEQ"])
        table = compute_score_table(spec, vals)
        assert round(table.row("dev").subscores["BSEQ"], 2) == 135.51
        assert not math.isnan(table.row("dev").score)

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=5))
    def test_order_independent(self, accs):
        spec = bundled_series("v0.4")
        recs = [
            _rec("d", "QML Kernel", {"num_qubits": 20}, {"accuracy": a}, f"2026-01-0{i + 1}T00:00:00Z")
            for i, a in enumerate(accs)
        ]
        assume(len(recs) > 0)
        assert values_from_records(recs, spec) == values_from_records(list(reversed(recs)), spec)
        assert values_from_records(recs, spec)["d"]["QML Kernel"][20] == accs[-1]
