import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqmetrics.annoyance import (
    CSV_COLUMNS,
    AnnoyanceModel,
    ComparisonReport,
    MetricStats,
    PsychoMetricsSummary,
    RunMetrics,
    annoyance_index,
    build_comparison,
    summarize_runs,
)
from sqmetrics.errors import DuplicateKeyError, EmptyInputError, InvalidSpecError
from sqmetrics.signal_io import BELOW_FLOOR, MODEL_TYPES, RecordingMeta

metric = st.floats(0.0, 200.0)
quad = st.tuples(metric, metric, metric, metric)


def summary(L=1.0, SH=1.0, R=1.0, F=1.0):
    return summarize_runs([RunMetrics(L, SH, R, F)])


class TestIndex:
    def test_unit_inputs(self):
        assert annoyance_index((1, 1, 1, 1)) == 2.2

    def test_zero(self):
        assert annoyance_index((0, 0, 0, 0)) == 0.0

    def test_worked_example(self):
        assert annoyance_index(summary(109, 1.5, 0.8, 1.0)) == pytest.approx(12.75, abs=1e-12)

    def test_model_defaults(self):
        m = AnnoyanceModel()
        assert m.scale == 0.1 and m.weights == (1.0, 1.0, 15.0, 5.0)
        assert m.scope == "dry-type vacuum cleaners"

    def test_wrong_arity(self):
        with pytest.raises(InvalidSpecError):
            annoyance_index((1, 2, 3))

    @given(quad, quad, st.floats(-10, 10), st.floats(-10, 10))
    def test_linearity(self, m1, m2, a, b):
        combo = tuple(a * x + b * y for x, y in zip(m1, m2))
        lhs = annoyance_index(combo)
        rhs = a * annoyance_index(m1) + b * annoyance_index(m2)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)

    @given(quad, st.floats(0, 100))
    def test_coefficient_sensitivity(self, m, d):
        L, SH, R, F = m
        base = annoyance_index(m)
        assert annoyance_index((L, SH, R + d, F)) - base == pytest.approx(1.5 * d, rel=1e-9, abs=1e-9)
        assert annoyance_index((L, SH, R, F + d)) - base == pytest.approx(0.5 * d, rel=1e-9, abs=1e-9)

    @given(quad, quad)
    def test_ordering(self, a, b):
        hi = tuple(max(x, y) for x, y in zip(a, b))
        assert annoyance_index(hi) >= annoyance_index(a)


class TestSummaries:
    def test_two_runs(self):
        s = summarize_runs([RunMetrics(1, 0, 0, 0), RunMetrics(3, 0, 0, 0)])
        assert (s.loudness.mean, s.loudness.max, s.loudness.std) == (2.0, 3.0, 1.0)

    def test_identical_runs(self):
        s = summarize_runs([RunMetrics(2, 1, 0.5, 0.1)] * 5)
        assert s.loudness.std == 0 and s.fluctuation.std == 0

    def test_single_run(self):
        s = summary(4.0)
        assert s.loudness.mean == s.loudness.max == 4.0 and s.loudness.std == 0.0

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            summarize_runs([])

    def test_negative_rejected(self):
        with pytest.raises(InvalidSpecError):
            MetricStats(-1.0, 0.0, 0.0)

    @given(st.lists(quad, min_size=1, max_size=8), st.randoms())
    def test_permutation_invariant(self, runs, rnd):
        a = summarize_runs([RunMetrics(*r) for r in runs])
        shuffled = list(runs)
        rnd.shuffle(shuffled)
        b = summarize_runs([RunMetrics(*r) for r in shuffled])
        for x, y in zip(a.values("mean") + a.values("std"), b.values("mean") + b.values("std")):
            assert x == pytest.approx(y, rel=1e-9, abs=1e-12)
        assert a.values("max") == b.values("max")


class TestComparison:
    def entries(self):
        dev = MODEL_TYPES["model type 1"]
        return [
            (RecordingMeta("C3", "S1", dev), summary(5), 80.6),
            (RecordingMeta("C1", "S1", dev), summary(3), 77.4),
            (RecordingMeta("C2", "S1", dev), summary(9), 90.4),
        ]

    def test_rows_sorted(self):
        rep = build_comparison(self.entries())
        assert [r.channel for r in rep.rows] == ["C1", "C2", "C3"]
        assert [r.la_eq_db for r in rep.rows] == [77.4, 90.4, 80.6]

    def test_duplicate(self):
        e = self.entries()
        with pytest.raises(DuplicateKeyError):
            build_comparison(e + [e[0]])

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            build_comparison([])

    def test_schema_fields(self):
        d = build_comparison(self.entries()).to_dict()
        row = d["rows"][0]
        assert list(row)[:4] == ["device", "channel", "setting", "la_eq_db"]
        for k in ("loudness_sone", "sharpness_acum", "roughness_asper", "fluctuation_vacil"):
            assert set(row[k]) == {"mean", "max", "std"}
        assert "annoyance_index" in row
        assert d["std_kind"] == "population"
        assert d["annoyance_model"]["scope"] == "dry-type vacuum cleaners"
        assert d["devices"][0]["name"] == "LG V-CP243NB"

    def test_json_round_trip(self):
        rep = build_comparison(self.entries())
        again = ComparisonReport.from_dict(json.loads(rep.to_json()))
        assert again.to_json() == rep.to_json()

    def test_csv(self):
        lines = build_comparison(self.entries()).to_csv().splitlines()
        assert lines[0].split(",") == CSV_COLUMNS
        assert lines[1].startswith("LG V-CP243NB,C1,S1,77.4000,")

    def test_below_floor_la_eq(self):
        dev = MODEL_TYPES["model type 2"]
        rep = build_comparison([(RecordingMeta("C1", "S2", dev), summary(0, 0, 0, 0), BELOW_FLOOR)])
        assert rep.to_dict()["rows"][0]["la_eq_db"] == "below-floor"
        assert ",below-floor," in rep.to_csv()

    def test_non_finite_la_eq(self):
        with pytest.raises(InvalidSpecError):
            build_comparison([(RecordingMeta("C1", "S1"), summary(), float("nan"))])

    def test_floats_fixed(self):
        rep = build_comparison([(RecordingMeta("C1", "S1"), summary(1 / 3), 70.123456)])
        row = rep.to_dict()["rows"][0]
        assert row["la_eq_db"] == 70.1235 and row["loudness_sone"]["mean"] == 0.3333
