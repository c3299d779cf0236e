"""Diagnostics: time rescaling, cross-simulator KS, existence, stationarity.

These run light-weight versions of the checks (the acceptance suite runs
them at full scale); fixed seeds make every report reproducible, so the
pass/fail assertions are deterministic.
"""

import numpy as np
import pytest

import rhp
from rhp.errors import InsufficientDataError, RhpError


def simulate_batch(model, kernel, horizon, reps, seed):
    return [
        rhp.simulate_rhp_cluster(model, kernel, horizon, rhp.substream(seed, r), replicate=r)
        for r in range(reps)
    ]


class TestTransformedGaps:
    def test_exact_on_pure_renewal(self, exp2, kernel0):
        s = rhp.EventStream(
            times=[0.0, 1.0, 3.0],
            generations=[0, 0, 0],
            parents=[-1, -1, -1],
            cluster_ids=[0, 1, 2],
            horizon=5.0,
        )
        gaps = rhp.transformed_gaps(s, exp2, kernel0)
        # origin gap dropped; remaining gaps are 2 * (interarrival times)
        assert gaps == pytest.approx([2.0, 4.0], rel=1e-12)

    def test_empty_stream(self, exp2, kernel0):
        s = rhp.EventStream([], [], [], [], horizon=5.0)
        assert rhp.transformed_gaps(s, exp2, kernel0).size == 0


class TestTimeRescaling:
    def test_exact_null_passes(self, exp1, kernel0):
        streams = simulate_batch(exp1, kernel0, 30.0, 60, seed=61)
        rep = rhp.time_rescaling_test(streams, exp1, kernel0)
        assert rep.passed
        assert rep.p_value > 0.01
        assert rep.sizes["streams"] == 60
        assert rep.sizes["gaps"] == sum(row["gaps"] for row in rep.detail)

    def test_excited_process_passes(self, gamma21, kernel05):
        streams = simulate_batch(gamma21, kernel05, 60.0, 100, seed=62)
        rep = rhp.time_rescaling_test(streams, gamma21, kernel05)
        assert rep.passed
        assert rep.sizes["gaps"] >= 3000

    def test_power_against_wrong_kernel(self, exp1, kernel05):
        # data excited at alpha = 0.8, model assumes 0.5: must reject hard
        hot = rhp.ExponentialKernel(0.8, 1.0)
        streams = simulate_batch(exp1, hot, 30.0, 60, seed=63)
        rep = rhp.time_rescaling_test(streams, exp1, kernel05)
        assert not rep.passed
        assert rep.p_value < 1e-10

    def test_insufficient_data(self, exp1, kernel0):
        streams = simulate_batch(exp1, kernel0, 3.0, 4, seed=64)
        with pytest.raises(InsufficientDataError, match="100"):
            rhp.time_rescaling_test(streams, exp1, kernel0)

    def test_report_dict_shape(self, exp1, kernel0):
        streams = simulate_batch(exp1, kernel0, 30.0, 60, seed=61)
        d = rhp.time_rescaling_test(streams, exp1, kernel0).to_dict()
        assert d["test"] == "time_rescaling"
        assert set(d) == {"test", "statistic", "p_value", "pass", "level", "sizes", "detail"}


class TestCrossSimulator:
    def test_cluster_vs_thinning_exponential(self, exp1, kernel05):
        rep = rhp.cross_simulator_test(exp1, kernel05, 40.0, reps=120, seed=65)
        assert rep.passed
        assert rep.sizes == {"reps_per_side": 120, "windows": 4}
        assert len(rep.detail) == 4
        assert {"window_lo", "window_hi", "statistic", "p_value", "reject"} <= set(rep.detail[0])

    def test_cluster_vs_thinning_gamma(self, gamma21, kernel05):
        rep = rhp.cross_simulator_test(gamma21, kernel05, 40.0, reps=100, seed=66)
        assert rep.passed

    def test_split_sample_calibration(self, exp1, kernel05):
        rep = rhp.cross_simulator_test(
            exp1, kernel05, 50.0, reps=120, seed=67, methods=("cluster", "cluster")
        )
        assert rep.passed

    def test_deterministic_reports(self, exp1, kernel05):
        a = rhp.cross_simulator_test(exp1, kernel05, 30.0, reps=60, seed=68)
        b = rhp.cross_simulator_test(exp1, kernel05, 30.0, reps=60, seed=68)
        assert a.to_dict() == b.to_dict()

    def test_window_validation(self, exp1, kernel05):
        with pytest.raises(ValueError, match="window"):
            rhp.cross_simulator_test(exp1, kernel05, 5.0, reps=100, window=10.0)


class TestCalibration:
    def test_rescaling_rejection_rate(self, exp1, kernel0):
        # exact null (memoryless model, no excitation): the KS p-value is
        # uniform, so rejections over 200 meta-replicates stay within
        # 1.5x the nominal 1% level (here: at most 3)
        rejections = 0
        for m in range(200):
            streams = [
                rhp.simulate_rhp_cluster(exp1, kernel0, 25.0, rhp.substream(71, m, r))
                for r in range(5)
            ]
            rep = rhp.time_rescaling_test(streams, exp1, kernel0)
            rejections += int(not rep.passed)
        assert rejections <= 3

    def test_cross_simulator_rejection_rate(self, exp1, kernel05):
        # discrete-count KS is conservative, so the same bound holds with room
        rejections = 0
        for m in range(100):
            rep = rhp.cross_simulator_test(
                exp1, kernel05, 20.0, reps=30, seed=1000 + m, methods=("cluster", "cluster")
            )
            rejections += int(not rep.passed)
        assert rejections <= 1


class TestExistencePreconditions:
    ROWS = [
        "finite_mean_interarrival",
        "interarrival_density",
        "renewal_function_finite",
        "satellite_shift_equivariance",
        "subcritical_branching",
    ]

    def test_healthy_model_passes(self, gamma21, kernel05):
        rep = rhp.existence_preconditions(gamma21, kernel05)
        assert rep.passed
        assert rep.statistic == 0.0
        assert rep.p_value is None
        assert [row["condition"] for row in rep.detail] == self.ROWS
        assert all(row["ok"] for row in rep.detail)

    def test_supercritical_kernel_flagged(self, gamma21):
        rep = rhp.existence_preconditions(gamma21, rhp.ExponentialKernel(1.0, 1.0))
        assert not rep.passed
        by_name = {row["condition"]: row for row in rep.detail}
        assert not by_name["subcritical_branching"]["ok"]
        assert by_name["finite_mean_interarrival"]["ok"]

    def test_defective_model_flagged(self, kernel05):
        bad = rhp.Tabulated(np.linspace(0, 1, 21), np.full(21, 0.5), allow_defective=True)
        rep = rhp.existence_preconditions(bad, kernel05)
        assert not rep.passed
        by_name = {row["condition"]: row for row in rep.detail}
        assert not by_name["finite_mean_interarrival"]["ok"]
        assert not by_name["interarrival_density"]["ok"]
        assert not by_name["renewal_function_finite"]["ok"]
        assert by_name["subcritical_branching"]["ok"]
        assert rep.statistic == 3.0


class TestStationarityAndConvergence:
    def test_small_scale_passes(self, kernel05):
        model = rhp.Gamma(2.0, 2.0)
        rep = rhp.stationarity_and_convergence(
            model, kernel05, shifts=(10.0, 20.0, 30.0), window=5.0, reps=500, seed=69
        )
        assert rep.passed
        parts = {row["part"] for row in rep.detail}
        assert parts == {"pairwise", "convergence", "rate"}
        rates = [row for row in rep.detail if row["part"] == "rate"]
        assert all(abs(row["estimate"] - 2.0) <= 3.0 * row["se"] for row in rates)

    def test_deterministic(self, kernel05):
        model = rhp.Gamma(2.0, 2.0)
        kwargs = dict(shifts=(8.0, 16.0), window=4.0, reps=200, seed=70)
        a = rhp.stationarity_and_convergence(model, kernel05, **kwargs)
        b = rhp.stationarity_and_convergence(model, kernel05, **kwargs)
        assert a.to_dict() == b.to_dict()

    def test_validation(self, kernel05):
        model = rhp.Gamma(2.0, 2.0)
        with pytest.raises(ValueError, match="increasing"):
            rhp.stationarity_and_convergence(model, kernel05, shifts=(10.0, 10.0), reps=100)
        bad = rhp.Tabulated(np.linspace(0, 1, 21), np.full(21, 0.5), allow_defective=True)
        with pytest.raises(RhpError, match="finite mean"):
            rhp.stationarity_and_convergence(bad, kernel05, shifts=(5.0, 10.0), reps=100)
