"""
Probe Tests
===========

Fast checks of the probe plumbing. The full-size measurements live in
tests/validation.
"""

import math

import numpy as np
import pandas as pd
import pytest

from hexgas_lattice.boundary import BoundaryMode
from hexgas_lattice.exceptions import ConfigurationError
from hexgas_lattice.lattice import Direction, Lattice
from hexgas_lattice.probes import (
    ProbeResult,
    ProbeStatus,
    probe_equilibrium,
    probe_near_wall,
    probe_relaxation,
    probe_sound_speed,
    _refine,
    _track_front,
    probe_viscosity,
    shear_noise,
    shear_probabilities,
)


class TestProbeResult:
    def test_relative_error(self):
        result = ProbeResult("x", 1.1, "u", 1.0, ProbeStatus.OK)
        assert result.relative_error == pytest.approx(0.1)

    def test_relative_error_without_theory(self):
        assert math.isnan(ProbeResult("x", 1.0, "u", 0.0, ProbeStatus.OK).relative_error)

    def test_report(self):
        result = ProbeResult(
            "viscosity", 1.6, "spacing^2/tick", 1.875, ProbeStatus.OK, extras={"decay": 0.02}
        )
        text = result.report()
        assert "viscosity" in text
        assert "decay" in text
        assert "ok" in text

    def test_to_csv(self, tmp_path):
        series = pd.DataFrame({"step": [0, 1], "amplitude": [0.1, 0.09]})
        result = ProbeResult("v", 1.0, "u", 1.0, ProbeStatus.OK, series)
        path = result.to_csv(tmp_path / "v.csv")
        assert pd.read_csv(path).equals(series)


class TestRelaxation:
    def test_decaying_series(self):
        steps = np.arange(200)
        series = pd.DataFrame({"step": steps, "std": np.exp(-steps / 20.0)})
        result = probe_relaxation(series)
        assert result.status is ProbeStatus.OK
        assert result.measured == 47.0
        assert result.extras["monotone_after_25"] == 1.0

    def test_sloshing_series_reports_rise(self):
        steps = np.arange(300)
        std = np.exp(-steps / 40.0) * (1.0 + 0.5 * np.sin(2 * np.pi * steps / 100.0))
        result = probe_relaxation(pd.DataFrame({"step": steps, "std": std}))
        assert result.extras["monotone_after_25"] == 0.0
        assert result.extras["largest_window_rise"] > 0.0

    def test_flat_series_is_inconclusive(self):
        series = pd.DataFrame({"step": np.arange(100), "std": np.full(100, 0.1)})
        result = probe_relaxation(series)
        assert result.status is ProbeStatus.INCONCLUSIVE
        assert math.isnan(result.measured)


class TestNearWall:
    def _lattice(self, near_state: int) -> Lattice:
        boundary = BoundaryMode.walled(20, 20)
        cells = np.full((20, 20), 0b000111, dtype=np.uint8)
        cells[:, 16:19] = near_state
        cells[boundary.walls] = 0
        return Lattice(cells, boundary.mask)

    def test_dense_wall_layer(self):
        result = probe_near_wall([self._lattice(63)] * 3)
        assert result.status is ProbeStatus.OK
        assert result.measured == pytest.approx(2.0)

    def test_no_densification_fails(self):
        result = probe_near_wall([self._lattice(0b000111)])
        assert result.status is ProbeStatus.FAILED
        assert result.measured == pytest.approx(1.0)

    def test_periodic_edge_is_inconclusive(self, half_filled):
        assert probe_near_wall([half_filled]).status is ProbeStatus.INCONCLUSIVE


class TestSoundSpeed:
    def test_no_pulse(self):
        result = probe_sound_speed((40, 40), 0.3, seed=1, delta=0.0)
        assert result.status is ProbeStatus.INCONCLUSIVE
        assert result.theory == pytest.approx(1 / math.sqrt(2))

    def test_over_full(self):
        with pytest.raises(ConfigurationError):
            probe_sound_speed((40, 40), 0.95, seed=1, delta=0.1)

    def test_odd_height(self):
        with pytest.raises(ConfigurationError):
            probe_sound_speed((40, 39), 0.3, seed=1)

    def test_deterministic(self):
        kwargs = dict(delta=0.1, steps=12, ensembles=2)
        a = probe_sound_speed((40, 40), 0.3, 9, **kwargs)
        b = probe_sound_speed((40, 40), 0.3, 9, workers=2, **kwargs)
        pd.testing.assert_frame_equal(a.series, b.series)

    def test_rejects_empty_run(self):
        with pytest.raises(ConfigurationError, match="probe_steps"):
            probe_sound_speed((40, 40), 0.3, seed=1, steps=0)
        with pytest.raises(ConfigurationError, match="ensembles"):
            probe_sound_speed((40, 40), 0.3, seed=1, ensembles=0)

    def test_front_search_prefers_dominant_ridge(self):
        # A strong ridge at 0.7 bins/step and a weaker one on the light cone.
        times = np.arange(10, 40, dtype=float)
        centres = np.arange(60) + 0.5
        sound = np.exp(-0.5 * (centres[None, :] - (3.0 + 0.7 * times[:, None])) ** 2)
        cone = 0.5 * np.exp(-0.5 * (centres[None, :] - (3.0 + 1.0 * times[:, None])) ** 2)
        speeds = np.round(np.arange(0.2, 1.0 + 1e-9, 0.005), 3)
        offsets = np.arange(0.0, 10.0, 0.5)
        scores = _track_front(sound + cone, times, speeds, offsets)
        i, j = np.unravel_index(np.argmax(scores), scores.shape)
        assert speeds[i] == pytest.approx(0.7, abs=0.01)
        assert offsets[j] == pytest.approx(3.0, abs=0.5)

    def test_front_outside_profile_scores_zero(self):
        profiles = np.ones((4, 10))
        scores = _track_front(profiles, np.arange(4.0), np.array([0.5]), np.array([20.0]))
        assert scores[0, 0] == 0.0

    def test_refine_parabola_vertex(self):
        assert _refine(np.array([1.0, 3.0, 2.0]), 1) == pytest.approx(1 / 6)
        assert _refine(np.array([2.0, 1.0, 2.0]), 1) == 0.0


class TestViscosity:
    def test_shear_probabilities(self):
        p = shear_probabilities((8, 16), 0.5, 0.1)
        rho = 3.0
        expected = rho * 0.1 * np.sin(2 * np.pi * np.arange(16) / 16) / 2
        np.testing.assert_allclose(p[:, 0, Direction.E] - 0.5, expected, atol=1e-12)
        np.testing.assert_allclose(p[:, 0, Direction.W] - 0.5, -expected, atol=1e-12)
        np.testing.assert_allclose(p[:, 0, Direction.NE], 0.5)

    def test_amplitude_out_of_range(self):
        with pytest.raises(ConfigurationError):
            shear_probabilities((8, 16), 0.95, 0.1)

    def test_zero_amplitude_is_inconclusive(self):
        result = probe_viscosity((32, 32), 0.5, 0.0, seed=3, ensembles=2, steps=10)
        assert result.status is ProbeStatus.INCONCLUSIVE
        assert result.theory == pytest.approx(1.875)

    def test_default_run_skips_collision_transient(self):
        result = probe_viscosity((16, 32), 0.5, 0.1, seed=4, ensembles=2)
        # 2/Λ(3) = 16 steps, then two predicted e-folds of the k = 2π/32 mode.
        assert result.extras["fit_start"] == 16.0
        assert len(result.series) == 16 + math.ceil(2.0 / (1.875 * (2 * math.pi / 32) ** 2)) + 1

    def test_short_explicit_run_clamps_transient(self):
        result = probe_viscosity((16, 16), 0.5, 0.1, seed=4, ensembles=2, steps=10)
        assert result.extras["fit_start"] == 5.0

    def test_noise_scale(self):
        assert shear_noise((64, 64), 0.5, 16) == pytest.approx(
            math.sqrt(1.5 / (64 * 64 * 16)) / 3
        )

    def test_initial_amplitude_tracks_imprint(self):
        result = probe_viscosity((64, 64), 0.5, 0.1, seed=5, ensembles=4, steps=5)
        assert result.extras["initial_amplitude"] == pytest.approx(0.1, abs=0.02)

    def test_deterministic_across_workers(self):
        a = probe_viscosity((16, 16), 0.5, 0.1, seed=2, ensembles=3, steps=6)
        b = probe_viscosity((16, 16), 0.5, 0.1, seed=2, ensembles=3, steps=6, workers=3)
        pd.testing.assert_frame_equal(a.series, b.series)

    def test_invalid_fill(self):
        with pytest.raises(ConfigurationError):
            probe_viscosity((16, 16), 0.0, 0.1, seed=2)


class TestEquilibrium:
    def test_small_run(self):
        result = probe_equilibrium((20, 20), 0.5, seed=4, window=30)
        assert result.measured == pytest.approx(0.5, abs=0.04)
        assert len(result.series) == 30
        assert {f"n{i}" for i in range(6)} <= set(result.extras)
