"""
Tests for evolution-time optimization and detuning rules
"""
import numpy as np
import pytest
from scipy import integrate

from core.errors import ConfigurationError, DomainError, InfeasibleSettingError
from core.optimal import (
    cosine_factors,
    g_averaged,
    joint_search,
    max_visibility,
    optimize_evolution_times,
    parameter_card,
    suggest_frequencies,
    visibility,
)

X_STAR = 2.728771
G_STAR = 0.1171519
TAU_RATIO = 1.168069


class TestGAveraged:

    def test_closed_form(self):
        x = 2.0
        expected = np.exp(-x) * (np.sinh(x) / x - 1.0)
        assert g_averaged(x, x) == pytest.approx(expected, rel=1e-12)

    def test_series_branch_is_continuous(self):
        u = 0.0099
        expected = np.exp(-u) * (np.sinh(u) / u - 1.0)
        assert g_averaged(u, u) == pytest.approx(expected, rel=1e-7)
        assert g_averaged(0.0, 3.0) == 0.0

    def test_vectorized_and_scalar(self):
        out = g_averaged(np.array([0.5, 1.0, 2.0]), 1.0)
        assert out.shape == (3,)
        assert isinstance(g_averaged(1.0, 2.0), float)

    def test_negative_x(self):
        with pytest.raises(DomainError):
            g_averaged(-0.1, 1.0)

    @pytest.mark.parametrize("xa,xb", [(0.5, 0.5), (1.0, 3.0), (2.7, 2.7), (4.0, 0.2)])
    def test_rho_average_of_visibility(self, xa, xb):
        """Uniform average over rho in [-1, 1] of the unit-visibility bracket"""
        value, _ = integrate.quad(lambda r: visibility(xa, xb, r), -1.0, 1.0)
        assert value / 2.0 == pytest.approx(g_averaged(xa, xb), rel=1e-9)


class TestVisibility:

    def test_sign_and_phase(self):
        plus = visibility(1.0, 1.0, 0.5, sign=1, phase_alpha=0.3, phase_beta=0.1)
        minus = visibility(1.0, 1.0, -0.5, sign=-1, phase_alpha=0.3, phase_beta=-0.1)
        assert plus == pytest.approx(minus)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ConfigurationError):
            visibility(1.0, 1.0, 0.5, sign=0)
        with pytest.raises(DomainError):
            visibility(1.0, 1.0, 1.5)


class TestMaxVisibility:

    def test_optimum(self):
        point = max_visibility()
        assert point.x_alpha == pytest.approx(X_STAR, rel=1e-4)
        assert point.x_beta == pytest.approx(point.x_alpha, rel=1e-4)
        assert point.g_value == pytest.approx(G_STAR, rel=1e-6)

    def test_grid_never_beats_optimum(self):
        grid = np.linspace(0.0, 8.0, 401)
        xa, xb = np.meshgrid(grid, grid)
        values = g_averaged(xa, xb)
        point = max_visibility()
        assert values.max() <= point.g_value + 1e-12
        i, j = np.unravel_index(np.argmax(values), values.shape)
        assert abs(xa[i, j] - point.x_alpha) <= 0.05

    def test_evolution_times(self):
        tau_a, tau_b, x_star = optimize_evolution_times(1e-3, 4e-3)
        assert x_star == pytest.approx(X_STAR, rel=1e-4)
        assert tau_a / 1e-3 == pytest.approx(TAU_RATIO, rel=1e-5)
        assert tau_b / 4e-3 == pytest.approx(TAU_RATIO, rel=1e-5)

    def test_t2star_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            optimize_evolution_times(0.0, 1e-3)


class TestFrequencies:

    TAU = 1e-4

    @pytest.mark.parametrize("mode,m,l,expected", [
        ("cross", 0, 0, (1, 0, 4)),
        ("cross", 1, 0, (2, 1, 4)),
        ("auto_short", 1, 2, (1, 2, 2)),
        ("auto_long", 0, 1, (1, 3, 4)),
    ])
    def test_rules(self, mode, m, l, expected):
        n1, n2, denominator = expected
        omega_1, omega_2 = suggest_frequencies(mode, self.TAU, self.TAU, m, l)
        assert omega_1 * self.TAU == pytest.approx(n1 * np.pi / denominator)
        assert omega_2 * self.TAU == pytest.approx(n2 * np.pi / denominator, abs=1e-12)

    def test_cross_rule_gives_quarter_phase_difference(self):
        omega_1, omega_2 = suggest_frequencies("cross", self.TAU, 2 * self.TAU, 2, 1)
        f = cosine_factors(omega_1, omega_2, self.TAU, 2 * self.TAU)
        assert abs(f["cos_minus"]) == pytest.approx(abs(f["sin_minus"]))

    def test_unknown_mode(self):
        with pytest.raises(ConfigurationError):
            suggest_frequencies("diagonal", self.TAU, self.TAU)
        with pytest.raises(ConfigurationError):
            suggest_frequencies("cross", 0.0, self.TAU)


class TestJointSearch:

    def test_first_feasible_setting(self):
        found = joint_search(1e-4, 1e-4, threshold=0.2)
        assert (found["m"], found["l"]) == (0, 1)
        assert found["weakest"] == pytest.approx(np.sin(np.pi / 8.0), rel=1e-6)
        assert found["omega_2"] * 1e-4 == pytest.approx(np.pi / 8.0)

    def test_mode_matches_search(self):
        assert suggest_frequencies("joint", 1e-4, 1e-4) == pytest.approx((0.0, np.pi / 8e-4))

    def test_infeasible_reports_best(self):
        with pytest.raises(InfeasibleSettingError) as excinfo:
            joint_search(1e-4, 1e-4, threshold=0.9)
        best = excinfo.value.best
        assert best is not None
        assert 0.0 < best["weakest"] <= 0.9


class TestParameterCard:

    def test_keys_and_values(self):
        card = parameter_card(1e-3, 2e-3, mode="cross", tau_rule="optimal")
        assert set(card) == {"mode", "tau_rule", "m", "l", "threshold", "t2star_s", "tau_s", "omega_rad_s",
                             "x", "x_star", "g_value", "cosine_factors"}
        assert card["x"][0] == pytest.approx(card["x_star"], rel=1e-9)
        assert card["g_value"] == pytest.approx(G_STAR, rel=1e-5)

    def test_t2star_rule_and_joint_mode(self):
        card = parameter_card(1e-3, 1e-3, mode="joint", tau_rule="t2star")
        assert card["tau_s"] == [1e-3, 1e-3]
        assert (card["m"], card["l"]) == (0, 1)
        assert card["x"] == pytest.approx([2.0, 2.0])

    def test_unknown_tau_rule(self):
        with pytest.raises(ConfigurationError):
            parameter_card(1e-3, 1e-3, tau_rule="longest")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
