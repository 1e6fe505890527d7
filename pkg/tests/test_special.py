"""Tests for log-gamma, digamma and trigamma."""
import numpy as np
import pytest
from scipy import special as reference

from diffcore import digamma, log_gamma, trigamma


@pytest.fixture
def grid():
    """1000 points spread over [0.1, 100], denser near zero."""
    return np.geomspace(0.1, 100.0, 1000)


class TestSpecialFunctions:
    """Test suite comparing the series evaluations against scipy."""

    def test_log_gamma_matches_reference(self, grid):
        """Test ln Γ to 1e-10 absolute error."""
        np.testing.assert_allclose(log_gamma(grid), reference.gammaln(grid), rtol=0, atol=1e-10)

    def test_digamma_matches_reference(self, grid):
        """Test ψ to 1e-10 absolute error."""
        np.testing.assert_allclose(digamma(grid), reference.psi(grid), rtol=0, atol=1e-10)

    def test_trigamma_matches_reference(self, grid):
        """Test ψ' to 1e-10 absolute error."""
        np.testing.assert_allclose(trigamma(grid), reference.polygamma(1, grid), rtol=0, atol=1e-10)

    def test_known_values(self):
        """Test closed forms: Γ(1) = Γ(2) = 1, Γ(1/2) = √π, ψ(1) = -γ."""
        np.testing.assert_allclose(log_gamma(np.array([1.0, 2.0])), [0.0, 0.0], atol=1e-12)
        assert log_gamma(0.5) == pytest.approx(0.5 * np.log(np.pi), abs=1e-12)
        assert digamma(1.0) == pytest.approx(-np.euler_gamma, abs=1e-12)
        assert trigamma(1.0) == pytest.approx(np.pi**2 / 6.0, abs=1e-12)

    def test_recurrence(self, grid):
        """Test ln Γ(x + 1) = ln Γ(x) + ln x."""
        np.testing.assert_allclose(log_gamma(grid + 1.0), log_gamma(grid) + np.log(grid), atol=1e-10)

    @pytest.mark.parametrize("fn", [log_gamma, digamma, trigamma])
    @pytest.mark.parametrize("bad", [0.0, -1.5, np.nan, np.inf])
    def test_rejects_invalid_arguments(self, fn, bad):
        """Test that non-positive and non-finite arguments raise ValueError."""
        with pytest.raises(ValueError):
            fn(np.array([1.0, bad]))
