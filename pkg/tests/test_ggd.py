"""Tests for the generalized Gaussian likelihood."""
import math

import numpy as np
import pytest

from diffcore import GradTape, Tensor, backward, gradcheck, ops
from diffcore.tensor import ShapeError
from ggd import (
    ALPHA_FLOOR,
    BETA_FLOOR,
    INITIAL_BETA,
    MAX_POWER_EXPONENT,
    GGDParamMaps,
    cap_exponent,
    gaussian_nll,
    ggd_nll,
    initial_beta_bias,
    param_transform,
    softplus_inverse,
    uncertainty_map,
)

# ln Γ(1/2) - ln 2
PERFECT_GAUSSIAN_NLL = -0.1207823


def constant_maps(alpha: float, beta: float, shape=(1, 1, 4, 4)) -> GGDParamMaps:
    return GGDParamMaps(alpha=Tensor(np.full(shape, alpha)), beta=Tensor(np.full(shape, beta)))


def pixel_nll(residual: float, alpha: float, beta: float) -> float:
    """NLL of a single pixel with the given residual."""
    prediction = Tensor(np.full((1, 1, 1, 1), residual))
    target = Tensor(np.zeros((1, 1, 1, 1)))
    return ggd_nll(prediction, target, constant_maps(alpha, beta, shape=(1, 1, 1, 1))).item()


class TestParamTransform:
    """Test suite for the raw-to-parameter mapping."""

    def test_floors_hold_for_extreme_inputs(self, float64):
        """Test that very negative raw values stay above the floors."""
        raw = Tensor(np.full((1, 1, 2, 2), -50.0))
        params = param_transform(raw, raw)
        assert np.all(params.alpha.data >= ALPHA_FLOOR)
        assert np.all(params.beta.data >= BETA_FLOOR)
        params.validate()

    def test_initial_beta_bias(self, float64):
        """Test that the β bias yields the initial shape at zero features."""
        raw = Tensor(np.full((1, 1, 1, 1), initial_beta_bias()))
        params = param_transform(Tensor(np.zeros((1, 1, 1, 1))), raw)
        assert params.beta.item() == pytest.approx(INITIAL_BETA, abs=1e-12)
        assert initial_beta_bias() == pytest.approx(1.2476, abs=1e-4)

    def test_softplus_inverse_rejects_non_positive(self):
        """Test that softplus_inverse needs a positive argument."""
        with pytest.raises(ValueError):
            softplus_inverse(0.0)

    def test_shape_mismatch(self, float64):
        """Test that raw maps must agree in shape."""
        with pytest.raises(ShapeError):
            param_transform(Tensor(np.zeros((1, 1, 2, 2))), Tensor(np.zeros((1, 1, 2, 3))))

    def test_maps_must_be_single_channel(self, float64):
        """Test that parameter maps are (batch, 1, H, W)."""
        with pytest.raises(ShapeError):
            constant_maps(1.0, 2.0, shape=(1, 3, 2, 2))


class TestGGDNLL:
    """Test suite for the negative log-likelihood."""

    def test_perfect_prediction_gaussian_shape(self, float64):
        """Test the closed form at zero residual, α = 1, β = 2."""
        image = Tensor(np.full((1, 3, 4, 4), 0.5))
        nll = ggd_nll(image, image, constant_maps(1.0, 2.0))
        assert nll.item() == pytest.approx(PERFECT_GAUSSIAN_NLL, abs=1e-6)

    @pytest.mark.parametrize("sigma", [0.05, 0.3, 1.2])
    def test_reduces_to_gaussian(self, float64, sigma):
        """Test that β = 2, α = σ√2 differs from the Gaussian NLL by the constant -ln 2 on 100 residuals."""
        residuals = np.linspace(-2.0, 2.0, 100)
        offsets = np.array([pixel_nll(r, sigma * math.sqrt(2.0), 2.0) for r in residuals])
        offsets -= gaussian_nll(residuals, sigma)
        np.testing.assert_allclose(offsets, -math.log(2.0), rtol=1e-8)
        variance = uncertainty_map(constant_maps(sigma * math.sqrt(2.0), 2.0))
        np.testing.assert_allclose(variance, sigma**2, rtol=1e-12)

    @pytest.mark.parametrize("beta", [1.0, 1.5, 2.0, 3.0])
    def test_decreases_as_alpha_grows_toward_residual(self, float64, beta):
        """Test that a wider scale lowers the NLL while it stays below the residual."""
        residual = 0.8
        alphas = np.linspace(0.01, residual, 60)
        values = [pixel_nll(residual, alpha, beta) for alpha in alphas]
        assert np.all(np.diff(values) < 0.0)

    def test_laplace_shape(self, float64):
        """Test the β = 1 closed form |r| / α + ln α."""
        prediction = Tensor(np.full((1, 1, 2, 2), 0.7))
        target = Tensor(np.full((1, 1, 2, 2), 0.2))
        nll = ggd_nll(prediction, target, constant_maps(0.25, 1.0, shape=(1, 1, 2, 2))).item()
        assert nll == pytest.approx(0.5 / 0.25 + math.log(0.25), abs=1e-9)

    def test_sum_is_mean_times_count(self, float64, rng):
        """Test the two reductions agree."""
        prediction = Tensor(rng.uniform(size=(2, 3, 4, 4)))
        target = Tensor(rng.uniform(size=(2, 3, 4, 4)))
        maps = constant_maps(0.4, 1.5, shape=(2, 1, 4, 4))
        mean = ggd_nll(prediction, target, maps).item()
        total = ggd_nll(prediction, target, maps, reduction="sum").item()
        assert total == pytest.approx(mean * prediction.size, rel=1e-12)

    def test_unknown_reduction(self, float64):
        """Test that only mean and sum are accepted."""
        image = Tensor(np.zeros((1, 1, 2, 2)))
        with pytest.raises(ValueError):
            ggd_nll(image, image, constant_maps(1.0, 2.0, shape=(1, 1, 2, 2)), reduction="max")

    def test_map_shape_must_match_image(self, float64):
        """Test that parameter maps are checked against the image size."""
        image = Tensor(np.zeros((1, 3, 4, 4)))
        with pytest.raises(ShapeError):
            ggd_nll(image, image, constant_maps(1.0, 2.0, shape=(1, 1, 2, 2)))

    def test_below_floor_rejected(self, float64):
        """Test that hand-built maps under the floor are refused."""
        image = Tensor(np.zeros((1, 1, 2, 2)))
        with pytest.raises(ValueError):
            ggd_nll(image, image, constant_maps(1.0, 0.1, shape=(1, 1, 2, 2)))

    def test_gradient(self, float64, rng):
        """Test d NLL / d (prediction, raw α, raw β) against finite differences."""
        prediction = Tensor(rng.uniform(size=(1, 2, 3, 3)), requires_grad=True)
        target = Tensor(rng.uniform(size=(1, 2, 3, 3)) + 0.2)
        raw_alpha = Tensor(rng.normal(size=(1, 1, 3, 3)), requires_grad=True)
        raw_beta = Tensor(rng.normal(size=(1, 1, 3, 3)), requires_grad=True)

        def fn(p, a, b):
            return ggd_nll(p, target, param_transform(a, b))

        assert gradcheck(fn, [prediction, raw_alpha, raw_beta]) < 1e-4


class TestUncertaintyMap:
    """Test suite for the per-pixel variance."""

    def test_gaussian_variance(self, float64):
        """Test α² Γ(3/2) / Γ(1/2) = α² / 2 at β = 2."""
        variance = uncertainty_map(constant_maps(0.6, 2.0))
        np.testing.assert_allclose(variance, np.full((1, 1, 4, 4), 0.18), rtol=1e-10)

    def test_laplace_variance(self, float64):
        """Test 2α² at β = 1."""
        variance = uncertainty_map(constant_maps(0.5, 1.0))
        np.testing.assert_allclose(variance, np.full((1, 1, 4, 4), 0.5), rtol=1e-10)

    def test_monotone_in_alpha(self, float64):
        """Test that a larger scale means larger variance at fixed shape."""
        small = uncertainty_map(constant_maps(0.1, 1.3))
        large = uncertainty_map(constant_maps(0.2, 1.3))
        assert np.all(large > small)


class TestExponentCap:
    """Test suite for the bound on the power term."""

    def test_identity_well_below_limit(self, float64):
        """Test that ordinary exponents pass through unchanged."""
        values = np.array([-30.0, -1.0, 0.0, 0.5, 10.0]).reshape(1, 1, 1, 5)
        np.testing.assert_array_equal(cap_exponent(Tensor(values)).data, values)

    def test_saturates_at_limit(self, float64):
        """Test that huge exponents are bounded by the limit."""
        capped = cap_exponent(Tensor(np.array([1e3, 1e30]).reshape(1, 1, 1, 2))).data
        np.testing.assert_allclose(capped, MAX_POWER_EXPONENT)

    def test_gradient_near_limit(self, float64):
        """Test that the cap stays differentiable where it bends."""
        z = Tensor(np.linspace(40.0, 60.0, 6).reshape(1, 1, 2, 3), requires_grad=True)
        assert gradcheck(lambda t: ops.sum(cap_exponent(t)), [z]) < 1e-4

    @pytest.mark.parametrize("dtype", [np.float32, np.float64])
    def test_extreme_shape_stays_finite(self, dtype):
        """Test a finite loss and gradient for β far beyond any trained value."""
        prediction = Tensor(np.full((1, 1, 2, 2), 0.9), requires_grad=True, dtype=dtype)
        target = Tensor(np.zeros((1, 1, 2, 2)), dtype=dtype)
        params = GGDParamMaps(
            alpha=Tensor(np.full((1, 1, 2, 2), ALPHA_FLOOR), requires_grad=True, dtype=dtype),
            beta=Tensor(np.full((1, 1, 2, 2), 1e30), requires_grad=True, dtype=dtype),
        )
        with GradTape() as tape:
            nll = ggd_nll(prediction, target, params)
        backward(nll, tape)
        assert np.isfinite(nll.item())
        for tensor in (prediction, params.alpha, params.beta):
            assert np.all(np.isfinite(tensor.grad))
