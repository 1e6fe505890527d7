"""End-to-end checks of a desk-scale training run."""
import numpy as np
import pytest

from config import settings
from evaluation import psnr, random_sparsification_curve, sparsification_curve, uncertainty_error_correlation
from model import build
from rain_data import PairedDataset, generate_dataset, load_pairs
from training import TrainConfig, train

pytestmark = pytest.mark.slow

DESK_CONFIG = TrainConfig(
    variant="T",
    epochs=100,
    batch_size=4,
    max_steps=500,
    crop=64,
    lr_decay_every=50,
    seed=0,
)


def mean_abs_error(prediction: np.ndarray, clean: np.ndarray) -> np.ndarray:
    return np.abs(prediction - clean).mean(axis=0)


@pytest.fixture(scope="module")
def desk_run(tmp_path_factory):
    """Variant T trained for 500 steps on 20 synthetic 64x64 pairs."""
    root = tmp_path_factory.mktemp("desk")
    generate_dataset(root / "train", count=20, size=64, seed=0, show_progress=False)
    generate_dataset(root / "held_out", count=1, size=64, seed=99, show_progress=False)
    pairs = load_pairs(root / "train")
    model, _ = build(DESK_CONFIG.network(), seed=DESK_CONFIG.seed)
    dataset = PairedDataset(pairs, crop=DESK_CONFIG.crop, seed=DESK_CONFIG.seed, workers=0)
    result = train(model, dataset, DESK_CONFIG, show_progress=False)
    return model, result, pairs, load_pairs(root / "held_out")[0]


class TestDeskScaleLearning:
    """Test suite for learning on a small synthetic dataset."""

    def test_outputs_beat_rainy_inputs(self, desk_run):
        """Test a gain of at least 3 dB over the rainy inputs on the training set."""
        model, _, pairs, _ = desk_run
        gains = []
        for pair in pairs:
            derained = model.forward(pair.rainy[None]).export()[0][0]
            gains.append(psnr(derained, pair.clean) - psnr(pair.rainy, pair.clean))
        assert np.mean(gains) >= 3.0

    def test_total_loss_halves(self, desk_run):
        """Test that l_total falls by half from step 10 to the last epoch."""
        _, result, _, _ = desk_run
        assert result.steps == 500
        start = result.metrics[9]["l_total"]
        last_epoch = result.metrics[-1]["epoch"]
        final = np.mean([r["l_total"] for r in result.metrics if r["epoch"] == last_epoch])
        assert final <= start - 0.5 * abs(start)


class TestCalibration:
    """Test suite for uncertainty quality on a held-out image."""

    @pytest.fixture
    def held_out_maps(self, desk_run):
        """(uncertainty, absolute error) maps of the held-out image."""
        model, _, _, pair = desk_run
        output = model.forward(pair.rainy[None])
        return output.uncertainty[0, 0], mean_abs_error(output.export()[0][0], pair.clean)

    def test_uncertainty_tracks_error(self, held_out_maps):
        """Test a Spearman correlation above 0.3."""
        uncertainty, error = held_out_maps
        rho = uncertainty_error_correlation(uncertainty, error)
        assert rho is not None and rho > 0.3

    def test_beats_random_removal(self, held_out_maps):
        """Test that removing the 20% most uncertain pixels beats random removal."""
        uncertainty, error = held_out_maps
        guided = sparsification_curve(uncertainty, error, [0.2])[0]
        dominated = sum(guided < random_sparsification_curve(error, [0.2], seed=seed)[0] for seed in range(10))
        assert dominated >= 8


class TestRunDeterminism:
    """Test suite for bit-identical reruns."""

    def test_same_seed_same_checkpoint(self, tmp_path):
        """Test that two seeded runs write byte-identical checkpoints."""
        generate_dataset(tmp_path / "data", count=8, size=64, seed=0, show_progress=False)
        pairs = load_pairs(tmp_path / "data")
        config = DESK_CONFIG.model_copy(update={"max_steps": 20, "epochs": 10})
        for run in ("a", "b"):
            model, _ = build(config.network(), seed=config.seed)
            dataset = PairedDataset(pairs, crop=config.crop, seed=config.seed, workers=2)
            train(model, dataset, config, out_dir=tmp_path / run, show_progress=False)
        first = (tmp_path / "a" / settings.checkpoint_name).read_bytes()
        assert first == (tmp_path / "b" / settings.checkpoint_name).read_bytes()
