"""Tests for the schedule, optimizer and training loop."""
import numpy as np
import pytest
from pydantic import ValidationError

from config import settings
from diffcore import Tensor
from losses import LossReport
from model import OptimizerSnapshot, build, load_checkpoint
from rain_data import PairedDataset
from training import (
    Adam,
    TrainConfig,
    TrainingDivergedError,
    clip_grad_norm,
    format_metrics_line,
    learning_rate,
    load_train_config,
    parse_config_text,
    parse_metrics_line,
    train,
    train_step,
)


@pytest.fixture
def tiny_train_config():
    """Two short epochs of the tiny network on 16x16 crops."""
    return TrainConfig(
        variant="custom",
        base_blocks=1,
        base_channels=4,
        epochs=2,
        batch_size=2,
        crop=16,
        lr_decay_every=1,
    )


@pytest.fixture
def dataset(sample_pairs):
    return PairedDataset(sample_pairs, crop=16, seed=0, workers=0)


class TestSchedule:
    """Test suite for the step learning-rate schedule."""

    def test_long_schedule_values(self):
        """Test halving every 50 epochs from 1e-3."""
        assert learning_rate(0) == 1e-3
        assert learning_rate(49) == 1e-3
        assert learning_rate(50) == 5e-4
        assert learning_rate(100) == 2.5e-4

    def test_desk_schedule(self):
        """Test a custom period and factor."""
        assert learning_rate(25, initial_lr=0.01, decay_factor=0.1, decay_every=10) == pytest.approx(1e-4)

    def test_negative_epoch(self):
        """Test that epochs count from zero."""
        with pytest.raises(ValueError):
            learning_rate(-1)


class TestOptimizer:
    """Test suite for clipping and Adam."""

    def test_clip_scales_to_max_norm(self, float64):
        """Test that a norm-5 gradient is scaled to norm 1."""
        a = Tensor(np.zeros(1), requires_grad=True)
        b = Tensor(np.zeros(1), requires_grad=True)
        a.grad, b.grad = np.array([3.0]), np.array([4.0])
        assert clip_grad_norm([a, b], 1.0) == pytest.approx(5.0)
        np.testing.assert_allclose([a.grad[0], b.grad[0]], [0.6, 0.8])

    def test_clip_leaves_small_gradients(self, float64):
        """Test that gradients under the limit are untouched."""
        a = Tensor(np.zeros(2), requires_grad=True)
        a.grad = np.array([0.1, 0.2])
        clip_grad_norm([a], 1.0)
        np.testing.assert_array_equal(a.grad, [0.1, 0.2])

    def test_adam_first_step_is_sign_times_lr(self, float64, tiny_model):
        """Test the bias-corrected first update."""
        _, store = tiny_model
        before = store.state()
        for tensor in store.tensors():
            tensor.grad = np.full(tensor.shape, -2.0)
        Adam(store).step(0.01)
        for name, tensor in store.items():
            np.testing.assert_allclose(tensor.data - before[name], 0.01, rtol=1e-6)

    def test_adam_skips_parameters_without_gradient(self, float64, tiny_model):
        """Test that a None gradient leaves the array alone."""
        _, store = tiny_model
        before = store.state()
        store.zero_grad()
        Adam(store).step(0.01)
        for name, tensor in store.items():
            np.testing.assert_array_equal(tensor.data, before[name])

    def test_snapshot_restore(self, float64, tiny_model):
        """Test that moments and the step counter carry over."""
        _, store = tiny_model
        optimizer = Adam(store)
        for tensor in store.tensors():
            tensor.grad = np.ones(tensor.shape)
        optimizer.step(0.001)
        fresh = Adam(store)
        fresh.restore(optimizer.snapshot())
        assert fresh.step_count == 1
        np.testing.assert_array_equal(fresh.first["stem.weight"], optimizer.first["stem.weight"])
        with pytest.raises(ValueError, match="lacks"):
            fresh.restore(OptimizerSnapshot(step=1, arrays={}))


class TestTrainConfig:
    """Test suite for key=value configuration."""

    def test_parse_with_comments(self):
        """Test comments, blank lines and surrounding whitespace."""
        text = "# desk run\nepochs = 3\n\nbatch_size=2  # small\n"
        assert parse_config_text(text) == {"epochs": "3", "batch_size": "2"}

    def test_unknown_key(self):
        """Test that misspelled keys are reported with their line."""
        with pytest.raises(ValueError, match="line 2"):
            parse_config_text("epochs=3\nepohcs=4\n")

    def test_duplicate_key(self):
        """Test that repeated keys are refused."""
        with pytest.raises(ValueError, match="Duplicate"):
            parse_config_text("epochs=3\nepochs=4\n")

    def test_missing_equals(self):
        """Test that every line must be key=value."""
        with pytest.raises(ValueError, match="key=value"):
            parse_config_text("epochs 3\n")

    def test_file_and_overrides(self, tmp_path):
        """Test that overrides beat file values and None overrides are ignored."""
        path = tmp_path / "train.cfg"
        path.write_text("epochs=7\nseed=3\nuse_rab=false\n", encoding="utf-8")
        config = load_train_config(path, {"epochs": 2, "seed": None})
        assert (config.epochs, config.seed, config.use_rab) == (2, 3, False)

    def test_effective_config_reloads(self, tmp_path, tiny_train_config):
        """Test that the written effective config describes the same run."""
        path = tmp_path / "effective.cfg"
        path.write_text(tiny_train_config.to_text(), encoding="utf-8")
        assert load_train_config(path) == tiny_train_config

    def test_crop_must_be_multiple_of_four(self):
        """Test the crop contract."""
        with pytest.raises(ValidationError):
            TrainConfig(crop=30)

    def test_network_keys(self, tiny_train_config, tiny_config):
        """Test that the network section maps onto ModelConfig."""
        assert tiny_train_config.network() == tiny_config
        assert TrainConfig(variant="B").network().base_blocks == 10

    def test_missing_file(self, tmp_path):
        """Test the not-found error."""
        with pytest.raises(FileNotFoundError):
            load_train_config(tmp_path / "nope.cfg")


class TestTrainStep:
    """Test suite for single optimization steps."""

    def test_zero_learning_rate_keeps_parameters(self, tiny_model, dataset, tiny_train_config):
        """Test that lr = 0 leaves every parameter unchanged."""
        model, store = tiny_model
        before = store.state()
        batch = next(dataset.batches(0, 2))
        report = train_step(model, Adam(store), batch, tiny_train_config, lr=0.0)
        assert np.isfinite(report.l_total)
        for name, tensor in store.items():
            np.testing.assert_array_equal(tensor.data, before[name])

    def test_fresh_named_variant_takes_a_step(self, sample_pairs):
        """Test that variant T trains from its initial weights without diverging."""
        config = TrainConfig(variant="T", batch_size=2, crop=16)
        model, store = build(config.network(), seed=0)
        before = store.state()
        batch = next(PairedDataset(sample_pairs, crop=16, seed=0, workers=0).batches(0, 2))
        report = train_step(model, Adam(store), batch, config, lr=1e-3)
        assert np.isfinite([report.l_con, report.l_fre, report.l_ue, report.l_total]).all()
        assert any(not np.array_equal(tensor.data, before[name]) for name, tensor in store.items())

    def test_divergence_is_reported(self, tiny_model, dataset, tiny_train_config, mocker):
        """Test that a non-finite loss stops training with diagnostics."""
        model, store = tiny_model
        nan_report = LossReport(
            l_con=float("nan"),
            l_fre=0.0,
            l_ue=0.0,
            l_total=float("nan"),
            objective=Tensor(np.zeros((1, 1, 1, 1))),
        )
        mocker.patch("training.trainer.total_loss", return_value=nan_report)
        batch = next(dataset.batches(0, 2))
        with pytest.raises(TrainingDivergedError) as excinfo:
            train_step(model, Adam(store), batch, tiny_train_config, lr=1e-3, step=7, epoch=1)
        error = excinfo.value
        assert (error.step, error.epoch, error.lr) == (7, 1, 1e-3)
        assert len(error.inputs_sha256) == 64
        assert "l_con=nan" in str(error)


class TestTrainLoop:
    """Test suite for the epoch loop and its artifacts."""

    def test_writes_metrics_and_checkpoints(self, tiny_model, dataset, tiny_train_config, tmp_path, sample_pairs):
        """Test log lines, per-epoch checkpoints and best-by-PSNR selection."""
        model, _ = tiny_model
        result = train(
            model, dataset, tiny_train_config, out_dir=tmp_path, validation=sample_pairs[:1], show_progress=False
        )
        assert result.steps == 4
        assert result.best_psnr is not None

        lines = (tmp_path / settings.metrics_log_name).read_text(encoding="utf-8").splitlines()
        records = [parse_metrics_line(line) for line in lines]
        assert [r["step"] for r in records] == [1, 2, 3, 4]
        assert [r["lr"] for r in records] == [1e-3, 1e-3, 5e-4, 5e-4]
        for record in records:
            recombined = record["l_con"] + 0.1 * record["l_fre"] + 0.1 * record["l_ue"]
            assert record["l_total"] == pytest.approx(recombined, rel=1e-12)
        assert records == result.metrics

        for name in ("epoch_0000.ckpt", "epoch_0001.ckpt", settings.checkpoint_name, "best.ckpt"):
            assert (tmp_path / name).exists()
        last = load_checkpoint(tmp_path / settings.checkpoint_name)
        assert last.optimizer.step == 4

    def test_max_steps(self, tiny_model, dataset, tiny_train_config):
        """Test that max_steps ends training mid-epoch."""
        model, _ = tiny_model
        config = tiny_train_config.model_copy(update={"max_steps": 3})
        assert train(model, dataset, config, show_progress=False).steps == 3

    def test_config_mismatch(self, tiny_model, dataset):
        """Test that the model must come from the training config."""
        model, _ = tiny_model
        with pytest.raises(ValueError, match="different network"):
            train(model, dataset, TrainConfig(), show_progress=False)

    def test_metrics_line_format(self):
        """Test that floats are written with full precision."""
        record = {"step": 1, "epoch": 0, "lr": 0.001, "l_con": 0.1 + 0.2, "l_fre": 1.0, "l_ue": -0.5, "l_total": 0.3}
        line = format_metrics_line(record)
        assert "l_con=0.30000000000000004" in line
        assert parse_metrics_line(line) == record

    def test_runs_are_deterministic(self, float64, tiny_config, sample_pairs, tiny_train_config):
        """Test that the same seed reproduces every metric."""
        runs = []
        for _ in range(2):
            model, _ = build(tiny_config, seed=0)
            dataset = PairedDataset(sample_pairs, crop=16, seed=0, workers=0)
            runs.append(train(model, dataset, tiny_train_config, show_progress=False).metrics)
        assert runs[0] == runs[1]

    @pytest.mark.slow
    def test_overfits_single_pair(self, float64, tiny_config, sample_pairs):
        """Test that repeated steps on one pair reduce the content loss."""
        config = TrainConfig(
            variant="custom",
            base_blocks=1,
            base_channels=4,
            epochs=80,
            batch_size=1,
            crop=16,
            augment=False,
            lr_decay_every=100,
        )
        model, _ = build(tiny_config, seed=0)
        dataset = PairedDataset(sample_pairs[:1], crop=16, augment=False, workers=0)
        metrics = train(model, dataset, config, show_progress=False).metrics
        assert metrics[-1]["l_con"] < 0.7 * metrics[0]["l_con"]
