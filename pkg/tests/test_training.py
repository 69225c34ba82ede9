"""The training loop: stopping rules, determinism, and learning sanity."""

import numpy as np
import pytest

from mibci.network import parse_structure
from mibci.synthetic import SyntheticSpec, generate_synthetic
from mibci.training import TrainConfig, TrainingDivergedError, TrainReport, train
from mibci.walsh import WalshCodebook

SMALL_STRUCTURE = "2,5,8 / 8,16,16"


def small_problem(n_per_class=8, seed=0):
    spec = SyntheticSpec(
        num_classes=2,
        epochs_per_class=n_per_class,
        channels=2,
        samples=32,
        sampling_rate=64.0,
        mu_hz=10.0,
        beta_hz=20.0,
        noise_sd=0.3,
        default_gain=2.0,
        seed=seed,
    )
    dataset = generate_synthetic(spec)
    X = dataset.to_array()
    y = dataset.labels
    val_mask = np.zeros(len(y), dtype=bool)
    val_mask[:: 4] = True
    return (X[~val_mask], y[~val_mask]), (X[val_mask], y[val_mask])


def small_spec(dropout=0.0, batch_norm=True):
    return parse_structure(
        SMALL_STRUCTURE, input_channels=2, input_length=32, output_dim=16,
        batch_norm=batch_norm, dropout_p=dropout,
    )


def test_patience_one_with_constant_validation_loss_stops_at_two():
    # zero inputs pin every output at the relu dead zone: no gradients, no
    # improvement after the first pass, so patience=1 fires at iteration 2
    spec = small_spec(batch_norm=False)
    codebook = WalshCodebook.for_classes(2, 16)
    X = np.zeros((8, 2, 32))
    y = np.array([1, 2] * 4)
    cfg = TrainConfig(max_iterations=50, patience=1, batch_size=4, seed=0)
    _, report = train(spec, (X, y), (X[:4], y[:4]), codebook, cfg)
    assert report.stopped_at == 2
    assert report.stop_reason == "patience"
    assert len(report.train_loss) == 2
    assert len(report.validation_loss) == 2
    assert report.validation_loss[0] == report.validation_loss[1]


def test_max_iterations_stop_reason():
    train_data, val_data = small_problem()
    cfg = TrainConfig(max_iterations=3, patience=10, batch_size=8, seed=1)
    _, report = train(small_spec(), train_data, val_data, WalshCodebook.for_classes(2, 16), cfg)
    assert report.stopped_at == 3
    assert report.stop_reason == "max_iterations"
    assert len(report.validation_accuracy) == 3


def test_bit_identical_given_same_seed():
    train_data, val_data = small_problem()
    cfg = TrainConfig(max_iterations=4, patience=10, batch_size=8, seed=7)
    codebook = WalshCodebook.for_classes(2, 16)
    params_a, report_a = train(small_spec(dropout=0.3), train_data, val_data, codebook, cfg)
    params_b, report_b = train(small_spec(dropout=0.3), train_data, val_data, codebook, cfg)
    assert report_a.to_dict() == report_b.to_dict()
    for a, b in zip(params_a.blocks, params_b.blocks):
        assert np.array_equal(a.weight, b.weight)
        assert np.array_equal(a.bias, b.bias)
    _, report_c = train(
        small_spec(dropout=0.3), train_data, val_data, codebook,
        TrainConfig(max_iterations=4, patience=10, batch_size=8, seed=8),
    )
    assert report_c.to_dict() != report_a.to_dict()


def test_learns_separable_problem():
    train_data, val_data = small_problem(n_per_class=16)
    cfg = TrainConfig(learning_rate=3e-3, max_iterations=40, patience=40, batch_size=16, seed=3)
    params, report = train(small_spec(), train_data, val_data, WalshCodebook.for_classes(2, 16), cfg)
    assert max(report.validation_accuracy) >= 0.9
    assert report.best_validation_loss < report.validation_loss[0]


def test_divergence_fields_populated():
    train_data, val_data = small_problem()
    cfg = TrainConfig(max_iterations=5, patience=5, batch_size=8, seed=2)
    _, report = train(small_spec(), train_data, val_data, WalshCodebook.for_classes(2, 16), cfg)
    assert report.initial_divergence is not None and report.initial_divergence >= 0
    assert report.final_divergence is not None


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergent_loss_raises_with_iteration():
    train_data, val_data = small_problem()
    cfg = TrainConfig(learning_rate=1e150, max_iterations=10, patience=10, batch_size=8, seed=0)
    with pytest.raises(TrainingDivergedError, match="iteration"):
        train(small_spec(batch_norm=False), train_data, val_data, WalshCodebook.for_classes(2, 16), cfg)


def test_output_dim_must_match_code_size():
    train_data, val_data = small_problem()
    with pytest.raises(ValueError, match="code size"):
        train(small_spec(), train_data, val_data, WalshCodebook.for_classes(2, 32), TrainConfig())


def test_best_loss_bookkeeping_is_running_minimum():
    train_data, val_data = small_problem(n_per_class=10)
    cfg = TrainConfig(learning_rate=3e-3, max_iterations=15, patience=15, batch_size=8, seed=4)
    _, report = train(small_spec(), train_data, val_data, WalshCodebook.for_classes(2, 16), cfg)
    assert report.best_validation_loss == min(report.validation_loss)
    assert report.validation_loss[report.best_iteration - 1] == report.best_validation_loss


def test_returns_best_iteration_parameters():
    train_data, val_data = small_problem(n_per_class=12)
    cfg = TrainConfig(learning_rate=3e-3, max_iterations=25, patience=25, batch_size=8, seed=5)
    codebook = WalshCodebook.for_classes(2, 16)
    params, report = train(small_spec(), train_data, val_data, codebook, cfg)
    from mibci.network import forward, mse_loss

    targets = np.stack([codebook.target(int(l)) for l in val_data[1]])
    loss = mse_loss(np.atleast_2d(forward(small_spec(), params, val_data[0], mode="eval")), targets)
    assert loss == pytest.approx(report.best_validation_loss, rel=1e-9)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0)
    with pytest.raises(ValueError):
        TrainConfig(beta1=1.0)
    with pytest.raises(ValueError):
        TrainConfig(patience=0)


def test_report_to_dict_round_trips_series():
    report = TrainReport(train_loss=[1.0], validation_loss=[2.0], validation_accuracy=[0.5])
    doc = report.to_dict()
    assert doc["train_loss"] == [1.0]
    assert doc["validation_accuracy"] == [0.5]
