"""The end-to-end estimator facade."""

import numpy as np
import pytest

from mibci.base import NotFittedError
from mibci.model import WalshCnnClassifier, default_structure
from mibci.network import parse_structure
from mibci.synthetic import SyntheticSpec, generate_synthetic


def separable_arrays(num_classes=2, per_class=12, channels=2, samples=32, seed=0):
    spec = SyntheticSpec(
        num_classes=num_classes,
        epochs_per_class=per_class,
        channels=channels,
        samples=samples,
        sampling_rate=64.0,
        mu_hz=10.0,
        beta_hz=20.0,
        noise_sd=0.3,
        default_gain=2.0,
        seed=seed,
    )
    dataset = generate_synthetic(spec)
    return dataset.to_array(), dataset.labels


FAST = dict(
    structure="2,5,8 / 8,16,16",
    learning_rate=3e-3,
    batch_size=8,
    max_iterations=12,
    patience=12,
    dropout_p=0.0,
)


class TestDefaultStructure:
    @pytest.mark.parametrize("channels,length", [(2, 32), (4, 250), (68, 251), (3, 1000), (2, 10)])
    def test_parses_and_lands_on_code_size(self, channels, length):
        text = default_structure(channels, length, output_dim=16)
        spec = parse_structure(text, input_channels=channels, input_length=length, output_dim=16)
        assert spec.flatten_length(length) * spec.blocks[-1].out_planes == 16


class TestSingleScheme:
    def test_fit_predict_score(self):
        X, y = separable_arrays()
        clf = WalshCnnClassifier(seed=1, **FAST)
        clf.fit(X, y)
        preds = clf.predict(X)
        assert preds.shape == (len(y),)
        assert set(np.unique(preds)) <= {1, 2}
        assert clf.score(X, y) >= 0.9
        assert clf.features(X).shape == (len(y), 16)
        assert clf.decision_distances(X).shape == (len(y), 2)

    def test_explicit_validation_set(self):
        X, y = separable_arrays()
        clf = WalshCnnClassifier(seed=0, **FAST)
        clf.fit(X[:16], y[:16], X[16:], y[16:])
        assert len(clf.train_reports_) == 1
        assert clf.train_reports_[0].stopped_at >= 1

    def test_predict_before_fit(self):
        with pytest.raises(NotFittedError):
            WalshCnnClassifier().predict(np.zeros((1, 2, 32)))

    def test_get_set_params(self):
        clf = WalshCnnClassifier(code_size=32, seed=5)
        params = clf.get_params()
        assert params["code_size"] == 32
        clf.set_params(code_size=16, patience=3)
        assert clf.code_size == 16
        with pytest.raises(ValueError, match="invalid parameter"):
            clf.set_params(bogus=1)

    def test_validation_carve_is_seeded(self):
        X, y = separable_arrays()
        a = WalshCnnClassifier(seed=3, **FAST).fit(X, y)
        b = WalshCnnClassifier(seed=3, **FAST).fit(X, y)
        assert a.train_reports_[0].to_dict() == b.train_reports_[0].to_dict()


class TestDecompositions:
    def test_ovo_member_count_and_prediction_range(self):
        X, y = separable_arrays(num_classes=3, per_class=8)
        clf = WalshCnnClassifier(scheme="ovo", seed=2, **{**FAST, "structure": "2,5,8 / 8,16,16", "max_iterations": 6})
        clf.fit(X, y)
        assert len(clf.scheme_.members) == 3
        assert len(clf.train_reports_) == 3
        preds = clf.predict(X)
        assert set(np.unique(preds)) <= {1, 2, 3}

    def test_ovr_member_count(self):
        X, y = separable_arrays(num_classes=3, per_class=8)
        clf = WalshCnnClassifier(scheme="ovr", seed=2, **{**FAST, "max_iterations": 6})
        clf.fit(X, y)
        assert len(clf.scheme_.members) == 3
        preds = clf.predict(X)
        assert preds.shape == (len(y),)

    def test_unknown_scheme(self):
        X, y = separable_arrays(per_class=4)
        with pytest.raises(ValueError, match="scheme"):
            WalshCnnClassifier(scheme="ovx", **FAST).fit(X, y)
