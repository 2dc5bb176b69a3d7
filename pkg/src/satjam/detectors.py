"""Jammer detectors over spectrogram images.

Two binary classifiers share the estimator API:

* CnnDetector: a small convolutional net trained with Adam. The default
  stack is three Conv(3x3, same) + BatchNorm + ReLU + MaxPool(2x2)
  blocks with 8/16/32 filters, dropout 0.35, then Dense 60 + ReLU and a
  2-way softmax head; total trainable parameters stay under 300k.
* PcaSvmDetector: flatten, project onto the top principal components
  (fit on training data only), then a linear hinge SVM.

Both are deterministic given their seeds.
"""

import csv
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .errors import ConfigError, FormatError, TrainingError
from .features import IMAGE_HW
from .mlcore import (Adam, BatchNorm, Conv2D, Dense, Dropout, Flatten,
                     LinearHingeSvm, MaxPool2x2, Network, PrincipalComponents,
                     ReLU, load_arrays, save_arrays, softmax,
                     softmax_cross_entropy)
from .validation import check_image_batch, check_labels


@dataclass(frozen=True)
class CnnArch:
    """Declarative net shape; the defaults are the reference detector."""

    input_hw: tuple = IMAGE_HW
    conv_channels: tuple = (8, 16, 32)
    dense_units: tuple = (60,)
    n_classes: int = 2
    dropout: float = 0.35

    def __post_init__(self):
        object.__setattr__(self, "input_hw", tuple(self.input_hw))
        object.__setattr__(self, "conv_channels", tuple(self.conv_channels))
        object.__setattr__(self, "dense_units", tuple(self.dense_units))
        if self.n_classes != 2:
            raise ConfigError("the detector is binary; n_classes must be 2")
        if not self.conv_channels:
            raise ConfigError("need at least one conv block")
        h, w = self.input_hw
        for _ in self.conv_channels:
            if h % 2 or w % 2:
                raise ConfigError(
                    f"input {self.input_hw} is not divisible through "
                    f"{len(self.conv_channels)} pooling stages")
            h, w = h // 2, w // 2

    def flat_features(self) -> int:
        h, w = self.input_hw
        shrink = 2 ** len(self.conv_channels)
        return self.conv_channels[-1] * (h // shrink) * (w // shrink)

    def param_count(self) -> int:
        total, in_c = 0, 1
        for c in self.conv_channels:
            total += c * in_c * 9 + c  # conv kernels + bias
            total += 2 * c             # batch norm gamma + beta
            in_c = c
        width = self.flat_features()
        for units in self.dense_units + (self.n_classes,):
            total += width * units + units
            width = units
        return total

    def build(self, seed_seq: np.random.SeedSequence) -> Network:
        """Instantiate layers with Glorot-uniform kernels from the seed."""
        streams = iter(seed_seq.spawn(len(self.conv_channels)
                                      + len(self.dense_units) + 2))
        layers, in_c = [], 1
        for c in self.conv_channels:
            layers += [Conv2D(in_c, c, seed=np.random.default_rng(next(streams))),
                       BatchNorm(c), ReLU(), MaxPool2x2()]
            in_c = c
        layers += [Dropout(self.dropout, seed=np.random.default_rng(next(streams))),
                   Flatten()]
        width = self.flat_features()
        for units in self.dense_units:
            layers += [Dense(width, units, seed=np.random.default_rng(next(streams))),
                       ReLU()]
            width = units
        layers.append(Dense(width, self.n_classes,
                            seed=np.random.default_rng(next(streams))))
        return Network(layers)


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings for the CNN."""

    learning_rate: float = 1e-4
    batch_size: int = 40
    epochs: int = 50
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 2:
            raise ConfigError("batch_size must be >= 2 (batch norm needs it)")
        if self.epochs <= 0:
            raise ConfigError(f"epochs must be > 0, got {self.epochs}")
        if not 0 < self.val_fraction < 1:
            raise ConfigError("val_fraction must be in (0, 1)")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")


class CnnDetector(BaseEstimator, ClassifierMixin):
    """Convolutional jammed-vs-clean classifier.

    fit holds out a validation fraction of the training set, trains for
    the configured epochs, and keeps the parameters of the epoch with the
    best validation accuracy, breaking ties toward the lower training
    loss. trace_ records one row per epoch: (epoch, loss, train_acc,
    val_acc).
    """

    def __init__(self, arch: CnnArch | None = None, train_config: TrainConfig | None = None):
        self.arch = arch
        self.train_config = train_config

    def _resolved(self) -> tuple[CnnArch, TrainConfig]:
        return self.arch or CnnArch(), self.train_config or TrainConfig()

    def fit(self, X, y):
        arch, cfg = self._resolved()
        X = check_image_batch(X, arch.input_hw).astype(np.float32)
        y = np.asarray(check_labels(y, X.shape[0]), dtype=np.int64)
        classes = np.unique(y)
        if len(classes) != 2 or not np.array_equal(classes, [0, 1]):
            raise TrainingError(f"labels must contain both 0 and 1, got {classes}")
        X = X[:, None, :, :]  # single channel

        root = np.random.SeedSequence([cfg.seed, 0x5A])
        init_seq, shuffle_seq = root.spawn(2)
        net = arch.build(init_seq)
        rng = np.random.default_rng(shuffle_seq)

        n = X.shape[0]
        n_val = max(1, round(cfg.val_fraction * n))
        if n - n_val < 2:
            raise TrainingError(f"{n} samples is too few to train on")
        order = rng.permutation(n)
        val_idx, tr_idx = order[:n_val], order[n_val:]

        opt = Adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)
        trace, best = [], (-1.0, np.inf, None, None)
        for epoch in range(1, cfg.epochs + 1):
            batches = self._batches(rng.permutation(tr_idx), cfg.batch_size)
            losses = []
            for idx in batches:
                logits = net.forward(X[idx], train=True)
                loss, dlogits = softmax_cross_entropy(logits, y[idx])
                net.backward(dlogits)
                opt.step(net.param_arrays(), net.grad_arrays())
                losses.append(loss)
            train_acc = self._accuracy(net, X[tr_idx], y[tr_idx])
            val_acc = self._accuracy(net, X[val_idx], y[val_idx])
            loss = float(np.mean(losses))
            trace.append({"epoch": epoch, "loss": loss,
                          "train_acc": train_acc, "val_acc": val_acc})
            # small val splits tie often; break ties toward the lower loss
            if val_acc > best[0] or (val_acc == best[0] and loss < best[1]):
                best = (val_acc, loss, epoch, net.get_state())
        net.set_state(best[3])
        self.network_ = net
        self.classes_ = classes
        self.trace_ = trace
        self.best_epoch_ = best[2]
        return self

    @staticmethod
    def _batches(order: np.ndarray, batch_size: int) -> list[np.ndarray]:
        """Contiguous slices of the shuffled order; a trailing singleton is
        folded into the previous batch so batch norm always sees >= 2."""
        batches = [order[i:i + batch_size] for i in range(0, len(order), batch_size)]
        if len(batches) > 1 and len(batches[-1]) == 1:
            batches[-2] = np.concatenate([batches[-2], batches[-1]])
            batches.pop()
        return batches

    @staticmethod
    def _accuracy(net: Network, X: np.ndarray, y: np.ndarray) -> float:
        preds = []
        for i in range(0, len(X), 256):
            logits = net.forward(X[i:i + 256], train=False)
            preds.append(np.argmax(logits, axis=1))
        return float(np.mean(np.concatenate(preds) == y))

    def predict_proba(self, X) -> np.ndarray:
        if not hasattr(self, "network_"):
            raise NotFittedError("CnnDetector is not fitted yet")
        arch, _ = self._resolved()
        X = check_image_batch(X, arch.input_hw).astype(np.float32)[:, None, :, :]
        probs = []
        for i in range(0, len(X), 256):
            probs.append(softmax(self.network_.forward(X[i:i + 256], train=False)))
        return np.concatenate(probs) if probs else np.zeros((0, 2))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


class PcaSvmDetector(BaseEstimator, ClassifierMixin):
    """Flatten -> principal components (training data only) -> linear SVM."""

    def __init__(self, n_components: int = 45, C: float = 1.0,
                 svm_epochs: int = 200, seed: int = 0):
        self.n_components = n_components
        self.C = C
        self.svm_epochs = svm_epochs
        self.seed = seed

    def fit(self, X, y):
        X = check_image_batch(X)
        y = np.asarray(check_labels(y, X.shape[0]), dtype=np.int64)
        flat = X.reshape(X.shape[0], -1).astype(np.float64)
        self.pca_ = PrincipalComponents(self.n_components).fit(flat)
        self.svm_ = LinearHingeSvm(C=self.C, epochs=self.svm_epochs,
                                   seed=self.seed).fit(self.pca_.transform(flat), y)
        self.classes_ = self.svm_.classes_
        return self

    def decision_function(self, X) -> np.ndarray:
        if not hasattr(self, "svm_"):
            raise NotFittedError("PcaSvmDetector is not fitted yet")
        X = check_image_batch(X)
        flat = X.reshape(X.shape[0], -1).astype(np.float64)
        return self.svm_.decision_function(self.pca_.transform(flat))

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return np.where(scores >= 0, self.classes_[1], self.classes_[0])


def save_model(path, detector) -> None:
    """Serialize a fitted detector to the binary model container."""
    if isinstance(detector, CnnDetector):
        if not hasattr(detector, "network_"):
            raise NotFittedError("cannot save an unfitted detector")
        arch, cfg = detector._resolved()
        meta = {"kind": "cnn", "arch": asdict(arch), "train_config": asdict(cfg),
                "best_epoch": detector.best_epoch_}
        meta["arch"]["input_hw"] = list(arch.input_hw)
        meta["arch"]["conv_channels"] = list(arch.conv_channels)
        meta["arch"]["dense_units"] = list(arch.dense_units)
        save_arrays(path, meta, detector.network_.get_state())
    elif isinstance(detector, PcaSvmDetector):
        if not hasattr(detector, "svm_"):
            raise NotFittedError("cannot save an unfitted detector")
        meta = {"kind": "pca_svm", "n_components": detector.n_components,
                "C": detector.C, "svm_epochs": detector.svm_epochs,
                "seed": detector.seed}
        save_arrays(path, meta, {
            "pca_mean": detector.pca_.mean_,
            "pca_components": detector.pca_.components_,
            "svm_coef": detector.svm_.coef_,
            "svm_intercept": np.array([detector.svm_.intercept_]),
        })
    else:
        raise ConfigError(f"cannot serialize {type(detector).__name__}")


def load_model(path):
    """Rebuild a fitted detector from a model container."""
    meta, arrays = load_arrays(path)
    kind = meta.get("kind")
    if kind == "cnn":
        arch = CnnArch(**meta["arch"])
        det = CnnDetector(arch=arch, train_config=TrainConfig(**meta["train_config"]))
        net = arch.build(np.random.SeedSequence(0))
        try:
            net.set_state(arrays)
        except KeyError as exc:
            raise FormatError(f"model file is missing tensor {exc}", 0) from None
        det.network_ = net
        det.classes_ = np.array([0, 1])
        det.trace_ = []
        det.best_epoch_ = meta.get("best_epoch")
        return det
    if kind == "pca_svm":
        det = PcaSvmDetector(n_components=meta["n_components"], C=meta["C"],
                             svm_epochs=meta["svm_epochs"], seed=meta["seed"])
        pca = PrincipalComponents(meta["n_components"])
        pca.mean_ = arrays["pca_mean"].astype(np.float64)
        pca.components_ = arrays["pca_components"].astype(np.float64)
        svm = LinearHingeSvm(C=meta["C"], epochs=meta["svm_epochs"], seed=meta["seed"])
        svm.coef_ = arrays["svm_coef"].astype(np.float64)
        svm.intercept_ = float(arrays["svm_intercept"][0])
        svm.classes_ = np.array([0, 1])
        det.pca_, det.svm_, det.classes_ = pca, svm, svm.classes_
        return det
    raise FormatError(f"unknown model kind {kind!r}", 0)


def write_trace_csv(path, trace: list[dict]) -> None:
    """Training trace as CSV with columns epoch, loss, train_acc, val_acc."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["epoch", "loss", "train_acc", "val_acc"])
        writer.writeheader()
        for row in trace:
            writer.writerow({k: row[k] for k in writer.fieldnames})
