"""Per-token tagging datasets and a frozen-feature 2-layer MLP probe.

The probe reads each token's embedding row (never updating it), feeds it
through linear -> LeakyReLU -> dropout -> linear -> log-softmax, and is
trained by mini-batch SGD with momentum on the negative log-likelihood.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cooc import EmbeddingMatrix
from .corpus import Vocabulary


@dataclass
class LabeledTokenDataset:
    """Token sequences with one label per token.

    ``label_set`` holds the distinct labels in first-appearance order, which
    makes the label-to-index mapping deterministic for a given file.
    """

    sequences: list[list[tuple[str, str]]]
    label_set: tuple[str, ...]
    split: str = ""

    def __len__(self) -> int:
        return sum(len(seq) for seq in self.sequences)

    def tokens_and_labels(self) -> tuple[list[str], list[str]]:
        tokens: list[str] = []
        labels: list[str] = []
        for seq in self.sequences:
            for token, label in seq:
                tokens.append(token)
                labels.append(label)
        return tokens, labels


def load_conll(path, token_column: int = 0, label_column: int = -1,
               split: str = "") -> LabeledTokenDataset:
    """Read a column-layout tagging file.

    Non-blank lines are whitespace-separated columns; a blank line ends the
    current sequence; ``-DOCSTART-`` lines are ignored. All data rows must
    have the same number of columns, otherwise the offending line number is
    reported.
    """
    sequences: list[list[tuple[str, str]]] = []
    current: list[tuple[str, str]] = []
    label_set: list[str] = []
    seen_labels: set[str] = set()
    ncols: int | None = None
    with open(path, "r", encoding="utf-8") as src:
        for lineno, line in enumerate(src, start=1):
            stripped = line.strip()
            if not stripped:
                if current:
                    sequences.append(current)
                    current = []
                continue
            cols = stripped.split()
            if cols[0] == "-DOCSTART-":
                continue
            if ncols is None:
                ncols = len(cols)
                if not (-ncols <= token_column < ncols):
                    raise ValueError(f"{path}: token column {token_column} out "
                                     f"of range for {ncols} columns")
                if not (-ncols <= label_column < ncols):
                    raise ValueError(f"{path}: label column {label_column} out "
                                     f"of range for {ncols} columns")
            elif len(cols) != ncols:
                raise ValueError(f"{path}:{lineno}: expected {ncols} columns, "
                                 f"got {len(cols)}")
            token = cols[token_column]
            label = cols[label_column]
            if label not in seen_labels:
                seen_labels.add(label)
                label_set.append(label)
            current.append((token, label))
    if current:
        sequences.append(current)
    return LabeledTokenDataset(sequences, tuple(label_set), split)


def write_conll(dataset: LabeledTokenDataset, path) -> None:
    """Write token/label pairs back out, one sequence per blank-line block."""
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for seq in dataset.sequences:
            for token, label in seq:
                out.write(f"{token} {label}\n")
            out.write("\n")


@dataclass(frozen=True)
class ProbeHyperparams:
    hidden: int = 256
    dropout: float = 0.5
    leaky_slope: float = 0.01
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 128
    epochs: int = 50
    patience: int = 5
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "hidden": self.hidden,
            "dropout": self.dropout,
            "leaky_slope": self.leaky_slope,
            "learning_rate": self.learning_rate,
            "momentum": self.momentum,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "patience": self.patience,
            "seed": self.seed,
        }


def _log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


class ProbeModel:
    """2-layer MLP over frozen embedding features."""

    def __init__(self, dim: int, n_labels: int, label_set: tuple[str, ...],
                 hp: ProbeHyperparams, rng: np.random.Generator):
        self.hp = hp
        self.label_set = label_set
        self.train_loss: list[float] = []
        self.w1 = rng.normal(0.0, np.sqrt(2.0 / dim), size=(dim, hp.hidden))
        self.b1 = np.zeros(hp.hidden)
        self.w2 = rng.normal(0.0, np.sqrt(2.0 / hp.hidden),
                             size=(hp.hidden, n_labels))
        self.b2 = np.zeros(n_labels)

    @property
    def params(self) -> dict[str, np.ndarray]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}

    def _leaky(self, z: np.ndarray) -> np.ndarray:
        return np.where(z > 0, z, self.hp.leaky_slope * z)

    def log_proba(self, x: np.ndarray) -> np.ndarray:
        """Forward pass with dropout disabled (deterministic)."""
        hidden = self._leaky(x @ self.w1 + self.b1)
        return _log_softmax(hidden @ self.w2 + self.b2)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.log_proba(x).argmax(axis=1)

    def loss_and_grads(self, x: np.ndarray, y: np.ndarray,
                       dropout_rng: np.random.Generator | None = None):
        """Mean negative log-likelihood and its analytic gradients.

        Passing ``dropout_rng`` enables inverted dropout on the hidden layer;
        without it the pass is deterministic (used at evaluation time and by
        the finite-difference gradient check).
        """
        z1 = x @ self.w1 + self.b1
        a1 = self._leaky(z1)
        keep = 1.0 - self.hp.dropout
        if dropout_rng is not None and self.hp.dropout > 0.0:
            mask = (dropout_rng.random(a1.shape) < keep) / keep
            a1 = a1 * mask
        else:
            mask = None
        logp = _log_softmax(a1 @ self.w2 + self.b2)
        batch = x.shape[0]
        loss = -logp[np.arange(batch), y].mean()

        dz2 = np.exp(logp)
        dz2[np.arange(batch), y] -= 1.0
        dz2 /= batch
        grads = {
            "w2": a1.T @ dz2,
            "b2": dz2.sum(axis=0),
        }
        da1 = dz2 @ self.w2.T
        if mask is not None:
            da1 = da1 * mask
        dz1 = da1 * np.where(z1 > 0, 1.0, self.hp.leaky_slope)
        grads["w1"] = x.T @ dz1
        grads["b1"] = dz1.sum(axis=0)
        return loss, grads

    def snapshot(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}

    def restore(self, state: dict[str, np.ndarray]) -> None:
        self.w1 = state["w1"].copy()
        self.b1 = state["b1"].copy()
        self.w2 = state["w2"].copy()
        self.b2 = state["b2"].copy()


@dataclass
class ProbeMetrics:
    """Evaluation scores on a percent scale (0-100)."""

    accuracy: float
    macro_f1: float
    per_label: dict[str, tuple[float, float, float]]
    train_loss: list[float] = field(default_factory=list)

    def summary_line(self) -> str:
        return f"{self.accuracy:.2f} ({self.macro_f1:.2f})"

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "per_label": {
                label: {"precision": p, "recall": r, "f1": f}
                for label, (p, r, f) in self.per_label.items()
            },
            "train_loss": list(self.train_loss),
        }


def _featurize(matrix: EmbeddingMatrix, vocab: Vocabulary,
               tokens: list[str]) -> np.ndarray:
    index = vocab.index
    oov = vocab.oov_index
    rows = [index.get(t, index.get(t.lower(), oov)) for t in tokens]
    return np.asarray(matrix.rows, dtype=np.float64)[rows]


def _label_ids(labels: list[str], label_set: tuple[str, ...],
               split_name: str) -> np.ndarray:
    mapping = {label: i for i, label in enumerate(label_set)}
    ids = np.empty(len(labels), dtype=np.int64)
    for i, label in enumerate(labels):
        if label not in mapping:
            raise ValueError(f"label {label!r} in {split_name or 'evaluation'} "
                             "split was never seen in training")
        ids[i] = mapping[label]
    return ids


def train_probe(matrix: EmbeddingMatrix, vocab: Vocabulary,
                train: LabeledTokenDataset, dev: LabeledTokenDataset | None,
                hp: ProbeHyperparams = ProbeHyperparams()) -> ProbeModel:
    """Fit the probe on frozen features, keeping the best-dev checkpoint.

    Training stops early once dev accuracy has not improved for
    ``hp.patience`` consecutive epochs. With the same seed and data the run
    is reproducible at equal thread counts.
    """
    tokens, labels = train.tokens_and_labels()
    if not tokens:
        raise ValueError("training split is empty")
    x_train = _featurize(matrix, vocab, tokens)
    y_train = _label_ids(labels, train.label_set, "train")

    x_dev = y_dev = None
    if dev is not None and len(dev) > 0:
        dev_tokens, dev_labels = dev.tokens_and_labels()
        x_dev = _featurize(matrix, vocab, dev_tokens)
        y_dev = _label_ids(dev_labels, train.label_set, dev.split or "dev")

    rng = np.random.default_rng(hp.seed)
    model = ProbeModel(x_train.shape[1], len(train.label_set),
                       train.label_set, hp, rng)
    velocity = {k: np.zeros_like(v) for k, v in model.params.items()}

    best_acc = -1.0
    best_state = model.snapshot()
    epochs_since_best = 0
    history: list[float] = []
    n = x_train.shape[0]
    for _epoch in range(hp.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, hp.batch_size):
            batch = order[start:start + hp.batch_size]
            loss, grads = model.loss_and_grads(x_train[batch], y_train[batch],
                                               dropout_rng=rng)
            epoch_loss += loss * len(batch)
            for name, grad in grads.items():
                velocity[name] = hp.momentum * velocity[name] - hp.learning_rate * grad
                model.params[name] += velocity[name]
        history.append(epoch_loss / n)
        if x_dev is None:
            best_state = model.snapshot()
            continue
        acc = float((model.predict(x_dev) == y_dev).mean())
        if acc > best_acc:
            best_acc = acc
            best_state = model.snapshot()
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= hp.patience:
                break
    model.restore(best_state)
    model.train_loss = history
    return model


def _per_label_scores(y_true: np.ndarray, y_pred: np.ndarray,
                      n_labels: int) -> np.ndarray:
    confusion = np.bincount(y_true * n_labels + y_pred,
                            minlength=n_labels * n_labels)
    confusion = confusion.reshape(n_labels, n_labels)
    tp = np.diag(confusion).astype(np.float64)
    predicted = confusion.sum(axis=0).astype(np.float64)
    actual = confusion.sum(axis=1).astype(np.float64)
    precision = np.divide(tp, predicted, out=np.zeros(n_labels),
                          where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros(n_labels), where=actual > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros(n_labels),
                   where=denom > 0)
    return np.stack([precision, recall, f1], axis=1)


def evaluate_probe(model: ProbeModel, matrix: EmbeddingMatrix,
                   vocab: Vocabulary,
                   test: LabeledTokenDataset) -> ProbeMetrics:
    """Token-level accuracy and macro-F1 (percent), dropout disabled."""
    tokens, labels = test.tokens_and_labels()
    x = _featurize(matrix, vocab, tokens)
    y = _label_ids(labels, model.label_set, test.split or "test")
    pred = model.predict(x)
    accuracy = 100.0 * float((pred == y).mean())
    scores = _per_label_scores(y, pred, len(model.label_set))
    macro_f1 = 100.0 * float(scores[:, 2].mean())
    per_label = {
        label: (100.0 * scores[i, 0], 100.0 * scores[i, 1], 100.0 * scores[i, 2])
        for i, label in enumerate(model.label_set)
    }
    return ProbeMetrics(accuracy, macro_f1, per_label, list(model.train_loss))
