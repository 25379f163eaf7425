import hashlib

import numpy as np
import pytest

from bitcipher.cooc import EmbeddingMatrix, EmbeddingMeta
from bitcipher.corpus import Vocabulary
from bitcipher.probe import (LabeledTokenDataset, ProbeHyperparams,
                             ProbeModel, evaluate_probe, load_conll,
                             train_probe, write_conll)

CONLL_SAMPLE = """\
-DOCSTART- -X- -X- O

EU NNP B-NP B-ORG
rejects VBZ B-VP O
German JJ B-NP B-MISC
call NN I-NP O

Peter NNP B-NP B-PER
Blackburn NNP I-NP I-PER
"""


def _dataset_from_pairs(pairs, label_set, split=""):
    return LabeledTokenDataset([[p] for p in pairs], tuple(label_set), split)


def _embedding(vocab_size, dim, seed=0, rows=None):
    if rows is None:
        rng = np.random.default_rng(seed)
        rows = rng.normal(size=(vocab_size + 1, dim))
    return EmbeddingMatrix(np.asarray(rows, dtype=np.float64),
                           EmbeddingMeta(bits=dim))


def _vocab(tokens):
    ranked = tuple(tokens)
    return Vocabulary(ranked, {t: i for i, t in enumerate(ranked)})


# ---------------------------------------------------------------------------
# CoNLL parsing
# ---------------------------------------------------------------------------

def test_load_conll_tiny(tmp_path):
    path = tmp_path / "tiny.conll"
    path.write_text("dog NN\n\n")
    ds = load_conll(path)
    assert len(ds.sequences) == 1
    assert ds.sequences[0] == [("dog", "NN")]
    assert ds.label_set == ("NN",)


def test_load_conll_sample(tmp_path):
    path = tmp_path / "sample.conll"
    path.write_text(CONLL_SAMPLE)
    ds = load_conll(path, token_column=0, label_column=-1)
    assert len(ds.sequences) == 2
    distinct = {label for seq in ds.sequences for _, label in seq}
    assert set(ds.label_set) == distinct
    assert ds.label_set[0] == "B-ORG"  # first appearance order
    assert ds.sequences[1][0] == ("Peter", "B-PER")


def test_load_conll_column_selection(tmp_path):
    path = tmp_path / "cols.conll"
    path.write_text(CONLL_SAMPLE)
    ds = load_conll(path, token_column=0, label_column=1)
    assert ds.sequences[0][0] == ("EU", "NNP")


def test_load_conll_ragged_row_reports_line(tmp_path):
    path = tmp_path / "bad.conll"
    path.write_text("a X\nb Y\nc\n")
    with pytest.raises(ValueError, match=":3"):
        load_conll(path)


def test_conll_round_trip(tmp_path):
    path = tmp_path / "sample.conll"
    path.write_text(CONLL_SAMPLE)
    ds = load_conll(path)
    out = tmp_path / "copy.conll"
    write_conll(ds, out)
    back = load_conll(out)
    assert back.sequences == ds.sequences
    assert back.label_set == ds.label_set


# ---------------------------------------------------------------------------
# model mechanics
# ---------------------------------------------------------------------------

def test_log_softmax_outputs_normalize():
    rng = np.random.default_rng(0)
    model = ProbeModel(6, 4, ("a", "b", "c", "d"),
                       ProbeHyperparams(hidden=8), rng)
    logp = model.log_proba(rng.normal(size=(20, 6)))
    sums = np.exp(logp).sum(axis=1)
    assert np.all(np.abs(sums - 1.0) < 1e-6)


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(1)
    hp = ProbeHyperparams(hidden=6, dropout=0.5, seed=1)
    model = ProbeModel(8, 3, ("a", "b", "c"), hp, rng)
    x = rng.normal(size=(10, 8))
    y = rng.integers(0, 3, size=10)
    _, grads = model.loss_and_grads(x, y)  # dropout disabled without rng
    step = 1e-5
    for name, param in model.params.items():
        numeric = np.zeros_like(param)
        flat = param.ravel()
        for idx in range(flat.size):
            original = flat[idx]
            flat[idx] = original + step
            plus, _ = model.loss_and_grads(x, y)
            flat[idx] = original - step
            minus, _ = model.loss_and_grads(x, y)
            flat[idx] = original
            numeric.ravel()[idx] = (plus - minus) / (2 * step)
        denom = np.maximum(np.abs(grads[name]) + np.abs(numeric), 1e-8)
        rel = np.abs(grads[name] - numeric) / denom
        assert rel.max() < 1e-4, f"{name}: max rel err {rel.max():.3e}"


def _separable_task(n_types=120, dim=10, seed=3):
    """Label is the sign of the first embedding coordinate."""
    rng = np.random.default_rng(seed)
    rows = rng.normal(size=(n_types + 1, dim))
    rows[:, 0] = np.where(np.arange(n_types + 1) % 2 == 0, 1.5, -1.5)
    rows[:, 0] += rng.normal(scale=0.1, size=n_types + 1)
    tokens = [f"tok{i}" for i in range(n_types)]
    vocab = _vocab(tokens)
    matrix = _embedding(n_types, dim, rows=rows)
    labels = ["POS" if i % 2 == 0 else "NEG" for i in range(n_types)]
    pairs = [(tokens[i], labels[i]) for i in range(n_types)]
    occurrences = [pairs[rng.integers(0, n_types)] for _ in range(1500)]
    train = _dataset_from_pairs(occurrences[:1000], ("POS", "NEG"), "train")
    dev = _dataset_from_pairs(occurrences[1000:1200], ("POS", "NEG"), "dev")
    test = _dataset_from_pairs(occurrences[1200:], ("POS", "NEG"), "test")
    return matrix, vocab, train, dev, test


def test_probe_learns_separable_task():
    matrix, vocab, train, dev, test = _separable_task()
    hp = ProbeHyperparams(hidden=32, epochs=200, batch_size=64, seed=0,
                          dropout=0.2)
    model = train_probe(matrix, vocab, train, dev, hp)
    train_metrics = evaluate_probe(model, matrix, vocab, train)
    test_metrics = evaluate_probe(model, matrix, vocab, test)
    assert train_metrics.accuracy >= 99.0
    assert test_metrics.accuracy >= 95.0


def test_single_label_dataset_scores_perfectly():
    matrix = _embedding(4, 5)
    vocab = _vocab(["a", "b", "c", "d"])
    data = _dataset_from_pairs([("a", "X"), ("b", "X"), ("c", "X")], ("X",))
    hp = ProbeHyperparams(hidden=4, epochs=3, seed=0)
    model = train_probe(matrix, vocab, data, data, hp)
    metrics = evaluate_probe(model, matrix, vocab, data)
    assert metrics.accuracy == 100.0
    assert metrics.macro_f1 == 100.0


def test_all_one_class_predictions_metrics():
    # Closed form on a balanced 2-class set predicted all as one class:
    # accuracy 1/2; F1 = 2/3 for the predicted class, 0 for the other,
    # macro-F1 = 1/3.
    matrix = _embedding(2, 4, rows=np.zeros((3, 4)))
    vocab = _vocab(["a", "b"])
    rng = np.random.default_rng(0)
    model = ProbeModel(4, 2, ("X", "Y"), ProbeHyperparams(hidden=4), rng)
    model.b2 = np.array([10.0, -10.0])  # forces every prediction to class X
    model.w1[:] = 0.0
    model.w2[:] = 0.0
    test = _dataset_from_pairs([("a", "X"), ("b", "Y")] * 10, ("X", "Y"))
    metrics = evaluate_probe(model, matrix, vocab, test)
    assert metrics.accuracy == pytest.approx(50.0)
    assert metrics.macro_f1 == pytest.approx(100.0 / 3.0, abs=0.01)
    assert metrics.per_label["X"][2] == pytest.approx(200.0 / 3.0, abs=0.01)
    assert metrics.per_label["Y"] == (0.0, 0.0, 0.0)


def test_training_is_seed_reproducible():
    matrix, vocab, train, dev, test = _separable_task()
    hp = ProbeHyperparams(hidden=16, epochs=10, seed=42)
    first = train_probe(matrix, vocab, train, dev, hp)
    second = train_probe(matrix, vocab, train, dev, hp)
    for name in first.params:
        assert np.array_equal(first.params[name], second.params[name])
    m1 = evaluate_probe(first, matrix, vocab, test)
    m2 = evaluate_probe(second, matrix, vocab, test)
    assert m1.accuracy == m2.accuracy
    assert m1.macro_f1 == m2.macro_f1


def test_embeddings_stay_frozen():
    matrix, vocab, train, dev, _ = _separable_task()
    before = hashlib.sha256(matrix.rows.tobytes()).hexdigest()
    hp = ProbeHyperparams(hidden=16, epochs=5, seed=0)
    train_probe(matrix, vocab, train, dev, hp)
    after = hashlib.sha256(matrix.rows.tobytes()).hexdigest()
    assert before == after


def test_empty_train_set_rejected():
    matrix = _embedding(2, 4)
    vocab = _vocab(["a", "b"])
    empty = LabeledTokenDataset([], ("X",), "train")
    with pytest.raises(ValueError):
        train_probe(matrix, vocab, empty, None, ProbeHyperparams())


def test_unseen_dev_label_rejected():
    matrix = _embedding(2, 4)
    vocab = _vocab(["a", "b"])
    train = _dataset_from_pairs([("a", "X"), ("b", "X")], ("X",), "train")
    dev = _dataset_from_pairs([("a", "Z")], ("Z",), "dev")
    with pytest.raises(ValueError, match="Z"):
        train_probe(matrix, vocab, train, dev, ProbeHyperparams(epochs=1))


def test_oov_and_case_fallback():
    matrix = _embedding(2, 4, seed=5)
    vocab = _vocab(["cat", "dog"])
    train = _dataset_from_pairs(
        [("cat", "A"), ("dog", "B"), ("Cat", "A"), ("unknown", "B")],
        ("A", "B"), "train")
    hp = ProbeHyperparams(hidden=4, epochs=2, seed=0)
    model = train_probe(matrix, vocab, train, None, hp)
    metrics = evaluate_probe(model, matrix, vocab, train)
    assert 0.0 <= metrics.accuracy <= 100.0


def test_summary_line_format():
    from bitcipher.probe import ProbeMetrics
    metrics = ProbeMetrics(86.049, 86.321, {})
    assert metrics.summary_line() == "86.05 (86.32)"
