import json
import math
import random

import numpy as np
import pytest

import pbsv


def topic_lines(n, seed):
    rng = random.Random(seed)
    stop = ["s" + a + b for a in "ab" for b in "abcdefghij"]
    topics = [["a" + a + b for a in "ab" for b in "abcdefghij"],
              ["b" + a + b for a in "ab" for b in "abcdefghij"]]
    lines, labels = [], []
    for _ in range(n):
        y = rng.randrange(2)
        words = []
        for _ in range(rng.randint(8, 15)):
            r = rng.random()
            if r < 0.45:
                words.append(rng.choice(stop))
            else:
                words.append(rng.choice(topics[y if r < 0.93 else 1 - y]))
        lines.append(" ".join(words))
        labels.append(y)
    return lines, labels


@pytest.fixture(scope="module")
def trained():
    lines, _ = topic_lines(300, 1)
    words, inputs, outputs = pbsv.train_skipgram(lines, dim=8, epochs=2, subsample=0, min_count=1)
    return words, inputs, outputs


def test_normalize_text():
    assert pbsv.normalize_text("Hello, World 42x") == ["hello", "world", "x"]


def test_train_skipgram_shapes_and_determinism(trained):
    words, inputs, outputs = trained
    assert len(words) == 60
    assert inputs.shape == (60, 8) and outputs.shape == (60, 8)
    lines, _ = topic_lines(300, 1)
    _, again, _ = pbsv.train_skipgram(lines, dim=8, epochs=2, subsample=0, min_count=1)
    np.testing.assert_array_equal(inputs, again)


def test_pb_l2_matches_weighted_average(trained):
    _, inputs, outputs = trained
    sentence = [0, 3, 3, 7]
    lam = 2.0
    mu, var = pbsv.pb_l2(sentence, inputs, outputs, lam)
    alpha = len(sentence) / lam  # unit prior variance
    expected = np.mean([inputs[w] + alpha * outputs[w] for w in sentence], axis=0) / (1 + alpha)
    np.testing.assert_allclose(mu, expected, rtol=1e-12)
    assert var > 0

    mu_inf, _ = pbsv.pb_l2(sentence, inputs, outputs, math.inf)
    np.testing.assert_allclose(mu_inf, np.mean([inputs[w] for w in sentence], axis=0), rtol=1e-12)

    swapped, _ = pbsv.pb_l2(sentence, outputs, inputs, lam)
    switched, _ = pbsv.pb_l2(sentence, inputs, outputs, lam, switch_roles=True)
    np.testing.assert_array_equal(swapped, switched)


def test_idf_and_idf_posterior(trained):
    _, inputs, outputs = trained
    sentences = [[0, 1], [1, 2], [1]]
    idf = pbsv.compute_idf(sentences, 4)
    assert idf[1] == pytest.approx(1.0)
    assert idf[0] == pytest.approx(math.log(3) + 1)
    assert math.isnan(idf[3])
    weights = [1.0 + w for w in range(len(inputs))]
    mu, var = pbsv.pb_idf_l2([0, 2], inputs, outputs, 1.0, weights)
    expected = (inputs[0] + outputs[0] + 3 * (inputs[2] + outputs[2])) / (2 * 4)
    np.testing.assert_allclose(mu, expected, rtol=1e-12)
    assert var == pytest.approx(2 / 4)


def test_kl_and_catoni():
    assert pbsv.gaussian_kl([0.0, 0.0], 1.0, [0.0, 0.0], 1.0) == 0.0
    assert pbsv.gaussian_kl([1.0, 0.0], 1.0, [0.0, 0.0], 1.0) == pytest.approx(0.5)
    assert pbsv.catoni_bound(0.0, 0.0, 10.0, 50, 1.0) == 0.0
    assert pbsv.catoni_bound(0.2, 5.0, 10, 100, 0.05) > pbsv.catoni_bound(0.2, 0.0, 10, 100, 0.05)
    with pytest.raises(ValueError):
        pbsv.catoni_bound(0.5, 1.0, 1.0, 10, 0.0)


def test_cli_end_to_end(tmp_path):
    lines, labels = topic_lines(400, 2)
    (tmp_path / "corpus.txt").write_text("\n".join(lines) + "\n")
    (tmp_path / "sents.txt").write_text("\n".join(lines[:60]) + "\n")
    (tmp_path / "labels.txt").write_text("\n".join(map(str, labels[:60])) + "\n")
    p = lambda name: str(tmp_path / name)
    assert pbsv.run_cli(["train-words", "--corpus", p("corpus.txt"), "--out", p("w"), "--dim", "8",
                         "--epochs", "2", "--sample", "0", "--min-count", "1"]) == 0
    assert pbsv.run_cli(["embed", "--in-vectors", p("w.in.vec"), "--out-vectors", p("w.out.vec"),
                         "--sentences", p("sents.txt"), "--out", p("v.tsv"), "--method", "pb-l2",
                         "--lambda", "1"]) == 0
    assert pbsv.run_cli(["eval", "--train-vectors", p("v.tsv"), "--test-vectors", p("v.tsv"),
                         "--train-labels", p("labels.txt"), "--test-labels", p("labels.txt"),
                         "--out", p("r.json"), "--folds", "3", "--repeats", "1"]) == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["test_accuracy_mean"] >= report["majority_baseline"]
    assert pbsv.run_cli(["embed", "--method", "nope"]) != 0
