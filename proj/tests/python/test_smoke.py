"""Smoke tests for the python module: exercise each exposed operation once."""

import math
import xml.dom.minidom

import pytest

import scrawl


def test_normalize_unit_segment():
    points, (mu_x, mu_y, delta_x) = scrawl.normalize_coordinates([(0, 0, 0), (1, 0, 0)])
    assert mu_x == pytest.approx(0.5, abs=1e-9)
    assert mu_y == pytest.approx(0.0, abs=1e-9)
    assert delta_x == pytest.approx(math.sqrt(1 / 12), abs=1e-9)
    assert points[0][0] == pytest.approx(-math.sqrt(3), abs=1e-9)
    assert points[1][0] == pytest.approx(math.sqrt(3), abs=1e-9)


def test_preprocess_and_features():
    raw = [(0, 0, 0), (0.5, 0.01, 0), (1, 0, 0), (1, 1, 0), (0.5, 0.5, 1), (0.6, 0.8, 1)]
    prepped = scrawl.preprocess(raw, "recognition")
    assert len(prepped) <= len(raw)
    feats = scrawl.line_features(prepped)
    assert len(feats) == len(prepped) - 1
    for f in feats:
        assert len(f) == 6
        assert f[4] + f[5] == 1.0

    tokens = scrawl.gen_tokens(prepped)
    assert tokens[-1][2] == 2  # end-of-char


def test_preprocess_rejects_degenerate_input():
    with pytest.raises(scrawl.ScrawlError):
        scrawl.preprocess([(1, 0, 0), (1, 1, 0), (1, 2, 0)], "recognition")


def test_synthesize_corpus_is_deterministic():
    a = scrawl.synthesize_corpus(classes=10, per_class=2, noise=0.02, seed=5)
    b = scrawl.synthesize_corpus(classes=10, per_class=2, noise=0.02, seed=5)
    assert len(a) == 20
    assert a == b
    labels = sorted({label for label, _ in a})
    assert labels == list(range(10))


def test_render_svg_is_well_formed():
    svg = scrawl.render_svg([(0, 0, 0), (1, 1, 0), (0.5, 0.2, 1), (0.9, 0.4, 1)])
    doc = xml.dom.minidom.parseString(svg)
    assert len(doc.getElementsByTagName("polyline")) == 2


@pytest.fixture(scope="module")
def tiny_corpus():
    return scrawl.synthesize_corpus(classes=3, per_class=12, noise=0.02, seed=9)


@pytest.fixture(scope="module")
def tiny_classifier(tiny_corpus):
    return scrawl.Classifier.train(tiny_corpus, epochs=8, batch=8, lr=0.005, seed=3)


def test_classifier_train_predict(tiny_corpus, tiny_classifier):
    assert tiny_classifier.class_count == 3
    assert tiny_classifier.architecture.endswith("->3")
    probs = tiny_classifier.predict_proba(tiny_corpus[0][1])
    assert len(probs) == 3
    assert sum(probs) == pytest.approx(1.0, abs=1e-9)
    assert tiny_classifier.accuracy(tiny_corpus) > 0.5

    ens = tiny_classifier.predict_ensemble(tiny_corpus[0][1], n_sub=5, p=0.3, seed=1)
    assert sum(ens) == pytest.approx(1.0, abs=1e-9)


def test_classifier_checkpoint_roundtrip(tmp_path, tiny_corpus, tiny_classifier):
    base = str(tmp_path / "clf")
    tiny_classifier.save(base)
    loaded = scrawl.Classifier.load(base)
    sample = tiny_corpus[5][1]
    a = tiny_classifier.predict_proba(sample)
    b = loaded.predict_proba(sample)
    assert a == pytest.approx(b, abs=1e-6)  # float32 checkpoint truncation


def test_generator_train_sample_roundtrip(tmp_path, tiny_corpus):
    generator = scrawl.Generator.train(tiny_corpus, epochs=6, batch=8, lr=0.002, seed=4)
    assert generator.class_count == 3

    points, truncated = generator.sample(0, seed=11)
    assert isinstance(truncated, bool)
    assert len(points) >= 1
    again, _ = generator.sample(0, seed=11)
    assert points == again  # fixed seed reproduces the character

    base = str(tmp_path / "gen")
    generator.save(base)
    loaded = scrawl.Generator.load(base)
    assert loaded.class_count == 3
    neighbors = loaded.nearest_neighbors(0, k=2)
    assert len(neighbors) == 2
    assert 0 not in neighbors

    report = scrawl.quality_report(loaded, scrawl.Classifier.train(tiny_corpus, epochs=4, seed=5),
                                   n_per_class=3, seed=2)
    assert set(report) >= {"overall", "per_class", "worst", "confusion", "truncated", "samples"}
    assert report["samples"] == 9
