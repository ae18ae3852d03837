import os

import numpy as np
import pytest

import tdspkbeam as tb

CONFIG_DIR = os.environ.get(
    "TDSB_CONFIG_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "configs")
)


def test_sisnr_is_scale_invariant():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(400)
    y = x + 0.3 * rng.standard_normal(400)
    base = tb.sisnr_db(x, y)
    assert tb.sisnr_db(x, 1e3 * y) == pytest.approx(base, abs=1e-9)
    assert tb.sisnr_db(1e-3 * x, y) == pytest.approx(base, abs=1e-9)
    assert tb.sisnr_db(x, x) > 70.0


def test_sisnr_rejects_length_mismatch():
    with pytest.raises(tb.ShapeError):
        tb.sisnr_db(np.ones(10), np.ones(11))


def test_stft_and_ipd_shapes():
    rng = np.random.default_rng(1)
    sig = rng.standard_normal((2, 2048))
    spec = tb.stft(sig, 256, 128)
    assert spec.shape[0] == 2 and spec.shape[2] == 129
    feats = tb.ipd_features(sig, 256, 128)
    assert feats.shape == (spec.shape[1], 258)
    np.testing.assert_allclose(feats[:, :129] ** 2 + feats[:, 129:] ** 2, 1.0, atol=1e-12)
    with pytest.raises(tb.DataError):
        tb.ipd_features(sig[0], 256, 128)


def test_wav_round_trip(tmp_path):
    x = np.linspace(-0.5, 0.5, 800).reshape(1, -1)
    path = str(tmp_path / "x.wav")
    tb.write_wav(path, x, 8000)
    y, rate = tb.read_wav(path)
    assert rate == 8000
    np.testing.assert_allclose(y, x, atol=1.0 / 32767)


def test_corpus_train_extract_evaluate(tmp_path):
    corpus = str(tmp_path / "corpus")
    rows = tb.build_corpus(corpus, speakers=6, mixtures=6, test_mixtures=3, test_speakers=2, seed=3)
    assert [r["split"] for r in rows] == ["train", "test"]

    ckpt = str(tmp_path / "model.ckpt")
    result = tb.train(
        os.path.join(corpus, "train.tsv"),
        ckpt,
        config=os.path.join(CONFIG_DIR, "overfit.cfg"),
        max_epochs=2,
        seed=1,
    )
    assert len(result["history"]) == 2
    assert os.path.exists(ckpt)

    report = tb.evaluate(ckpt, os.path.join(corpus, "test.tsv"))
    assert report["summary"]["avg"][0] == 3
    assert all(np.isfinite(r["improvement"]) for r in report["records"])

    model = tb.Model.load(ckpt)
    assert model.kind == "td-spkbeam"
    mixture = np.random.default_rng(2).standard_normal(1600) * 0.1
    adapt = np.random.default_rng(3).standard_normal(1200) * 0.1
    est = model.extract(mixture, adapt)
    assert est.shape == mixture.shape
    assert model.embed(adapt).ndim == 1
    with pytest.raises(tb.UsageError):
        model.separate(mixture)


def test_bad_config_is_a_usage_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no_such_key = 1\n")
    with pytest.raises(tb.UsageError):
        tb.train("unused.tsv", str(tmp_path / "x.ckpt"), config=str(cfg))
