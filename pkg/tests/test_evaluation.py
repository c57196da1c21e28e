import numpy as np
import pytest

from voicemark.config import config_from_file, load_config, save_config
from voicemark.evaluation import calibrate_corpus, load_corpus, render_report, run_evaluation
from voicemark.watermark import WatermarkConfig


def test_load_corpus_sorted_and_resampled(small_corpus_dir):
    corpus = load_corpus(small_corpus_dir)
    assert [name for name, _ in corpus] == sorted(name for name, _ in corpus)
    assert all(buf.sample_rate == 16000 for _, buf in corpus)


def test_load_corpus_empty(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path)


def test_calibrate_corpus_separates_classes(small_corpus_dir):
    result, n0, n1 = calibrate_corpus(small_corpus_dir, WatermarkConfig(payload_bps=4))
    assert n0 == n1 > 0
    assert 0 < result.theta < 1
    assert result.balanced_error <= 0.05


def test_run_evaluation_report_structure(small_corpus_dir):
    report = run_evaluation(
        small_corpus_dir, payloads=[4], attacks=["normal", "requant-8"], seed=11
    )
    assert len(report.records) == 4 * 1 * 2
    assert len(report.aggregates) == 2
    # aggregates must equal recomputed means of their records
    for agg in report.aggregates:
        recs = [r for r in report.records if r.payload_bps == agg.payload_bps and r.attack == agg.attack]
        assert agg.mean_ber == pytest.approx(np.mean([r.ber for r in recs]))
    text = render_report(report)
    assert "[config]" in text and "[records]" in text and "[aggregates]" in text
    assert "seed = 11" in text
    assert "theta_4bps" in text


def test_run_evaluation_deterministic(small_corpus_dir):
    kwargs = dict(payloads=[4], attacks=["normal", "awgn"], seed=3)
    text1 = render_report(run_evaluation(small_corpus_dir, **kwargs))
    text2 = render_report(run_evaluation(small_corpus_dir, **kwargs))
    assert text1 == text2


def test_run_evaluation_skips_unavailable_codecs(small_corpus_dir, monkeypatch):
    monkeypatch.setitem(
        __import__("voicemark.attacks", fromlist=["REFERENCE_CODEC_COMMANDS"]).REFERENCE_CODEC_COMMANDS,
        "mp3",
        "no-such-binary-here {in} {out}",
    )
    report = run_evaluation(small_corpus_dir, payloads=[4], attacks=["normal", "mp3"], seed=1)
    assert "mp3" in report.skipped
    assert all(r.attack == "normal" for r in report.records)


# --- config files ---


def test_config_file_roundtrip(tmp_path):
    cfg = WatermarkConfig(payload_bps=4, theta=0.0825, band=(150.0, 900.0), target_dbfs=-4.5)
    path = tmp_path / "detector.cfg"
    save_config(cfg, path)
    values = load_config(path)
    assert values["payload_bps"] == 4
    assert values["theta"] == pytest.approx(0.0825)
    assert values["band_low_hz"] == 150.0

    loaded = config_from_file(path)
    assert loaded.payload_bps == 4
    assert loaded.theta == pytest.approx(0.0825)
    assert loaded.band == (150.0, 900.0)
    assert loaded.target_dbfs == -4.5


def test_config_file_overrides(tmp_path):
    cfg = WatermarkConfig(payload_bps=4, theta=0.08)
    path = tmp_path / "detector.cfg"
    save_config(cfg, path)
    loaded = config_from_file(path, theta=0.2, payload_bps=8)
    assert loaded.theta == 0.2
    assert loaded.payload_bps == 8


def test_config_file_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("volume = 11\n")
    with pytest.raises(ValueError):
        load_config(path)


def test_config_file_comments_and_blanks(tmp_path):
    path = tmp_path / "ok.cfg"
    path.write_text("# detector settings\n\ntheta = 0.1  # calibrated\npayload_bps = 2\n")
    values = load_config(path)
    assert values == {"theta": 0.1, "payload_bps": 2}
