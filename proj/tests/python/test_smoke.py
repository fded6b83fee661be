import math

import numpy as np
import pytest

import wavlm_si as w


@pytest.fixture(scope="module")
def pico():
    return w.build_model(w.ModelConfig.preset("pico"), 7)


def clip(cfg, seed):
    rng = np.random.default_rng(seed)
    n = cfg.clip_samples
    return rng.uniform(-0.3, 0.3, n).astype(np.float32), rng.uniform(-0.3, 0.3, n).astype(np.float32)


def test_presets_roundtrip():
    names = w.preset_names()
    assert "nano_ws" in names
    cfg = w.ModelConfig.preset("nano_ws")
    again = w.ModelConfig.from_text(cfg.to_text())
    assert again.to_text() == cfg.to_text()
    assert cfg.weight_share_group == 3


def test_nano_param_count():
    r = w.analyze(w.ModelConfig.preset("nano"))
    assert abs(r["total_params"] / 1e6 - 12.46) < 0.05
    assert r["frames"] == 249
    assert math.isclose(sum(r["percent"].values()), 100.0, rel_tol=1e-9)


def test_infer_probabilities(pico):
    left, right = clip(pico.config, 1)
    out = w.infer(pico, left, right)
    assert len(out["probabilities"]) == 4
    assert math.isclose(sum(out["probabilities"]), 1.0, abs_tol=1e-5)
    assert out["label"] in {"backchannel", "failed_interruption", "interruption", "laughter"}
    assert w.infer(pico, left, right)["logits"] == out["logits"]


def test_bytes_roundtrip(pico):
    again = w.Model.from_bytes(pico.to_bytes())
    left, right = clip(pico.config, 2)
    assert w.infer(again, left, right)["logits"] == w.infer(pico, left, right)["logits"]


def test_compress_pipeline(pico):
    model, log = w.compress(pico, "drop-pos-conv,tie=2,quantize")
    assert log
    assert model.unique_layer_count <= pico.unique_layer_count
    assert any(model.is_quantized(n) for n in model.tensor_names())
    left, right = clip(model.config, 3)
    assert math.isclose(sum(w.infer(model, left, right)["probabilities"]), 1.0, abs_tol=1e-5)


def test_errors_carry_kind(pico):
    with pytest.raises(w.WsiError) as info:
        w.Model.from_bytes(b"NOPE" + b"\0" * 32)
    assert info.value.kind == "bad-magic"
    with pytest.raises(w.WsiError) as info:
        w.infer(pico, np.zeros(10, np.float32), np.zeros(10, np.float32))
    assert info.value.kind == "input"


def test_tpr_at_fpr():
    scores = [0.9, 0.8, 0.7, 0.6, 0.5]
    positive = [True, True, False, True, False]
    assert w.tpr_at_fpr(scores, positive, 0.0) == pytest.approx(2 / 3)
    assert w.tpr_at_fpr(scores, positive, 0.5) == pytest.approx(1.0)


def test_overlaps_and_energy():
    events = w.detect_overlaps([[(0.0, 2.0), (5.0, 6.0)], [(1.0, 3.0), (5.9, 7.0)]])
    assert events == [pytest.approx((1.0, 1.0))]
    assert w.trigger_interval(3600.0, 212) == pytest.approx(3600.0 / 212)
    gating, speedup, combined = w.energy_reduction(5.0, 17.0, 1.6, 0.22)
    assert combined == pytest.approx(gating * speedup)
    fleet = w.fleet_projection()
    assert fleet["savings_gwh"] > 0
    assert fleet["people_equivalent"] == pytest.approx(fleet["savings_gwh"] * 1e6 / 3128.0)
