import numpy as np
import pytest

from pointtarget import gesture
from pointtarget.evaluation import (
    Confusion,
    EvalReport,
    evaluate_gesture,
    evaluate_recognition,
    evaluate_scenes,
    f1_score,
    format_reports,
    metrics,
    reports_to_json,
    run_experiment,
)
from pointtarget.gesture import PointingResult
from pointtarget.scene import GroundTruth
from pointtarget.synth import SynthConfig, generate, write_dataset


def test_metrics_printed_row():
    # P=0.56, R=0.91 -> F1 rounds to 0.69
    assert round(f1_score(0.56, 0.91), 2) == 0.69


def test_metrics_hand_computed():
    p, r, f1, acc = metrics(Confusion(tp=2, fp=1, fn=1, tn=3))
    assert p == pytest.approx(2 / 3)
    assert r == pytest.approx(2 / 3)
    assert f1 == pytest.approx(2 / 3)
    assert acc == pytest.approx(5 / 7)


def test_metrics_degenerate_denominators():
    p, r, f1, acc = metrics(Confusion(tp=0, fp=0, fn=0, tn=5))
    assert (p, r, f1) == (0.0, 0.0, 0.0)
    assert acc == 1.0


def test_metrics_empty_confusion_rejected():
    with pytest.raises(ValueError):
        metrics(Confusion())


def test_f1_is_harmonic_mean():
    rng = np.random.default_rng(20)
    for _ in range(200):
        tp, fp, fn, tn = [int(x) for x in rng.integers(0, 30, 4)]
        if tp + fp + fn + tn == 0:
            continue
        p, r, f1, acc = metrics(Confusion(tp, fp, fn, tn))
        assert 0.0 <= acc <= 1.0
        if p > 0 and r > 0:
            assert f1 == pytest.approx(2 / (1 / p + 1 / r))


def pred(pointing: bool, target=None) -> PointingResult:
    return PointingResult(is_pointing=pointing, target_id=target)


def truth(pointing: bool, target=None, difficulty="easy") -> GroundTruth:
    return GroundTruth(
        is_pointing=pointing,
        arms=("right",) if pointing else (),
        target_id=target,
        difficulty=difficulty,
    )


def test_gesture_all_correct():
    truths = [truth(True, 0), truth(False), truth(True, 1)]
    preds = [pred(True, 0), pred(False), pred(True, 1)]
    rep = evaluate_gesture(preds, truths)
    assert (rep.precision, rep.recall, rep.f1, rep.accuracy) == (1.0, 1.0, 1.0, 1.0)


def test_gesture_all_inverted():
    truths = [truth(True, 0), truth(False)]
    preds = [pred(False), pred(True, 3)]
    rep = evaluate_gesture(preds, truths)
    assert rep.confusion.tp == 0 and rep.confusion.tn == 0
    assert rep.confusion.fn == 1 and rep.confusion.fp == 1


def test_gesture_mixed_matches_hand_confusion():
    # 7 scenes -> tp=2, fp=1, fn=1, tn=3 as in the metrics example
    truths = [truth(True, 0)] * 3 + [truth(False)] * 4
    preds = [pred(True, 0), pred(True, 0), pred(False), pred(True, 9), pred(False), pred(False), pred(False)]
    rep = evaluate_gesture(preds, truths)
    assert rep.confusion == Confusion(tp=2, fp=1, fn=1, tn=3)
    assert rep.accuracy == pytest.approx(5 / 7)


def test_count_mismatch_rejected():
    with pytest.raises(ValueError, match="mismatch"):
        evaluate_gesture([pred(True)], [truth(True, 0), truth(False)])


def test_recognition_perfect():
    truths = [truth(True, i) for i in range(6)] + [truth(False)] * 4
    preds = [pred(True, i) for i in range(6)] + [pred(False)] * 4
    rep = evaluate_recognition(preds, truths)
    assert (rep.precision, rep.recall, rep.f1, rep.accuracy) == (1.0, 1.0, 1.0, 1.0)


def test_recognition_wrong_target_is_fn():
    truths = [truth(True, i) for i in range(6)] + [truth(False)] * 4
    preds = [pred(True, i) for i in range(5)] + [pred(True, 99)] + [pred(False)] * 4
    rep = evaluate_recognition(preds, truths)
    assert rep.confusion.tp == 5 and rep.confusion.fn == 1 and rep.confusion.fp == 0
    assert rep.recall == pytest.approx(5 / 6)


def test_recognition_false_alarm_lowers_accuracy():
    truths = [truth(True, 0)] * 5 + [truth(False)] * 5
    correct = [pred(True, 0)] * 5 + [pred(False)] * 5
    alarmed = [pred(True, 0)] * 5 + [pred(True, 1)] + [pred(False)] * 4
    base = evaluate_recognition(correct, truths).accuracy
    worse = evaluate_recognition(alarmed, truths).accuracy
    assert base - worse == pytest.approx(1 / 10)


def test_split_filtering():
    truths = [truth(True, 0, "easy"), truth(True, 1, "hard"), truth(False, None, "hard")]
    preds = [pred(True, 0), pred(False), pred(False)]
    easy = evaluate_recognition(preds, truths, split="easy")
    hard = evaluate_recognition(preds, truths, split="hard")
    assert easy.confusion.total == 1 and easy.accuracy == 1.0
    assert hard.confusion == Confusion(tp=0, fp=0, fn=1, tn=1)


def test_permutation_invariance():
    rng = np.random.default_rng(21)
    truths = [truth(bool(b), 0 if b else None, ("easy", "hard")[i % 2]) for i, b in enumerate(rng.integers(0, 2, 40))]
    preds = [pred(bool(rng.integers(0, 2)), 0) for _ in truths]
    base_g = evaluate_gesture(preds, truths)
    base_r = evaluate_recognition(preds, truths)
    order = rng.permutation(len(truths))
    shuffled_p = [preds[i] for i in order]
    shuffled_t = [truths[i] for i in order]
    assert evaluate_gesture(shuffled_p, shuffled_t) == base_g
    assert evaluate_recognition(shuffled_p, shuffled_t) == base_r


def test_recognition_tp_never_exceeds_gesture_tp():
    rng = np.random.default_rng(22)
    for _ in range(30):
        truths = [truth(bool(b), int(b) - 1 if b else None) for b in rng.integers(0, 2, 20)]
        preds = [
            pred(bool(rng.integers(0, 2)), int(rng.integers(-1, 2))) for _ in truths
        ]
        g = evaluate_gesture(preds, truths).confusion.tp
        r = evaluate_recognition(preds, truths).confusion.tp
        assert r <= g


def test_report_serialization():
    truths = [truth(True, 0), truth(False, None, "hard")]
    preds = [pred(True, 0), pred(False)]
    reports = evaluate_scenes(preds, truths)
    text = format_reports(reports)
    assert "recognition" in text and "gesture" in text
    import json

    parsed = json.loads(reports_to_json(reports))
    assert all(set(r) >= {"task", "split", "mode", "confusion", "accuracy"} for r in parsed)


def test_run_experiment_noise_free_easy(tmp_path, models):
    scenes = generate(SynthConfig(seed=60, count=20, difficulty="easy"))
    scenes += generate(SynthConfig(seed=61, count=10, difficulty="neutral"))
    manifest = write_dataset(scenes, tmp_path, split="test", prefix="t")
    reports = run_experiment(manifest, models["3d"], "3d")
    rec_all = next(r for r in reports if r.task == "recognition" and r.split == "all")
    assert rec_all.accuracy == 1.0
    assert rec_all.confusion.total == 30


def test_run_experiment_empty_test_split(tmp_path, models):
    scenes = generate(SynthConfig(seed=62, count=2, difficulty="easy"))
    manifest = write_dataset(scenes, tmp_path, split="train", prefix="t")
    with pytest.raises(ValueError, match="empty test split"):
        run_experiment(manifest, models["3d"], "3d")


def test_run_experiment_reports_scene_path_on_failure(tmp_path, models):
    from pointtarget.scene import SceneError

    scenes = generate(SynthConfig(seed=64, count=2, difficulty="easy"))
    manifest = write_dataset(scenes, tmp_path, split="test", prefix="t")
    bad = tmp_path / "t_0001.json"
    bad.write_text(bad.read_text().replace('"easy"', '"weird"'))
    with pytest.raises(SceneError, match="t_0001.json"):
        run_experiment(manifest, models["3d"], "3d")


def test_run_experiment_jobs_equivalence(tmp_path, models):
    scenes = generate(SynthConfig(seed=63, count=8, difficulty="hard", keypoint_noise_px=2.0))
    manifest = write_dataset(scenes, tmp_path, split="test", prefix="t")
    serial = run_experiment(manifest, models["3d"], "3d", jobs=1)
    parallel = run_experiment(manifest, models["3d"], "3d", jobs=2)
    assert serial == parallel
