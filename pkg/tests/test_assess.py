import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selfx.assess import (ExperienceLogError, ExperienceRecord,
                          acoustic_position_inaccuracy, acoustic_quality_margin,
                          append_experience, human_reply_probability,
                          image_quality, parse_som, predict, read_log,
                          serialize_som, train_som, visual_position_inaccuracy)
from selfx.assess.som import SomConfig
from selfx.assess.words import COMMON_WORDS


# ----- position inaccuracy ----------------------------------------------------

def test_visual_position_inaccuracy():
    assert visual_position_inaccuracy(0.25, 4.0) == pytest.approx(2.25, abs=1e-12)
    assert visual_position_inaccuracy(0.25, 0.0) == pytest.approx(0.25, abs=1e-12)


def test_visual_position_inaccuracy_rejects_negative():
    with pytest.raises(ValueError):
        visual_position_inaccuracy(0.25, -1.0)
    with pytest.raises(ValueError):
        visual_position_inaccuracy(-0.1, 1.0)


def test_acoustic_position_inaccuracy():
    assert acoustic_position_inaccuracy(3, 4) == pytest.approx(2.5, abs=1e-12)
    assert acoustic_position_inaccuracy(6, 8) == pytest.approx(5.0, abs=1e-12)
    assert acoustic_position_inaccuracy(0, 0) == 0.0


def test_acoustic_position_inaccuracy_rejects_negative():
    with pytest.raises(ValueError):
        acoustic_position_inaccuracy(-3, 4)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 100), st.floats(0, 1000))
def test_position_formulas_match_recomputation(delta, distance):
    assert visual_position_inaccuracy(delta, distance) == \
        pytest.approx(delta + math.sqrt(distance), abs=1e-12)
    assert acoustic_position_inaccuracy(delta, distance) == \
        pytest.approx(math.sqrt(delta * delta + distance * distance) / 2, abs=1e-12)


def test_acoustic_quality_margin():
    assert acoustic_quality_margin(40) == 30.0
    assert acoustic_quality_margin(70, 70) == 0.0
    assert acoustic_quality_margin(90, 70) == -20.0


# ----- spoken reply ------------------------------------------------------------

def test_reply_probability_empty():
    assert human_reply_probability("") == 0.0
    assert human_reply_probability("   ") == 0.0


def test_reply_probability_common_sentence():
    p = human_reply_probability("yes i am here please help me")
    assert 0.5 < p <= 1.0


def test_reply_probability_gibberish():
    assert human_reply_probability("xqz vrk blt") == 0.0


def test_reply_probability_case_insensitive():
    assert human_reply_probability("YES Help") == 1.0


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="abcdefg xyz", max_size=40),
       st.sampled_from(sorted(COMMON_WORDS)))
def test_reply_probability_monotone_in_listed_words(transcript, word):
    base = human_reply_probability(transcript)
    assert human_reply_probability(transcript + " " + word) >= base


# ----- image quality -------------------------------------------------------------

def test_image_quality_constant():
    q = image_quality(np.full((4, 5), 128.0))
    assert q.brightness == 128.0 and q.contrast == 0.0


def test_image_quality_two_point():
    pixels = np.concatenate([np.zeros((2, 4)), np.full((2, 4), 255.0)])
    q = image_quality(pixels)
    assert q.brightness == 127.5 and q.contrast == 127.5


def test_image_quality_single_pixel():
    q = image_quality([[42]])
    assert q.brightness == 42.0 and q.contrast == 0.0


def test_image_quality_rejects_empty():
    with pytest.raises(ValueError):
        image_quality(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        image_quality([1, 2, 3])  # not a matrix


# ----- experience log --------------------------------------------------------------

def _record(behavior="search", outcome=1, **features):
    return {"behavior": behavior, "features": features or {"x": 1.0},
            "outcome": outcome}


def test_append_to_empty_log(tmp_path):
    log = tmp_path / "exp.jsonl"
    assert append_experience(log, _record()) == 1
    assert append_experience(log, _record()) == 2


def test_append_feature_mismatch(tmp_path):
    log = tmp_path / "exp.jsonl"
    append_experience(log, _record(x=1.0))
    with pytest.raises(ExperienceLogError, match="feature names"):
        append_experience(log, _record(y=2.0))


def test_append_other_behavior_may_differ(tmp_path):
    log = tmp_path / "exp.jsonl"
    append_experience(log, _record("a", x=1.0))
    assert append_experience(log, _record("b", y=1.0)) == 1


def test_unknown_keys_rejected(tmp_path):
    log = tmp_path / "exp.jsonl"
    log.write_text(json.dumps({"behavior": "a", "features": {"x": 1},
                               "outcome": 1, "note": "hm"}) + "\n")
    with pytest.raises(ExperienceLogError, match="unknown record keys"):
        read_log(log)


def test_outcome_must_be_binary(tmp_path):
    log = tmp_path / "exp.jsonl"
    log.write_text(json.dumps({"behavior": "a", "features": {"x": 1},
                               "outcome": 0.5}) + "\n")
    with pytest.raises(ExperienceLogError, match="outcome"):
        read_log(log)
    log.write_text(json.dumps({"behavior": "a", "features": {"x": 1},
                               "outcome": True}) + "\n")
    with pytest.raises(ExperienceLogError, match="outcome"):
        read_log(log)


def test_log_round_trip(tmp_path):
    log = tmp_path / "exp.jsonl"
    append_experience(log, _record(x=1.5, y=-2.0))
    records = read_log(log)
    assert records == [ExperienceRecord("search", {"x": 1.5, "y": -2.0}, 1)]


def test_experiment_scale_log_trains(tmp_path):
    log = tmp_path / "exp.jsonl"
    for i in range(25):
        append_experience(log, _record(outcome=i % 2, noise=float(i), dist=2.0))
    records = read_log(log)
    som = train_som(records, SomConfig(seed=3, rows=2, cols=2, epochs=20))
    assert sum(som.member_counts) == 25


# ----- self-organizing map ------------------------------------------------------------

def _uniform_records(n, outcome=1, behavior="b"):
    return [ExperienceRecord(behavior, {"x": float(i % 5), "y": float(i % 3)}, outcome)
            for i in range(n)]


def test_all_positive_outcomes():
    som = train_som(_uniform_records(30), SomConfig(seed=1, rows=3, cols=3, epochs=30))
    for count, mean in zip(som.member_counts, som.outcome_means):
        if count:
            assert mean == 1.0
        else:
            assert mean is None


def test_training_is_bitwise_deterministic():
    config = SomConfig(seed=42, rows=3, cols=3, epochs=50)
    a = serialize_som(train_som(_uniform_records(40), config))
    b = serialize_som(train_som(_uniform_records(40), config))
    assert a == b


def test_separated_clusters_predict_their_outcome():
    rng = np.random.default_rng(7)
    records = []
    for _ in range(50):
        x, y = rng.normal(0.0, 1.0, 2)
        records.append(ExperienceRecord("b", {"x": x, "y": y}, 0))
    for _ in range(50):
        x, y = rng.normal(0.0, 1.0, 2)
        records.append(ExperienceRecord("b", {"x": x + 5.0, "y": y}, 1))
    som = train_som(records, SomConfig(seed=11, rows=4, cols=4, epochs=60))
    assert predict(som, {"x": 0.0, "y": 0.0}).p_success <= 0.1
    assert predict(som, {"x": 5.0, "y": 0.0}).p_success >= 0.9


def test_single_record_som():
    som = train_som([ExperienceRecord("b", {"x": 3.0}, 1)],
                    SomConfig(seed=0, rows=2, cols=2, epochs=5))
    for query in (-10.0, 0.0, 99.0):
        assert predict(som, {"x": query}).p_success == 1.0


def test_predict_self_consistency():
    records = _uniform_records(20, outcome=1) + \
        [ExperienceRecord("b", {"x": 50.0, "y": 50.0}, 0)]
    som = train_som(records, SomConfig(seed=5, rows=3, cols=3, epochs=40))
    prediction = predict(som, {"x": 50.0, "y": 50.0})
    node = prediction.bmu[0] * som.cols + prediction.bmu[1]
    assert prediction.p_success == som.outcome_means[node]


def test_predict_dimension_mismatch():
    som = train_som(_uniform_records(10), SomConfig(seed=0, rows=2, cols=2, epochs=5))
    with pytest.raises(ValueError, match="expected 2 features"):
        predict(som, [1.0])
    with pytest.raises(ValueError, match="missing features"):
        predict(som, {"x": 1.0})


def test_bmu_is_globally_nearest():
    records = _uniform_records(30)
    som = train_som(records, SomConfig(seed=9, rows=3, cols=4, epochs=30))
    rng = np.random.default_rng(0)
    for _ in range(20):
        query = {"x": float(rng.uniform(-5, 10)), "y": float(rng.uniform(-5, 10))}
        prediction = predict(som, query)
        z = (np.array([query["x"], query["y"]]) - som.means) / som.stds
        d2 = ((som.prototypes - z) ** 2).sum(axis=1)
        chosen = prediction.bmu[0] * som.cols + prediction.bmu[1]
        occupied = [k for k in range(12) if som.member_counts[k]]
        assert d2[chosen] <= min(d2[k] for k in occupied) + 1e-12


def test_outcome_mean_conservation():
    rng = np.random.default_rng(3)
    records = [ExperienceRecord("b", {"x": float(rng.normal()), "y": float(rng.normal())},
                                int(rng.integers(0, 2)))
               for _ in range(60)]
    som = train_som(records, SomConfig(seed=2, rows=3, cols=3, epochs=40))
    total = sum(count * mean for count, mean in
                zip(som.member_counts, som.outcome_means) if count)
    assert total == pytest.approx(sum(r.outcome for r in records), abs=1e-9)


def test_serialization_round_trip_exact():
    records = [ExperienceRecord("search room", {"a": 0.1 + 0.2, "b": 1 / 3}, 1),
               ExperienceRecord("search room", {"a": -7.25e-4, "b": math.pi}, 0)]
    som = train_som(records, SomConfig(seed=13, rows=2, cols=3, epochs=17))
    text = serialize_som(som)
    clone = parse_som(text)
    assert clone.behavior == "search room"
    assert clone.feature_names == som.feature_names
    assert np.array_equal(clone.prototypes, som.prototypes)
    assert np.array_equal(clone.means, som.means)
    assert np.array_equal(clone.stds, som.stds)
    assert clone.member_counts == som.member_counts
    assert clone.outcome_means == som.outcome_means
    assert serialize_som(clone) == text


def test_train_rejects_empty_and_ragged():
    with pytest.raises(ValueError, match="empty"):
        train_som([])
    ragged = [ExperienceRecord("b", {"x": 1.0}, 1),
              ExperienceRecord("b", {"y": 1.0}, 0)]
    with pytest.raises(ValueError, match="ragged"):
        train_som(ragged, SomConfig(epochs=1))


def test_train_rejects_whitespace_feature_names():
    with pytest.raises(ValueError, match="whitespace"):
        train_som([ExperienceRecord("b", {"a b": 1.0}, 1)], SomConfig(epochs=1))
