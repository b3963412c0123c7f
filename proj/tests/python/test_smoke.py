"""Smoke tests for the python bindings against the native core."""

import json
import math

import ssc


def test_tokenize():
    assert ssc.tokenize("We present an oracle.") == [
        "we", "present", "an", "oracle", ".",
    ]
    assert ssc.tokenize("A, b") == ["a", ",", "b"]
    assert ssc.tokenize("") == []


def test_bisect_split():
    assert ssc.bisect_split(5, 10) == [(0, 5)]
    ranges = ssc.bisect_split(25, 10)
    assert [end - begin for begin, end in ranges] == [7, 6, 6, 6]


def test_vocab_and_pack():
    vocab = ssc.Vocab.build([["a b", "c"]], cap=100)
    assert len(vocab) == 7  # 3 tokens + 4 reserved
    packed = ssc.pack(["a b", "c"], vocab)
    assert packed["token_ids"][0] == 2  # [CLS]
    assert packed["sep_positions"] == [3, 5]


def test_rouge_and_micro_f1():
    score = ssc.rouge_l(["a", "c"], ["a", "b", "c"])
    assert score["f"] == 0.8
    assert score["precision"] == 1.0
    assert ssc.lcs_length(["a", "b", "c", "d"], ["a", "c", "d", "b"]) == 3
    assert ssc.micro_f1([(0, 0), (1, 1), (2, 2), (2, 0)]) == 0.75


def test_crf():
    zeros2 = [[0.0, 0.0]] * 3
    trans = [[0.0, 0.0], [0.0, 0.0]]
    log_z = ssc.crf_log_partition(zeros2, trans, [0.0, 0.0], [0.0, 0.0])
    assert math.isclose(log_z, math.log(8.0), rel_tol=0, abs_tol=1e-12)
    nll = ssc.crf_nll(zeros2, trans, [0.0, 0.0], [0.0, 0.0], [0, 1, 0])
    assert math.isclose(nll, math.log(8.0), rel_tol=0, abs_tol=1e-12)

    emissions = [[0.0, 1.0], [1.0, 0.0], [1.0, 0.0]]
    sticky = [[0.0, -100.0], [-100.0, 0.0]]
    path, score = ssc.viterbi(emissions, sticky, [0.0, 0.0], [0.0, 0.0])
    assert path == [0, 0, 0]
    assert math.isclose(score, 2.0)


def test_aggregate():
    accs = {"w1": 0.9, "w2": 0.8, "w3": 0.8, "w4": 0.7, "w5": 0.6}
    votes = [("w1", "A"), ("w2", "A"), ("w3", "B"), ("w4", "B"), ("w5", "B")]
    label, confidence = ssc.aggregate(votes, accs, ["A", "B"])
    assert label == "B"
    assert abs(confidence - 2.1 / 3.8) <= 1e-12
    assert ssc.qualify({"hi": 0.75, "lo": 0.74}) == {"hi"}


def test_gen_synthetic_determinism():
    first = ssc.gen_synthetic(7, 5, 4)
    second = ssc.gen_synthetic(7, 5, 4)
    assert first == second
    assert all(len(doc["sentences"]) == 4 for doc in first)


def test_math_helpers():
    assert ssc.gelu([0.0]) == [0.0]
    assert math.isclose(ssc.gelu([1.0])[0], 0.8411919906082768, abs_tol=1e-12)
    probs = ssc.softmax([0.0, math.log(3.0)])
    assert math.isclose(probs[0], 0.25, abs_tol=1e-12)


def test_cli_round_trip(tmp_path):
    code, out, err = ssc.run([
        "gen", "--seed", "3", "--train", "6", "--dev", "2", "--test", "2",
        "--sentences", "4", "--out", str(tmp_path / "data"),
    ])
    assert code == 0, err
    lines = (tmp_path / "data" / "train.jsonl").read_text().splitlines()
    assert len(lines) == 6
    doc = json.loads(lines[0])
    assert len(doc["sentences"]) == 4

    code, out, err = ssc.run([
        "train", "--model", "cls-crf", "--task", "summarize",
        "--train", "x", "--dev", "x", "--test", "x", "--out", "x",
    ])
    assert code == 1  # usage error
