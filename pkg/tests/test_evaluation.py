import pytest

from logredact.evaluation import EvalInputError, GoldLabel, evaluate, load_gold, ratio, save_gold


def labels(n, start=1, attr="name"):
    return [GoldLabel(i, ((0, "customers", attr),)) for i in range(start, start + n)]


def test_precision_recall_counts():
    gold = labels(8)
    predicted = labels(8) + labels(2, start=9)
    r = evaluate(predicted, gold, n_lines=20)
    assert (r.true_positives, r.false_positives, r.false_negatives) == (8, 2, 0)
    assert r.precision == pytest.approx(0.8)
    assert r.recall == 1.0


def test_empty_sets_score_one():
    r = evaluate([], [], n_lines=0)
    assert r.precision == r.recall == 1.0
    assert ratio(0, 0) == 1.0


def test_swapping_roles_swaps_precision_and_recall():
    a = labels(5) + labels(3, start=20, attr="email")
    b = labels(7)
    ab, ba = evaluate(a, b, 30), evaluate(b, a, 30)
    assert ab.precision == ba.recall and ab.recall == ba.precision


def test_value_and_line_granularity_differ():
    gold = [GoldLabel(1, ((0, "c", "name"), (1, "c", "email")))]
    pred = [GoldLabel(1, ((0, "c", "name"),))]
    r = evaluate(pred, gold, 1)
    assert r.recall == 0.5
    assert r.line_recall == 1.0


def test_mapping_input():
    r = evaluate({1: [(0, "c", "name")]}, labels(1, attr="name"), 1)
    assert r.true_positives == 0 and r.false_positives == 1


def test_rejects_out_of_range_and_duplicate_lines():
    with pytest.raises(EvalInputError):
        evaluate(labels(1, start=5), [], n_lines=3)
    with pytest.raises(EvalInputError):
        evaluate([], labels(1) + labels(1), n_lines=3)


def test_gold_round_trip(tmp_path):
    g = labels(3) + [GoldLabel(9, ((0, "a", "b"), (2, "c", "d")))]
    save_gold(tmp_path / "g.jsonl", g)
    assert load_gold(tmp_path / "g.jsonl") == g
    (tmp_path / "bad.jsonl").write_text('{"line": 1}\n')
    with pytest.raises(EvalInputError):
        load_gold(tmp_path / "bad.jsonl")
