import math

import pytest

import habgate


def test_metrics_on_known_confusion_matrix():
    truth = [True] * 10 + [False] * 10
    pred = [True] * 9 + [False] + [True] * 2 + [False] * 8
    m = habgate.metrics(truth, pred)
    assert (m["tp"], m["fn"], m["fp"], m["tn"]) == (9, 1, 2, 8)
    assert m["accuracy"] == pytest.approx(0.85)
    assert m["sensitivity"] == pytest.approx(0.9)
    assert m["kappa"] == pytest.approx(0.7)
    assert habgate.metrics([False], [False])["sensitivity"] is None


def test_kfold_split_partitions():
    folds = habgate.kfold_split(175, 10, 1)
    assert sorted(len(f) for f in folds) == [17] * 5 + [18] * 5
    assert sorted(i for f in folds for i in f) == list(range(175))


def test_stats_reference_values():
    y = [2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 4.1, 3.9, 2.5]
    sw = habgate.shapiro_wilk(y)
    assert sw["statistic"] == pytest.approx(0.9657345347, rel=1e-8)
    assert sw["reject"] is False
    assert habgate.anderson_darling(y)["statistic"] == pytest.approx(0.1693306480, rel=1e-8)
    anova = habgate.one_way_anova({"a": [1, 2, 3], "b": [2, 3, 4], "c": [3, 4, 5]})
    assert anova["statistic"] == pytest.approx(3.0)
    assert anova["p_value"] == pytest.approx(0.125)
    assert habgate.studentized_range_quantile(0.95, 3, 10) == pytest.approx(3.876776750, rel=1e-6)
    pairs = habgate.tukey_kramer({"a": [1, 2, 3], "b": [2, 3, 4], "c": [3, 4, 5]})
    assert len(pairs) == 3


def test_errors_are_raised_as_habgate_error():
    with pytest.raises(habgate.HabgateError):
        habgate.shapiro_wilk([1.0, 2.0])


def test_synthesize_train_predict(tmp_path):
    bound = habgate.synthesize(tmp_path / "data", {"seed": "3", "years": "3"})
    assert len(bound["zones"]) == 12
    for name in ("stations.csv", "meteo.csv", "upwelling.csv", "status.csv"):
        assert (tmp_path / "data" / name).exists()

    m = habgate.zone_matrix(tmp_path / "data", "VigoA")
    assert len(m["features"]) == 76
    assert len(m["rows"]) == len(m["closed"]) > 10
    assert all(not math.isnan(v) for row in m["rows"] for v in row)


def test_train_and_predict_from_matrix(tmp_path):
    habgate.synthesize(tmp_path / "data", {"seed": "4", "years": "3"})
    m = habgate.zone_matrix(tmp_path / "data", "CangasF")
    header = "week," + ",".join(m["features"]) + ",label\n"
    lines = [
        w + "," + ",".join(repr(v) for v in row) + "," + ("1" if c else "0")
        for w, row, c in zip(m["weeks"], m["rows"], m["closed"])
    ]
    csv = tmp_path / "CangasF.csv"
    csv.write_text(header + "\n".join(lines) + "\n")

    model = habgate.train(csv, {"family": "knn", "params": {"k": 1}}, {"prune": True}, seed=2)
    assert 0 < len(model.features) <= 76
    row = dict(zip(m["features"], m["rows"][0]))
    rec = model.predict(row)
    assert rec["label"] == ("CLOSED" if m["closed"][0] else "OPEN")
    assert rec["neighbors"][0]["distance"] == 0.0

    with pytest.raises(habgate.HabgateError, match="missing feature"):
        model.predict({m["features"][0]: 1.0})

    model.save(tmp_path / "model.json")
    again = habgate.load_model(tmp_path / "model.json")
    assert again.predict(row)["label"] == rec["label"]
