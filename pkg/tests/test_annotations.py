import itertools
import json
import logging
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from serpaudit.annotations import (
    JUDGED_STANCES,
    AggregatedLabel,
    Stance,
    WorkerJudgment,
    aggregate,
    fleiss_kappa,
    leaning_of,
    load_judgments,
    relevance_of,
)
from serpaudit.corpus import DatasetError, Leaning

from conftest import topic


def judgments(doc, *stances):
    return [WorkerJudgment(doc, f"w{i}", Stance(s)) for i, s in enumerate(stances)]


@pytest.mark.parametrize(
    "stances, expected, support",
    [
        (("pro", "pro", "against"), Stance.PRO, 2),
        (("pro", "against", "neutral"), Stance.UNRESOLVED, 1),
        (("not_relevant",) * 3, Stance.NOT_RELEVANT, 3),
    ],
)
def test_majority(stances, expected, support):
    label = aggregate(judgments("d", *stances))["d"]
    assert label.stance is expected
    assert label.support == support


def test_aggregate_empty():
    with pytest.raises(ValueError):
        aggregate([])


def test_aggregate_warns_on_unusual_worker_count(caplog):
    with caplog.at_level(logging.WARNING):
        label = aggregate(judgments("d", "pro", "pro"))["d"]
    assert label.stance is Stance.PRO
    assert "expected 3" in caplog.text


def test_two_way_tie_of_four_is_unresolved():
    assert aggregate(judgments("d", "pro", "pro", "against", "against"))["d"].stance is Stance.UNRESOLVED


@given(st.lists(st.sampled_from(JUDGED_STANCES), min_size=3, max_size=3), st.randoms())
def test_aggregate_permutation_invariant(stances, rnd):
    shuffled = list(stances)
    rnd.shuffle(shuffled)
    a = aggregate([WorkerJudgment("d", f"w{i}", s) for i, s in enumerate(stances)])
    b = aggregate([WorkerJudgment("d", f"w{i}", s) for i, s in enumerate(shuffled)])
    assert a == b
    resolved = a["d"].stance is not Stance.UNRESOLVED
    assert resolved == (len(set(stances)) < 3)
    if resolved:
        assert a["d"].support >= 2


def test_fleiss_perfect_agreement():
    js = judgments("a", "pro", "pro", "pro") + judgments("b", "against", "against", "against")
    rep = fleiss_kappa(js)
    assert rep.kappa == 1.0
    assert rep.n_items == 2 and rep.n_raters_per_item == 3


def test_fleiss_hand_example():
    # P_i = (2*2 + 1 - 3) / 6 = 1/3 per item; p_pro = p_against = 1/2 -> Pe = 1/2
    js = judgments("1", "pro", "pro", "against") + judgments("2", "against", "against", "pro")
    rep = fleiss_kappa(js)
    assert rep.kappa == pytest.approx(-1 / 3, abs=1e-9)
    assert rep.category_proportions == {"pro": 0.5, "against": 0.5, "neutral": 0.0, "not_relevant": 0.0}


def test_fleiss_matches_brute_force_pairwise():
    # oracle: observed agreement as the fraction of agreeing ordered rater pairs
    rng = random.Random(3)
    js = []
    items = []
    for i in range(40):
        stances = [rng.choice(JUDGED_STANCES[:3]) for _ in range(3)]
        items.append(stances)
        js += [WorkerJudgment(str(i), f"w{k}", s) for k, s in enumerate(stances)]
    pairs = [sum(a == b for a, b in itertools.permutations(s, 2)) / 6 for s in items]
    p_bar = sum(pairs) / len(pairs)
    flat = [s for it in items for s in it]
    p_e = sum((flat.count(c) / len(flat)) ** 2 for c in JUDGED_STANCES)
    assert fleiss_kappa(js).kappa == pytest.approx((p_bar - p_e) / (1 - p_e), abs=1e-12)


def test_fleiss_excludes_items_with_other_rater_counts():
    js = judgments("a", "pro", "pro", "pro") + judgments("b", "pro", "against", "pro") + judgments("c", "pro", "neutral")
    rep = fleiss_kappa(js)
    assert rep.n_items == 2 and rep.n_excluded == 1


def test_fleiss_degenerate():
    with pytest.raises(ValueError, match="degenerate"):
        fleiss_kappa(judgments("a", "pro", "pro", "pro") + judgments("b", "pro", "pro", "pro"))
    with pytest.raises(ValueError, match="excluded"):
        fleiss_kappa(judgments("a", "pro"))


def test_fleiss_random_labels_near_zero():
    rng = random.Random(11)
    js = [
        WorkerJudgment(str(i), f"w{k}", rng.choice(JUDGED_STANCES)) for i in range(10_000) for k in range(3)
    ]
    assert abs(fleiss_kappa(js).kappa) < 0.05


def test_leaning_mapping():
    lib = topic(leaning="liberal")
    assert leaning_of(Stance.PRO, lib) is Leaning.LIBERAL
    assert leaning_of(Stance.AGAINST, lib) is Leaning.CONSERVATIVE
    for s in (Stance.NEUTRAL, Stance.NOT_RELEVANT, Stance.UNRESOLVED):
        assert leaning_of(s, lib) is None
    for lean in ("conservative", "liberal"):
        t = topic(leaning=lean)
        assert leaning_of(Stance.PRO, t) is leaning_of(Stance.AGAINST, t).opposite


@pytest.mark.parametrize(
    "stance, gain",
    [("pro", 1), ("against", 1), ("neutral", 1), ("not_relevant", 0), ("unresolved", 0)],
)
def test_relevance(stance, gain):
    assert relevance_of(AggregatedLabel("d", Stance(stance), 2, 3)) == gain


def test_relevance_missing_label():
    assert relevance_of(None) == 0


def test_load_judgments_errors(tmp_path):
    p = tmp_path / "j.jsonl"
    p.write_text(json.dumps({"doc_id": "d", "worker_id": "w", "stance": "maybe"}) + "\n")
    with pytest.raises(DatasetError, match="invalid stance"):
        load_judgments(p)
    p.write_text(json.dumps({"doc_id": "d", "worker_id": "w", "stance": "unresolved"}) + "\n")
    with pytest.raises(DatasetError, match="invalid stance"):
        load_judgments(p)
    row = json.dumps({"doc_id": "d", "worker_id": "w", "stance": "pro"}) + "\n"
    p.write_text(row + row)
    with pytest.raises(DatasetError, match="duplicate judgment"):
        load_judgments(p)
    p.write_text('{"doc_id": "d"}\n')
    with pytest.raises(DatasetError, match="j.jsonl:1: malformed"):
        load_judgments(p)
