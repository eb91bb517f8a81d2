import json

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from serpaudit.corpus import DatasetError, Engine, Location, load_dataset, matched_topics

from conftest import GOLDEN, write_dataset

E1UK = (Engine.ENGINE1, Location.UK)
E2UK = (Engine.ENGINE2, Location.UK)
E1US = (Engine.ENGINE1, Location.US)


def topic_rows(*tids):
    return [{"topic_id": t, "title": t, "query": f"{t}?", "pro_leaning": "liberal"} for t in tids]


def serp_rows(engine, location, tid, ranks):
    return [
        {"engine": engine, "location": location, "topic_id": tid, "rank": r, "doc_id": f"{engine}{location}{tid}d{i}", "url": "u"}
        for i, r in enumerate(ranks)
    ]


def full_grid(tids, n=10):
    rows = []
    for e in ("engine1", "engine2"):
        for loc in ("UK", "US"):
            for t in tids:
                rows += serp_rows(e, loc, t, range(1, n + 1))
    return rows


def test_load_counts(tmp_path):
    d = load_dataset(write_dataset(tmp_path / "d", topic_rows("a", "b"), full_grid(["a", "b"])))
    assert len(d.serps) == 8
    assert d.summary() == "8 SERPs, 2 topics"
    assert all(len(s.results) == 10 for s in d.serps)


def test_duplicate_rank(tmp_path):
    rows = serp_rows("engine1", "UK", "a", [1, 2, 2, 3])
    root = write_dataset(tmp_path / "d", topic_rows("a"), rows)
    with pytest.raises(DatasetError, match="duplicate rank 2 in SERP engine1/UK/a"):
        load_dataset(root)


def test_rank_out_of_range(tmp_path):
    rows = serp_rows("engine1", "UK", "a", [1, 2, 11])
    with pytest.raises(DatasetError, match="rank out of range"):
        load_dataset(write_dataset(tmp_path / "d", topic_rows("a"), rows))


def test_rank_gap(tmp_path):
    rows = serp_rows("engine1", "UK", "a", [1, 2, 4])
    with pytest.raises(DatasetError, match="rank gap"):
        load_dataset(write_dataset(tmp_path / "d", topic_rows("a"), rows))


def test_dangling_topic(tmp_path):
    rows = serp_rows("engine1", "UK", "zzz", [1])
    with pytest.raises(DatasetError, match="dangling topic_id zzz"):
        load_dataset(write_dataset(tmp_path / "d", topic_rows("a"), rows))


def test_duplicate_doc_in_serp(tmp_path):
    rows = serp_rows("engine1", "UK", "a", [1, 2])
    rows[1]["doc_id"] = rows[0]["doc_id"]
    with pytest.raises(DatasetError, match="duplicate doc_id"):
        load_dataset(write_dataset(tmp_path / "d", topic_rows("a"), rows))


def test_malformed_line_reports_line_number(tmp_path):
    root = write_dataset(tmp_path / "d", topic_rows("a"), serp_rows("engine1", "UK", "a", [1, 2]))
    with open(root / "serps.jsonl", "a") as fh:
        fh.write("{not json\n")
    with pytest.raises(DatasetError, match=r"serps.jsonl:3: malformed record"):
        load_dataset(root)


@pytest.mark.parametrize(
    "field, value",
    [("engine", "engine3"), ("location", "FR"), ("rank", "1"), ("doc_id", None)],
)
def test_bad_field_values(tmp_path, field, value):
    rows = serp_rows("engine1", "UK", "a", [1])
    if value is None:
        del rows[0][field]
    else:
        rows[0][field] = value
    with pytest.raises(DatasetError, match="serps.jsonl:1: malformed record"):
        load_dataset(write_dataset(tmp_path / "d", topic_rows("a"), rows))


def test_duplicate_topic_and_bad_leaning(tmp_path):
    with pytest.raises(DatasetError, match="duplicate topic_id a"):
        load_dataset(write_dataset(tmp_path / "d1", topic_rows("a", "a"), []))
    bad = topic_rows("a")
    bad[0]["pro_leaning"] = "centrist"
    with pytest.raises(DatasetError, match="malformed"):
        load_dataset(write_dataset(tmp_path / "d2", bad, []))


def test_short_serps_accepted_and_reported(tmp_path):
    rows = serp_rows("engine1", "UK", "a", range(1, 6)) + serp_rows("engine1", "UK", "b", range(1, 11))
    d = load_dataset(write_dataset(tmp_path / "d", topic_rows("a", "b"), rows))
    assert d.completeness() == {"(engine1,UK)": {"serps": 2, "short_serps": 1}}


def test_load_is_deterministic():
    assert load_dataset(GOLDEN) == load_dataset(GOLDEN)


def test_matched_topics(tmp_path):
    rows = []
    for t in ("t1", "t2", "t3"):
        rows += serp_rows("engine1", "UK", t, [1])
    for t in ("t3", "t2", "t1", "t4"):
        rows += serp_rows("engine2", "UK", t, [1])
    rows += serp_rows("engine1", "US", "t4", [1])
    d = load_dataset(write_dataset(tmp_path / "d", topic_rows("t1", "t2", "t3", "t4"), rows))
    assert matched_topics(d, E1UK, E2UK) == ["t1", "t2", "t3"]
    assert matched_topics(d, E2UK, E1UK) == ["t1", "t2", "t3"]
    assert matched_topics(d, E1UK, E1UK) == ["t1", "t2", "t3"]
    with pytest.raises(DatasetError, match="no matched topics"):
        matched_topics(d, E1UK, E1US)
    with pytest.raises(DatasetError, match="not in dataset"):
        matched_topics(d, E1UK, (Engine.ENGINE2, Location.US))


MUTATIONS = ["dup_rank", "out_of_range", "gap", "dup_key", "dangling"]


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(mutation=st.sampled_from(MUTATIONS), which=st.integers(0, 10_000))
def test_single_mutation_always_rejected(tmp_path_factory, mutation, which):
    rows = full_grid(["a", "b"], n=4)
    i = which % len(rows)
    row = rows[i]
    if mutation == "dup_rank":
        row["rank"] = 1 if row["rank"] != 1 else 2
    elif mutation == "out_of_range":
        row["rank"] = 11 + which % 5
    elif mutation == "gap":
        same = [r for r in rows if (r["engine"], r["location"], r["topic_id"]) == (row["engine"], row["location"], row["topic_id"])]
        rows.remove(next(r for r in same if r["rank"] == 1 + which % 3))
    elif mutation == "dup_key":
        # a second copy of a whole SERP under the same key
        rows += [dict(r, doc_id=r["doc_id"] + "x") for r in rows if r["topic_id"] == row["topic_id"] and r["engine"] == row["engine"] and r["location"] == row["location"]]
    elif mutation == "dangling":
        row["topic_id"] = "nope"
    root = write_dataset(tmp_path_factory.mktemp("mut"), topic_rows("a", "b"), rows)
    with pytest.raises(DatasetError):
        load_dataset(root)


def test_golden_file_matches_generator(tmp_path):
    from conftest import load_generator

    gen = load_generator()
    for name, body in gen.build().items():
        assert (GOLDEN / name).read_text(encoding="utf-8") == body, name


def test_provenance_loaded():
    d = load_dataset(GOLDEN)
    assert d.provenance["channel"] == "news"
    assert json.loads((GOLDEN / "provenance.json").read_text())["crawl_date"] == "synthetic"
