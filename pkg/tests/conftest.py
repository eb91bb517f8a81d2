import importlib.util
import json
from pathlib import Path

import pytest

from serpaudit.annotations import AggregatedLabel, Stance, aggregate, load_judgments
from serpaudit.audit import default_plan, run_audit
from serpaudit.corpus import Dataset, Engine, Leaning, Location, SerpRecord, SerpResult, Topic, load_dataset
from serpaudit.metrics import MetricConfig

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "data" / "golden"


def load_generator():
    spec = importlib.util.spec_from_file_location("golden_generate", GOLDEN / "generate.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def make_serp(engine="engine1", location="UK", topic_id="t1", n=10, prefix=None):
    prefix = prefix or f"{engine}-{location}-{topic_id}"
    results = tuple(SerpResult(r, f"{prefix}-{r}", f"https://x.org/{prefix}/{r}") for r in range(1, n + 1))
    return SerpRecord(Engine(engine), Location(location), topic_id, results)


def make_labels(serp: SerpRecord, stances):
    return {
        r.doc_id: AggregatedLabel(r.doc_id, Stance(s), 3, 3) for r, s in zip(serp.results, stances)
    }


def topic(tid="t1", leaning="conservative"):
    return Topic(tid, f"title {tid}", f"query {tid}?", Leaning(leaning))


def write_dataset(root: Path, topics, serp_rows):
    root.mkdir(parents=True, exist_ok=True)
    (root / "topics.jsonl").write_text("".join(json.dumps(t) + "\n" for t in topics), encoding="utf-8")
    (root / "serps.jsonl").write_text("".join(json.dumps(r) + "\n" for r in serp_rows), encoding="utf-8")
    return root


@pytest.fixture(scope="session")
def golden_dataset() -> Dataset:
    return load_dataset(GOLDEN)


@pytest.fixture(scope="session")
def golden_labels():
    return {
        Location.UK: aggregate(load_judgments(GOLDEN / "judgments_uk.jsonl")),
        Location.US: aggregate(load_judgments(GOLDEN / "judgments_us.jsonl")),
    }


@pytest.fixture(scope="session")
def golden_report(golden_dataset, golden_labels):
    return run_audit(golden_dataset, golden_labels, default_plan(golden_dataset, 0.05), MetricConfig())


# acceptance criteria report: one line per criterion at the end of the run
_criteria: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion this test checks")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    name = getattr(report, "criterion", None)
    if name is None:
        return
    prev = _criteria.get(name, "PASS")
    _criteria[name] = "FAIL" if (report.failed or prev == "FAIL") else "PASS"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        rep.criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _criteria.items():
        terminalreporter.write_line(f"{status}  {name}")
