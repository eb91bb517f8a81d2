"""Generate the synthetic golden dataset in this directory.

2 engines x 2 locations x 12 topics. UK SERPs rank conservative documents above
liberal ones in every query; US SERPs come in mirrored topic pairs (t01/t02,
t03/t04, ...) whose conservative and liberal slots are swapped, so every US bias
score has an exact negative partner and the US mean bias is exactly zero.

Slot codes: C conservative, L liberal, N neutral, X not relevant, U three-way
worker split (aggregates to unresolved).

Run ``python data/golden/generate.py`` to rewrite the files; the test suite
checks the shipped files match this script byte for byte.
"""

import json
import sys
from pathlib import Path

TOPICS = [f"t{i:02d}" for i in range(1, 13)]
ENGINES = ("engine1", "engine2")
LOCATIONS = ("UK", "US")
WORKERS = 6


def pro_leaning(topic_index: int) -> str:
    return "conservative" if topic_index % 2 == 0 else "liberal"


def _pad(slots):
    assert len(slots) <= 10
    return slots + ["X"] * (10 - len(slots))


def _uk(engine: str, i: int) -> list[str]:
    if engine == "engine1":
        c, l = 3 + i % 3, 1 + i % 2
        return _pad(["C"] * c + ["N"] + ["L"] * l + ["U"])
    c, l = 4 + i % 2, 1 + (i % 3 == 0)
    return _pad(["C", "N"] + ["C"] * (c - 1) + ["L"] * l + ["N", "U"])


def _mirror(slots):
    swap = {"C": "L", "L": "C"}
    return [swap.get(s, s) for s in slots]


def _us(engine: str, i: int) -> list[str]:
    j = i // 2
    if engine == "engine1":
        base = ["C"] * (1 + j % 3) + ["N", "N"] + ["L"] * (2 + j % 2) + ["N", "N", "N"]
    else:
        base = ["L", "C", "C"] + ["N"] * (1 + j % 2) + ["C"] * (j % 3) + ["L", "N"]
    base = _pad(base[:9] + ["N"])
    return base if i % 2 == 0 else _mirror(base)


def layout() -> dict[tuple[str, str, str], list[str]]:
    """Slot codes per (engine, location, topic_id), rank 1 first."""
    out = {}
    for engine in ENGINES:
        for loc in LOCATIONS:
            for i, topic in enumerate(TOPICS):
                out[(engine, loc, topic)] = _uk(engine, i) if loc == "UK" else _us(engine, i)
    return out


def stance_for(code: str, leaning: str) -> str:
    if code == "C":
        return "pro" if leaning == "conservative" else "against"
    if code == "L":
        return "pro" if leaning == "liberal" else "against"
    return {"N": "neutral", "X": "not_relevant"}[code]


def _votes(code: str, leaning: str, doc_no: int) -> list[str]:
    if code == "U":
        return ["pro", "against", "neutral"]
    stance = stance_for(code, leaning)
    votes = [stance] * 3
    if doc_no % 3 == 0:
        # one dissenting worker; majority unchanged
        votes[doc_no % 2] = "neutral" if stance != "neutral" else "not_relevant"
    return votes


def doc_id(engine: str, loc: str, topic: str, rank: int) -> str:
    return f"{loc.lower()}-{engine}-{topic}-r{rank:02d}"


def build() -> dict[str, str]:
    files: dict[str, list[str]] = {"topics.jsonl": [], "serps.jsonl": []}
    for i, topic in enumerate(TOPICS):
        files["topics.jsonl"].append(
            json.dumps(
                {
                    "topic_id": topic,
                    "title": f"Synthetic topic {i + 1}",
                    "query": f"Should synthetic policy {i + 1} be adopted?",
                    "pro_leaning": pro_leaning(i),
                }
            )
        )
    judgments = {loc: [] for loc in LOCATIONS}
    doc_no = 0
    for (engine, loc, topic), slots in layout().items():
        leaning = pro_leaning(TOPICS.index(topic))
        for rank, code in enumerate(slots, start=1):
            did = doc_id(engine, loc, topic, rank)
            files["serps.jsonl"].append(
                json.dumps(
                    {
                        "engine": engine,
                        "location": loc,
                        "topic_id": topic,
                        "rank": rank,
                        "doc_id": did,
                        "url": f"https://news.example.org/{loc.lower()}/{topic}/{engine}/{rank}",
                    }
                )
            )
            for w, stance in enumerate(_votes(code, leaning, doc_no)):
                worker = f"{loc.lower()}-w{(doc_no + w) % WORKERS + 1:02d}"
                judgments[loc].append(json.dumps({"doc_id": did, "worker_id": worker, "stance": stance}))
            doc_no += 1
    for loc in LOCATIONS:
        files[f"judgments_{loc.lower()}.jsonl"] = judgments[loc]
    out = {name: "\n".join(lines) + "\n" for name, lines in files.items()}
    out["provenance.json"] = json.dumps(
        {"channel": "news", "crawl_date": "synthetic", "generator": "data/golden/generate.py"}, indent=2
    ) + "\n"
    return out


def main(target: Path) -> None:
    for name, body in build().items():
        (target / name).write_text(body, encoding="utf-8")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent)
