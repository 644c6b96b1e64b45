"""Builds answer-record fixtures whose (HPO x comparison) cells equal the
published confusion-matrix counts. Cell order: (no HPO, no comparison),
(no HPO, comparison), (HPO, no comparison), (HPO, comparison)."""
import json
import random
import sys
from pathlib import Path

KEYS = ["comparison", "hyperparameter_optimization", "data_frequency", "loss_function", "best_model"]


def records(ids, cells, model, scope, seed, not_applicable_every=0):
    slots = []
    for (hpo, comp), n in zip([(0, 0), (0, 1), (1, 0), (1, 1)], cells):
        slots += [(hpo, comp)] * n
    assert len(slots) == len(ids), (len(slots), len(ids))
    random.Random(seed).shuffle(slots)
    out = []
    for i, (doc_id, (hpo, comp)) in enumerate(zip(ids, slots)):
        def verdict(flag):
            if flag:
                return "yes"
            if not_applicable_every and i % not_applicable_every == 0:
                return "not_applicable"
            return "no"
        answers = {k: {"verdict": "no", "value": "", "elaboration": ""} for k in KEYS}
        answers["comparison"] = {"verdict": verdict(comp), "value": "",
                                 "elaboration": "models are compared" if comp else ""}
        answers["hyperparameter_optimization"] = {"verdict": verdict(hpo), "value": "",
                                                  "elaboration": "hyperparameters are tuned" if hpo else ""}
        out.append({"doc_id": doc_id, "answers": answers, "model": model, "scope": scope, "timestamp": None,
                    "attention_check_passed": True, "task_summary": "Answer five questions about one paper.",
                    "violations": []})
    return out


def write(path, recs):
    with open(path, "w") as f:
        for r in recs:
            f.write(json.dumps(r, sort_keys=True) + "\n")


def main(out_dir):
    out = Path(out_dir)
    abstract_ids = [f"nnt-{i:03d}" for i in range(1, 177)]
    fulltext_ids = random.Random(7).sample(abstract_ids, 146)
    fulltext_ids.sort()
    write(out / "abstract_4o.jsonl", records(abstract_ids, [47, 98, 6, 25], "gpt-4o", "abstract", 1))
    write(out / "abstract_35.jsonl", records(abstract_ids, [64, 48, 35, 29], "gpt-3.5-turbo", "abstract", 2, 9))
    write(out / "fulltext_4o.jsonl", records(fulltext_ids, [6, 51, 5, 84], "gpt-4o", "fulltext", 3, 11))


if __name__ == "__main__":
    main(sys.argv[1])
