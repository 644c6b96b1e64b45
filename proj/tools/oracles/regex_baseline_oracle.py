"""Expected keyword-baseline answers, computed with Python `re` and the
published analysis script copied unchanged (minus the PDF reader)."""
import json
import re
import sys


def analyze_text(text):
    results = {
        "comparison": {"yes_no": "No", "elaboration": ""},
        "hyperparameter_optimization": {"yes_no": "No", "elaboration": ""},
        "data_frequency": {"yes_no": "No", "elaboration": ""},
        "loss_function": {"yes_no": "No", "elaboration": ""},
        "best_model": {"yes_no": "No", "elaboration": ""}
    }
    if re.search(r'comparison|compare|benchmark|evaluate|versus|comparison study|side-by-side|comparative analysis', text, re.IGNORECASE):
        results["comparison"]["yes_no"] = "Yes"
        results["comparison"]["elaboration"] = extract_comparison_details(text)
    if re.search(r'hyperparameter|tuning|optimization|grid search|random search|bayesian optimization|hyperparameter tuning|parameter search|hyper-optimization', text, re.IGNORECASE):
        results["hyperparameter_optimization"]["yes_no"] = "Yes"
        results["hyperparameter_optimization"]["elaboration"] = extract_hyperparameter_details(text)
    frequency_match = re.search(r'daily|weekly|monthly|minute-level|hourly|annually|yearly|bi-weekly|quarterly', text, re.IGNORECASE)
    if frequency_match:
        results["data_frequency"]["yes_no"] = "Yes"
        results["data_frequency"]["elaboration"] = frequency_match.group(0)
    loss_function_match = re.search(r'mean squared error|mse|mean absolute error|mae|cross-entropy|log loss|hinge loss|squared loss|absolute error|mean bias', text, re.IGNORECASE)
    if loss_function_match:
        results["loss_function"]["yes_no"] = "Yes"
        results["loss_function"]["elaboration"] = loss_function_match.group(0)
    best_model_match = re.search(r'best model|optimal model|most accurate|highest performing|top model|leading model|best-performing', text, re.IGNORECASE)
    if best_model_match:
        results["best_model"]["yes_no"] = "Yes"
        results["best_model"]["elaboration"] = extract_best_model(text)
    return results


def extract_comparison_details(text):
    comparison_sentences = re.findall(r'comparison|compare|benchmark|evaluate|versus|comparison study|side-by-side|comparative analysis.*?\.', text, re.IGNORECASE)
    return " ".join(comparison_sentences)


def extract_hyperparameter_details(text):
    hyperparameter_sentences = re.findall(r'hyperparameter|tuning|optimization|grid search|random search|bayesian optimization|hyperparameter tuning|parameter search|hyper-optimization.*?\.', text, re.IGNORECASE)
    return " ".join(hyperparameter_sentences)


def extract_best_model(text):
    best_model_sentences = re.findall(r'best model|optimal model|most accurate|highest performing|top model|leading model|best-performing.*?\.', text, re.IGNORECASE)
    return " ".join(best_model_sentences)


def main(src, dst):
    with open(src) as f, open(dst, "w") as out:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            res = analyze_text(rec["text"])
            expected = {k: {"verdict": v["yes_no"].lower(), "elaboration": v["elaboration"]} for k, v in res.items()}
            out.write(json.dumps({"id": rec["id"], "expected": expected}, sort_keys=True) + "\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
