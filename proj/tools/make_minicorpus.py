"""Generates the bundled 200-document mini-corpus and its expected keyword
frequency table.

Keywords are planted from an explicit plan, so the expected table is a count
over the plan. The script then re-counts every pattern with Python `re` over
the written text and refuses to write anything if the two disagree.

    python3 tools/make_minicorpus.py data
"""
import csv
import json
import random
import re
import sys
from pathlib import Path

SEED = 20240601

PATTERNS = [
    ("Algo(rithmic)* trading", "Algo(rithmic)* trading",
     ["algorithmic trading", "Algorithmic Trading", "algo trading"]),
    ("Investment strateg.", "Investment strateg.", ["investment strategy", "investment strategies"]),
    ("Vola(tility)* trading", "Vola(tility)* trading", ["volatility trading", "vola trading"]),
    ("High.frequency trading", "High.frequency trading", ["high-frequency trading", "high frequency trading"]),
    ("Investment system.", "Investment system.", ["investment systems", "investment system design"]),
    ("Benchmark strateg.", "Benchmark strateg.", ["benchmark strategy", "benchmark strategies"]),
    ("Pair.trading", "Pair.trading", ["pair trading", "pair-trading"]),
    ("Momentum (trading | strateg.)", "Momentum (trading|strateg.)", ["momentum trading", "momentum strategies"]),
    ("Contrarian (trading | strateg.)", "Contrarian (trading|strateg.)", ["contrarian trading", "contrarian strategy"]),
]

THEMES = {
    "neural": {
        "titles": ["Deep neural networks for price forecasting", "Recurrent networks and limit order books",
                   "Learning representations of market states", "Convolutional features for stock prediction"],
        "sentences": [
            "A deep neural network is trained on limit order book features.",
            "The LSTM forecasts next day returns from daily price data.",
            "Hidden layers learn nonlinear representations of the input window.",
            "We train the network with dropout and early stopping.",
            "Backpropagation through time updates the recurrent weights.",
            "The convolutional layers extract local patterns from price charts.",
            "Out of sample accuracy of the classifier exceeds the naive forecast.",
            "Reinforcement learning agents choose positions to maximise reward.",
            "Stocks listed on the NYSE form the training sample.",
            "Minute data sampled at 5-minute intervals feed the network.",
        ],
    },
    "factor": {
        "titles": ["Cross-sectional return anomalies", "Winners, losers and reversal effects",
                   "Factor premia in equity markets", "Portfolio sorts on past performance"],
        "sentences": [
            "Portfolios are sorted on past twelve month returns.",
            "Winners continue to outperform losers over the holding period.",
            "The excess returns survive the Fama French three factor adjustment.",
            "Monthly returns of equity portfolios are regressed on factors.",
            "Transaction costs erode part of the reported premium.",
            "Ordinary least squares estimates of factor loadings are reported.",
            "The anomaly is stronger among small firms with low analyst coverage.",
            "Stocks in the S&P 500 form the investable universe.",
            "Reversal effects appear at the weekly horizon.",
            "Quarterly rebalancing keeps turnover low.",
        ],
    },
    "microstructure": {
        "titles": ["Liquidity provision in electronic markets", "Order flow toxicity and market making",
                   "Latency and price discovery", "Tick size and quote dynamics"],
        "sentences": [
            "Market makers post quotes on both sides of the book.",
            "Order flow imbalance predicts short term price changes.",
            "Tick data with millisecond timestamps are analysed.",
            "Latency arbitrage affects the profits of slow traders.",
            "The bid ask spread widens around news announcements.",
            "Quote cancellations dominate message traffic.",
            "The exchange changed its fee schedule during the sample.",
            "Korean futures on the KOSPI index are studied.",
            "Hourly liquidity patterns follow a U shape.",
            "Queue position determines execution probability.",
        ],
    },
    "options": {
        "titles": ["Implied variance and option returns", "Forecasting realised variance",
                   "Straddles, skew and risk premia", "Variance swaps and the volatility surface"],
        "sentences": [
            "The GARCH model forecasts conditional variance.",
            "Implied variance exceeds realised variance on average.",
            "Delta hedged option portfolios earn negative returns.",
            "The variance risk premium predicts index returns.",
            "Straddle positions are held until expiry.",
            "Skew of the implied surface steepens after crashes.",
            "Daily data on index options cover two decades.",
            "Commodity futures options on crude oil are included.",
            "An ARIMA benchmark is compared with the variance model.",
            "Nikkei options provide an out of sample test.",
        ],
    },
    "cointegration": {
        "titles": ["Cointegrated spreads in equity markets", "Statistical arbitrage with mean reversion",
                   "Spread dynamics and convergence", "Relative value in currency markets"],
        "sentences": [
            "Pairs of stocks with cointegrated prices are selected.",
            "The spread is modelled as an Ornstein Uhlenbeck process.",
            "Positions open when the spread deviates by two standard deviations.",
            "Convergence of the spread yields the profit.",
            "Currency pairs on the foreign exchange market are studied.",
            "A Kalman filter tracks the hedge ratio.",
            "Distance based selection is compared with cointegration tests.",
            "Bitcoin and other crypto assets show weaker mean reversion.",
            "Weekly rebalancing limits transaction costs.",
            "Chinese stocks listed in Shanghai form a second sample.",
        ],
    },
}

VENUES = ["Journal of Trading Studies", "Quantitative Finance Letters", "Computational Markets Review", None]


def count(regex, text):
    return len(re.findall(regex, text, re.I | re.S))


def main(out_dir):
    rng = random.Random(SEED)
    out = Path(out_dir)
    docs = []
    plan = {label: {"abstract": set(), "title": set()} for label, _, _ in PATTERNS}
    theme_names = list(THEMES)
    for i in range(200):
        doc_id = f"mc-{i + 1:03d}"
        theme = THEMES[theme_names[i % len(theme_names)]]
        title = rng.choice(theme["titles"])
        sentences = rng.sample(theme["sentences"], rng.randint(3, 5))
        planted = []
        if i % 8 != 7:
            for k in rng.sample(range(len(PATTERNS)), rng.choice([1, 1, 2])):
                planted.append((k, rng.choice(["title", "abstract", "abstract", "both"])))
        for k, where in planted:
            label, _, phrases = PATTERNS[k]
            phrase = rng.choice(phrases)
            if where in ("title", "both"):
                title += ": the case of " + phrase
                plan[label]["title"].add(doc_id)
            if where in ("abstract", "both"):
                sentences.insert(rng.randint(0, len(sentences)), f"We study {phrase} in this setting.")
                plan[label]["abstract"].add(doc_id)
        abstract = " ".join(sentences)
        if i % 25 == 3:
            # Abstract could not be fetched: keywords only count in the title.
            for label, _, _ in PATTERNS:
                plan[label]["abstract"].discard(doc_id)
            abstract = ""
        year = None if i % 33 == 5 else 1995 + (i * 7) % 25
        doc = {"id": doc_id, "title": title, "abstract": abstract, "body": None, "year": year,
               "venue": VENUES[i % len(VENUES)]}
        if i % 17 == 0:
            body = " ".join(rng.sample(theme["sentences"], 6))
            body += " We compare the proposed model with two benchmarks. Daily data are used."
            if i == 0:
                # A book-length body, over any sensible prompt budget.
                body = (body + " ") * 1500
            doc["body"] = body
        docs.append(doc)

    # Re-count with Python `re` and insist on agreement with the plan.
    rows = []
    for label, regex, _ in PATTERNS:
        a = {d["id"] for d in docs if count(regex, d["abstract"])}
        t = {d["id"] for d in docs if count(regex, d["title"])}
        if a != plan[label]["abstract"] or t != plan[label]["title"]:
            sys.exit(f"planted and re-counted hits disagree for {label}")
        rows.append((label, len(a), len(t), len(a | t)))

    with open(out / "minicorpus.jsonl", "w", encoding="utf-8") as f:
        for d in docs:
            f.write(json.dumps(d, ensure_ascii=False) + "\n")
    with open(out / "minicorpus_frequency.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["label", "abstract", "title", "both"])
        w.writerows(rows)
        w.writerow(["SUM", sum(r[1] for r in rows), sum(r[2] for r in rows), sum(r[3] for r in rows)])
    kept = sum(1 for d in docs if d["abstract"] and any(
        count(regex, d["title"]) or count(regex, d["abstract"]) for _, regex, _ in PATTERNS))
    print(f"{len(docs)} documents, {kept} kept by the filter")


if __name__ == "__main__":
    main(sys.argv[1])
