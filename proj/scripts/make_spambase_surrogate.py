#!/usr/bin/env python3
"""Writes a synthetic table with the UCI spambase layout.

57 comma-separated attributes followed by a 0/1 label, 4601 rows, about
39.4% positives. Word and character frequencies are sparse percentages,
capital-run statistics are positive. Labels come from a logistic model so
the classification problem has a finite optimum. Deterministic for a seed.
"""
import argparse

import numpy as np

ROWS = 4601
WORDS = 48
CHARS = 6


def generate(seed):
    rng = np.random.default_rng(seed)
    spam = rng.random(ROWS) < 0.394
    # Per-attribute probability of a nonzero entry and mean magnitude, shifted for spam.
    p_ham = rng.uniform(0.02, 0.35, WORDS + CHARS)
    p_spam = np.clip(p_ham * rng.uniform(0.4, 2.5, WORDS + CHARS), 0.01, 0.9)
    scale = rng.uniform(0.1, 1.5, WORDS + CHARS)
    p = np.where(spam[:, None], p_spam, p_ham)
    nonzero = rng.random((ROWS, WORDS + CHARS)) < p
    freq = np.round(nonzero * rng.exponential(scale, (ROWS, WORDS + CHARS)), 2)
    freq = np.minimum(freq, 100.0)

    avg = np.round(1.0 + rng.lognormal(np.where(spam, 1.2, 0.6), 0.7), 3)
    longest = np.maximum(1, np.round(avg * rng.lognormal(1.5, 0.6, ROWS))).astype(int)
    total = np.maximum(longest, np.round(longest * rng.lognormal(1.3, 0.8, ROWS))).astype(int)

    # Relabel a fraction through a logistic link on the first three words so the
    # classes overlap and the regularized deviance has a well-defined minimizer.
    w = np.array([0.9, 0.4, 0.7])
    logit = freq[:, :3] @ w - 0.55 + rng.normal(0.0, 1.0, ROWS)
    flip = rng.random(ROWS) < 0.15
    label = np.where(flip, logit > 0, spam).astype(int)
    return freq, avg, longest, total, label


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=20130515)
    ap.add_argument("--out", default="data/spambase_surrogate.data")
    args = ap.parse_args()
    freq, avg, longest, total, label = generate(args.seed)
    with open(args.out, "w") as f:
        for r in range(ROWS):
            cells = [f"{v:g}" for v in freq[r]]
            cells += [f"{avg[r]:g}", str(longest[r]), str(total[r]), str(label[r])]
            f.write(",".join(cells) + "\n")
    print(f"wrote {args.out}: {ROWS} rows, {label.mean():.3f} positive")


if __name__ == "__main__":
    main()
