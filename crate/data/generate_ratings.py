"""Writes sample_ratings.csv: synthetic contest ratings with a fixed seed.

Each coder has a latent skill near the top of the scale and a consistency
level; each submission is rated around the skill with occasional failures.
Ratings are clipped to [0, 100] and rounded to one decimal.
"""

import csv
import random
from pathlib import Path

SEED = 20240611
CODERS = 320
TASKS = 120


def main() -> None:
    rng = random.Random(SEED)
    rows = []
    for c in range(CODERS):
        skill = min(99.0, rng.gauss(89.8, 5.0))
        spread = rng.uniform(1.5, 8.0)
        fail = rng.uniform(0.0, 0.08)
        # about half the coders submit ten or more solutions
        count = 1 + int(rng.expovariate(1.0 / 11.0))
        for task in rng.sample(range(TASKS), min(count, TASKS)):
            if rng.random() < fail:
                rating = rng.uniform(20.0, 70.0)
            else:
                rating = rng.gauss(skill, spread)
            rating = round(min(100.0, max(0.0, rating)), 1)
            rows.append((f"c{c:03d}", f"t{task:03d}", rating))
    out = Path(__file__).with_name("sample_ratings.csv")
    with out.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["coder_id", "task_id", "rating"])
        w.writerows(rows)
    ratings = [r[2] for r in rows]
    per = {}
    for coder, _, _ in rows:
        per[coder] = per.get(coder, 0) + 1
    print(
        f"{len(rows)} rows, {len(per)} coders, "
        f"{sum(v >= 10 for v in per.values())} with >= 10 ratings, "
        f"mean {sum(ratings) / len(ratings):.2f}"
    )


if __name__ == "__main__":
    main()
