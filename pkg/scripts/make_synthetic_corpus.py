"""Generate a synthetic dated corpus for pipeline experiments.

Writes a JSON Lines corpus plus a keyword file.  Records carry authors,
material entities, and tokens; a configurable fraction mentions the property
keyword, with earlier years mentioning it less often so late "discoveries"
exist for the evaluation protocol.
"""

import argparse
import json
from pathlib import Path

import numpy as np


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--records", type=int, default=300)
    ap.add_argument("--authors", type=int, default=40)
    ap.add_argument("--materials", type=int, default=60)
    ap.add_argument("--year-min", type=int, default=1990)
    ap.add_argument("--year-max", type=int, default=2010)
    ap.add_argument("--property-rate", type=float, default=0.25)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="demo_data")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    authors = [f"A{i:03d}" for i in range(args.authors)]
    materials = [f"M{i:03d}" for i in range(args.materials)]
    span = args.year_max - args.year_min

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    corpus_path = outdir / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for i in range(args.records):
            year = args.year_min + int(rng.integers(span + 1))
            recency = (year - args.year_min) / max(span, 1)
            rec_authors = sorted(
                rng.choice(authors, size=int(rng.integers(1, 4)), replace=False)
            )
            rec_materials = sorted(
                rng.choice(materials, size=int(rng.integers(1, 4)), replace=False)
            )
            tokens = list(rec_materials)
            if rng.random() < args.property_rate * (0.5 + recency):
                tokens.append("thermoelectric")
            fh.write(json.dumps({
                "id": f"p{i:04d}",
                "year": year,
                "authors": [str(a) for a in rec_authors],
                "entities": [str(m) for m in rec_materials],
                "tokens": tokens,
            }))
            fh.write("\n")

    kw_path = outdir / "keywords.txt"
    kw_path.write_text("thermoelectric\nseebeck\n", encoding="utf-8")
    print(f"wrote {corpus_path} ({args.records} records) and {kw_path}")


if __name__ == "__main__":
    main()
