"""Drive the full CLI pipeline end to end on a corpus.

Stages: graph -> transition -> walk -> embed -> spd -> sd -> fuse -> predict
-> evaluate -> sweep-beta -> gnn-train, all into one output directory.
Defaults are desk-scale so the whole run finishes in well under a minute.
"""

import argparse
import sys
from pathlib import Path

from hyperdiscovery.cli import dispatch


def run(argv: list[str]) -> None:
    printable = " ".join(argv)
    print(f"$ hyperdiscovery {printable}")
    code = dispatch(argv)
    if code != 0:
        sys.exit(f"stage failed with exit code {code}: {printable}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--corpus", default="demo_data/corpus.jsonl")
    ap.add_argument("--keywords", default="demo_data/keywords.txt")
    ap.add_argument("--t", type=int, default=2003)
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--method", default="vdw_z")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--min-mentions", type=int, default=1)
    ap.add_argument("--outdir", default="demo_out")
    args = ap.parse_args()

    out = Path(args.outdir)
    base = ["--corpus", args.corpus, "--keywords", args.keywords,
            "--outdir", str(out), "--seed", str(args.seed)]
    graph = str(out / "hypergraph.json")

    run(["ingest", *base])
    run(["graph", *base, "--t", str(args.t), "--canonical-ids"])
    run(["transition", "--graph", graph, "--outdir", str(out),
         "--seed", str(args.seed), "--steps", "2"])
    run(["walk", "--graph", graph, "--outdir", str(out), "--seed", str(args.seed),
         "--walk-length", "20", "--walks-per-start", "10"])
    run(["embed", "--walks", str(out / "walks.txt"), "--graph", graph,
         "--outdir", str(out), "--seed", str(args.seed),
         "--sg-dim", "32", "--sg-epochs", "5", "--property-token", "<PROPERTY>"])
    run(["spd", "--graph", graph, "--outdir", str(out), "--seed", str(args.seed)])
    run(["sd", *base, "--t", str(args.t), "--min-mentions",
         str(args.min_mentions)])
    run(["fuse", "--s1", str(out / "spd_scores.csv"),
         "--s2", str(out / "plausibility.csv"), "--outdir", str(out),
         "--beta", str(args.beta), "--method", args.method,
         "--seed", str(args.seed)])
    run(["predict", *base, "--t", str(args.t), "--k", str(args.k),
         "--method", args.method, "--beta", str(args.beta),
         "--s1", str(out / "spd_scores.csv"),
         "--s2", str(out / "plausibility.csv"),
         "--min-mentions", str(args.min_mentions)])
    run(["evaluate", *base, "--report", str(out / "prediction.json")])
    run(["sweep-beta", "--s1", str(out / "spd_scores.csv"),
         "--s2", str(out / "plausibility.csv"), "--outdir", str(out),
         "--k", str(args.k), "--methods", "vdw_z", "--seed", str(args.seed)])
    run(["gnn-train", "--graph", graph, "--outdir", str(out),
         "--gnn-dims", "32,32,16", "--gnn-sample-sizes", "5,5",
         "--gnn-batch-size", "128", "--gnn-negatives", "5",
         "--gnn-lr", "0.01", "--gnn-steps", "200", "--seed", str(args.seed)])

    print(f"\nartifacts in {out}/:")
    for path in sorted(out.iterdir()):
        print(f"  {path.name}")


if __name__ == "__main__":
    main()
