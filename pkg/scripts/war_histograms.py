"""Round-count histograms for standard War at several table sizes."""

import argparse
from pathlib import Path

from simplexwar.core import RunConfig
from simplexwar.experiment import histogram_csv
from simplexwar.standard_war import run_standard_war


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--players", default="2,3,4,13,26")
    ap.add_argument("--games", type=int, default=5 * 10**4)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--bin-width", type=int, default=50)
    ap.add_argument("--out", default="war_hist", help="directory for one CSV per player count")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print("m,games,mean,std_error,median,max,censored")
    for m in (int(t) for t in args.players.split(",")):
        cfg = RunConfig("standard_war", 52, m, seed=args.seed, replications=args.games, threads=args.threads)
        s = run_standard_war(cfg, bin_width=args.bin_width)
        (out / f"war_m{m}.csv").write_text(histogram_csv(s))
        print(f"{m},{s.replications},{s.mean_rounds:.1f},{s.std_error:.2f},{s.median_rounds},{s.max_rounds},{s.censored}")


if __name__ == "__main__":
    main()
