"""f-war with f(a) = a + n: how the game length and total Q grow with n."""

import argparse

from simplexwar.core import RunConfig
from simplexwar.fwar import q_sum_expected, q_sum_leading, run_fwar


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-list", default="8,16,32,64")
    ap.add_argument("--m-list", default="2,4")
    ap.add_argument("--reps", type=int, default=10**4)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    print("n,m,mean_rounds,std_error,ratio_to_previous_n,q_sum,q_over_leading,q_over_expected")
    for m in (int(t) for t in args.m_list.split(",")):
        prev = None
        for n in (int(t) for t in args.n_list.split(",")):
            cfg = RunConfig("fwar", n, m, seed=args.seed, replications=args.reps, deal="claim",
                            threads=args.threads)
            s = run_fwar(cfg)
            q = s.extra["q_sum"]
            ratio = f"{s.mean_rounds / prev:.3f}" if prev else ""
            print(f"{n},{m},{s.mean_rounds:.2f},{s.std_error:.2f},{ratio},{q:.6g},"
                  f"{q / q_sum_leading(n, m):.4f},{q / q_sum_expected(n, m):.4f}")
            prev = s.mean_rounds


if __name__ == "__main__":
    main()
