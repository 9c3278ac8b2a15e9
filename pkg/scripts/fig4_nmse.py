"""Aggregate NMSE of Log-FSK and DSB at equal average transmit power (K=2, N=256)."""

import argparse

from logfsk import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/nmse.csv")
    args = ap.parse_args()
    cfg = ex.ExperimentConfig(trials=args.trials, master_seed=args.seed, workers=args.workers)
    res = ex.run_nmse_comparison(cfg)
    ex.emit_csv(res, args.out)
    print(res.thresholds[0].describe())
    print(f"{'SNR_R':>6} {'Log-FSK':>10} {'DSB':>10}")
    for row in res.rows:
        print(f"{row[0]:6.1f} {row[1]:10.3g} {row[2]:10.3g}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
