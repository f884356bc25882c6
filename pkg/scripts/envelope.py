"""Matching envelope and Clopper-Pearson intervals used for strategy classification."""
import argparse
import time

from freqreg.classify import clopper_pearson, matching_envelope


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=100_000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 7])
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    for k in range(5, 11):
        iv = clopper_pearson(k, 10)
        print(f"{k}:{10 - k}  [{iv.lower:.4f}, {iv.upper:.4f}]")
    for seed in args.seeds:
        t = time.perf_counter()
        env = matching_envelope(runs=args.runs, seed=seed, workers=args.workers)
        print(f"seed {seed}: envelope [{env.lower:.4f}, {env.upper:.4f}] ({time.perf_counter() - t:.2f}s)")


if __name__ == "__main__":
    main()
