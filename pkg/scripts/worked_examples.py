"""Print the entropy worked examples, the stimuli-set profile and the per-ratio entropies."""
import argparse
from pathlib import Path

from freqreg.infotheory import CooccurrenceTable, conditional_entropy, entropy_profile, ratio_entropy, shannon_entropy
from freqreg.trials import percent_regularized


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--table", default=Path(__file__).resolve().parents[1] / "data" / "table1.csv")
    args = ap.parse_args()

    h = shannon_entropy([0.3, 0.3, 0.2, 0.2])
    h2 = shannon_entropy([0.7, 0.1, 0.1, 0.1])
    print(f"single context: H={h:.3f} -> {h2:.3f}  ({percent_regularized(h2 - h, h):.1f}% regularized)")
    a = conditional_entropy(CooccurrenceTable.from_conditional([0.6, 0.4], [[0.3, 0.3, 0.2, 0.2]] * 2))
    b = conditional_entropy(CooccurrenceTable.from_conditional([0.6, 0.4], [[0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5]]))
    print(f"two contexts:   H(V|C)={a:.3f} -> {b:.3f}  ({percent_regularized(b - a, a):.1f}% regularized)")

    for k, v in entropy_profile(CooccurrenceTable.from_csv(args.table)).as_dict().items():
        print(f"{k:>7} = {v:.4f}")
    print("ratio entropies:", "  ".join(f"{x}:{10 - x}={ratio_entropy(x, 10):.3f}" for x in range(5, 11)))


if __name__ == "__main__":
    main()
