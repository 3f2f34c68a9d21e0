"""Write the 8x8 handwritten digits set (1797 x 64, labels last) as CSV.

Requires scikit-learn, which bundles the data; no network access is needed.

    python3 scripts/fetch_digits.py data/digits.csv
"""

import sys
from pathlib import Path

from sklearn.datasets import load_digits

from ddcl.datasets import LabeledDataset, save_csv


def main(path="data/digits.csv"):
    d = load_digits()
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(LabeledDataset(d.data, d.target, "digits"), out)
    print(f"wrote {out} ({d.data.shape[0]} rows, {d.data.shape[1]} features + label)")


if __name__ == "__main__":
    main(*sys.argv[1:2])
