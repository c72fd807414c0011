#!/usr/bin/env python3
"""Export the benchmark datasets that ship with Python packages as geograph CSV files.

Writes <out>/<name>/features.csv (one sample per row) and <out>/<name>/labels.csv (0-based
integer class per row) for:

  digits        scikit-learn's bundled 8x8 handwritten digits (1797 x 64, 10 classes)
  segmentation  UCI image segmentation, as bundled by the keel-ds package (2310 x 19, 7 classes)

AMiner and Cell are not redistributed by any package; place their CSVs under <out>/aminer and
<out>/cell by hand (same file names) to enable the experiments that use them.
"""

import argparse
import sys
from pathlib import Path


def write(out_dir: Path, rows, labels) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "features.csv", "w") as f:
        for row in rows:
            f.write(",".join(repr(float(v)) for v in row) + "\n")
    with open(out_dir / "labels.csv", "w") as f:
        for label in labels:
            f.write(f"{int(label)}\n")
    print(f"wrote {out_dir} ({len(labels)} samples)")


def fetch_digits(root: Path) -> bool:
    try:
        from sklearn.datasets import load_digits
    except ImportError:
        print("digits: scikit-learn not installed", file=sys.stderr)
        return False
    d = load_digits()
    write(root / "digits", d.data, d.target)
    return True


def fetch_segmentation(root: Path) -> bool:
    try:
        import keel_ds
    except ImportError:
        print("segmentation: keel-ds not installed (pip install --no-deps keel-ds)", file=sys.stderr)
        return False
    raw = Path(keel_ds.__file__).parent / "data" / "balanced" / "raw" / "segment.dat"
    rows, labels = [], []
    for line in raw.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        fields = [x.strip() for x in line.split(",")]
        rows.append([float(x) for x in fields[:-1]])
        labels.append(int(fields[-1]) - 1)
    write(root / "segmentation", rows, labels)
    return True


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    args = parser.parse_args()
    ok = fetch_digits(args.out)
    ok = fetch_segmentation(args.out) and ok
    for name in ("aminer", "cell"):
        if not (args.out / name / "features.csv").exists():
            print(f"{name}: not available; place features.csv and labels.csv in {args.out / name}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
