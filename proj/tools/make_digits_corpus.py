#!/usr/bin/env python3
"""Export the scikit-learn handwritten digits corpus as a csv_flat corpus.

Writes digits.csv plus two manifests (HOG features and raw-pixel features)
into the output directory. Every fifth sample is tagged as the test split.

Usage: make_digits_corpus.py OUTPUT_DIR
"""
import json
import sys
from pathlib import Path


def main() -> int:
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    out_dir = Path(sys.argv[1])
    out_dir.mkdir(parents=True, exist_ok=True)

    from sklearn.datasets import load_digits

    digits = load_digits()
    rows = []
    header = ["label", "split"] + [f"p{i}" for i in range(64)]
    rows.append(",".join(header))
    for idx, (image, label) in enumerate(zip(digits.images, digits.target)):
        split = "test" if idx % 5 == 0 else "train"
        pixels = [str(int(round(min(v * 255.0 / 16.0, 255.0)))) for v in image.flatten()]
        rows.append(",".join([str(int(label)), split] + pixels))
    (out_dir / "digits.csv").write_text("\n".join(rows) + "\n")

    base = {
        "layout": "csv_flat",
        "file": "digits.csv",
        "classes": [str(d) for d in range(10)],
        "preprocess": "full",
    }
    (out_dir / "manifest_hog.json").write_text(
        json.dumps({**base, "features": "hog"}, indent=2) + "\n"
    )
    (out_dir / "manifest_raw.json").write_text(
        json.dumps({**base, "features": "raw_pixels"}, indent=2) + "\n"
    )
    print(f"wrote {len(digits.target)} samples to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
