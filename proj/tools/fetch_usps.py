#!/usr/bin/env python3
"""Download the USPS handwritten digits and convert them to an idx_pair corpus.

Fetches the libsvm-format distribution (7291 train / 2007 test samples of
16x16 grayscale digits), rescales intensities to 0..255, and writes
train/test IDX file pairs plus a manifest.json into the output directory.
Needs network access.

Usage: fetch_usps.py OUTPUT_DIR
"""
import bz2
import json
import struct
import sys
import urllib.request
from pathlib import Path

URLS = {
    "train": "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/usps.bz2",
    "test": "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass/usps.t.bz2",
}
SIDE = 16


def parse_libsvm(text: str):
    images, labels = [], []
    for line in text.strip().splitlines():
        fields = line.split()
        # labels are 1..10 with 10 meaning digit 0 in this distribution
        label = int(float(fields[0])) % 10
        pixels = [0.0] * (SIDE * SIDE)
        for item in fields[1:]:
            index, value = item.split(":")
            pixels[int(index) - 1] = float(value)
        # values arrive in [-1, 1]
        images.append(bytes(int(round((v + 1.0) * 127.5)) for v in pixels))
        labels.append(label)
    return images, labels


def write_idx(images, labels, images_path: Path, labels_path: Path) -> None:
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), SIDE, SIDE))
        for img in images:
            f.write(img)
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))


def main() -> int:
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    out_dir = Path(sys.argv[1])
    out_dir.mkdir(parents=True, exist_ok=True)

    counts = {}
    for split, url in URLS.items():
        print(f"fetching {url} ...")
        raw = bz2.decompress(urllib.request.urlopen(url).read()).decode("ascii")
        images, labels = parse_libsvm(raw)
        write_idx(images, labels, out_dir / f"{split}-images.idx",
                  out_dir / f"{split}-labels.idx")
        counts[split] = len(labels)

    manifest = {
        "layout": "idx_pair",
        "images": "train-images.idx",
        "labels": "train-labels.idx",
        "test_images": "test-images.idx",
        "test_labels": "test-labels.idx",
        "classes": [str(d) for d in range(10)],
        "preprocess": "resize_binarize",
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {counts} samples to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
