#!/usr/bin/env python3
"""Write a small MNIST subset in IDX format.

The 5000-image MNIST sample shipped inside the mlxtend wheel (500 images per
digit, drawn from the original MNIST training set) is split per digit into
400 training and 100 test images and written as the four standard IDX files.

Usage:
    make_mnist_subset.py OUT_DIR [--wheel PATH]

Without --wheel the script runs `pip download mlxtend` into a temp directory.
"""

import argparse
import gzip
import pathlib
import struct
import subprocess
import sys
import tempfile
import zipfile

CSV_MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"
TRAIN_PER_DIGIT = 400


def fetch_wheel(tmp: pathlib.Path) -> pathlib.Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", str(tmp), "mlxtend"],
        check=True,
    )
    wheels = sorted(tmp.glob("mlxtend-*.whl"))
    if not wheels:
        raise SystemExit("pip download did not produce an mlxtend wheel")
    return wheels[-1]


def read_rows(wheel: pathlib.Path):
    with zipfile.ZipFile(wheel) as zf:
        text = gzip.decompress(zf.read(CSV_MEMBER)).decode()
    rows = []
    for line in text.strip().splitlines():
        values = [int(float(v)) for v in line.split(",")]
        rows.append((values[:-1], values[-1]))
    return rows


def write_images(path: pathlib.Path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for pixels in images:
            f.write(bytes(pixels))


def write_labels(path: pathlib.Path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("out_dir")
    parser.add_argument("--wheel")
    args = parser.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        wheel = pathlib.Path(args.wheel) if args.wheel else fetch_wheel(pathlib.Path(tmp))
        rows = read_rows(wheel)

    seen = {}
    train, test = [], []
    for pixels, label in rows:
        k = seen.get(label, 0)
        seen[label] = k + 1
        (train if k < TRAIN_PER_DIGIT else test).append((pixels, label))

    write_images(out / "train-images-idx3-ubyte", [p for p, _ in train])
    write_labels(out / "train-labels-idx1-ubyte", [l for _, l in train])
    write_images(out / "t10k-images-idx3-ubyte", [p for p, _ in test])
    write_labels(out / "t10k-labels-idx1-ubyte", [l for _, l in test])
    print(f"wrote {len(train)} train / {len(test)} test images to {out}")


if __name__ == "__main__":
    main()
