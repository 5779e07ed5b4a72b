"""Build the bundled MNIST subset in IDX format.

Source: the 5000-image MNIST sample shipped inside the ``mlxtend`` wheel
(``mlxtend/data/data/mnist_5k.csv.gz``; 784 pixel columns then the label,
500 images per digit). The first 350 images of each digit become the
training split, the remaining 150 the test split.

    pip download mlxtend --no-deps -d /tmp/wheels
    python tools/make_mnist_subset.py /tmp/wheels/mlxtend-*.whl data/mnist
"""

import argparse
import gzip
import io
import zipfile
from pathlib import Path

import numpy as np

from qcnn.imaging import write_idx

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"
TRAIN_PER_DIGIT = 350


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("wheel", help="path to an mlxtend wheel (or the bare mnist_5k.csv.gz)")
    ap.add_argument("outdir")
    args = ap.parse_args()

    if args.wheel.endswith(".whl"):
        raw = zipfile.ZipFile(args.wheel).read(MEMBER)
    else:
        raw = Path(args.wheel).read_bytes()
    table = np.loadtxt(io.StringIO(gzip.decompress(raw).decode()), delimiter=",", dtype=np.int64)
    images = table[:, :784].reshape(-1, 28, 28).astype(np.uint8)
    labels = table[:, 784].astype(np.uint8)

    train_idx, test_idx = [], []
    for digit in range(10):
        idx = np.flatnonzero(labels == digit)
        train_idx.extend(idx[:TRAIN_PER_DIGIT])
        test_idx.extend(idx[TRAIN_PER_DIGIT:])
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name, idx in (("train", train_idx), ("t10k", test_idx)):
        idx = np.array(idx)
        write_idx(out / f"{name}-images-idx3-ubyte.gz", out / f"{name}-labels-idx1-ubyte.gz",
                  images[idx], labels[idx])
        print(f"{name}: {len(idx)} images")


if __name__ == "__main__":
    main()
