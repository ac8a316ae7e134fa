#!/usr/bin/env python3
"""Export the scikit-learn handwritten digits set to MNIST-style IDX files.

Writes data/digits/digits-images-idx3-ubyte and digits-labels-idx1-ubyte.
Run from the repository root. Requires scikit-learn.
"""
import os
import struct
import sys

import numpy as np
from sklearn.datasets import load_digits


def write_idx_images(path, images):
    n, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, rows, cols))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "data/digits"
    os.makedirs(out_dir, exist_ok=True)
    d = load_digits()
    # pixel values are 0..16; stored as raw uint8, flattened 8x8 images
    images = d.data.reshape(-1, 8, 8)
    write_idx_images(os.path.join(out_dir, "digits-images-idx3-ubyte"), images)
    write_idx_labels(os.path.join(out_dir, "digits-labels-idx1-ubyte"), d.target)
    print(f"wrote {len(images)} images to {out_dir}")


if __name__ == "__main__":
    main()
