#!/usr/bin/env python3
"""Writes a real handwritten-digit corpus as MNIST-format IDX files.

Uses the scikit-learn digits corpus (NIST-derived 8x8 grayscale scans),
bilinearly upsampled to 28x28, plus deterministic rotated/shifted variants of
every scan so that a handful of training examples per class does not cover
the intra-class variability. Output is deterministic.
"""
import struct
import sys
from pathlib import Path

import numpy as np
from PIL import Image
from sklearn.datasets import load_digits

VARIANTS_PER_IMAGE = 9
INFO_SIZE = 6  # bases are low-passed to INFO_SIZE x INFO_SIZE before upsampling
MAX_ROTATION_DEG = 4.0
MAX_SHIFT_PX = 1
NOISE_SIGMA = 45.0


def main(out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    d = load_digits()
    rng = np.random.default_rng(20260811)

    images = []
    labels = []
    for img, label in zip(d.images, d.target):
        scaled = (img * (255.0 / 16.0)).clip(0, 255).astype(np.uint8)
        small = Image.fromarray(scaled).resize((INFO_SIZE, INFO_SIZE), Image.BILINEAR)
        base = small.resize((28, 28), Image.BILINEAR)
        for v in range(1 + VARIANTS_PER_IMAGE):
            if v == 0:
                geo = base
            else:
                angle = rng.uniform(-MAX_ROTATION_DEG, MAX_ROTATION_DEG)
                dx = rng.uniform(-MAX_SHIFT_PX, MAX_SHIFT_PX)
                dy = rng.uniform(-MAX_SHIFT_PX, MAX_SHIFT_PX)
                geo = base.rotate(angle, resample=Image.BILINEAR, translate=(dx, dy),
                                  fillcolor=0)
            # Independent pixel noise per variant: easy class structure stays,
            # but memorizing one variant does not explain another.
            noisy = np.asarray(geo, dtype=np.float64) + rng.normal(0.0, NOISE_SIGMA, (28, 28))
            images.append(noisy.clip(0, 255).astype(np.uint8))
            labels.append(label)

    images = np.stack(images)
    labels = np.asarray(labels, dtype=np.uint8)

    with open(out / "digits-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        f.write(images.tobytes())
    with open(out / "digits-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.tobytes())
    print(f"wrote {len(images)} examples to {out}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data")
