#!/usr/bin/env python3
"""Pillow (libjpeg-turbo) must decode our streams to the very same pixels our
decoder produced."""

import sys
from pathlib import Path

import numpy as np
from PIL import Image


def main():
    fixture_dir = Path(sys.argv[1])
    failures = 0

    for jpg in sorted(fixture_dir.glob("grey_*.jpg")):
        ref = np.asarray(Image.open(jpg))
        mine = np.fromfile(jpg.with_suffix(".raw"), dtype=np.uint8).reshape(ref.shape)
        diff = int((ref != mine).sum())
        print(f"{jpg.name}: shape={ref.shape} pixel_diffs={diff}")
        failures += diff != 0

    for jpg in sorted(fixture_dir.glob("colour_*.jpg")):
        ref = np.asarray(Image.open(jpg).convert("RGB"))
        mine = np.fromfile(jpg.with_suffix(".raw"), dtype=np.uint8).reshape(ref.shape)
        diff = int((ref != mine).sum())
        print(f"{jpg.name}: shape={ref.shape} pixel_diffs={diff}")
        failures += diff != 0

    if failures:
        print(f"FAIL: {failures} fixtures differ from Pillow")
        return 1
    print("OK: Pillow decode matches this decoder on every fixture")
    return 0


if __name__ == "__main__":
    sys.exit(main())
