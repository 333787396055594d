#!/usr/bin/env python3
"""Build a 10000-image MNIST subset in IDX format from the npm `mnist` package.

The package ships each digit class as JSON arrays of 784 grey levels in
[0, 1] rounded to three decimals. They are mapped back to u8 with
round(v * 255) and written, interleaved by class, to

    <out>/images-idx3-ubyte
    <out>/labels-idx1-ubyte
"""

import argparse
import json
import pathlib
import struct
import subprocess
import tarfile
import tempfile

PACKAGE = "mnist@1.1.0"
PIXELS = 28 * 28


def fetch_package(workdir: pathlib.Path) -> pathlib.Path:
    out = subprocess.run(
        ["npm", "pack", PACKAGE, "--silent"], cwd=workdir, check=True, capture_output=True, text=True
    )
    tarball = workdir / out.stdout.strip().splitlines()[-1]
    with tarfile.open(tarball) as tar:
        tar.extractall(workdir, filter="data")
    return workdir / "package" / "src" / "digits"


def load_digits(digits_dir: pathlib.Path) -> list[list[list[int]]]:
    classes = []
    for digit in range(10):
        flat = json.loads((digits_dir / f"{digit}.json").read_text())["data"]
        if len(flat) % PIXELS:
            raise SystemExit(f"{digit}.json: {len(flat)} values is not a multiple of {PIXELS}")
        images = [
            [min(255, max(0, round(v * 255))) for v in flat[i : i + PIXELS]] for i in range(0, len(flat), PIXELS)
        ]
        classes.append(images)
    return classes


def interleave(classes):
    """Round-robin over classes so any prefix is roughly class balanced."""
    cursors = [0] * len(classes)
    while True:
        emitted = False
        for label, images in enumerate(classes):
            if cursors[label] < len(images):
                yield images[cursors[label]], label
                cursors[label] += 1
                emitted = True
        if not emitted:
            return


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", type=pathlib.Path, default=pathlib.Path(__file__).resolve().parent.parent / "data" / "mnist")
    parser.add_argument("--digits-dir", type=pathlib.Path, help="use an already extracted package/src/digits")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        digits_dir = args.digits_dir or fetch_package(pathlib.Path(tmp))
        pairs = list(interleave(load_digits(digits_dir)))

    args.out.mkdir(parents=True, exist_ok=True)
    n = len(pairs)
    with open(args.out / "images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, n, 28, 28))
        for image, _ in pairs:
            f.write(bytes(image))
    with open(args.out / "labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(bytes(label for _, label in pairs))
    print(f"wrote {n} images to {args.out}")


if __name__ == "__main__":
    main()
