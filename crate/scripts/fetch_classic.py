#!/usr/bin/env python3
"""Populate data/classic with 8-bit grayscale PNGs of the classic test images.

Every source archive is pinned by the SHA-256 of the archive and every
extracted image by the SHA-256 of its decoded 8-bit grayscale pixels.
Images without a public pinned source (listed in MISSING)
can be supplied with --from DIR; they are copied in as unpinned and the
script says so.

Needs Python 3 and Pillow.
"""

import argparse
import hashlib
import io
import sys
import tarfile
import urllib.request
import zipfile
from pathlib import Path

from PIL import Image

PYPI = "https://files.pythonhosted.org/packages/"
MIRRORS = [PYPI, "https://pypi.org/packages/"]

ARCHIVES = {
    "sporco": (
        PYPI + "40/55/0e34478be4cd365a85853f82e3d4f2b09da9d20b27c98649c1448e21d7c5/"
        "sporco-0.2.2.post1-py3-none-any.whl",
        "a5b600be67a062e8efc5e90484cd7043c72f04f84209f435ae711e4fd33f87f8",
    ),
    "bm3d": (
        PYPI + "5c/08/3a4db88ae8017a6b292b01a91ab554647f86a8c69e53e556a056a6202ae5/"
        "bm3d-3.0.9.tar.gz",
        "ca6e416f9ec491ca3c408ad796efd3115479177998d50b2c1a2f83fda75648ef",
    ),
    "spams": (
        PYPI + "e4/26/7a47021754e8020ac82c1ba8d0b719198ec28cdc922152caea16b7512864/"
        "spams-2.6.5.4.tar.gz",
        "4c15b01268b15d20dca1e29b04d08268775ad7aae5883891454de110b571c9a7",
    ),
}

# name -> (archive, member, (width, height), sha256 of the grayscale pixels)
IMAGES = {
    # colour original, converted with ITU-R 601 luma; not the 512x512 crop
    "barbara": (
        "sporco",
        "sporco/data/barbara.png",
        (702, 574),
        "49f2066600db808102a8f03f075445e9a7ff2c251d6522b050be5ebd0302b076",
    ),
    "boat": (
        "spams",
        "spams-2.6.5.4/data/boat.png",
        (512, 512),
        "b292548c463580074f3032fdecf2c1873114b797d0827a1e52e9ef37c99989f7",
    ),
    "cameraman": (
        "bm3d",
        "bm3d-3.0.9/examples/cameraman256.png",
        (256, 256),
        "9894a7154efd51682454b4015ee02a0a5b88514d6cbac465b8409081993ba10e",
    ),
    "lena": (
        "spams",
        "spams-2.6.5.4/data/lena.png",
        (512, 512),
        "eb6cd30ede15f638d0fccba36977d7c6a6ae3f31b8bd8f78dffdfcb47437acc7",
    ),
}

MISSING = ["fingerprint", "hill", "couple", "pentagon", "man"]


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def fetch(name: str, cache: Path) -> bytes:
    url, pin = ARCHIVES[name]
    path = cache / url.rsplit("/", 1)[1]
    if path.exists() and sha256(path.read_bytes()) == pin:
        return path.read_bytes()
    data = None
    for base in MIRRORS:
        src = url.replace(PYPI, base)
        print(f"downloading {src}", flush=True)
        try:
            with urllib.request.urlopen(src, timeout=120) as r:
                data = r.read()
            break
        except OSError as e:
            print(f"  failed: {e}", flush=True)
    if data is None or sha256(data) != pin:
        sys.exit(f"could not fetch {url} with the pinned checksum")
    path.write_bytes(data)
    return data


def member(archive: bytes, name: str) -> bytes:
    if zipfile.is_zipfile(io.BytesIO(archive)):
        return zipfile.ZipFile(io.BytesIO(archive)).read(name)
    with tarfile.open(fileobj=io.BytesIO(archive)) as tf:
        return tf.extractfile(name).read()


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data/classic", type=Path)
    ap.add_argument("--cache", default="data/.cache", type=Path)
    ap.add_argument("--from", dest="extra", type=Path,
                    help="directory with <name>.png/.pgm/.tif files for the images listed in MISSING")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    args.cache.mkdir(parents=True, exist_ok=True)

    archives = {}
    for name, (arch, path, size, pin) in IMAGES.items():
        if arch not in archives:
            archives[arch] = fetch(arch, args.cache)
        img = Image.open(io.BytesIO(member(archives[arch], path))).convert("L")
        if img.size != size or sha256(img.tobytes()) != pin:
            sys.exit(f"{name}: decoded pixels do not match the pin")
        img.save(args.out / f"{name}.png")
        print(f"{name:<12} {size[0]}x{size[1]}  pinned", flush=True)

    for name in MISSING:
        found = None
        if args.extra:
            found = next((p for p in sorted(args.extra.glob(f"{name}.*"))), None)
        if found:
            img = Image.open(found).convert("L")
            img.save(args.out / f"{name}.png")
            print(f"{name:<12} {img.size[0]}x{img.size[1]}  UNPINNED (from {found})")
        else:
            print(f"{name:<12} unavailable")


if __name__ == "__main__":
    main()
