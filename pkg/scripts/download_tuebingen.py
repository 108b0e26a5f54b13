"""Fetch and unpack the cause-effect pairs archive.

    python scripts/download_tuebingen.py --dest data/tuebingen
"""
import argparse
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

URL = "https://webdav.tuebingen.mpg.de/cause-effect/pairs.zip"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dest", default="data/tuebingen")
    ap.add_argument("--url", default=URL)
    args = ap.parse_args(argv)
    dest = Path(args.dest)
    try:
        with urllib.request.urlopen(args.url, timeout=60) as resp:
            payload = resp.read()
    except OSError as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        return 1
    dest.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(io.BytesIO(payload)) as zf:
        for member in zf.infolist():
            name = Path(member.filename).name
            # flatten the archive so pairNNNN.txt and pairmeta.txt sit in dest
            if member.is_dir() or not name:
                continue
            (dest / name).write_bytes(zf.read(member))
    print(f"unpacked {len(list(dest.glob('pair*.txt')))} files into {dest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
