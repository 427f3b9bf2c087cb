#!/usr/bin/env python3
"""Downloads the UCI spambase and housing tables into data/.

The bundled spambase file is a synthetic stand-in; run this where the UCI
archive is reachable and point costs.data at data/spambase.data.
"""
import argparse
import pathlib
import urllib.request

SOURCES = {
    "spambase.data": "https://archive.ics.uci.edu/ml/machine-learning-databases/spambase/spambase.data",
    "housing.data": "https://archive.ics.uci.edu/ml/machine-learning-databases/housing/housing.data",
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=pathlib.Path(__file__).resolve().parent.parent / "data", type=pathlib.Path)
    parser.add_argument("--force", action="store_true", help="overwrite existing files")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, url in SOURCES.items():
        target = args.out / name
        if target.exists() and not args.force:
            print(f"{target} exists, skipping")
            continue
        with urllib.request.urlopen(url, timeout=60) as resp:
            target.write_bytes(resp.read())
        print(f"wrote {target}")


if __name__ == "__main__":
    main()
