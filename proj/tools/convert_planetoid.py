#!/usr/bin/env python3
"""Convert a LINQS citation dataset (cora.cites / cora.content) into the
edge list and feature CSV that `pine` reads.

    python3 tools/convert_planetoid.py /path/to/cora cora  $PINE_DATA_DIR/cora

writes edges.txt ("src dst" per line, cited -> citing) and features.csv
(paper id followed by the binary word vector). Edges whose endpoints have no
feature row are dropped and counted.
"""

import argparse
import sys
from pathlib import Path


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("src_dir", type=Path, help="directory holding <name>.cites and <name>.content")
    ap.add_argument("name", help="dataset prefix, e.g. cora or citeseer")
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--reverse", action="store_true", help="write citing -> cited instead")
    args = ap.parse_args()

    content = args.src_dir / f"{args.name}.content"
    cites = args.src_dir / f"{args.name}.cites"
    args.out_dir.mkdir(parents=True, exist_ok=True)

    ids = set()
    with content.open() as fin, (args.out_dir / "features.csv").open("w") as fout:
        for line in fin:
            parts = line.split()
            if not parts:
                continue
            # id, word indicators..., class label
            ids.add(parts[0])
            fout.write(",".join([parts[0], *parts[1:-1]]) + "\n")

    kept = dropped = 0
    seen = set()
    with cites.open() as fin, (args.out_dir / "edges.txt").open("w") as fout:
        for line in fin:
            parts = line.split()
            if len(parts) != 2:
                continue
            cited, citing = parts
            if cited not in ids or citing not in ids:
                dropped += 1
                continue
            src, dst = (citing, cited) if args.reverse else (cited, citing)
            if (src, dst) in seen:
                continue
            seen.add((src, dst))
            fout.write(f"{src} {dst}\n")
            kept += 1

    print(f"{args.name}: {len(ids)} nodes, {kept} edges written, {dropped} dropped (unknown endpoint)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
