"""Run the randomized proposition checks and write the report.

    python3 scripts/run_verify.py --seeds 0-99 --sizes 2,4,8,16,32 --out verify.json
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from hilbertmodel import verifier


@dataclass
class Config:
    seeds: tuple[int, ...] = verifier.DEFAULT_SEEDS
    sizes: tuple[int, ...] = verifier.DEFAULT_SIZES
    faults: tuple[str, ...] = ()
    out: Path | None = None


def parse_args(argv=None) -> Config:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", default="0-9", help="0-based seed ranges, e.g. 0-99 or 1,5,7")
    p.add_argument("--sizes", default=",".join(map(str, verifier.DEFAULT_SIZES)))
    p.add_argument("--fault", action="append", default=[], choices=verifier.FAULTS)
    p.add_argument("--out", type=Path, help="write JSON (or TSV for a .tsv suffix) here")
    a = p.parse_args(argv)
    return Config(parse_ranges(a.seeds), tuple(int(s) for s in a.sizes.split(",")), tuple(a.fault), a.out)


def parse_ranges(text: str) -> tuple[int, ...]:
    out = []
    for part in text.split(","):
        lo, _, hi = part.partition("-")
        out.extend(range(int(lo), int(hi or lo) + 1))
    return tuple(out)


def main(argv=None) -> int:
    cfg = parse_args(argv)
    t0 = time.perf_counter()
    report = verifier.run_all(cfg.seeds, cfg.sizes, cfg.faults)
    elapsed = time.perf_counter() - t0
    print(report.to_tsv(), end="")
    print(f"# {len(cfg.seeds)} seeds x {len(cfg.sizes)} sizes in {elapsed:.2f}s: "
          f"{'all pass' if report.passed else 'FAILURES'}", file=sys.stderr)
    if cfg.out:
        cfg.out.write_text(report.to_tsv() if cfg.out.suffix == ".tsv" else report.to_json() + "\n")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
