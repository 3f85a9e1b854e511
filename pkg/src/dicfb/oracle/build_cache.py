"""Regenerate the packaged allocation cache by exhaustive search.

Usage: ``python -m dicfb.oracle.build_cache [output-path]``
"""

import sys
from pathlib import Path

from ..channel import OperatingPoint
from .allocations import format_cache_line, search_level_allocations

MAX_N = 6
MAX_M = 8
MAX_CHAIN = 7


def cache_points() -> list:
    pts = {(n, m) for n in range(1, MAX_N + 1) for m in range(MAX_M + 1)}
    pts |= {(L, L - 1) for L in range(1, MAX_CHAIN + 1)}
    pts |= {(L - 1, L) for L in range(2, MAX_CHAIN + 1)}
    return sorted(pts)


def build() -> str:
    lines = ["# n m block sum_bits witness (exhaustive weight-2 search, block 1)"]
    for n, m in cache_points():
        lines.append(format_cache_line(search_level_allocations(OperatingPoint(n, m), 1)))
    return "\n".join(lines) + "\n"


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    default = Path(__file__).parent / "data" / "allocations.txt"
    out = Path(argv[0]) if argv else default
    out.write_text(build())
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
