#!/usr/bin/env python3
"""Independent brute-force oracle for the standard quantization formula.

Applies, in plain Python arithmetic, the scaling rule

    Q > 50:  max(1,   round(2 * (1 - Q/100) * base))
    Q <= 50: min(255, round((50 / Q) * base))

to the luminance and chrominance base tables and emits a C header with the
results for every Q in 1..100. Rounding is half away from zero. Run with
--check to verify an existing header instead of rewriting it.
"""

import argparse
import math
import sys

LUMA_BASE = [
    16, 11, 10, 16, 24, 40, 51, 61,
    12, 12, 14, 19, 26, 58, 60, 55,
    14, 13, 16, 24, 40, 57, 69, 56,
    14, 17, 22, 29, 51, 87, 80, 62,
    18, 22, 37, 56, 68, 109, 103, 77,
    24, 35, 55, 64, 81, 104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99,
]

CHROMA_BASE = [
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
]


def round_half_away(x):
    return math.floor(x + 0.5) if x >= 0 else math.ceil(x - 0.5)


def table_for(base, quality):
    scale = 2.0 * (1.0 - quality / 100.0) if quality > 50 else 50.0 / quality
    out = []
    for v in base:
        r = round_half_away(scale * v)
        out.append(max(1, r) if quality > 50 else min(255, r))
    return out


def render():
    lines = []
    lines.append("// generated by tests/oracles/gen_quant_tables.py; do not edit by hand")
    lines.append("#pragma once")
    lines.append("")
    for name, base in (("kOracleLuma", LUMA_BASE), ("kOracleChroma", CHROMA_BASE)):
        lines.append(f"static const unsigned short {name}[100][64] = {{")
        for q in range(1, 101):
            vals = table_for(base, q)
            body = ", ".join(str(v) for v in vals)
            lines.append(f"    {{{body}}},")
        lines.append("};")
        lines.append("")
    return "\n".join(lines) + "\n"


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("output")
    parser.add_argument("--check", action="store_true",
                        help="fail if the existing file differs from a fresh render")
    args = parser.parse_args()

    text = render()
    if args.check:
        with open(args.output, "r", encoding="utf-8") as fh:
            current = fh.read()
        if current != text:
            print("oracle header is stale; regenerate with gen_quant_tables.py", file=sys.stderr)
            return 1
        print("oracle header matches a fresh render")
        return 0

    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
