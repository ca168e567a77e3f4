#!/usr/bin/env python3
"""Write src/builtin_catalogue_data.cpp from the design files in data/designs.

Usage: embed.py DESIGN_DIR OUTPUT_CPP
"""
import pathlib
import re
import sys

# Extremal (E) or low-cardinality (L) type per ladder level.
LEVEL_TYPE = {2: "E", 3: "L", 4: "E", 5: "L", 6: "E", 7: "L", 8: "E", 9: "L", 10: "E", 11: "L"}


def main():
    design_dir = pathlib.Path(sys.argv[1])
    out = pathlib.Path(sys.argv[2])
    files = sorted(design_dir.glob("level*_m*_t*.txt"))
    lines = ["// Generated by tools/design_catalogue/embed.py. Do not edit.",
             '#include "builtin_catalogue.hpp"', "", "namespace sparsesphere::detail {", "",
             "namespace {", ""]
    entries = []
    for f in files:
        level, m, t = map(int, re.match(r"level(\d+)_m(\d+)_t(\d+)", f.stem).groups())
        rows = [l.split() for l in f.read_text().splitlines() if l.strip() and not l.startswith("#")]
        assert len(rows) == m, f
        lines.append(f"constexpr double kLevel{level:02d}[] = {{")
        for r in rows:
            lines.append(f"    {r[0]}, {r[1]}, {r[2]},")
        lines.append("};")
        lines.append("")
        entries.append((level, t))
    lines.append("constexpr CatalogueEntry kEntries[] = {")
    for level, t in entries:
        lines.append(f'    {{"level{level:02d}", "{LEVEL_TYPE[level]}", {t}, kLevel{level:02d}}},')
    lines += ["};", "", "}  // namespace", "",
              "std::span<const CatalogueEntry> catalogue_entries() { return kEntries; }", "",
              "}  // namespace sparsesphere::detail", ""]
    out.write_text("\n".join(lines))


if __name__ == "__main__":
    main()
