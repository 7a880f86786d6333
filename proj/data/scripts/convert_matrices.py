#!/usr/bin/env python3
"""Regenerate data/matrices/BLOSUM* in the NCBI text layout.

The tables are read from the C headers shipped inside the parasail wheel
(parasail/include/parasail/matrices/blosumNN.h), which carry the NCBI
distribution values verbatim together with their original comment lines.

usage: convert_matrices.py <parasail.whl> <out_dir>
"""
import re
import sys
import zipfile

LEVELS = [30, 35, 40, 45, 50, 55, 60, 62, 65, 70, 75, 80, 85, 90, 100]


def convert(header_text):
    comments = [c.strip() for c in re.findall(r"/\* (#[^*]*?)\*/", header_text)]
    start = header_text.index("_[] = {")
    body = header_text[start:header_text.index("};", start)].split("{", 1)[1]
    body = re.sub(r"/\*.*?\*/", "", body, flags=re.S)
    values = [int(v) for v in re.findall(r"-?\d+", body)]
    tail = header_text[header_text.index("PARASAIL_MATRIX_TYPE_SQUARE"):]
    alphabet = re.search(r'"([A-Z*]+)"', tail).group(1)
    size = len(alphabet)
    assert len(values) == size * size
    lines = comments + ["   " + "  ".join(alphabet)]
    for i, a in enumerate(alphabet):
        lines.append(a + "".join(f"{v:3d}" for v in values[i * size:(i + 1) * size]))
    return "\n".join(lines) + "\n"


def main(wheel, out_dir):
    with zipfile.ZipFile(wheel) as z:
        for level in LEVELS:
            text = z.read(f"parasail/include/parasail/matrices/blosum{level}.h").decode()
            with open(f"{out_dir}/BLOSUM{level}", "w") as f:
                f.write(convert(text))


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
