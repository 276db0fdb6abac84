"""Deterministic text formatting for every file this package writes.

Numbers are written with 12 significant digits, '.' as decimal separator and
'\\n' line endings, so identical inputs give byte-identical files.
"""

import numpy as np

DIGITS = 12


def fmt(x) -> str:
    x = float(x) + 0.0  # folds -0.0 into 0.0
    return f"{x:.{DIGITS}g}"


def fmt_complex(z) -> str:
    z = complex(z)
    re = z.real + 0.0
    im = z.imag + 0.0
    return f"{re:.{DIGITS}g}{im:+.{DIGITS}g}j"


def write_rows(path, header, rows, comments=()):
    """Write a comma-separated table; ``comments`` are appended as '# ' lines."""
    lines = [",".join(header)]
    lines.extend(",".join(str(c) for c in row) for row in rows)
    lines.extend(f"# {c}" for c in comments)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def dump_matrix(path, M):
    """One complex cell per entry as ``re+imj``, whitespace-separated rows."""
    M = np.atleast_2d(np.asarray(M))
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        for row in M:
            fh.write(" ".join(fmt_complex(v) for v in row) + "\n")


def load_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        rows = [[complex(cell) for cell in line.split()] for line in fh if line.strip()]
    return np.array(rows, dtype=np.complex128)
