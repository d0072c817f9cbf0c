"""CSV output shared by the constructors and the CLI."""

from __future__ import annotations

import csv
import os

import numpy as np


def write_rows(path_or_file, header, rows):
    """Write ``rows`` of floats (full ``repr`` precision) under ``header``.
    Accepts a path or an open text file."""
    own = isinstance(path_or_file, (str, bytes, os.PathLike))
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([repr(float(t)) for t in row])
    finally:
        if own:
            fh.close()


def write_surface(path_or_file, u, v, x):
    """Sampled surface as ``u,v,x1,...,xn``."""
    x = np.asarray(x, float)
    header = ["u", "v"] + [f"x{i}" for i in range(1, x.shape[1] + 1)]
    write_rows(path_or_file, header, ((uu, vv, *row) for uu, vv, row in zip(u, v, x)))
