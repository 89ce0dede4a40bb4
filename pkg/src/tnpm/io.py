"""Reading and writing matrices and label vectors.

Supported matrix formats:

``dense_csv``
    one matrix row per line, comma-separated reals.
``edge_list_tsv``
    ``i<TAB>j<TAB>w`` with 1-based indices; unlisted pairs are 0. An optional
    header comment ``# n=<rows> m=<cols>`` fixes the shape, otherwise it is
    the largest index seen.
``matrix_market``
    MatrixMarket ``coordinate`` or ``array`` files, real or integer, general.

Label files hold one 1-based label per line.
"""
import re
import warnings

import numpy as np

from .linalg import as_matrix

FORMATS = ("dense_csv", "edge_list_tsv", "matrix_market")
_SUFFIXES = {".csv": "dense_csv", ".tsv": "edge_list_tsv", ".mtx": "matrix_market"}
_HEADER = re.compile(r"^[#%]\s*n\s*=\s*(\d+)[\s,;]+m\s*=\s*(\d+)\s*$")


class MatrixFormatError(ValueError):
    pass


def guess_format(path):
    for suffix, fmt in _SUFFIXES.items():
        if str(path).endswith(suffix):
            return fmt
    raise MatrixFormatError(f"cannot infer the matrix format of {path}")


def _real(tok, lineno):
    try:
        v = float(tok)
    except ValueError:
        raise MatrixFormatError(f"line {lineno}: {tok!r} is not a number") from None
    if not np.isfinite(v):
        raise MatrixFormatError(f"line {lineno}: non-finite value {tok!r}")
    return v


def _index(tok, lineno):
    try:
        v = int(tok)
    except ValueError:
        raise MatrixFormatError(f"line {lineno}: {tok!r} is not an integer index") from None
    if v < 1:
        raise MatrixFormatError(f"line {lineno}: index {v} must be >= 1")
    return v


def _read_dense_csv(lines):
    rows = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        rows.append((lineno, [_real(t.strip(), lineno) for t in line.split(",")]))
    if not rows:
        raise MatrixFormatError("no data rows")
    width = len(rows[0][1])
    for lineno, r in rows:
        if len(r) != width:
            raise MatrixFormatError(f"line {lineno}: expected {width} values, got {len(r)}")
    return np.array([r for _, r in rows], dtype=float)


def _fill(entries, shape):
    A = np.zeros(shape)
    seen = {}
    for lineno, i, j, w in entries:
        if i > shape[0] or j > shape[1]:
            raise MatrixFormatError(
                f"line {lineno}: index ({i}, {j}) outside declared shape {shape}"
            )
        if (i, j) in seen:
            warnings.warn(
                f"line {lineno}: duplicate entry ({i}, {j}) overrides line {seen[(i, j)]}",
                stacklevel=3,
            )
        seen[(i, j)] = lineno
        A[i - 1, j - 1] = w
    return A


def _read_edge_list(lines):
    shape = None
    entries = []
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if not s:
            continue
        if s[0] in "#%":
            m = _HEADER.match(s)
            if m:
                shape = (int(m.group(1)), int(m.group(2)))
            continue
        parts = s.split("\t") if "\t" in s else s.split()
        if len(parts) not in (2, 3):
            raise MatrixFormatError(f"line {lineno}: expected 'i<TAB>j<TAB>w', got {s!r}")
        i, j = _index(parts[0], lineno), _index(parts[1], lineno)
        w = _real(parts[2], lineno) if len(parts) == 3 else 1.0
        entries.append((lineno, i, j, w))
    if shape is None:
        if not entries:
            raise MatrixFormatError("empty edge list without a size header")
        shape = (max(e[1] for e in entries), max(e[2] for e in entries))
    return _fill(entries, shape)


def _read_matrix_market(lines):
    if not lines or not lines[0].lower().startswith("%%matrixmarket"):
        raise MatrixFormatError("line 1: missing %%MatrixMarket banner")
    banner = lines[0].split()
    if len(banner) != 5:
        raise MatrixFormatError("line 1: malformed banner")
    _, obj, layout, field, sym = (b.lower() for b in banner)
    if obj != "matrix" or layout not in ("coordinate", "array"):
        raise MatrixFormatError(f"line 1: unsupported layout {obj} {layout}")
    if field not in ("real", "integer", "double") or sym != "general":
        raise MatrixFormatError(f"line 1: only real/integer general matrices are supported")
    body = [(no, l.strip()) for no, l in enumerate(lines[1:], 2) if l.strip() and not l.lstrip().startswith("%")]
    if not body:
        raise MatrixFormatError("missing size line")
    no, size = body[0]
    toks = size.split()
    if layout == "coordinate":
        if len(toks) != 3:
            raise MatrixFormatError(f"line {no}: expected 'rows cols nnz'")
        n, m, nnz = (_index(t, no) if k < 2 else int(t) for k, t in enumerate(toks))
        entries = []
        for no, line in body[1:]:
            p = line.split()
            if len(p) != 3:
                raise MatrixFormatError(f"line {no}: expected 'i j value', got {line!r}")
            entries.append((no, _index(p[0], no), _index(p[1], no), _real(p[2], no)))
        if len(entries) != nnz:
            raise MatrixFormatError(f"declared {nnz} entries but found {len(entries)}")
        return _fill(entries, (n, m))
    if len(toks) != 2:
        raise MatrixFormatError(f"line {no}: expected 'rows cols'")
    n, m = _index(toks[0], no), _index(toks[1], no)
    vals = [_real(l, no) for no, l in body[1:]]
    if len(vals) != n * m:
        raise MatrixFormatError(f"expected {n * m} values, got {len(vals)}")
    return np.array(vals, dtype=float).reshape((m, n)).T.copy()


def parse_matrix(path, format=None):
    """Read a matrix file into a dense float array."""
    fmt = format or guess_format(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if fmt == "dense_csv":
        A = _read_dense_csv(lines)
    elif fmt == "edge_list_tsv":
        A = _read_edge_list(lines)
    elif fmt == "matrix_market":
        A = _read_matrix_market(lines)
    else:
        raise MatrixFormatError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    return as_matrix(A)


def write_matrix(A, path, format=None):
    """Write ``A``; values are written with ``repr`` so they read back bit-exactly."""
    A = as_matrix(A)
    fmt = format or guess_format(path)
    n, m = A.shape
    with open(path, "w") as fh:
        if fmt == "dense_csv":
            for row in A:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        elif fmt == "edge_list_tsv":
            fh.write(f"# n={n} m={m}\n")
            for i, j in zip(*np.nonzero(A)):
                fh.write(f"{i + 1}\t{j + 1}\t{float(A[i, j])!r}\n")
        elif fmt == "matrix_market":
            nz = list(zip(*np.nonzero(A)))
            fh.write("%%MatrixMarket matrix coordinate real general\n")
            fh.write(f"{n} {m} {len(nz)}\n")
            for i, j in nz:
                fh.write(f"{i + 1} {j + 1} {float(A[i, j])!r}\n")
        else:
            raise MatrixFormatError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def read_labels(path):
    """1-based labels from a file, returned 0-based."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if s and not s.startswith("#"):
                out.append(_index(s, lineno) - 1)
    if not out:
        raise MatrixFormatError(f"{path}: no labels")
    return np.array(out, dtype=np.int64)


def write_labels(labels, path):
    with open(path, "w") as fh:
        for v in np.asarray(labels):
            fh.write(f"{int(v) + 1}\n")
