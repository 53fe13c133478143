"""Matrix Market text files and system manifests.

A manifest is a JSON document::

    {
      "name": "demo", "n": 3, "m": 1, "p": 1, "d": 1,
      "frequency_range": [1e-4, 10.0],
      "parameter_box": [[-10.0, 10.0]],
      "K": [{"coeff": "s", "matrix": "K0.mtx"}, ...],
      "B": [{"coeff": "1", "matrix": "B0.mtx"}],
      "C": [{"coeff": "1", "matrix": "C0.mtx"}]
    }

Matrix paths are relative to the manifest.  Coefficients use the
expression language of :mod:`dropmor.expr`.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .expr import ExprSyntaxError, coeff_text, parse_coeff
from .system import StructuredSystem, StructuredTerm, assemble


class MatrixFileError(ValueError):
    def __init__(self, path, line: int | None, message: str):
        loc = f"{path}:{line}" if line is not None else f"{path}"
        super().__init__(f"{loc}: {message}")
        self.path = str(path)
        self.line = line


class ManifestError(ValueError):
    def __init__(self, path, message: str, line: int | None = None):
        loc = f"{path}:{line}" if line is not None else f"{path}"
        super().__init__(f"{loc}: {message}")
        self.path = str(path)
        self.line = line


# ------------------------------------------------------------ Matrix Market

_FIELDS = ("real", "complex", "integer", "pattern")
_SYMM = ("general", "symmetric", "skew-symmetric", "hermitian")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_matrix(path, M) -> None:
    """Write ``M`` in Matrix Market format with round-trippable floats.

    Sparse input goes to ``coordinate`` storage, dense to ``array``.
    """
    path = Path(path)
    is_complex = np.iscomplexobj(M.data if sp.issparse(M) else M)
    field = "complex" if is_complex else "real"

    def entry(v):
        return f"{_fmt(v.real)} {_fmt(v.imag)}" if is_complex else _fmt(v)

    lines = []
    if sp.issparse(M):
        C = sp.coo_matrix(M)
        order = np.lexsort((C.row, C.col))
        lines.append(f"%%MatrixMarket matrix coordinate {field} general")
        lines.append(f"{C.shape[0]} {C.shape[1]} {C.nnz}")
        for k in order:
            lines.append(f"{C.row[k] + 1} {C.col[k] + 1} {entry(C.data[k])}")
    else:
        A = np.atleast_2d(np.asarray(M))
        lines.append(f"%%MatrixMarket matrix array {field} general")
        lines.append(f"{A.shape[0]} {A.shape[1]}")
        for v in A.ravel(order="F"):
            lines.append(entry(v))
    path.write_text("\n".join(lines) + "\n")


def _numbers(path, lineno, tokens, kind):
    try:
        return [kind(t) for t in tokens]
    except ValueError:
        raise MatrixFileError(path, lineno, f"malformed entry {' '.join(tokens)!r}") from None


def read_matrix(path):
    """Read a Matrix Market file.

    Coordinate files come back as ``csr_matrix`` (never densified), array
    files as ``ndarray``.  Indices in coordinate files are 1-based.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MatrixFileError(path, None, f"cannot read: {exc.strerror or exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise MatrixFileError(path, 1, "empty file")
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket" or head[1].lower() != "matrix":
        raise MatrixFileError(path, 1, "missing '%%MatrixMarket matrix' header")
    storage, field, symm = (h.lower() for h in head[2:])
    if storage not in ("coordinate", "array"):
        raise MatrixFileError(path, 1, f"unknown storage {storage!r}")
    if field not in _FIELDS or (field == "pattern" and storage == "array"):
        raise MatrixFileError(path, 1, f"unsupported field {field!r}")
    if symm not in _SYMM:
        raise MatrixFileError(path, 1, f"unknown symmetry {symm!r}")

    body = [(i + 1, ln.split()) for i, ln in enumerate(lines[1:], start=1)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixFileError(path, len(lines), "missing size line")
    size_line, size_tok = body[0]
    want = 3 if storage == "coordinate" else 2
    if len(size_tok) != want:
        raise MatrixFileError(path, size_line, f"size line needs {want} integers")
    dims = _numbers(path, size_line, size_tok, int)
    nrows, ncols = dims[0], dims[1]
    if nrows < 0 or ncols < 0:
        raise MatrixFileError(path, size_line, "negative dimension")
    entries = body[1:]
    width = {"complex": 2, "pattern": 0}.get(field, 1)
    dtype = complex if field == "complex" else float

    def value(lineno, toks):
        if len(toks) != width:
            raise MatrixFileError(path, lineno, f"expected {width} value(s), got {len(toks)}")
        if width == 0:
            return 1.0
        nums = _numbers(path, lineno, toks, float)
        return complex(nums[0], nums[1]) if width == 2 else nums[0]

    if storage == "coordinate":
        nnz = dims[2]
        if len(entries) != nnz:
            raise MatrixFileError(path, entries[-1][0] if entries else size_line,
                                  f"declared {nnz} entries, found {len(entries)}")
        rows, cols, vals = [], [], []
        for lineno, toks in entries:
            if len(toks) < 2:
                raise MatrixFileError(path, lineno, "entry needs row and column indices")
            i, j = _numbers(path, lineno, toks[:2], int)
            if not (1 <= i <= nrows and 1 <= j <= ncols):
                raise MatrixFileError(path, lineno,
                                      f"index ({i},{j}) outside declared {nrows}x{ncols}")
            v = value(lineno, toks[2:])
            rows.append(i - 1); cols.append(j - 1); vals.append(v)
            if symm != "general" and i != j:
                mirror = {"symmetric": v, "skew-symmetric": -v,
                          "hermitian": np.conj(v)}[symm]
                rows.append(j - 1); cols.append(i - 1); vals.append(mirror)
        return sp.csr_matrix((np.array(vals, dtype=dtype), (rows, cols)),
                             shape=(nrows, ncols))

    if symm != "general":
        raise MatrixFileError(path, 1, "symmetric array storage is not supported")
    if len(entries) != nrows * ncols:
        raise MatrixFileError(path, entries[-1][0] if entries else size_line,
                              f"declared {nrows * ncols} entries, found {len(entries)}")
    data = np.array([value(ln, toks) for ln, toks in entries], dtype=dtype)
    return data.reshape((nrows, ncols), order="F")


# ------------------------------------------------------------ manifests

_ROLES = ("K", "B", "C")


def _json_safe(x):
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return repr(x)


def save_system(sys: StructuredSystem, directory, manifest_name: str = "manifest.json") -> Path:
    """Write ``sys`` as a manifest plus one matrix file per term."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    doc = dict(name=sys.name, n=sys.n, m=sys.m, p=sys.p, d=sys.d,
               frequency_range=list(sys.freq_range),
               parameter_box=[list(b) for b in sys.param_box])
    for role in _ROLES:
        items = []
        for i, t in enumerate(sys.terms(role)):
            fname = f"{role}{i}.mtx"
            write_matrix(directory / fname, t.matrix)
            items.append(dict(coeff=coeff_text(t.coeff), matrix=fname))
        doc[role] = items
    if sys.meta:
        doc["meta"] = _json_safe(sys.meta)
    path = directory / manifest_name
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def _require(doc, key, path, kind=None):
    if key not in doc:
        raise ManifestError(path, f"missing key {key!r}")
    v = doc[key]
    if kind is not None and not isinstance(v, kind):
        raise ManifestError(path, f"key {key!r} must be {getattr(kind, '__name__', kind)}")
    return v


def load_system(manifest_path) -> StructuredSystem:
    """Load a manifest and its matrices, validating dimensions and coefficients."""
    path = Path(manifest_path)
    if path.is_dir():
        path = path / "manifest.json"
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError(path, f"cannot read manifest: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(path, exc.msg, exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ManifestError(path, "top level must be an object")
    dims = {}
    for key in ("n", "m", "p", "d"):
        v = _require(doc, key, path, int)
        if v < (0 if key == "d" else 1):
            raise ManifestError(path, f"{key} must be positive")
        dims[key] = v
    n, m, p, d = dims["n"], dims["m"], dims["p"], dims["d"]
    freq = doc.get("frequency_range", [1e-2, 1e2])
    box = doc.get("parameter_box", [[0.0, 1.0]] * d if d else [])
    want = {"K": (n, n), "B": (n, m), "C": (p, n)}
    terms = {}
    for role in _ROLES:
        items = _require(doc, role, path, list)
        if not items:
            raise ManifestError(path, f"{role} needs at least one term")
        out = []
        for i, item in enumerate(items):
            if not isinstance(item, dict) or "coeff" not in item or "matrix" not in item:
                raise ManifestError(path, f"{role}-term {i} needs 'coeff' and 'matrix'")
            try:
                coeff = parse_coeff(str(item["coeff"]), d)
            except ExprSyntaxError as exc:
                raise ManifestError(path, f"{role}-term {i} coefficient: {exc}") from exc
            mpath = path.parent / item["matrix"]
            M = read_matrix(mpath)
            if M.shape != want[role]:
                raise ManifestError(
                    path, f"{role}-term {i} ({item['matrix']}) has shape {M.shape}, "
                          f"expected {want[role]}")
            out.append(StructuredTerm(coeff, M))
        terms[role] = out
    try:
        sys = StructuredSystem(terms["K"], terms["B"], terms["C"], d=d,
                               name=str(doc.get("name", path.stem)),
                               freq_range=tuple(freq), param_box=box,
                               meta=dict(doc.get("meta", {}), source=os.fspath(path)))
    except ValueError as exc:
        raise ManifestError(path, str(exc)) from exc
    probe_p = tuple((lo + hi) / 2 for lo, hi in sys.param_box) or (0.0,) * d
    try:
        assemble(sys, "K", complex(0.0, sys.freq_range[0]), probe_p)
    except ArithmeticError as exc:
        raise ManifestError(path, f"K cannot be evaluated at the probe point: {exc}") from exc
    return sys
