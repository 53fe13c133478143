"""Structured transfer functions ``H(s, p) = C(s, p) K(s, p)^{-1} B(s, p)``.

Each of ``K``, ``B``, ``C`` is a sum of scalar coefficient functions times
constant matrices.  Matrices may be dense ``ndarray`` or ``scipy.sparse``;
assembly stays sparse only when every term of a role is sparse.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .expr import CoeffExpr, ExprEvalError, parse_coeff

EPS = np.finfo(float).eps
# K(s,p) is treated as singular beyond this condition estimate
COND_LIMIT = 1.0 / (100 * EPS)


class SingularSystemError(np.linalg.LinAlgError):
    def __init__(self, message: str, s: complex | None = None, p=None):
        super().__init__(message)
        self.s = s
        self.p = None if p is None else tuple(p)


class CoefficientError(ArithmeticError):
    def __init__(self, role: str, index: int, cause: Exception):
        super().__init__(f"{role}-term {index}: {cause}")
        self.role = role
        self.index = index


@dataclass(frozen=True)
class StructuredTerm:
    coeff: CoeffExpr
    matrix: object  # ndarray or scipy.sparse matrix

    @classmethod
    def of(cls, coeff: str | CoeffExpr, matrix, d: int | None = None) -> "StructuredTerm":
        if isinstance(coeff, str):
            coeff = parse_coeff(coeff, d)
        if not sp.issparse(matrix):
            matrix = np.atleast_2d(np.asarray(matrix))
        else:
            matrix = sp.csr_matrix(matrix)
        return cls(coeff, matrix)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def _is_real_matrix(M) -> bool:
    return not np.iscomplexobj(M.data if sp.issparse(M) else M)


@dataclass(frozen=True)
class StructuredSystem:
    """Term lists for ``K`` (n x n), ``B`` (n x m) and ``C`` (p x n).

    ``d`` is the parameter dimension (0 for non-parametric systems).
    ``freq_range`` is ``(omega_min, omega_max)`` in rad/s and ``param_box``
    a list of ``d`` intervals.
    """

    k_terms: tuple[StructuredTerm, ...]
    b_terms: tuple[StructuredTerm, ...]
    c_terms: tuple[StructuredTerm, ...]
    d: int = 0
    name: str = "system"
    freq_range: tuple[float, float] = (1e-2, 1e2)
    param_box: tuple[tuple[float, float], ...] = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "k_terms", tuple(self.k_terms))
        object.__setattr__(self, "b_terms", tuple(self.b_terms))
        object.__setattr__(self, "c_terms", tuple(self.c_terms))
        object.__setattr__(self, "param_box", tuple(tuple(map(float, b)) for b in self.param_box))
        object.__setattr__(self, "freq_range", tuple(map(float, self.freq_range)))
        if not self.k_terms or not self.b_terms or not self.c_terms:
            raise ValueError("K, B and C each need at least one term")
        n = self.k_terms[0].shape[0]
        m = self.b_terms[0].shape[1]
        p = self.c_terms[0].shape[0]
        for role, terms, want in (("K", self.k_terms, (n, n)),
                                  ("B", self.b_terms, (n, m)),
                                  ("C", self.c_terms, (p, n))):
            for i, t in enumerate(terms):
                if t.shape != want:
                    raise ValueError(
                        f"{role}-term {i} has shape {t.shape}, expected {want}")
                if t.coeff.max_param > self.d:
                    raise ValueError(
                        f"{role}-term {i} coefficient uses p{t.coeff.max_param} but d={self.d}")
        if len(self.param_box) not in (0, self.d):
            raise ValueError(f"parameter box has {len(self.param_box)} intervals, d={self.d}")

    @property
    def n(self) -> int:
        return self.k_terms[0].shape[0]

    @property
    def m(self) -> int:
        return self.b_terms[0].shape[1]

    @property
    def p(self) -> int:
        return self.c_terms[0].shape[0]

    def terms(self, role: str) -> tuple[StructuredTerm, ...]:
        return {"K": self.k_terms, "B": self.b_terms, "C": self.c_terms}[role.upper()]

    @property
    def k_matrices(self) -> list:
        return [t.matrix for t in self.k_terms]

    @property
    def is_sparse(self) -> bool:
        return all(sp.issparse(t.matrix) for t in self.k_terms)

    @property
    def is_real(self) -> bool:
        """Real data: H(conj s) = conj H(s) on the whole domain."""
        terms = self.k_terms + self.b_terms + self.c_terms
        return all(t.coeff.is_real and not t.coeff.has_branch_cut and _is_real_matrix(t.matrix)
                   for t in terms)

    @property
    def has_real_matrices(self) -> bool:
        return all(_is_real_matrix(t.matrix) for t in self.k_terms + self.b_terms + self.c_terms)


def _coeffs(sys: StructuredSystem, role: str, s: complex, p) -> list[complex]:
    out = []
    for i, t in enumerate(sys.terms(role)):
        try:
            out.append(t.coeff(s, p))
        except (ExprEvalError, ZeroDivisionError, OverflowError, ValueError) as exc:
            raise CoefficientError(role.upper(), i, exc) from exc
    return out


def assemble(sys: StructuredSystem, role: str, s: complex, p: Sequence[float] = ()):
    """Sum ``coeff_i(s, p) * M_i`` over the terms of ``role`` ('K', 'B' or 'C')."""
    terms = sys.terms(role)
    coeffs = _coeffs(sys, role, s, p)
    if all(sp.issparse(t.matrix) for t in terms):
        out = None
        for c, t in zip(coeffs, terms):
            piece = t.matrix * c
            out = piece if out is None else out + piece
        return sp.csr_matrix(out, dtype=complex)
    out = np.zeros(terms[0].shape, dtype=complex)
    for c, t in zip(coeffs, terms):
        if sp.issparse(t.matrix):
            out += c * t.matrix.toarray()
        else:
            out += c * t.matrix
    return out


class Factorization:
    """LU of ``K(s, p)`` with solves for ``K x = b`` and ``K^T y = c``.

    Dense matrices use LAPACK ``getrf``/``gecon``; sparse ones SuperLU with a
    pivot-ratio test, since SuperLU offers no condition estimate.
    """

    def __init__(self, K, s=None, p=None):
        self.sparse = sp.issparse(K)
        if self.sparse:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("error", sp.SparseEfficiencyWarning)
                    self.lu = spla.splu(sp.csc_matrix(K))
            except RuntimeError as exc:
                raise SingularSystemError(f"K is singular at s={s}, p={p}: {exc}", s, p) from exc
            diag = np.abs(self.lu.U.diagonal())
            if diag.min() <= diag.max() / COND_LIMIT:
                raise SingularSystemError(f"K is numerically singular at s={s}, p={p}", s, p)
        else:
            K = np.asarray(K, dtype=complex)
            if not np.all(np.isfinite(K)):
                raise SingularSystemError(f"K has non-finite entries at s={s}, p={p}", s, p)
            anorm = np.linalg.norm(K, 1)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                self.lu = sla.lu_factor(K, check_finite=False)
            if anorm == 0:
                raise SingularSystemError(f"K is zero at s={s}, p={p}", s, p)
            gecon, = sla.get_lapack_funcs(("gecon",), (self.lu[0],))
            rcond, info = gecon(self.lu[0], anorm, norm="1")
            if info != 0 or rcond * COND_LIMIT < 1.0:
                raise SingularSystemError(
                    f"K is numerically singular at s={s}, p={p} (rcond={rcond:.3e})", s, p)

    def solve(self, rhs, transpose: bool = False) -> np.ndarray:
        rhs = rhs.toarray() if sp.issparse(rhs) else np.asarray(rhs)
        rhs = np.asarray(rhs, dtype=complex)
        if self.sparse:
            return self.lu.solve(rhs, trans="T" if transpose else "N")
        return sla.lu_solve(self.lu, rhs, trans=1 if transpose else 0, check_finite=False)


def factorize(sys: StructuredSystem, s: complex, p: Sequence[float] = ()) -> Factorization:
    return Factorization(assemble(sys, "K", s, p), s, p)


def _dense(M) -> np.ndarray:
    return M.toarray() if sp.issparse(M) else np.asarray(M)


def transfer(sys: StructuredSystem, s: complex, p: Sequence[float] = ()) -> np.ndarray:
    """Evaluate ``H(s, p)`` as a ``p x m`` complex array without forming ``K^{-1}``."""
    if len(p) < sys.d:
        raise ValueError(f"expected {sys.d} parameters, got {len(p)}")
    lu = factorize(sys, s, p)
    X = lu.solve(assemble(sys, "B", s, p))
    return np.asarray(_dense(assemble(sys, "C", s, p)) @ X)


@dataclass
class SweepFailure:
    freq_index: int
    param_index: int
    s: complex
    p: tuple
    reason: str


def transfer_sweep(sys: StructuredSystem, freqs: Sequence[complex],
                   params: Sequence[Sequence[float]] | None = None):
    """Evaluate ``H`` on the tensor grid ``freqs x params``.

    Returns ``(values, failures)`` where ``values`` has shape
    ``(len(freqs), len(params), p, m)`` with NaN at failed points.
    """
    freqs = list(freqs)
    params = [()] if params is None else [tuple(q) for q in params]
    values = np.full((len(freqs), len(params), sys.p, sys.m), np.nan + 0j, dtype=complex)
    failures: list[SweepFailure] = []
    for j, q in enumerate(params):
        for i, s in enumerate(freqs):
            try:
                values[i, j] = transfer(sys, s, q)
            except (SingularSystemError, CoefficientError) as exc:
                failures.append(SweepFailure(i, j, complex(s), q, str(exc)))
    if failures:
        warnings.warn(f"{len(failures)} sweep point(s) failed; entries set to NaN", RuntimeWarning)
    return values, failures
