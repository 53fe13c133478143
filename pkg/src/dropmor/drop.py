"""Dominant reachable/observable subspace projection (DROP).

Given raw interpolatory bases ``V`` and ``W``, the projected K-matrices
``W^T A_i V`` are stacked horizontally and vertically.  The leading left
singular vectors of the horizontal stack and right singular vectors of the
vertical stack select the dominant simultaneously reachable and observable
directions; the structured system is then projected onto them term by term.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .projection import ProjectionPair
from .sampling import PinnedRNG, log_freq_grid
from .system import (CoefficientError, SingularSystemError, StructuredSystem, StructuredTerm,
                     assemble, factorize)

RANK_TOLS = (1e-4, 1e-6, 1e-8, 1e-10, 1e-12)
FULL_RANK_TOL = 1e-12


def numerical_rank(sv: np.ndarray, rel_tol: float) -> int:
    sv = np.asarray(sv)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.count_nonzero(sv > rel_tol * sv[0]))


@dataclass
class SvdReport:
    sv_left: np.ndarray
    sv_right: np.ndarray
    numerical_rank_at: dict = field(default_factory=dict)
    chosen_r: int | None = None
    truncation_mode: str | None = None
    orthonormalized: bool | None = None
    warnings: list = field(default_factory=list)
    shape_left: tuple = (0, 0)
    shape_right: tuple = (0, 0)

    @property
    def available_rank(self) -> int:
        """Rank at the usual floating-point threshold ``max(shape) * eps``."""
        out = []
        for sv, size in ((self.sv_left, self.shape_left), (self.sv_right, self.shape_right)):
            out.append(numerical_rank(sv, max(size) * np.finfo(float).eps))
        return min(out)


def _project_matrix(W: np.ndarray, A, V: np.ndarray) -> np.ndarray:
    AV = A @ V
    return np.asarray(W.T @ AV)


def _compress(M: np.ndarray):
    """Thin SVD ``M = P diag(S) Z^H`` without the exact-rounding tail.

    Returns ``(P, S, Z)`` where ``Z`` already carries the conjugation, so
    ``M == P @ diag(S) @ Z.conj().T``; for real input ``Z`` is real.
    """
    if M.shape[1] == 0 or M.shape[0] == 0:
        return (np.zeros((M.shape[0], 0), dtype=M.dtype), np.zeros(0),
                np.zeros((M.shape[1], 0), dtype=M.dtype))
    P, S, Zh = np.linalg.svd(M, full_matrices=False)
    keep = S > max(M.shape) * np.finfo(float).eps * S[0] if S[0] > 0 else np.zeros_like(S, bool)
    return P[:, keep], S[keep], Zh[keep].conj().T


def stacked_svd(V: np.ndarray, W: np.ndarray, k_matrices):
    """Compact SVDs of the horizontal and vertical stacks of ``W^T A_i V``.

    Returns ``(report, W1, V1)``: ``W1`` holds the left singular vectors of
    ``[W^T A_1 V, ..., W^T A_l V]`` and ``V1`` the right singular vectors of
    the vertical stack, both ordered by decreasing singular value.
    """
    if not k_matrices:
        raise ValueError("need at least one K-matrix")
    n = k_matrices[0].shape[0]
    for i, A in enumerate(k_matrices):
        if A.shape != (n, n):
            raise ValueError(f"K-matrix {i} has shape {A.shape}, expected {(n, n)}")
    if V.shape[0] != n or W.shape[0] != n:
        raise ValueError(f"bases have {V.shape[0]} / {W.shape[0]} rows, K-matrices are {n} x {n}")
    l = len(k_matrices)
    shape_left = (W.shape[1], l * V.shape[1])
    shape_right = (l * W.shape[1], V.shape[1])
    # With V = P_V S_V Z_V^H and W = P_W S_W Z_W^H, each block is
    # conj(Z_W) G_i Z_V^H, G_i = S_W P_W^T A_i P_V S_V.  Z_W and Z_V
    # have orthonormal columns, so the stack SVDs follow from those of the
    # small G stacks without forming the (possibly wide) blocks.
    PV, SV, ZV = _compress(V)
    PW, SW, ZW = _compress(W)
    dtype = np.result_type(V, W, *[A.dtype for A in k_matrices])
    if SV.size == 0 or SW.size == 0:
        W1 = np.zeros((W.shape[1], 0), dtype=dtype)
        V1 = np.zeros((V.shape[1], 0), dtype=dtype)
        sl = sr = np.zeros(0)
    else:
        G = [SW[:, None] * _project_matrix(PW, A, PV) * SV[None, :] for A in k_matrices]
        U, sl, _ = np.linalg.svd(np.hstack(G), full_matrices=False)
        _, sr, Yh = np.linalg.svd(np.vstack(G), full_matrices=False)
        W1 = ZW.conj() @ U
        V1 = ZV @ Yh.conj().T
    report = SvdReport(sl, sr, shape_left=shape_left, shape_right=shape_right)
    report.numerical_rank_at = {
        tol: (numerical_rank(sl, tol), numerical_rank(sr, tol)) for tol in RANK_TOLS}
    return report, W1, V1


def choose_order(report: SvdReport, order: int | None = None, rel_tol: float | None = None) -> int:
    """Pick the reduced order: a fixed ``order`` clamped to the available
    rank, or the count of ``sigma_i / sigma_1 > rel_tol``.

    In tolerance mode the count is taken on both stacks; if they disagree
    the smaller one wins and the discrepancy is logged in ``report``.
    """
    if (order is None) == (rel_tol is None):
        raise ValueError("give exactly one of order or rel_tol")
    if order is not None:
        if order <= 0:
            raise ValueError("order must be positive")
        r = min(int(order), report.available_rank)
        report.truncation_mode = "fixed-order"
    else:
        if not 0.0 < rel_tol < 1.0:
            raise ValueError("rel_tol must lie in (0, 1)")
        r_left = numerical_rank(report.sv_left, rel_tol)
        r_right = numerical_rank(report.sv_right, rel_tol)
        report.numerical_rank_at.setdefault(rel_tol, (r_left, r_right))
        r = min(r_left, r_right)
        if r_left != r_right:
            report.warnings.append(
                f"stack ranks differ at rel_tol={rel_tol:g}: left {r_left}, right {r_right}; using {r}")
        report.truncation_mode = "relative-tol"
    report.chosen_r = r
    return r


@dataclass(frozen=True)
class ReducedSystem(StructuredSystem):
    """A structured system obtained by projection, with its provenance."""

    Vp: np.ndarray | None = field(default=None, compare=False, repr=False)
    Wp: np.ndarray | None = field(default=None, compare=False, repr=False)
    report: SvdReport | None = field(default=None, compare=False, repr=False)
    warnings: tuple = field(default=(), compare=False)


def project(sys: StructuredSystem, Vp: np.ndarray, Wp: np.ndarray, name: str | None = None,
            **extra) -> ReducedSystem:
    """Petrov-Galerkin projection of every term, keeping coefficients."""
    def dense(x):
        return np.asarray(x)

    k = [StructuredTerm(t.coeff, dense(_project_matrix(Wp, t.matrix, Vp))) for t in sys.k_terms]
    b = [StructuredTerm(t.coeff, dense(Wp.T @ (t.matrix.toarray() if sp.issparse(t.matrix) else t.matrix)))
         for t in sys.b_terms]
    c = [StructuredTerm(t.coeff, dense((t.matrix @ Vp))) for t in sys.c_terms]
    return ReducedSystem(k, b, c, d=sys.d, name=name or f"{sys.name}-reduced",
                         freq_range=sys.freq_range, param_box=sys.param_box,
                         meta=dict(sys.meta, order=Vp.shape[1]),
                         Vp=Vp, Wp=Wp, **extra)


def probe_reduced(sys: StructuredSystem, npoints: int = 5, seed: int = 0) -> list[str]:
    """Factorise the reduced ``K`` at a few points of the declared domain."""
    freqs = log_freq_grid(sys.freq_range[0], sys.freq_range[1], max(npoints, 1))
    rng = PinnedRNG(seed)
    notes = []
    for k in range(npoints):
        s = freqs[int(rng.uniform(1)[0] * len(freqs)) % len(freqs)]
        q = tuple(lo + u * (hi - lo) for (lo, hi), u in zip(sys.param_box, rng.uniform(sys.d)))
        if len(q) < sys.d:
            q = (0.0,) * sys.d
        try:
            factorize(sys, s, q)
        except (SingularSystemError, CoefficientError) as exc:
            notes.append(f"reduced K ill-conditioned at probe s={s}, p={q}: {exc}")
    return notes


def drop_reduce(sys: StructuredSystem, V, W=None, order: int | None = None,
                rel_tol: float | None = None, one_sided: bool = False,
                probe: bool = True) -> ReducedSystem:
    """Reduce ``sys`` with the DROP projection built from ``V`` and ``W``.

    ``V``/``W`` may be arrays or a :class:`ProjectionPair` passed as ``V``.
    One-sided mode ignores ``W`` and uses ``V`` on both sides.
    """
    orth = None
    if isinstance(V, ProjectionPair):
        pair = V
        V, W, orth = pair.V, pair.W, pair.orthonormalized
    if one_sided or W is None:
        W = V
    report, W1, V1 = stacked_svd(V, W, sys.k_matrices)
    report.orthonormalized = orth
    r = choose_order(report, order=order, rel_tol=rel_tol)
    if order is not None and order > r:
        report.warnings.append(f"requested order {order} exceeds available rank; using {r}")
    Vp = V @ V1[:, :r]
    # conj() makes Wp^T = W1^H W^T, the projector onto the left singular
    # directions; a no-op for real bases
    Wp = Vp if one_sided else W @ W1[:, :r].conj()
    red = project(sys, Vp, Wp)
    notes = list(report.warnings)
    if probe and r > 0:
        notes += probe_reduced(red)
    for note in notes:
        warnings.warn(note, RuntimeWarning)
    return ReducedSystem(red.k_terms, red.b_terms, red.c_terms, d=red.d, name=red.name,
                         freq_range=red.freq_range, param_box=red.param_box, meta=red.meta,
                         Vp=Vp, Wp=Wp, report=report, warnings=tuple(notes))


def minimal_realization(sys: StructuredSystem, V, W=None, rank_tol: float = FULL_RANK_TOL,
                        one_sided: bool = False) -> ReducedSystem:
    """DROP at the full numerical rank (``rank_tol`` relative) of the stacks."""
    return drop_reduce(sys, V, W, rel_tol=rank_tol, one_sided=one_sided)
