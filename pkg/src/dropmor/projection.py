"""Interpolatory projection bases.

``build_V`` stacks ``K(sigma_j, p_j)^{-1} B(sigma_j, p_j)`` column blocks and
``build_W`` stacks ``K(sigma_j, p_j)^{-T} C(sigma_j, p_j)^T``; note the plain
transpose.  Each sample costs one factorisation of ``K``, shared between
both bases by :func:`build_VW`.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .sampling import SampleSet
from .system import (CoefficientError, SingularSystemError, StructuredSystem, _dense,
                     assemble, factorize)

DROP_TOL = 1e-12


@dataclass(frozen=True)
class ProjectionPair:
    V: np.ndarray
    W: np.ndarray
    orthonormalized: bool = False
    realified: bool = False
    samples: SampleSet | None = field(default=None, compare=False)
    dropped: tuple[int, ...] = ()


def _right_block(sys, lu, pt):
    rhs = _dense(assemble(sys, "B", pt.sigma, pt.param))
    if pt.right_dir is not None:
        rhs = rhs @ pt.right_dir[:, None]
    return lu.solve(rhs)


def _left_block(sys, lu, pt):
    rhs = _dense(assemble(sys, "C", pt.sigma, pt.param)).T
    if pt.left_dir is not None:
        rhs = rhs @ pt.left_dir[:, None]
    return lu.solve(rhs, transpose=True)


def _build(sys: StructuredSystem, samples: SampleSet, want_v: bool, want_w: bool):
    vcols, wcols, dropped = [], [], []
    for k, pt in enumerate(samples):
        try:
            lu = factorize(sys, pt.sigma, pt.param)
        except (SingularSystemError, CoefficientError) as exc:
            warnings.warn(f"dropping sample {k} (s={pt.sigma}, p={pt.param}): {exc}",
                          RuntimeWarning)
            dropped.append(k)
            continue
        if want_v:
            vcols.append(_right_block(sys, lu, pt))
        if want_w:
            wcols.append(_left_block(sys, lu, pt))
    V = np.hstack(vcols) if vcols else np.zeros((sys.n, 0), dtype=complex)
    W = np.hstack(wcols) if wcols else np.zeros((sys.n, 0), dtype=complex)
    return V, W, tuple(dropped)


def build_V(sys: StructuredSystem, samples: SampleSet) -> np.ndarray:
    return _build(sys, samples, True, False)[0]


def build_W(sys: StructuredSystem, samples: SampleSet) -> np.ndarray:
    return _build(sys, samples, False, True)[1]


def build_VW(sys: StructuredSystem, samples: SampleSet):
    """Both raw bases plus the indices of samples dropped at singular points."""
    return _build(sys, samples, True, True)


def split_real(M: np.ndarray) -> np.ndarray:
    """``[Re M, Im M]``: a real spanning set of the real span of ``M``, scales kept."""
    M = np.asarray(M)
    if not np.iscomplexobj(M):
        return M.astype(float)
    im = M.imag
    keep = np.any(im != 0, axis=0)
    return np.hstack([M.real, im[:, keep]])


def orthonormalize(M: np.ndarray, drop_tol: float = DROP_TOL) -> np.ndarray:
    """Orthonormal basis of ``range(M)`` from the SVD, dropping directions
    whose singular value is at most ``drop_tol * sigma_max``."""
    if drop_tol < 0:
        raise ValueError("drop_tol must be nonnegative")
    M = np.asarray(M)
    if M.shape[1] == 0:
        return M.copy()
    U, sv, _ = np.linalg.svd(M, full_matrices=False)
    if sv.size == 0 or sv[0] == 0:
        return np.zeros((M.shape[0], 0), dtype=M.dtype)
    keep = sv > drop_tol * sv[0]
    return U[:, keep]


def realify(M: np.ndarray, drop_tol: float = DROP_TOL) -> np.ndarray:
    """Orthonormal real basis of ``span_R{Re M, Im M}``."""
    return orthonormalize(split_real(M), drop_tol)


def projection_pair(sys: StructuredSystem, samples: SampleSet, *, realify_bases: bool | None = None,
                    orthonormal: bool = False, drop_tol: float = DROP_TOL,
                    one_sided: bool = False) -> ProjectionPair:
    """Build ``V`` and ``W`` and post-process them.

    Realification defaults to on for systems with real data.  With
    ``orthonormal=False`` the bases keep the sample-dependent column scales
    (only ``[Re, Im]`` splitting is applied), which is what makes the
    stacked singular values of :func:`dropmor.drop.stacked_svd` decay with
    dominance.  In one-sided mode ``W`` is a copy of ``V``.
    """
    if realify_bases is None:
        realify_bases = sys.is_real
    V, W, dropped = build_VW(sys, samples)
    if one_sided:
        W = V
    if realify_bases:
        V, W = split_real(V), split_real(W)
    if orthonormal:
        V, W = orthonormalize(V, drop_tol), orthonormalize(W, drop_tol)
    return ProjectionPair(V, W, orthonormal, realify_bases, samples, dropped)
