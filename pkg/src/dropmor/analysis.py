"""Verification and diagnostics for reduced structured systems."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .drop import ReducedSystem, numerical_rank, project
from .sampling import SampleSet
from .system import (EPS, CoefficientError, SingularSystemError, StructuredSystem, _dense,
                     assemble, factorize, transfer)
from .expr import Sym

_FAIL = (SingularSystemError, CoefficientError)


# ------------------------------------------------------------ interpolation


@dataclass
class PointCheck:
    index: int
    sigma: complex
    param: tuple
    residual: float
    passed: bool
    note: str = ""


@dataclass
class CheckReport:
    kind: str
    tol: float
    points: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(pt.passed for pt in self.points)

    @property
    def residuals(self) -> np.ndarray:
        return np.array([pt.residual for pt in self.points])

    @property
    def failures(self) -> list:
        return [pt for pt in self.points if not pt.passed]


def _tangential(H, pt):
    if pt.right_dir is not None:
        H = H @ pt.right_dir[:, None]
    if pt.left_dir is not None:
        H = pt.left_dir[None, :] @ H
    return H


def _check_dims(sys, red):
    if (sys.m, sys.p, sys.d) != (red.m, red.p, red.d):
        raise ValueError(
            f"system (m={sys.m}, p={sys.p}, d={sys.d}) and reduction "
            f"(m={red.m}, p={red.p}, d={red.d}) do not match")


def verify_interpolation(sys: StructuredSystem, red: StructuredSystem, samples: SampleSet,
                         tol: float = 1e-8) -> CheckReport:
    """Relative residual ``|H - H_r| / (1 + |H|)`` at every sample point.

    With tangential directions the compared values are ``c^T H b``.
    """
    _check_dims(sys, red)
    rep = CheckReport("interpolation", tol)
    for k, pt in enumerate(samples):
        try:
            H = _tangential(transfer(sys, pt.sigma, pt.param), pt)
        except _FAIL as exc:
            rep.points.append(PointCheck(k, pt.sigma, pt.param, math.inf, False, f"full: {exc}"))
            continue
        try:
            Hr = _tangential(transfer(red, pt.sigma, pt.param), pt)
        except _FAIL as exc:
            rep.points.append(PointCheck(k, pt.sigma, pt.param, math.inf, False, f"reduced: {exc}"))
            continue
        res = np.linalg.norm(H - Hr, 2) / (1.0 + np.linalg.norm(H, 2))
        rep.points.append(PointCheck(k, pt.sigma, pt.param, float(res), bool(res <= tol)))
    return rep


def fd_step(x: complex) -> float:
    return 1e-4 * max(abs(x), 1.0)


def _derivatives(sys, s, q):
    """Central differences of H in s and in each parameter."""
    h = fd_step(s)
    out = [(transfer(sys, s + h, q) - transfer(sys, s - h, q)) / (2 * h)]
    for j in range(sys.d):
        hp = fd_step(q[j])
        qp = list(q); qp[j] += hp
        qm = list(q); qm[j] -= hp
        out.append((transfer(sys, s, qp) - transfer(sys, s, qm)) / (2 * hp))
    return out


def verify_hermite(sys: StructuredSystem, red: StructuredSystem, samples: SampleSet,
                   tol: float = 1e-5) -> CheckReport:
    """Compare finite-difference derivatives of ``H`` and ``H_r`` in ``s`` and ``p``.

    Step ``h = 1e-4 * max(|x|, 1)``; the O(h^2) stencil error means ``tol``
    should not go below about 1e-5.  The residual is the worst relative
    mismatch over the ``1 + d`` derivative directions, each normalised by
    ``|dH| + eps |H| / h`` so derivatives at rounding level cannot blow it up.
    """
    _check_dims(sys, red)
    rep = CheckReport("hermite", tol)
    for k, pt in enumerate(samples):
        try:
            H = _tangential(transfer(sys, pt.sigma, pt.param), pt)
            dH = [_tangential(D, pt) for D in _derivatives(sys, pt.sigma, pt.param)]
            dHr = [_tangential(D, pt) for D in _derivatives(red, pt.sigma, pt.param)]
        except _FAIL as exc:
            rep.points.append(PointCheck(k, pt.sigma, pt.param, math.inf, False,
                                         f"stencil hits a singular point: {exc}"))
            continue
        worst = 0.0
        steps = [fd_step(pt.sigma)] + [fd_step(x) for x in pt.param]
        for a, b, h in zip(dH, dHr, steps):
            scale = np.linalg.norm(a, 2) + EPS * np.linalg.norm(H, 2) / h
            if scale == 0:
                continue
            worst = max(worst, float(np.linalg.norm(a - b, 2) / scale))
        rep.points.append(PointCheck(k, pt.sigma, pt.param, worst, worst <= tol))
    return rep


# ------------------------------------------------------------ frequency sweeps


@dataclass
class ErrorReport:
    omegas: np.ndarray          # (F,)
    params: list                # P parameter vectors
    H_norm: np.ndarray          # (F, P) spectral norm of H
    abs_err: np.ndarray         # (F, P), NaN where a solve failed
    rel_err: np.ndarray
    l2_err: float

    @property
    def max_abs(self) -> float:
        return float(np.nanmax(self.abs_err)) if self.abs_err.size else 0.0

    @property
    def max_rel(self) -> float:
        return float(np.nanmax(self.rel_err)) if self.rel_err.size else 0.0

    @property
    def n_failed(self) -> int:
        return int(np.isnan(self.abs_err).sum())

    def rows(self):
        """CSV rows ``omega, param_index, H_norm, abs_err, rel_err`` (omega fastest)."""
        for j in range(len(self.params)):
            for i, w in enumerate(self.omegas):
                yield (w, j, self.H_norm[i, j], self.abs_err[i, j], self.rel_err[i, j])

    def summary(self) -> dict:
        return dict(max_abs=self.max_abs, max_rel=self.max_rel, l2_err=self.l2_err,
                    n_freq=int(self.omegas.size), n_param=len(self.params),
                    n_failed=self.n_failed)


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.zeros_like(x, dtype=float)
    if x.size > 1:
        dx = np.diff(x)
        w[:-1] += dx / 2
        w[1:] += dx / 2
    return w


def sweep_error(sys: StructuredSystem, red: StructuredSystem, freqs, params=None) -> ErrorReport:
    """Pointwise spectral-norm errors on ``freqs x params``.

    ``l2_err`` is a grid-quadrature norm: the trapezoid rule for
    ``sqrt((1/pi) int |H - H_r|_F^2 d omega)`` over the sampled band
    (both signs of omega), maximised over the parameter samples.  It is not
    the true H2 norm.
    """
    _check_dims(sys, red)
    freqs = [complex(s) for s in freqs]
    params = [()] if params is None else [tuple(q) for q in params]
    if not freqs or not params:
        raise ValueError("sweep grid is empty")
    F, P = len(freqs), len(params)
    Hn = np.full((F, P), np.nan)
    abs_err = np.full((F, P), np.nan)
    fro2 = np.full((F, P), np.nan)
    for j, q in enumerate(params):
        for i, s in enumerate(freqs):
            try:
                H = transfer(sys, s, q)
                E = H - transfer(red, s, q)
            except _FAIL:
                continue
            Hn[i, j] = np.linalg.norm(H, 2)
            abs_err[i, j] = np.linalg.norm(E, 2)
            fro2[i, j] = np.linalg.norm(E) ** 2
    reg = EPS * (np.nanmax(Hn) if np.any(np.isfinite(Hn)) else 1.0)
    rel_err = abs_err / (Hn + reg)
    omegas = np.array([s.imag for s in freqs])
    w = _trapezoid_weights(omegas)
    l2 = 0.0
    for j in range(P):
        col = np.nan_to_num(fro2[:, j])
        l2 = max(l2, math.sqrt(max(float(w @ col) / math.pi, 0.0)))
    return ErrorReport(omegas, params, Hn, abs_err, rel_err, l2)


# ------------------------------------------------------------ rank diagnostics


def _unit_columns(M: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(M, axis=0)
    return M[:, nrm > 0] / nrm[nrm > 0]


def loewner_rank(V: np.ndarray, W: np.ndarray, k_matrices, tol: float = 1e-10) -> tuple[int, int]:
    """Numerical ranks of ``[W^T A_1 V, ...]`` and of its vertical stack.

    Columns of ``V`` and ``W`` are scaled to unit norm first.  That leaves
    the exact rank alone but stops one dominant sample from setting
    ``sigma_max``, which would otherwise let deleting it raise the count.
    """
    if V.shape[1] == 0 or W.shape[1] == 0:
        return 0, 0
    V = _unit_columns(V)
    W = _unit_columns(W)
    blocks = [np.asarray(W.T @ (A @ V)) for A in k_matrices]
    sl = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    sr = np.linalg.svd(np.vstack(blocks), compute_uv=False)
    return numerical_rank(sl, tol), numerical_rank(sr, tol)


def kalman_subspace(A, B, n: int | None = None, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of ``range[B, AB, ..., A^{n-1} B]``.

    Block Arnoldi with two passes of classical Gram-Schmidt; new directions
    below ``tol`` times the running scale are deflated.
    """
    A = A.toarray() if sp.issparse(A) else np.asarray(A)
    B = np.atleast_2d(_dense(B))
    if B.shape[0] != A.shape[0]:
        B = B.T
    n = A.shape[0] if n is None else n
    scale = max(np.linalg.norm(B, 2), np.finfo(float).tiny)
    Q = np.zeros((A.shape[0], 0), dtype=np.result_type(A, B, float))

    def extend(Q, X):
        for col in X.T:
            v = col.astype(Q.dtype)
            ref = np.linalg.norm(v)
            for _ in range(2):
                v = v - Q @ (Q.conj().T @ v)
            nv = np.linalg.norm(v)
            if nv > tol * max(ref, scale) and Q.shape[1] < A.shape[0]:
                Q = np.hstack([Q, (v / nv)[:, None]])
        return Q

    Q = extend(Q, B)
    block = Q.copy()
    for _ in range(1, n):
        if block.shape[1] == 0:
            break
        before = Q.shape[1]
        Q = extend(Q, A @ block)
        block = Q[:, before:]
        scale = 1.0
    return Q


def principal_angles(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return sla.subspace_angles(X, Y)


# ------------------------------------------------------------ quadrature Gramians

GRAMIAN_CAP = 600


class IndefiniteGramianError(ValueError):
    pass


def _s_matrix(sys: StructuredSystem):
    """Matrix multiplying the plain ``s`` coefficient in ``K`` (identity if absent)."""
    for t in sys.k_terms:
        if t.coeff.ast == Sym("s"):
            return t.matrix
    return sp.identity(sys.n, format="csr")


@dataclass
class Gramians:
    P: np.ndarray
    Q: np.ndarray
    omegas: np.ndarray


def gramian_quadrature(sys: StructuredSystem, omegas, p=(), cap: int = GRAMIAN_CAP) -> Gramians:
    """Frequency-quadrature reachability/observability Gramians.

    ``P = (1/2pi) int K^{-1} B B^* K^{-*} d omega`` and
    ``Q = (1/2pi) int K^{-*} C^* C K^{-1} d omega`` over ``+-omegas`` with
    trapezoid weights on the given (typically log-spaced) nodes.  The
    ``-omega`` half is taken as the conjugate for real-data systems and
    computed explicitly otherwise.
    """
    if sys.n > cap:
        raise ValueError(f"n={sys.n} exceeds the dense Gramian cap {cap}")
    omegas = np.sort(np.asarray(omegas, dtype=float))
    w = _trapezoid_weights(omegas) / (2 * math.pi)
    real_data = sys.is_real
    xs, ys = [], []
    for om, wk in zip(omegas, w):
        if wk == 0:
            continue
        for s in ([1j * om] if real_data else [1j * om, -1j * om]):
            lu = factorize(sys, s, p)
            X = lu.solve(assemble(sys, "B", s, p))
            # K^{-*} C^* = conj(K^{-T} C^T)
            Y = lu.solve(_dense(assemble(sys, "C", s, p)).T, transpose=True).conj()
            xs.append(math.sqrt(wk) * X)
            ys.append(math.sqrt(wk) * Y)
    Zp = np.hstack(xs) if xs else np.zeros((sys.n, 0), complex)
    Zq = np.hstack(ys) if ys else np.zeros((sys.n, 0), complex)
    if real_data:
        # the -omega half contributes the complex conjugate
        Zp = np.hstack([Zp.real, Zp.imag]) * math.sqrt(2)
        Zq = np.hstack([Zq.real, Zq.imag]) * math.sqrt(2)
    P = Zp @ Zp.conj().T
    Q = Zq @ Zq.conj().T
    P = (P + P.conj().T) / 2
    Q = (Q + Q.conj().T) / 2
    for name, G in (("P", P), ("Q", Q)):
        lam = np.linalg.eigvalsh(G)
        tr = max(abs(np.trace(G)), np.finfo(float).tiny)
        if lam.size and lam[0] < -1e-10 * tr:
            raise IndefiniteGramianError(
                f"Gramian {name} has eigenvalue {lam[0]:.3e} (trace {tr:.3e})")
    return Gramians(P, Q, omegas)


def _psd_factor(G: np.ndarray) -> np.ndarray:
    lam, U = np.linalg.eigh(G)
    keep = lam > max(lam.max(), 0) * G.shape[0] * EPS
    return U[:, keep] * np.sqrt(lam[keep])


def bt_compare(sys: StructuredSystem, r: int, omegas, p=(), gramians: Gramians | None = None):
    """Square-root balanced truncation from quadrature Gramians.

    With ``P = R R^*``, ``Q = L L^*`` and ``L^* E R = U S Y^*`` (``E`` the
    matrix of the ``s``-term), the bases ``V = R Y_r S_r^{-1/2}`` and
    ``W = conj(L U_r S_r^{-1/2})`` project every structured term.  Returns
    the reduced system and the Hankel-type singular values ``S``.
    """
    g = gramians or gramian_quadrature(sys, omegas, p)
    R = _psd_factor(g.P)
    L = _psd_factor(g.Q)
    E = _s_matrix(sys)
    M = L.conj().T @ np.asarray(E @ R)
    U, S, Yh = np.linalg.svd(M, full_matrices=False)
    r = min(r, int(np.count_nonzero(S > S[0] * EPS * max(M.shape))))
    scale = 1.0 / np.sqrt(S[:r])
    V = (R @ Yh[:r].conj().T) * scale
    W = (L @ U[:, :r]).conj() * scale
    if sys.is_real:
        V, W = V.real, W.real
    red = project(sys, V, W, name=f"{sys.name}-bt")
    return red, S
