"""Benchmark systems at configurable scale.

* ``demo_system``: the 3-state parametric example whose parameter rotates
  two eigenvalues; its input/output map has minimal order 2.
* ``delay_system``: ``K(s) = s E - A - exp(-tau s) A_tau`` with tridiagonal
  structure.
* ``heat_fading_memory``: finite-difference heat equation with a fading
  memory kernel, ``K(s) = s I - A + A / (s + gamma)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .system import StructuredSystem, StructuredTerm


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    size: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    freq_range: tuple[float, float] = (1e-2, 1e2)
    param_box: tuple = ()
    nfreq: int = 10
    nparam: int | None = None

    def build(self) -> StructuredSystem:
        return BUILDERS[self.name](**self.size, **self.constants)


def demo_system() -> StructuredSystem:
    A0 = np.diag([-2.0, -1.0, -2.0])
    A1 = np.array([[0.0, 1.0, 0.0],
                   [-1.0, 0.0, 0.0],
                   [1.0, 0.0, 0.0]])
    B = np.array([[1.0], [0.0], [1.0]])
    C = np.array([[1.0, 1.0, 0.0]])
    # K(s, p) = s I - A0 - p A1
    k = [StructuredTerm.of("s", np.eye(3), 1),
         StructuredTerm.of("-1", A0, 1),
         StructuredTerm.of("-p1", A1, 1)]
    return StructuredSystem(k, [StructuredTerm.of("1", B)], [StructuredTerm.of("1", C)], d=1,
                            name="demo", freq_range=(1e-4, 10.0), param_box=[(-10.0, 10.0)])


def _delay_T(n: int) -> sp.csr_matrix:
    off = np.ones(n - 1)
    T = sp.diags([off, off], [-1, 1], shape=(n, n), format="lil")
    T[0, 0] = 1.0
    T[n - 1, n - 1] = 1.0
    return T.tocsr()


def delay_system(n: int = 500, mu: float = 5.0, zeta: float = 0.01, tau: float = 1.0) -> StructuredSystem:
    """Time-delay system ``E x' = A x + A_tau x(t - tau) + B u``, ``y = B^T x``.

    ``T`` has ones on the off-diagonals and at the two corners of the main
    diagonal only; the interior of the diagonal is zero.
    """
    if n < 2:
        raise ValueError("delay system needs n >= 2")
    if tau <= 0:
        raise ValueError("tau must be positive")
    if zeta == 0:
        raise ValueError("zeta must be nonzero")
    T = _delay_T(n)
    I = sp.identity(n, format="csr")
    E = (mu * I + T).tocsr()
    A = ((1.0 / tau) * (1.0 / zeta + 1.0) * (T - mu * I)).tocsr()
    A_tau = ((1.0 / tau) * (1.0 / zeta - 1.0) * (T - mu * I)).tocsr()
    B = sp.csr_matrix((np.ones(2), ([0, 1], [0, 0])), shape=(n, 1))
    k = [StructuredTerm.of("s", E),
         StructuredTerm.of("-1", A),
         StructuredTerm.of(f"-exp(-{float(tau)!r}*s)", A_tau)]
    return StructuredSystem(k, [StructuredTerm.of("1", B)], [StructuredTerm.of("1", B.T)],
                            name="delay", freq_range=(1e-2, 1e4),
                            meta=dict(n=n, mu=mu, zeta=zeta, tau=tau))


def laplacian_2d(grid_k: int) -> sp.csr_matrix:
    """5-point Dirichlet Laplacian on a ``grid_k x grid_k`` interior mesh of the unit square."""
    h = 1.0 / (grid_k + 1)
    main = -2.0 * np.ones(grid_k)
    off = np.ones(grid_k - 1)
    L1 = sp.diags([off, main, off], [-1, 0, 1], format="csr")
    I = sp.identity(grid_k, format="csr")
    return ((sp.kron(I, L1) + sp.kron(L1, I)) / h**2).tocsr()


def heat_fading_memory(grid_k: int = 128, gamma: float = 1.05) -> StructuredSystem:
    """Heat equation with fading memory on (0,1)^2.

    Node ``(i, j)`` sits at ``(i h, j h)`` with ``h = 1/(grid_k+1)`` and
    x-index fastest.  ``B`` is the indicator of nodes in the control set
    ``[0.15, 0.25] x [0.2, 0.3]``; ``C`` integrates over the domain with
    weights ``h^2``.
    """
    if grid_k < 4:
        raise ValueError("grid_k must be at least 4")
    n = grid_k * grid_k
    h = 1.0 / (grid_k + 1)
    A = laplacian_2d(grid_k)
    x = h * np.arange(1, grid_k + 1)
    X, Y = np.meshgrid(x, x)  # X varies along rows -> x-index fastest in ravel
    tol = 1e-12
    inside = ((X >= 0.15 - tol) & (X <= 0.25 + tol) & (Y >= 0.2 - tol) & (Y <= 0.3 + tol)).ravel()
    if not inside.any():
        raise ValueError(f"grid_k={grid_k} puts no node inside the control set")
    B = sp.csr_matrix(inside.astype(float)[:, None])
    C = sp.csr_matrix(np.full((1, n), h * h))
    I = sp.identity(n, format="csr")
    k = [StructuredTerm.of("s", I),
         StructuredTerm.of("-1", A),
         StructuredTerm.of(f"1/(s+{float(gamma)!r})", A)]
    return StructuredSystem(k, [StructuredTerm.of("1", B)], [StructuredTerm.of("1", C)],
                            name="heat", freq_range=(1e-2, 1e2),
                            meta=dict(grid_k=grid_k, gamma=gamma))


BUILDERS = {
    "demo": demo_system,
    "delay": delay_system,
    "heat": heat_fading_memory,
}

DEFAULTS = {
    "demo": BenchmarkSpec("demo", freq_range=(1e-4, 10.0), param_box=((-10.0, 10.0),),
                          nfreq=10, nparam=10),
    "delay": BenchmarkSpec("delay", size=dict(n=500), constants=dict(mu=5.0, zeta=0.01, tau=1.0),
                           freq_range=(1e-2, 1e4), nfreq=1000),
    "heat": BenchmarkSpec("heat", size=dict(grid_k=128), constants=dict(gamma=1.05),
                          freq_range=(1e-2, 1e2), nfreq=100),
}


def load_system(manifest_path) -> StructuredSystem:
    """Load a user model from a manifest (see :mod:`dropmor.io`)."""
    from .io import load_system as _load
    return _load(manifest_path)
