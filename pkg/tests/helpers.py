"""Random test systems and independent oracles (no dropmor numerics inside)."""
import numpy as np

from dropmor.system import StructuredSystem, StructuredTerm


def first_order(A, B, C, E=None):
    """``K(s) = s E - A`` with constant ``B`` and ``C``."""
    n = A.shape[0]
    E = np.eye(n) if E is None else E
    return StructuredSystem([StructuredTerm.of("s", E), StructuredTerm.of("-1", A)],
                            [StructuredTerm.of("1", B)], [StructuredTerm.of("1", C)],
                            freq_range=(1e-2, 1e2))


def stable_block(rng, k):
    if k == 0:
        return np.zeros((0, 0))
    A = np.diag(-rng.uniform(0.5, 5.0, k)) + 0.3 * rng.standard_normal((k, k))
    top = np.linalg.eigvals(A).real.max()
    if top > -0.1:
        A -= (top + 0.5) * np.eye(k)
    return A


def random_stable(rng, n, m=1, p=1):
    return stable_block(rng, n), rng.standard_normal((n, m)), rng.standard_normal((p, n))


def kalman_structured(rng, n, k):
    """SISO first-order system whose minimal part has order ``k``.

    Kalman-canonical blocks (reachable+observable, reachable only,
    observable only, neither) are coupled as the decomposition allows and
    then mixed by a random orthogonal similarity.
    """
    rest = n - k
    a = int(rng.integers(0, rest + 1))
    b = int(rng.integers(0, rest - a + 1))
    sizes = [k, a, b, rest - a - b]
    off = np.cumsum([0] + sizes)

    def blk(i):
        return slice(off[i], off[i + 1])

    A = np.zeros((n, n))
    B = np.zeros((n, 1))
    C = np.zeros((1, n))
    for i in range(4):
        A[blk(i), blk(i)] = stable_block(rng, sizes[i])
    for i, j in [(0, 2), (1, 0), (1, 2), (1, 3), (3, 2)]:
        A[blk(i), blk(j)] = 0.3 * rng.standard_normal((sizes[i], sizes[j]))
    B[blk(0)] = rng.standard_normal((k, 1))
    B[blk(1)] = rng.standard_normal((a, 1))
    C[:, blk(0)] = rng.standard_normal((1, k))
    C[:, blk(2)] = rng.standard_normal((1, b))
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q @ A @ Q.T, Q @ B, C @ Q.T


def kalman_matrix(A, B):
    """Raw ``[B, AB, ..., A^{n-1} B]`` with ``A`` rescaled to unit norm (same range)."""
    n = A.shape[0]
    As = A / np.linalg.norm(A, 2)
    cols = [B]
    for _ in range(n - 1):
        cols.append(As @ cols[-1])
    return np.hstack(cols)


def svd_rank(M, rel=1e-9):
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv > rel * sv[0])) if sv.size and sv[0] > 0 else 0


def minimal_order_oracle(A, B, C):
    """McMillan degree = rank of (observability matrix) x (reachability matrix).

    Rank is read at the widest gap in log singular values: genuine
    directions with clustered poles can sit near 1e-10 while the rounding
    floor of the raw power products sits anywhere from 1e-17 to 1e-13, so
    no fixed cut works.  A 1e-18 sentinel exposes the full-rank case.
    """
    R = kalman_matrix(A, B)
    O = kalman_matrix(A.T, C.T).T
    sv = np.linalg.svd(O @ R, compute_uv=False)
    if sv[0] == 0:
        return 0
    logs = np.log10(np.maximum(np.append(sv / sv[0], 1e-18), 1e-18))
    return int(np.argmax(-np.diff(logs))) + 1


def orth_basis(M, rel=1e-9):
    U, sv, _ = np.linalg.svd(M, full_matrices=False)
    return U[:, sv > rel * sv[0]]


def dense_transfer(A_list, coeffs, B, C):
    K = sum(c * A for c, A in zip(coeffs, A_list))
    return C @ np.linalg.inv(K) @ B
