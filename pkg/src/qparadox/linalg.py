"""Dense complex linear algebra on small matrices.

Matrices and vectors are plain ``numpy`` complex128 arrays marked read-only,
so every value handed out by this module is immutable and safe to share.
Operations never modify their inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NotNormalError

UNITARY_TOL = 1e-10
NULLSPACE_TOL = 1e-9

_PHASE_FLOOR = 1e-12


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def as_matrix(m) -> np.ndarray:
    """Return a read-only complex 2-D copy of ``m``; rejects NaN/Inf."""
    arr = np.array(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return _freeze(arr)


def as_vector(v) -> np.ndarray:
    arr = np.array(v, dtype=np.complex128)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.reshape(-1)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"expected a non-empty vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return _freeze(arr)


def identity(n: int) -> np.ndarray:
    return _freeze(np.eye(n, dtype=np.complex128))


def adjoint(m) -> np.ndarray:
    m = as_matrix(m)
    return _freeze(m.conj().T.copy())


def max_norm(m) -> float:
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


def _require_square(m: np.ndarray) -> int:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m.shape[0]


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product; entry ``(i*rb + k, j*cb + l)`` is ``a[i, j] * b[k, l]``.

    Column vectors are passed as ``(n, 1)`` matrices.
    """
    return _freeze(np.kron(as_matrix(a), as_matrix(b)))


def partial_trace(rho, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Reduce a bipartite operator to subsystem ``keep`` (0 or 1)."""
    rho = as_matrix(rho)
    d0, d1 = (int(d) for d in dims)
    if d0 < 1 or d1 < 1:
        raise DimensionError(f"subsystem dimensions must be positive, got {dims}")
    if rho.shape != (d0 * d1, d0 * d1):
        raise DimensionError(
            f"operator of shape {rho.shape} does not match dims {d0}x{d1}"
        )
    t = rho.reshape(d0, d1, d0, d1)
    if keep == 0:
        out = np.einsum("ijkj->ik", t)
    elif keep == 1:
        out = np.einsum("ijil->jl", t)
    else:
        raise ValueError(f"keep must be 0 or 1, got {keep!r}")
    return _freeze(np.ascontiguousarray(out))


def is_unitary(m, tol: float = UNITARY_TOL) -> bool:
    m = as_matrix(m)
    n = _require_square(m)
    if tol <= 0:
        raise ValueError("tol must be positive")
    return max_norm(m.conj().T @ m - np.eye(n)) <= tol


def is_normal(m, tol: float = UNITARY_TOL) -> bool:
    m = as_matrix(m)
    _require_square(m)
    mh = m.conj().T
    return max_norm(mh @ m - m @ mh) <= tol


def phase_normalize(v) -> np.ndarray:
    """Rotate the global phase so the first nonzero component is real and positive."""
    v = np.array(v, dtype=np.complex128)
    scale = float(np.max(np.abs(v))) if v.size else 0.0
    if scale == 0.0:
        return _freeze(v)
    for idx, x in enumerate(v):
        r = abs(x)
        if r > _PHASE_FLOOR * scale:
            v = v * (r / x)
            # real by construction; drop the rounding residue
            v[idx] = v[idx].real
            break
    return _freeze(v)


def _gram_schmidt(vectors: list[np.ndarray], drop_tol: float) -> list[np.ndarray]:
    basis: list[np.ndarray] = []
    for v in vectors:
        w = np.array(v, dtype=np.complex128)
        # two passes of modified Gram-Schmidt keep orthogonality near machine epsilon
        for _ in range(2):
            for q in basis:
                w = w - np.vdot(q, w) * q
        nrm = np.linalg.norm(w)
        if nrm > drop_tol:
            basis.append(w / nrm)
    return basis


def nullspace(m, tol: float = NULLSPACE_TOL) -> list[np.ndarray]:
    """Orthonormal basis of the kernel of ``m`` by Gauss-Jordan elimination.

    Columns whose best available pivot is at most ``tol`` (relative to the
    largest entry, floored at 1) are treated as free. Each returned vector is
    phase-normalized. Returns ``[]`` for a trivial kernel.
    """
    m = as_matrix(m)
    if tol <= 0:
        raise ValueError("tol must be positive")
    rows, cols = m.shape
    a = np.array(m, dtype=np.complex128)
    thresh = tol * max(1.0, max_norm(a))

    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        p = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[p, c]) <= thresh:
            continue
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] = a[r] / a[r, c]
        for i in range(rows):
            if i != r and a[i, c] != 0:
                a[i] = a[i] - a[i, c] * a[r]
        pivots.append(c)
        r += 1

    free = [c for c in range(cols) if c not in pivots]
    raw = []
    for f in free:
        v = np.zeros(cols, dtype=np.complex128)
        v[f] = 1.0
        for i, pc in enumerate(pivots):
            v[pc] = -a[i, f]
        raw.append(v)
    return [phase_normalize(v) for v in _gram_schmidt(raw, drop_tol=1e-14)]


def _orthogonal_complement_2(v: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(v[1]), np.conj(v[0])], dtype=np.complex128)


def eigensystem_2x2(m, tol: float = UNITARY_TOL) -> list[tuple[complex, np.ndarray]]:
    """Closed-form eigenpairs of a normal 2x2 matrix.

    Eigenvalues are roots of the characteristic quadratic. Pairs come back in
    descending order of real part, then of imaginary part; eigenvectors are
    unit, mutually orthogonal and phase-normalized.
    """
    m = as_matrix(m)
    if m.shape != (2, 2):
        raise DimensionError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not is_normal(m, tol):
        raise NotNormalError("eigensystem_2x2 requires a normal matrix")
    (a, b), (c, d) = m
    mean = (a + d) / 2
    disc = np.sqrt(((a - d) / 2) ** 2 + b * c)
    lam1, lam2 = complex(mean + disc), complex(mean - disc)

    if abs(lam1 - lam2) <= tol:
        # a normal matrix with a double eigenvalue is a multiple of the identity
        lam = complex(mean)
        e0 = np.array([1, 0], dtype=np.complex128)
        e1 = np.array([0, 1], dtype=np.complex128)
        return [(lam, _freeze(e0)), (lam, _freeze(e1))]

    # of the two rows of (m - lam1 I), the larger one gives the better-conditioned vector
    cand_top = np.array([b, lam1 - a], dtype=np.complex128)
    cand_bot = np.array([lam1 - d, c], dtype=np.complex128)
    v1 = cand_top if np.linalg.norm(cand_top) >= np.linalg.norm(cand_bot) else cand_bot
    v1 = v1 / np.linalg.norm(v1)
    v2 = _orthogonal_complement_2(v1)

    pairs = [(lam1, v1), (lam2, v2)]

    def before(x: complex, y: complex) -> bool:
        if abs(x.real - y.real) > tol:
            return x.real > y.real
        return x.imag > y.imag

    if not before(lam1, lam2):
        pairs.reverse()
    return [(lam, phase_normalize(v)) for lam, v in pairs]
