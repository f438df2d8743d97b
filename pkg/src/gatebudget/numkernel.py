"""Dense complex linear algebra for 2x2 and 4x4 gates.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Randomness always flows through an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError, NotSymmetric, NotUnitary, NumericalFailure

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
DEGENERACY_RTOL = 1e-8


def random_source(seed: int) -> np.random.Generator:
    """Deterministic random stream for ``seed``."""
    return np.random.Generator(np.random.PCG64(seed))


def as_matrix(m, dim: int | None = None) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 4):
        raise DomainError(f"expected a 2x2 or 4x4 matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise DomainError(f"expected a {dim}x{dim} matrix, got shape {a.shape}")
    return a


def kron(a, b) -> np.ndarray:
    """Kronecker product of two one-qubit gates."""
    return np.kron(as_matrix(a, 2), as_matrix(b, 2))


def is_unitary(m, tol: float = 1e-9) -> bool:
    if tol <= 0:
        raise DomainError("tol must be positive")
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    err = m @ m.conj().T - np.eye(m.shape[0])
    return float(np.max(np.abs(err))) <= tol


def require_unitary(m, tol: float = 1e-9) -> np.ndarray:
    m = as_matrix(m)
    if not is_unitary(m, tol):
        raise NotUnitary(f"matrix is not unitary within {tol:g}")
    return m


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary of size ``dim``.

    QR of a complex Ginibre matrix, with the columns rephased so that the
    triangular factor has a positive real diagonal.
    """
    if dim not in (2, 4):
        raise DomainError("dim must be 2 or 4")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def principal_angle(theta):
    """Map angles into the principal branch (-pi, pi]."""
    t = np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    t = np.where(t == -np.pi, np.pi, t)
    return float(t) if np.ndim(t) == 0 else t


def jacobi_eigh(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a small real symmetric matrix.

    Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
    ``JACOBI_TOL`` times the matrix norm. Returns ``(w, v)`` with
    ``a = v @ diag(w) @ v.T`` and ``v`` orthogonal.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.linalg.norm(a), 1.0)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= JACOBI_TOL * scale:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = np.copysign(1.0, tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # a <- J^T a J with J the (p, q) Givens rotation
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise NumericalFailure(f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def _groups(w: np.ndarray, rtol: float) -> list[list[int]]:
    """Indices of ``w`` (any order) clustered by relative gap below ``rtol``."""
    order = np.argsort(w)
    scale = max(1.0, float(np.max(np.abs(w))))
    groups = [[int(order[0])]]
    for prev, cur in zip(order[:-1], order[1:]):
        if w[cur] - w[prev] < rtol * scale:
            groups[-1].append(int(cur))
        else:
            groups.append([int(cur)])
    return groups


def _simultaneous_basis(x: np.ndarray, y: np.ndarray, rtol: float) -> np.ndarray:
    _, b = jacobi_eigh(x)
    yb = b.T @ y @ b
    xb_diag = np.diag(b.T @ x @ b)
    for g in _groups(xb_diag, rtol):
        if len(g) > 1:
            _, vg = jacobi_eigh(yb[np.ix_(g, g)])
            b[:, g] = b[:, g] @ vg
    return b


def eig_unitary_symmetric(m, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize a unitary symmetric matrix with a real orthogonal basis.

    Returns ``(phases, basis)`` such that
    ``m = basis @ diag(exp(1j * phases)) @ basis.T``; phases lie in (-pi, pi].
    The real and imaginary parts of ``m`` are commuting real symmetric
    matrices; the first is diagonalized, then the second inside each
    degenerate eigenspace of the first.
    """
    m = as_matrix(m)
    if np.max(np.abs(m - m.T)) > tol:
        raise NotSymmetric(f"matrix is not symmetric within {tol:g}")
    if not is_unitary(m, tol):
        raise NotUnitary(f"matrix is not unitary within {tol:g}")
    x = 0.5 * (m.real + m.real.T)
    y = 0.5 * (m.imag + m.imag.T)
    # widen the grouping when near-degenerate clusters leave Y off-diagonal
    for rtol in (DEGENERACY_RTOL, 1e-6, 1e-4):
        b = _simultaneous_basis(x, y, rtol)
        d = b.T @ m @ b
        if np.max(np.abs(d - np.diag(np.diag(d)))) <= 1e-13:
            break
    else:
        # generic real combination separates every eigenvalue pair
        b = _simultaneous_basis(x + (np.sqrt(5.0) - 1.0) * 0.5 * y, y, DEGENERACY_RTOL)
        d = b.T @ m @ b
    phases = principal_angle(np.angle(np.diag(d)))
    return np.asarray(phases, dtype=float), b
