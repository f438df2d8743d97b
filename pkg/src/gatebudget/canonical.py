"""Canonical (KAK) decomposition of two-qubit gates.

Every two-qubit gate is written as

    U = exp(i * phase) * (post_a (x) post_b) * Ud(c1, c2, c3) * (pre_a (x) pre_b)

with ``Ud(c) = exp(i (c1 XX + c2 YY + c3 ZZ))`` and the canonical vector in the
Weyl chamber ``pi/4 >= c1 >= c2 >= |c3|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NumericalFailure
from .numkernel import (
    as_matrix,
    eig_unitary_symmetric,
    principal_angle,
    require_unitary,
)

QUARTER_PI = np.pi / 4
HALF_PI = np.pi / 2
FACE_TOL = 1e-10
DEFAULT_TOL = 1e-9

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

# Bell-state ("magic") basis. Local gates become real orthogonal matrices and
# Q^dag Ud(c) Q = diag(exp(i * MAGIC_PHASES @ c)).
MAGIC = np.array(
    [[1, 0, 0, 1j],
     [0, 1j, 1, 0],
     [0, 1j, -1, 0],
     [1, 0, 0, -1j]],
    dtype=np.complex128,
) / np.sqrt(2.0)
MAGIC_DAG = MAGIC.conj().T

# rows: eigenphase k of H_U in the magic basis; columns: coefficient of c1, c2, c3
MAGIC_PHASES = np.array(
    [[1, -1, 1],
     [1, 1, -1],
     [-1, -1, -1],
     [-1, 1, 1]],
    dtype=float,
)


class CanonicalVector(NamedTuple):
    c1: float
    c2: float
    c3: float

    def in_chamber(self, tol: float = 1e-12) -> bool:
        c1, c2, c3 = self
        return QUARTER_PI + tol >= c1 >= c2 - tol and c2 + tol >= abs(c3)


@dataclass(frozen=True)
class WeylMove:
    """One chamber symmetry applied by :func:`weyl_reduce`.

    ``shift``: ``c[axes[0]] -= count * pi/2``.
    ``flip``: negate the two coordinates in ``axes``.
    ``swap``: exchange the two coordinates in ``axes``.
    """

    kind: str
    axes: tuple[int, ...]
    count: int = 0

    def apply(self, c: list[float]) -> list[float]:
        c = list(c)
        if self.kind == "shift":
            c[self.axes[0]] -= self.count * HALF_PI
        elif self.kind == "flip":
            for k in self.axes:
                c[k] = -c[k]
        elif self.kind == "swap":
            i, j = self.axes
            c[i], c[j] = c[j], c[i]
        else:
            raise ValueError(f"unknown move {self.kind!r}")
        return c

    def locals(self) -> tuple[np.ndarray, np.ndarray, float]:
        """``(left, right, phase)`` with ``Ud(c) = e^{i phase} left Ud(c') right``.

        Here ``c' = self.apply(c)``; ``left`` and ``right`` are local 4x4 gates.
        """
        if self.kind == "shift":
            p = PAULIS[self.axes[0]]
            right = np.kron(p, p) if self.count % 2 else np.eye(4, dtype=np.complex128)
            return np.eye(4, dtype=np.complex128), right, self.count * HALF_PI
        third = ({0, 1, 2} - set(self.axes)).pop()
        p = PAULIS[third]
        if self.kind == "flip":
            g = np.kron(p, PAULI_I)
        else:
            r = np.cos(np.pi / 4) * PAULI_I - 1j * np.sin(np.pi / 4) * p
            g = np.kron(r, r)
        return g.conj().T, g, 0.0


@dataclass
class CanonicalDecomposition:
    pre_a: np.ndarray
    pre_b: np.ndarray
    post_a: np.ndarray
    post_b: np.ndarray
    canonical: CanonicalVector
    global_phase: float
    residual: float = 0.0

    def reconstruct(self) -> np.ndarray:
        return (
            np.exp(1j * self.global_phase)
            * np.kron(self.post_a, self.post_b)
            @ canonical_gate(self.canonical)
            @ np.kron(self.pre_a, self.pre_b)
        )


@dataclass(frozen=True)
class NonlocalContent:
    lam: tuple[float, float, float, float] = field(default=(0.0, 0.0, 0.0, 0.0))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.lam, dtype=dtype)

    def __iter__(self):
        return iter(self.lam)


def canonical_gate(c) -> np.ndarray:
    """``exp(i (c1 XX + c2 YY + c3 ZZ))`` for any real triple ``c``."""
    phases = MAGIC_PHASES @ np.asarray(c, dtype=float)
    return (MAGIC * np.exp(1j * phases)) @ MAGIC_DAG


def to_magic(u) -> np.ndarray:
    return MAGIC_DAG @ u @ MAGIC


def from_magic(v) -> np.ndarray:
    return MAGIC @ v @ MAGIC_DAG


def weyl_reduce(raw) -> tuple[CanonicalVector, list[WeylMove]]:
    """Move an arbitrary triple into the Weyl chamber.

    Moves are applied in a fixed order: shift into [0, pi/2), reflect into
    (-pi/4, pi/4], sort by magnitude, push any sign onto c3, then on the face
    c1 = pi/4 make c3 non-negative.
    """
    c = [float(x) for x in raw]
    moves: list[WeylMove] = []

    def do(move: WeylMove) -> None:
        nonlocal c
        c = move.apply(c)
        moves.append(move)

    for k in range(3):
        m = int(np.floor(c[k] / HALF_PI))
        if m:
            do(WeylMove("shift", (k,), m))
    for k in range(3):
        if c[k] > QUARTER_PI:
            do(WeylMove("shift", (k,), 1))
    for i in range(2):
        j = max(range(i, 3), key=lambda k: (abs(c[k]), -k))
        if j != i and abs(c[j]) > abs(c[i]):
            do(WeylMove("swap", (i, j)))
    if c[0] < 0:
        do(WeylMove("flip", (0, 1)))
    if c[1] < 0:
        do(WeylMove("flip", (1, 2)))
    if c[0] >= QUARTER_PI - FACE_TOL and c[2] < 0:
        do(WeylMove("shift", (0,), 1))
        do(WeylMove("flip", (0, 2)))
        # c1 may now exceed pi/4 by at most FACE_TOL
        c[0] = min(c[0], QUARTER_PI)
    return CanonicalVector(*c), moves


def split_local(k) -> tuple[np.ndarray, np.ndarray, float]:
    """Factor a 4x4 tensor-product unitary as ``e^{i phase} a (x) b``.

    Uses the largest-norm 2x2 block as pivot; each factor is rephased so its
    first nonzero entry is real and positive.
    """
    k = as_matrix(k, 4)
    blocks = k.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3)  # blocks[i, j] = a_ij * b
    norms = np.linalg.norm(blocks, axis=(2, 3))
    i, j = np.unravel_index(np.argmax(norms), norms.shape)
    b = blocks[i, j] / (norms[i, j] / np.sqrt(2.0))
    a = np.einsum("ijkl,kl->ij", blocks, b.conj()) / 2.0
    phase = 0.0
    for f in (a, b):
        first = f.flat[np.argmax(np.abs(f.ravel()) > 1e-12)]
        alpha = np.angle(first)
        f *= np.exp(-1j * alpha)
        phase += alpha
    return a, b, float(phase)


def reconstruction_residual(rec, u) -> float:
    """Frobenius distance after the best global-phase alignment."""
    t = np.trace(rec.conj().T @ u)
    ph = np.exp(1j * np.angle(t)) if abs(t) > 0 else 1.0
    return float(np.linalg.norm(rec * ph - u))


def _raw_angles(phases: np.ndarray) -> np.ndarray:
    """Half-phases of the squared canonical part, summing exactly to zero."""
    h = np.asarray(phases, dtype=float) / 2.0
    # det = 1 forces sum(h) = 0 mod pi; pick the branch with sum = 0 mod 2pi
    if abs(principal_angle(np.sum(h))) > HALF_PI:
        h[0] += np.pi
    h[int(np.argmax(h))] -= 2.0 * np.pi * np.round(np.sum(h) / (2.0 * np.pi))
    return h


def decompose(u, tol: float = DEFAULT_TOL) -> CanonicalDecomposition:
    """Canonical decomposition of a two-qubit unitary."""
    u = require_unitary(as_matrix(u, 4), tol)
    phase = np.angle(np.linalg.det(u)) / 4.0
    us = u * np.exp(-1j * phase)
    v = to_magic(us)
    m = v.T @ v
    m = 0.5 * (m + m.T)
    theta, basis = eig_unitary_symmetric(m, max(tol, 1e-9))
    if np.linalg.det(basis) < 0:
        basis[:, 0] = -basis[:, 0]
    h = _raw_angles(theta)
    o1 = v @ basis * np.exp(-1j * h)
    if np.max(np.abs(o1.imag)) > 1e-6:
        raise NumericalFailure("left frame is not real orthogonal")
    k1 = from_magic(o1.real.astype(np.complex128))
    k2 = from_magic(basis.T.astype(np.complex128))
    raw = MAGIC_PHASES.T @ h / 4.0

    c, moves = weyl_reduce(raw)
    for move in moves:
        left, right, alpha = move.locals()
        k1 = k1 @ left
        k2 = right @ k2
        phase += alpha

    post_a, post_b, ph1 = split_local(k1)
    pre_a, pre_b, ph2 = split_local(k2)
    dec = CanonicalDecomposition(
        pre_a=pre_a,
        pre_b=pre_b,
        post_a=post_a,
        post_b=post_b,
        canonical=c,
        global_phase=principal_angle(phase + ph1 + ph2),
    )
    dec.residual = reconstruction_residual(dec.reconstruct(), u)
    if dec.residual > tol:
        raise NumericalFailure(f"reconstruction residual {dec.residual:.3g} exceeds {tol:g}")
    return dec


def canonical_vector(u, tol: float = DEFAULT_TOL) -> CanonicalVector:
    return decompose(u, tol).canonical


def nonlocal_content(c) -> NonlocalContent:
    """Sorted eigenvalues of ``c1 XX + c2 YY + c3 ZZ``."""
    c1, c2, c3 = (float(x) for x in c)
    lam = sorted(
        (c1 + c2 - c3, c1 - c2 + c3, -c1 + c2 + c3, -c1 - c2 - c3), reverse=True
    )
    return NonlocalContent(tuple(lam))


def nonlocal_content_of(u, tol: float = DEFAULT_TOL) -> NonlocalContent:
    return nonlocal_content(canonical_vector(u, tol))
