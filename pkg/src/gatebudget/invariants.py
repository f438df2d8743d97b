"""Local-equivalence invariants and majorization."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .canonical import DEFAULT_TOL, nonlocal_content_of, to_magic
from .numkernel import as_matrix, require_unitary


class MakhlinInvariants(NamedTuple):
    g1: complex
    g2: float


def makhlin(u, tol: float = DEFAULT_TOL) -> MakhlinInvariants:
    """Makhlin's local invariants ``(g1, g2)`` of a two-qubit gate.

    With ``m = V^T V`` and ``V`` the gate in the magic basis,
    ``g1 = tr(m)^2 / (16 det U)`` and ``g2 = (tr(m)^2 - tr(m^2)) / (4 det U)``.
    """
    u = require_unitary(as_matrix(u, 4), tol)
    v = to_magic(u)
    m = v.T @ v
    det = np.linalg.det(u)
    tr = np.trace(m)
    g1 = tr * tr / (16.0 * det)
    g2 = (tr * tr - np.trace(m @ m)) / (4.0 * det)
    return MakhlinInvariants(complex(g1), float(g2.real))


def invariant_distance(a: MakhlinInvariants, b: MakhlinInvariants) -> float:
    """Squared distance ``|dg1|^2 + |dg2|^2`` between two invariant pairs."""
    return abs(a.g1 - b.g1) ** 2 + (a.g2 - b.g2) ** 2


def locally_equivalent(u, v, tol: float = DEFAULT_TOL) -> bool:
    a, b = makhlin(u), makhlin(v)
    return abs(a.g1 - b.g1) <= tol and abs(a.g2 - b.g2) <= tol


def majorization_slack(y, x) -> float:
    """Smallest margin by which ``x`` is majorized by ``y``.

    The minimum over the prefix-sum gaps ``Y_k - X_k`` (k < D) and
    ``-|Y_D - X_D|``; ``x`` is majorized by ``y`` iff the slack is >= 0.
    """
    xs = np.cumsum(np.sort(np.asarray(x, dtype=float))[::-1])
    ys = np.cumsum(np.sort(np.asarray(y, dtype=float))[::-1])
    gaps = ys[:-1] - xs[:-1]
    return float(min(np.min(gaps), -abs(ys[-1] - xs[-1])))


def majorizes(y, x, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``x`` is majorized by ``y`` (additive tolerance ``tol``)."""
    return majorization_slack(y, x) >= -tol


def product_bound_slack(u1, u2, tol: float = DEFAULT_TOL) -> float:
    """Majorization slack of phi(u1 u2) under phi(u1) + phi(u2)."""
    u1 = as_matrix(u1, 4)
    u2 = as_matrix(u2, 4)
    bound = np.asarray(nonlocal_content_of(u1, tol)) + np.asarray(nonlocal_content_of(u2, tol))
    return majorization_slack(bound, nonlocal_content_of(u1 @ u2, tol))


def theorem2_check(u1, u2, tol: float = DEFAULT_TOL) -> bool:
    """Check that the non-local content of a product is majorized by the sum."""
    return product_bound_slack(u1, u2, tol) >= -tol
