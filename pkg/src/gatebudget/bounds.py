"""Closed-form application budgets and gate classification.

Functions taking a canonical vector expect a Weyl-chamber representative
(see :func:`gatebudget.canonical.weyl_reduce`). Predicates that the volume
estimate evaluates on millions of points also accept arrays of shape (..., 3).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .canonical import (
    QUARTER_PI,
    CanonicalVector,
    canonical_gate,
    canonical_vector,
    nonlocal_content,
    weyl_reduce,
)
from .errors import DomainError, EmptyInput
from .invariants import majorizes
from .numkernel import as_matrix, require_unitary

THREE_QUARTER_PI = 3 * np.pi / 4
INEQ_TOL = 1e-12
ZERO_SNAP = 1e-12
CEIL_SNAP = 1e-9
SWAP_CLASS = CanonicalVector(QUARTER_PI, QUARTER_PI, QUARTER_PI)
B_CLASS = CanonicalVector(QUARTER_PI, np.pi / 8, 0.0)
PE_ORACLE_THRESHOLD = 1 - 1e-4


class _Unbounded:
    """No finite number of applications suffices."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Unbounded"

    __str__ = __repr__

    def __reduce__(self):
        return (_Unbounded, ())


UNBOUNDED = _Unbounded()


def _split(c):
    c = np.asarray(c, dtype=float)
    c3 = np.where(np.abs(c[..., 2]) <= ZERO_SNAP, 0.0, c[..., 2])
    return c[..., 0], c[..., 1], c3


def _scalar(x):
    return bool(x) if np.ndim(x) == 0 else x


def sign(x: float) -> int:
    """Sign with sign(0) = +1."""
    return 1 if x >= 0 else -1


def theorem4_margins(c):
    """The two quantities that n applications must lift to 3pi/4."""
    c1, c2, c3 = _split(c)
    return c1 + c2 - np.abs(c3), c1 - c2 - np.abs(c3) + QUARTER_PI


def theorem4_holds(c, n: int):
    """Necessary condition for n applications of ``Ud(c)`` to be universal."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    first, second = theorem4_margins(c)
    ok = (n * first >= THREE_QUARTER_PI - INEQ_TOL) & (n * second >= THREE_QUARTER_PI - INEQ_TOL)
    return _scalar(ok)


def power_measure(c):
    first, second = theorem4_margins(c)
    p = np.minimum(first, second)
    return float(p) if np.ndim(p) == 0 else p


def _snapped_ceil(ratio: float) -> int:
    nearest = round(ratio)
    if abs(ratio - nearest) <= CEIL_SNAP:
        return int(nearest)
    return math.ceil(ratio)


def min_applications(c):
    """``ceil(3pi / 4P)``, or ``UNBOUNDED`` when the power measure vanishes."""
    p = power_measure(c)
    if p <= 1e-12:
        return UNBOUNDED
    return _snapped_ceil(THREE_QUARTER_PI / p)


def controlled_u_min_applications(c1: float) -> int:
    if not 0 < c1 <= QUARTER_PI + INEQ_TOL:
        raise DomainError("controlled-U angle must lie in (0, pi/4]")
    return _snapped_ceil(THREE_QUARTER_PI / c1)


@dataclass
class ApplicationBudget:
    power: float
    min_applications: object
    per_n_feasible: list[bool]


def application_budget(c, n_max: int = 8) -> ApplicationBudget:
    return ApplicationBudget(
        power=power_measure(c),
        min_applications=min_applications(c),
        per_n_feasible=[bool(theorem4_holds(c, n)) for n in range(1, n_max + 1)],
    )


def dual_gate(c) -> CanonicalVector:
    """Class of ``Ud(c)`` times a swap-class gate, reduced to the chamber."""
    c1, c2, c3 = (float(x) for x in _split(c))
    raw = (QUARTER_PI - abs(c3), QUARTER_PI - c2, sign(c3) * (c1 - QUARTER_PI))
    return weyl_reduce(raw)[0]


def is_b_class(c, tol: float = 1e-9) -> bool:
    return bool(np.max(np.abs(np.asarray(c, dtype=float) - np.asarray(B_CLASS))) <= tol)


def theorem4_grid_scan(n: int, step: float = 1e-3) -> np.ndarray:
    """Chamber grid points satisfying the n-application necessary condition.

    The grid spacing is the largest value not exceeding ``step`` that divides
    pi/8, so the chamber vertices and the B point lie on the grid.
    """
    k = math.ceil((np.pi / 8) / step)
    h = (np.pi / 8) / k
    top = 2 * k  # pi/4 = top * h
    found = []
    for i in range(top + 1):
        j = np.arange(i + 1)
        l = np.arange(-i, i + 1)
        jj, ll = np.meshgrid(j, l, indexing="ij")
        mask = np.abs(ll) <= jj
        pts = np.stack([np.full(jj.shape, i * h), jj * h, ll * h], axis=-1)[mask]
        ok = theorem4_holds(pts, n)
        if np.any(ok):
            found.append(pts[ok])
    return np.concatenate(found) if found else np.empty((0, 3))


def corollary6_holds(c):
    c1, c2, c3 = _split(c)
    ok = (c1 + c2 - np.abs(c3) >= QUARTER_PI - INEQ_TOL) & (c1 - c2 - np.abs(c3) >= -INEQ_TOL)
    return _scalar(ok)


def concurrence(psi) -> float:
    """Concurrence ``|<psi| YY |psi*>|`` of a normalized two-qubit pure state."""
    psi = np.asarray(psi, dtype=np.complex128)
    # <psi|YY|psi*> = -2 (a00 a11 - a01 a10) up to conjugation
    return float(2.0 * abs(psi[..., 0] * psi[..., 3] - psi[..., 1] * psi[..., 2]))


def _product_states(x: np.ndarray) -> np.ndarray:
    t1, p1, t2, p2 = np.moveaxis(x, -1, 0)
    a = np.stack([np.cos(t1 / 2), np.exp(1j * p1) * np.sin(t1 / 2)], axis=-1)
    b = np.stack([np.cos(t2 / 2), np.exp(1j * p2) * np.sin(t2 / 2)], axis=-1)
    return (a[..., :, None] * b[..., None, :]).reshape(*x.shape[:-1], 4)


def _batch_concurrence(u: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = _product_states(x) @ u.T
    return 2.0 * np.abs(out[..., 0] * out[..., 3] - out[..., 1] * out[..., 2])


def max_product_entanglement(
    u, rng: np.random.Generator, restarts: int = 64, pool: int = 4096
) -> float:
    """Largest concurrence reachable by ``u`` from a product state.

    Product states are parametrized by Bloch angles of each qubit. A random
    pool is scored in one batch, then the best ``restarts`` points are refined
    by Nelder-Mead.
    """
    u = require_unitary(as_matrix(u, 4))
    x0 = rng.uniform(0.0, 2.0 * np.pi, size=(pool, 4))
    scores = _batch_concurrence(u, x0)
    best = float(np.max(scores))
    for idx in np.argsort(-scores, kind="stable")[:restarts]:
        res = minimize(
            lambda x: -_batch_concurrence(u, x),
            x0[idx],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000},
        )
        best = max(best, float(-res.fun))
        if best >= 1.0 - 1e-12:
            break
    return min(best, 1.0)


def pe_hull_margin(c):
    """Signed margin of the perfect-entangler test.

    A gate is a perfect entangler iff the origin lies in the convex hull of
    ``exp(2i lambda_k)``, lambda being its non-local content; equivalently the
    largest angular gap between those points on the circle is at most pi.
    Returns ``pi - largest_gap`` (>= 0 inside).
    """
    c1, c2, c3 = (np.asarray(x, dtype=float) for x in np.moveaxis(np.asarray(c, dtype=float), -1, 0))
    lam = np.stack([c1 + c2 - c3, c1 - c2 + c3, -c1 + c2 + c3, -c1 - c2 - c3], axis=-1)
    ang = np.sort(np.mod(2.0 * lam, 2.0 * np.pi), axis=-1)
    gaps = np.diff(ang, axis=-1)
    wrap = ang[..., :1] + 2.0 * np.pi - ang[..., -1:]
    largest = np.max(np.concatenate([gaps, wrap], axis=-1), axis=-1)
    m = np.pi - largest
    return float(m) if np.ndim(m) == 0 else m


def is_perfect_entangler(c, tol: float = 1e-9):
    return _scalar(pe_hull_margin(c) >= -tol)


def is_perfect_entangler_numeric(u, rng: np.random.Generator, restarts: int = 64) -> bool:
    return max_product_entanglement(u, rng, restarts) >= PE_ORACLE_THRESHOLD


def theorem7_slacks(gamma1: float, gamma2: float, c1: float, c2: float) -> tuple[float, float]:
    """Slacks of ``g1+g2 >= c1+c2`` and ``|g1-g2| <= c1-c2`` (>= 0 when satisfied)."""
    for name, v in (("gamma1", gamma1), ("gamma2", gamma2), ("c1", c1), ("c2", c2)):
        if not -INEQ_TOL <= v <= QUARTER_PI + INEQ_TOL:
            raise DomainError(f"{name} must lie in [0, pi/4]")
    if c1 < c2 - INEQ_TOL:
        raise DomainError("c1 must be >= c2")
    return gamma1 + gamma2 - (c1 + c2), (c1 - c2) - abs(gamma1 - gamma2)


def theorem7_necessary(gamma1: float, gamma2: float, c1: float, c2: float, tol: float = INEQ_TOL) -> bool:
    s1, s2 = theorem7_slacks(gamma1, gamma2, c1, c2)
    return s1 >= -tol and s2 >= -tol


def swap_product_class(c) -> CanonicalVector:
    """Class of ``Ud(c) * SWAP``."""
    return weyl_reduce(np.asarray(c, dtype=float) + QUARTER_PI)[0]


def target_obstructed(elementary, target, n: int, tol: float = 1e-9) -> bool:
    """True when majorization rules out reaching ``target`` in n applications.

    Checks the direct bound and the bound for the dual gate; for odd n the dual
    route reaches ``target * SWAP`` instead of ``target``.
    """
    phi_e = n * np.asarray(nonlocal_content(elementary))
    if not majorizes(phi_e, nonlocal_content(target), tol):
        return True
    phi_dual = n * np.asarray(nonlocal_content(dual_gate(elementary)))
    target_dual = target if n % 2 == 0 else swap_product_class(target)
    return not majorizes(phi_dual, nonlocal_content(target_dual), tol)


def sample_chamber(rng: np.random.Generator, count: int, batch: int = 1 << 18) -> np.ndarray:
    """Uniform samples of ``pi/4 >= c1 >= c2 >= |c3|``, shape (count, 3)."""
    if count <= 0:
        raise DomainError("count must be positive")
    out = np.empty((count, 3))
    filled = 0
    lo = np.array([0.0, 0.0, -QUARTER_PI])
    hi = np.array([QUARTER_PI, QUARTER_PI, QUARTER_PI])
    while filled < count:
        box = rng.uniform(lo, hi, size=(batch, 3))
        keep = box[(box[:, 0] >= box[:, 1]) & (box[:, 1] >= np.abs(box[:, 2]))]
        take = min(len(keep), count - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


class RegionFractions(NamedTuple):
    samples: int
    pe_fraction: float
    pe_fraction_stderr: float
    corollary6_fraction: float
    corollary6_fraction_stderr: float
    pe_and_not_corollary6_over_pe: float
    pe_and_not_corollary6_over_pe_stderr: float


def _stderr(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n) if n else float("nan")


def region_fractions(samples) -> RegionFractions:
    samples = np.asarray(samples, dtype=float).reshape(-1, 3)
    n = len(samples)
    if n == 0:
        raise EmptyInput("no samples")
    pe = np.asarray(is_perfect_entangler(samples))
    cor6 = np.asarray(corollary6_holds(samples))
    n_pe = int(pe.sum())
    pe_frac = n_pe / n
    cor6_frac = float(cor6.mean())
    ratio = float((pe & ~cor6).sum() / n_pe) if n_pe else 0.0
    return RegionFractions(
        samples=n,
        pe_fraction=pe_frac,
        pe_fraction_stderr=_stderr(pe_frac, n),
        corollary6_fraction=cor6_frac,
        corollary6_fraction_stderr=_stderr(cor6_frac, n),
        pe_and_not_corollary6_over_pe=ratio,
        pe_and_not_corollary6_over_pe_stderr=_stderr(ratio, n_pe),
    )


@dataclass
class GateClass:
    canonical: CanonicalVector
    is_local: bool
    is_swap_class: bool
    is_perfect_entangler: bool
    is_controlled_u: bool
    is_b_class: bool
    satisfies_corollary6: bool


def classify(c, tol: float = 1e-9) -> GateClass:
    c = CanonicalVector(*(float(x) for x in c))
    is_local = bool(np.max(np.abs(c)) <= tol)
    return GateClass(
        canonical=c,
        is_local=is_local,
        is_swap_class=bool(np.max(np.abs(np.asarray(c) - np.asarray(SWAP_CLASS))) <= tol),
        is_perfect_entangler=bool(is_perfect_entangler(c)),
        is_controlled_u=(not is_local) and abs(c.c2) <= tol and abs(c.c3) <= tol,
        is_b_class=is_b_class(c, tol),
        satisfies_corollary6=bool(corollary6_holds(c)),
    )


def classify_gate(u, tol: float = 1e-9) -> GateClass:
    return classify(canonical_vector(u, tol), tol)
