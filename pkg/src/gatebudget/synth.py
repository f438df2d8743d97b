"""Numerical search for local-gate interleavings.

A circuit with n applications of a fixed two-qubit gate E has the shape
``K_n E K_{n-1} ... K_1 E K_0`` with every ``K_j = a_j (x) b_j`` local.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .bounds import target_obstructed
from .canonical import DEFAULT_TOL, MAGIC, MAGIC_DAG, canonical_vector, decompose
from .invariants import makhlin
from .numkernel import as_matrix, haar_unitary, random_source, require_unitary

log = logging.getLogger(__name__)

SUCCESS_TOL = 1e-6
OBSTRUCTION_FLOOR = 1e-3
POLISH_TARGET = 1e-24


@dataclass
class SynthesisProblem:
    elementary: np.ndarray
    target: np.ndarray
    applications: int
    restarts: int = 50
    max_iterations: int = 2000
    objective_tolerance: float = SUCCESS_TOL
    seed: int = 0

    def __post_init__(self):
        if self.applications < 1:
            raise ValueError("applications must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.objective_tolerance <= 0:
            raise ValueError("objective_tolerance must be positive")


@dataclass
class SynthesisResult:
    locals: list[tuple[np.ndarray, np.ndarray]]
    residual: float
    invariant_residual: float
    iterations_used: int
    converged: bool
    best_restart: int = 0
    restart_residuals: list[float] = field(default_factory=list)


def su2(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """``Rz(alpha) Ry(beta) Rz(gamma)``."""
    ea, eg = np.exp(-0.5j * alpha), np.exp(-0.5j * gamma)
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    return np.array(
        [[ea * eg * c, -ea * eg.conjugate() * s],
         [ea.conjugate() * eg * s, ea.conjugate() * eg.conjugate() * c]]
    )


def assemble(elementary, locals) -> np.ndarray:
    """``K_n E ... E K_0`` for ``locals = [(a_0, b_0), ..., (a_n, b_n)]``."""
    e = as_matrix(elementary, 4)
    if len(locals) < 2:
        raise ValueError("need at least two local layers")
    a, b = locals[0]
    out = np.kron(as_matrix(a, 2), as_matrix(b, 2))
    for a, b in locals[1:]:
        out = np.kron(as_matrix(a, 2), as_matrix(b, 2)) @ e @ out
    return out


def circuit_residual(built, target) -> float:
    """``1 - |tr(built^dag target)| / 4``, clipped to [0, 1]."""
    return float(np.clip(1.0 - abs(np.trace(built.conj().T @ target)) / 4.0, 0.0, 1.0))


class _InvariantObjective:
    """Invariant distance of the interior circuit, evaluated in the magic basis."""

    def __init__(self, elementary: np.ndarray, target: np.ndarray, n: int):
        self.n = n
        self.em = MAGIC_DAG @ elementary @ MAGIC
        self.det = np.linalg.det(elementary) ** n
        t = makhlin(target)
        self.g1, self.g2 = t.g1, t.g2

    def interior(self, x: np.ndarray) -> list[np.ndarray]:
        return [
            np.kron(su2(*x[6 * j:6 * j + 3]), su2(*x[6 * j + 3:6 * j + 6]))
            for j in range(self.n - 1)
        ]

    def core(self, x: np.ndarray) -> np.ndarray:
        """Circuit with identity outer locals, in the computational basis."""
        v = self.em
        for k in self.interior(x):
            v = self.em @ (MAGIC_DAG @ k @ MAGIC) @ v
        return MAGIC @ v @ MAGIC_DAG

    def __call__(self, x: np.ndarray) -> float:
        v = self.em
        for k in self.interior(x):
            v = self.em @ (MAGIC_DAG @ k @ MAGIC) @ v
        m = v.T @ v
        tr = np.trace(m)
        g1 = tr * tr / (16.0 * self.det)
        g2 = ((tr * tr - np.sum(m * m)) / (4.0 * self.det)).real
        return float(abs(g1 - self.g1) ** 2 + (g2 - self.g2) ** 2)


class _Stall:
    """Callback ending a run whose best value stopped improving."""

    def __init__(self, window: int = 200, rtol: float = 1e-10):
        self.window, self.rtol = window, rtol
        self.best, self.since = np.inf, 0

    def __call__(self, intermediate_result):
        fx = intermediate_result.fun
        if fx < self.best - self.rtol * (1.0 + abs(self.best)):
            self.best, self.since = fx, 0
        else:
            self.since += 1
        # a floor well above zero is an obstruction, not slow convergence
        if self.since >= self.window and fx > 1e-8:
            raise StopIteration


def _search(f: _InvariantObjective, x0: np.ndarray, max_iterations: int, target: float):
    """Nelder-Mead from ``x0``, restarted in place with a shrinking simplex."""
    opts = {"maxiter": max_iterations, "xatol": 1e-13, "fatol": 1e-30, "adaptive": True}
    res = minimize(f, x0, method="Nelder-Mead", options=opts, callback=_Stall())
    x, fx, used = res.x, float(res.fun), int(res.nit)
    radius = 0.1
    while used < max_iterations and fx > POLISH_TARGET and radius > 1e-9:
        if fx > 1e-2 and fx > target:
            break
        simplex = np.vstack([x, x + radius * np.eye(len(x))])
        opts["maxiter"] = max_iterations - used
        res = minimize(f, x, method="Nelder-Mead", options={**opts, "initial_simplex": simplex})
        used += int(res.nit)
        if res.fun < fx:
            x, fx = res.x, float(res.fun)
        radius *= 0.1
    return x, fx, used


def _outer_locals(core: np.ndarray, target: np.ndarray):
    """Outer layers mapping the core circuit's frames onto the target's."""
    dc = decompose(core, DEFAULT_TOL)
    dt = decompose(target, DEFAULT_TOL)
    first = (dc.pre_a.conj().T @ dt.pre_a, dc.pre_b.conj().T @ dt.pre_b)
    last = (dt.post_a @ dc.post_a.conj().T, dt.post_b @ dc.post_b.conj().T)
    return first, last


def synthesize(problem: SynthesisProblem) -> SynthesisResult:
    """Search for locals realizing ``problem.target`` with n applications.

    Phase one minimizes the Makhlin-invariant distance over the interior
    layers (Euler angles, multi-start Nelder-Mead); the first restart reaching
    ``objective_tolerance`` wins, otherwise the lowest distance does. Phase two
    fixes the outer layers by matching canonical frames.
    """
    e = require_unitary(as_matrix(problem.elementary, 4))
    t = require_unitary(as_matrix(problem.target, 4))
    n = problem.applications
    f = _InvariantObjective(e, t, n)
    rng = random_source(problem.seed)
    dim = 6 * (n - 1)

    best_x, best_f, best_r, total = np.zeros(dim), np.inf, 0, 0
    history = []
    if dim == 0:
        best_f = f(best_x)
        history.append(best_f)
    else:
        for r in range(problem.restarts):
            x0 = rng.uniform(0.0, 2.0 * np.pi, size=dim)
            x, fx, used = _search(f, x0, problem.max_iterations, problem.objective_tolerance)
            total += used
            history.append(fx)
            if fx < best_f:
                best_x, best_f, best_r = x, fx, r
            if best_f <= problem.objective_tolerance:
                break
    converged = best_f <= problem.objective_tolerance

    identity = np.eye(2, dtype=np.complex128)
    interior = [(su2(*best_x[6 * j:6 * j + 3]), su2(*best_x[6 * j + 3:6 * j + 6])) for j in range(n - 1)]
    layers = [(identity, identity), *interior, (identity, identity)]
    if converged:
        layers[0], layers[-1] = _outer_locals(f.core(best_x), t)
    built = assemble(e, layers)
    result = SynthesisResult(
        locals=layers,
        residual=circuit_residual(built, t),
        invariant_residual=float(best_f),
        iterations_used=total,
        converged=bool(converged),
        best_restart=best_r,
        restart_residuals=history,
    )
    log.debug("synthesize n=%d converged=%s inv=%.3g res=%.3g", n, converged, best_f, result.residual)
    return result


@dataclass
class ObstructionReport:
    elementary: tuple[float, float, float]
    applications: int
    trials: int
    obstructed: list[float]
    feasible: list[float]
    obstructed_targets: list[tuple[float, float, float]]
    feasible_targets: list[tuple[float, float, float]]

    @property
    def obstructed_floor(self) -> float:
        return min(self.obstructed) if self.obstructed else float("nan")

    @property
    def feasible_ceiling(self) -> float:
        return max(self.feasible) if self.feasible else float("nan")

    @property
    def separated(self) -> bool:
        """Obstructed floor at least two decades above the feasible ceiling."""
        if not self.obstructed or not self.feasible:
            return True
        return self.obstructed_floor >= 100.0 * self.feasible_ceiling


def obstruction_evidence(
    elementary,
    n: int,
    trials: int,
    rng: np.random.Generator,
    restarts: int = 50,
    max_iterations: int = 2000,
    run_synthesis: bool = True,
) -> ObstructionReport:
    """Partition random target classes by the majorization test and optimize each.

    ``elementary`` is a canonical vector. Targets are canonical classes of
    Haar-random unitaries. Per-target values are best invariant residuals
    (NaN when ``run_synthesis`` is false).
    """
    from .canonical import canonical_gate

    if trials <= 0:
        raise ValueError("trials must be positive")
    e = canonical_gate(elementary)
    report = ObstructionReport(tuple(float(x) for x in elementary), n, trials, [], [], [], [])
    for _ in range(trials):
        c = canonical_vector(haar_unitary(4, rng))
        seed = int(rng.integers(0, 2**63 - 1))
        blocked = target_obstructed(elementary, c, n)
        value = float("nan")
        if run_synthesis:
            prob = SynthesisProblem(e, canonical_gate(c), n, restarts, max_iterations, seed=seed)
            value = synthesize(prob).invariant_residual
        if blocked:
            report.obstructed.append(value)
            report.obstructed_targets.append(tuple(c))
        else:
            report.feasible.append(value)
            report.feasible_targets.append(tuple(c))
    return report
