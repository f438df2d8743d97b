"""Named gates, gate-spec resolution and the matrix file format.

A matrix file is a JSON document ``{"name": ..., "rows": [[[re, im], ...], ...]}``
holding one square gate.
"""
from __future__ import annotations

import json
import os
import re

import numpy as np

from .canonical import canonical_gate
from .errors import GateError
from .numkernel import haar_unitary, random_source


class InvalidGateSpec(GateError, ValueError):
    pass


_s = 1 / np.sqrt(2.0)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)
CNOT_REVERSED = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=np.complex128)
CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)
ISWAP = np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)
# the square root of SWAP with singlet eigenvalue -i, i.e. Ud(pi/8, pi/8, pi/8)
# up to global phase
SQRT_SWAP = np.array(
    [[1, 0, 0, 0],
     [0, (1 - 1j) / 2, (1 + 1j) / 2, 0],
     [0, (1 + 1j) / 2, (1 - 1j) / 2, 0],
     [0, 0, 0, 1]],
    dtype=np.complex128,
)

REGISTRY = {
    "CNOT": CNOT,
    "CZ": CZ,
    "SWAP": SWAP,
    "ISWAP": ISWAP,
    "DCNOT": CNOT_REVERSED @ CNOT,
    "SQRT_SWAP": SQRT_SWAP,
    "B": canonical_gate((np.pi / 4, np.pi / 8, 0.0)),
    "IDENTITY": np.eye(4, dtype=np.complex128),
}

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_ANGLE = re.compile(rf"^\s*(?P<sign>[-+]?)\s*(?P<num>{_NUMBER[5:]})?\s*\*?\s*pi\s*(?:/\s*(?P<den>{_NUMBER}))?\s*$")


def parse_angle(text: str) -> float:
    """Parse radians given as a number or as ``[k*]pi[/d]``."""
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    m = _ANGLE.match(text)
    if not m:
        raise InvalidGateSpec(f"cannot parse angle {text!r}")
    value = float(m["num"]) if m["num"] else 1.0
    value *= np.pi
    if m["den"]:
        value /= float(m["den"])
    return -value if m["sign"] == "-" else value


def matrix_to_doc(m, name: str | None = None) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    doc = {"rows": [[[float(z.real), float(z.imag)] for z in row] for row in m]}
    if name is not None:
        doc = {"name": name, **doc}
    return doc


def matrix_from_doc(doc) -> np.ndarray:
    try:
        rows = doc["rows"]
        m = np.array([[complex(float(re_), float(im)) for re_, im in row] for row in rows])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidGateSpec(f"malformed matrix document: {exc}") from exc
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
        raise InvalidGateSpec(f"matrix must be 2x2 or 4x4, got {m.shape}")
    return m


def write_matrix(path, m, name: str | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_doc(m, name), fh, indent=1)
        fh.write("\n")


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidGateSpec(f"{path}: not a JSON matrix file: {exc}") from exc
    return matrix_from_doc(doc)


def resolve_gate(spec: str) -> np.ndarray:
    """Registry name, ``canonical:c1,c2,c3``, ``random:seed`` or a file path."""
    key = spec.strip()
    if key.upper() in REGISTRY:
        return REGISTRY[key.upper()].copy()
    if key.lower().startswith("canonical:"):
        parts = key.split(":", 1)[1].split(",")
        if len(parts) != 3:
            raise InvalidGateSpec(f"canonical spec needs three angles: {spec!r}")
        return canonical_gate([parse_angle(p) for p in parts])
    if key.lower().startswith("random:"):
        try:
            seed = int(key.split(":", 1)[1])
        except ValueError as exc:
            raise InvalidGateSpec(f"bad random seed in {spec!r}") from exc
        if seed < 0:
            raise InvalidGateSpec("random seed must be non-negative")
        return haar_unitary(4, random_source(seed))
    if os.path.exists(key):
        m = read_matrix(key)
        if m.shape != (4, 4):
            raise InvalidGateSpec(f"{key}: expected a 4x4 gate")
        return m
    raise InvalidGateSpec(f"unknown gate {spec!r}; names: {', '.join(REGISTRY)}")
