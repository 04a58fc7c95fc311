"""Brute-force dense-matrix reference implementations.

Everything here works on explicit 2^n complex matrices, so it is only
usable for a handful of qubits, but it depends on nothing from the
package except the (x, z, phase) field layout of PauliOp.  Tests compare
the fast bitset algebra against these.
"""

from __future__ import annotations

import numpy as np

_L = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense(op) -> np.ndarray:
    """Dense matrix of a PauliOp.  Qubit 0 is the first tensor factor."""
    m = np.array([[1.0 + 0j]])
    for q in range(op.n):
        xb = (op.x >> q) & 1
        zb = (op.z >> q) & 1
        m = np.kron(m, _L[("I", "X", "Z", "Y")[xb + 2 * zb]])
    return (1j ** op.phase) * m


def letters_dense(s: str, phase: int = 0) -> np.ndarray:
    m = np.array([[1.0 + 0j]])
    for c in s:
        m = np.kron(m, _L[c])
    return (1j ** phase) * m


def stabilizer_projector(ops) -> np.ndarray:
    """Projector onto the joint +1 eigenspace of a list of PauliOps."""
    dim = 2 ** ops[0].n
    proj = np.eye(dim, dtype=complex)
    for g in ops:
        proj = proj @ (np.eye(dim) + dense(g)) / 2
    return proj


def measure_dense(proj: np.ndarray, h: np.ndarray):
    """Measure Hermitian involution h on the state rho = proj / tr(proj).

    Returns (p_plus, post_plus, post_minus) where the posts are the
    unnormalized projected density matrices for each outcome.
    """
    dim = proj.shape[0]
    rho = proj / np.trace(proj)
    pp = (np.eye(dim) + h) / 2
    pm = (np.eye(dim) - h) / 2
    p_plus = float(np.real(np.trace(pp @ rho)))
    return p_plus, pp @ rho @ pp, pm @ rho @ pm


def same_state(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """Equality of density matrices after normalization."""
    ta, tb = np.trace(a), np.trace(b)
    if abs(ta) < tol or abs(tb) < tol:
        return abs(ta) < tol and abs(tb) < tol
    return bool(np.allclose(a / ta, b / tb, atol=tol))
