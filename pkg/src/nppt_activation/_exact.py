"""Integer-matrix constructions for exact traces on the canonical layout.

Scaled so every entry is an integer: 2d*P_i, 2d*Q_i, 2*W. Traces of products
are then exact integers and are turned into Fractions by the callers. The
production tables work factor-wise on d^2 x d^2 blocks; the dense d^4
builders at the bottom exist to cross-check them.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np


def _flip(d: int) -> np.ndarray:
    f = np.zeros((d * d, d * d), dtype=np.int64)
    for i in range(d):
        for j in range(d):
            f[j * d + i, i * d + j] = 1
    return f


def _omega_outer(d: int) -> np.ndarray:
    """d * |Omega><Omega|."""
    v = np.eye(d, dtype=np.int64).ravel()
    return np.outer(v, v)


def _grouped_to_canonical(mat: np.ndarray, d: int) -> np.ndarray:
    """(A1,B1,A2,B2) -> (A1,A2,B1,B2)."""
    perm = [0, 2, 1, 3]
    t = mat.reshape((d,) * 8).transpose(perm + [p + 4 for p in perm])
    return t.reshape(d**4, d**4)


def partial_transpose_a(mat: np.ndarray, d: int) -> np.ndarray:
    """Transpose A1 and A2 of a canonical-layout matrix."""
    t = mat.reshape((d,) * 8).transpose([4, 5, 2, 3, 0, 1, 6, 7])
    return t.reshape(d**4, d**4)


def _system_factors(d: int):
    one1 = np.eye(d * d, dtype=np.int64)
    flip = _flip(d)
    j = _omega_outer(d)
    return one1 - flip, one1 + flip, j, d * one1 - j


@lru_cache(maxsize=8)
def scaled_projectors(d: int, swap: bool = False) -> tuple[np.ndarray, ...]:
    """2d * P_i (or 2d * Q_i when ``swap``) as int64 matrices, canonical layout."""
    anti, sym, j, j_perp = _system_factors(d)
    out = []
    for flip_part, omega_part in ((anti, j), (sym, j), (anti, j_perp), (sym, j_perp)):
        grouped = np.kron(omega_part, flip_part) if swap else np.kron(flip_part, omega_part)
        m = _grouped_to_canonical(grouped, d)
        m.setflags(write=False)
        out.append(m)
    return tuple(out)


def scaled_witness(d: int) -> np.ndarray:
    """2 * W with W = (1 - F)_1 (1 - (d/2) P)_2."""
    anti, _, j, _ = _system_factors(d)
    return _grouped_to_canonical(np.kron(anti, 2 * np.eye(d * d, dtype=np.int64) - j), d)


def int_trace_product(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.sum(a * b.T))


def _pt_first(mat: np.ndarray, d: int) -> np.ndarray:
    """Transpose the first factor of a d^2 x d^2 matrix on (A, B)."""
    return mat.reshape(d, d, d, d).transpose(2, 1, 0, 3).reshape(d * d, d * d)


def _factor_pairs(d: int):
    """(system-1 factor, system-2 factor) of 2d * P_i as integer d^2 x d^2 matrices."""
    anti, sym, j, j_perp = _system_factors(d)
    return ((anti, j), (sym, j), (anti, j_perp), (sym, j_perp))


@lru_cache(maxsize=64)
def projector_ranks(d: int) -> tuple[int, ...]:
    """tr(P_i)."""
    return tuple(int(np.trace(x)) * int(np.trace(y)) // (2 * d) for x, y in _factor_pairs(d))


@lru_cache(maxsize=64)
def pt_overlap_table(d: int) -> tuple[tuple[Fraction, ...], ...]:
    """M[j][k] = tr(Q_j^{T_A} P_k), exactly.

    Q_j swaps the roles of systems 1 and 2, and T_A acts factor-wise, so each
    trace is a product of two d^2 x d^2 traces.
    """
    pairs = _factor_pairs(d)
    scale = 4 * d * d
    table = []
    for qx, qy in pairs:
        # Q_j = qy on system 1, qx on system 2
        q1, q2 = _pt_first(qy, d), _pt_first(qx, d)
        table.append(tuple(
            Fraction(int_trace_product(q1, px) * int_trace_product(q2, py), scale) for px, py in pairs
        ))
    return tuple(table)


@lru_cache(maxsize=64)
def witness_coefficients(d: int) -> tuple[Fraction, ...]:
    """tr(W P_i) / tr(P_i), exactly; 2W = (1 - F) x (2 - d P)."""
    anti, _, j, _ = _system_factors(d)
    w2 = 2 * np.eye(d * d, dtype=np.int64) - j
    ranks = projector_ranks(d)
    return tuple(
        Fraction(int_trace_product(anti, px) * int_trace_product(w2, py), 4 * d * r)
        for (px, py), r in zip(_factor_pairs(d), ranks)
    )


def phi_psi_coordinates(d: int) -> tuple[Fraction, ...]:
    """tr(P_k rho_sep) for the product |Phi+>_A |Psi->_B, exactly.

    The unnormalized vector 2|Phi+>|Psi-> has entries in {0, +-1}; regrouped as
    a matrix V over (A1 B1) x (A2 B2), <v|X_1 Y_2|v> = sum(V * X V Y^T).
    """
    e = np.eye(d, dtype=np.int64)
    phi = np.kron(e[0], e[0]) + np.kron(e[1], e[1])
    psi = np.kron(e[0], e[1]) - np.kron(e[1], e[0])
    # canonical (A1, A2, B1, B2) -> grouped (A1, B1, A2, B2)
    v = np.kron(phi, psi).reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    return tuple(
        Fraction(int(np.sum(v * (px @ v @ py.T))), 8 * d) for px, py in _factor_pairs(d)
    )


# -- dense d^4 builders, used as an independent cross-check for small d -------

def dense_pt_overlap_table(d: int) -> tuple[tuple[Fraction, ...], ...]:
    ps = scaled_projectors(d)
    qs = [partial_transpose_a(q, d) for q in scaled_projectors(d, swap=True)]
    return tuple(tuple(Fraction(int_trace_product(q, p), 4 * d * d) for p in ps) for q in qs)


def dense_witness_coefficients(d: int) -> tuple[Fraction, ...]:
    w = scaled_witness(d)
    return tuple(
        Fraction(int_trace_product(w, p), 2 * int(np.trace(p)))
        for p in scaled_projectors(d)
    )


def dense_phi_psi_coordinates(d: int) -> tuple[Fraction, ...]:
    e = np.eye(d, dtype=np.int64)
    phi = np.kron(e[0], e[0]) + np.kron(e[1], e[1])
    psi = np.kron(e[0], e[1]) - np.kron(e[1], e[0])
    vec = np.kron(phi, psi)
    rho4 = np.outer(vec, vec)
    return tuple(Fraction(int_trace_product(rho4, p), 8 * d) for p in scaled_projectors(d))
