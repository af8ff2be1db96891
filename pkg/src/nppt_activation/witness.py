"""The witness W = (1 - F)_1 (1 - (d/2) P)_2 and a Schmidt-rank-two search.

``rank2_min`` looks for a Schmidt-rank-two vector with negative expectation
on the partial transpose; finding one certifies 1-distillability. Failing to
find one proves nothing, so the certifier never reports undistillability.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import geometry
from .states import CANONICAL_LABELS, _split_product, canonical_layout
from .tensor import (
    HERMITIAN_TOL,
    LabeledOperator,
    PureState,
    flip_operator,
    hermitian_spectrum,
    identity,
    max_entangled_projector,
    partial_transpose,
    permute_subsystems,
)

DEFAULT_RESTARTS = 64
MAX_SWEEPS = 500
SWEEP_RTOL = 1e-12
CERTIFY_TOL = 1e-9


def witness_operator(d: int) -> LabeledOperator:
    """(1 - F) on (A1, B1) tensor (1 - (d/2) P) on (A2, B2), canonical order."""
    flip = flip_operator(d, ("A1", "B1"))
    proj = max_entangled_projector(d, ("A2", "B2"))
    return _split_product(identity(flip.layout) - flip, identity(proj.layout) - proj * (d / 2))


class Certificate(enum.Enum):
    ENTANGLED = "entangled"
    DISTILLABLE_CERTIFIED = "distillable_certified"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ProductMinimum:
    value: float
    phi: np.ndarray
    psi: np.ndarray
    samples: int


@dataclass(frozen=True)
class WitnessReport:
    value: float
    min_product_expectation: float
    certificate: Certificate
    exact_value: Optional[Fraction] = None


def _reduced(w: np.ndarray, vec: np.ndarray, n: int, side: str) -> np.ndarray:
    """Contract the product-state factor on one side of an (n x n) x (n x n) operator."""
    t = w.reshape(n, n, n, n)
    if side == "B":
        return np.einsum("x,axby,y->ab", vec.conj(), t, vec)
    return np.einsum("x,xayb,y->ab", vec.conj(), t, vec)


def _lowest(h: np.ndarray) -> tuple[float, np.ndarray]:
    vals, vecs = np.linalg.eigh((h + h.conj().T) / 2)
    return float(vals[0]), vecs[:, 0]


def _refine_product(w: np.ndarray, n: int, phi: np.ndarray, psi: np.ndarray, sweeps: int = 200):
    value = float(np.real(np.vdot(np.kron(phi, psi), w @ np.kron(phi, psi))))
    for _ in range(sweeps):
        _, phi = _lowest(_reduced(w, psi, n, "B"))
        new, psi = _lowest(_reduced(w, phi, n, "A"))
        if value - new <= SWEEP_RTOL * max(1.0, abs(value)):
            value = min(value, new)
            break
        value = new
    return value, phi, psi


def min_product_expectation(
    op: LabeledOperator, samples: int, seed: int, refine_top: int = 4, batch: int = 10_000
) -> ProductMinimum:
    """Minimum of <phi x psi|op|phi x psi> over product states across (A1 A2)|(B1 B2).

    Haar sampling followed by alternating lowest-eigenvector refinement from
    the ``refine_top`` best samples.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    d = op.dims[0]
    n = d * d
    w = op.matrix
    rng = np.random.default_rng(seed)
    keep: list[tuple[float, np.ndarray, np.ndarray]] = []
    remaining = samples
    while remaining > 0:
        m = min(batch, remaining)
        remaining -= m
        phis = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        psis = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        phis /= np.linalg.norm(phis, axis=1, keepdims=True)
        psis /= np.linalg.norm(psis, axis=1, keepdims=True)
        vecs = np.einsum("ka,kb->kab", phis, psis).reshape(m, n * n)
        vals = np.real(np.einsum("ki,ij,kj->k", vecs.conj(), w, vecs))
        for k in np.argsort(vals, kind="stable")[:refine_top]:
            keep.append((float(vals[k]), phis[k], psis[k]))
    keep.sort(key=lambda item: item[0])
    best = None
    for _, phi, psi in keep[:refine_top]:
        value, phi, psi = _refine_product(w, n, phi, psi)
        if best is None or value < best[0]:
            best = (value, phi, psi)
    return ProductMinimum(best[0], best[1], best[2], samples)


def verify_witness_positivity(d: int, samples: int = 100_000, seed: int = 0) -> ProductMinimum:
    """Search for a product state with negative witness expectation."""
    return min_product_expectation(witness_operator(d), samples, seed)


def witness_report(
    sigma: LabeledOperator | None = None,
    lam=None,
    d: Optional[int] = None,
    samples: int = 10_000,
    seed: int = 0,
) -> WitnessReport:
    """tr(W sigma) plus the empirical product-state floor of W.

    Pass either a density matrix on the canonical layout or a lambda point.
    """
    exact = None
    if lam is not None:
        if d is None:
            raise ValueError("d is required with a lambda point")
        exact = geometry.witness_value(lam, d)
        value = float(exact)
    elif sigma is not None:
        d = sigma.dims[0]
        if sigma.layout != canonical_layout(d):
            raise ValueError(f"expected layout {canonical_layout(d)}, got {sigma.layout}")
        value = float(np.real(np.sum(witness_operator(d).matrix.T * sigma.matrix)))
    else:
        raise ValueError("either sigma or lam is required")
    floor = verify_witness_positivity(d, samples, seed).value
    entangled = value < -CERTIFY_TOL and floor >= -CERTIFY_TOL
    cert = Certificate.ENTANGLED if entangled else Certificate.INCONCLUSIVE
    return WitnessReport(value, floor, cert, exact)


# -- Schmidt-rank-two minimization ---------------------------------------------

@dataclass(frozen=True)
class Rank2Result:
    min_value: float
    argmin: PureState
    restarts_used: int


def _random_isometry(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    q, _ = np.linalg.qr(z)
    return q


def _one_restart(t: np.ndarray, da: int, db: int, rng: np.random.Generator):
    """Alternate: optimize all of A with B confined to span(V), then B with A in span(U)."""
    v = _random_isometry(db, rng)
    value = np.inf
    psi = None
    for _ in range(MAX_SWEEPS):
        # A side free, B side in span(v): any such vector has Schmidt rank <= 2
        ha = np.einsum("xi,axby,yj->aibj", v.conj(), t, v).reshape(2 * da, 2 * da)
        val_a, c = _lowest(ha)
        c = c.reshape(da, 2)
        u = np.linalg.svd(c, full_matrices=False)[0]
        hb = np.einsum("ai,axby,bj->ixjy", u.conj(), t, u).reshape(2 * db, 2 * db)
        val_b, e = _lowest(hb)
        e = e.reshape(2, db)
        psi = (u @ e).ravel()
        v = np.linalg.svd(e, full_matrices=False)[2].T
        new = min(val_a, val_b)
        converged = value - new <= SWEEP_RTOL * max(1.0, abs(new))
        value = min(value, new)
        if converged:
            break
    return psi


def rank2_minimize(
    op: np.ndarray, da: int, db: int, restarts: int = DEFAULT_RESTARTS, seed: int = 0
) -> tuple[float, np.ndarray, int]:
    """min <psi|op|psi> over Schmidt-rank-2 psi in C^da x C^db (an upper bound).

    Restart ``r`` draws from its own generator seeded ``(seed, r)``; the lowest
    restart index wins ties.
    """
    if da < 2 or db < 2:
        raise ValueError("both sides need dimension >= 2")
    if restarts < 1:
        raise ValueError("need at least one restart")
    op = np.asarray(op, dtype=complex)
    t = op.reshape(da, db, da, db)
    best_val, best_psi = np.inf, None
    for r in range(restarts):
        psi = _one_restart(t, da, db, np.random.default_rng([seed, r]))
        psi = psi / np.linalg.norm(psi)
        val = float(np.real(np.vdot(psi, op @ psi)))
        if val < best_val:
            best_val, best_psi = val, psi
    return best_val, best_psi, restarts


def _bipartition(rho: LabeledOperator, side_a: Optional[Sequence[str]]):
    labels = rho.labels
    if side_a is None:
        if len(labels) == 2:
            side_a = labels[:1]
        elif labels == CANONICAL_LABELS:
            side_a = ("A1", "A2")
        else:
            raise ValueError(f"cannot infer the A side of layout {labels}; pass side_a")
    side_a = list(side_a)
    side_b = [lab for lab in labels if lab not in side_a]
    if not side_b or len(side_a) + len(side_b) != len(labels):
        raise ValueError(f"invalid A side {side_a} for layout {labels}")
    return side_a, side_b


def check_density(rho: LabeledOperator, tol: float = 1e-9):
    dev = rho.hermiticity_error()
    if dev > HERMITIAN_TOL:
        raise ValueError(f"input is not Hermitian (max deviation {dev:.3e})")
    tr = rho.trace().real
    if abs(tr - 1) > tol:
        raise ValueError(f"input trace {tr!r} is not 1")
    low = hermitian_spectrum(rho)[0]
    if low < -tol:
        raise ValueError(f"input has negative eigenvalue {low!r}")


def rank2_min(
    rho: LabeledOperator,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    side_a: Optional[Sequence[str]] = None,
) -> Rank2Result:
    """Minimize <psi|rho^{T_B}|psi> over Schmidt-rank-2 psi across the A|B cut."""
    check_density(rho)
    side_a, side_b = _bipartition(rho, side_a)
    ordered = permute_subsystems(rho, side_a + side_b)
    pt = partial_transpose(ordered, side_b)
    da = int(np.prod([ordered.layout[i][1] for i in range(len(side_a))]))
    db = ordered.layout.total // da
    if da < 2 or db < 2:
        raise ValueError("both sides need dimension >= 2")
    _, psi, used = rank2_minimize(pt.matrix, da, db, restarts, seed)
    state = PureState.normalized(ordered.layout, psi)
    value = float(np.real(pt.expectation(state)))
    return Rank2Result(value, state, used)


def certify_1distillable(rho: LabeledOperator, restarts: int = DEFAULT_RESTARTS, seed: int = 0) -> Certificate:
    """Certified when a Schmidt-rank-2 vector has negative partial-transpose expectation."""
    result = rank2_min(rho, restarts, seed)
    return Certificate.DISTILLABLE_CERTIFIED if result.min_value < -CERTIFY_TOL else Certificate.INCONCLUSIVE
