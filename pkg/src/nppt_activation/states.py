"""Werner, isotropic and (U x V)_A (U x conj V)_B symmetric states.

The four-parameter family lives on the canonical layout ``(A1, A2, B1, B2)``.
Its projectors factorize over the split ``(A1, B1) | (A2, B2)``, so they are
assembled on that grouping and permuted into canonical order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .tensor import (
    LabeledOperator,
    Layout,
    flip_operator,
    identity,
    kron,
    max_entangled_projector,
    permute_subsystems,
)

CANONICAL_LABELS = ("A1", "A2", "B1", "B2")
GROUPED_LABELS = ("A1", "B1", "A2", "B2")
STATE_TOL = 1e-12


def canonical_layout(d: int) -> Layout:
    return Layout((lab, d) for lab in CANONICAL_LABELS)


@dataclass(frozen=True)
class WernerParam:
    d: int
    alpha: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"d must be an integer >= 2, got {self.d!r}")
        if not -self.d <= self.alpha <= self.d:
            raise ValueError(f"Werner alpha={self.alpha} outside [-{self.d}, {self.d}]")


@dataclass(frozen=True)
class IsotropicParam:
    d: int
    f: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"d must be an integer >= 2, got {self.d!r}")
        if not 0 <= self.f <= 1:
            raise ValueError(f"isotropic fidelity f={self.f} outside [0, 1]")


@dataclass(frozen=True)
class SymmetricSpec:
    """Local dimension plus the four weights lambda_i = tr(P_i sigma).

    Components may be floats or Fractions. Only the sum is enforced here;
    positivity is checked where a density matrix is required.
    """

    d: int
    lam: tuple

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"d must be an integer >= 2, got {self.d!r}")
        lam = tuple(self.lam)
        if len(lam) != 4:
            raise ValueError(f"expected 4 weights, got {len(lam)}")
        total = sum(lam)
        exact = all(isinstance(x, (int, Fraction)) for x in lam)
        if (total != 1) if exact else abs(total - 1) > STATE_TOL:
            raise ValueError(f"weights sum to {total}, not 1")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def from_point(cls, d: int, point) -> "SymmetricSpec":
        """Build from the three free coordinates; lambda_4 = 1 - sum."""
        l1, l2, l3 = point
        return cls(d, (l1, l2, l3, 1 - l1 - l2 - l3))

    @property
    def point(self) -> tuple:
        return self.lam[:3]

    def is_state(self, tol: float = STATE_TOL) -> bool:
        return all(x >= -tol for x in self.lam)


def werner_matrix(p: WernerParam, labels: tuple[str, str] = ("A", "B")) -> LabeledOperator:
    """rho(alpha) = (1 - (alpha/d) F) / (d^2 - alpha)."""
    d, alpha = p.d, p.alpha
    flip = flip_operator(d, labels)
    return (identity(flip.layout) - flip * (alpha / d)) / (d * d - alpha)


def isotropic_matrix(p: IsotropicParam, labels: tuple[str, str] = ("A", "B")) -> LabeledOperator:
    """omega(f) = f P + (1 - f)/(d^2 - 1) (1 - P)."""
    d, f = p.d, p.f
    proj = max_entangled_projector(d, labels)
    return proj * f + (identity(proj.layout) - proj) * ((1 - f) / (d * d - 1))


def _split_product(op1: LabeledOperator, op2: LabeledOperator) -> LabeledOperator:
    """op1 on (A1,B1) tensor op2 on (A2,B2), returned in canonical order."""
    return permute_subsystems(kron(op1, op2), CANONICAL_LABELS)


def _system_factors(d: int):
    flip = flip_operator(d, ("A1", "B1"))
    one1 = identity(flip.layout)
    proj = max_entangled_projector(d, ("A2", "B2"))
    one2 = identity(proj.layout)
    anti = (one1 - flip) / 2
    sym = (one1 + flip) / 2
    return anti, sym, proj, one2 - proj


@lru_cache(maxsize=16)
def symmetric_projectors(d: int) -> tuple[LabeledOperator, ...]:
    """Minimal projectors P1..P4 of the commutant, on the canonical layout.

    P1, P2 = (1 -/+ F)/2 on system 1 times P on system 2;
    P3, P4 = (1 -/+ F)/2 on system 1 times (1 - P) on system 2.
    """
    if int(d) != d or d < 2:
        raise ValueError(f"d must be an integer >= 2, got {d!r}")
    anti, sym, proj, proj_perp = _system_factors(d)
    return (
        _split_product(anti, proj),
        _split_product(sym, proj),
        _split_product(anti, proj_perp),
        _split_product(sym, proj_perp),
    )


def projector_traces(d: int) -> tuple[int, int, int, int]:
    """Closed-form ranks of P1..P4."""
    a, s = d * (d - 1) // 2, d * (d + 1) // 2
    return a, s, a * (d * d - 1), s * (d * d - 1)


def symmetric_matrix(s: SymmetricSpec) -> LabeledOperator:
    """sigma = sum_i lambda_i P_i / tr(P_i)."""
    if not s.is_state():
        raise ValueError(f"negative weight in {s.lam}; not a state")
    return symmetric_operator(s)


def symmetric_operator(s: SymmetricSpec) -> LabeledOperator:
    """Same expansion as :func:`symmetric_matrix` without the positivity check."""
    projs = symmetric_projectors(s.d)
    traces = projector_traces(s.d)
    mat = sum(float(lam) / t * p.matrix for lam, t, p in zip(s.lam, traces, projs))
    return LabeledOperator(canonical_layout(s.d), mat)


def coords_of(rho: LabeledOperator) -> SymmetricSpec:
    """Twirl coordinates lambda_i = tr(P_i rho) of an operator on the canonical layout."""
    dims = rho.dims
    d = dims[0]
    if rho.layout != canonical_layout(d):
        raise ValueError(f"expected canonical layout {canonical_layout(d)}, got {rho.layout}")
    mat = rho.matrix
    lam = [float(np.real(np.sum(p.matrix.T * mat))) for p in symmetric_projectors(d)]
    # absorb rounding so the weights sum to exactly tr(rho)
    lam[3] = float(np.real(np.trace(mat))) - lam[0] - lam[1] - lam[2]
    return SymmetricSpec(d, tuple(lam))


def werner_isotropic_product(w: WernerParam, iso: IsotropicParam) -> LabeledOperator:
    """rho(alpha) on system 1 tensor omega(f) on system 2, canonical order."""
    if w.d != iso.d:
        raise ValueError("Werner and isotropic factors need the same d")
    return _split_product(werner_matrix(w, ("A1", "B1")), isotropic_matrix(iso, ("A2", "B2")))


def phi_psi_product(d: int) -> LabeledOperator:
    """|Phi+><Phi+|_A tensor |Psi-><Psi-|_B with the qubit states on levels {0, 1}.

    A = (A1, A2) and B = (B1, B2), so the state is a product across A|B.
    """
    if int(d) != d or d < 2:
        raise ValueError(f"d must be an integer >= 2, got {d!r}")
    e0, e1 = np.eye(d)[0], np.eye(d)[1]
    phi_plus = (np.kron(e0, e0) + np.kron(e1, e1)) / np.sqrt(2)
    psi_minus = (np.kron(e0, e1) - np.kron(e1, e0)) / np.sqrt(2)
    vec = np.kron(phi_plus, psi_minus)
    return LabeledOperator(canonical_layout(d), np.outer(vec, vec.conj()))


def group_element(u: np.ndarray, v: np.ndarray) -> LabeledOperator:
    """(U x V)_A (U x conj V)_B on the canonical layout."""
    d = u.shape[0]
    mat = np.kron(np.kron(u, v), np.kron(u, v.conj()))
    return LabeledOperator(canonical_layout(d), mat)


def werner_flip_expectation(d: int, alpha: float) -> float:
    """tr(rho(alpha) F) = d (1 - alpha) / (d^2 - alpha)."""
    return d * (1 - alpha) / (d * d - alpha)


def twirl_to_werner(rho: LabeledOperator) -> WernerParam:
    """Werner parameter of the U x U twirl of a two-party state."""
    if len(rho.layout) != 2 or rho.dims[0] != rho.dims[1]:
        raise ValueError(f"expected a d x d bipartite operator, got layout {rho.layout}")
    d = rho.dims[0]
    flip = flip_operator(d, rho.labels)
    t = float(np.real(np.sum(flip.matrix.T * rho.matrix)))
    if not -1 - 1e-12 <= t <= 1 + 1e-12:
        raise ValueError(f"tr(rho F) = {t} outside [-1, 1]")
    t = min(1.0, max(-1.0, t))
    alpha = d * (1 - t * d) / (d - t)
    return WernerParam(d, min(float(d), max(-float(d), alpha)))


@dataclass(frozen=True)
class Thresholds:
    entangled: bool
    one_distillable: bool


def thresholds(p: WernerParam | IsotropicParam) -> Thresholds:
    """Entanglement and 1-distillability; boundary points count as neither."""
    if isinstance(p, WernerParam):
        return Thresholds(entangled=p.alpha > 1, one_distillable=p.alpha * 2 > p.d)
    if isinstance(p, IsotropicParam):
        above = p.f * p.d > 1
        return Thresholds(entangled=above, one_distillable=above)
    raise TypeError(f"unsupported parameter type {type(p).__name__}")
