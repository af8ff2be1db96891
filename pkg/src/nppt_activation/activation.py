"""Filtering protocol that uses a symmetric state to activate a Werner state.

A Werner state rho(alpha) on (A0, B0) and a symmetric state sigma on
(A1, A2, B1, B2) are filtered by projecting (A0, A1) and (B0, B1) onto the
maximally entangled state. The figure of merit is the maximally entangled
fraction of what is left on (A2, B2).

Two evaluation routes exist: ``fidelity_bruteforce`` builds the full d^6
space (d <= 3), ``fidelity_reduced`` uses the closed form in the weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import geometry
from .states import (
    SymmetricSpec,
    WernerParam,
    coords_of,
    symmetric_matrix,
    symmetric_projectors,
    projector_traces,
    werner_matrix,
)
from .tensor import LabeledOperator, kron, max_entangled_vector, permute_subsystems

BRUTE_FORCE_MAX_D = 3
DEGENERATE_TOL = 1e-14
CONSISTENCY_TOL = 1e-10
FILTER_ORDER = ("A0", "A1", "B0", "B1", "A2", "B2")


class DegenerateFilterError(ArithmeticError):
    """The filter accepts with (numerically) zero probability."""


@dataclass(frozen=True)
class ActivationReport:
    fidelity: float
    success_probability: float
    margin: float
    activated: bool


@dataclass(frozen=True)
class PlaneCoefficients:
    c: tuple[float, float, float, float]
    alpha: float

    def evaluate(self, lam) -> float:
        return float(sum(ci * float(li) for ci, li in zip(self.c, lam)))


def _check_brute_d(d: int):
    if d not in range(2, BRUTE_FORCE_MAX_D + 1):
        raise ValueError(f"the d^6 construction is limited to d in {{2, 3}}, got d={d}")


def _joint_tensor(alpha: float, sigma: LabeledOperator, d: int) -> np.ndarray:
    """rho(alpha) x sigma in FILTER_ORDER, shaped (d^4, d^2, d^4, d^2)."""
    rho = werner_matrix(WernerParam(d, alpha), ("A0", "B0"))
    joint = permute_subsystems(kron(rho, sigma), FILTER_ORDER)
    return joint.matrix.reshape(d**4, d * d, d**4, d * d)


def _filtered(joint: np.ndarray, va: np.ndarray, vb: np.ndarray) -> np.ndarray:
    """<va, vb| joint |va, vb> as an unnormalized operator on (A2, B2)."""
    v = np.kron(va, vb)
    half = np.tensordot(v.conj(), joint, axes=(0, 0))
    return np.tensordot(half, v, axes=(1, 0))


def filtered_output(alpha: float, sigma: LabeledOperator, d: int) -> np.ndarray:
    """Unnormalized post-filter operator on (A2, B2)."""
    _check_brute_d(d)
    omega = max_entangled_vector(d)
    return _filtered(_joint_tensor(alpha, sigma, d), omega, omega)


def _fidelity_parts(out: np.ndarray, d: int) -> tuple[float, float]:
    omega = max_entangled_vector(d)
    num = float(np.real(np.vdot(omega, out @ omega)))
    den = float(np.real(np.trace(out)))
    return num, den


def fidelity_bruteforce(alpha: float, sigma: LabeledOperator, d: int) -> ActivationReport:
    """Evaluate the filtered fidelity on the full six-party space."""
    _check_brute_d(d)
    if sigma.dims != (d,) * 4:
        raise ValueError(f"sigma must act on four {d}-level systems, got dims {sigma.dims}")
    num, den = _fidelity_parts(filtered_output(alpha, sigma, d), d)
    if den < DEGENERATE_TOL:
        raise DegenerateFilterError(f"filter acceptance probability {den:.3e}")
    fid = num / den
    lam = coords_of(sigma).lam
    margin = d * (lam[0] * (d + alpha) + lam[1] * (d - alpha)) - (
        (lam[0] + lam[2]) * (d + alpha) + (lam[1] + lam[3]) * (d - alpha)
    )
    activated = fid - 1 / d > CONSISTENCY_TOL
    if activated and margin < -CONSISTENCY_TOL or margin > CONSISTENCY_TOL and not fid > 1 / d:
        raise ArithmeticError(f"fidelity {fid!r} and margin {margin!r} disagree in sign")
    return ActivationReport(fid, den, float(margin), activated)


def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def fidelity_reduced_exact(alpha, lam: SymmetricSpec) -> tuple[Fraction, Fraction, Fraction]:
    """(fidelity, success probability, margin) as exact rationals.

    Float inputs are converted exactly, so the result is deterministic.
    """
    d = lam.d
    a = _exact(alpha)
    if not -d <= a <= d:
        raise ValueError(f"alpha={alpha} outside [-{d}, {d}]")
    l1, l2, l3, l4 = (_exact(x) for x in lam.lam)
    num = l1 * (d + a) + l2 * (d - a)
    den = (l1 + l3) * (d + a) + (l2 + l4) * (d - a)
    if den == 0:
        raise DegenerateFilterError(f"zero acceptance for alpha={alpha}, lambda={lam.lam}")
    return num / den, den / (d**3 * (d * d - a)), d * num - den


def fidelity_reduced(alpha, lam: SymmetricSpec) -> ActivationReport:
    """Closed-form fidelity for the symmetric state with weights ``lam``.

    f = [l1 (d+a) + l2 (d-a)] / [(l1+l3)(d+a) + (l2+l4)(d-a)]
    """
    if not lam.is_state():
        raise ValueError(f"negative weight in {lam.lam}; not a state")
    fid, prob, margin = fidelity_reduced_exact(alpha, lam)
    return ActivationReport(float(fid), float(prob), float(margin), fid * lam.d > 1)


def plane_coefficients(alpha: float, d: int) -> PlaneCoefficients:
    """c_i = tr[(rho(alpha) x P_i)(P_A01 x P_B01 x (d P - 1)_2)] / tr(P_i), on d^6."""
    _check_brute_d(d)
    omega = max_entangled_vector(d)
    weight = d * np.outer(omega, omega.conj()) - np.eye(d * d)
    coeffs = []
    for proj, rank in zip(symmetric_projectors(d), projector_traces(d)):
        out = filtered_output(alpha, proj, d)
        coeffs.append(float(np.real(np.sum(out * weight.T))) / rank)
    return PlaneCoefficients(tuple(coeffs), float(alpha))


def plane_third_point(alpha, d: int) -> tuple[Fraction, geometry.Point]:
    """t = (2 + d)/(2 alpha + d) and the point t tau5 + (1 - t) tau1 on the separating plane."""
    a = _exact(alpha)
    if a <= 1:
        raise ValueError(f"alpha={alpha} must exceed 1")
    if a > d:
        raise ValueError(f"alpha={alpha} exceeds d={d}")
    t = Fraction(2 + d) / (2 * a + d)
    taus = geometry.tau_points(d)
    point = tuple(t * p5 + (1 - t) * p1 for p5, p1 in zip(taus[5], taus[1]))
    return t, point  # type: ignore[return-value]


# -- generalized Bell-basis measurement ------------------------------------------

@lru_cache(maxsize=8)
def weyl_operators(d: int) -> tuple[np.ndarray, ...]:
    """W_kl = sum_m exp(2 pi i m k / d) |m + l><m|, indexed k * d + l."""
    ops = []
    for k in range(d):
        for l in range(d):
            w = np.zeros((d, d), dtype=complex)
            for m in range(d):
                w[(m + l) % d, m] = np.exp(2j * np.pi * m * k / d)
            w.setflags(write=False)
            ops.append(w)
    return tuple(ops)


def bell_vectors(d: int) -> list[np.ndarray]:
    omega = max_entangled_vector(d)
    return [np.kron(np.eye(d), w) @ omega for w in weyl_operators(d)]


@dataclass(frozen=True)
class BellVariantReport:
    total_probability: float
    baseline_probability: float
    branch_probabilities: tuple[float, ...]
    branch_fidelities: tuple[float, ...]
    corrections: tuple[int, ...]
    flagged_branches: tuple[int, ...]


def _isotropic_deviation(state: np.ndarray, d: int) -> float:
    """Frobenius distance to the isotropic state with the same overlap."""
    omega = max_entangled_vector(d)
    proj = np.outer(omega, omega.conj())
    f = float(np.real(np.vdot(omega, state @ omega)))
    iso = f * proj + (1 - f) / (d * d - 1) * (np.eye(d * d) - proj)
    return float(np.linalg.norm(state - iso))


def _correct(state: np.ndarray, d: int) -> tuple[int, np.ndarray]:
    """Pick the Weyl correction on B2 that brings the state closest to isotropic.

    Ties go to the lowest index, so identity (index 0) wins when nothing helps.
    """
    best = None
    for idx, w in enumerate(weyl_operators(d)):
        c = np.kron(np.eye(d), w)
        corrected = c @ state @ c.conj().T
        dev = _isotropic_deviation(corrected, d)
        if best is None or dev < best[0] - 1e-12:
            best = (dev, idx, corrected)
    return best[1], best[2]


def bell_basis_variant(alpha: float, lam: SymmetricSpec, d: int) -> BellVariantReport:
    """Measure (A0, A1) and (B0, B1) in the Weyl-Bell basis; keep coinciding outcomes."""
    _check_brute_d(d)
    if lam.d != d:
        raise ValueError(f"lambda is for d={lam.d}, not d={d}")
    joint = _joint_tensor(alpha, symmetric_matrix(lam), d)
    omega = max_entangled_vector(d)
    probs, fids, corrections = [], [], []
    for vec in bell_vectors(d):
        out = _filtered(joint, vec, vec)
        p = float(np.real(np.trace(out)))
        if p < DEGENERATE_TOL:
            raise DegenerateFilterError(f"branch acceptance probability {p:.3e}")
        idx, corrected = _correct(out / p, d)
        probs.append(p)
        fids.append(float(np.real(np.vdot(omega, corrected @ omega))))
        corrections.append(idx)
    baseline = probs[0]
    total = float(sum(probs))
    if abs(total - d * d * baseline) > 1e-9:
        raise ArithmeticError(f"total {total!r} is not d^2 x baseline {baseline!r}")
    flagged = tuple(i for i, f in enumerate(fids) if abs(f - fids[0]) > 1e-9)
    return BellVariantReport(total, baseline, tuple(probs), tuple(fids), tuple(corrections), flagged)
