"""Exact rational geometry of the symmetric family in (l1, l2, l3)-space.

Points are 3-tuples of :class:`fractions.Fraction`; lambda_4 is always
``1 - l1 - l2 - l3``. Nothing in this module rounds. Halfspaces use the
convention ``normal . x <= offset``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import combinations
from math import gcd
from typing import Optional, Sequence

from . import _exact
from .states import SymmetricSpec

Point = tuple[Fraction, Fraction, Fraction]
Halfspace = tuple[Point, Fraction]

__all__ = [
    "Polytope",
    "Region",
    "Membership",
    "AlphaInterval",
    "Classification",
    "to_point",
    "ppt_extreme_points",
    "ppt_halfspaces",
    "pt_eigenvalues",
    "state_halfspaces",
    "intersection_vertices",
    "tau_points",
    "separable_polytope",
    "membership",
    "activation_margin",
    "margin_affine",
    "activating_alpha_interval",
    "is_universal_activator",
    "witness_value",
    "classify",
]


def to_point(values) -> Point:
    x = tuple(Fraction(v) for v in values)
    if len(x) != 3:
        raise ValueError(f"expected 3 coordinates, got {len(x)}")
    return x  # type: ignore[return-value]


def _lam4(x: Sequence[Fraction]) -> tuple[Fraction, ...]:
    x = to_point(x)
    return (*x, 1 - sum(x))


def _coords(lam) -> Point:
    """Accept a SymmetricSpec, a 3-point or a 4-vector."""
    if isinstance(lam, SymmetricSpec):
        return to_point(lam.point)
    lam = tuple(lam)
    if len(lam) == 4:
        if sum(Fraction(v) for v in lam) != 1:
            raise ValueError(f"weights {lam} do not sum to 1")
        return to_point(lam[:3])
    return to_point(lam)


# -- linear algebra over Q --------------------------------------------------

def _dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _sub(a, b) -> Point:
    return tuple(x - y for x, y in zip(a, b))  # type: ignore[return-value]


def _cross(a, b) -> Point:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _det3(rows) -> Fraction:
    return _dot(rows[0], _cross(rows[1], rows[2]))


def _solve3(rows, rhs) -> Optional[Point]:
    """Cramer's rule; None for a singular system."""
    det = _det3(rows)
    if det == 0:
        return None
    out = []
    for k in range(3):
        cols = [list(r) for r in rows]
        for i in range(3):
            cols[i][k] = rhs[i]
        out.append(_det3(cols) / det)
    return tuple(out)  # type: ignore[return-value]


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _primitive(normal, offset) -> Halfspace:
    """Scale a halfspace to coprime integer coefficients (positive scale only)."""
    coeffs = [*normal, offset]
    den = reduce(_lcm, (c.denominator for c in coeffs), 1)
    ints = [int(c * den) for c in coeffs]
    g = reduce(gcd, (abs(i) for i in ints), 0) or 1
    ints = [i // g for i in ints]
    return tuple(Fraction(i) for i in ints[:3]), Fraction(ints[3])  # type: ignore[return-value]


# -- polytopes ---------------------------------------------------------------

def _facets_from_vertices(points: Sequence[Point]) -> list[Halfspace]:
    facets: dict = {}
    for a, b, c in combinations(points, 3):
        normal = _cross(_sub(b, a), _sub(c, a))
        if normal == (0, 0, 0):
            continue
        offset = _dot(normal, a)
        values = [_dot(normal, p) - offset for p in points]
        if all(v <= 0 for v in values):
            hs = _primitive(normal, offset)
        elif all(v >= 0 for v in values):
            hs = _primitive(tuple(-n for n in normal), -offset)
        else:
            continue
        facets[hs] = None
    return list(facets)


def _vertices_from_halfspaces(halfspaces: Sequence[Halfspace]) -> list[Point]:
    verts: dict = {}
    for trio in combinations(halfspaces, 3):
        x = _solve3([h[0] for h in trio], [h[1] for h in trio])
        if x is None:
            continue
        if all(_dot(n, x) <= off for n, off in halfspaces):
            verts[x] = None
    return sorted(verts)


@dataclass(frozen=True)
class Polytope:
    """Full-dimensional convex body carrying both V- and H-representations."""

    vertices: tuple[Point, ...]
    halfspaces: tuple[Halfspace, ...] = field(repr=False)

    @classmethod
    def from_vertices(cls, points) -> "Polytope":
        pts = list(dict.fromkeys(to_point(p) for p in points))
        facets = _facets_from_vertices(pts)
        if len(facets) < 4:
            raise ValueError("points do not span a three-dimensional body")
        verts = _vertices_from_halfspaces(facets)
        return cls(tuple(verts), tuple(facets))

    @classmethod
    def from_halfspaces(cls, halfspaces) -> "Polytope":
        hs = list(dict.fromkeys(_primitive(to_point(n), Fraction(o)) for n, o in halfspaces))
        verts = _vertices_from_halfspaces(hs)
        if len(verts) < 4:
            raise ValueError("halfspaces do not bound a three-dimensional body")
        # keep only supporting facets
        facets = _facets_from_vertices(verts)
        return cls(tuple(verts), tuple(facets))

    def contains(self, x) -> bool:
        return membership(x, self) is not Membership.OUTSIDE

    def centroid(self) -> Point:
        n = len(self.vertices)
        return tuple(sum(v[k] for v in self.vertices) / n for k in range(3))  # type: ignore[return-value]


class Membership(enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def membership(x, poly: Polytope) -> Membership:
    """Exact three-way verdict from the H-representation."""
    x = to_point(x)
    on_face = False
    for normal, offset in poly.halfspaces:
        v = _dot(normal, x)
        if v > offset:
            return Membership.OUTSIDE
        if v == offset:
            on_face = True
    return Membership.BOUNDARY if on_face else Membership.INSIDE


# -- the state tetrahedron and the PPT tetrahedron ---------------------------

def state_halfspaces() -> list[Halfspace]:
    """S = {l_i >= 0, l1 + l2 + l3 <= 1}."""
    one, zero = Fraction(1), Fraction(0)
    return [
        ((-one, zero, zero), zero),
        ((zero, -one, zero), zero),
        ((zero, zero, -one), zero),
        ((one, one, one), one),
    ]


def _check_d(d: int):
    if int(d) != d or d < 2:
        raise ValueError(f"d must be an integer >= 2, got {d!r}")


@lru_cache(maxsize=16)
def _pt_eigen_coefficients(d: int) -> tuple[tuple[Fraction, ...], ...]:
    """E[j][k]: eigenvalue of sigma^{T_A} on range(Q_j) is sum_k lambda_k E[j][k]."""
    table = _exact.pt_overlap_table(d)
    ranks = _exact.projector_ranks(d)
    return tuple(
        tuple(table[j][k] / (ranks[k] * ranks[j]) for k in range(4)) for j in range(4)
    )


def pt_eigenvalues(lam, d: int) -> tuple[Fraction, ...]:
    """Exact spectrum of sigma(lambda)^{T_A}, one value per projector Q_j.

    sigma^{T_A} commutes with the relabelled group, so it is diagonal in the
    Q_j with eigenvalue tr(sigma^{T_A} Q_j) / tr(Q_j).
    """
    _check_d(d)
    full = _lam4(_coords(lam))
    return tuple(_dot(row, full) for row in _pt_eigen_coefficients(d))


def ppt_halfspaces(d: int) -> list[Halfspace]:
    """P as four halfspaces: every partial-transpose eigenvalue >= 0."""
    _check_d(d)
    out = []
    for row in _pt_eigen_coefficients(d):
        # sum_k c_k l_k + c_4 (1 - l1 - l2 - l3) >= 0
        normal = tuple(row[3] - row[k] for k in range(3))
        out.append(_primitive(normal, row[3]))
    return out


@lru_cache(maxsize=16)
def ppt_extreme_points(d: int) -> tuple[Point, ...]:
    """p^(i)_k = tr(Q_i^{T_A} P_k) / tr(Q_i), i = 1..4."""
    _check_d(d)
    table = _exact.pt_overlap_table(d)
    ranks = _exact.projector_ranks(d)
    return tuple(to_point(table[i][k] / ranks[i] for k in range(3)) for i in range(4))


@lru_cache(maxsize=16)
def intersection_vertices(d: int) -> tuple[Point, ...]:
    """Vertices of S intersected with P, by exact vertex enumeration."""
    _check_d(d)
    return tuple(_vertices_from_halfspaces(state_halfspaces() + ppt_halfspaces(d)))


def _werner_isotropic_point(d: int, alpha: Fraction, f: Fraction) -> Point:
    # antisymmetric weight of rho(alpha): tr(rho (1 - F)/2)
    a = Fraction((d - 1) * (d + alpha), 2 * (d * d - alpha))
    return (a * f, (1 - a) * f, a * (1 - f))


@lru_cache(maxsize=16)
def tau_points(d: int) -> dict[int, Point]:
    """Labelled vertices tau^(0)..tau^(5).

    tau^(1..4) come from boundary Werner x isotropic products, tau^(0) from the
    |Phi+>|Psi-> product; tau^(5) is the remaining vertex of S cap P.
    """
    _check_d(d)
    z, one = Fraction(0), Fraction(1)
    taus = {
        0: to_point(_exact.phi_psi_coordinates(d)[:3]),
        1: _werner_isotropic_point(d, one, z),
        2: _werner_isotropic_point(d, Fraction(-d), z),
        3: _werner_isotropic_point(d, one, Fraction(1, d)),
        4: _werner_isotropic_point(d, Fraction(-d), Fraction(1, d)),
    }
    rest = [v for v in intersection_vertices(d) if v not in {taus[k] for k in range(1, 5)}]
    if len(rest) == 1:
        taus[5] = rest[0]
    elif not rest and d == 2:
        # at d = 2 the fifth vertex coincides with tau^(0)
        taus[5] = taus[0]
    else:
        raise ArithmeticError(f"unexpected vertex set of S cap P at d={d}: {rest}")
    return taus


@lru_cache(maxsize=16)
def _separable_hull(d: int) -> Polytope:
    taus = tau_points(d)
    return Polytope.from_vertices([taus[k] for k in range(5)])


def separable_polytope(d: int) -> Polytope:
    """conv{tau^(0), ..., tau^(4)}; three-dimensional for d >= 3."""
    _check_d(d)
    if d < 3:
        raise ValueError("the separable polytope is only defined here for d >= 3")
    return _separable_hull(d)


# -- activation margin ---------------------------------------------------------

def margin_affine(lam, d: int) -> tuple[Fraction, Fraction]:
    """(g0, g1) with g(alpha, lambda) = g0 + g1 * alpha."""
    l1, l2, l3, l4 = _lam4(_coords(lam))
    # g = (d-1)[l1 (d+a) + l2 (d-a)] - l3 (d+a) - l4 (d-a)
    g0 = d * ((d - 1) * (l1 + l2) - l3 - l4)
    g1 = (d - 1) * (l1 - l2) - l3 + l4
    return g0, g1


def activation_margin(lam, alpha, d: Optional[int] = None) -> Fraction:
    """g = d [l1 (d+a) + l2 (d-a)] - [(l1+l3)(d+a) + (l2+l4)(d-a)].

    Has the sign of f - 1/d, f being the filtered maximally entangled fraction.
    """
    if d is None:
        if not isinstance(lam, SymmetricSpec):
            raise TypeError("d is required unless lam is a SymmetricSpec")
        d = lam.d
    alpha = Fraction(alpha)
    if not -d < alpha < d:
        raise ValueError(f"alpha={alpha} must lie strictly inside (-{d}, {d})")
    g0, g1 = margin_affine(lam, d)
    return g0 + g1 * alpha


@dataclass(frozen=True)
class AlphaInterval:
    """Open at ``lo``; closed at ``hi`` iff ``hi_closed``."""

    lo: Fraction
    hi: Fraction
    hi_closed: bool = True

    def __contains__(self, alpha) -> bool:
        alpha = Fraction(alpha)
        return self.lo < alpha and (alpha <= self.hi if self.hi_closed else alpha < self.hi)


def activating_alpha_interval(lam, d: Optional[int] = None) -> Optional[AlphaInterval]:
    """{alpha in (1, d] : g(alpha, lambda) > 0}, or None when empty."""
    if d is None:
        d = lam.d
    g0, g1 = margin_affine(lam, d)
    lo, hi = Fraction(1), Fraction(d)
    if g1 == 0:
        return AlphaInterval(lo, hi) if g0 > 0 else None
    root = -g0 / g1
    if g1 > 0:
        # g > 0 for alpha > root
        if root >= hi:
            return None
        return AlphaInterval(max(lo, root), hi)
    # g > 0 for alpha < root
    if root <= lo:
        return None
    if root > hi:
        return AlphaInterval(lo, hi)
    return AlphaInterval(lo, root, hi_closed=False)


def is_universal_activator(lam, d: Optional[int] = None) -> bool:
    """True when g(1, lambda) >= 0 and g(d, lambda) > 0, so g > 0 on all of (1, d]."""
    if d is None:
        d = lam.d
    g0, g1 = margin_affine(lam, d)
    return g0 + g1 >= 0 and g0 + g1 * d > 0


def witness_value(lam, d: int) -> Fraction:
    """tr(W sigma(lambda)) from exact per-projector traces."""
    return _dot(witness_coefficients(d), _lam4(_coords(lam)))


def witness_coefficients(d: int) -> tuple[Fraction, ...]:
    _check_d(d)
    return _exact.witness_coefficients(d)


# -- classification ------------------------------------------------------------

class Region(enum.Enum):
    NOT_A_STATE = "NOT_A_STATE"
    NPPT = "NPPT"
    SEPARABLE_REGION = "SEPARABLE_REGION"
    BE_ACTIVATING = "BE_ACTIVATING"
    BE_NEVER_ACTIVATING = "BE_NEVER_ACTIVATING"


@dataclass(frozen=True)
class Classification:
    label: Region
    min_pt_eigenvalue: Fraction
    witness_value: Fraction
    activating_alpha_interval: Optional[AlphaInterval]
    informational: bool = False

    @property
    def evidence(self) -> dict:
        return {
            "min_pt_eigenvalue": self.min_pt_eigenvalue,
            "witness_value": self.witness_value,
            "activating_alpha_interval": self.activating_alpha_interval,
        }


def classify(lam, d: Optional[int] = None) -> Classification:
    """Region of an arbitrary (l1, l2, l3) point.

    The activating interval is computed for every point; it only decides the
    label for PPT points outside the separable hull. ``informational`` marks
    d = 2, where the hull is a convention rather than a derived region.
    """
    if d is None:
        d = lam.d
    _check_d(d)
    x = _coords(lam)
    min_eig = min(pt_eigenvalues(x, d))
    wit = witness_value(x, d)
    interval = activating_alpha_interval(x, d)

    def result(label):
        return Classification(label, min_eig, wit, interval, informational=d < 3)

    if any(_dot(n, x) > o for n, o in state_halfspaces()):
        return result(Region.NOT_A_STATE)
    if min_eig < 0:
        return result(Region.NPPT)
    if membership(x, _separable_hull(d)) is not Membership.OUTSIDE:
        return result(Region.SEPARABLE_REGION)
    return result(Region.BE_ACTIVATING if interval is not None else Region.BE_NEVER_ACTIVATING)
