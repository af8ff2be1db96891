"""Self-verification checks: each one pits an implementation against an
independent route (closed form vs d^6 brute force, polytope vs eigenvalues,
bisection vs known thresholds) and reports pass/fail with evidence.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import activation, geometry, witness
from .states import (
    IsotropicParam,
    SymmetricSpec,
    WernerParam,
    isotropic_matrix,
    symmetric_matrix,
    symmetric_operator,
    werner_isotropic_product,
    werner_matrix,
)
from .tensor import hermitian_spectrum, max_entangled_projector, partial_transpose


@dataclass
class CheckResult:
    name: str
    passed: bool
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict}  {self.name}  ({self.seconds:.2f}s)"


def _timed(name: str, fn: Callable[[], tuple[bool, dict]]) -> CheckResult:
    start = time.perf_counter()
    passed, detail = fn()
    return CheckResult(name, bool(passed), time.perf_counter() - start, detail)


def reference_ppt_extremes(d: int) -> list[tuple[Fraction, ...]]:
    """Known closed forms of the PPT-polytope vertices p^(1..4)."""
    F = Fraction
    return [
        (F(d - 1, 2 * d), F(-d - 1, 2 * d), F(1 - d * d, 2 * d)),
        (F(1 - d, 2 * d), F(1 + d, 2 * d), F(-((d - 1) ** 2), 2 * d)),
        (F(-1, 2 * d), F(-1, 2 * d), F(d + 1, 2 * d)),
        (F(1, 2 * d), F(1, 2 * d), F(d - 1, 2 * d)),
    ]


def reference_taus(d: int) -> dict[int, tuple[Fraction, ...]]:
    """Known closed forms of the intersection vertices tau^(0..5)."""
    F = Fraction
    return {
        0: (F(1, 2 * d), F(0), F(d - 2, 4 * d)),
        1: (F(0), F(0), F(1, 2)),
        2: (F(0), F(0), F(0)),
        3: (F(1, 2 * d), F(1, 2 * d), F(d - 1, 2 * d)),
        4: (F(0), F(1, d), F(0)),
        5: (F(1, d + 2), F(0), F(0)),
    }


def random_simplex_point(rng: np.random.Generator, d: int, denominator: int = 10**6) -> SymmetricSpec:
    """Seeded point of S with exact rational weights."""
    w = rng.dirichlet(np.ones(4))
    ints = np.floor(w[:3] * denominator).astype(int)
    pt = tuple(Fraction(int(k), denominator) for k in ints)
    return SymmetricSpec.from_point(d, pt)


def _face_point(rng: np.random.Generator, d: int, taus, denominator: int = 10**6, on_edge=False):
    w = rng.dirichlet(np.ones(3))
    a = Fraction(int(w[0] * denominator), denominator)
    c = Fraction(0) if on_edge else Fraction(max(1, int(w[2] * denominator)), denominator)
    b = 1 - a - c
    return tuple(a * x + b * y + c * z for x, y, z in zip(taus[3], taus[4], taus[5]))


# -- 1 ---------------------------------------------------------------------

def check_vertex_tables(d: int, general_ds=range(2, 7)) -> CheckResult:
    def run():
        detail = {}
        ok = True
        for dd in sorted(set(general_ds) | {d}):
            p_ok = list(geometry.ppt_extreme_points(dd)) == reference_ppt_extremes(dd)
            taus = reference_taus(dd)
            t_ok = set(geometry.intersection_vertices(dd)) == {taus[k] for k in range(1, 6)}
            labelled = geometry.tau_points(dd)
            l_ok = all(labelled[k] == taus[k] for k in range(6))
            detail[dd] = {"ppt_extremes": p_ok, "intersection": t_ok, "labelled_taus": l_ok}
            ok &= p_ok and t_ok and l_ok
        return ok, detail

    return _timed("vertex tables", run)


# -- 2 ---------------------------------------------------------------------

def check_third_point(d: int, n_alpha: int = 50, brute_samples: int = 5) -> CheckResult:
    def run():
        taus = geometry.tau_points(d)
        worst = 0.0
        brute_worst = 0.0

        def line(t):
            return SymmetricSpec.from_point(d, tuple(t * a + (1 - t) * b for a, b in zip(taus[5], taus[1])))

        alphas = [1 + (d - 1) * k / n_alpha for k in range(1, n_alpha + 1)]
        for i, alpha in enumerate(alphas):
            def h(t):
                return activation.fidelity_reduced(alpha, line(t)).fidelity - 1 / d

            root = brentq(h, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            t_formula = (2 + d) / (2 * alpha + d)
            worst = max(worst, abs(root - t_formula))
            if d <= activation.BRUTE_FORCE_MAX_D and i % max(1, n_alpha // brute_samples) == 0:
                sigma = symmetric_matrix(line(Fraction(t_formula)))
                f = activation.fidelity_bruteforce(alpha, sigma, d).fidelity
                brute_worst = max(brute_worst, abs(f - 1 / d))
        t_half, point = activation.plane_third_point(Fraction(d, 2), d)
        on_tau0 = point == taus[0]
        ok = worst <= 1e-9 and brute_worst <= 1e-10 and on_tau0
        return ok, {"max_root_error": worst, "max_bruteforce_deviation": brute_worst,
                    "t_at_d_over_2": str(t_half), "lands_on_tau0": on_tau0}

    return _timed(f"separating-plane third point (d={d})", run)


# -- 3 ---------------------------------------------------------------------

def check_closed_form(d: int, pairs: int = 200, seed: int = 0) -> CheckResult:
    def run():
        if d > activation.BRUTE_FORCE_MAX_D:
            return True, {"skipped": "brute force limited to d <= 3"}
        rng = np.random.default_rng([seed, d, 3])
        worst_f = worst_p = 0.0
        for _ in range(pairs):
            alpha = float(rng.uniform(-d, d))
            lam = random_simplex_point(rng, d)
            red = activation.fidelity_reduced(alpha, lam)
            bf = activation.fidelity_bruteforce(alpha, symmetric_matrix(lam), d)
            worst_f = max(worst_f, abs(red.fidelity - bf.fidelity))
            worst_p = max(worst_p, abs(red.success_probability - bf.success_probability))
        worst_prod = 0.0
        for _ in range(10):
            alpha, alpha2 = rng.uniform(-d, d, size=2)
            f0 = float(rng.uniform(0, 1))
            sigma = werner_isotropic_product(WernerParam(d, float(alpha2)), IsotropicParam(d, f0))
            worst_prod = max(worst_prod, abs(activation.fidelity_bruteforce(float(alpha), sigma, d).fidelity - f0))
        ok = worst_f <= 1e-10 and worst_p <= 1e-10 and worst_prod <= 1e-10
        return ok, {"max_fidelity_gap": worst_f, "max_probability_gap": worst_p,
                    "max_product_gap": worst_prod}

    return _timed(f"closed-form fidelity vs brute force (d={d})", run)


# -- 4 ---------------------------------------------------------------------

def numeric_min_pt_eigenvalue(lam: SymmetricSpec) -> float:
    sigma = symmetric_operator(lam)
    return float(hermitian_spectrum(partial_transpose(sigma, ("A1", "A2")))[0])


def check_ppt_cross_validation(d: int, samples: int = 500, grid: int = 6, seed: int = 0) -> CheckResult:
    def run():
        ppt = geometry.Polytope.from_vertices(geometry.ppt_extreme_points(d))
        rng = np.random.default_rng([seed, d, 4])
        points = [random_simplex_point(rng, d) for _ in range(samples)]
        points += [
            SymmetricSpec.from_point(d, (Fraction(i, grid), Fraction(j, grid), Fraction(k, grid)))
            for i in range(grid + 1) for j in range(grid + 1 - i) for k in range(grid + 1 - i - j)
        ]
        mismatches, adjudicated = [], 0
        for lam in points:
            member = geometry.membership(lam.point, ppt)
            exact_min = min(geometry.pt_eigenvalues(lam, d))
            num_min = numeric_min_pt_eigenvalue(lam)
            if abs(num_min) <= 1e-9:
                adjudicated += 1
                agree = (member is not geometry.Membership.OUTSIDE) == (exact_min >= 0)
                agree &= (member is geometry.Membership.BOUNDARY) == (exact_min == 0)
            else:
                agree = (member is not geometry.Membership.OUTSIDE) == (num_min > 0)
                agree &= (exact_min >= 0) == (num_min > 0)
            agree &= abs(float(exact_min) - num_min) <= 1e-9
            if not agree:
                mismatches.append([str(x) for x in lam.point])
        return not mismatches, {"points": len(points), "exactly_adjudicated": adjudicated,
                                "mismatches": mismatches[:10]}

    return _timed(f"PPT polytope vs partial-transpose spectrum (d={d})", run)


# -- 5 ---------------------------------------------------------------------

def check_universal_activators(d: int, samples: int = 100, n_alpha: int = 100, seed: int = 0) -> CheckResult:
    def run():
        if d < 3:
            return True, {"skipped": "informational only at d = 2"}
        taus = geometry.tau_points(d)
        rng = np.random.default_rng([seed, d, 5])
        alphas = [1 + Fraction(d - 1) * k / n_alpha for k in range(1, n_alpha + 1)]
        # alpha = d sits outside the margin's open domain; evaluate the affine form there
        def g(pt, a):
            g0, g1 = geometry.margin_affine(pt, d)
            return g0 + g1 * a

        face_fail = edge_fail = 0
        for _ in range(samples):
            pt = _face_point(rng, d, taus)
            if not (all(g(pt, a) > 0 for a in alphas) and geometry.is_universal_activator(pt, d)):
                face_fail += 1
        for _ in range(samples // 4):
            pt = _face_point(rng, d, taus, on_edge=True)
            if any(g(pt, a) != 0 for a in alphas) or geometry.is_universal_activator(pt, d):
                edge_fail += 1
        return face_fail == 0 and edge_fail == 0, {"face_failures": face_fail, "edge_failures": edge_fail}

    return _timed(f"universal activators on the tau3-tau4-tau5 face (d={d})", run)


# -- 6 ---------------------------------------------------------------------

def check_witness(d: int, samples: int = 100_000, seed: int = 0, general_ds=range(2, 7)) -> CheckResult:
    def run():
        detail = {}
        ok = True
        rng = np.random.default_rng([seed, d, 6])
        for dd in sorted(set(general_ds) | {d}):
            coeffs = geometry.witness_coefficients(dd)
            form_ok = coeffs == (Fraction(2 - dd), Fraction(0), Fraction(2), Fraction(0))
            for _ in range(20):
                lam = random_simplex_point(rng, dd, denominator=997)
                form_ok &= geometry.witness_value(lam, dd) == (2 - dd) * lam.lam[0] + 2 * lam.lam[2]
            detail[f"linear_form_d{dd}"] = form_ok
            ok &= form_ok
        if d <= 4:
            w = witness.witness_operator(d).matrix
            worst = 0.0
            for _ in range(20):
                lam = random_simplex_point(rng, d)
                direct = float(np.real(np.sum(w.T * symmetric_matrix(lam).matrix)))
                worst = max(worst, abs(direct - float(geometry.witness_value(lam, d))))
            detail["float_trace_gap"] = worst
            ok &= worst <= 1e-12
        floor = witness.verify_witness_positivity(d, samples, seed).value
        detail["min_product_expectation"] = floor
        ok &= -1e-9 <= floor <= 1e-3
        block = np.eye(d * d) - (d / 2) * max_entangled_projector(d).matrix
        r2 = witness.rank2_minimize(block, d, d, seed=seed)[0]
        detail["rank2_min_of_1_minus_dP_half"] = r2
        ok &= abs(r2) <= 1e-6
        return ok, detail

    return _timed(f"witness form and positivity (d={d})", run)


# -- 7 ---------------------------------------------------------------------

def _bisect(pred, lo: float, hi: float, tol: float) -> float:
    """pred(lo) False, pred(hi) True; return the crossing."""
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def check_distillability_thresholds(d: int, restarts: int = 64, seed: int = 0) -> CheckResult:
    def run():
        def certified(rho):
            return witness.certify_1distillable(rho, restarts, seed) is witness.Certificate.DISTILLABLE_CERTIFIED

        alpha_star = _bisect(lambda a: certified(werner_matrix(WernerParam(d, a))), 1.0, float(d), 1e-6)
        f_star = _bisect(lambda f: certified(isotropic_matrix(IsotropicParam(d, f))), 0.0, 1.0, 1e-6)
        top = witness.rank2_min(werner_matrix(WernerParam(d, float(d))), restarts, seed).min_value
        expected_top = (1 - 2 * d / d) / (d * d - d)
        ok = abs(alpha_star - d / 2) <= 1e-4 and abs(f_star - 1 / d) <= 1e-4 and abs(top - expected_top) <= 1e-6
        return ok, {"alpha_star": alpha_star, "f_star": f_star, "rank2_min_at_alpha_d": top,
                    "expected_at_alpha_d": expected_top}

    return _timed(f"1-distillability thresholds by bisection (d={d})", run)


# -- 8 ---------------------------------------------------------------------

def check_bell_variant(d: int, samples: int = 10, seed: int = 0) -> CheckResult:
    def run():
        if d > activation.BRUTE_FORCE_MAX_D:
            return True, {"skipped": "brute force limited to d <= 3"}
        rng = np.random.default_rng([seed, d, 8])
        worst_ratio = worst_spread = 0.0
        flagged = 0
        for _ in range(samples):
            lam = random_simplex_point(rng, d)
            alpha = float(rng.uniform(1, d))
            try:
                rep = activation.bell_basis_variant(alpha, lam, d)
            except ArithmeticError as exc:
                return False, {"error": str(exc)}
            worst_ratio = max(worst_ratio, abs(rep.total_probability - d * d * rep.baseline_probability))
            worst_spread = max(worst_spread, max(rep.branch_probabilities) - min(rep.branch_probabilities))
            flagged += len(rep.flagged_branches)
        ok = worst_ratio <= 1e-9 and worst_spread <= 1e-9
        return ok, {"max_total_minus_d2_baseline": worst_ratio, "max_branch_spread": worst_spread,
                    "flagged_branches": flagged}

    return _timed(f"Bell-basis variant success factor d^2 (d={d})", run)


# -- 9 ---------------------------------------------------------------------

def tetrahedron_grid(d: int, n: int):
    """Barycentric lattice of conv{tau0, tau2, tau4, tau5} with C(n+3, 3) points."""
    taus = geometry.tau_points(d)
    corners = [taus[0], taus[2], taus[4], taus[5]]
    for i in range(n + 1):
        for j in range(n + 1 - i):
            for k in range(n + 1 - i - j):
                w = (Fraction(i, n), Fraction(j, n), Fraction(k, n), Fraction(n - i - j - k, n))
                yield tuple(sum(wi * c[m] for wi, c in zip(w, corners)) for m in range(3))


def check_tetrahedron_audit(d: int, n: int = 38, brute_points: int = 20, seed: int = 0) -> CheckResult:
    def run():
        if d < 3:
            return True, {"skipped": "informational only at d = 2"}
        pts = list(tetrahedron_grid(d, n))
        inconsistent = 0
        activating = []
        undistillable = 0
        for pt in pts:
            interval = geometry.activating_alpha_interval(pt, d)
            g0, g1 = geometry.margin_affine(pt, d)
            somewhere = g0 + g1 > 0 or g0 + g1 * d > 0
            if (interval is not None) != somewhere:
                inconsistent += 1
            activating.append(interval is not None)
            # activates some rho(alpha) that is entangled but not 1-distillable
            if g0 + g1 > 0 or g0 + g1 * Fraction(d, 2) > 0:
                undistillable += 1
        fraction = sum(activating) / len(pts)
        brute_bad = 0
        if d <= activation.BRUTE_FORCE_MAX_D:
            rng = np.random.default_rng([seed, d, 9])
            for idx in rng.choice(len(pts), size=brute_points, replace=False):
                pt = pts[int(idx)]
                lam = SymmetricSpec.from_point(d, pt)
                sigma = symmetric_matrix(lam)
                interval = geometry.activating_alpha_interval(pt, d)
                if interval is not None:
                    alpha = float((interval.lo + interval.hi) / 2)
                    if not activation.fidelity_bruteforce(alpha, sigma, d).fidelity > 1 / d:
                        brute_bad += 1
                else:
                    for alpha in np.linspace(1, d, 9)[1:]:
                        if activation.fidelity_bruteforce(float(alpha), sigma, d).fidelity > 1 / d + 1e-10:
                            brute_bad += 1
                            break
        ok = inconsistent == 0 and brute_bad == 0
        return ok, {"grid_points": len(pts), "activating_fraction": fraction,
                    "activating_fraction_alpha_up_to_d_half": undistillable / len(pts),
                    "interval_inconsistencies": inconsistent, "bruteforce_disagreements": brute_bad}

    return _timed(f"non-activating tetrahedron audit (d={d})", run)


def run_suite(d: int, seed: int = 0) -> list[CheckResult]:
    """Every check at dimension ``d`` with the acceptance-level sample sizes."""
    return [
        check_vertex_tables(d),
        check_third_point(d),
        check_closed_form(d, seed=seed),
        check_ppt_cross_validation(d, seed=seed),
        check_universal_activators(d, seed=seed),
        check_witness(d, seed=seed),
        check_distillability_thresholds(d, seed=seed),
        check_bell_variant(d, seed=seed),
        check_tetrahedron_audit(d, seed=seed),
    ]
