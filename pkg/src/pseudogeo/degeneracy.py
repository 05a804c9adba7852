"""Location and classification of degenerate points.

The degenerate curve is the zero set of the discriminant ``ac - b^2``.  At a
degenerate point q there is a single isotropic (null) direction, and the
directions in which geodesics can reach q are the projective roots of a cubic
in the slope.  The taxonomy is driven by two facts: whether the isotropic
direction is transversal or tangent to the degenerate curve (cases C vs D,
equivalently simple vs double root of the cubic), and, in the tangent case,
the linearization type of the lifted null field (saddle / node / focus).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .metric import BBox, MetricField

__all__ = [
    "CHART_P",
    "CHART_PBAR",
    "ProjectiveDirection",
    "projective_gap",
    "DirectionCubic",
    "RootDirection",
    "DegenerateReport",
    "DegeneracyError",
    "OffCurveError",
    "CurveSearchError",
    "NonGenericError",
    "delta",
    "find_S0_point",
    "refine_to_curve",
    "isotropic_direction",
    "direction_cubic",
    "admissible_directions",
    "tangency_test",
    "classify",
    "trace_degenerate_curve",
]

CHART_P = "p"
CHART_PBAR = "pbar"

MULTIPLICITY_TOL = 1e-9
ON_CURVE_TOL = 1e-8


class DegeneracyError(ValueError):
    """Base class for structured degeneracy failures."""


class OffCurveError(DegeneracyError):
    """The query point is not on the degenerate curve."""


class CurveSearchError(DegeneracyError):
    """Search for a degenerate point failed (no sign change, divergence)."""


class NonGenericError(DegeneracyError):
    """The configuration violates the genericity the taxonomy assumes."""


# --- projective directions --------------------------------------------------


@dataclass(frozen=True)
class ProjectiveDirection:
    """A tangent direction through the slope charts.

    ``chart == "p"`` stores the slope dy/dx; ``chart == "pbar"`` stores dx/dy,
    so a pbar value of 0 encodes the vertical direction (infinite slope).
    """

    chart: str
    value: float

    def __post_init__(self) -> None:
        if self.chart not in (CHART_P, CHART_PBAR):
            raise ValueError(f"chart must be {CHART_P!r} or {CHART_PBAR!r}")
        if not math.isfinite(self.value):
            raise ValueError("direction value must be finite; use the other chart")
        object.__setattr__(self, "value", self.value + 0.0)

    def canonical(self) -> "ProjectiveDirection":
        """Representative with |value| <= 1 (ties keep the slope chart)."""
        if abs(self.value) > 1.0:
            other = CHART_PBAR if self.chart == CHART_P else CHART_P
            return ProjectiveDirection(other, 1.0 / self.value)
        return self

    @classmethod
    def from_vector(cls, dx: float, dy: float) -> "ProjectiveDirection":
        """Canonical direction of a nonzero tangent vector."""
        if dx == 0.0 and dy == 0.0:
            raise ValueError("zero vector has no direction")
        if abs(dx) >= abs(dy):
            return cls(CHART_P, dy / dx).canonical()
        return cls(CHART_PBAR, dx / dy).canonical()

    def slope(self) -> float:
        """dy/dx, possibly infinite."""
        if self.chart == CHART_P:
            return self.value
        return math.inf if self.value == 0.0 else 1.0 / self.value

    def vector(self) -> tuple[float, float]:
        """Unit tangent (dx, dy) representing the direction."""
        if self.chart == CHART_P:
            vx, vy = 1.0, self.value
        else:
            vx, vy = self.value, 1.0
        norm = math.hypot(vx, vy)
        return (vx / norm, vy / norm)

    def to_chart(self, chart: str) -> "ProjectiveDirection":
        if chart == self.chart:
            return self
        if self.value == 0.0:
            raise ValueError("direction lies at the other chart's infinity")
        return ProjectiveDirection(chart, 1.0 / self.value)

    def describe(self) -> str:
        if self.chart == CHART_PBAR and self.value == 0.0:
            return "p=inf"
        return f"p={self.slope():.12g}"


def projective_gap(d1: ProjectiveDirection, d2: ProjectiveDirection) -> float:
    """Sine of the angle between two directions (0 iff projectively equal)."""
    v1 = d1.vector()
    v2 = d2.vector()
    return abs(v1[0] * v2[1] - v1[1] * v2[0])


# --- discriminant and curve location ----------------------------------------


def delta(metric: MetricField, q: Sequence[float]) -> tuple[float, tuple[float, float]]:
    """Discriminant value and gradient at q."""
    value, gx, gy = metric.discriminant_jet(float(q[0]), float(q[1]))
    return value, (gx, gy)


def _axis_bisect(metric, point, axis, lo, hi, f_lo, tol, max_iter=200):
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        coords = list(point)
        coords[axis] = mid
        value = metric.discriminant(coords[0], coords[1])
        if abs(value) <= tol or (hi - lo) <= 1e-17 * max(1.0, abs(mid)):
            return mid, value
        if (value < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, value
        else:
            hi = mid
    return 0.5 * (lo + hi), value


def find_S0_point(
    metric: MetricField,
    seed: Sequence[float],
    bbox: Sequence[float] | None = None,
    tol: float = 1e-12,
) -> tuple[float, float]:
    """Move the seed onto the degenerate curve along one coordinate axis.

    The search axis is the one with the larger |discriminant gradient|
    component at the seed (ties prefer y).  A Newton iteration is tried
    first; if it stalls, a bracketing scan along the axis inside the bbox
    finds a sign change and bisects.
    """
    box: BBox = metric.bbox if bbox is None else tuple(float(v) for v in bbox)  # type: ignore[assignment]
    x, y = float(seed[0]), float(seed[1])
    value, gx, gy = metric.discriminant_jet(x, y)
    if abs(value) <= tol:
        return (x, y)
    scale = max(metric.coefficient_scale(x, y), 1e-30)
    if max(abs(gx), abs(gy)) <= 1e-14 * scale * scale:
        raise CurveSearchError(
            f"discriminant gradient vanishes at seed ({x:g}, {y:g})"
        )
    axis = 1 if abs(gy) >= abs(gx) else 0
    lo_bound = box[2] if axis == 1 else box[0]
    hi_bound = box[3] if axis == 1 else box[1]
    span = hi_bound - lo_bound

    # fast path: Newton along the fixed axis
    coords = [x, y]
    s = coords[axis]
    for _ in range(60):
        jet = metric.discriminant_jet(coords[0], coords[1])
        value = jet[0]
        if abs(value) <= tol:
            return (coords[0], coords[1])
        derivative = jet[1 + axis]
        if abs(derivative) <= 1e-30:
            break
        step = value / derivative
        s_new = s - step
        if not (lo_bound - 0.1 * span <= s_new <= hi_bound + 0.1 * span):
            break
        if abs(step) > 0.5 * span:
            break
        s = s_new
        coords[axis] = s

    # bracketing fallback: uniform scan along the axis
    n = 257
    grid = np.linspace(lo_bound, hi_bound, n)
    coords = [x, y]
    values = np.empty(n)
    for i, g in enumerate(grid):
        coords[axis] = g
        values[i] = metric.discriminant(coords[0], coords[1])
    seed_pos = (x, y)[axis]
    best = None
    for i in range(n - 1):
        if values[i] == 0.0:
            coords[axis] = grid[i]
            return (coords[0], coords[1])
        if (values[i] < 0.0) != (values[i + 1] < 0.0):
            dist = abs(0.5 * (grid[i] + grid[i + 1]) - seed_pos)
            if best is None or dist < best[0]:
                best = (dist, i)
    if best is None:
        raise CurveSearchError(
            "no discriminant sign change along the search axis inside the bbox"
        )
    i = best[1]
    coords = [x, y]
    s, value = _axis_bisect(metric, coords, axis, grid[i], grid[i + 1], values[i], tol)
    coords[axis] = s
    if abs(value) > tol:
        raise CurveSearchError(
            f"bisection stalled with |discriminant| = {abs(value):.3e} > {tol:g}"
        )
    return (coords[0], coords[1])


def refine_to_curve(
    metric: MetricField,
    point: Sequence[float],
    tol: float = 1e-12,
    max_iter: int = 50,
) -> tuple[float, float]:
    """Gradient-direction Newton refinement for points already near the curve."""
    x, y = float(point[0]), float(point[1])
    for _ in range(max_iter):
        value, gx, gy = metric.discriminant_jet(x, y)
        if abs(value) <= tol:
            return (x, y)
        norm2 = gx * gx + gy * gy
        if norm2 <= 1e-60:
            raise CurveSearchError("degenerate discriminant gradient during refinement")
        x -= value * gx / norm2
        y -= value * gy / norm2
    raise CurveSearchError("curve refinement did not converge")


# --- isotropic direction ----------------------------------------------------


def isotropic_direction(
    metric: MetricField,
    q: Sequence[float],
    on_curve_tol: float = ON_CURVE_TOL,
) -> ProjectiveDirection:
    """The unique null direction at a degenerate point."""
    x, y = float(q[0]), float(q[1])
    a, b, c = metric.coefficients(x, y)
    scale = max(abs(a), abs(b), abs(c))
    if scale <= 1e-30:
        raise NonGenericError(
            f"all metric coefficients vanish at ({x:g}, {y:g})"
        )
    disc = metric.discriminant(x, y)
    if abs(disc) > on_curve_tol * scale * scale:
        raise OffCurveError(
            f"point ({x:g}, {y:g}) is not degenerate: discriminant {disc:.3e}"
        )
    if abs(c) >= abs(a):
        direction = ProjectiveDirection(CHART_P, -b / c)
    else:
        direction = ProjectiveDirection(CHART_PBAR, -b / a)
    return direction.canonical()


# --- the admissible-direction cubic ------------------------------------------


@dataclass(frozen=True)
class DirectionCubic:
    """Cubic in the slope whose projective roots are the admissible directions.

    ``coeffs[i]`` multiplies slope^i in the stated chart.
    """

    point: tuple[float, float]
    chart: str
    coeffs: tuple[float, float, float, float]

    def value(self, slope: float) -> float:
        c0, c1, c2, c3 = self.coeffs
        return c0 + slope * (c1 + slope * (c2 + slope * c3))

    def derivative(self, slope: float) -> float:
        _, c1, c2, c3 = self.coeffs
        return c1 + slope * (2.0 * c2 + slope * 3.0 * c3)

    def scale(self) -> float:
        return max(abs(v) for v in self.coeffs)


def direction_cubic(
    metric: MetricField,
    q: Sequence[float],
    chart: str = CHART_P,
) -> DirectionCubic:
    """Evaluate the admissible-direction cubic at q in the requested chart."""
    x, y = float(q[0]), float(q[1])
    if chart == CHART_P:
        coeffs = metric.cubic_values(x, y)
        return DirectionCubic((x, y), chart, coeffs)
    if chart == CHART_PBAR:
        coeffs = metric.swapped.cubic_values(y, x)
        return DirectionCubic((x, y), chart, coeffs)
    raise ValueError(f"unknown chart {chart!r}")


def _polish_root(coeffs: tuple[float, ...], root: float, order: int) -> float:
    # Newton steps on the cubic (or its derivative, for a double root)
    c0, c1, c2, c3 = coeffs
    for _ in range(3):
        if order == 1:
            value = c0 + root * (c1 + root * (c2 + root * c3))
            slope = c1 + root * (2.0 * c2 + root * 3.0 * c3)
        else:
            value = c1 + root * (2.0 * c2 + root * 3.0 * c3)
            slope = 2.0 * c2 + root * 6.0 * c3
        if abs(slope) <= 1e-30:
            return root
        step = value / slope
        if not math.isfinite(step):
            return root
        root -= step
    return root


def _cubic_projective_roots(
    coeffs: tuple[float, float, float, float],
    tol: float,
) -> tuple[list[tuple[float | None, int]], dict[str, float]]:
    """Projective roots with multiplicities; ``None`` stands for infinity.

    Decisions (degree drop, multiple roots) are made on coefficients
    normalized to unit max-magnitude with the absolute tolerance ``tol``.
    """
    scale = max(abs(v) for v in coeffs)
    if scale <= 0.0:
        raise NonGenericError("direction cubic vanishes identically")
    nu = tuple(v / scale for v in coeffs)
    diagnostics: dict[str, float] = {}

    degree = 3
    while degree > 0 and abs(nu[degree]) <= tol:
        degree -= 1
    inf_mult = 3 - degree
    roots: list[tuple[float | None, int]] = []

    if degree == 0:
        if abs(nu[0]) <= tol:
            raise NonGenericError("direction cubic vanishes identically")
        diagnostics["degree"] = 0.0
        return [(None, 3)], diagnostics

    if degree == 1:
        roots.append((-nu[0] / nu[1], 1))
    elif degree == 2:
        q0, q1, q2 = nu[0], nu[1], nu[2]
        disc = q1 * q1 - 4.0 * q2 * q0
        diagnostics["quad_disc"] = disc
        if abs(disc) <= tol:
            roots.append((-q1 / (2.0 * q2), 2))
        elif disc > 0.0:
            # numerically stable quadratic roots
            s = math.sqrt(disc)
            r1 = (-q1 - math.copysign(s, q1)) / (2.0 * q2)
            r2 = q0 / (q2 * r1) if r1 != 0.0 else -q1 / q2
            roots.extend([(r1, 1), (r2, 1)])
        # disc < -tol: complex pair, no real finite roots
    else:
        q0, q1, q2, q3 = nu
        disc = (
            18.0 * q3 * q2 * q1 * q0
            - 4.0 * q2 **3 * q0
            + q2 **2 * q1 **2
            - 4.0 * q3 * q1 **3
            - 27.0 * q3 **2 * q0 **2
        )
        diagnostics["cubic_disc"] = disc
        shift = q2 / (3.0 * q3)
        dep_p = q1 / q3 - 3.0 * shift * shift
        dep_q = 2.0 * shift **3 - shift * q1 / q3 + q0 / q3
        diagnostics["depressed_p"] = dep_p
        if abs(disc) <= tol:
            if abs(dep_p) <= tol:
                roots.append((-shift, 3))
            else:
                double = -1.5 * dep_q / dep_p - shift
                simple = 3.0 * dep_q / dep_p - shift
                roots.extend([(double, 2), (simple, 1)])
        elif disc > 0.0:
            # three distinct real roots, trigonometric form
            m = 2.0 * math.sqrt(-dep_p / 3.0)
            arg = 3.0 * dep_q / (dep_p * m)
            arg = min(1.0, max(-1.0, arg))
            theta = math.acos(arg)
            for k in range(3):
                roots.append((m * math.cos((theta - 2.0 * math.pi * k) / 3.0) - shift, 1))
        else:
            # one real root, Cardano
            half_q = -0.5 * dep_q
            radical = math.sqrt(half_q * half_q + (dep_p / 3.0) **3)
            u = math.copysign(abs(half_q + radical) ** (1.0 / 3.0), half_q + radical)
            v = math.copysign(abs(half_q - radical) ** (1.0 / 3.0), half_q - radical)
            roots.append((u + v - shift, 1))

    polished = [
        (_polish_root(coeffs, r, mult), mult) if r is not None else (r, mult)
        for r, mult in roots
    ]
    if inf_mult > 0:
        polished.append((None, inf_mult))
    return polished, diagnostics


@dataclass(frozen=True)
class RootDirection:
    direction: ProjectiveDirection
    multiplicity: int
    isotropic: bool = False

    def to_dict(self) -> dict[str, object]:
        return {
            "chart": self.direction.chart,
            "value": self.direction.value,
            "slope": None if self.direction.slope() == math.inf else self.direction.slope(),
            "multiplicity": self.multiplicity,
            "isotropic": self.isotropic,
        }


def admissible_directions(
    metric: MetricField,
    q: Sequence[float],
    tol: float = MULTIPLICITY_TOL,
) -> list[RootDirection]:
    """Projective roots of the direction cubic at q, isotropic root flagged."""
    cubic = direction_cubic(metric, q)
    raw, _ = _cubic_projective_roots(cubic.coeffs, tol)
    iso = isotropic_direction(metric, q)
    directions: list[RootDirection] = []
    for value, mult in raw:
        if value is None:
            direction = ProjectiveDirection(CHART_PBAR, 0.0)
        else:
            direction = ProjectiveDirection(CHART_P, value).canonical()
        directions.append(RootDirection(direction, mult))
    gaps = [projective_gap(rd.direction, iso) for rd in directions]
    nearest = int(np.argmin(gaps))
    directions[nearest] = RootDirection(
        directions[nearest].direction, directions[nearest].multiplicity, True
    )
    directions.sort(
        key=lambda rd: (rd.direction.chart != CHART_P, rd.direction.value)
    )
    return directions


def tangency_test(
    metric: MetricField,
    q: Sequence[float],
    tol: float = 1e-8,
) -> bool:
    """True iff the isotropic direction is tangent to the degenerate curve."""
    value, (gx, gy) = delta(metric, q)
    norm = math.hypot(gx, gy)
    scale = max(metric.coefficient_scale(float(q[0]), float(q[1])), 1e-30)
    if norm <= 1e-12 * scale * scale:
        raise NonGenericError(f"degenerate curve is not regular at {tuple(q)}")
    vx, vy = isotropic_direction(metric, q).vector()
    return abs(gx * vx + gy * vy) <= tol * norm


# --- classification ----------------------------------------------------------


@dataclass
class DegenerateReport:
    point: tuple[float, float]
    discriminant_gradient: tuple[float, float]
    isotropic: ProjectiveDirection
    cubic: DirectionCubic
    roots: list[RootDirection]
    case: str
    isotropic_spectrum: tuple[complex, complex] | None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, object]:
        spectrum = None
        if self.isotropic_spectrum is not None:
            spectrum = [[z.real, z.imag] for z in self.isotropic_spectrum]
        return {
            "point": list(self.point),
            "grad_delta": list(self.discriminant_gradient),
            "isotropic": {
                "chart": self.isotropic.chart,
                "value": self.isotropic.value,
            },
            "cubic": {
                "chart": self.cubic.chart,
                "coeffs": list(self.cubic.coeffs),
            },
            "roots": [rd.to_dict() for rd in self.roots],
            "case": self.case,
            "isotropic_spectrum": spectrum,
            "warnings": list(self.warnings),
        }


def _lifted_jacobian(metric: MetricField, x: float, y: float, p: float) -> np.ndarray:
    """Exact Jacobian of the lifted null field at (x, y, p)."""
    (a, b, c,
     ax, ay, bx, by, cx, cy,
     axx, axy, ayy, bxx, bxy, byy, cxx, cxy, cyy) = metric.form_jet2(x, y)
    f_p = 2.0 * b + 2.0 * c * p
    f_y = ay + 2.0 * by * p + cy * p * p
    f_px = 2.0 * bx + 2.0 * cx * p
    f_py = 2.0 * by + 2.0 * cy * p
    f_pp = 2.0 * c
    f_xx = axx + 2.0 * bxx * p + cxx * p * p
    f_xy = axy + 2.0 * bxy * p + cxy * p * p
    f_yy = ayy + 2.0 * byy * p + cyy * p * p
    f_xp = 2.0 * bx + 2.0 * cx * p
    f_yp = 2.0 * by + 2.0 * cy * p
    return np.array(
        [
            [f_px, f_py, f_pp],
            [p * f_px, p * f_py, p * f_pp + f_p],
            [-(f_xx + p * f_xy), -(f_xy + p * f_yy), -(f_xp + p * f_yp + f_y)],
        ]
    )


def _lifted_spectrum(
    metric: MetricField, q: tuple[float, float], iso: ProjectiveDirection
) -> tuple[tuple[complex, complex], float]:
    """Two leading eigenvalues of the lifted-field linearization at (q, iso)."""
    iso = iso.canonical()
    if iso.chart == CHART_P:
        jac = _lifted_jacobian(metric, q[0], q[1], iso.value)
    else:
        jac = _lifted_jacobian(metric.swapped, q[1], q[0], iso.value)
    eigenvalues = sorted(np.linalg.eigvals(jac), key=lambda z: -abs(z))
    lead = complex(eigenvalues[0]), complex(eigenvalues[1])
    residual = abs(eigenvalues[2])
    # deterministic presentation: descending real part, then descending imag
    pair = tuple(sorted(lead, key=lambda z: (-z.real, -z.imag)))
    return pair, residual  # type: ignore[return-value]


def _case_letter(roots: list[RootDirection]) -> str:
    iso_mult = next(rd.multiplicity for rd in roots if rd.isotropic)
    if iso_mult >= 3:
        raise NonGenericError("isotropic direction is a triple admissible root")
    if iso_mult == 2:
        return "D"
    total = sum(rd.multiplicity for rd in roots)
    if total == 1:
        return "C1"
    if any(rd.multiplicity == 2 for rd in roots):
        return "C2"
    return "C3"


def _case_at(metric: MetricField, point: tuple[float, float], tol: float) -> str | None:
    try:
        return _case_letter(admissible_directions(metric, point, tol))
    except DegeneracyError:
        return None


def classify(
    metric: MetricField,
    q: Sequence[float],
    tol: float = MULTIPLICITY_TOL,
) -> DegenerateReport:
    """Full degenerate-point report: directions, case, spectrum, warnings."""
    x, y = float(q[0]), float(q[1])
    value, (gx, gy) = delta(metric, (x, y))
    scale = max(metric.coefficient_scale(x, y), 1e-30)
    if abs(value) > ON_CURVE_TOL * scale * scale:
        raise OffCurveError(
            f"point ({x:g}, {y:g}) has discriminant {value:.3e}; "
            "refine it with find_S0_point first"
        )
    grad_norm = math.hypot(gx, gy)
    if grad_norm <= 1e-12 * scale * scale:
        raise NonGenericError(f"degenerate curve is not regular at ({x:g}, {y:g})")

    warnings: list[str] = []
    iso = isotropic_direction(metric, (x, y))
    cubic = direction_cubic(metric, (x, y))
    raw, diagnostics = _cubic_projective_roots(cubic.coeffs, tol)
    roots = admissible_directions(metric, (x, y), tol)

    iso_root = next(rd for rd in roots if rd.isotropic)
    gap = projective_gap(iso_root.direction, iso)
    if gap > 1e-4:
        warnings.append(
            f"isotropic direction distant from nearest admissible root (gap {gap:.2e})"
        )

    for key in ("cubic_disc", "quad_disc"):
        if key in diagnostics and tol < abs(diagnostics[key]) <= 100.0 * tol:
            warnings.append("cubic discriminant near multiplicity threshold")
            break

    case = _case_letter(roots)
    tangent = tangency_test(metric, (x, y))
    if tangent != (case == "D"):
        warnings.append("tangency test and isotropic root multiplicity disagree")

    spectrum: tuple[complex, complex] | None = None
    if case == "D":
        if abs(diagnostics.get("depressed_p", 1.0)) <= 100.0 * tol:
            warnings.append("double admissible root nearly triple")
        pair, residual = _lifted_spectrum(metric, (x, y), iso)
        lam1, lam2 = pair
        top = max(abs(lam1), abs(lam2), 1e-30)
        if residual > 1e-6 * top:
            warnings.append(
                f"third lifted-field eigenvalue not negligible ({residual:.2e})"
            )
        real_pair = max(abs(lam1.imag), abs(lam2.imag)) <= 1e-10 * top
        if real_pair:
            if lam1.real * lam2.real < 0.0:
                case = "D_s"
            else:
                case = "D_n"
            if min(abs(lam1.real), abs(lam2.real)) <= 1e-6 * top:
                warnings.append("lifted-field spectrum near subcase boundary")
            elif abs(lam1.real - lam2.real) <= 1e-6 * top:
                warnings.append("lifted-field spectrum near subcase boundary")
        else:
            case = "D_f"
            if abs(lam1.imag) <= 1e-6 * top:
                warnings.append("lifted-field spectrum near subcase boundary")
        spectrum = (lam1, lam2)
    elif case == "C2":
        # C2 on more than an isolated point signals a degenerate family
        step = 1e-3 * max(
            metric.bbox[1] - metric.bbox[0], metric.bbox[3] - metric.bbox[2]
        )
        tx, ty = -gy / grad_norm, gx / grad_norm
        neighbor_cases = []
        for sign in (-1.0, 1.0):
            try:
                neighbor = refine_to_curve(metric, (x + sign * step * tx, y + sign * step * ty))
            except DegeneracyError:
                continue
            neighbor_cases.append(_case_at(metric, neighbor, tol))
        if neighbor_cases and all(c == "C2" for c in neighbor_cases):
            warnings.append(
                "C2 along an arc of the degenerate curve (non-generic family)"
            )

    return DegenerateReport(
        point=(x, y),
        discriminant_gradient=(gx, gy),
        isotropic=iso,
        cubic=cubic,
        roots=roots,
        case=case,
        isotropic_spectrum=spectrum,
        warnings=warnings,
    )


# --- curve tracing ------------------------------------------------------------


def trace_degenerate_curve(
    metric: MetricField,
    bbox: Sequence[float] | None = None,
    step: float | None = None,
    max_points: int = 4000,
) -> list[np.ndarray]:
    """Polyline components of the degenerate curve inside the bbox."""
    box: BBox = metric.bbox if bbox is None else tuple(float(v) for v in bbox)  # type: ignore[assignment]
    xmin, xmax, ymin, ymax = box
    if step is None:
        step = min(xmax - xmin, ymax - ymin) / 200.0

    # seed candidates from sign changes on a coarse grid
    n = 48
    xs = np.linspace(xmin, xmax, n)
    ys = np.linspace(ymin, ymax, n)
    values = np.array([[metric.discriminant(xv, yv) for yv in ys] for xv in xs])
    seeds: list[tuple[float, float]] = []
    for i in range(n - 1):
        for j in range(n - 1):
            v = values[i, j]
            if (v < 0.0) != (values[i + 1, j] < 0.0) or (v < 0.0) != (values[i, j + 1] < 0.0):
                try:
                    seeds.append(refine_to_curve(metric, (xs[i], ys[j])))
                except DegeneracyError:
                    continue

    components: list[np.ndarray] = []

    def consumed(point: tuple[float, float]) -> bool:
        for polyline in components:
            d = np.hypot(polyline[:, 0] - point[0], polyline[:, 1] - point[1])
            if float(d.min()) < 1.5 * step:
                return True
        return False

    def inside(point: tuple[float, float]) -> bool:
        return xmin - step <= point[0] <= xmax + step and ymin - step <= point[1] <= ymax + step

    for seed in seeds:
        if consumed(seed):
            continue
        halves: list[list[tuple[float, float]]] = []
        for orientation in (1.0, -1.0):
            trail = []
            point = seed
            travel: tuple[float, float] | None = None
            for _ in range(max_points):
                _, gx, gy = metric.discriminant_jet(point[0], point[1])
                norm = math.hypot(gx, gy)
                if norm <= 1e-30:
                    break
                tx, ty = -gy / norm, gx / norm
                if travel is None:
                    tx, ty = orientation * tx, orientation * ty
                elif tx * travel[0] + ty * travel[1] < 0.0:
                    tx, ty = -tx, -ty
                travel = (tx, ty)
                candidate = (point[0] + step * tx, point[1] + step * ty)
                if not inside(candidate):
                    break
                try:
                    point = refine_to_curve(metric, candidate)
                except DegeneracyError:
                    break
                if len(trail) > 6 and math.hypot(point[0] - seed[0], point[1] - seed[1]) < 0.6 * step:
                    break
                trail.append(point)
            halves.append(trail)
        backward, forward = halves
        polyline = list(reversed(backward)) + [seed] + forward
        if len(polyline) >= 2:
            components.append(np.array(polyline))
    return components
