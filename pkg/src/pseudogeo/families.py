"""Families of geodesics through degenerate points.

A degenerate point admits finitely many directions along which geodesics can
reach it.  This module constructs the family entering along the isotropic
admissible direction (both the transversal-contact cases C1-C3 and the
tangency cases D_s/D_n/D_f), recovers the isolated geodesic pair along a
simple non-isotropic direction, and fits the asymptotic shape of every member
for verification.

Members are traced in two legs from a seed jet placed at leading asymptotic
order: an inward leg that certifies entry (it must stop on a small disk around
the point with the limiting direction), and an outward leg that extends the
geodesic into the surface.  The stored trace starts at the inner endpoint.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .degeneracy import (
    CHART_P,
    CHART_PBAR,
    DegenerateReport,
    ProjectiveDirection,
    RootDirection,
    classify,
    projective_gap,
)
from .geoflow import (
    DEFAULT_OPTIONS,
    GeodesicCurve,
    IntegratorOptions,
    ProjectiveJet,
    causal_type,
    integrate_geodesic,
    integrate_isotropic,
    singular_frame,
    singular_jacobian,
)
from .metric import MetricField

__all__ = [
    "FamilyError",
    "FitResult",
    "FamilyMember",
    "FamilySpec",
    "NonIsotropicPair",
    "fit_asymptotics",
    "dsaddle_epsilons",
    "spectrum_epsilon",
    "direction_sign_changes",
    "null_directions",
    "family_case_c_isotropic",
    "geodesic_case_c_nonisotropic",
    "family_case_d",
    "riemannian_entry_probes",
]

# Convergence demanded of every member's inner endpoint direction.
DIRECTION_TOL = 1e-4
# Fits refuse to extrapolate from fewer points than this.
MIN_FIT_SAMPLES = 20

# Integration profiles.  Family legs always run tighter than the engine
# defaults: entry certification compares positions at the 1e-10 scale, and the
# set-proximity backstop must sit far below the target disk so that only
# genuine misses trip it (near-tangential traffic glues to the degenerate
# curve and would otherwise stop long before the point).
_MEMBER_BASE = replace(DEFAULT_OPTIONS, rel_tol=1e-10, abs_tol=1e-12, max_step=0.05)
_FINE_BASE = replace(DEFAULT_OPTIONS, rel_tol=1e-12, abs_tol=1e-14, max_step=0.05)
_NULL_BASE = replace(DEFAULT_OPTIONS, rel_tol=1e-12, abs_tol=1e-16, max_step=0.05)


class FamilyError(ValueError):
    """A family request that the point's classification cannot satisfy."""


# --- asymptotic fits ----------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    """Least-squares summary of a member's leading shape near the point."""

    model: str
    exponent: float
    coefficient: float
    residual: float
    samples: int
    window: tuple[float, float]

    def to_dict(self) -> dict[str, object]:
        return {
            "model": self.model,
            "exponent": self.exponent,
            "coefficient": self.coefficient,
            "residual": self.residual,
            "samples": self.samples,
            "window": list(self.window),
        }


def fit_asymptotics(
    curve: GeodesicCurve | np.ndarray,
    model: str,
    window: tuple[float, float] | None = None,
    origin: Sequence[float] = (0.0, 0.0),
    frame: tuple[Sequence[float], Sequence[float]] | None = None,
    min_samples: int = MIN_FIT_SAMPLES,
) -> FitResult:
    """Fit the leading asymptotic shape of a trace near ``origin``.

    Samples are projected onto the ``frame`` axes: ``u`` along the first axis,
    ``v`` along the second (world axes by default).  ``semicubic`` fits
    ``u = coefficient * |v| ** exponent`` on log scales, windowed on
    ``sqrt(|v|)``; cusp-shaped members give ``exponent`` near 1.5.
    ``quadratic`` fits ``v = coefficient * u**2`` through the origin, windowed
    on ``|u|``.  The residual is the root-mean-square misfit: log-scale for
    ``semicubic``, per-sample quadratic coefficient otherwise.
    """
    if model not in ("semicubic", "quadratic"):
        raise ValueError(f"unknown fit model {model!r}")
    points = curve if isinstance(curve, np.ndarray) else curve.points()
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("expected an (n, 2) array of sample points")
    if frame is None:
        axis_u = np.array([1.0, 0.0])
        axis_v = np.array([0.0, 1.0])
    else:
        axis_u = np.asarray(frame[0], dtype=float)
        axis_v = np.asarray(frame[1], dtype=float)
    rel = points - np.asarray(origin, dtype=float)
    u = rel @ axis_u
    v = rel @ axis_v

    tau = np.sqrt(np.abs(v)) if model == "semicubic" else np.abs(u)
    if window is not None:
        lo, hi = float(window[0]), float(window[1])
        if not (0.0 <= lo < hi) or not math.isfinite(hi):
            raise ValueError("degenerate fit window")
        mask = (tau >= lo) & (tau <= hi)
    else:
        mask = tau > 0.0
    # log scales (and the pointwise quadratic residual) need nonzero deviations
    mask &= np.abs(u) > 1e-300
    if model == "semicubic":
        mask &= np.abs(v) > 1e-300
    count = int(np.count_nonzero(mask))
    if count < min_samples:
        raise ValueError(
            f"insufficient samples in fit window ({count} < {min_samples})"
        )
    u, v, tau = u[mask], v[mask], tau[mask]
    used = (float(tau.min()), float(tau.max())) if window is None else (lo, hi)

    if model == "semicubic":
        log_v = np.log(np.abs(v))
        log_u = np.log(np.abs(u))
        slope, intercept = np.polyfit(log_v, log_u, 1)
        misfit = log_u - (slope * log_v + intercept)
        sign = 1.0 if float(np.median(u)) >= 0.0 else -1.0
        return FitResult(
            model="semicubic",
            exponent=float(slope),
            coefficient=sign * math.exp(float(intercept)),
            residual=float(np.sqrt(np.mean(misfit * misfit))),
            samples=count,
            window=used,
        )

    u2 = u * u
    coefficient = float(np.dot(v, u2) / np.dot(u2, u2))
    misfit = v / u2 - coefficient
    return FitResult(
        model="quadratic",
        exponent=2.0,
        coefficient=coefficient,
        residual=float(np.sqrt(np.mean(misfit * misfit))),
        samples=count,
        window=used,
    )


# --- tangency modulus ---------------------------------------------------------


def dsaddle_epsilons(eps: float) -> tuple[float, float]:
    """Roots of ``t**2 - t/2 + eps = 0`` ordered ``eps1 > 1/2 > 0 > eps2``.

    ``eps`` is the (negative) tangency modulus of a saddle-type tangency
    point; the halved roots are the leading quadratic coefficients of the
    generic family members and of the single extra isotropic geodesic.
    """
    if not eps < 0.0:
        raise ValueError("saddle tangency requires a negative modulus")
    root = math.sqrt(0.0625 - eps)
    return 0.25 + root, 0.25 - root


def spectrum_epsilon(spectrum: Sequence[complex]) -> float:
    """Tangency modulus recovered from the degenerate-direction spectrum.

    The two leading eigenvalues of the lifted-field linearization, normalized
    by their sum, solve ``t**2 - t + 4*eps = 0``; the modulus is therefore
    ``(lam1 * lam2) / (4 * (lam1 + lam2)**2)``, invariant under rescaling of
    the field.
    """
    lam1, lam2 = complex(spectrum[0]), complex(spectrum[1])
    total = lam1 + lam2
    top = max(abs(lam1), abs(lam2), 1e-300)
    if abs(total) <= 1e-9 * top:
        raise FamilyError("direction spectrum is balanced; tangency modulus undefined")
    return float(((lam1 * lam2) / (total * total)).real) / 4.0


def direction_sign_changes(curve: GeodesicCurve) -> int:
    """Number of turning points of the direction value along the trace.

    Counted within runs of a single chart, because a chart swap inverts the
    stored value and would fake a turning point.  Spiral approaches keep
    turning however deep the trace is cut off; node-like approaches settle
    after at most one turn.
    """
    values = np.asarray(curve.dirvalue)
    count = 0
    previous = 0.0
    for i in range(1, len(values)):
        if curve.chart[i] != curve.chart[i - 1]:
            previous = 0.0
            continue
        step = float(values[i] - values[i - 1])
        if step == 0.0:
            continue
        if previous != 0.0 and step * previous < 0.0:
            count += 1
        previous = step
    return count


# --- containers ----------------------------------------------------------------


def _jet_dict(jet: ProjectiveJet) -> dict[str, object]:
    return {
        "x": jet.x,
        "y": jet.y,
        "chart": jet.direction.chart,
        "value": jet.direction.value,
    }


def _member_trace_name(index: int) -> str:
    return f"members/member_{index:03d}.csv"


@dataclass
class FamilyMember:
    """One geodesic of a family, traced through its degenerate endpoint.

    ``params`` holds the family coordinates: ``(alpha,)`` for one-parameter
    families and ``(alpha, beta)`` for two-parameter ones, where ``alpha`` is
    the scaled form value of the seed (its sign gives the causal type) and
    ``beta`` is the seed grid's second coordinate.
    """

    params: tuple[float, ...]
    side: str
    seed: ProjectiveJet
    curve: GeodesicCurve
    fit: FitResult | None
    entered: bool
    inner_distance: float
    inner_direction_gap: float
    winding: int | None = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(
        self, trace: str | None = None, include_curve: bool = False
    ) -> dict[str, object]:
        data: dict[str, object] = {
            "params": [float(p) for p in self.params],
            "side": self.side,
            "seed": _jet_dict(self.seed),
            "entered": self.entered,
            "inner_distance": self.inner_distance,
            "inner_direction_gap": self.inner_direction_gap,
            "winding": self.winding,
            "fit": None if self.fit is None else self.fit.to_dict(),
            "causal_type": self.curve.causal_type,
            "termination": self.curve.termination,
            "samples": len(self.curve),
            "warnings": list(self.warnings),
        }
        if trace is not None:
            data["trace"] = trace
        if include_curve:
            data["curve"] = self.curve.to_dict()
        return data


@dataclass
class FamilySpec:
    """A family of geodesics limiting to one degenerate point.

    Invariants: every member's trace starts within ``10 * r_stop`` of
    ``point`` and its direction there matches ``direction`` within
    ``DIRECTION_TOL``; ``check_invariants`` reports violations.
    """

    point: tuple[float, float]
    direction: ProjectiveDirection
    case_label: str
    members: list[FamilyMember]
    r_stop: float
    tau0: float
    metadata: dict[str, object] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def check_invariants(
        self, distance_factor: float = 10.0, direction_tol: float = DIRECTION_TOL
    ) -> list[str]:
        problems: list[str] = []
        for i, member in enumerate(self.members):
            if not member.entered:
                problems.append(f"member {i}: inward leg did not certify entry")
            if member.inner_distance > distance_factor * self.r_stop:
                problems.append(
                    f"member {i}: inner endpoint {member.inner_distance:.3e} from the point"
                )
            if member.inner_direction_gap > direction_tol:
                problems.append(
                    f"member {i}: inner direction gap {member.inner_direction_gap:.3e}"
                )
        return problems

    def to_dict(self, include_curves: bool = False) -> dict[str, object]:
        return {
            "point": [self.point[0], self.point[1]],
            "direction": {
                "chart": self.direction.chart,
                "value": self.direction.value,
            },
            "case": self.case_label,
            "r_stop": self.r_stop,
            "tau0": self.tau0,
            "members": [
                member.to_dict(trace=_member_trace_name(i), include_curve=include_curves)
                for i, member in enumerate(self.members)
            ],
            "metadata": self.metadata,
            "warnings": list(self.warnings),
        }

    def save(self, directory: str | Path) -> Path:
        """Write ``family.json`` plus one CSV trace per member; returns the JSON path."""
        root = Path(directory)
        (root / "members").mkdir(parents=True, exist_ok=True)
        for i, member in enumerate(self.members):
            (root / _member_trace_name(i)).write_text(member.curve.to_csv())
        path = root / "family.json"
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path


@dataclass
class NonIsotropicPair:
    """The two half-geodesics through a simple non-isotropic admissible direction."""

    point: tuple[float, float]
    direction: ProjectiveDirection
    curves: tuple[GeodesicCurve, GeodesicCurve]
    continuation_gap: float
    warnings: list[str] = field(default_factory=list)

    def to_dict(self, include_curves: bool = False) -> dict[str, object]:
        data: dict[str, object] = {
            "point": [self.point[0], self.point[1]],
            "direction": {
                "chart": self.direction.chart,
                "value": self.direction.value,
            },
            "continuation_gap": self.continuation_gap,
            "causal_types": [c.causal_type for c in self.curves],
            "terminations": [c.termination for c in self.curves],
            "warnings": list(self.warnings),
        }
        if include_curves:
            data["curves"] = [c.to_dict() for c in self.curves]
        return data


# --- seeding helpers ------------------------------------------------------------


def _form_value(metric: MetricField, jet: ProjectiveJet) -> float:
    """Form value of the jet in its canonical chart."""
    j = jet.canonical()
    if j.direction.chart == CHART_P:
        return metric.form(j.x, j.y, j.direction.value)
    return metric.swapped.form(j.y, j.x, j.direction.value)


def _field_orientation(
    metric: MetricField,
    jet: ProjectiveJet,
    toward: Sequence[float],
    kind: str = "geodesic",
) -> float:
    """Orientation flag whose initial world velocity points along ``toward``.

    The integrator's representative moves along the jet direction with a sign
    carried by the leading field component: twice the discriminant for the
    geodesic field, the direction-derivative of the form for the null field.
    """
    j = jet.canonical()
    if kind == "geodesic":
        lead = 2.0 * metric.discriminant(j.x, j.y)
    else:
        if j.direction.chart == CHART_P:
            _, b, c = metric.coefficients(j.x, j.y)
        else:
            _, b, c = metric.swapped.coefficients(j.y, j.x)
        lead = 2.0 * b + 2.0 * c * j.direction.value
    ux, uy = j.direction.vector()
    aligned = lead * (ux * float(toward[0]) + uy * float(toward[1]))
    return 1.0 if aligned >= 0.0 else -1.0


def _merge_legs(inward: GeodesicCurve, outward: Sequence[GeodesicCurve]) -> GeodesicCurve:
    """Concatenate a reversed inward leg with outward continuation legs.

    The merged parameter is zero at the inner endpoint and increases outward;
    reversed samples get negated stored velocities.  Joint samples shared by
    consecutive legs are kept once.
    """
    t_parts = [np.asarray(inward.t[-1] - inward.t)[::-1]]
    x_parts = [np.asarray(inward.x)[::-1]]
    y_parts = [np.asarray(inward.y)[::-1]]
    dir_parts = [np.asarray(inward.dirvalue)[::-1]]
    f_parts = [np.asarray(inward.F)[::-1]]
    delta_parts = [np.asarray(inward.Delta)[::-1]]
    vx_parts = [-np.asarray(inward.vx)[::-1]]
    vy_parts = [-np.asarray(inward.vy)[::-1]]
    charts = list(reversed(inward.chart))
    types = list(reversed(inward.sample_type))

    offset = float(inward.t[-1])
    termination = inward.termination
    switch_gap = inward.chart_switch_gap
    warnings: list[str] = []
    for message in inward.warnings:
        if message not in warnings:
            warnings.append(message)

    for leg in outward:
        termination = leg.termination
        switch_gap = max(switch_gap, leg.chart_switch_gap)
        for message in leg.warnings:
            if message not in warnings:
                warnings.append(message)
        if len(leg) <= 1:
            continue
        t_parts.append(np.asarray(leg.t[1:]) + offset)
        x_parts.append(np.asarray(leg.x[1:]))
        y_parts.append(np.asarray(leg.y[1:]))
        dir_parts.append(np.asarray(leg.dirvalue[1:]))
        f_parts.append(np.asarray(leg.F[1:]))
        delta_parts.append(np.asarray(leg.Delta[1:]))
        vx_parts.append(np.asarray(leg.vx[1:]))
        vy_parts.append(np.asarray(leg.vy[1:]))
        charts.extend(leg.chart[1:])
        types.extend(leg.sample_type[1:])
        offset += float(leg.t[-1])

    merged = GeodesicCurve(
        t=np.concatenate(t_parts),
        x=np.concatenate(x_parts),
        y=np.concatenate(y_parts),
        chart=charts,
        dirvalue=np.concatenate(dir_parts),
        F=np.concatenate(f_parts),
        Delta=np.concatenate(delta_parts),
        sample_type=types,
        termination=termination,
        causal_type="mixed",
        band=inward.band,
        vx=np.concatenate(vx_parts),
        vy=np.concatenate(vy_parts),
        warnings=warnings,
        chart_switch_gap=switch_gap,
    )
    merged.causal_type = causal_type(merged)
    return merged


def _entry_certificate(
    leg: GeodesicCurve,
    q: tuple[float, float],
    direction: ProjectiveDirection,
    r_stop: float,
) -> tuple[bool, float, float]:
    """Whether an inward leg certifies entry: (entered, distance, direction gap)."""
    end = leg.jet(-1)
    distance = math.hypot(end.x - q[0], end.y - q[1])
    gap = projective_gap(end.direction, direction)
    entered = (
        leg.termination == "hit-singular-set"
        and distance <= 10.0 * r_stop
        and gap <= DIRECTION_TOL
    )
    return entered, distance, gap


def _continue_outward(
    metric: MetricField,
    leg: GeodesicCurve,
    span: float,
    opts: IntegratorOptions,
    kind: str,
) -> GeodesicCurve | None:
    """Extend a span-exhausted leg from its end jet, preserving traversal."""
    if leg.termination != "span-exhausted" or len(leg) < 1:
        return None
    end = leg.jet(-1)
    toward = (float(leg.vx[-1]), float(leg.vy[-1]))
    orientation = _field_orientation(metric, end, toward, kind)
    integrate = integrate_geodesic if kind == "geodesic" else integrate_isotropic
    return integrate(metric, end, span, opts, orientation=orientation)


def null_directions(
    metric: MetricField, x: float, y: float
) -> tuple[ProjectiveDirection, ProjectiveDirection]:
    """The two null directions at a point on the Lorentzian side."""
    a, b, c = metric.coefficients(x, y)
    disc = b * b - a * c
    scale = max(abs(a), abs(b), abs(c), 1e-300)
    if disc < 0.0:
        raise FamilyError("no real null directions at a Riemannian point")
    root = math.sqrt(disc)
    head = -(b + math.copysign(root, b))
    # roots of c p^2 + 2 b p + a as direction vectors (dx, dy) = (den, num)
    if max(abs(head), abs(c)) <= 1e-15 * scale or max(abs(head), abs(a)) <= 1e-15 * scale:
        raise FamilyError("null directions are degenerate at this point")
    return (
        ProjectiveDirection.from_vector(c, head),
        ProjectiveDirection.from_vector(head, a),
    )


# --- local frames ----------------------------------------------------------------


def _isotropic_root(report: DegenerateReport) -> RootDirection:
    return next(rd for rd in report.roots if rd.isotropic)


def _contact_frame(report: DegenerateReport) -> tuple[np.ndarray, np.ndarray]:
    """Seed axes at a transversal-contact point: degenerate-curve tangent, isotropic."""
    gx, gy = report.discriminant_gradient
    norm = math.hypot(gx, gy)
    u_hat = np.array([-gy / norm, gx / norm])
    v_hat = np.array(_isotropic_root(report).direction.vector())
    if u_hat[0] * v_hat[1] - u_hat[1] * v_hat[0] < 0.0:
        u_hat = -u_hat
    return u_hat, v_hat


def _tangency_frame(
    metric: MetricField, report: DegenerateReport
) -> tuple[np.ndarray, np.ndarray, float]:
    """Seed axes at a tangency point plus the degenerate curve's quadratic coefficient.

    The second axis points into the Lorentzian side (where the discriminant is
    negative); in these axes the degenerate curve is ``v = k u**2 + o(u**2)``.
    """
    gx, gy = report.discriminant_gradient
    norm = math.hypot(gx, gy)
    n_hat = np.array([-gx / norm, -gy / norm])
    u_hat = np.array([n_hat[1], -n_hat[0]])
    qx, qy = report.point
    h = 1e-4
    second = (
        metric.discriminant(qx + h * u_hat[0], qy + h * u_hat[1])
        - 2.0 * metric.discriminant(qx, qy)
        + metric.discriminant(qx - h * u_hat[0], qy - h * u_hat[1])
    ) / (h * h)
    return u_hat, n_hat, second / (2.0 * norm)


# --- member construction ----------------------------------------------------------


@dataclass
class _TracedMember:
    curve: GeodesicCurve
    inward: GeodesicCurve
    entered: bool
    inner_distance: float
    inner_direction_gap: float


def _trace_member(
    metric: MetricField,
    seed: ProjectiveJet,
    q: tuple[float, float],
    direction: ProjectiveDirection,
    approach_opts: IntegratorOptions,
    outward_opts: IntegratorOptions,
    r_stop: float,
    span_in: float,
    span_out: float,
    kind: str = "geodesic",
    dense_outward: tuple[float, float] | None = None,
) -> _TracedMember:
    """Trace one member: certify the inward leg, then extend outward.

    ``dense_outward = (max_step, span)`` inserts a finely sampled first
    outward stretch so that fit windows just outside the seed scale are
    well populated before the step size is released.
    """
    toward = (q[0] - seed.x, q[1] - seed.y)
    orientation = _field_orientation(metric, seed, toward, kind)
    integrate = integrate_geodesic if kind == "geodesic" else integrate_isotropic
    inward = integrate(metric, seed, span_in, approach_opts, orientation=orientation)
    entered, distance, gap = _entry_certificate(inward, q, direction, r_stop)

    legs: list[GeodesicCurve] = []
    if dense_outward is not None:
        step, stretch = dense_outward
        first = integrate(
            metric,
            seed,
            stretch,
            replace(outward_opts, max_step=step),
            orientation=-orientation,
        )
        legs.append(first)
        tail = _continue_outward(metric, first, span_out, outward_opts, kind)
        if tail is not None:
            legs.append(tail)
    else:
        legs.append(
            integrate(metric, seed, span_out, outward_opts, orientation=-orientation)
        )
    return _TracedMember(
        curve=_merge_legs(inward, legs),
        inward=inward,
        entered=entered,
        inner_distance=distance,
        inner_direction_gap=gap,
    )


def _require_inside(metric: MetricField, x: float, y: float) -> None:
    xmin, xmax, ymin, ymax = metric.bbox
    if not (xmin <= x <= xmax and ymin <= y <= ymax):
        raise FamilyError(f"seed ({x:g}, {y:g}) lies outside the working bbox")


def _side_label(metric: MetricField, x: float, y: float) -> str:
    return "Lorentzian" if metric.discriminant(x, y) < 0.0 else "Riemannian"


# --- transversal-contact family ----------------------------------------------------


def family_case_c_isotropic(
    metric: MetricField,
    q: Sequence[float],
    count: int,
    tau0: float = 1e-3,
    alphas: Sequence[float] | None = None,
    span: float = 4.0,
) -> FamilySpec:
    """Family of geodesics through a transversal-contact point (cases C1-C3).

    Members are seeded at leading order ``u = alpha * tau0**3``,
    ``v = side * tau0**2`` in the local frame (degenerate-curve tangent,
    isotropic direction), for a grid of ``alpha`` values and both sides, and
    fitted with the semicubic model over the window ``[tau0, 10 * tau0]``.
    """
    report = classify(metric, q)
    if not report.case.startswith("C"):
        raise FamilyError(
            f"transversal-contact family needs a C-type point, got {report.case}"
        )
    qx, qy = report.point
    u_hat, v_hat = _contact_frame(report)
    direction = _isotropic_root(report).direction
    values = (
        np.linspace(-2.0, 2.0, count) if alphas is None else np.asarray(alphas, float)
    )
    if values.size == 0:
        raise FamilyError("empty family parameter grid")

    r_stop = DEFAULT_OPTIONS.singular_stop_radius
    # Members leave the point tangent to the isotropic axis; at distance r the
    # direction still deviates by about 1.5 * |alpha| * sqrt(r), so the target
    # disk must shrink with the steepest requested member to certify the
    # direction within DIRECTION_TOL.
    steepest = max(2.0, float(np.max(np.abs(values))))
    radius = min(1e-9, (DIRECTION_TOL / (4.0 * steepest)) ** 2)
    approach = replace(
        _FINE_BASE,
        target_point=(qx, qy),
        target_radius=radius,
        singular_stop_radius=radius / 10.0,
    )
    outward = replace(_FINE_BASE, singular_stop_radius=radius / 10.0)

    members: list[FamilyMember] = []
    family_warnings: list[str] = []
    rejected = 0
    for alpha in values:
        for side_sign in (1.0, -1.0):
            pos_x = qx + alpha * tau0**3 * u_hat[0] + side_sign * tau0**2 * v_hat[0]
            pos_y = qy + alpha * tau0**3 * u_hat[1] + side_sign * tau0**2 * v_hat[1]
            _require_inside(metric, pos_x, pos_y)
            wx = 3.0 * alpha * tau0**2 * u_hat[0] + 2.0 * side_sign * tau0 * v_hat[0]
            wy = 3.0 * alpha * tau0**2 * u_hat[1] + 2.0 * side_sign * tau0 * v_hat[1]
            seed = ProjectiveJet(pos_x, pos_y, ProjectiveDirection.from_vector(wx, wy))
            traced = _trace_member(
                metric,
                seed,
                (qx, qy),
                direction,
                approach,
                outward,
                r_stop,
                span_in=span,
                span_out=span,
                dense_outward=(4.0 * tau0**2, 150.0 * tau0**2 + 21.0 * abs(alpha) * tau0),
            )
            if not traced.entered:
                rejected += 1
                family_warnings.append(
                    f"seed alpha={alpha:g} side={side_sign:+g} did not enter "
                    f"(termination {traced.inward.termination}, "
                    f"distance {traced.inner_distance:.3e})"
                )
                continue
            member_warnings: list[str] = []
            fit: FitResult | None = None
            if abs(alpha) < 1e-12:
                member_warnings.append(
                    "axis member: transverse deviation below fit resolution"
                )
            else:
                try:
                    fit = fit_asymptotics(
                        traced.curve,
                        "semicubic",
                        window=(tau0, 10.0 * tau0),
                        origin=(qx, qy),
                        frame=(u_hat, v_hat),
                    )
                except ValueError as exc:
                    member_warnings.append(f"asymptotic fit skipped: {exc}")
            members.append(
                FamilyMember(
                    params=(float(alpha),),
                    side=_side_label(metric, pos_x, pos_y),
                    seed=seed,
                    curve=traced.curve,
                    fit=fit,
                    entered=True,
                    inner_distance=traced.inner_distance,
                    inner_direction_gap=traced.inner_direction_gap,
                    warnings=member_warnings,
                )
            )
    return FamilySpec(
        point=(qx, qy),
        direction=direction,
        case_label=report.case,
        members=members,
        r_stop=r_stop,
        tau0=tau0,
        metadata={
            "alphas": [float(a) for a in values],
            "frame": {"tangent": u_hat.tolist(), "isotropic": v_hat.tolist()},
            "target_radius": radius,
            "rejected_seeds": rejected,
        },
        warnings=family_warnings,
    )


# --- isolated non-isotropic geodesics -----------------------------------------------


def _match_admissible_root(
    report: DegenerateReport, root: ProjectiveDirection | RootDirection | None
) -> RootDirection:
    candidates = [rd for rd in report.roots if not rd.isotropic]
    if not candidates:
        raise FamilyError("the point has no non-isotropic admissible direction")
    if root is None:
        if len(candidates) > 1:
            raise FamilyError(
                "several non-isotropic admissible directions; pass the one to trace"
            )
        return candidates[0]
    wanted = root.direction if isinstance(root, RootDirection) else root
    best = min(candidates, key=lambda rd: projective_gap(rd.direction, wanted))
    if projective_gap(best.direction, wanted) > 1e-6:
        raise FamilyError("direction is not an admissible root at the point")
    return best


def _kernel_line_curve(
    metric: MetricField,
    q: tuple[float, float],
    direction: ProjectiveDirection,
    sign: float,
    band: float,
) -> GeodesicCurve:
    """Walk the invariant line of singular jets along a degenerate double root.

    Every walked jet is checked to stay singular (the degenerate curve keeps
    the same admissible root), so the synthesized trace is the equilibrium
    line of the field rather than an integrated trajectory.
    """
    qx, qy = q
    ux, uy = direction.vector()
    xmin, xmax, ymin, ymax = metric.bbox
    step = 1e-3 * max(xmax - xmin, ymax - ymin)
    slope = direction.slope()
    xs = [qx]
    ys = [qy]
    termination = "span-exhausted"
    for i in range(1, 20_000):
        x = qx + sign * i * step * ux
        y = qy + sign * i * step * uy
        if not (xmin <= x <= xmax and ymin <= y <= ymax):
            termination = "left-bbox"
            break
        scale = max(metric.coefficient_scale(x, y), 1e-30)
        mu = metric.cubic_values(x, y)
        cubic_scale = max(max(abs(m) for m in mu), 1e-30)
        value = (
            mu[0] + slope * (mu[1] + slope * (mu[2] + slope * mu[3]))
            if math.isfinite(slope)
            else mu[3]
        )
        if (
            abs(metric.discriminant(x, y)) > 1e-8 * scale * scale
            or abs(value) > 1e-6 * cubic_scale
        ):
            break
        xs.append(x)
        ys.append(y)
    n = len(xs)
    arc = np.arange(n, dtype=float) * step
    f_values = np.array([_form_value(metric, ProjectiveJet(x, y, direction)) for x, y in zip(xs, ys)])
    types = [
        "isotropic" if abs(f) <= band else ("timelike" if f < 0.0 else "spacelike")
        for f in f_values
    ]
    curve = GeodesicCurve(
        t=arc,
        x=np.array(xs),
        y=np.array(ys),
        chart=[direction.chart] * n,
        dirvalue=np.full(n, direction.value),
        F=f_values,
        Delta=np.array([metric.discriminant(x, y) for x, y in zip(xs, ys)]),
        sample_type=types,
        termination=termination,
        causal_type="mixed",
        band=band,
        vx=np.full(n, sign * ux),
        vy=np.full(n, sign * uy),
        warnings=[
            "degenerate double root: the trace is the invariant line of "
            "singular jets (nilpotent linearization), not an integrated orbit"
        ],
    )
    curve.causal_type = causal_type(curve)
    return curve


def geodesic_case_c_nonisotropic(
    metric: MetricField,
    q: Sequence[float],
    root: ProjectiveDirection | RootDirection | None = None,
    offset: float = 1e-5,
    span: float = 4.0,
) -> NonIsotropicPair:
    """The unique geodesic pair through a non-isotropic admissible direction.

    Each half is seeded a small ``offset`` along the non-vertical invariant
    direction of the saddle-type linearization at the singular jet and traced
    both into the point (certifying the common tangent) and away from it.  A
    degenerate double root with nilpotent linearization falls back to the
    invariant line of singular jets.
    """
    report = classify(metric, q)
    qx, qy = report.point
    matched = _match_admissible_root(report, root)
    direction = matched.direction

    if matched.multiplicity > 1:
        chart, jac = singular_jacobian(metric, (qx, qy), direction)
        top = max(float(np.max(np.abs(jac))), 1e-30)
        eigenvalues = np.linalg.eigvals(jac)
        if float(np.max(np.abs(eigenvalues))) > 1e-8 * top:
            raise FamilyError("admissible direction is not a simple root")
        pair = tuple(
            _kernel_line_curve(metric, (qx, qy), direction, sign, DEFAULT_OPTIONS.event_tol)
            for sign in (1.0, -1.0)
        )
        return NonIsotropicPair(
            point=(qx, qy),
            direction=direction,
            curves=pair,  # type: ignore[arg-type]
            continuation_gap=0.0,
            warnings=list(pair[0].warnings),
        )

    chart, eigenvalues, eigenvectors = singular_frame(metric, (qx, qy), direction)
    top = max(abs(eigenvalues[0]), 1e-30)
    candidate = None
    for i in range(3):
        lam = eigenvalues[i]
        vec = eigenvectors[:, i]
        if abs(lam) <= 1e-8 * top or abs(lam.imag) > 1e-10 * top:
            continue
        e = np.real(vec)
        planar = math.hypot(float(e[0]), float(e[1]))
        if planar <= 1e-6 * float(np.linalg.norm(e)):
            continue
        candidate = e / planar
        break
    if candidate is None:
        raise FamilyError(
            "no non-vertical invariant direction at the jet (vertical eigenvector)"
        )

    working_value = (
        direction.value if direction.chart == chart else direction.to_chart(chart).value
    )
    r_stop = DEFAULT_OPTIONS.singular_stop_radius
    rim = 1e-7
    approach = replace(
        _FINE_BASE,
        target_point=(qx, qy),
        target_radius=rim,
        singular_stop_radius=rim / 10.0,
    )
    outward = replace(_FINE_BASE, singular_stop_radius=rim / 10.0)

    halves: list[GeodesicCurve] = []
    inner_dirs: list[ProjectiveDirection] = []
    warnings: list[str] = []
    for sign in (1.0, -1.0):
        d_pos = (
            (float(candidate[0]), float(candidate[1]))
            if chart == CHART_P
            else (float(candidate[1]), float(candidate[0]))
        )
        pos_x = qx + sign * offset * d_pos[0]
        pos_y = qy + sign * offset * d_pos[1]
        _require_inside(metric, pos_x, pos_y)
        seed = ProjectiveJet(
            pos_x,
            pos_y,
            ProjectiveDirection(chart, working_value + sign * offset * float(candidate[2])),
        )
        traced = _trace_member(
            metric,
            seed,
            (qx, qy),
            direction,
            approach,
            outward,
            r_stop,
            span_in=span,
            span_out=span,
        )
        if not traced.entered:
            warnings.append(
                f"half at offset {sign * offset:+g} did not certify entry "
                f"(termination {traced.inward.termination})"
            )
        halves.append(traced.curve)
        inner_dirs.append(traced.curve.jet(0).direction)
    return NonIsotropicPair(
        point=(qx, qy),
        direction=direction,
        curves=(halves[0], halves[1]),
        continuation_gap=projective_gap(inner_dirs[0], inner_dirs[1]),
        warnings=warnings,
    )


# --- tangency family -----------------------------------------------------------------


def _normalize_counts(counts: int | tuple[int, int] | None, case: str) -> tuple[int, int]:
    """(total, grid columns) for the requested member count."""
    if counts is None:
        return (24, 4)
    if isinstance(counts, tuple):
        n_k, n_s = int(counts[0]), int(counts[1])
        return (max(1, n_k) * max(1, n_s) * 2, max(1, n_s))
    total = int(counts)
    if case == "D_s":
        return (max(2, total), 0)
    n_s = max(2, int(math.ceil(total / (2.0 * max(2.0, round(math.sqrt(total / 2.0)))))))
    return (max(4, total), n_s)


def _tangency_seed(
    q: tuple[float, float],
    u_hat: np.ndarray,
    n_hat: np.ndarray,
    u_val: float,
    v_val: float,
    dvdu: float,
) -> ProjectiveJet:
    pos_x = q[0] + u_val * u_hat[0] + v_val * n_hat[0]
    pos_y = q[1] + u_val * u_hat[1] + v_val * n_hat[1]
    wx = u_hat[0] + dvdu * n_hat[0]
    wy = u_hat[1] + dvdu * n_hat[1]
    return ProjectiveJet(pos_x, pos_y, ProjectiveDirection.from_vector(wx, wy))


def family_case_d(
    metric: MetricField,
    q: Sequence[float],
    counts: int | tuple[int, int] | None = None,
    tau0: float = 1e-3,
    span: float = 4.0,
    null_count: int = 2,
    riemannian_count: int = 4,
    include_separatrix: bool = True,
) -> FamilySpec:
    """Family of geodesics entering a tangency point from the Lorentzian side.

    Node and focus subcases get a two-parameter seed grid (transverse level
    times slope offset, both sides of the tangent line) plus ``null_count``
    isotropic members per side whose direction turning counts expose focus
    winding.  The saddle subcase gets a one-parameter family of slope offsets
    around the steep invariant parabola plus the single extra isotropic
    geodesic found by separatrix shooting on the shallow one.  Riemannian-side
    counter-probes are recorded in the metadata.
    """
    report = classify(metric, q)
    if not report.case.startswith("D"):
        raise FamilyError(f"tangency family needs a D-type point, got {report.case}")
    qx, qy = report.point
    u_hat, n_hat, k_curve = _tangency_frame(metric, report)
    direction = _isotropic_root(report).direction
    assert report.isotropic_spectrum is not None
    eps = spectrum_epsilon(report.isotropic_spectrum)
    scale = max(metric.coefficient_scale(qx, qy), 1e-30)

    r_stop = DEFAULT_OPTIONS.singular_stop_radius
    # Dense approach sampling: the quadratic fits live on the inward leg, and
    # off-member transverse error grows toward the point, so the window keeps
    # away from the innermost stretch and needs guaranteed sample coverage.
    approach = replace(
        _MEMBER_BASE,
        target_point=(qx, qy),
        target_radius=8.0 * r_stop,
        singular_stop_radius=r_stop / 1000.0,
        max_step=max(tau0 / 80.0, 1e-7),
    )
    outward = replace(_MEMBER_BASE, singular_stop_radius=r_stop / 1000.0)
    fit_window = (tau0 / 20.0, tau0 / 3.0)
    # A successful approach needs a few tau0 of phase arc; give rejected seeds
    # two orders of margin but not the full outward span, because the dense
    # step cap makes runaway legs expensive.
    span_in = min(span, max(0.05, 200.0 * tau0))

    members: list[FamilyMember] = []
    family_warnings: list[str] = []
    metadata: dict[str, object] = {
        "epsilon": eps,
        "curve_coefficient": k_curve,
        "frame": {"tangent": u_hat.tolist(), "normal": n_hat.tolist()},
        "rejected_seeds": 0,
    }

    def seed_alpha(seed: ProjectiveJet) -> float:
        return _form_value(metric, seed) / (scale * tau0 * tau0)

    def attempt(
        seed: ProjectiveJet, params: tuple[float, ...], extra: Sequence[str] = ()
    ) -> FamilyMember | None:
        _require_inside(metric, seed.x, seed.y)
        traced = _trace_member(
            metric,
            seed,
            (qx, qy),
            direction,
            approach,
            outward,
            r_stop,
            span_in=span_in,
            span_out=span,
        )
        if not traced.entered:
            metadata["rejected_seeds"] = int(metadata["rejected_seeds"]) + 1
            return None
        member_warnings = list(extra)
        fit: FitResult | None = None
        try:
            fit = fit_asymptotics(
                traced.curve,
                "quadratic",
                window=fit_window,
                origin=(qx, qy),
                frame=(u_hat, n_hat),
            )
        except ValueError as exc:
            member_warnings.append(f"asymptotic fit skipped: {exc}")
        return FamilyMember(
            params=params,
            side=_side_label(metric, seed.x, seed.y),
            seed=seed,
            curve=traced.curve,
            fit=fit,
            entered=True,
            inner_distance=traced.inner_distance,
            inner_direction_gap=traced.inner_direction_gap,
            warnings=member_warnings,
        )

    total, n_s = _normalize_counts(counts, report.case)

    if report.case == "D_s":
        eps1, eps2 = dsaddle_epsilons(eps)
        metadata["epsilon_pair"] = [eps1, eps2]
        k_member = k_curve + (0.5 * eps1 - eps)
        k_sep = k_curve + (0.5 * eps2 - eps)
        per_side = (total + 1) // 2

        def probe_enters(side_sign: float, rel: float, k_val: float) -> bool:
            u_val = side_sign * tau0
            seed = _tangency_seed(
                (qx, qy), u_hat, n_hat, u_val, k_val * u_val * u_val,
                2.0 * k_val * u_val * (1.0 + rel),
            )
            toward = (qx - seed.x, qy - seed.y)
            orientation = _field_orientation(metric, seed, toward)
            leg = integrate_geodesic(metric, seed, span_in, approach, orientation=orientation)
            entered, _, _ = _entry_certificate(leg, (qx, qy), direction, r_stop)
            return entered

        for side_sign in (1.0, -1.0):
            low, high = -1e-3, 1e-3
            for _ in range(8):
                if probe_enters(side_sign, low, k_member):
                    break
                low *= 0.5
            for _ in range(8):
                if probe_enters(side_sign, high, k_member):
                    break
                high *= 0.5
            for rel in np.linspace(low, high, per_side):
                u_val = side_sign * tau0
                seed = _tangency_seed(
                    (qx, qy), u_hat, n_hat, u_val, k_member * u_val * u_val,
                    2.0 * k_member * u_val * (1.0 + float(rel)),
                )
                member = attempt(seed, (seed_alpha(seed), float(rel)))
                if member is None:
                    family_warnings.append(
                        f"slope offset {rel:+.3e} on side {side_sign:+g} did not enter"
                    )
                else:
                    members.append(member)
        if include_separatrix:
            sep_member, sep_log = _shoot_separatrix(
                metric, report, u_hat, n_hat, k_sep, tau0, span_in,
                approach, direction, r_stop, attempt, seed_alpha,
            )
            metadata["separatrix"] = sep_log
            if sep_member is not None:
                metadata["separatrix_index"] = len(members)
                members.append(sep_member)
            else:
                family_warnings.append("separatrix shooting did not converge")
    else:
        n_slopes = max(2, n_s)
        n_levels = max(2, int(math.ceil(total / (2.0 * n_slopes))))
        base_spreads = np.geomspace(0.05, 0.5, n_levels) * max(1.0, abs(2.0 * k_curve))
        slopes = np.linspace(-0.3, 0.3, n_slopes)
        metadata["levels"] = [float(k_curve + s) for s in base_spreads]
        metadata["slope_offsets"] = [float(s) for s in slopes]

        def sweep(spreads: Iterable[float], slope_vals: Iterable[float], noisy: bool) -> None:
            for spread in spreads:
                k_val = k_curve + float(spread)
                for ds in slope_vals:
                    for side_sign in (1.0, -1.0):
                        if len(members) >= total:
                            return
                        u_val = side_sign * tau0
                        seed = _tangency_seed(
                            (qx, qy), u_hat, n_hat, u_val, k_val * u_val * u_val,
                            2.0 * k_val * u_val * (1.0 + float(ds)),
                        )
                        member = attempt(seed, (seed_alpha(seed), float(ds)))
                        if member is None:
                            if noisy:
                                family_warnings.append(
                                    f"seed level {k_val:g} slope offset {ds:+g} "
                                    f"side {side_sign:+g} did not enter"
                                )
                        else:
                            members.append(member)

        sweep(base_spreads, slopes, noisy=True)
        # Outer levels with large slope offsets sometimes exit sideways.
        # Refills shrink the grid toward the tangency parabola, where entry
        # holds for small enough offsets, until the quota is met.
        refill = 0
        while len(members) < total and refill < 3:
            refill += 1
            sweep(base_spreads * 0.5**refill, slopes * 0.6**refill, noisy=False)
        if refill:
            metadata["refill_passes"] = refill
        if len(members) < total:
            family_warnings.append(
                f"only {len(members)} of {total} grid seeds entered the point"
            )
        members.extend(
            _isotropic_members(
                metric, (qx, qy), u_hat, n_hat, k_curve, tau0, span,
                direction, r_stop, null_count, fit_window, family_warnings,
            )
        )
        windings = [m.winding for m in members if m.winding is not None]
        metadata["max_winding"] = max(windings) if windings else None

    if riemannian_count > 0:
        metadata["riemannian_probes"] = riemannian_entry_probes(
            metric, (qx, qy), tau0=tau0, count=riemannian_count, span=span
        )

    return FamilySpec(
        point=(qx, qy),
        direction=direction,
        case_label=report.case,
        members=members,
        r_stop=r_stop,
        tau0=tau0,
        metadata=metadata,
        warnings=family_warnings,
    )


def _isotropic_members(
    metric: MetricField,
    q: tuple[float, float],
    u_hat: np.ndarray,
    n_hat: np.ndarray,
    k_curve: float,
    tau0: float,
    span: float,
    direction: ProjectiveDirection,
    r_stop: float,
    null_count: int,
    fit_window: tuple[float, float],
    family_warnings: list[str],
) -> list[FamilyMember]:
    """Isotropic family members traced along the null field.

    The null field preserves the isotropic surface, so these members carry the
    only faithful picture of how directions wind on the approach; their
    turning counts are stored as ``winding``.  The target disk is far smaller
    than for generic members because winding accumulates logarithmically in
    the distance.
    """
    if null_count <= 0:
        return []
    qx, qy = q
    approach = replace(
        _NULL_BASE,
        target_point=(qx, qy),
        target_radius=1e-8,
        singular_stop_radius=1e-14,
        max_step=max(tau0 / 80.0, 1e-7),
    )
    outward = replace(_NULL_BASE, singular_stop_radius=1e-9)
    span_in = min(span, max(0.05, 200.0 * tau0))
    spreads = np.geomspace(0.1, 0.4, null_count) * max(1.0, abs(2.0 * k_curve))
    scale = max(metric.coefficient_scale(qx, qy), 1e-30)
    members: list[FamilyMember] = []
    for side_sign in (1.0, -1.0):
        for spread in spreads:
            u_val = side_sign * tau0
            k_val = k_curve + float(spread)
            pos_x = qx + u_val * u_hat[0] + k_val * u_val * u_val * n_hat[0]
            pos_y = qy + u_val * u_hat[1] + k_val * u_val * u_val * n_hat[1]
            try:
                branches = null_directions(metric, pos_x, pos_y)
            except FamilyError as exc:
                family_warnings.append(f"isotropic seed skipped: {exc}")
                continue
            for branch_sign, branch in zip((1.0, -1.0), branches):
                seed = ProjectiveJet(pos_x, pos_y, branch)
                traced = _trace_member(
                    metric,
                    seed,
                    (qx, qy),
                    direction,
                    approach,
                    outward,
                    r_stop,
                    span_in=span_in,
                    span_out=span,
                    kind="null",
                )
                if not traced.entered:
                    continue
                fit: FitResult | None = None
                member_warnings = ["isotropic member traced along the null field"]
                try:
                    fit = fit_asymptotics(
                        traced.curve,
                        "quadratic",
                        window=fit_window,
                        origin=(qx, qy),
                        frame=(u_hat, n_hat),
                    )
                except ValueError as exc:
                    member_warnings.append(f"asymptotic fit skipped: {exc}")
                alpha = _form_value(metric, seed) / (scale * tau0 * tau0)
                members.append(
                    FamilyMember(
                        params=(alpha, branch_sign),
                        side=_side_label(metric, pos_x, pos_y),
                        seed=seed,
                        curve=traced.curve,
                        fit=fit,
                        entered=True,
                        inner_distance=traced.inner_distance,
                        inner_direction_gap=traced.inner_direction_gap,
                        winding=direction_sign_changes(traced.inward),
                        warnings=member_warnings,
                    )
                )
    return members


def _shoot_separatrix(
    metric: MetricField,
    report: DegenerateReport,
    u_hat: np.ndarray,
    n_hat: np.ndarray,
    k_sep: float,
    tau0: float,
    span: float,
    approach: IntegratorOptions,
    direction: ProjectiveDirection,
    r_stop: float,
    attempt,
    seed_alpha,
) -> tuple[FamilyMember | None, dict[str, object]]:
    """Locate the extra isotropic geodesic of the saddle subcase.

    Shooting variable: relative slope offset at the seed on the shallow
    invariant parabola.  Outcomes bracket the separatrix between trajectories
    that fall onto the degenerate curve short of the point and trajectories
    that swing past it; a seed that certifies entry ends the search.
    """
    qx, qy = report.point
    side_sign = 1.0
    u_val = side_sign * tau0

    def shoot(rel: float) -> str:
        seed = _tangency_seed(
            (qx, qy), u_hat, n_hat, u_val, k_sep * u_val * u_val,
            2.0 * k_sep * u_val * (1.0 + rel),
        )
        toward = (qx - seed.x, qy - seed.y)
        orientation = _field_orientation(metric, seed, toward)
        leg = integrate_geodesic(metric, seed, span, approach, orientation=orientation)
        entered, distance, gap = _entry_certificate(leg, (qx, qy), direction, r_stop)
        if entered:
            return "member"
        end = leg.jet(-1)
        u_end = (end.x - qx) * u_hat[0] + (end.y - qy) * u_hat[1]
        if leg.termination == "hit-singular-set" and distance <= 10.0 * r_stop:
            return "over"  # grazed the disk without the limiting direction
        return "over" if u_end * side_sign < 0.0 else "short"

    log: dict[str, object] = {"side": side_sign, "level": k_sep}

    def build(rel: float) -> FamilyMember | None:
        seed = _tangency_seed(
            (qx, qy), u_hat, n_hat, u_val, k_sep * u_val * u_val,
            2.0 * k_sep * u_val * (1.0 + rel),
        )
        member = attempt(seed, (seed_alpha(seed), rel), ("separatrix member",))
        return member

    if shoot(0.0) == "member":
        log["mode"] = "direct"
        log["offset"] = 0.0
        return build(0.0), log

    offsets = np.linspace(-0.3, 0.3, 13)
    outcomes = [shoot(float(rel)) for rel in offsets]
    log["scan"] = {f"{float(r):+.3f}": o for r, o in zip(offsets, outcomes)}
    for rel, outcome in zip(offsets, outcomes):
        if outcome == "member":
            log["mode"] = "scan"
            log["offset"] = float(rel)
            return build(float(rel)), log
    bracket = None
    for i in range(len(offsets) - 1):
        if outcomes[i] != outcomes[i + 1]:
            bracket = (float(offsets[i]), outcomes[i], float(offsets[i + 1]))
            break
    if bracket is None:
        log["mode"] = "failed"
        return None, log
    low, low_outcome, high = bracket
    for _ in range(60):
        mid = 0.5 * (low + high)
        outcome = shoot(mid)
        if outcome == "member":
            log["mode"] = "bisection"
            log["offset"] = mid
            return build(mid), log
        if outcome == low_outcome:
            low = mid
        else:
            high = mid
        if abs(high - low) < 1e-15 * max(1.0, abs(low)):
            break
    log["mode"] = "failed"
    log["bracket"] = [low, high]
    return None, log


def riemannian_entry_probes(
    metric: MetricField,
    q: Sequence[float],
    tau0: float = 1e-3,
    count: int = 4,
    span: float = 4.0,
) -> list[dict[str, object]]:
    """Shoot Riemannian-side seeds at a tangency point and record the outcomes.

    Seeds mirror the Lorentzian member grid across the degenerate curve's
    osculating parabola; each is integrated with both orientations toward a
    disk of radius ``10 * r_stop``.  A probe counts as entering only if its
    direction converges to the degenerate direction, certified on two scales:
    it must cross the coarse disk within the member direction tolerance and,
    re-shot against a disk of radius ``r_stop / 10``, track that one too.
    Flybys through the Riemannian gap cross the coarse disk with a visibly
    misaligned direction and never reach the fine one (their closest approach
    saturates), which is how the tangency asymmetry shows up numerically.
    """
    report = classify(metric, q)
    if not report.case.startswith("D"):
        raise FamilyError(f"tangency probes need a D-type point, got {report.case}")
    qx, qy = report.point
    u_hat, n_hat, k_curve = _tangency_frame(metric, report)
    direction = _isotropic_root(report).direction
    r_stop = DEFAULT_OPTIONS.singular_stop_radius
    opts = replace(
        _MEMBER_BASE,
        target_point=(qx, qy),
        target_radius=10.0 * r_stop,
        singular_stop_radius=r_stop / 1000.0,
    )
    spreads = np.geomspace(0.05, 0.5, max(1, count)) * max(1.0, abs(2.0 * k_curve))
    slope_cycle = (0.0, 0.2, -0.2)
    probes: list[dict[str, object]] = []
    for i, spread in enumerate(spreads):
        # mirror of the member level across the degenerate curve: v = k u**2
        # with k on the Riemannian side of the curvature
        k_val = 2.0 * k_curve - (k_curve + float(spread))
        ds = slope_cycle[i % len(slope_cycle)]
        for side_sign in (1.0, -1.0):
            u_val = side_sign * tau0
            seed = _tangency_seed(
                (qx, qy), u_hat, n_hat, u_val, k_val * u_val * u_val,
                2.0 * k_val * u_val * (1.0 + ds),
            )
            if metric.discriminant(seed.x, seed.y) <= 0.0:
                # curvature corrections pushed the mirror off the Riemannian
                # side; walk along the discriminant gradient until it is back
                gx, gy = metric.discriminant_jet(seed.x, seed.y)[1:]
                norm = math.hypot(gx, gy)
                step = tau0 * tau0
                x, y = seed.x, seed.y
                for _ in range(60):
                    x += step * gx / norm
                    y += step * gy / norm
                    if metric.discriminant(x, y) > 0.0:
                        break
                seed = ProjectiveJet(x, y, seed.direction)
            xmin, xmax, ymin, ymax = metric.bbox
            if not (xmin <= seed.x <= xmax and ymin <= seed.y <= ymax):
                continue
            for orientation in (1.0, -1.0):
                leg = integrate_geodesic(metric, seed, span, opts, orientation=orientation)
                end = leg.jet(-1)
                distance = math.hypot(end.x - qx, end.y - qy)
                gap = projective_gap(end.direction, direction)
                record: dict[str, object] = {
                    "seed": _jet_dict(seed),
                    "orientation": orientation,
                    "termination": leg.termination,
                    "final_distance": distance,
                    "direction_gap": gap,
                }
                coarse = (
                    leg.termination == "hit-singular-set"
                    and distance <= 10.0 * r_stop
                    and gap <= DIRECTION_TOL
                )
                entered = False
                if coarse:
                    fine = integrate_geodesic(
                        metric,
                        seed,
                        span,
                        replace(opts, target_radius=r_stop / 10.0),
                        orientation=orientation,
                    )
                    fine_end = fine.jet(-1)
                    fine_distance = math.hypot(fine_end.x - qx, fine_end.y - qy)
                    fine_gap = projective_gap(fine_end.direction, direction)
                    record["refined_distance"] = fine_distance
                    record["refined_gap"] = fine_gap
                    entered = (
                        fine.termination == "hit-singular-set"
                        and fine_distance <= r_stop
                        and fine_gap <= DIRECTION_TOL
                    )
                record["entered"] = entered
                probes.append(record)
    return probes
