"""Geodesic and null flows in the projectivized slope charts.

Geodesics are integrated as trajectories of the projectivized field

    (dx, dy, dp) = (2 D, 2 D p, M(p))

where ``D`` is the metric discriminant and ``M`` is the direction cubic.
The field extends smoothly across the degenerate curve, which is what lets
trajectories be continued up to (and stopped at) degenerate jets.  Null
curves are integrated with the lifted field of the quadratic form

    (dx, dy, dp) = (F_p, p F_p, -(F_x + p F_y)),

which is tangent to the zero surface of the form.  Both integrations work
in the slope chart (p = dy/dx) or the reciprocal chart (pbar = dx/dy) and
switch charts whenever the direction value leaves the unit interval; the
traversal sign is adjusted at a switch so the underlying point motion is
continuous.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .degeneracy import (
    CHART_P,
    CHART_PBAR,
    ProjectiveDirection,
    isotropic_direction,
)
from .metric import BBox, MetricField

__all__ = [
    "ProjectiveJet",
    "IntegratorOptions",
    "GeodesicCurve",
    "NaturalCurve",
    "TERMINATIONS",
    "geodesic_field",
    "isotropic_field",
    "integrate_geodesic",
    "integrate_isotropic",
    "integrate_natural",
    "causal_type",
    "clairaut_integral",
    "weighted_divergence_residual",
    "raw_divergence",
    "singular_proximity",
    "singular_jacobian",
    "singular_spectrum",
    "singular_frame",
    "dense_points",
    "directed_polyline_gap",
]

TERMINATIONS = ("span-exhausted", "left-bbox", "hit-singular-set", "step-underflow")

CSV_HEADER = "t,x,y,chart,dirvalue,F,Delta,type"


@dataclass(frozen=True)
class ProjectiveJet:
    """A point of the surface together with a projective direction."""

    x: float
    y: float
    direction: ProjectiveDirection

    def canonical(self) -> "ProjectiveJet":
        return ProjectiveJet(self.x, self.y, self.direction.canonical())


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = 0.25
    first_step: float | None = None
    chart_switch_threshold: float = 1.0
    singular_stop_radius: float = 1e-6
    event_tol: float = 1e-6
    max_steps: int = 200_000
    # Optional stop on approach to a specific world point (used when tracing
    # curves into a degenerate point, where tangential approach makes the
    # whole degenerate curve "near" long before the point itself is).
    target_point: tuple[float, float] | None = None
    target_radius: float = 0.0


DEFAULT_OPTIONS = IntegratorOptions()


# --- curves -------------------------------------------------------------------


def _type_of(f_value: float, band: float) -> str:
    if abs(f_value) <= band:
        return "isotropic"
    return "timelike" if f_value < 0.0 else "spacelike"


@dataclass
class GeodesicCurve:
    """Sampled projective trajectory with pointwise form and discriminant."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    chart: list[str]
    dirvalue: np.ndarray
    F: np.ndarray
    Delta: np.ndarray
    sample_type: list[str]
    termination: str
    causal_type: str
    band: float = DEFAULT_OPTIONS.event_tol
    vx: np.ndarray | None = None
    vy: np.ndarray | None = None
    warnings: list[str] = field(default_factory=list)
    chart_switch_gap: float = 0.0

    def __len__(self) -> int:
        return len(self.t)

    def jet(self, index: int) -> ProjectiveJet:
        direction = ProjectiveDirection(self.chart[index], float(self.dirvalue[index]))
        return ProjectiveJet(float(self.x[index]), float(self.y[index]), direction)

    @property
    def start(self) -> ProjectiveJet:
        return self.jet(0)

    @property
    def end(self) -> ProjectiveJet:
        return self.jet(-1)

    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(CSV_HEADER + "\n")
        for i in range(len(self.t)):
            out.write(
                f"{float(self.t[i])!r},{float(self.x[i])!r},{float(self.y[i])!r},"
                f"{self.chart[i]},{float(self.dirvalue[i])!r},{float(self.F[i])!r},"
                f"{float(self.Delta[i])!r},{self.sample_type[i]}\n"
            )
        out.write(f"# termination: {self.termination}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GeodesicCurve":
        lines = [line for line in text.strip().splitlines() if line]
        if not lines or lines[0] != CSV_HEADER:
            raise ValueError("unrecognized curve CSV header")
        termination = "span-exhausted"
        rows = []
        for line in lines[1:]:
            if line.startswith("#"):
                if "termination:" in line:
                    termination = line.split("termination:", 1)[1].strip()
                continue
            parts = line.split(",")
            if len(parts) != 8:
                raise ValueError(f"malformed curve CSV row: {line!r}")
            rows.append(parts)
        t = np.array([float(r[0]) for r in rows])
        f_values = np.array([float(r[5]) for r in rows])
        types = [r[7] for r in rows]
        curve = cls(
            t=t,
            x=np.array([float(r[1]) for r in rows]),
            y=np.array([float(r[2]) for r in rows]),
            chart=[r[3] for r in rows],
            dirvalue=np.array([float(r[4]) for r in rows]),
            F=f_values,
            Delta=np.array([float(r[6]) for r in rows]),
            sample_type=types,
            termination=termination,
            causal_type=_overall_type(types),
        )
        return curve

    def to_dict(self) -> dict[str, object]:
        return {
            "t": self.t.tolist(),
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "chart": list(self.chart),
            "dirvalue": self.dirvalue.tolist(),
            "F": self.F.tolist(),
            "Delta": self.Delta.tolist(),
            "type": list(self.sample_type),
            "termination": self.termination,
            "causal_type": self.causal_type,
            "warnings": list(self.warnings),
        }


@dataclass
class NaturalCurve:
    """Arc-parameter trajectory of the second-order geodesic system."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    energy: np.ndarray
    termination: str
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.t)

    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def to_dict(self) -> dict[str, object]:
        return {
            "t": self.t.tolist(),
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "vx": self.vx.tolist(),
            "vy": self.vy.tolist(),
            "energy": self.energy.tolist(),
            "termination": self.termination,
            "warnings": list(self.warnings),
        }


def _overall_type(types: Sequence[str]) -> str:
    present = set(types)
    if present <= {"isotropic"}:
        return "isotropic"
    if "timelike" in present and "spacelike" in present:
        return "mixed"
    if "timelike" in present:
        return "timelike"
    return "spacelike"


def causal_type(curve: GeodesicCurve, band: float | None = None) -> str:
    """Overall causal character from pointwise form values.

    Samples with |F| inside the band are treated as on the null cone; a curve
    is ``isotropic`` only if every sample is.  Mixing strict signs yields
    ``mixed``.
    """
    if band is None:
        band = curve.band
    types = [_type_of(f, band) for f in np.asarray(curve.F)]
    return _overall_type(types)


# --- field evaluations ---------------------------------------------------------


def _working_frame(metric: MetricField, jet: ProjectiveJet):
    """Working metric, working coordinates and chart value for a jet."""
    canonical = jet.canonical()
    chart = canonical.direction.chart
    if chart == CHART_P:
        return metric, chart, canonical.x, canonical.y, canonical.direction.value
    return metric.swapped, chart, canonical.y, canonical.x, canonical.direction.value


def _cubic_eval(mu: Sequence[float], v: float) -> float:
    m0, m1, m2, m3 = mu
    return m0 + v * (m1 + v * (m2 + v * m3))


def geodesic_field(
    metric: MetricField, jet: ProjectiveJet, orientation: float = 1.0
) -> tuple[str, tuple[float, float, float]]:
    """Projectivized geodesic field at the jet, in its canonical chart.

    Returns ``(chart, (du, dv, dw))`` where the components are derivatives of
    the working coordinates: ``(x, y, p)`` in the slope chart and
    ``(y, x, pbar)`` in the reciprocal chart.  The field is only defined up to
    sign; the returned value is normalized so the point moves toward
    increasing first coordinate (falling back to an increasing direction
    value on the degenerate curve), and ``orientation = -1`` then flips it.
    """
    wm, chart, wx, wy, v = _working_frame(metric, jet)
    disc, *mu = wm.flow_values(wx, wy)
    m_value = _cubic_eval(mu, v)
    raw = (2.0 * disc, 2.0 * disc * v, m_value)
    if raw[0] != 0.0:
        s = math.copysign(1.0, raw[0])
    elif raw[2] != 0.0:
        s = math.copysign(1.0, raw[2])
    else:
        s = 1.0
    s *= float(orientation)
    return chart, (s * raw[0], s * raw[1], s * raw[2])


def isotropic_field(
    metric: MetricField,
    jet: ProjectiveJet,
    orientation: float = 1.0,
    form_tol: float = 1e-6,
) -> tuple[str, tuple[float, float, float]]:
    """Lifted null field at a jet on the null cone (|F| below form_tol)."""
    wm, chart, wx, wy, v = _working_frame(metric, jet)
    a, b, c, ax, ay, bx, by, cx, cy = wm.form_jet(wx, wy)
    f_value = a + 2.0 * b * v + c * v * v
    scale = max(abs(a), abs(b), abs(c), 1.0)
    if abs(f_value) > form_tol * scale:
        raise ValueError(
            f"jet is not on the null cone: form value {f_value:.3e}"
        )
    f_p = 2.0 * b + 2.0 * c * v
    f_x = ax + 2.0 * bx * v + cx * v * v
    f_y = ay + 2.0 * by * v + cy * v * v
    s = float(orientation)
    return chart, (s * f_p, s * v * f_p, s * -(f_x + v * f_y))


# --- proximity to singular jets -------------------------------------------------


def _proximity_from_jet(values: Sequence[float], v: float) -> float:
    """Gauss-Newton distance estimate to {discriminant = 0, cubic = 0}."""
    disc, disc_x, disc_y = values[0], values[1], values[2]
    mu = values[3:7]
    mu_x = values[7:11]
    mu_y = values[11:15]
    m_value = _cubic_eval(mu, v)
    m_x = _cubic_eval(mu_x, v)
    m_y = _cubic_eval(mu_y, v)
    m_p = mu[1] + v * (2.0 * mu[2] + v * 3.0 * mu[3])
    # G = (disc, M), J = dG/d(x, y, p); proximity = |J^+ G|
    g1, g2 = disc, m_value
    a11 = disc_x * disc_x + disc_y * disc_y
    a12 = disc_x * m_x + disc_y * m_y
    a22 = m_x * m_x + m_y * m_y + m_p * m_p
    det = a11 * a22 - a12 * a12
    norm = max(a11, a22, 1e-300)
    if det <= 1e-14 * norm * norm:
        return math.hypot(g1, g2) / math.sqrt(norm)
    z1 = (a22 * g1 - a12 * g2) / det
    z2 = (a11 * g2 - a12 * g1) / det
    d1 = disc_x * z1 + m_x * z2
    d2 = disc_y * z1 + m_y * z2
    d3 = m_p * z2
    return math.sqrt(d1 * d1 + d2 * d2 + d3 * d3)


def singular_proximity(metric: MetricField, jet: ProjectiveJet) -> float:
    """Estimated phase-space distance from the jet to the singular jets."""
    wm, _, wx, wy, v = _working_frame(metric, jet)
    return _proximity_from_jet(wm.flow_jet(wx, wy), v)


def _null_proximity(wm: MetricField, wx: float, wy: float, v: float) -> float:
    """Gauss-Newton distance estimate to {F = 0, F_p = 0} (the fold locus)."""
    (a, b, c,
     ax, ay, bx, by, cx, cy,
     _axx, _axy, _ayy, _bxx, _bxy, _byy, _cxx, _cxy, _cyy) = wm.form_jet2(wx, wy)
    f = a + 2.0 * b * v + c * v * v
    f_x = ax + 2.0 * bx * v + cx * v * v
    f_y = ay + 2.0 * by * v + cy * v * v
    f_p = 2.0 * b + 2.0 * c * v
    fp_x = 2.0 * bx + 2.0 * cx * v
    fp_y = 2.0 * by + 2.0 * cy * v
    fp_p = 2.0 * c
    a11 = f_x * f_x + f_y * f_y + f_p * f_p
    a12 = f_x * fp_x + f_y * fp_y + f_p * fp_p
    a22 = fp_x * fp_x + fp_y * fp_y + fp_p * fp_p
    det = a11 * a22 - a12 * a12
    norm = max(a11, a22, 1e-300)
    if det <= 1e-14 * norm * norm:
        return math.hypot(f, f_p) / math.sqrt(norm)
    z1 = (a22 * f - a12 * f_p) / det
    z2 = (a11 * f_p - a12 * f) / det
    d1 = f_x * z1 + fp_x * z2
    d2 = f_y * z1 + fp_y * z2
    d3 = f_p * z1 + fp_p * z2
    return math.sqrt(d1 * d1 + d2 * d2 + d3 * d3)


# --- Dormand-Prince 4(5) core ----------------------------------------------------

_A2 = (1 / 5,)
_A3 = (3 / 40, 9 / 40)
_A4 = (44 / 45, -56 / 15, 32 / 9)
_A5 = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A6 = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)


def _rk_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float, k1: np.ndarray):
    k2 = f(y + h * (_A2[0] * k1))
    k3 = f(y + h * (_A3[0] * k1 + _A3[1] * k2))
    k4 = f(y + h * (_A4[0] * k1 + _A4[1] * k2 + _A4[2] * k3))
    k5 = f(y + h * (_A5[0] * k1 + _A5[1] * k2 + _A5[2] * k3 + _A5[3] * k4))
    k6 = f(y + h * (_A6[0] * k1 + _A6[1] * k2 + _A6[2] * k3 + _A6[3] * k4 + _A6[4] * k5))
    y1 = y + h * (_B[0] * k1 + _B[2] * k3 + _B[3] * k4 + _B[4] * k5 + _B[5] * k6)
    k7 = f(y1)
    err = h * (
        _E[0] * k1 + _E[2] * k3 + _E[3] * k4 + _E[4] * k5 + _E[5] * k6 + _E[6] * k7
    )
    return y1, err, k7


def _error_ratio(err: np.ndarray, y0: np.ndarray, y1: np.ndarray, opts: IntegratorOptions) -> float:
    scale = opts.abs_tol + opts.rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _hermite(y0: np.ndarray, f0: np.ndarray, y1: np.ndarray, f1: np.ndarray, h: float, theta: float) -> np.ndarray:
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + theta
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1


def _initial_step(f0: np.ndarray, y0: np.ndarray, span: float, opts: IntegratorOptions) -> float:
    if opts.first_step is not None:
        return min(opts.first_step, span, opts.max_step)
    scale = float(np.max(np.abs(f0))) + 1e-12
    size = float(np.max(np.abs(y0))) + 1.0
    h = 0.01 * size / scale
    return max(min(h, span, opts.max_step), 1e-12)


class _PIController:
    def __init__(self) -> None:
        self.previous = 1.0

    def factor(self, err: float, accepted: bool) -> float:
        err = max(err, 1e-12)
        f = 0.9 * err ** -0.2 * self.previous ** 0.04
        f = min(5.0, max(0.2, f))
        if accepted:
            self.previous = err
        else:
            f = min(f, 1.0)
        return f


# --- projective integration --------------------------------------------------------


def _world_xy(chart: str, w1: float, w2: float) -> tuple[float, float]:
    return (w1, w2) if chart == CHART_P else (w2, w1)


def _world_velocity(chart: str, f: np.ndarray) -> tuple[float, float]:
    return (float(f[0]), float(f[1])) if chart == CHART_P else (float(f[1]), float(f[0]))


class _Recorder:
    def __init__(self, band: float) -> None:
        self.band = band
        self.t: list[float] = []
        self.x: list[float] = []
        self.y: list[float] = []
        self.chart: list[str] = []
        self.dirvalue: list[float] = []
        self.F: list[float] = []
        self.Delta: list[float] = []
        self.types: list[str] = []
        self.vx: list[float] = []
        self.vy: list[float] = []

    def add(self, t, chart, state, f_value, delta_value, velocity) -> None:
        wx, wy, v = float(state[0]), float(state[1]), float(state[2])
        x, y = _world_xy(chart, wx, wy)
        self.t.append(float(t))
        self.x.append(x)
        self.y.append(y)
        self.chart.append(chart)
        self.dirvalue.append(v)
        self.F.append(float(f_value))
        self.Delta.append(float(delta_value))
        self.types.append(_type_of(float(f_value), self.band))
        self.vx.append(velocity[0])
        self.vy.append(velocity[1])

    def build(self, termination: str, warnings: list[str], switch_gap: float) -> GeodesicCurve:
        return GeodesicCurve(
            t=np.array(self.t),
            x=np.array(self.x),
            y=np.array(self.y),
            chart=self.chart,
            dirvalue=np.array(self.dirvalue),
            F=np.array(self.F),
            Delta=np.array(self.Delta),
            sample_type=self.types,
            termination=termination,
            causal_type=_overall_type(self.types),
            band=self.band,
            vx=np.array(self.vx),
            vy=np.array(self.vy),
            warnings=warnings,
            chart_switch_gap=switch_gap,
        )


def _integrate_projective(
    metric: MetricField,
    jet: ProjectiveJet,
    span: float,
    opts: IntegratorOptions,
    orientation: float,
    bbox: BBox | None,
    kind: str,
) -> GeodesicCurve:
    if span <= 0.0:
        raise ValueError("span must be positive")
    if orientation not in (1.0, -1.0, 1, -1):
        raise ValueError("orientation must be +1 or -1")
    box = metric.bbox if bbox is None else tuple(float(v) for v in bbox)
    xmin, xmax, ymin, ymax = box

    wm, chart, wx, wy, v = _working_frame(metric, jet)
    sigma = float(orientation)
    state = np.array([wx, wy, v], dtype=float)

    # The integration parameter is phase-space arc length: the field is
    # rescaled to unit speed.  This is an orbital equivalence (same curves)
    # and it reaches degenerate jets, where the raw field decays to zero, in
    # finite parameter time.
    def make_rhs(wm_: MetricField, sigma_: float):
        if kind == "geodesic":
            def rhs(y: np.ndarray) -> np.ndarray:
                disc, m0, m1, m2, m3 = wm_.flow_values(y[0], y[1])
                vv = y[2]
                m = m0 + vv * (m1 + vv * (m2 + vv * m3))
                raw = np.array([2.0 * disc, 2.0 * disc * vv, m])
                speed = math.sqrt(raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2])
                if speed < 1e-300:
                    return np.zeros(3)
                return (sigma_ / speed) * raw
        else:
            def rhs(y: np.ndarray) -> np.ndarray:
                a, b, c, ax, ay, bx, by, cx, cy = wm_.form_jet(y[0], y[1])
                vv = y[2]
                f_p = 2.0 * b + 2.0 * c * vv
                f_x = ax + 2.0 * bx * vv + cx * vv * vv
                f_y = ay + 2.0 * by * vv + cy * vv * vv
                raw = np.array([f_p, vv * f_p, -(f_x + vv * f_y)])
                speed = math.sqrt(raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2])
                if speed < 1e-300:
                    return np.zeros(3)
                return (sigma_ / speed) * raw
        return rhs

    def outside(y: np.ndarray) -> float:
        """Positive when the world point is outside the bbox."""
        x_, y_ = _world_xy(chart, float(y[0]), float(y[1]))
        return max(xmin - x_, x_ - xmax, ymin - y_, y_ - ymax)

    def sample_values(y: np.ndarray) -> tuple[float, float]:
        f_value = wm.form(y[0], y[1], y[2])
        delta_value = wm.discriminant(y[0], y[1])
        return f_value, delta_value

    def proximity(y: np.ndarray) -> float:
        if kind == "geodesic":
            return _proximity_from_jet(wm.flow_jet(y[0], y[1]), float(y[2]))
        return _null_proximity(wm, float(y[0]), float(y[1]), float(y[2]))

    target = opts.target_point

    def target_excess(y: np.ndarray) -> float:
        """Positive while the world point is outside the target disk."""
        x_, y_ = _world_xy(chart, float(y[0]), float(y[1]))
        return math.hypot(x_ - target[0], y_ - target[1]) - opts.target_radius

    recorder = _Recorder(opts.event_tol)
    warnings: list[str] = []
    switch_gap = 0.0

    rhs = make_rhs(wm, sigma)
    if outside(state) > 0.0:
        raise ValueError("starting jet lies outside the bbox")
    f0_value, d0_value = sample_values(state)
    k1 = rhs(state)
    recorder.add(0.0, chart, state, f0_value, d0_value, _world_velocity(chart, k1))
    if opts.singular_stop_radius > 0.0 and proximity(state) <= opts.singular_stop_radius:
        return recorder.build("hit-singular-set", warnings, switch_gap)
    if target is not None and target_excess(state) <= 0.0:
        return recorder.build("hit-singular-set", warnings, switch_gap)

    t = 0.0
    h = _initial_step(k1, state, span, opts)
    controller = _PIController()
    termination = "span-exhausted"
    steps = 0

    while t < span:
        steps += 1
        if steps > opts.max_steps:
            raise RuntimeError("integration step budget exhausted")
        h = min(h, span - t, opts.max_step)
        if h < 1e-14 * max(1.0, abs(t)):
            termination = "step-underflow"
            break
        y1, err, k7 = _rk_step(rhs, state, h, k1)
        if not np.all(np.isfinite(y1)) or not np.all(np.isfinite(err)):
            h *= 0.25
            continue
        ratio = _error_ratio(err, state, y1, opts)
        if ratio > 1.0:
            h *= controller.factor(ratio, accepted=False)
            continue

        def interp(theta: float) -> np.ndarray:
            return _hermite(state, k1, y1, k7, h, theta)

        # bbox exit: truncate the step at the boundary crossing
        exited = outside(y1) > 0.0
        theta_end = 1.0
        if exited:
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if outside(interp(mid)) > 0.0:
                    hi = mid
                else:
                    lo = mid
            theta_end = hi
            y1 = interp(theta_end)

        # target-disk entry: truncate earlier than any bbox exit
        reached_target = False
        if target is not None and target_excess(y1) <= 0.0:
            lo, hi = 0.0, theta_end
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if target_excess(interp(mid)) <= 0.0:
                    hi = mid
                else:
                    lo = mid
            theta_end = hi
            y1 = interp(theta_end)
            reached_target = True
            exited = False

        # sign-change events of the discriminant and of the form
        f1_value, d1_value = sample_values(y1)
        events: list[tuple[float, np.ndarray]] = []
        for previous, current, which in (
            (d0_value, d1_value, "delta"),
            (f0_value, f1_value, "form"),
        ):
            if previous == 0.0 or current == 0.0 or (previous < 0.0) == (current < 0.0):
                continue
            lo, hi = 0.0, theta_end
            g_lo = previous
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                y_mid = interp(mid)
                g_mid = (
                    wm.discriminant(y_mid[0], y_mid[1])
                    if which == "delta"
                    else wm.form(y_mid[0], y_mid[1], y_mid[2])
                )
                if (g_mid < 0.0) == (g_lo < 0.0):
                    lo, g_lo = mid, g_mid
                else:
                    hi = mid
            events.append((0.5 * (lo + hi), interp(0.5 * (lo + hi))))
        events.sort(key=lambda item: item[0])
        for theta_ev, y_ev in events:
            fe, de = sample_values(y_ev)
            ke = rhs(y_ev)
            recorder.add(t + theta_ev * h, chart, y_ev, fe, de, _world_velocity(chart, ke))

        t = t + theta_end * h
        state = y1
        f0_value, d0_value = f1_value, d1_value
        k1 = k7 if theta_end == 1.0 else rhs(state)
        recorder.add(t, chart, state, f1_value, d1_value, _world_velocity(chart, k1))

        if reached_target:
            termination = "hit-singular-set"
            break
        if exited:
            termination = "left-bbox"
            break
        if opts.singular_stop_radius > 0.0 and proximity(state) <= opts.singular_stop_radius:
            termination = "hit-singular-set"
            break

        # chart switch once the direction value leaves the unit interval
        if abs(state[2]) > opts.chart_switch_threshold:
            v_old = float(state[2])
            w_old = _world_velocity(chart, k1)
            chart = CHART_PBAR if chart == CHART_P else CHART_P
            wm = wm.swapped
            state = np.array([state[1], state[0], 1.0 / v_old])
            if kind == "geodesic":
                sigma *= math.copysign(1.0, v_old)
            else:
                sigma *= -math.copysign(1.0, v_old)
            rhs = make_rhs(wm, sigma)
            k1 = rhs(state)
            w_new = _world_velocity(chart, k1)
            norm_old = math.hypot(*w_old)
            norm_new = math.hypot(*w_new)
            if norm_old > 1e-12 and norm_new > 1e-12:
                cross = abs(w_old[0] * w_new[1] - w_old[1] * w_new[0]) / (norm_old * norm_new)
                dot = (w_old[0] * w_new[0] + w_old[1] * w_new[1]) / (norm_old * norm_new)
                switch_gap = max(switch_gap, cross)
                if dot < 0.0:
                    warnings.append("chart switch reversed the traversal direction")
            f0_value, d0_value = sample_values(state)

        h *= controller.factor(max(ratio, 1e-12), accepted=True)

    return recorder.build(termination, warnings, switch_gap)


def integrate_geodesic(
    metric: MetricField,
    jet: ProjectiveJet,
    span: float,
    opts: IntegratorOptions | None = None,
    orientation: float = 1.0,
    bbox: BBox | None = None,
) -> GeodesicCurve:
    """Integrate the projectivized geodesic field starting from a jet."""
    return _integrate_projective(
        metric, jet, span, opts or DEFAULT_OPTIONS, orientation, bbox, "geodesic"
    )


def integrate_isotropic(
    metric: MetricField,
    jet: ProjectiveJet,
    span: float,
    opts: IntegratorOptions | None = None,
    orientation: float = 1.0,
    bbox: BBox | None = None,
) -> GeodesicCurve:
    """Integrate the lifted null field starting from a jet on the null cone."""
    opts = opts or DEFAULT_OPTIONS
    isotropic_field(metric, jet, form_tol=max(opts.event_tol, 1e-6))  # precondition
    return _integrate_projective(metric, jet, span, opts, orientation, bbox, "null")


# --- natural-parameter integration ---------------------------------------------------


def integrate_natural(
    metric: MetricField,
    start: Sequence[float],
    velocity: Sequence[float],
    span: float,
    opts: IntegratorOptions | None = None,
    bbox: BBox | None = None,
) -> NaturalCurve:
    """Integrate the second-order geodesic system with its own parameter.

    The 2x2 coefficient matrix of the accelerations degenerates on the
    degenerate curve; when that happens the step is solved in the least-squares
    sense and the run stops (``hit-singular-set``) unless the system stays
    consistent, as it does along straight degenerate lines.
    """
    opts = opts or DEFAULT_OPTIONS
    box = metric.bbox if bbox is None else tuple(float(v) for v in bbox)
    xmin, xmax, ymin, ymax = box
    if span <= 0.0:
        raise ValueError("span must be positive")

    inconsistent = {"flag": False}

    def rhs(y: np.ndarray) -> np.ndarray:
        x_, y_, vx_, vy_ = y
        a, b, c, ax, ay, bx, by, cx, cy = metric.form_jet(x_, y_)
        r1 = 0.5 * ((cx - 2.0 * by) * vy_ * vy_ - 2.0 * ay * vx_ * vy_ - ax * vx_ * vx_)
        r2 = 0.5 * ((ay - 2.0 * bx) * vx_ * vx_ - 2.0 * cx * vx_ * vy_ - cy * vy_ * vy_)
        det = a * c - b * b
        scale = max(abs(a), abs(b), abs(c), 1e-30)
        if abs(det) > 1e-12 * scale * scale:
            acc_x = (c * r1 - b * r2) / det
            acc_y = (a * r2 - b * r1) / det
        else:
            matrix = np.array([[a, b], [b, c]])
            rhs2 = np.array([r1, r2])
            solution, *_ = np.linalg.lstsq(matrix, rhs2, rcond=None)
            residual = matrix @ solution - rhs2
            if np.hypot(*residual) > 1e-8 * (1.0 + np.hypot(r1, r2)):
                inconsistent["flag"] = True
            acc_x, acc_y = solution
        return np.array([vx_, vy_, acc_x, acc_y])

    def energy(y: np.ndarray) -> float:
        a, b, c = metric.coefficients(y[0], y[1])
        return a * y[2] * y[2] + 2.0 * b * y[2] * y[3] + c * y[3] * y[3]

    state = np.array([start[0], start[1], velocity[0], velocity[1]], dtype=float)
    samples = {key: [] for key in ("t", "x", "y", "vx", "vy", "energy")}

    def record(t: float, y: np.ndarray) -> None:
        samples["t"].append(t)
        samples["x"].append(float(y[0]))
        samples["y"].append(float(y[1]))
        samples["vx"].append(float(y[2]))
        samples["vy"].append(float(y[3]))
        samples["energy"].append(energy(y))

    def outside(y: np.ndarray) -> float:
        return max(xmin - y[0], y[0] - xmax, ymin - y[1], y[1] - ymax)

    if outside(state) > 0.0:
        raise ValueError("starting point lies outside the bbox")
    record(0.0, state)
    k1 = rhs(state)
    if inconsistent["flag"]:
        return NaturalCurve(
            **{k: np.array(v) for k, v in samples.items()},
            termination="hit-singular-set",
        )

    t = 0.0
    h = _initial_step(k1, state, span, opts)
    controller = _PIController()
    termination = "span-exhausted"
    warnings: list[str] = []
    steps = 0

    while t < span:
        steps += 1
        if steps > opts.max_steps:
            raise RuntimeError("integration step budget exhausted")
        h = min(h, span - t, opts.max_step)
        if h < 1e-14 * max(1.0, abs(t)):
            termination = "step-underflow"
            break
        inconsistent["flag"] = False
        y1, err, k7 = _rk_step(rhs, state, h, k1)
        if not np.all(np.isfinite(y1)) or not np.all(np.isfinite(err)):
            if inconsistent["flag"]:
                termination = "hit-singular-set"
                break
            h *= 0.25
            continue
        if inconsistent["flag"]:
            termination = "hit-singular-set"
            record(t + h, y1)
            break
        ratio = _error_ratio(err, state, y1, opts)
        if ratio > 1.0:
            h *= controller.factor(ratio, accepted=False)
            continue

        exited = outside(y1) > 0.0
        if exited:
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if outside(_hermite(state, k1, y1, k7, h, mid)) > 0.0:
                    hi = mid
                else:
                    lo = mid
            y1 = _hermite(state, k1, y1, k7, h, hi)
            t += hi * h
            record(t, y1)
            termination = "left-bbox"
            break

        t += h
        state, k1 = y1, k7
        record(t, state)
        h *= controller.factor(max(ratio, 1e-12), accepted=True)

    energies = np.array(samples["energy"])
    if len(energies) > 1:
        drift = float(np.max(np.abs(energies - energies[0])))
        if drift > 1e-6 * (1.0 + abs(energies[0])):
            warnings.append(f"energy drift {drift:.3e}")
    return NaturalCurve(
        t=np.array(samples["t"]),
        x=np.array(samples["x"]),
        y=np.array(samples["y"]),
        vx=np.array(samples["vx"]),
        vy=np.array(samples["vy"]),
        energy=energies,
        termination=termination,
        warnings=warnings,
    )


# --- invariants and diagnostics --------------------------------------------------


def clairaut_integral(jet: ProjectiveJet) -> float:
    """Deviation invariant (y - p^2) / y^2 of the semicubic normal form.

    Positive on timelike jets, negative on spacelike ones, zero exactly on
    the null cone of the normal-form metric.
    """
    slope = jet.direction.slope()
    if not math.isfinite(slope):
        raise ValueError("vertical direction: the deviation invariant diverges")
    if jet.y == 0.0:
        raise ValueError("the deviation invariant is undefined on y = 0")
    return (jet.y - slope * slope) / (jet.y * jet.y)


def _geodesic_field_components(metric: MetricField, x: float, y: float, p: float) -> np.ndarray:
    disc, *mu = metric.flow_values(x, y)
    return np.array([2.0 * disc, 2.0 * disc * p, _cubic_eval(mu, p)])


def raw_divergence(metric: MetricField, x: float, y: float, p: float, h: float = 1e-4) -> float:
    """Central-difference divergence of the projectivized geodesic field."""
    total = 0.0
    for i, (dx, dy, dp) in enumerate(((h, 0.0, 0.0), (0.0, h, 0.0), (0.0, 0.0, h))):
        forward = _geodesic_field_components(metric, x + dx, y + dy, p + dp)
        backward = _geodesic_field_components(metric, x - dx, y - dy, p - dp)
        total += (forward[i] - backward[i]) / (2.0 * h)
    return total


def weighted_divergence_residual(
    metric: MetricField, x: float, y: float, p: float, h: float = 1e-4
) -> float:
    """Central-difference divergence of the field weighted by 1/(2 F^{3/2}).

    The weighted field is divergence-free wherever the form is positive, so
    the returned value is a pure discretization residual.  Raises if the form
    is not safely positive on the whole stencil.
    """

    def weighted(x_: float, y_: float, p_: float) -> np.ndarray:
        f_value = metric.form(x_, y_, p_)
        if f_value <= 0.0:
            raise ValueError("form is not positive on the difference stencil")
        return _geodesic_field_components(metric, x_, y_, p_) / (2.0 * f_value ** 1.5)

    total = 0.0
    for i, (dx, dy, dp) in enumerate(((h, 0.0, 0.0), (0.0, h, 0.0), (0.0, 0.0, h))):
        forward = weighted(x + dx, y + dy, p + dp)
        backward = weighted(x - dx, y - dy, p - dp)
        total += (forward[i] - backward[i]) / (2.0 * h)
    return total


def singular_jacobian(
    metric: MetricField,
    q: Sequence[float],
    direction: ProjectiveDirection | None = None,
    orientation: float = 1.0,
) -> tuple[str, np.ndarray]:
    """Exact linearization of the geodesic field at a singular jet.

    Returns the working chart and the 3x3 Jacobian in that chart.  The point
    must be degenerate and the direction an admissible root there.
    """
    x, y = float(q[0]), float(q[1])
    if direction is None:
        direction = isotropic_direction(metric, (x, y))
    jet = ProjectiveJet(x, y, direction)
    wm, chart, wx, wy, v = _working_frame(metric, jet)
    values = wm.flow_jet(wx, wy)
    disc, disc_x, disc_y = values[0], values[1], values[2]
    mu = values[3:7]
    mu_x = values[7:11]
    mu_y = values[11:15]
    scale = max(wm.coefficient_scale(wx, wy), 1e-30)
    if abs(disc) > 1e-8 * scale * scale:
        raise ValueError(f"point ({x:g}, {y:g}) is not degenerate")
    m_value = _cubic_eval(mu, v)
    cubic_scale = max(max(abs(m) for m in mu), 1e-30)
    if abs(m_value) > 1e-6 * cubic_scale:
        raise ValueError("direction is not an admissible root at the point")
    m_x = _cubic_eval(mu_x, v)
    m_y = _cubic_eval(mu_y, v)
    m_p = mu[1] + v * (2.0 * mu[2] + v * 3.0 * mu[3])
    jac = float(orientation) * np.array(
        [
            [2.0 * disc_x, 2.0 * disc_y, 0.0],
            [2.0 * v * disc_x, 2.0 * v * disc_y, 2.0 * disc],
            [m_x, m_y, m_p],
        ]
    )
    return chart, jac


def singular_spectrum(
    metric: MetricField,
    q: Sequence[float],
    direction: ProjectiveDirection | None = None,
    orientation: float = 1.0,
) -> tuple[complex, complex, complex]:
    """Eigenvalues of the singular-jet linearization, by descending modulus."""
    _, jac = singular_jacobian(metric, q, direction, orientation)
    values = sorted(np.linalg.eigvals(jac), key=lambda z: (-abs(z), -z.real, -z.imag))
    return complex(values[0]), complex(values[1]), complex(values[2])


def singular_frame(
    metric: MetricField,
    q: Sequence[float],
    direction: ProjectiveDirection | None = None,
    orientation: float = 1.0,
) -> tuple[str, np.ndarray, np.ndarray]:
    """Chart, eigenvalues and matching eigenvectors at a singular jet."""
    chart, jac = singular_jacobian(metric, q, direction, orientation)
    values, vectors = np.linalg.eig(jac)
    order = sorted(range(3), key=lambda i: (-abs(values[i]), -values[i].real, -values[i].imag))
    return chart, values[order], vectors[:, order]


# --- polyline utilities -----------------------------------------------------------


def dense_points(curve: GeodesicCurve | NaturalCurve, spacing: float) -> np.ndarray:
    """Resample a curve to roughly uniform spatial spacing via cubic Hermite.

    Requires integrator-produced curves (velocities present).
    """
    if curve.vx is None or curve.vy is None:
        raise ValueError("curve has no stored velocities; integrate it first")
    t = np.asarray(curve.t)
    pos = np.column_stack([curve.x, curve.y])
    vel = np.column_stack([curve.vx, curve.vy])
    pieces = [pos[:1]]
    for i in range(len(t) - 1):
        h = t[i + 1] - t[i]
        chord = float(np.hypot(*(pos[i + 1] - pos[i])))
        n = max(1, int(math.ceil(chord / spacing)))
        thetas = np.linspace(0.0, 1.0, n + 1)[1:]
        segment = [
            _hermite(pos[i], vel[i], pos[i + 1], vel[i + 1], h, theta) for theta in thetas
        ]
        pieces.append(np.array(segment))
    return np.vstack(pieces)


def directed_polyline_gap(points: np.ndarray, polyline: np.ndarray) -> float:
    """Max over ``points`` of the distance to the ``polyline`` (as segments)."""
    p0 = polyline[:-1]
    p1 = polyline[1:]
    d = p1 - p0
    length2 = np.einsum("ij,ij->i", d, d)
    length2 = np.where(length2 == 0.0, 1.0, length2)
    worst = 0.0
    for point in np.asarray(points):
        offsets = point - p0
        alphas = np.clip(np.einsum("ij,ij->i", offsets, d) / length2, 0.0, 1.0)
        nearest = p0 + alphas[:, None] * d
        gaps = np.hypot(point[0] - nearest[:, 0], point[1] - nearest[:, 1])
        worst = max(worst, float(gaps.min()))
    return worst
