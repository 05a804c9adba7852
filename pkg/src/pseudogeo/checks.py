"""Randomized structural-invariant suites over the metric catalog.

Each suite stresses one identity the engine is built on: the 2:1 eigenvalue
resonance at transverse singular jets, the divergence-free weighted geodesic
field, agreement between the projective and natural integrators, and the
three flow invariants (the isotropic surface, the frozen position over
degenerate points, and causal-type constancy).  Suites are deterministic
given their seed and return structured reports suitable for JSON output.
"""

from __future__ import annotations

import inspect
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .catalog import build_catalog_metric
from .degeneracy import (
    DegeneracyError,
    ProjectiveDirection,
    classify,
    find_S0_point,
    refine_to_curve,
    trace_degenerate_curve,
)
from .families import FamilyError, null_directions
from .geoflow import (
    DEFAULT_OPTIONS,
    IntegratorOptions,
    ProjectiveJet,
    dense_points,
    directed_polyline_gap,
    integrate_geodesic,
    integrate_natural,
    raw_divergence,
    singular_spectrum,
    weighted_divergence_residual,
)
from .metric import BBox, MetricField

__all__ = [
    "SuiteReport",
    "check_resonance",
    "check_divergence",
    "check_oracle",
    "check_invariance",
    "SUITES",
    "run_suite",
    "run_all",
]

# Catalog instances with transverse (C-case) degenerate points.
C_CASE_SPECS = ("ex1", "ex1exp", "c1c3(-0.5)", "c1c3(0.5)", "mink-sphere")
# Catalog instances exercised by the jet-local and integrator suites.
ALL_SPECS = ("ex1", "ex1exp", "c1c3(0.5)", "dd(-1)", "clairaut", "mink-sphere")

_TIGHT = IntegratorOptions(rel_tol=1e-12, abs_tol=1e-14, max_step=0.05)


@dataclass
class SuiteReport:
    """Outcome of one suite: pass flag, per-trial stats, failure records."""

    suite: str
    passed: bool
    trials: int
    failures: list[dict[str, object]] = field(default_factory=list)
    stats: dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict[str, object]:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "trials": self.trials,
            "failures": self.failures,
            "stats": self.stats,
        }


def _metrics(specs: Sequence[str]) -> list[MetricField]:
    return [build_catalog_metric(spec) for spec in specs]


def _inset_box(box: BBox, fraction: float = 0.05) -> BBox:
    xmin, xmax, ymin, ymax = box
    dx, dy = fraction * (xmax - xmin), fraction * (ymax - ymin)
    return (xmin + dx, xmax - dx, ymin + dy, ymax - dy)


def _run_trials(
    tasks: Sequence[Callable[[], dict[str, object]]], jobs: int | None
) -> list[dict[str, object]]:
    if jobs is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(task) for task in tasks]
            return [future.result() for future in futures]
    return [task() for task in tasks]


# --- resonance ---------------------------------------------------------------


def _curve_probes(metric: MetricField, quota: int) -> Iterator[tuple[float, float]]:
    """Up to ``quota`` refined points spread along the degenerate curve."""
    produced = 0
    for component in trace_degenerate_curve(metric):
        if produced >= quota:
            break
        # interior stride, avoiding the clipped component ends
        indices = np.linspace(0, len(component) - 1, quota + 2)[1:-1]
        for index in indices.astype(int):
            if produced >= quota:
                break
            try:
                point = refine_to_curve(metric, component[index])
            except DegeneracyError:
                continue
            produced += 1
            yield point


def check_resonance(
    samples: int = 20, rel_tol: float = 1e-8, specs: Sequence[str] = C_CASE_SPECS
) -> SuiteReport:
    """Eigenvalue structure at transverse singular jets.

    At every sampled C-case point the lifted-field spectrum at the isotropic
    root must satisfy lambda_1 = 2 lambda_2 with a negligible third
    eigenvalue; at simple non-isotropic roots the pair must balance,
    lambda_1 + lambda_2 = 0.
    """
    metrics = _metrics(specs)
    quota = int(math.ceil(samples / len(metrics)))
    failures: list[dict[str, object]] = []
    checked = 0
    pair_checked = 0
    worst_resonance = 0.0
    worst_pair = 0.0
    for metric in metrics:
        for point in _curve_probes(metric, quota):
            if checked >= samples:
                break
            try:
                report = classify(metric, point)
            except DegeneracyError:
                continue
            if not report.case.startswith("C"):
                continue
            lam1, lam2, lam3 = singular_spectrum(metric, point)
            top = max(abs(lam1), 1e-30)
            resonance = abs(lam1 - 2.0 * lam2) / top
            residual = abs(lam3) / top
            worst_resonance = max(worst_resonance, resonance, residual)
            checked += 1
            if resonance > rel_tol or residual > rel_tol:
                failures.append(
                    {
                        "metric": metric.label or metric.to_text(),
                        "point": list(point),
                        "case": report.case,
                        "spectrum": [[z.real, z.imag] for z in (lam1, lam2, lam3)],
                        "resonance_defect": resonance,
                        "third_eigenvalue": residual,
                    }
                )
            for root in report.roots:
                if root.isotropic or root.multiplicity != 1:
                    continue
                lam1, lam2, lam3 = singular_spectrum(metric, point, root.direction)
                top = max(abs(lam1), 1e-30)
                balance = abs(lam1 + lam2) / top
                residual = abs(lam3) / top
                worst_pair = max(worst_pair, balance, residual)
                pair_checked += 1
                if balance > rel_tol or residual > rel_tol:
                    failures.append(
                        {
                            "metric": metric.label or metric.to_text(),
                            "point": list(point),
                            "case": report.case,
                            "root": root.to_dict(),
                            "balance_defect": balance,
                            "third_eigenvalue": residual,
                        }
                    )
    return SuiteReport(
        suite="resonance",
        passed=not failures and checked >= samples,
        trials=checked,
        failures=failures,
        stats={
            "isotropic_jets": checked,
            "pair_roots": pair_checked,
            "worst_resonance_defect": worst_resonance,
            "worst_pair_defect": worst_pair,
        },
    )


# --- divergence --------------------------------------------------------------


def check_divergence(
    per_metric: int = 50,
    h: float = 1e-4,
    seed: int = 0,
    residual_tol: float = 1e-5,
    raw_floor: float = 1e-2,
    raw_fraction: float = 0.5,
    form_floor: float = 0.4,
    specs: Sequence[str] = ALL_SPECS,
) -> SuiteReport:
    """The geodesic field weighted by 1/(2 F^{3/2}) is divergence-free.

    The residual of a fixed-step stencil grows like F^(-7/2) as the jet
    approaches the null cone, so positive-form jets are sampled with the form
    at least ``form_floor`` of the coefficient scale; there the residual is a
    pure discretization error.  The unweighted divergence at the pooled jets
    must stay visibly nonzero for at least ``raw_fraction`` of them, so the
    identity is not passing vacuously (it vanishes identically for metrics
    with constant coefficients along the flow, which is why the control pools
    the catalog instead of binding each metric).
    """
    rng = np.random.default_rng(seed)
    failures: list[dict[str, object]] = []
    raw_values: list[float] = []
    total = 0
    worst = 0.0
    for metric in _metrics(specs):
        xmin, xmax, ymin, ymax = _inset_box(metric.bbox)
        count = 0
        attempts = 0
        while count < per_metric and attempts < 400 * per_metric:
            attempts += 1
            x = rng.uniform(xmin, xmax)
            y = rng.uniform(ymin, ymax)
            p = rng.uniform(-3.0, 3.0)
            scale = max(metric.coefficient_scale(x, y), 1e-30)
            if metric.form(x, y, p) <= form_floor * scale:
                continue
            try:
                residual = weighted_divergence_residual(metric, x, y, p, h)
            except ValueError:
                continue
            count += 1
            total += 1
            worst = max(worst, abs(residual))
            raw_values.append(abs(raw_divergence(metric, x, y, p, h)))
            if abs(residual) > residual_tol:
                failures.append(
                    {
                        "metric": metric.label or metric.to_text(),
                        "jet": [x, y, p],
                        "residual": residual,
                    }
                )
        if count < per_metric:
            failures.append(
                {
                    "metric": metric.label or metric.to_text(),
                    "error": f"only {count} of {per_metric} positive-form jets found",
                }
            )
    nontrivial = sum(1 for value in raw_values if value > raw_floor)
    if nontrivial < raw_fraction * len(raw_values):
        failures.append(
            {
                "error": "unweighted divergence is too small to witness the weight",
                "nontrivial": nontrivial,
                "count": len(raw_values),
            }
        )
    return SuiteReport(
        suite="divergence",
        passed=not failures,
        trials=total,
        failures=failures,
        stats={
            "worst_residual": worst,
            "step": h,
            "nontrivial_raw": nontrivial,
        },
    )


# --- dual-integrator oracle ---------------------------------------------------


def _window_avoiding_S0(
    metric: MetricField, rng: np.random.Generator, size_fraction: float
) -> BBox | None:
    xmin, xmax, ymin, ymax = metric.bbox
    width = size_fraction * (xmax - xmin)
    height = size_fraction * (ymax - ymin)
    x0 = rng.uniform(xmin + 0.6 * width, xmax - 0.6 * width)
    y0 = rng.uniform(ymin + 0.6 * height, ymax - 0.6 * height)
    box = (x0 - 0.5 * width, x0 + 0.5 * width, y0 - 0.5 * height, y0 + 0.5 * height)
    signs: set[float] = set()
    for x in np.linspace(box[0], box[1], 9):
        for y in np.linspace(box[2], box[3], 9):
            scale = max(metric.coefficient_scale(float(x), float(y)), 1e-30)
            value = metric.discriminant(float(x), float(y))
            if abs(value) <= 0.05 * scale * scale:
                return None
            signs.add(math.copysign(1.0, value))
    # A sign flip means the degenerate curve threads between grid samples.
    if len(signs) > 1:
        return None
    return box


def _trim_to_length(points: np.ndarray, target: float) -> np.ndarray:
    steps = np.hypot(np.diff(points[:, 0]), np.diff(points[:, 1]))
    cumulative = np.concatenate([[0.0], np.cumsum(steps)])
    if cumulative[-1] <= target:
        return points
    k = int(np.searchsorted(cumulative, target))
    k = max(k, 1)
    excess = (cumulative[k] - target) / max(cumulative[k] - cumulative[k - 1], 1e-300)
    last = points[k] + (points[k - 1] - points[k]) * excess
    return np.vstack([points[:k], last])


def check_oracle(
    windows: int = 30,
    seed: int = 0,
    tol: float = 1e-6,
    size_fraction: float = 0.2,
    spacing: float = 5e-4,
    specs: Sequence[str] = ALL_SPECS,
    jobs: int | None = None,
) -> SuiteReport:
    """The projective and natural integrators trace the same curves.

    On windows that avoid the degenerate curve, both parametrizations of the
    same geodesic are run from one jet and compared as point sets over their
    common arc length (two-sided polyline gap).
    """
    metrics = _metrics(specs)
    rng = np.random.default_rng(seed)

    prepared: list[tuple[MetricField, BBox, float]] = []
    attempts = 0
    while len(prepared) < windows and attempts < 400 * windows:
        attempts += 1
        metric = metrics[len(prepared) % len(metrics)]
        box = _window_avoiding_S0(metric, rng, size_fraction)
        if box is None:
            continue
        prepared.append((metric, box, rng.uniform(0.0, math.pi)))
    if len(prepared) < windows:
        return SuiteReport(
            suite="oracle",
            passed=False,
            trials=len(prepared),
            failures=[{"error": "could not place enough windows away from the degenerate curve"}],
        )

    def compare(item: tuple) -> dict[str, object]:
        metric, box, theta = item
        x0, y0 = 0.5 * (box[0] + box[1]), 0.5 * (box[2] + box[3])
        dx, dy = math.cos(theta), math.sin(theta)
        jet = ProjectiveJet(x0, y0, ProjectiveDirection.from_vector(dx, dy))
        span = 2.0 * math.hypot(box[1] - box[0], box[3] - box[2])
        projective = integrate_geodesic(metric, jet, span, _TIGHT, bbox=box)
        # The projective field fixes its own traversal sense; launch the
        # natural leg the same way so the half-curves overlap.
        vx, vy = float(projective.vx[0]), float(projective.vy[0])
        speed = math.hypot(vx, vy)
        if speed > 0.0:
            dx, dy = vx / speed, vy / speed
        natural = integrate_natural(metric, (x0, y0), (dx, dy), 4.0 * span, _TIGHT, bbox=box)
        pts_p = dense_points(projective, spacing)
        pts_n = dense_points(natural, spacing)
        len_p = float(np.hypot(np.diff(pts_p[:, 0]), np.diff(pts_p[:, 1])).sum())
        len_n = float(np.hypot(np.diff(pts_n[:, 0]), np.diff(pts_n[:, 1])).sum())
        common = min(len_p, len_n)
        pts_p = _trim_to_length(pts_p, common)
        pts_n = _trim_to_length(pts_n, common)
        gap = max(directed_polyline_gap(pts_p, pts_n), directed_polyline_gap(pts_n, pts_p))
        return {
            "metric": metric.label or metric.to_text(),
            "window": list(box),
            "direction_angle": theta,
            "common_arc": common,
            "hausdorff": gap,
            "terminations": [projective.termination, natural.termination],
        }

    records = _run_trials([lambda item=item: compare(item) for item in prepared], jobs)
    failures = [r for r in records if r["hausdorff"] > tol or r["common_arc"] < 1e-3]
    worst = max(r["hausdorff"] for r in records)
    return SuiteReport(
        suite="oracle",
        passed=not failures,
        trials=len(records),
        failures=failures,
        stats={"worst_hausdorff": worst, "spacing": spacing},
    )


# --- flow invariants ----------------------------------------------------------


def check_invariance(
    trials: int = 100,
    seed: int = 0,
    f_tol: float = 1e-7,
    f_start: float = 1e-10,
    drift_tol: float = 1e-9,
    span: float = 1.0,
    specs: Sequence[str] = ALL_SPECS,
    jobs: int | None = None,
) -> SuiteReport:
    """Three flow invariants, each over ``trials`` randomized runs.

    * the isotropic surface is invariant under the lifted field: the
      unit-normalized form stays below ``f_tol`` along trajectories started
      with it below ``f_start``;
    * over a degenerate point with a non-admissible direction the position is
      frozen: (x, y) drift stays below ``drift_tol``;
    * causal type is constant away from the degenerate curve: no ``mixed``
      label on windows avoiding it.
    """
    metrics = _metrics(specs)
    child_seeds = np.random.default_rng(seed).integers(0, 2**63 - 1, size=3 * trials)

    def isotropic_trial(index: int) -> dict[str, object]:
        rng = np.random.default_rng(child_seeds[index])
        metric = metrics[index % len(metrics)]
        xmin, xmax, ymin, ymax = _inset_box(metric.bbox)
        for _ in range(200):
            x = rng.uniform(xmin, xmax)
            y = rng.uniform(ymin, ymax)
            scale = max(metric.coefficient_scale(x, y), 1e-30)
            if metric.discriminant(x, y) >= -2e-2 * scale * scale:
                continue
            try:
                branches = null_directions(metric, x, y)
            except FamilyError:
                continue
            jet = ProjectiveJet(x, y, branches[index % 2])
            value = _jet_form(metric, jet) / (1.0 + jet.direction.value**2)
            if abs(value) > f_start:
                continue
            curve = integrate_geodesic(metric, jet, span, _TIGHT)
            # Unit-normalized form: form(v)/|v|^2, identical in both charts.
            unit_form = curve.F / (1.0 + np.asarray(curve.dirvalue) ** 2)
            peak = float(np.max(np.abs(unit_form)))
            return {
                "invariant": "isotropic-surface",
                "metric": metric.label or metric.to_text(),
                "start": [x, y],
                "start_F": value,
                "peak_F": peak,
                "ok": peak < f_tol,
            }
        return {"invariant": "isotropic-surface", "ok": False, "error": "no Lorentzian seed found"}

    def frozen_trial(index: int) -> dict[str, object]:
        rng = np.random.default_rng(child_seeds[trials + index])
        metric = metrics[index % len(metrics)]
        xmin, xmax, ymin, ymax = _inset_box(metric.bbox)
        for _ in range(200):
            guess = (rng.uniform(xmin, xmax), rng.uniform(ymin, ymax))
            try:
                q = find_S0_point(metric, guess, tol=1e-13)
            except DegeneracyError:
                continue
            if not (xmin <= q[0] <= xmax and ymin <= q[1] <= ymax):
                continue
            mu = metric.cubic_values(q[0], q[1])
            cubic_scale = max(max(abs(m) for m in mu), 1e-30)
            slope = rng.uniform(-2.0, 2.0)
            m_value = ((mu[3] * slope + mu[2]) * slope + mu[1]) * slope + mu[0]
            if abs(m_value) <= 1e-2 * cubic_scale:
                continue
            jet = ProjectiveJet(q[0], q[1], ProjectiveDirection.from_vector(1.0, slope))
            curve = integrate_geodesic(metric, jet, span, _TIGHT)
            drift = float(np.max(np.hypot(curve.x - q[0], curve.y - q[1])))
            return {
                "invariant": "frozen-position",
                "metric": metric.label or metric.to_text(),
                "point": list(q),
                "slope": slope,
                "drift": drift,
                "ok": drift < drift_tol,
            }
        return {"invariant": "frozen-position", "ok": False, "error": "no degenerate start found"}

    def constancy_trial(index: int) -> dict[str, object]:
        rng = np.random.default_rng(child_seeds[2 * trials + index])
        metric = metrics[index % len(metrics)]
        for _ in range(200):
            box = _window_avoiding_S0(metric, rng, 0.25)
            if box is None:
                continue
            x0, y0 = 0.5 * (box[0] + box[1]), 0.5 * (box[2] + box[3])
            theta = rng.uniform(0.0, math.pi)
            direction = ProjectiveDirection.from_vector(math.cos(theta), math.sin(theta))
            jet = ProjectiveJet(x0, y0, direction)
            scale = max(metric.coefficient_scale(x0, y0), 1e-30)
            if abs(_jet_form(metric, jet)) <= 1e-4 * scale:
                continue
            curve = integrate_geodesic(metric, jet, span, DEFAULT_OPTIONS, bbox=box)
            return {
                "invariant": "causal-constancy",
                "metric": metric.label or metric.to_text(),
                "window": list(box),
                "causal_type": curve.causal_type,
                "ok": curve.causal_type != "mixed",
            }
        return {"invariant": "causal-constancy", "ok": False, "error": "no window found"}

    tasks: list[Callable[[], dict[str, object]]] = []
    for index in range(trials):
        tasks.append(lambda index=index: isotropic_trial(index))
    for index in range(trials):
        tasks.append(lambda index=index: frozen_trial(index))
    for index in range(trials):
        tasks.append(lambda index=index: constancy_trial(index))
    records = _run_trials(tasks, jobs)

    failures = [r for r in records if not r.get("ok")]
    peaks = [r["peak_F"] for r in records if "peak_F" in r]
    drifts = [r["drift"] for r in records if "drift" in r]
    return SuiteReport(
        suite="invariance",
        passed=not failures,
        trials=len(records),
        failures=failures,
        stats={
            "trials_per_invariant": trials,
            "worst_peak_F": max(peaks) if peaks else None,
            "worst_drift": max(drifts) if drifts else None,
        },
    )


def _jet_form(metric: MetricField, jet: ProjectiveJet) -> float:
    """Form value of a jet, evaluated in the chart where the slope is finite."""
    if jet.direction.chart == "p":
        return metric.form(jet.x, jet.y, jet.direction.value)
    return metric.swapped.form(jet.y, jet.x, jet.direction.value)


# --- registry -----------------------------------------------------------------

SUITES: dict[str, Callable[..., SuiteReport]] = {
    "resonance": check_resonance,
    "divergence": check_divergence,
    "oracle": check_oracle,
    "invariance": check_invariance,
}


def run_suite(name: str, **kwargs: object) -> SuiteReport:
    """Run one suite by name; raises KeyError for unknown names."""
    try:
        suite = SUITES[name]
    except KeyError:
        known = ", ".join(sorted(SUITES))
        raise KeyError(f"unknown suite {name!r} (known: {known})") from None
    return suite(**kwargs)


def run_all(**kwargs: object) -> list[SuiteReport]:
    """Run every suite, forwarding only the keyword arguments each accepts."""
    reports = []
    for name in sorted(SUITES):
        suite = SUITES[name]
        parameters = inspect.signature(suite).parameters
        accepted = {key: value for key, value in kwargs.items() if key in parameters}
        reports.append(suite(**accepted))
    return reports
