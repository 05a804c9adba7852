"""HTTP facade over the engine: catalog, classification, traces, portraits.

The app is a thin JSON layer — every endpoint resolves a metric from its
text form, calls one engine routine, and returns that routine's own
serialization.  The command-line client mounts the app in-process by
default, so the same handlers back both local and remote use.  File-path
metric sources (``@file``) are deliberately rejected here; clients resolve
them before sending.

Error contract: malformed requests (unparseable metric, unknown catalog
name or suite) answer 400; requests that are well-formed but numerically
infeasible (no degenerate curve in the box, family construction failure)
answer 422 with the engine's message.
"""

from __future__ import annotations

import inspect
from dataclasses import replace
from typing import Any, Literal

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from . import __version__
from .catalog import CATALOG, build_catalog_metric, sphere_embedding
from .checks import SUITES, run_all, run_suite
from .degeneracy import (
    DegeneracyError,
    ProjectiveDirection,
    classify,
    find_S0_point,
    refine_to_curve,
    trace_degenerate_curve,
)
from .expr import DomainError, ParseError
from .families import (
    FamilyError,
    family_case_c_isotropic,
    family_case_d,
    geodesic_case_c_nonisotropic,
)
from .geoflow import (
    DEFAULT_OPTIONS,
    IntegratorOptions,
    ProjectiveJet,
    integrate_geodesic,
    integrate_isotropic,
    integrate_natural,
)
from .metric import MetricField, metric_from_json, metric_to_dict, parse_metric
from .portrait import (
    Portrait,
    PortraitError,
    locate_family_point,
    portrait_family,
    portrait_grid,
)

__all__ = ["create_app", "app"]


# --- payload models ---------------------------------------------------------


class OptionsModel(BaseModel):
    """Optional overrides of the integrator defaults."""

    rel_tol: float | None = Field(None, gt=0.0)
    abs_tol: float | None = Field(None, gt=0.0)
    max_step: float | None = Field(None, gt=0.0)
    singular_stop_radius: float | None = Field(None, ge=0.0)
    max_steps: int | None = Field(None, gt=0)

    def build(self) -> IntegratorOptions:
        overrides = {k: v for k, v in self.model_dump().items() if v is not None}
        return replace(DEFAULT_OPTIONS, **overrides)


class ClassifyRequest(BaseModel):
    metric: str
    point: tuple[float, float] | None = None
    scan: bool = False
    tol: float = Field(1e-9, gt=0.0)
    scan_step: float | None = Field(None, gt=0.0)


class TraceRequest(BaseModel):
    metric: str
    start: tuple[float, float]
    slope: float | None = None
    vertical: bool = False
    span: float = Field(4.0, gt=0.0)
    orientation: Literal[1, -1] = 1
    mode: Literal["geodesic", "isotropic", "natural"] = "geodesic"
    bbox: tuple[float, float, float, float] | None = None
    options: OptionsModel | None = None


class FamilyRequest(BaseModel):
    metric: str
    point: tuple[float, float] | None = None
    count: int = Field(12, gt=0)
    tau0: float = Field(1e-3, gt=0.0)
    span: float = Field(4.0, gt=0.0)
    include_curves: bool = False
    pairs: bool = True


class PortraitRequest(BaseModel):
    metric: str
    family: bool = False
    grid: bool | None = None
    point: tuple[float, float] | None = None
    count: int | None = Field(None, gt=0)
    seed: int = 0
    span: float = Field(4.0, gt=0.0)
    tau0: float = Field(1e-3, gt=0.0)
    bbox: tuple[float, float, float, float] | None = None
    size: int = Field(640, ge=64)
    jobs: int | None = Field(None, gt=0)


class CheckRequest(BaseModel):
    suite: str = "all"
    jobs: int | None = Field(None, gt=0)
    params: dict[str, Any] = Field(default_factory=dict)


# --- engine plumbing ----------------------------------------------------------


def _resolve(source: str) -> MetricField:
    source = source.strip()
    if source.startswith("@"):
        raise HTTPException(400, "file metric sources must be resolved by the client")
    try:
        if source.startswith("catalog:"):
            return build_catalog_metric(source[len("catalog:"):])
        if source.lstrip().startswith("{"):
            return metric_from_json(source)
        return parse_metric(source)
    except (ParseError, DomainError, KeyError, ValueError) as exc:
        raise HTTPException(400, f"bad metric source: {exc}") from exc


def _catalog_entry(name: str, value: float | None) -> dict[str, object]:
    entry = CATALOG[name]
    try:
        metric = entry.instantiate(value)
    except ValueError as exc:
        raise HTTPException(400, str(exc)) from exc
    detail: dict[str, object] = {
        "name": entry.name,
        "summary": entry.summary,
        "parameter": entry.parameter,
        "default": entry.default,
        "metric": metric_to_dict(metric),
    }
    if name == "mink-sphere":
        emb = sphere_embedding()
        detail["embedding"] = {
            "components": [str(c) for c in emb.components],
            "signature": emb.signature,
        }
    return detail


def _scan_segments(
    metric: MetricField, tol: float, step: float | None
) -> tuple[list[dict[str, object]], list[dict[str, object]], list[str]]:
    """Classify along the degenerate curve and compress equal-case runs.

    Boundaries between differing runs are sharpened by bisection; a third
    case appearing inside the bracket (the typical C2 point between C1 and
    C3 arcs) is reported as the transition's own case.
    """
    polylines = trace_degenerate_curve(metric)
    if not polylines:
        raise DegeneracyError("no degenerate curve inside the working box")
    segments: list[dict[str, object]] = []
    transitions: list[dict[str, object]] = []
    warnings: list[str] = []
    for component, line in enumerate(polylines):
        lengths = np.hypot(np.diff(line[:, 0]), np.diff(line[:, 1]))
        arc = np.concatenate([[0.0], np.cumsum(lengths)])
        total = float(arc[-1])
        if total == 0.0:
            continue

        def point_at(s: float) -> tuple[float, float]:
            k = int(np.searchsorted(arc, s, side="right")) - 1
            k = min(max(k, 0), len(line) - 2)
            w = (s - arc[k]) / max(arc[k + 1] - arc[k], 1e-300)
            guess = (1.0 - w) * line[k] + w * line[k + 1]
            return refine_to_curve(metric, guess)

        def case_at(s: float) -> tuple[tuple[float, float], str] | None:
            try:
                point = point_at(s)
                report = classify(metric, point, tol)
            except DegeneracyError as exc:
                warnings.append(f"component {component}, arc {s:.6g}: {exc}")
                return None
            for message in report.warnings:
                if message not in warnings:
                    warnings.append(message)
            return point, report.case

        spacing = step if step is not None else max(total / 96.0, 1e-6)
        targets = np.arange(0.0, total + 0.5 * spacing, spacing)
        targets[-1] = min(targets[-1], total)
        runs: list[dict[str, object]] = []
        for s in targets:
            looked = case_at(float(s))
            if looked is None:
                continue
            point, case = looked
            if runs and runs[-1]["case"] == case:
                runs[-1]["arc_to"] = float(s)
                runs[-1]["end"] = [point[0], point[1]]
            else:
                runs.append(
                    {
                        "component": component,
                        "case": case,
                        "arc_from": float(s),
                        "arc_to": float(s),
                        "start": [point[0], point[1]],
                        "end": [point[0], point[1]],
                    }
                )
        for left, right in zip(runs, runs[1:]):
            lo, hi = float(left["arc_to"]), float(right["arc_from"])
            boundary_case: str | None = None
            for _ in range(48):
                if hi - lo <= 1e-12 * max(total, 1.0):
                    break
                looked = case_at(0.5 * (lo + hi))
                if looked is None:
                    break
                _, case = looked
                if case == left["case"]:
                    lo = 0.5 * (lo + hi)
                elif case == right["case"]:
                    hi = 0.5 * (lo + hi)
                else:
                    boundary_case = case
                    break
            s_mid = 0.5 * (lo + hi)
            try:
                px, py = point_at(s_mid)
            except DegeneracyError:
                continue
            transitions.append(
                {
                    "component": component,
                    "arc": s_mid,
                    "point": [px, py],
                    "from_case": left["case"],
                    "to_case": right["case"],
                    "boundary_case": boundary_case,
                }
            )
        segments.extend(runs)
    if not segments:
        raise DegeneracyError("classification failed everywhere along the degenerate curve")
    return segments, transitions, warnings


def _family_payload(request: FamilyRequest) -> dict[str, object]:
    metric = _resolve(request.metric)
    if request.point is not None:
        q = find_S0_point(metric, request.point)
    else:
        q = locate_family_point(metric, metric.bbox)
    report = classify(metric, q)
    payload: dict[str, object] = {"report": report.to_dict()}
    files: dict[str, str] = {}
    if report.case.startswith("D"):
        spec = family_case_d(
            metric, q, counts=request.count, tau0=request.tau0, span=request.span
        )
    else:
        spec = family_case_c_isotropic(
            metric, q, request.count, tau0=request.tau0, span=request.span
        )
        if request.pairs:
            pairs = []
            for root in report.roots:
                if root.isotropic or root.multiplicity != 1:
                    continue
                try:
                    pair = geodesic_case_c_nonisotropic(metric, q, root, span=request.span)
                except FamilyError as exc:
                    pairs.append({"direction": root.to_dict(), "error": str(exc)})
                    continue
                pairs.append(pair.to_dict(include_curves=False))
            payload["pairs"] = pairs
    payload["family"] = spec.to_dict(include_curves=request.include_curves)
    payload["problems"] = spec.check_invariants()
    for i, member in enumerate(spec.members):
        files[f"members/member_{i:03d}.csv"] = member.curve.to_csv()
    payload["files"] = files
    return payload


# --- the app ------------------------------------------------------------------


def create_app() -> FastAPI:
    app = FastAPI(title="pseudogeo", version=__version__)

    @app.exception_handler(DegeneracyError)
    @app.exception_handler(FamilyError)
    @app.exception_handler(PortraitError)
    def _engine_failure(_, exc: ValueError):  # pragma: no cover - thin glue
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok", "version": __version__}

    @app.get("/catalog")
    def catalog_listing() -> dict[str, object]:
        return {"entries": [_catalog_entry(name, None) for name in CATALOG]}

    @app.get("/catalog/{name}")
    def catalog_detail(
        name: str, value: float | None = Query(None)
    ) -> dict[str, object]:
        if name not in CATALOG:
            raise HTTPException(400, f"unknown catalog metric {name!r}")
        return _catalog_entry(name, value)

    @app.post("/classify")
    def classify_endpoint(request: ClassifyRequest) -> dict[str, object]:
        metric = _resolve(request.metric)
        if request.scan:
            segments, transitions, warnings = _scan_segments(
                metric, request.tol, request.scan_step
            )
            return {
                "segments": segments,
                "transitions": transitions,
                "warnings": warnings,
            }
        if request.point is None:
            raise HTTPException(400, "classify needs a point or scan=true")
        q = find_S0_point(metric, request.point)
        report = classify(metric, q, request.tol)
        return {"report": report.to_dict()}

    @app.post("/trace")
    def trace_endpoint(request: TraceRequest) -> dict[str, object]:
        metric = _resolve(request.metric)
        opts = request.options.build() if request.options else None
        x0, y0 = request.start
        if request.vertical:
            direction = ProjectiveDirection.from_vector(0.0, 1.0)
        elif request.slope is not None:
            direction = ProjectiveDirection.from_vector(1.0, request.slope)
        else:
            raise HTTPException(400, "trace needs a slope or vertical=true")
        if request.mode == "natural":
            if request.vertical:
                velocity = (0.0, 1.0)
            else:
                norm = float(np.hypot(1.0, request.slope))
                velocity = (1.0 / norm, request.slope / norm)
            curve = integrate_natural(
                metric, (x0, y0), velocity, request.span, opts, bbox=request.bbox
            )
            return {"curve": curve.to_dict(), "csv": None}
        jet = ProjectiveJet(x0, y0, direction)
        integrator = integrate_isotropic if request.mode == "isotropic" else integrate_geodesic
        curve = integrator(
            metric,
            jet,
            request.span,
            opts,
            orientation=float(request.orientation),
            bbox=request.bbox,
        )
        return {"curve": curve.to_dict(), "csv": curve.to_csv()}

    @app.post("/family")
    def family_endpoint(request: FamilyRequest) -> dict[str, object]:
        return _family_payload(request)

    @app.post("/portrait")
    def portrait_endpoint(request: PortraitRequest) -> dict[str, object]:
        metric = _resolve(request.metric)
        draw_grid = request.grid if request.grid is not None else not request.family
        portraits = []
        if draw_grid:
            portraits.append(
                portrait_grid(
                    metric,
                    count=request.count or 24,
                    seed=request.seed,
                    bbox=request.bbox,
                    jobs=request.jobs,
                )
            )
        if request.family:
            portraits.append(
                portrait_family(
                    metric,
                    request.point,
                    count=request.count or 12,
                    tau0=request.tau0,
                    span=request.span,
                    bbox=request.bbox,
                    jobs=request.jobs,
                )
            )
        if not portraits:
            raise HTTPException(400, "portrait needs grid mode, family mode, or both")
        drawing = portraits[0]
        for extra in portraits[1:]:
            drawing = _merge_portraits(drawing, extra)
        return drawing.bundle(size=request.size)

    @app.post("/check")
    def check_endpoint(request: CheckRequest) -> dict[str, object]:
        kwargs = dict(request.params)
        if request.jobs is not None:
            kwargs.setdefault("jobs", request.jobs)
        try:
            if request.suite == "all":
                reports = [r.to_dict() for r in run_all(**kwargs)]
            else:
                if request.suite not in SUITES:
                    known = ", ".join(sorted(SUITES))
                    raise HTTPException(
                        400, f"unknown suite {request.suite!r} (known: {known})"
                    )
                accepted = inspect.signature(SUITES[request.suite]).parameters
                # seed/jobs are generic knobs; unknown names beyond those are
                # real mistakes and fall through to the strict call.
                for soft in ("seed", "jobs"):
                    if soft in kwargs and soft not in accepted:
                        kwargs.pop(soft)
                reports = [run_suite(request.suite, **kwargs).to_dict()]
        except TypeError as exc:
            raise HTTPException(400, f"bad suite parameters: {exc}") from exc
        return {"passed": all(r["passed"] for r in reports), "reports": reports}

    return app


def _merge_portraits(base: Portrait, extra: Portrait) -> Portrait:
    """Overlay two portraits of the same metric window."""
    if base.bbox != extra.bbox:
        raise HTTPException(422, "portrait modes produced different windows")
    metadata = dict(base.metadata)
    metadata.update(extra.metadata)
    return Portrait(
        metric_text=base.metric_text,
        bbox=base.bbox,
        curves=base.curves + extra.curves,
        curve_info=base.curve_info + extra.curve_info,
        marks=base.marks + extra.marks,
        degenerate_polylines=base.degenerate_polylines or extra.degenerate_polylines,
        metadata=metadata,
    )


app = create_app()
