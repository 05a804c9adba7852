"""Phase portraits: SVG drawings backed by per-curve CSV bundles.

A portrait collects geodesic traces over a window and draws them with fixed
line conventions — timelike solid, spacelike dashed, isotropic bold solid,
and the degenerate curve dotted — so portraits of different metrics stay
visually comparable.  Construction is deterministic: grid portraits derive
every seed from an explicit RNG seed, family portraits from the family
parameters, and the saved bundle (one SVG plus one CSV per curve and an
index) regenerates bit-for-bit.
"""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .degeneracy import (
    CHART_P,
    CHART_PBAR,
    DegeneracyError,
    ProjectiveDirection,
    classify,
    delta,
    find_S0_point,
    isotropic_direction,
    refine_to_curve,
    trace_degenerate_curve,
)
from .families import (
    FamilyError,
    family_case_c_isotropic,
    family_case_d,
    geodesic_case_c_nonisotropic,
    null_directions,
)
from .geoflow import (
    DEFAULT_OPTIONS,
    GeodesicCurve,
    IntegratorOptions,
    ProjectiveJet,
    integrate_geodesic,
    integrate_isotropic,
)
from .metric import BBox, MetricField

__all__ = [
    "PortraitError",
    "StrokeStyle",
    "PortraitStyle",
    "DEFAULT_STYLE",
    "Portrait",
    "write_bundle",
    "locate_family_point",
    "portrait_grid",
    "portrait_family",
]


class PortraitError(ValueError):
    """Portrait construction failed."""


# --- line conventions -------------------------------------------------------


@dataclass(frozen=True)
class StrokeStyle:
    """SVG stroke parameters for one kind of line."""

    width: float
    dash: str | None = None  # stroke-dasharray; None draws solid
    color: str = "#000000"

    def key(self) -> tuple[float, str | None, str]:
        return (self.width, self.dash, self.color)

    def apply(self, element: ET.Element) -> None:
        element.set("stroke", self.color)
        element.set("stroke-width", f"{self.width:g}")
        if self.dash is not None:
            element.set("stroke-dasharray", self.dash)


@dataclass(frozen=True)
class PortraitStyle:
    """Stroke rules per causal type plus the degenerate-curve style.

    The three causal types must map to pairwise distinct strokes; the
    defaults follow the usual figure conventions (solid / dashed / bold
    solid, with a dotted degenerate curve).
    """

    timelike: StrokeStyle = StrokeStyle(1.1)
    spacelike: StrokeStyle = StrokeStyle(1.1, dash="6 4")
    isotropic: StrokeStyle = StrokeStyle(2.6)
    degenerate: StrokeStyle = StrokeStyle(1.1, dash="1.5 3.5")
    mark_radius: float = 3.0
    # rendering-only decimation cap; saved CSVs keep every sample
    max_points: int = 1200

    def __post_init__(self) -> None:
        keys = {s.key() for s in (self.timelike, self.spacelike, self.isotropic)}
        if len(keys) != 3:
            raise ValueError("the three causal types must use pairwise distinct styles")
        if self.max_points < 2:
            raise ValueError("max_points must allow at least a segment")

    def for_type(self, sample_type: str) -> StrokeStyle:
        if sample_type == "timelike":
            return self.timelike
        if sample_type == "spacelike":
            return self.spacelike
        if sample_type == "isotropic":
            return self.isotropic
        raise ValueError(f"unknown sample type {sample_type!r}")


DEFAULT_STYLE = PortraitStyle()


# --- the portrait object ----------------------------------------------------


@dataclass
class Portrait:
    """Curves, marks, and the degenerate locus of one drawing."""

    metric_text: str
    bbox: BBox
    curves: list[GeodesicCurve]
    curve_info: list[dict[str, object]]
    marks: list[tuple[float, float]] = field(default_factory=list)
    degenerate_polylines: list[np.ndarray] = field(default_factory=list)
    metadata: dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.curves) != len(self.curve_info):
            raise ValueError("curve_info must align with curves")

    def to_svg(
        self,
        style: PortraitStyle = DEFAULT_STYLE,
        size: int = 640,
        margin: float = 32.0,
    ) -> str:
        return _render_svg(self, style, size, margin)

    def bundle(
        self,
        style: PortraitStyle = DEFAULT_STYLE,
        size: int = 640,
        svg_name: str = "portrait.svg",
    ) -> dict[str, object]:
        """The drawing and its per-curve CSVs as an in-memory artifact set."""
        entries: list[dict[str, object]] = []
        files: dict[str, str] = {}
        for index, (curve, info) in enumerate(zip(self.curves, self.curve_info)):
            name = f"curve_{index:03d}.csv"
            files[name] = curve.to_csv()
            entry = dict(info)
            entry.update(
                file=name,
                samples=len(curve),
                causal_type=curve.causal_type,
                termination=curve.termination,
            )
            entries.append(entry)
        manifest: dict[str, object] = {
            "svg": svg_name,
            "metric": self.metric_text,
            "bbox": list(self.bbox),
            "marks": [list(mark) for mark in self.marks],
            "metadata": self.metadata,
            "curves": entries,
        }
        return {
            "svg": self.to_svg(style=style, size=size),
            "manifest": manifest,
            "files": files,
        }

    def save(
        self,
        out: str | Path,
        style: PortraitStyle = DEFAULT_STYLE,
        size: int = 640,
    ) -> dict[str, object]:
        """Write the SVG, one CSV per curve, and an index; return the index."""
        svg_path = Path(out)
        if svg_path.suffix.lower() != ".svg":
            svg_path = svg_path.with_name(svg_path.name + ".svg")
        artifacts = self.bundle(style=style, size=size, svg_name=svg_path.name)
        return write_bundle(artifacts, svg_path)


def write_bundle(artifacts: dict[str, object], out: str | Path) -> dict[str, object]:
    """Write a portrait artifact set (SVG, CSVs, index) next to ``out``."""
    svg_path = Path(out)
    if svg_path.suffix.lower() != ".svg":
        svg_path = svg_path.with_name(svg_path.name + ".svg")
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    svg_path.write_text(artifacts["svg"])
    manifest = dict(artifacts["manifest"])
    manifest["svg"] = svg_path.name
    bundle_dir = svg_path.with_name(svg_path.stem + "_curves")
    bundle_dir.mkdir(exist_ok=True)
    for name, text in artifacts["files"].items():
        (bundle_dir / name).write_text(text)
    (bundle_dir / "index.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


# --- rendering --------------------------------------------------------------


def _decimate(n: int, cap: int) -> np.ndarray:
    if n <= cap:
        return np.arange(n)
    return np.unique(np.round(np.linspace(0, n - 1, cap)).astype(int))


def _type_runs(types: Sequence[str]) -> Iterator[tuple[str, int, int]]:
    """Maximal runs of constant sample type, padded one sample to stay joined."""
    n = len(types)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and types[j + 1] == types[i]:
            j += 1
        yield types[i], max(0, i - 1), min(n, j + 2)
        i = j + 1


def _render_svg(portrait: Portrait, style: PortraitStyle, size: int, margin: float) -> str:
    xmin, xmax, ymin, ymax = portrait.bbox
    inner = size - 2.0 * margin
    scale = min(inner / (xmax - xmin), inner / (ymax - ymin))
    x0 = 0.5 * (size - scale * (xmax - xmin))
    y0 = 0.5 * (size - scale * (ymax - ymin))

    def to_px(x: float, y: float) -> tuple[float, float]:
        return (x0 + (x - xmin) * scale, size - y0 - (y - ymin) * scale)

    def points_attr(xs: np.ndarray, ys: np.ndarray) -> str:
        pieces = []
        for x, y in zip(xs, ys):
            px, py = to_px(float(x), float(y))
            pieces.append(f"{px:.2f},{py:.2f}")
        return " ".join(pieces)

    root = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=str(size),
        height=str(size),
        viewBox=f"0 0 {size} {size}",
    )
    desc = ET.SubElement(root, "desc")
    desc.text = portrait.metric_text
    ET.SubElement(root, "rect", x="0", y="0", width=str(size), height=str(size), fill="#ffffff")

    defs = ET.SubElement(root, "defs")
    clip = ET.SubElement(defs, "clipPath", id="frame")
    fx, fy = to_px(xmin, ymax)
    fw, fh = scale * (xmax - xmin), scale * (ymax - ymin)
    frame_attrs = {
        "x": f"{fx:.2f}",
        "y": f"{fy:.2f}",
        "width": f"{fw:.2f}",
        "height": f"{fh:.2f}",
    }
    ET.SubElement(clip, "rect", **frame_attrs)

    content = ET.SubElement(root, "g", fill="none")
    content.set("clip-path", "url(#frame)")
    content.set("stroke-linecap", "round")
    content.set("stroke-linejoin", "round")

    for polyline in portrait.degenerate_polylines:
        if len(polyline) < 2:
            continue
        keep = _decimate(len(polyline), style.max_points)
        element = ET.SubElement(
            content, "polyline", points=points_attr(polyline[keep, 0], polyline[keep, 1])
        )
        style.degenerate.apply(element)

    for curve in portrait.curves:
        if len(curve) < 2:
            continue
        keep = _decimate(len(curve), style.max_points)
        xs, ys = curve.x[keep], curve.y[keep]
        types = [curve.sample_type[k] for k in keep]
        for sample_type, lo, hi in _type_runs(types):
            if hi - lo < 2:
                continue
            element = ET.SubElement(
                content, "polyline", points=points_attr(xs[lo:hi], ys[lo:hi])
            )
            style.for_type(sample_type).apply(element)

    for mark in portrait.marks:
        px, py = to_px(*mark)
        ET.SubElement(
            root,
            "circle",
            cx=f"{px:.2f}",
            cy=f"{py:.2f}",
            r=f"{style.mark_radius:g}",
            fill="#000000",
        )

    border = ET.SubElement(root, "rect", **frame_attrs)
    border.set("fill", "none")
    border.set("stroke", "#000000")
    border.set("stroke-width", "0.8")

    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


# --- builders ---------------------------------------------------------------


def _run_tasks(tasks: Sequence[Callable[[], GeodesicCurve]], jobs: int | None) -> list[GeodesicCurve]:
    """Run integration tasks, preserving input order."""
    if jobs is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(task) for task in tasks]
            return [future.result() for future in futures]
    return [task() for task in tasks]


def portrait_grid(
    metric: MetricField,
    *,
    count: int = 24,
    span: float = 6.0,
    seed: int = 0,
    bbox: Sequence[float] | None = None,
    options: IntegratorOptions | None = None,
    jobs: int | None = None,
) -> Portrait:
    """Geodesics through ``count`` random seeds, each drawn in both directions."""
    if count < 1:
        raise PortraitError("a grid portrait needs at least one seed")
    box: BBox = metric.bbox if bbox is None else tuple(float(v) for v in bbox)  # type: ignore[assignment]
    xmin, xmax, ymin, ymax = box
    opts = options if options is not None else DEFAULT_OPTIONS
    rng = np.random.default_rng(seed)

    inset_x = 0.02 * (xmax - xmin)
    inset_y = 0.02 * (ymax - ymin)
    seeds: list[ProjectiveJet] = []
    attempts = 0
    while len(seeds) < count and attempts < 100 * count:
        attempts += 1
        x = rng.uniform(xmin + inset_x, xmax - inset_x)
        y = rng.uniform(ymin + inset_y, ymax - inset_y)
        theta = rng.uniform(0.0, math.pi)
        scale = max(metric.coefficient_scale(x, y), 1e-30)
        # keep portrait seeds in the open regions; runs near the degenerate
        # curve belong to family portraits
        if abs(metric.discriminant(x, y)) <= 1e-6 * scale * scale:
            continue
        seeds.append(ProjectiveJet(x, y, ProjectiveDirection.from_vector(math.cos(theta), math.sin(theta))))
    if len(seeds) < count:
        raise PortraitError("could not place seeds away from the degenerate curve")

    tasks: list[Callable[[], GeodesicCurve]] = []
    info: list[dict[str, object]] = []
    for index, jet in enumerate(seeds):
        for orientation in (1.0, -1.0):
            tasks.append(
                lambda jet=jet, orientation=orientation: integrate_geodesic(
                    metric, jet, span, opts, orientation=orientation, bbox=box
                )
            )
            info.append(
                {
                    "role": "grid",
                    "seed_index": index,
                    "seed": [jet.x, jet.y],
                    "direction": {"chart": jet.direction.chart, "value": jet.direction.value},
                    "orientation": orientation,
                }
            )
    curves = _run_tasks(tasks, jobs)

    return Portrait(
        metric_text=metric.to_text(),
        bbox=box,
        curves=curves,
        curve_info=info,
        marks=[],
        degenerate_polylines=trace_degenerate_curve(metric, bbox=box),
        metadata={"mode": "grid", "count": count, "span": span, "seed": seed},
    )


def _signed_mismatch(metric: MetricField, point: Sequence[float]) -> float:
    """Cosine between the isotropic direction and the S0 normal: 0 at a tangency."""
    try:
        _, (gx, gy) = delta(metric, point)
        vx, vy = isotropic_direction(metric, point).vector()
    except DegeneracyError:
        return math.nan
    return (gx * vx + gy * vy) / (math.hypot(gx, gy) * math.hypot(vx, vy))


def locate_family_point(metric: MetricField, box: BBox) -> tuple[float, float]:
    """Choose a degenerate point: an isolated tangency if present, else the
    curve point nearest the window center."""
    components = trace_degenerate_curve(metric, bbox=box)
    if not components:
        raise PortraitError("no degenerate curve inside the window")

    cx, cy = 0.5 * (box[0] + box[1]), 0.5 * (box[2] + box[3])
    best: tuple[float, np.ndarray, tuple | None] | None = None
    for component in components:
        arr = np.asarray([_signed_mismatch(metric, vertex) for vertex in component])
        finite = np.isfinite(arr)
        if not finite.any():
            continue
        idx = int(np.nanargmin(np.abs(np.where(finite, arr, np.inf))))
        bracket = None
        for i in range(len(component) - 1):
            if not (finite[i] and finite[i + 1]):
                continue
            if arr[i] * arr[i + 1] < 0.0:
                bracket = (tuple(component[i]), tuple(component[i + 1]))
                break
        candidate = (abs(float(arr[idx])), component, bracket)
        if best is None or candidate[0] < best[0]:
            best = candidate

    if best is None:
        raise PortraitError("degenerate curve is not regular anywhere in the window")
    mismatch, component, bracket = best

    if bracket is not None:
        lo, hi = np.asarray(bracket[0]), np.asarray(bracket[1])
        f_lo = _signed_mismatch(metric, lo)
        for _ in range(60):
            mid = np.asarray(refine_to_curve(metric, 0.5 * (lo + hi)))
            f_mid = _signed_mismatch(metric, mid)
            if f_lo * f_mid <= 0.0:
                hi = mid
            else:
                lo, f_lo = mid, f_mid
        x, y = 0.5 * (lo + hi)
        return (float(x), float(y))
    # no isolated tangency (transverse case, or tangent along the whole arc):
    # pick the best component's vertex nearest the window center
    d2 = (component[:, 0] - cx) ** 2 + (component[:, 1] - cy) ** 2
    idx = int(np.argmin(d2))
    return (float(component[idx, 0]), float(component[idx, 1]))


def _x_independent(metric: MetricField) -> bool:
    used = metric.a.variables() | metric.b.variables() | metric.c.variables()
    return "x" not in used


def _tangent_along_arc(metric: MetricField, q: Sequence[float], box: BBox) -> bool:
    """True when the isotropic direction stays tangent to S0 near q.

    An isolated (generic) tangency loses contact at rate ~|s| along the arc,
    so a step of 1e-3 of the window size separates it cleanly from the
    non-generic everywhere-tangent configuration.
    """
    _, (gx, gy) = delta(metric, q)
    norm = math.hypot(gx, gy)
    tx, ty = -gy / norm, gx / norm
    step = 1e-3 * max(box[1] - box[0], box[3] - box[2])
    for sign in (-1.0, 1.0):
        try:
            neighbor = refine_to_curve(
                metric, (q[0] + sign * step * tx, q[1] + sign * step * ty)
            )
            if abs(_signed_mismatch(metric, neighbor)) > 1e-6:
                return False
        except DegeneracyError:
            return False
    return True


def _symmetry_portrait(
    metric: MetricField,
    box: BBox,
    *,
    levels: int,
    offsets: int,
    span: float,
    jobs: int | None,
) -> tuple[list[GeodesicCurve], list[dict[str, object]], dict[str, object]]:
    """Family portrait for an x-independent metric: geodesics seeded at their
    turning points (horizontal jets) on a ladder of heights, plus null curves.

    Translation symmetry in x makes each height a one-parameter family; the
    ladder plus a few x-offsets draws the same pattern the conserved-quantity
    analysis predicts, including the strip below the degenerate line that no
    geodesic of the ladder enters.
    """
    xmin, xmax, ymin, ymax = box
    heights = np.linspace(ymin + 0.08 * (ymax - ymin), ymax - 0.08 * (ymax - ymin), levels)
    x_offsets = np.linspace(xmin + 0.15 * (xmax - xmin), xmax - 0.15 * (xmax - xmin), offsets)
    horizontal = ProjectiveDirection(CHART_P, 0.0)

    tasks: list[Callable[[], GeodesicCurve]] = []
    info: list[dict[str, object]] = []
    opts = replace(DEFAULT_OPTIONS, max_step=0.05)
    lorentzian_heights: list[float] = []
    for height in heights:
        scale = max(metric.coefficient_scale(0.0, float(height)), 1e-30)
        if abs(metric.discriminant(0.0, float(height))) <= 1e-4 * scale * scale:
            continue
        if metric.discriminant(0.0, float(height)) < 0.0:
            lorentzian_heights.append(float(height))
        for x_off in x_offsets:
            jet = ProjectiveJet(float(x_off), float(height), horizontal)
            for orientation in (1.0, -1.0):
                tasks.append(
                    lambda jet=jet, orientation=orientation: integrate_geodesic(
                        metric, jet, span, opts, orientation=orientation, bbox=box
                    )
                )
                info.append(
                    {
                        "role": "turning-level",
                        "height": jet.y,
                        "seed": [jet.x, jet.y],
                        "orientation": orientation,
                    }
                )

    for height in lorentzian_heights[:2]:
        try:
            branches = null_directions(metric, float(x_offsets[0]), height)
        except FamilyError:
            continue
        for branch in branches:
            jet = ProjectiveJet(float(x_offsets[0]), height, branch)
            for orientation in (1.0, -1.0):
                tasks.append(
                    lambda jet=jet, orientation=orientation: integrate_isotropic(
                        metric, jet, span, opts, orientation=orientation, bbox=box
                    )
                )
                info.append(
                    {
                        "role": "isotropic",
                        "seed": [jet.x, jet.y],
                        "direction": {"chart": jet.direction.chart, "value": jet.direction.value},
                        "orientation": orientation,
                    }
                )

    curves = _run_tasks(tasks, jobs)
    metadata: dict[str, object] = {
        "mode": "family",
        "family": "turning-level ladder (x-independent metric)",
        "levels": [float(h) for h in heights],
        "offsets": [float(x) for x in x_offsets],
    }
    return curves, info, metadata


def portrait_family(
    metric: MetricField,
    point: Sequence[float] | None = None,
    *,
    count: int = 12,
    tau0: float = 1e-3,
    span: float = 4.0,
    bbox: Sequence[float] | None = None,
    levels: int = 8,
    offsets: int = 3,
    jobs: int | None = None,
) -> Portrait:
    """Portrait of the geodesic family attached to a degenerate point.

    Routes on the classification: transverse cases draw the family through
    the isotropic direction plus any non-isotropic pairs; tangency cases draw
    the tangency family (members, separatrix when present, null members).
    Metrics whose degenerate line is everywhere tangent have no isolated
    structure to classify; for x-independent ones the turning-point ladder is
    drawn instead.
    """
    box: BBox = metric.bbox if bbox is None else tuple(float(v) for v in bbox)  # type: ignore[assignment]
    if point is None:
        q = locate_family_point(metric, box)
    else:
        q = find_S0_point(metric, point, bbox=box)

    curves: list[GeodesicCurve] = []
    info: list[dict[str, object]] = []
    marks: list[tuple[float, float]] = [q]
    metadata: dict[str, object]

    try:
        report = classify(metric, q)
    except DegeneracyError as exc:
        raise PortraitError(f"cannot classify the degenerate point: {exc}") from exc

    if report.case.startswith("D") and _tangent_along_arc(metric, q, box):
        if not _x_independent(metric):
            raise PortraitError(
                "degenerate tangency with a vanishing lifted spectrum; "
                "no family construction applies"
            )
        curves, info, metadata = _symmetry_portrait(
            metric, box, levels=levels, offsets=offsets, span=span, jobs=jobs
        )
        marks = []
    elif report.case.startswith("D"):
        spec = family_case_d(metric, q, counts=count, tau0=tau0, span=span, riemannian_count=0)
        for member in spec.members:
            curves.append(member.curve)
            info.append(
                {
                    "role": "member" if member.winding is None else "isotropic-member",
                    "params": list(member.params),
                    "side": member.side,
                }
            )
        metadata = {
            "mode": "family",
            "case": spec.case_label,
            "point": list(q),
            "family": spec.to_dict(include_curves=False),
        }
    else:
        spec = family_case_c_isotropic(metric, q, count, tau0=tau0, span=span)
        for member in spec.members:
            curves.append(member.curve)
            info.append({"role": "member", "params": list(member.params), "side": member.side})
        pairs = []
        for root in report.roots:
            if root.isotropic or root.multiplicity != 1:
                continue
            try:
                pair = geodesic_case_c_nonisotropic(metric, q, root=root.direction, span=span)
            except FamilyError:
                continue
            for curve in pair.curves:
                curves.append(curve)
                info.append({"role": "pair", "root": root.to_dict()})
            pairs.append(pair.to_dict(include_curves=False))
        metadata = {
            "mode": "family",
            "case": spec.case_label,
            "point": list(q),
            "family": spec.to_dict(include_curves=False),
            "pairs": pairs,
        }

    return Portrait(
        metric_text=metric.to_text(),
        bbox=box,
        curves=curves,
        curve_info=info,
        marks=marks,
        degenerate_polylines=trace_degenerate_curve(metric, bbox=box),
        metadata=metadata,
    )
