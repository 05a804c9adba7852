"""Metric coefficient fields on a coordinate patch.

A metric is ``ds^2 = a dx^2 + 2 b dx dy + c dy^2`` with coefficients from the
expression mini-language.  ``MetricField`` precompiles every derived quantity
the rest of the library needs (partials, discriminant, direction-cubic
coefficients) and owns its chart mirror: the same surface described in swapped
coordinates ``(x, y) -> (y, x)``, which the integrator switches to when slopes
leave the finite chart.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .expr import (
    Const,
    DomainError,
    Expr,
    ParseError,
    Var,
    compile_bundle,
    parse_expr,
)

__all__ = [
    "BBox",
    "MetricField",
    "Embedding",
    "parse_metric",
    "eval_metric",
    "induced_metric",
    "euclidean_gauss_curvature",
]

DEFAULT_BBOX = (-1.0, 1.0, -1.0, 1.0)

BBox = tuple[float, float, float, float]

_SWAP = {"x": Var("y"), "y": Var("x")}


def _check_bbox(bbox: Sequence[float]) -> BBox:
    if len(bbox) != 4:
        raise ValueError("bbox must be (xmin, xmax, ymin, ymax)")
    xmin, xmax, ymin, ymax = (float(v) for v in bbox)
    if not (xmin < xmax and ymin < ymax):
        raise ValueError("bbox must have xmin < xmax and ymin < ymax")
    return (xmin, xmax, ymin, ymax)


class MetricField:
    """Coefficients of a possibly signature-changing metric on a 2D patch."""

    def __init__(
        self,
        a: Expr,
        b: Expr,
        c: Expr,
        bbox: Sequence[float] = DEFAULT_BBOX,
        label: str = "",
        _mirror: "MetricField | None" = None,
    ):
        for coeff in (a, b, c):
            extra = coeff.variables() - {"x", "y"}
            if extra:
                raise ValueError(f"coefficients may only use x and y, got {sorted(extra)}")
        self.a, self.b, self.c = a, b, c
        self.bbox = _check_bbox(bbox)
        self.label = label

        ax, ay = a.diff("x"), a.diff("y")
        bx, by = b.diff("x"), b.diff("y")
        cx, cy = c.diff("x"), c.diff("y")
        self._partials = (ax, ay, bx, by, cx, cy)

        disc = a * c - b * b
        mu0 = a * (ay - 2.0 * bx) + ax * b
        mu1 = b * (3.0 * ay - 2.0 * bx) + ax * c - 2.0 * a * cx
        mu2 = b * (2.0 * by - 3.0 * cx) + 2.0 * ay * c - a * cy
        mu3 = c * (2.0 * by - cx) - b * cy
        mu = (mu0, mu1, mu2, mu3)
        self._disc_expr = disc
        self._mu_exprs = mu

        seconds = (
            ax.diff("x"), ax.diff("y"), ay.diff("y"),
            bx.diff("x"), bx.diff("y"), by.diff("y"),
            cx.diff("x"), cx.diff("y"), cy.diff("y"),
        )
        params = ("x", "y")
        self._coeffs = compile_bundle((a, b, c), params)
        self._disc3 = compile_bundle((disc, disc.diff("x"), disc.diff("y")), params)
        self._form_jet_fn = compile_bundle((a, b, c, *self._partials), params)
        self._form_jet2_fn = compile_bundle((a, b, c, *self._partials, *seconds), params)
        self._flow_fn = compile_bundle((disc, *mu), params)
        mu_grads = tuple(m.diff("x") for m in mu) + tuple(m.diff("y") for m in mu)
        self._flow_jet_fn = compile_bundle(
            (disc, disc.diff("x"), disc.diff("y"), *mu, *mu_grads), params
        )

        if _mirror is not None:
            self._mirror = _mirror
        else:
            xmin, xmax, ymin, ymax = self.bbox
            self._mirror = MetricField(
                c.subst(_SWAP),
                b.subst(_SWAP),
                a.subst(_SWAP),
                bbox=(ymin, ymax, xmin, xmax),
                label=f"{label}~swap" if label else "~swap",
                _mirror=self,
            )

    # --- chart plumbing ---------------------------------------------------

    @property
    def swapped(self) -> "MetricField":
        """The same surface with coordinates exchanged (x, y) -> (y, x)."""
        return self._mirror

    # --- evaluation -------------------------------------------------------

    def coefficients(self, x: float, y: float) -> tuple[float, float, float]:
        return self._coeffs(x, y)

    def form(self, x: float, y: float, p: float) -> float:
        """Quadratic form of the direction (1, p): a + 2 b p + c p^2."""
        a, b, c = self._coeffs(x, y)
        return a + 2.0 * b * p + c * p * p

    def discriminant(self, x: float, y: float) -> float:
        return self._disc3(x, y)[0]

    def discriminant_jet(self, x: float, y: float) -> tuple[float, float, float]:
        """Discriminant value and its gradient: (value, d/dx, d/dy)."""
        return self._disc3(x, y)

    def form_jet(self, x: float, y: float) -> tuple[float, ...]:
        """(a, b, c, a_x, a_y, b_x, b_y, c_x, c_y)."""
        return self._form_jet_fn(x, y)

    def form_jet2(self, x: float, y: float) -> tuple[float, ...]:
        """First-order jet plus the six distinct second partials per coefficient."""
        return self._form_jet2_fn(x, y)

    def flow_values(self, x: float, y: float) -> tuple[float, ...]:
        """(discriminant, mu0, mu1, mu2, mu3): everything the flow needs."""
        return self._flow_fn(x, y)

    def flow_jet(self, x: float, y: float) -> tuple[float, ...]:
        """Flow data plus gradients, for linearizations and proximity tests."""
        return self._flow_jet_fn(x, y)

    def cubic_values(self, x: float, y: float) -> tuple[float, float, float, float]:
        return self._flow_fn(x, y)[1:]

    def coefficient_scale(self, x: float, y: float) -> float:
        a, b, c = self._coeffs(x, y)
        return max(abs(a), abs(b), abs(c))

    # --- presentation -----------------------------------------------------

    def to_text(self) -> str:
        return f"a = {self.a}; b = {self.b}; c = {self.c}"

    def __repr__(self) -> str:
        tag = f" {self.label!r}" if self.label else ""
        return f"<MetricField{tag} {self.to_text()}>"


def parse_metric(
    text: str,
    bbox: Sequence[float] | None = None,
    label: str = "",
) -> MetricField:
    """Parse ``a = ...; b = ...; c = ...`` (an optional ``bbox`` entry is allowed)."""
    entries: dict[str, str] = {}
    for raw in text.replace("\n", ";").split(";"):
        item = raw.strip()
        if not item:
            continue
        key, eq, value = item.partition("=")
        if not eq:
            raise ParseError(f"expected 'name = expression', got {item!r}")
        key = key.strip()
        if key in entries:
            raise ParseError(f"duplicate entry for {key!r}")
        entries[key] = value.strip()

    unknown = set(entries) - {"a", "b", "c", "bbox"}
    if unknown:
        raise ParseError(f"unknown entries {sorted(unknown)}; expected a, b, c")
    missing = {"a", "b", "c"} - set(entries)
    if missing:
        raise ParseError(f"missing coefficient(s) {sorted(missing)}")

    coeffs = {key: parse_expr(entries[key], ("x", "y")) for key in ("a", "b", "c")}
    if bbox is None and "bbox" in entries:
        try:
            bbox = [float(v) for v in entries["bbox"].split(",")]
        except ValueError:
            raise ParseError("bbox must be four comma-separated numbers") from None
    return MetricField(
        coeffs["a"], coeffs["b"], coeffs["c"],
        bbox=bbox if bbox is not None else DEFAULT_BBOX,
        label=label,
    )


def eval_metric(metric: MetricField, q: Sequence[float]) -> tuple[float, float, float]:
    """Coefficient values (a, b, c) at the point q = (x, y)."""
    x, y = float(q[0]), float(q[1])
    return metric.coefficients(x, y)


# --- embeddings -----------------------------------------------------------

_SIGNATURE_WEIGHTS = {
    "euclidean": (1.0, 1.0, 1.0),
    "minkowski": (1.0, 1.0, -1.0),
}

_TO_XY = {"u": Var("x"), "v": Var("y")}


@dataclass(frozen=True)
class Embedding:
    """A parametrized surface (u, v) -> (X, Y, Z) in a flat ambient 3-space.

    The signature tag picks the ambient quadratic form used for pullbacks:
    ``euclidean`` is dX^2 + dY^2 + dZ^2, ``minkowski`` is dX^2 + dY^2 - dZ^2.
    """

    components: tuple[Expr, Expr, Expr]
    signature: str = "minkowski"
    label: str = ""

    def __post_init__(self) -> None:
        if self.signature not in _SIGNATURE_WEIGHTS:
            raise ValueError("signature must be 'euclidean' or 'minkowski'")
        for component in self.components:
            extra = component.variables() - {"u", "v"}
            if extra:
                raise ValueError(
                    f"embedding components may only use u and v, got {sorted(extra)}"
                )

    def point(self, u: float, v: float) -> tuple[float, float, float]:
        env = {"u": u, "v": v}
        return tuple(component.evaluate(env) for component in self.components)


def parse_embedding(text: str, signature: str = "minkowski", label: str = "") -> Embedding:
    """Parse ``X = ...; Y = ...; Z = ...`` in the variables u, v."""
    entries: dict[str, str] = {}
    for raw in text.replace("\n", ";").split(";"):
        item = raw.strip()
        if not item:
            continue
        key, eq, value = item.partition("=")
        if not eq:
            raise ParseError(f"expected 'name = expression', got {item!r}")
        entries[key.strip()] = value.strip()
    missing = {"X", "Y", "Z"} - set(entries)
    if missing:
        raise ParseError(f"missing component(s) {sorted(missing)}")
    components = tuple(parse_expr(entries[key], ("u", "v")) for key in ("X", "Y", "Z"))
    return Embedding(components, signature=signature, label=label)


def induced_metric(
    embedding: Embedding,
    bbox: Sequence[float] = DEFAULT_BBOX,
    label: str = "",
) -> MetricField:
    """Pull the ambient quadratic form back to coefficients in (x, y) = (u, v)."""
    weights = _SIGNATURE_WEIGHTS[embedding.signature]
    du = [component.diff("u") for component in embedding.components]
    dv = [component.diff("v") for component in embedding.components]
    a: Expr = Const(0.0)
    b: Expr = Const(0.0)
    c: Expr = Const(0.0)
    for w, pu, pv in zip(weights, du, dv):
        a = a + w * pu * pu
        b = b + w * pu * pv
        c = c + w * pv * pv
    return MetricField(
        a.subst(_TO_XY), b.subst(_TO_XY), c.subst(_TO_XY),
        bbox=bbox,
        label=label or (embedding.label and f"induced:{embedding.label}") or "",
    )


def _dot3(u: Sequence[float], v: Sequence[float]) -> float:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def euclidean_gauss_curvature(embedding: Embedding, q: Sequence[float]) -> float:
    """Gaussian curvature at q from the Euclidean fundamental forms.

    This deliberately ignores the embedding's signature tag: it is the shape
    invariant of the surface as a subset of ordinary 3-space, used to
    cross-check classifications of induced metrics.
    """
    u, v = float(q[0]), float(q[1])
    env = {"u": u, "v": v}
    du = [c.diff("u") for c in embedding.components]
    dv = [c.diff("v") for c in embedding.components]
    xu = [e.evaluate(env) for e in du]
    xv = [e.evaluate(env) for e in dv]
    normal = (
        xu[1] * xv[2] - xu[2] * xv[1],
        xu[2] * xv[0] - xu[0] * xv[2],
        xu[0] * xv[1] - xu[1] * xv[0],
    )
    norm = math.sqrt(_dot3(normal, normal))
    scale = math.sqrt(_dot3(xu, xu)) * math.sqrt(_dot3(xv, xv))
    if norm <= 1e-12 * max(scale, 1e-30):
        raise ValueError(f"embedding is not an immersion at {(u, v)}")
    unit = tuple(n / norm for n in normal)

    e1 = _dot3(xu, xu)
    f1 = _dot3(xu, xv)
    g1 = _dot3(xv, xv)
    xuu = [c.diff("u").diff("u").evaluate(env) for c in embedding.components]
    xuv = [c.diff("u").diff("v").evaluate(env) for c in embedding.components]
    xvv = [c.diff("v").diff("v").evaluate(env) for c in embedding.components]
    l2 = _dot3(xuu, unit)
    m2 = _dot3(xuv, unit)
    n2 = _dot3(xvv, unit)
    return (l2 * n2 - m2 * m2) / (e1 * g1 - f1 * f1)


# --- serialization helpers used by the service and CLI ---------------------


def metric_to_dict(metric: MetricField) -> dict[str, object]:
    return {
        "a": str(metric.a),
        "b": str(metric.b),
        "c": str(metric.c),
        "bbox": list(metric.bbox),
        "label": metric.label,
    }


def metric_from_dict(data: Mapping[str, object]) -> MetricField:
    missing = {"a", "b", "c"} - set(data)
    if missing:
        raise ParseError(f"missing coefficient(s) {sorted(missing)}")
    coeffs = {key: parse_expr(str(data[key]), ("x", "y")) for key in ("a", "b", "c")}
    bbox = data.get("bbox", DEFAULT_BBOX)
    if not isinstance(bbox, Iterable):
        raise ParseError("bbox must be a list of four numbers")
    return MetricField(
        coeffs["a"], coeffs["b"], coeffs["c"],
        bbox=[float(v) for v in bbox],  # type: ignore[arg-type]
        label=str(data.get("label", "")),
    )


def metric_from_json(text: str) -> MetricField:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError("metric JSON must be an object")
    return metric_from_dict(data)
