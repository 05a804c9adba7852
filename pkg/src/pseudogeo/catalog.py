"""Named example metrics and the ``--metric`` source resolver.

Sources accepted everywhere a metric can be passed:

* ``catalog:NAME`` or ``catalog:NAME(PARAM)`` for a shipped example,
* ``@PATH`` for a file holding metric text or a JSON object,
* anything else is parsed inline as ``a = ...; b = ...; c = ...``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .expr import ParseError, parse_expr
from .metric import MetricField, induced_metric, metric_from_json, parse_metric
from .metric import Embedding

__all__ = ["CatalogEntry", "CATALOG", "catalog_names", "build_catalog_metric", "resolve_metric"]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    summary: str
    build: Callable[[float], MetricField]
    parameter: str | None = None
    default: float | None = None

    def instantiate(self, value: float | None = None) -> MetricField:
        if self.parameter is None:
            if value is not None:
                raise ValueError(f"{self.name} takes no parameter")
            return self.build(0.0)
        if value is None:
            value = self.default
        assert value is not None
        return self.build(float(value))


def _simple(text: str, label: str, bbox=None) -> MetricField:
    return parse_metric(text, bbox=bbox, label=label)


def _build_ex1(_: float) -> MetricField:
    return _simple("a = 1; b = 0; c = -y", "ex1")


def _build_ex1exp(_: float) -> MetricField:
    return _simple("a = exp(y); b = 0; c = -y", "ex1exp")


def _build_c1c3(y1: float) -> MetricField:
    return _simple(f"a = 1 + (y - ({y1!r}))^2; b = 0; c = -y", f"c1c3({y1:g})")


def _build_dd(eps: float) -> MetricField:
    return _simple(f"a = ({eps!r})*x^2 - y; b = 0; c = 1", f"dd({eps:g})")


def _build_clairaut(_: float) -> MetricField:
    return _simple("a = -y; b = 0; c = 1", "clairaut")


def sphere_embedding() -> Embedding:
    components = (
        parse_expr("sin(u) * cos(v)", ("u", "v")),
        parse_expr("sin(u) * sin(v)", ("u", "v")),
        parse_expr("cos(u)", ("u", "v")),
    )
    return Embedding(components, signature="minkowski", label="unit-sphere")


def _build_mink_sphere(_: float) -> MetricField:
    # polar gauge breaks down at u = 0, pi; stay inside by a margin
    bbox = (0.2, math.pi - 0.2, -math.pi, math.pi)
    return induced_metric(sphere_embedding(), bbox=bbox, label="mink-sphere")


CATALOG: dict[str, CatalogEntry] = {
    "ex1": CatalogEntry(
        "ex1", "dx^2 - y dy^2; the line y=0 is degenerate with a double root", _build_ex1
    ),
    "ex1exp": CatalogEntry(
        "ex1exp", "exp(y) dx^2 - y dy^2; curved variant of ex1", _build_ex1exp
    ),
    "c1c3": CatalogEntry(
        "c1c3",
        "(1 + (y - y1)^2) dx^2 - y dy^2; one admissible direction for y1 < 0, three for y1 > 0",
        _build_c1c3,
        parameter="y1",
        default=0.5,
    ),
    "dd": CatalogEntry(
        "dd",
        "dy^2 + (eps x^2 - y) dx^2; isotropic direction tangent to the degenerate"
        " curve at the origin: saddle for eps < 0, node for 0 < eps < 1/16,"
        " focus for eps > 1/16",
        _build_dd,
        parameter="eps",
        default=-1.0,
    ),
    "clairaut": CatalogEntry(
        "clairaut", "dy^2 - y dx^2; x-independent, admits a first integral", _build_clairaut
    ),
    "mink-sphere": CatalogEntry(
        "mink-sphere",
        "unit sphere pulled back from (dX^2 + dY^2 - dZ^2); degenerate on two parallels",
        _build_mink_sphere,
    ),
}


def catalog_names() -> list[str]:
    return sorted(CATALOG)


_CATALOG_RE = re.compile(r"\A([A-Za-z0-9_-]+)\s*(?:\(\s*([^()]+)\s*\))?\Z")


def _parse_param(raw: str) -> float:
    # plain numbers plus simple fractions like 1/32
    raw = raw.strip()
    numerator, slash, denominator = raw.partition("/")
    if slash:
        return float(numerator) / float(denominator)
    return float(raw)


def build_catalog_metric(spec: str) -> MetricField:
    """Build a catalog metric from ``NAME`` or ``NAME(PARAM)``."""
    match = _CATALOG_RE.match(spec.strip())
    if not match:
        raise ParseError(f"bad catalog reference {spec!r}")
    name, raw_value = match.group(1), match.group(2)
    entry = CATALOG.get(name)
    if entry is None:
        known = ", ".join(catalog_names())
        raise ParseError(f"unknown catalog metric {name!r} (known: {known})")
    value: float | None = None
    if raw_value is not None:
        try:
            value = _parse_param(raw_value)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad parameter {raw_value!r} for {name}") from None
    try:
        return entry.instantiate(value)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def resolve_metric(source: str) -> MetricField:
    """Resolve a ``--metric`` style source string to a MetricField."""
    source = source.strip()
    if source.startswith("catalog:"):
        return build_catalog_metric(source[len("catalog:"):])
    if source.startswith("@"):
        path = Path(source[1:]).expanduser()
        if not path.exists():
            raise ParseError(f"metric file not found: {path}")
        text = path.read_text()
        if text.lstrip().startswith("{"):
            return metric_from_json(text)
        return parse_metric(text, label=path.name)
    if source.lstrip().startswith("{"):
        return metric_from_json(source)
    return parse_metric(source)
