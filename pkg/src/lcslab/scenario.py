"""Scenario files: schema validation, eager parsing and point sampling."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .expr import ExpressionError, ParseError, parse
from .lcs import CATALOG, LcsStructure, StructureError, warped_product
from .riemann import MetricField
from .submanifold import Immersion
from .verifiers import THEOREMS, Tolerances

SAMPLING_MARGIN = 1e-3
FAMILIES = ("warped_product", "euclidean_test")
KINDS = ("slice", "graph", "parametric")


class ScenarioError(ValueError):
    """Input error; ``path`` names the offending field (``a.b[2]``)."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass
class Scenario:
    raw: dict
    ambient: LcsStructure
    immersion: Immersion
    points: int
    seed: int
    box: np.ndarray
    tolerances: Tolerances
    theorems: list[str]
    expect_conditional: bool = True
    options: dict = field(default_factory=dict)
    name: str = ""

    @property
    def m(self) -> int:
        return self.immersion.m

    @property
    def n(self) -> int:
        return self.ambient.dim

    def sample(self, points: int | None = None, seed: int | None = None) -> np.ndarray:
        """Uniform points in the box, ``SAMPLING_MARGIN`` away from every edge.

        Point ``i`` uses its own generator seeded by ``(seed, i)``, so a point
        does not depend on how many others are drawn.
        """
        count = self.points if points is None else points
        seed = self.seed if seed is None else seed
        lo = self.box[:, 0] + SAMPLING_MARGIN
        hi = self.box[:, 1] - SAMPLING_MARGIN
        mid = 0.5 * (self.box[:, 0] + self.box[:, 1])
        narrow = hi <= lo
        lo = np.where(narrow, mid, lo)
        hi = np.where(narrow, mid, hi)
        out = np.empty((count, self.m))
        for i in range(count):
            r = np.random.default_rng([seed, i]).random(self.m)
            out[i] = lo + (hi - lo) * r
        return out


def _get(d: dict, key: str, path: str, kind, required: bool = True, default=None):
    if key not in d:
        if required:
            raise ScenarioError(f"{path}.{key}" if path else key, "required field is missing")
        return default
    value = d[key]
    kinds = kind if isinstance(kind, tuple) else (kind,)
    if bool in kinds:
        ok = isinstance(value, bool)
    elif isinstance(value, bool):
        ok = False
    else:
        ok = isinstance(value, kinds)
    if not ok:
        names = "/".join(k.__name__ for k in kinds)
        raise ScenarioError(f"{path}.{key}" if path else key, f"expected {names}, got {type(value).__name__}")
    return value


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(path, f"expected a finite number, got {value!r}")
    return float(value)


def _expr_error(path: str, source: str, err: ExpressionError) -> ScenarioError:
    if isinstance(err, ParseError):
        return ScenarioError(path, f"cannot parse {source!r} at offset {err.offset}: {err}")
    return ScenarioError(path, f"invalid expression {source!r}: {err}")


def _ambient(spec: dict) -> LcsStructure:
    family = _get(spec, "family", "manifold", str)
    n = _get(spec, "dimension", "manifold", int)
    if family not in FAMILIES:
        raise ScenarioError("manifold.family", f"unknown family {family!r}; expected one of {FAMILIES}")
    if family == "euclidean_test":
        if n < 2:
            raise ScenarioError("manifold.dimension", "needs dimension >= 2")
        return LcsStructure.degenerate(MetricField.euclidean(n), name="euclidean_test")
    if n < 3:
        raise ScenarioError("manifold.dimension", f"(LCS)_n needs n >= 3, got {n}")
    warp = _get(spec, "warp", "manifold", str)
    t_range = spec.get("t_range")
    if warp in CATALOG:
        warp, default_range = CATALOG[warp]
        t_range = default_range if t_range is None else t_range
    elif warp.startswith("warped:"):
        warp = warp[len("warped:"):]
    if t_range is not None:
        if not isinstance(t_range, (list, tuple)) or len(t_range) != 2:
            raise ScenarioError("manifold.t_range", "expected [lo, hi]")
        lo = _number(t_range[0], "manifold.t_range[0]")
        hi = _number(t_range[1], "manifold.t_range[1]")
        if not lo < hi:
            raise ScenarioError("manifold.t_range", "needs lo < hi")
        t_range = (lo, hi)
    try:
        parse(warp, ("t",))
    except ExpressionError as err:
        raise _expr_error("manifold.warp", warp, err) from None
    try:
        return warped_product(n, warp, t_range)
    except (StructureError, ExpressionError) as err:
        raise ScenarioError("manifold.warp", str(err)) from None


def _immersion(spec: dict, ambient: LcsStructure) -> Immersion:
    kind = _get(spec, "kind", "submanifold", str)
    if kind not in KINDS:
        raise ScenarioError("submanifold.kind", f"unknown kind {kind!r}; expected one of {KINDS}")
    m = _get(spec, "dimension", "submanifold", int)
    n = ambient.dim
    if m < 1:
        raise ScenarioError("submanifold.dimension", "needs dimension >= 1")
    if m >= n:
        raise ScenarioError(
            "submanifold.dimension",
            f"submanifold dimension m={m} must be smaller than the ambient dimension n={n} (m<n)",
        )
    params = _get(spec, "parameters", "submanifold", list, required=False)
    if params is None:
        params = [f"u{i}" for i in range(1, m + 1)]
    if len(params) != m or not all(isinstance(p, str) for p in params):
        raise ScenarioError("submanifold.parameters", f"expected {m} parameter names")
    if len(set(params)) != m:
        raise ScenarioError("submanifold.parameters", "parameter names must be distinct")
    try:
        if kind == "slice":
            value = _number(_get(spec, "slice_value", "submanifold", (int, float)), "submanifold.slice_value")
            coord = _get(spec, "slice_coordinate", "submanifold", int, required=False, default=0)
            if not 0 <= coord < n:
                raise ScenarioError("submanifold.slice_coordinate", f"must be in 0..{n - 1}")
            return Immersion.slice(ambient, m, value, coord, params)
        comps = _get(spec, "components", "submanifold", list)
        expected = n - m if kind == "graph" else n
        if len(comps) != expected:
            raise ScenarioError("submanifold.components", f"{kind} needs {expected} components, got {len(comps)}")
        parsed = []
        for i, src in enumerate(comps):
            if not isinstance(src, str):
                raise ScenarioError(f"submanifold.components[{i}]", "expected a string expression")
            try:
                parsed.append(parse(src, tuple(params)))
            except ExpressionError as err:
                raise _expr_error(f"submanifold.components[{i}]", src, err) from None
        if kind == "graph":
            return Immersion.graph(ambient, parsed, params)
        return Immersion(ambient, parsed, params)
    except ExpressionError as err:
        raise ScenarioError("submanifold", str(err)) from None


def scenario_from_dict(raw: dict, name: str = "") -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("", "scenario must be a JSON object")
    ambient = _ambient(_get(raw, "manifold", "", dict))
    imm = _immersion(_get(raw, "submanifold", "", dict), ambient)

    sampling = _get(raw, "sampling", "", dict)
    points = _get(sampling, "points", "sampling", int)
    if points < 1:
        raise ScenarioError("sampling.points", "needs at least one point")
    seed = _get(sampling, "seed", "sampling", int)
    if seed < 0:
        raise ScenarioError("sampling.seed", "seed must be non-negative")
    box = _get(sampling, "box", "sampling", list)
    if len(box) != imm.m:
        raise ScenarioError("sampling.box", f"expected {imm.m} [lo, hi] pairs, got {len(box)}")
    rows = []
    for i, pair in enumerate(box):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ScenarioError(f"sampling.box[{i}]", "expected [lo, hi]")
        lo = _number(pair[0], f"sampling.box[{i}][0]")
        hi = _number(pair[1], f"sampling.box[{i}][1]")
        if not lo < hi:
            raise ScenarioError(f"sampling.box[{i}]", f"needs lo < hi, got [{lo}, {hi}]")
        rows.append((lo, hi))

    tol_spec = _get(raw, "tolerances", "", dict)
    tol_values = {}
    for key, required in (("exact", True), ("report", True), ("algebraic", False),
                          ("classification", False), ("structure", False)):
        if key in tol_spec or required:
            v = _number(_get(tol_spec, key, "tolerances", (int, float)), f"tolerances.{key}")
            if v <= 0:
                raise ScenarioError(f"tolerances.{key}", "tolerance must be positive")
            tol_values[key] = v
    tolerances = Tolerances(**tol_values)

    theorems = _get(raw, "theorems", "", list)
    if not theorems:
        raise ScenarioError("theorems", "list at least one theorem id")
    for i, th in enumerate(theorems):
        if th not in THEOREMS:
            raise ScenarioError(f"theorems[{i}]", f"unknown theorem id {th!r}; expected one of {THEOREMS}")
    if len(set(theorems)) != len(theorems):
        raise ScenarioError("theorems", "theorem ids must be distinct")

    expect = _get(raw, "expect_conditional", "", bool, required=False, default=True)
    options = _get(raw, "options", "", dict, required=False, default={})
    for key in options:
        if key not in ("k", "U", "X"):
            raise ScenarioError(f"options.{key}", "unknown option; expected k, U or X")
    if "k" in options:
        k = options["k"]
        if isinstance(k, bool) or not isinstance(k, int) or not 2 <= k <= imm.m:
            raise ScenarioError("options.k", f"needs an integer 2 <= k <= m={imm.m}")
    for key in ("U", "X"):
        if key in options:
            v = options[key]
            if not isinstance(v, list) or len(v) != imm.m:
                raise ScenarioError(f"options.{key}", f"expected {imm.m} tangent-frame coefficients")
            vec = np.array([_number(x, f"options.{key}") for x in v])
            if abs(np.linalg.norm(vec) - 1.0) > 1e-8:
                raise ScenarioError(f"options.{key}", "must be a unit vector")
    if imm.m < 2 and any(t in theorems for t in ("thm3.5", "thm3.6")):
        raise ScenarioError("theorems", "thm3.5 and thm3.6 need m >= 2")

    return Scenario(
        raw=raw, ambient=ambient, immersion=imm, points=points, seed=seed,
        box=np.array(rows, dtype=float), tolerances=tolerances, theorems=list(theorems),
        expect_conditional=expect, options=dict(options), name=name,
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ScenarioError("", f"cannot read {path}: {err.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioError("", f"{path} is not valid JSON: {err}") from None
    return scenario_from_dict(raw, name=path.stem)
