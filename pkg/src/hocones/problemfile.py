"""Reader for the sectioned ``key = value`` problem files used by the CLI.

Example::

    # cusp with the objective from the counterexample demo
    [problem]
    dimension = 2
    objective = -x1 + x2^3
    point = 0, 0

    [set]
    kind = implicit
    equalities = x1^2 - x2^3
    inequalities = -x1

    [collections]
    h01 = 0, 1

Vectors are comma separated, lists of vectors or expressions are ``;``
separated.  Several ``[set]`` sections form a union.  Lines starting with
``#`` are comments.  Every error carries the 1-based line number.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .cones import RefinementSchedule, ScanConfig, VerdictRule
from .expr import Expr, ParseError, default_names, parse
from .optcheck import SampleConfig
from .sets import BENCHMARKS, DistanceConfig, Implicit, ParametricCurve, PointCloud, Union

__all__ = ["ProblemFileError", "Problem", "load", "loads"]


class ProblemFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


_SECTION_KEYS = {
    "problem": {"dimension", "variables", "objective", "point"},
    "set": {"kind", "equalities", "inequalities", "box", "components", "parameter",
            "domain", "points", "name", "form"},
    "collections": None,  # free names
    "config": {"t0", "ratio", "levels", "accept_tol", "reject_floor", "warmup", "terminal",
               "seed", "resolution", "radii", "grid_points", "starts", "feas_tol",
               "max_branches"},
}
_REQUIRED_SET_KEYS = {
    "implicit": set(),
    "parametric": {"components", "domain"},
    "points": {"points"},
    "benchmark": {"name"},
}
_ALLOWED_SET_KEYS = {
    "implicit": {"kind", "equalities", "inequalities", "box"},
    "parametric": {"kind", "components", "parameter", "domain"},
    "points": {"kind", "points"},
    "benchmark": {"kind", "name", "form"},
}
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*$")


@dataclass
class Problem:
    dimension: int
    variables: list
    point: np.ndarray
    set: object
    objective: Expr | None = None
    collections: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def scan_config(self) -> ScanConfig:
        c = self.config
        sched = RefinementSchedule(t0=c.get("t0", 0.1), ratio=c.get("ratio", 0.25),
                                   levels=int(c.get("levels", 24)))
        rule = VerdictRule(accept_tol=c.get("accept_tol", 1e-6), reject_floor=c.get("reject_floor", 1e-2),
                           warmup=int(c.get("warmup", 4)), terminal=int(c.get("terminal", 3)))
        dist = DistanceConfig(grid_points=int(c.get("grid_points", 4096)), starts=int(c.get("starts", 16)),
                              feas_tol=c.get("feas_tol", 1e-10), seed=int(c.get("seed", 0)))
        return ScanConfig(schedule=sched, rule=rule, distance=dist)

    def sample_config(self) -> SampleConfig:
        c = self.config
        kw = {}
        if "radii" in c:
            kw["radii"] = tuple(c["radii"])
        return SampleConfig(resolution=int(c.get("resolution", 16)), scan=self.scan_config(),
                            seed=int(c.get("seed", 0)), max_branches=int(c.get("max_branches", 64)), **kw)


def _numbers(text, line, what):
    parts = [p.strip() for p in text.split(",")]
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ProblemFileError(f"{what}: expected comma-separated numbers, got {text!r}", line) from None


def _vector(text, n, line, what):
    v = _numbers(text, line, what)
    if len(v) != n:
        raise ProblemFileError(f"{what}: expected {n} components, got {len(v)}", line)
    return v


def _items(text):
    return [p.strip() for p in text.split(";") if p.strip()]


def _expr(text, names, line, what):
    try:
        return parse(text, names)
    except ParseError as exc:
        raise ProblemFileError(f"{what}: {exc}", line) from None


def _split_sections(text):
    sections = []  # (name, header line, {key: (value, line)})
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ProblemFileError(f"malformed section header {line!r}", lineno)
            name = line[1:-1].strip().lower()
            if name not in _SECTION_KEYS:
                raise ProblemFileError(f"unknown section [{name}]", lineno)
            if name != "set" and any(s[0] == name for s in sections):
                raise ProblemFileError(f"section [{name}] appears twice", lineno)
            current = (name, lineno, {})
            sections.append(current)
            continue
        if "=" not in line:
            raise ProblemFileError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ProblemFileError("key outside of any section", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        allowed = _SECTION_KEYS[current[0]]
        if allowed is not None and key not in allowed:
            raise ProblemFileError(f"unknown key {key!r} in [{current[0]}]", lineno)
        if allowed is None and not _NAME.match(key):
            raise ProblemFileError(f"invalid collection name {key!r}", lineno)
        if key in current[2]:
            raise ProblemFileError(f"duplicate key {key!r}", lineno)
        current[2][key] = (value, lineno)
    return sections


def _build_set(keys, header, n, names):
    if "kind" not in keys:
        raise ProblemFileError("[set] needs a 'kind'", header)
    kind, kline = keys["kind"]
    if kind not in _REQUIRED_SET_KEYS:
        raise ProblemFileError(f"unknown set kind {kind!r}", kline)
    for key, (_, line) in keys.items():
        if key not in _ALLOWED_SET_KEYS[kind]:
            raise ProblemFileError(f"key {key!r} does not apply to kind {kind}", line)
    missing = _REQUIRED_SET_KEYS[kind] - keys.keys()
    if missing:
        raise ProblemFileError(f"[set] of kind {kind} is missing {sorted(missing)}", header)

    if kind == "implicit":
        eqs = [_expr(t, names, keys["equalities"][1], "equality")
               for t in _items(keys.get("equalities", ("", 0))[0])]
        ineqs = [_expr(t, names, keys["inequalities"][1], "inequality")
                 for t in _items(keys.get("inequalities", ("", 0))[0])]
        box = None
        if "box" in keys:
            value, line = keys["box"]
            b = _numbers(value, line, "box")
            if len(b) != 2 or not b[0] < b[1]:
                raise ProblemFileError("box: expected 'lo, hi' with lo < hi", line)
            box = (b[0], b[1])
        return Implicit(n, eqs, ineqs, box)
    if kind == "parametric":
        pname = keys.get("parameter", ("s", 0))[0]
        value, line = keys["components"]
        comps = [_expr(t, [pname], line, "component") for t in _items(value)]
        if len(comps) != n:
            raise ProblemFileError(f"components: expected {n} expressions, got {len(comps)}", line)
        value, line = keys["domain"]
        d = _numbers(value, line, "domain")
        if len(d) != 2 or not d[0] < d[1]:
            raise ProblemFileError("domain: expected 'lo, hi' with lo < hi", line)
        return ParametricCurve(comps, (d[0], d[1]))
    if kind == "points":
        value, line = keys["points"]
        pts = [_vector(p, n, line, "points") for p in _items(value)]
        if not pts:
            raise ProblemFileError("points: empty point list", line)
        return PointCloud(pts)
    value, line = keys["name"]
    if value not in BENCHMARKS:
        raise ProblemFileError(f"unknown benchmark {value!r}; choose from {sorted(BENCHMARKS)}", line)
    form = keys.get("form")
    Q = BENCHMARKS[value](form[0]) if form else BENCHMARKS[value]()
    if Q.dim != n:
        raise ProblemFileError(f"benchmark {value!r} has dimension {Q.dim}, problem has {n}", line)
    return Q


def loads(text: str) -> Problem:
    sections = _split_sections(text)
    problem = [s for s in sections if s[0] == "problem"]
    if not problem:
        raise ProblemFileError("missing [problem] section")
    _, header, keys = problem[0]
    if "dimension" not in keys:
        raise ProblemFileError("[problem] needs 'dimension'", header)
    value, line = keys["dimension"]
    try:
        n = int(value)
    except ValueError:
        raise ProblemFileError(f"dimension must be an integer, got {value!r}", line) from None
    if n < 1:
        raise ProblemFileError("dimension must be positive", line)
    names = default_names(n)
    if "variables" in keys:
        value, line = keys["variables"]
        names = [v.strip() for v in value.split(",")]
        if len(names) != n or len(set(names)) != n or not all(_NAME.match(v) for v in names):
            raise ProblemFileError(f"variables: expected {n} distinct identifiers", line)
    point = np.zeros(n)
    if "point" in keys:
        value, line = keys["point"]
        point = _vector(value, n, line, "point")
    objective = None
    if "objective" in keys:
        value, line = keys["objective"]
        objective = _expr(value, names, line, "objective")

    set_sections = [s for s in sections if s[0] == "set"]
    if not set_sections:
        raise ProblemFileError("missing [set] section")
    members = [_build_set(k, h, n, names) for _, h, k in set_sections]
    Q = members[0] if len(members) == 1 else Union(members)

    collections = {}
    for name, _, ckeys in sections:
        if name != "collections":
            continue
        for cname, (value, line) in ckeys.items():
            if value.strip().lower() in ("", "none"):
                collections[cname] = []
            else:
                collections[cname] = [_vector(v, n, line, f"collection {cname}") for v in _items(value)]

    config = {}
    for name, _, ckeys in sections:
        if name != "config":
            continue
        for key, (value, line) in ckeys.items():
            if key == "radii":
                config[key] = list(_numbers(value, line, key))
                continue
            try:
                config[key] = float(value)
            except ValueError:
                raise ProblemFileError(f"{key}: expected a number, got {value!r}", line) from None
    prob = Problem(n, names, point, Q, objective, collections, config)
    try:
        prob.sample_config()
    except ValueError as exc:
        raise ProblemFileError(f"[config]: {exc}") from None
    return prob


def load(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
