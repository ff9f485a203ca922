"""Executable consistency checks between the different cone estimators.

Each suite compares verdicts of two estimators that the theory ties
together (an equality or an inclusion of sets) over a grid of directions
on the built-in benchmark sets.  A *contradiction* is an Accepted verdict
facing a Rejected verdict in a direction the theory forbids; Inconclusive
verdicts never contradict anything but are counted separately.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cones import (DirectionCollection, ScanConfig, SliceKind, SliceSpec, Status,
                    grid_directions, scan_directions)
from .sets import BENCHMARKS

__all__ = ["SUITES", "SuiteResult", "run_suite", "run_suites", "benchmark_probes", "cone_property"]

SUITES = ("pr2", "pr3", "pr5a", "pr6", "pr8", "pr9", "pr10", "cor1")

A, R, I = Status.ACCEPTED, Status.REJECTED, Status.INCONCLUSIVE

# tangent directions at the origin used as h for each benchmark set
_PROBES = {
    "cusp": [(0.0, 1.0)],
    "half-plane": [(0.0, 1.0), (1.0, 0.0)],
    "parabola": [(1.0, 0.0)],
}


def benchmark_probes(name):
    return [np.array(h) for h in _PROBES[name]]


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    inconclusive: int = 0
    contradictions: list = field(default_factory=list)

    def add(self, a, b, kind: str, where: str):
        """Record one comparison.  ``kind`` is ``'eq'`` (no Accepted/Rejected pair
        either way) or ``'imp'`` (``a`` Accepted forbids ``b`` Rejected)."""
        bad = (a is A and b is R) or (kind == "eq" and a is R and b is A)
        if bad:
            self.failed += 1
            self.contradictions.append(f"{where}: {a} vs {b}")
        elif I in (a, b) and (kind == "eq" or a is A):
            self.inconclusive += 1
        else:
            self.passed += 1

    def merge(self, other: "SuiteResult"):
        self.passed += other.passed
        self.failed += other.failed
        self.inconclusive += other.inconclusive
        self.contradictions += other.contradictions


def _statuses(Q, coll, W, spec, cfg):
    return [v.status for v in scan_directions(Q, coll, W, spec, cfg)]


def _fmt_w(w):
    return "(" + ", ".join(format(float(x), ".6g") for x in w) + ")"


def _pairs(res, sa, sb, W, kind, label):
    for w, a, b in zip(W, sa, sb):
        res.add(a, b, kind, f"{label} w={_fmt_w(w)}")


PROPER = SliceSpec(SliceKind.PROPER)
ZERO = SliceSpec(SliceKind.ZERO)
INF = SliceSpec(SliceKind.INFINITY)
EXT = SliceSpec(SliceKind.EXTENDED)
FIRST = SliceSpec(SliceKind.FIRST_ORDER)


def _pr2(Q, name, x, W, cfg, params, res):
    first = _statuses(Q, DirectionCollection(x), W, FIRST, cfg)
    for k in (2, 3):
        coll = DirectionCollection(x, [np.zeros_like(x)] * (k - 1))
        _pairs(res, _statuses(Q, coll, W, EXT, cfg), first, W, "eq", f"{name} k={k}")


def _pr3(Q, name, x, W, cfg, params, res):
    for h in benchmark_probes(name):
        low = _statuses(Q, DirectionCollection(x, [h]), W, EXT, cfg)
        high = _statuses(Q, DirectionCollection(x, [np.zeros_like(x), h]), W, EXT, cfg)
        _pairs(res, high, low, W, "eq", f"{name} h={_fmt_w(h)}")


def _pr5a(Q, name, x, W, cfg, params, res):
    for h in benchmark_probes(name):
        coll = DirectionCollection(x, [h])
        for alpha in params["alpha"]:
            sa = _statuses(Q, coll, W, SliceSpec(SliceKind.ALPHA, alpha), cfg)
            sp = _statuses(Q, coll, alpha * W, PROPER, cfg)
            _pairs(res, sa, sp, W, "eq", f"{name} h={_fmt_w(h)} alpha={alpha}")


def _pr6(Q, name, x, W, cfg, params, res):
    # the ratio-free slices are invariant under h_i -> beta^i h_i; the proper
    # set scales by beta^k
    for h in benchmark_probes(name):
        coll = DirectionCollection(x, [h])
        k = coll.order
        for beta in params["beta"]:
            scaled = coll.rescaled(beta)
            for spec in (ZERO, INF, EXT):
                _pairs(res, _statuses(Q, scaled, W, spec, cfg), _statuses(Q, coll, W, spec, cfg),
                       W, "eq", f"{name} h={_fmt_w(h)} beta={beta} {spec}")
            _pairs(res, _statuses(Q, scaled, beta ** k * W, PROPER, cfg),
                   _statuses(Q, coll, W, PROPER, cfg), W, "eq",
                   f"{name} h={_fmt_w(h)} beta={beta} proper")


def _pr8(Q, name, x, W, cfg, params, res):
    for h in benchmark_probes(name):
        ext = _statuses(Q, DirectionCollection(x, [h, np.zeros_like(x)]), W, EXT, cfg)
        zero = _statuses(Q, DirectionCollection(x, [h]), W, ZERO, cfg)
        _pairs(res, ext, zero, W, "imp", f"{name} h={_fmt_w(h)}")


def _pr9(Q, name, x, W, cfg, params, res):
    origin = np.zeros((1, len(x)))
    for h in benchmark_probes(name):
        coll = DirectionCollection(x, [h])
        zero = _statuses(Q, coll, W, ZERO, cfg)
        antecedent = A if A in zero else (I if I in zero else R)
        targets = [(PROPER, "proper")] + [(SliceSpec(SliceKind.ALPHA, a), f"alpha={a}")
                                          for a in params["alpha"]]
        for spec, label in targets:
            b = _statuses(Q, coll, origin, spec, cfg)[0]
            res.add(antecedent, b, "imp", f"{name} h={_fmt_w(h)} w=0 {label}")


def _pr10(Q, name, x, W, cfg, params, res):
    for h in benchmark_probes(name):
        low = DirectionCollection(x, [h])
        high = DirectionCollection(x, [np.zeros_like(x), h])
        zero_high = _statuses(Q, high, W, ZERO, cfg)
        inf_low = _statuses(Q, low, W, INF, cfg)
        specs = [(ZERO, "zero"), (PROPER, "proper")] + [
            (SliceSpec(SliceKind.ALPHA, a), f"alpha={a}") for a in params["alpha"]]
        for spec, label in specs:
            _pairs(res, _statuses(Q, low, W, spec, cfg), zero_high, W, "imp",
                   f"{name} h={_fmt_w(h)} {label} -> zero(0,h)")
        for spec, label in specs[1:]:
            _pairs(res, _statuses(Q, high, W, spec, cfg), inf_low, W, "imp",
                   f"{name} h={_fmt_w(h)} {label}(0,h) -> infinity")


def _cor1(Q, name, x, W, cfg, params, res):
    for h in benchmark_probes(name):
        coll = DirectionCollection(x, [h])
        ext = _statuses(Q, coll, W, EXT, cfg)
        specs = [(ZERO, "zero"), (INF, "infinity"), (PROPER, "proper")] + [
            (SliceSpec(SliceKind.ALPHA, a), f"alpha={a}") for a in params["alpha"]]
        for spec, label in specs:
            _pairs(res, _statuses(Q, coll, W, spec, cfg), ext, W, "imp",
                   f"{name} h={_fmt_w(h)} {label} -> extended")


_RUNNERS = {"pr2": _pr2, "pr3": _pr3, "pr5a": _pr5a, "pr6": _pr6, "pr8": _pr8,
            "pr9": _pr9, "pr10": _pr10, "cor1": _cor1}


def run_suite(suite: str, sets=("cusp", "half-plane", "parabola"), resolution: int = 16,
              cfg: ScanConfig | None = None, alphas=(0.5, 2.0), betas=(0.5, 2.0)) -> SuiteResult:
    if suite not in _RUNNERS:
        raise KeyError(f"unknown suite {suite!r}")
    cfg = cfg or ScanConfig()
    params = {"alpha": alphas, "beta": betas}
    result = SuiteResult(suite)
    for name in sets:
        if name not in BENCHMARKS:
            raise KeyError(f"unknown benchmark set {name!r}")
        Q = BENCHMARKS[name]()
        x = np.zeros(Q.dim)
        W = grid_directions(Q.dim, resolution)
        _RUNNERS[suite](Q, name, x, W, cfg, params, result)
    return result


def run_suites(suites=SUITES, **kwargs) -> list[SuiteResult]:
    return [run_suite(s, **kwargs) for s in suites]


def cone_property(Q, coll, W, spec: SliceSpec, lambdas=(0.5, 2.0), cfg: ScanConfig | None = None):
    """``[(w, lam, status(w), status(lam w))]`` for the cone-invariance check."""
    base = _statuses(Q, coll, W, spec, cfg)
    out = []
    for lam in lambdas:
        for w, a, b in zip(W, base, _statuses(Q, coll, lam * W, spec, cfg)):
            out.append((w, lam, a, b))
    return out
