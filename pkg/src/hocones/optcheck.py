"""High-order necessary conditions for ``min f over Q`` at a candidate point.

For a collection ``(h_1, ..., h_(k-1))`` the checks are

* stationarity: the first ``k-1`` Taylor coefficients of ``f`` along the
  arc ``x + sum t^i h_i`` vanish;
* proper condition: for every proper tangent vector ``w`` of order ``k`` the
  ``t^k`` coefficient along ``x + sum t^i h_i + t^k w`` is ``>= 0``;
* asymptotic condition: ``f'(x) w >= 0`` for every ``w`` in the asymptotic
  slice of order ``k``.

Both quantifiers ("for all ``w``") are replaced by a finite sample of
directions, so a Consistent verdict only means that no violation was found
at the chosen resolution.
"""
from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field

import numpy as np

from .cones import (Band, DirectionCollection, MembershipVerdict, ScanConfig, SliceKind, SliceSpec,
                    Status, grid_directions, scan_directions)
from .expr import Expr, evaluate
from .jets import Arc, eval_on_arc
from .sets import contains
from .taylor import gradient, sum_order_k, sum_order_s

__all__ = [
    "Verdict", "SampleConfig", "CheckRow", "Certificate", "OptimalityReport",
    "DisqualifyResult", "stationarity_residuals", "condition_value", "check_collection",
    "check_first_order", "disqualify",
]


class Verdict(str, enum.Enum):
    VIOLATED = "Violated"
    CONSISTENT = "Consistent"
    INCONCLUSIVE = "Inconclusive"
    NOT_APPLICABLE = "NotApplicable"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SampleConfig:
    resolution: int = 16
    radii: tuple = (0.5, 1.0, 2.0)
    scan: ScanConfig = field(default_factory=ScanConfig)
    stationarity_rel: float = 1e-8
    violation_rel: float = 1e-8
    seed: int = 0
    max_branches: int = 64


@dataclass(frozen=True, eq=False)
class CheckRow:
    w: np.ndarray
    kind: SliceKind
    membership: MembershipVerdict
    value: float


@dataclass(frozen=True, eq=False)
class Certificate:
    w: np.ndarray
    kind: SliceKind
    value: float
    membership: MembershipVerdict


@dataclass(eq=False)
class OptimalityReport:
    order: int
    collection: DirectionCollection
    residuals: np.ndarray
    checks: list
    verdict: Verdict
    certificate: Certificate | None
    scale: float
    stationarity_tol: float
    violation_tol: float
    locality_radius: float
    extended_member_found: bool = False
    oracle_gap: float = 0.0

    @property
    def proper_checks(self):
        return [c for c in self.checks if c.kind is SliceKind.PROPER]

    @property
    def asymptotic_checks(self):
        return [c for c in self.checks if c.kind is SliceKind.INFINITY]

    @property
    def first_order_checks(self):
        return [c for c in self.checks if c.kind is SliceKind.FIRST_ORDER]

    def to_text(self) -> str:
        f = lambda v: format(float(v), ".17g")
        vec = lambda v: "(" + ", ".join(f(x) for x in v) + ")"
        lines = [
            f"order: {self.order}",
            f"base point: {vec(self.collection.base)}",
            "directions: " + (", ".join(vec(h) for h in self.collection.directions) or "none"),
            "stationarity residuals: " + (", ".join(f(r) for r in self.residuals) or "none"),
            f"tolerances: stationarity {f(self.stationarity_tol)}, violation {f(self.violation_tol)}",
            f"locality radius: {f(self.locality_radius)}",
            f"verdict: {self.verdict}",
        ]
        if self.certificate is not None:
            c = self.certificate
            lines.append(f"certificate: w = {vec(c.w)}, slice {c.kind.value}, value {f(c.value)}, "
                         f"membership {c.membership.status}")
        elif self.verdict is Verdict.CONSISTENT:
            lines.append("no violation found at this sampling resolution; "
                         "this is not a proof of local minimality")
        counts = {}
        for c in self.checks:
            key = (c.kind.value, str(c.membership.status))
            counts[key] = counts.get(key, 0) + 1
        for (kind, status), n in sorted(counts.items()):
            lines.append(f"checks {kind} {status}: {n}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        n = self.collection.dim
        out = io.StringIO()
        out.write(",".join(["index", "kind"] + [f"w{i + 1}" for i in range(n)] + ["status", "value"]) + "\n")
        for i, c in enumerate(self.checks):
            out.write(",".join([str(i), c.kind.value] + [format(float(x), ".17g") for x in c.w]
                               + [str(c.membership.status), format(float(c.value), ".17g")]) + "\n")
        return out.getvalue()


# --- condition values ---------------------------------------------------------------------

def stationarity_residuals(f: Expr, coll: DirectionCollection) -> np.ndarray:
    """Coefficients ``1..k-1`` of ``t -> f(x + sum t^i h_i)``."""
    if f.arity != coll.dim:
        raise ValueError("objective arity does not match the collection dimension")
    k = coll.order
    if k < 2:
        return np.zeros(0)
    jet = eval_on_arc(f, Arc(coll.base, coll.directions), k - 1)
    return np.array(jet.coeffs[1:k], dtype=float)


def condition_value(f: Expr, coll: DirectionCollection, w) -> float:
    """Left side of the proper condition: the ``t^k`` coefficient with tail ``t^k w``."""
    return sum_order_k(f, coll.base, coll.directions, w)


def _scale(f, coll):
    fx = float(evaluate(f, list(coll.base)))
    return 1.0 + abs(fx) + sum(float(np.linalg.norm(h)) for h in coll.directions)


def _proper_candidates(n, cfg: SampleConfig):
    D = grid_directions(n, cfg.resolution, cfg.seed)
    return np.vstack([np.zeros(n)] + [r * D for r in cfg.radii])


def _locality_radius(coll, W, cfg: SampleConfig, k):
    t0 = cfg.scan.schedule.t0
    P = coll.arc_points([t0])[0] - coll.base
    band = cfg.scan.infinity_band
    tau = t0 ** band.lo if isinstance(band, Band) else float(band.taus([t0])[0])
    tail = max(t0 ** k, t0 ** (k - 1) * tau)
    return float(np.linalg.norm(P) + tail * max(1.0, np.max(np.linalg.norm(W, axis=1))))


def _decide(checks, vtol, extended_found):
    accepted = [c for c in checks if c.membership.status is Status.ACCEPTED]
    bad = [c for c in accepted if c.value < -vtol]
    if bad:
        worst = min(bad, key=lambda c: c.value)  # first minimal row wins ties
        return Verdict.VIOLATED, Certificate(worst.w, worst.kind, worst.value, worst.membership)
    if accepted or extended_found:
        return Verdict.CONSISTENT, None
    return Verdict.INCONCLUSIVE, None


def check_collection(f: Expr, Q, coll: DirectionCollection,
                     cfg: SampleConfig | None = None) -> OptimalityReport:
    """Stationarity, proper and asymptotic conditions for one collection."""
    cfg = cfg or SampleConfig()
    if coll.order < 2:
        raise ValueError("a collection needs at least one direction")
    k, n = coll.order, coll.dim
    residuals = stationarity_residuals(f, coll)
    check = np.array([sum_order_s(f, coll.base, coll.directions, s) for s in range(1, k)])
    gap = float(np.max(np.abs(check - residuals) / (1.0 + np.abs(residuals))))
    scale = _scale(f, coll)
    stol = cfg.stationarity_rel * scale
    vtol = cfg.violation_rel * scale
    W_prop = _proper_candidates(n, cfg)
    W_inf = grid_directions(n, cfg.resolution, cfg.seed)
    radius = _locality_radius(coll, W_prop, cfg, k)
    if np.any(np.abs(residuals) > stol):
        return OptimalityReport(k, coll, residuals, [], Verdict.NOT_APPLICABLE, None, scale,
                                stol, vtol, radius, False, gap)

    checks = []
    prop = scan_directions(Q, coll, W_prop, SliceSpec(SliceKind.PROPER), cfg.scan)
    for w, v in zip(W_prop, prop):
        value = condition_value(f, coll, w)
        # the same coefficient through the jet route
        jet = eval_on_arc(f, Arc(coll.base, coll.directions, (w, k, 1.0)), k)
        gap = max(gap, abs(jet.coeffs[k] - value) / (1.0 + abs(value)))
        checks.append(CheckRow(w, SliceKind.PROPER, v, value))
    grad = gradient(f, coll.base)
    asym = scan_directions(Q, coll, W_inf, SliceSpec(SliceKind.INFINITY), cfg.scan)
    for w, v in zip(W_inf, asym):
        checks.append(CheckRow(w, SliceKind.INFINITY, v, float(grad @ w)))

    extended = False
    if not any(c.membership.status is Status.ACCEPTED for c in checks):
        ext = scan_directions(Q, coll, W_inf, SliceSpec(SliceKind.EXTENDED), cfg.scan)
        extended = any(v.status is Status.ACCEPTED for v in ext)
    verdict, cert = _decide(checks, vtol, extended)
    return OptimalityReport(k, coll, residuals, checks, verdict, cert, scale, stol, vtol,
                            radius, extended, gap)


def check_first_order(f: Expr, Q, base, cfg: SampleConfig | None = None) -> OptimalityReport:
    """``f'(x) h >= 0`` on sampled first-order tangent directions."""
    cfg = cfg or SampleConfig()
    base = np.asarray(base, dtype=float)
    if not contains(Q, base, 1e-8, cfg.scan.distance):
        raise ValueError("the base point is not in the set")
    coll = DirectionCollection(base)
    scale = _scale(f, coll)
    stol = cfg.stationarity_rel * scale
    vtol = cfg.violation_rel * scale
    H = grid_directions(len(base), cfg.resolution, cfg.seed)
    grad = gradient(f, base)
    verdicts = scan_directions(Q, coll, H, SliceSpec(SliceKind.FIRST_ORDER), cfg.scan)
    checks = [CheckRow(h, SliceKind.FIRST_ORDER, v, float(grad @ h)) for h, v in zip(H, verdicts)]
    verdict, cert = _decide(checks, vtol, False)
    return OptimalityReport(1, coll, np.zeros(0), checks, verdict, cert, scale, stol, vtol,
                            cfg.scan.schedule.t0)


# --- search ---------------------------------------------------------------------------------

@dataclass(eq=False)
class DisqualifyResult:
    verdict: Verdict
    report: OptimalityReport | None  # the first Violated report, if any
    reports: list

    def to_text(self) -> str:
        lines = [f"result: {self.verdict}", f"reports checked: {len(self.reports)}"]
        tally = {}
        for r in self.reports:
            tally[(r.order, str(r.verdict))] = tally.get((r.order, str(r.verdict)), 0) + 1
        for (k, v), n in sorted(tally.items()):
            lines.append(f"order {k} {v}: {n}")
        out = "\n".join(lines) + "\n"
        if self.report is not None:
            out += "\n" + self.report.to_text()
        elif self.verdict is Verdict.CONSISTENT:
            out += "no violation found at this sampling resolution; this is not a proof of local minimality\n"
        return out


def disqualify(f: Expr, Q, base, max_order: int, cfg: SampleConfig | None = None) -> DisqualifyResult:
    """Search sampled collections up to ``max_order`` for a violated condition.

    ``h_1`` runs over first-order tangent grid directions with ``f'(x) h_1 = 0``
    (to tolerance); each further direction over the accepted proper tangent
    vectors of the previous order plus zero.  Branches with no accepted proper
    vector are not extended.  The first Violated report is returned.
    """
    if not 2 <= max_order <= 6:
        raise ValueError("max_order must lie in 2..6")
    cfg = cfg or SampleConfig()
    base = np.asarray(base, dtype=float)
    reports = []
    fo = check_first_order(f, Q, base, cfg)
    reports.append(fo)
    if fo.verdict is Verdict.VIOLATED:
        return DisqualifyResult(Verdict.VIOLATED, fo, reports)

    frontier = [DirectionCollection(base, [c.w]) for c in fo.checks
                if c.membership.status is Status.ACCEPTED and abs(c.value) <= fo.stationarity_tol]
    for k in range(2, max_order + 1):
        next_frontier = []
        for coll in frontier[: cfg.max_branches]:
            rep = check_collection(f, Q, coll, cfg)
            reports.append(rep)
            if rep.verdict is Verdict.VIOLATED:
                return DisqualifyResult(Verdict.VIOLATED, rep, reports)
            if rep.verdict is Verdict.NOT_APPLICABLE or k == max_order:
                continue
            members = [c.w for c in rep.proper_checks if c.membership.status is Status.ACCEPTED]
            if not members:
                continue  # empty proper set: no admissible extension
            if not any(not np.any(w) for w in members):
                members.append(np.zeros(coll.dim))
            next_frontier.extend(coll.extend(w) for w in members)
        frontier = next_frontier
        if not frontier:
            break

    considered = [r for r in reports if r.verdict is not Verdict.NOT_APPLICABLE]
    if any(r.verdict is Verdict.CONSISTENT for r in considered):
        return DisqualifyResult(Verdict.CONSISTENT, None, reports)
    return DisqualifyResult(Verdict.INCONCLUSIVE, None, reports)
