"""Membership tests for tangent cones of first and higher order.

Every test follows one recipe: walk down a geometric schedule of scales
``t_j``, place a point on the relevant polynomial arc, ask the distance
oracle how far it is from ``Q``, divide by the scale of the tail and look at
how that ratio behaves as ``t_j -> 0``.  The three-valued verdict rule turns
the resulting sequence into Accepted / Rejected / Inconclusive.

Arcs and scales, with ``P(t) = x + t h_1 + ... + t^(k-1) h_(k-1)``:

* first order: ``x + t h``, scale ``t``
* proper:      ``P(t) + t^k w``, scale ``t^k``
* slices:      ``P(t) + t^(k-1) tau w``, scale ``t^(k-1) tau``

For the slices ``tau`` is either tied to ``t`` (``tau = alpha t``) or chosen
per level inside an exponent band ``tau = t^e, e in [lo, hi]`` so that the
liminf over the second parameter is approximated by a small 1-D search.
"""
from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.stats import norm, qmc

from .sets import DistanceConfig, OracleFailure, distances

__all__ = [
    "Status", "Proportional", "PowerLaw", "Band", "RefinementSchedule", "VerdictRule",
    "ScanConfig", "MembershipVerdict", "SliceKind", "SliceSpec", "DirectionCollection",
    "member_first_order", "member_proper", "member_slice", "scan_directions",
    "is_admissible", "is_polynomially_admissible", "sample_cone", "grid_directions",
]

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class Status(str, enum.Enum):
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


# --- schedules ---------------------------------------------------------------------

@dataclass(frozen=True)
class Proportional:
    """``tau = alpha * t``."""
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def taus(self, ts):
        return self.alpha * np.asarray(ts, dtype=float)


@dataclass(frozen=True)
class PowerLaw:
    """``tau = t ** exponent``; exponent > 1 drives tau/t to 0, exponent < 1 to infinity."""
    exponent: float

    def __post_init__(self):
        if not self.exponent > 0:
            raise ValueError("exponent must be positive")

    def taus(self, ts):
        return np.asarray(ts, dtype=float) ** self.exponent


@dataclass(frozen=True)
class Band:
    """``tau = t ** e`` with ``e`` chosen per level in ``[lo, hi]`` to minimise the scaled distance."""
    lo: float
    hi: float

    def __post_init__(self):
        if not 0 < self.lo <= self.hi:
            raise ValueError("need 0 < lo <= hi")


@dataclass(frozen=True)
class RefinementSchedule:
    t0: float = 0.1
    ratio: float = 0.25
    levels: int = 24

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.levels < 1:
            raise ValueError("need at least one level")

    def ts(self) -> np.ndarray:
        return self.t0 * self.ratio ** np.arange(self.levels)


@dataclass(frozen=True)
class VerdictRule:
    accept_tol: float = 1e-6
    reject_floor: float = 1e-2
    warmup: int = 4
    terminal: int = 3

    def decide(self, scaled: np.ndarray) -> tuple[Status, int | None]:
        """Apply the rule to a sequence of scaled distances (finite prefix only)."""
        scaled = np.asarray(scaled, dtype=float)
        finite = np.isfinite(scaled) | np.isposinf(scaled)
        if not finite.all():
            scaled = scaled[: np.argmin(finite)]
        J = len(scaled)
        if J < self.warmup + self.terminal:
            return Status.INCONCLUSIVE, None
        tail = scaled[J - self.terminal:]
        slack = 0.01 * self.accept_tol
        if np.all(tail <= self.accept_tol) and np.all(np.diff(tail) <= slack):
            return Status.ACCEPTED, J - self.terminal
        if np.all(scaled[self.warmup:] >= self.reject_floor):
            return Status.REJECTED, self.warmup
        return Status.INCONCLUSIVE, None


@dataclass(frozen=True)
class ScanConfig:
    schedule: RefinementSchedule = field(default_factory=RefinementSchedule)
    rule: VerdictRule = field(default_factory=VerdictRule)
    distance: DistanceConfig = field(default_factory=DistanceConfig)
    zero_band: Band | PowerLaw | Proportional = Band(1.25, 2.0)
    infinity_band: Band | PowerLaw | Proportional = Band(0.25, 0.75)
    extended_band: Band | PowerLaw | Proportional = Band(0.25, 2.0)
    band_grid: int = 25
    band_iters: int = 45
    poly_tol: float = 1e-9


# --- verdicts --------------------------------------------------------------------------

_EVIDENCE_COLUMNS = ("level", "t", "tau", "ratio", "distance", "scaledDistance")


def _fmt(x) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class MembershipVerdict:
    status: Status
    evidence: np.ndarray  # rows (level, t, tau, ratio, distance, scaledDistance)
    decisive_level: int | None = None
    note: str = ""

    def __eq__(self, other):
        if not isinstance(other, MembershipVerdict):
            return NotImplemented
        return (self.status == other.status and self.decisive_level == other.decisive_level
                and self.note == other.note and self.evidence.shape == other.evidence.shape
                and bool(np.all((self.evidence == other.evidence)
                                | (np.isnan(self.evidence) & np.isnan(other.evidence)))))

    @property
    def scaled(self) -> np.ndarray:
        return self.evidence[:, 5]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(_EVIDENCE_COLUMNS) + "\n")
        for row in self.evidence:
            out.write(",".join([str(int(row[0]))] + [_fmt(v) for v in row[1:]]) + "\n")
        return out.getvalue()


def _inconclusive(note: str, J: int = 0) -> MembershipVerdict:
    return MembershipVerdict(Status.INCONCLUSIVE, np.zeros((J, 6)), None, note)


# --- slices and collections --------------------------------------------------------------

class SliceKind(str, enum.Enum):
    FIRST_ORDER = "first-order"
    PROPER = "proper"
    ALPHA = "alpha"
    ZERO = "zero"
    INFINITY = "infinity"
    EXTENDED = "extended"


@dataclass(frozen=True)
class SliceSpec:
    kind: SliceKind
    alpha: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SliceKind(self.kind))
        if self.kind is SliceKind.ALPHA:
            if self.alpha is None or not np.isfinite(self.alpha) or self.alpha <= 0:
                raise ValueError("an alpha slice needs a finite positive alpha")
        elif self.alpha is not None:
            raise ValueError("only the alpha slice takes a parameter")

    @classmethod
    def parse(cls, text: str) -> "SliceSpec":
        """``'infinity'``, ``'alpha:2'``, ``'first-order'`` and so on."""
        name, _, arg = text.strip().lower().partition(":")
        name = name.replace("_", "-")
        if name == "firstorder":
            name = "first-order"
        try:
            kind = SliceKind(name)
        except ValueError:
            raise ValueError(f"unknown slice kind {name!r}") from None
        if kind is SliceKind.ALPHA:
            if not arg:
                raise ValueError("alpha slice needs a value, e.g. alpha:2")
            return cls(kind, float(arg))
        if arg:
            raise ValueError(f"slice {name!r} takes no parameter")
        return cls(kind)

    def __str__(self):
        return f"alpha:{self.alpha!r}" if self.kind is SliceKind.ALPHA else self.kind.value


@dataclass(frozen=True)
class DirectionCollection:
    """Base point and ordered directions ``(h_1, ..., h_(k-1))``; order ``k = len + 1``."""

    base: np.ndarray
    directions: tuple = ()

    def __init__(self, base, directions=()):
        base = np.asarray(base, dtype=float).copy()
        if base.ndim != 1:
            raise ValueError("base point must be a vector")
        dirs = tuple(np.asarray(h, dtype=float).copy() for h in directions)
        if any(h.shape != base.shape for h in dirs):
            raise ValueError("all directions must match the base point dimension")
        base.setflags(write=False)
        for h in dirs:
            h.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "directions", dirs)

    @property
    def dim(self) -> int:
        return len(self.base)

    @property
    def order(self) -> int:
        return len(self.directions) + 1

    def __eq__(self, other):
        return (isinstance(other, DirectionCollection) and np.array_equal(self.base, other.base)
                and len(self.directions) == len(other.directions)
                and all(np.array_equal(a, b) for a, b in zip(self.directions, other.directions)))

    def __hash__(self):
        return hash((self.base.tobytes(),) + tuple(h.tobytes() for h in self.directions))

    def __repr__(self):
        return f"DirectionCollection({self.base.tolist()}, {[h.tolist() for h in self.directions]})"

    def extend(self, h) -> "DirectionCollection":
        return DirectionCollection(self.base, self.directions + (np.asarray(h, dtype=float),))

    def rescaled(self, beta: float) -> "DirectionCollection":
        """``(beta h_1, beta^2 h_2, ...)``."""
        return DirectionCollection(self.base, [beta ** i * h for i, h in enumerate(self.directions, 1)])

    def arc_points(self, ts) -> np.ndarray:
        """``x + sum t^i h_i`` for each ``t`` in ``ts``; shape ``(len(ts), n)``."""
        ts = np.asarray(ts, dtype=float)
        P = np.broadcast_to(self.base, (len(ts), self.dim)).copy()
        for i, h in enumerate(self.directions, start=1):
            P += (ts ** i)[:, None] * h
        return P


# --- scan core ------------------------------------------------------------------------------

def _evaluate(Q, P, W, sigma, dcfg):
    """Scaled distances of ``P + sigma * W`` (all arrays broadcast over leading axes).

    Points whose tail was swallowed by rounding are reported as ``inf`` with
    ``valid = False`` so they never count as evidence for either verdict.
    """
    pts = P + sigma[..., None] * W
    tail = pts - P
    wnorm = np.linalg.norm(W, axis=-1)
    err = np.linalg.norm(tail - sigma[..., None] * W, axis=-1)
    valid = err <= 1e-3 * sigma * wnorm
    shape = pts.shape[:-1]
    flat = pts.reshape(-1, pts.shape[-1])
    d, _ = distances(Q, flat, dcfg)
    d = d.reshape(shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(valid, d / sigma, np.inf)
    return d, scaled, valid


def _scan_fixed(Q, P, W, ts, k, tau, dcfg):
    # P: (J, n), W: (R, n), tau: (J,)
    sigma = np.broadcast_to(ts ** (k - 1) * tau, (len(W), len(ts)))
    d, scaled, valid = _evaluate(Q, P[None], W[:, None, :], sigma, dcfg)
    taus = np.broadcast_to(tau, sigma.shape)
    return taus, d, scaled, valid


def _scan_band(Q, P, W, ts, k, band, cfg):
    """Per-level minimisation of the scaled distance over ``tau = t^e``, ``e`` in the band."""
    R, J = len(W), len(ts)
    logt = np.log(ts)[None, :]
    base = ts[None, :] ** (k - 1)

    def f(e):
        # e: (R, J, m)
        tau = np.exp(e * logt[..., None])
        sigma = base[..., None] * tau
        d, scaled, valid = _evaluate(Q, P[None, :, None, :], W[:, None, None, :], sigma, cfg.distance)
        return tau, d, scaled

    grid = np.linspace(band.lo, band.hi, cfg.band_grid)
    E = np.broadcast_to(grid, (R, J, len(grid)))
    tau_g, d_g, s_g = f(E)
    best = np.argmin(s_g, axis=2)
    pick = lambda A, i: np.take_along_axis(A, i[..., None], axis=2)[..., 0]
    best_e = pick(E, best)
    best_tau, best_d, best_s = pick(tau_g, best), pick(d_g, best), pick(s_g, best)
    if cfg.band_iters > 0 and len(grid) > 1:
        step = grid[1] - grid[0]
        a = np.clip(best_e - step, band.lo, band.hi)
        b = np.clip(best_e + step, band.lo, band.hi)
        c = b - _GOLDEN * (b - a)
        dd = a + _GOLDEN * (b - a)
        fc = f(c[..., None])[2][..., 0]
        fd = f(dd[..., None])[2][..., 0]
        for _ in range(cfg.band_iters):
            left = fc <= fd
            b = np.where(left, dd, b)
            a = np.where(left, a, c)
            new_c = b - _GOLDEN * (b - a)
            new_d = a + _GOLDEN * (b - a)
            c, dd = np.where(left, new_c, dd), np.where(left, c, new_d)
            f_new = f(np.where(left, c, dd)[..., None])[2][..., 0]
            fc, fd = np.where(left, f_new, fd), np.where(left, fc, f_new)
        e_star = np.where(fc <= fd, c, dd)
        tau_s, d_s, s_s = (v[..., 0] for v in f(e_star[..., None]))
        better = s_s < best_s
        best_tau = np.where(better, tau_s, best_tau)
        best_d = np.where(better, d_s, best_d)
        best_s = np.where(better, s_s, best_s)
    valid = np.isfinite(best_s)
    return best_tau, best_d, best_s, valid


def _verdicts(ts, taus, d, scaled, valid, rule, note=""):
    out = []
    J = len(ts)
    for r in range(len(scaled)):
        s = np.where(valid[r], scaled[r], np.nan)
        ev = np.column_stack([np.arange(J), ts, taus[r], taus[r] / ts,
                              np.where(valid[r], d[r], np.nan), s])
        status, level = rule.decide(s)
        n = note
        if not valid[r].all():
            cut = int(np.argmin(valid[r]))
            n = (note + "; " if note else "") + f"rounding floor reached at level {cut}"
        out.append(MembershipVerdict(status, ev, level, n))
    return out


def _scan(Q, coll: DirectionCollection, W, kind: SliceKind, alpha, cfg: ScanConfig):
    ts = cfg.schedule.ts()
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if W.shape[1] != coll.dim or Q.dim != coll.dim:
        raise ValueError("dimension mismatch between set, collection and directions")
    J = len(ts)
    try:
        if kind is SliceKind.FIRST_ORDER:
            P = np.broadcast_to(coll.base, (J, coll.dim))
            taus, d, scaled, valid = _scan_fixed(Q, P, W, ts, 1, ts, cfg.distance)
        else:
            k = coll.order
            P = coll.arc_points(ts)
            if kind is SliceKind.PROPER:
                taus, d, scaled, valid = _scan_fixed(Q, P, W, ts, k, ts, cfg.distance)
            elif kind is SliceKind.ALPHA:
                taus, d, scaled, valid = _scan_fixed(Q, P, W, ts, k, Proportional(alpha).taus(ts),
                                                     cfg.distance)
            else:
                band = {SliceKind.ZERO: cfg.zero_band, SliceKind.INFINITY: cfg.infinity_band,
                        SliceKind.EXTENDED: cfg.extended_band}[kind]
                if isinstance(band, Band):
                    taus, d, scaled, valid = _scan_band(Q, P, W, ts, k, band, cfg)
                else:
                    taus, d, scaled, valid = _scan_fixed(Q, P, W, ts, k, band.taus(ts), cfg.distance)
    except OracleFailure as exc:
        return [_inconclusive(f"oracle failure: {exc}") for _ in W]
    return _verdicts(ts, taus, d, scaled, valid, cfg.rule)


# --- public membership tests -----------------------------------------------------------

def _cfg(cfg, sched):
    cfg = cfg or ScanConfig()
    if sched is not None:
        cfg = replace(cfg, schedule=sched)
    return cfg


def _trivial(note):
    return MembershipVerdict(Status.ACCEPTED, np.zeros((0, 6)), None, note)


def scan_directions(Q, coll: DirectionCollection, W, slice: SliceSpec,
                    cfg: ScanConfig | None = None) -> list[MembershipVerdict]:
    """Verdicts for every row of ``W`` under one slice, sharing a single batched scan."""
    cfg = cfg or ScanConfig()
    W = np.atleast_2d(np.asarray(W, dtype=float))
    kind = slice.kind
    if kind is not SliceKind.FIRST_ORDER and coll.order < 2:
        raise ValueError("this test needs at least one direction (order k >= 2)")
    if kind is SliceKind.INFINITY:
        nrm = np.linalg.norm(W, axis=1, keepdims=True)
        W = np.where(nrm > 0, W / np.where(nrm > 0, nrm, 1.0), W)
    results: list = [None] * len(W)
    todo = list(range(len(W)))
    if kind is SliceKind.FIRST_ORDER:
        for i in list(todo):
            if not np.any(W[i]):
                results[i] = _trivial("h = 0 is always tangent")
                todo.remove(i)
    if todo:
        for i, v in zip(todo, _scan(Q, coll, W[todo], kind, slice.alpha, cfg)):
            results[i] = v
    return results


def member_first_order(Q, base, h, sched: RefinementSchedule | None = None,
                       cfg: ScanConfig | None = None) -> MembershipVerdict:
    """Is ``h`` in the contingent cone of ``Q`` at ``base``?"""
    cfg = _cfg(cfg, sched)
    return scan_directions(Q, DirectionCollection(base), [h], SliceSpec(SliceKind.FIRST_ORDER), cfg)[0]


def member_proper(Q, coll: DirectionCollection, w, sched: RefinementSchedule | None = None,
                  cfg: ScanConfig | None = None) -> MembershipVerdict:
    """Is ``w`` a proper tangent vector of order ``k`` along ``coll``?"""
    cfg = _cfg(cfg, sched)
    return scan_directions(Q, coll, [w], SliceSpec(SliceKind.PROPER), cfg)[0]


def member_slice(Q, coll: DirectionCollection, w, slice: SliceSpec,
                 cfg: ScanConfig | None = None) -> MembershipVerdict:
    if slice.kind is SliceKind.FIRST_ORDER:
        raise ValueError("use member_first_order for the first-order cone")
    return scan_directions(Q, coll, [w], slice, cfg)[0]


def is_admissible(Q, coll: DirectionCollection, cfg: ScanConfig | None = None) -> list[MembershipVerdict]:
    """Chain of verdicts ``h_1 in T, h_2 in T^2_pr(h_1), ..., h_(k-1) in T^(k-1)_pr(...)``."""
    if coll.order < 2:
        raise ValueError("need at least one direction")
    cfg = cfg or ScanConfig()
    H = coll.directions
    out = [member_first_order(Q, coll.base, H[0], cfg=cfg)]
    for s in range(1, len(H)):
        out.append(member_proper(Q, DirectionCollection(coll.base, H[:s]), H[s], cfg=cfg))
    return out


def is_polynomially_admissible(Q, coll: DirectionCollection,
                               cfg: ScanConfig | None = None) -> MembershipVerdict:
    """Does the arc ``x + sum t^i h_i`` itself stay in ``Q`` as ``t -> 0``?

    The distance at level ``j`` is compared with ``poly_tol * (1 + |x|) * t_j^k``,
    i.e. the arc must meet ``Q`` to higher order than any order-k tail could see.
    """
    if coll.order < 2:
        raise ValueError("need at least one direction")
    cfg = cfg or ScanConfig()
    ts = cfg.schedule.ts()
    J, k = len(ts), coll.order
    P = coll.arc_points(ts)
    try:
        d, _ = distances(Q, P, cfg.distance)
    except OracleFailure as exc:
        return _inconclusive(f"oracle failure: {exc}")
    scale = ts ** k
    scaled = d / scale
    ev = np.column_stack([np.arange(J), ts, ts, np.ones(J), d, scaled])
    rule = cfg.rule
    tol = cfg.poly_tol * (1.0 + np.linalg.norm(coll.base))
    if J >= rule.terminal and np.all(scaled[J - rule.terminal:] <= tol):
        return MembershipVerdict(Status.ACCEPTED, ev, J - rule.terminal)
    if J > rule.warmup and np.all(scaled[rule.warmup:] >= rule.reject_floor):
        return MembershipVerdict(Status.REJECTED, ev, rule.warmup)
    return MembershipVerdict(Status.INCONCLUSIVE, ev, None)


# --- sampling ---------------------------------------------------------------------------------

def grid_directions(n: int, resolution: int, seed: int = 0) -> np.ndarray:
    """Deterministic unit directions.

    In the plane: ``resolution`` equally spaced angles starting at 0.  In
    higher dimension: scrambled Halton points pushed through the normal
    quantile function and normalised.
    """
    if resolution < 1:
        raise ValueError("resolution must be positive")
    if n == 1:
        return np.array([[1.0], [-1.0]])[: max(resolution, 1)]
    if n == 2:
        ang = 2 * np.pi * np.arange(resolution) / resolution
        D = np.column_stack([np.cos(ang), np.sin(ang)])
        D[np.abs(D) < 1e-15] = 0.0
        return D
    u = qmc.Halton(d=n, scramble=True, seed=seed).random(resolution)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_cone(Q, coll: DirectionCollection, slice: SliceSpec, resolution: int,
                cfg: ScanConfig | None = None, seed: int = 0):
    """``[(unit direction, verdict), ...]`` over the direction grid."""
    D = grid_directions(coll.dim, resolution, seed)
    return list(zip(D, scan_directions(Q, coll, D, slice, cfg)))
