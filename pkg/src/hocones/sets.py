"""Closed sets in R^n and the distance oracle ``d(x, Q)``.

Four representations are supported: implicit constraint systems, parametric
curves, finite point clouds and finite unions of these.  Every oracle works
on a batch of query points at once (``distances``); ``distance`` is the
single-point convenience wrapper.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .expr import Add, Call, Const, Div, Expr, Mul, Neg, Pow, Sub, Var, evaluate, parse
from .jets import Jet

__all__ = [
    "DistanceConfig", "DistanceResult", "OracleFailure", "PointCloud",
    "ParametricCurve", "Implicit", "Union", "distance", "distances", "contains",
    "cusp", "half_plane", "parabola", "whole_space", "BENCHMARKS",
]

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
_TIGHT = 1e-15  # violation level a polished point must keep


class OracleFailure(RuntimeError):
    """The oracle found no point satisfying the set description."""


@dataclass(frozen=True)
class DistanceConfig:
    grid_points: int = 4096
    refine_tol: float = 1e-12
    starts: int = 16
    feas_tol: float = 1e-10
    seed: int = 0


@dataclass(frozen=True)
class DistanceResult:
    value: float
    nearest: np.ndarray
    method: str


# --- point clouds -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray

    def __init__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[0] == 0:
            raise ValueError("a point cloud needs at least one point")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    method = "point-cloud"

    def _distances(self, X, cfg):
        vals = np.empty(len(X))
        near = np.empty_like(X)
        for lo in range(0, len(X), 512):
            chunk = X[lo:lo + 512]
            d2 = ((chunk[:, None, :] - self.points[None, :, :]) ** 2).sum(axis=2)
            idx = np.argmin(d2, axis=1)  # first index wins ties
            near[lo:lo + 512] = self.points[idx]
            vals[lo:lo + 512] = np.linalg.norm(chunk - self.points[idx], axis=1)
        return vals, near


# --- parametric curves ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ParametricCurve:
    """Curve ``s -> (c_1(s), ..., c_n(s))`` for ``s`` in ``domain``."""

    components: tuple
    domain: tuple
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        lo, hi = (float(v) for v in self.domain)
        if not lo < hi:
            raise ValueError("empty parameter domain")
        object.__setattr__(self, "domain", (lo, hi))
        for c in self.components:
            if c.arity != 1:
                raise ValueError("curve components must be functions of one parameter")

    method = "parametric"

    @property
    def dim(self) -> int:
        return len(self.components)

    def curve(self, s):
        s = np.asarray(s, dtype=float)
        out = np.empty(s.shape + (len(self.components),))
        for j, c in enumerate(self.components):
            out[..., j] = evaluate(c, [s])
        return out

    def _grid(self, G):
        if G not in self._cache:
            s = np.linspace(*self.domain, G)
            pts = self.curve(s)
            self._cache[G] = (s, pts, cKDTree(pts))
        return self._cache[G]

    def _phi(self, s, X):
        return ((self.curve(s) - X) ** 2).sum(axis=1)

    def _refine(self, a, b, X, iters):
        # vectorised golden-section search on [a, b]
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        fc, fd = self._phi(c, X), self._phi(d, X)
        for _ in range(iters):
            if np.all(b - a <= 4 * np.finfo(float).eps * np.maximum(np.abs(a), np.abs(b))):
                break  # every bracket is at floating-point resolution
            left = fc <= fd
            b = np.where(left, d, b)
            a = np.where(left, a, c)
            new_c = b - _GOLDEN * (b - a)
            new_d = a + _GOLDEN * (b - a)
            c, d = np.where(left, new_c, d), np.where(left, c, new_d)
            f_new = self._phi(np.where(left, c, d), X)
            fc, fd = np.where(left, f_new, fd), np.where(left, fc, f_new)
        s = np.where(fc <= fd, c, d)
        return self._newton(s, X)

    def _newton(self, s, X):
        lo, hi = self.domain
        phi = self._phi(s, X)
        for _ in range(8):
            u = [Jet((s, np.ones_like(s), np.zeros_like(s)))]
            g1 = np.zeros_like(s)
            g2 = np.zeros_like(s)
            for j, comp in enumerate(self.components):
                jet = evaluate(comp, u)
                if not isinstance(jet, Jet):
                    continue
                r = jet.coeffs[0] - X[:, j]
                c1, c2 = jet.coeffs[1], 2.0 * jet.coeffs[2]
                g1 += r * c1
                g2 += c1 * c1 + r * c2
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(g2 > 0, -g1 / g2, 0.0)
            trial = np.clip(s + step, lo, hi)
            phi_t = self._phi(trial, X)
            better = phi_t < phi
            s = np.where(better, trial, s)
            phi = np.where(better, phi_t, phi)
        return s, phi

    def _distances(self, X, cfg):
        s_grid, pts, tree = self._grid(cfg.grid_points)
        G = len(s_grid)
        k = min(8, G)
        _, idx = tree.query(X, k=k)
        idx = np.atleast_2d(idx).reshape(len(X), k)
        first = idx[:, 0]
        # best grid index outside the neighbourhood of the first one
        far = np.abs(idx - first[:, None]) > 2
        has_second = far.any(axis=1)
        second = np.where(has_second, idx[np.arange(len(X)), np.argmax(far, axis=1)], first)
        iters = int(np.ceil(np.log(cfg.refine_tol / max(s_grid[1] - s_grid[0], 1e-300))
                            / np.log(_GOLDEN)))
        iters = max(iters, 10)
        # refine both brackets in one vectorised pass
        cand = np.concatenate([first, second])
        a = s_grid[np.maximum(cand - 1, 0)]
        b = s_grid[np.minimum(cand + 1, G - 1)]
        s, phi = self._refine(a, b, np.vstack([X, X]), iters)
        m = len(X)
        best_s = s_grid[first]
        best_phi = ((pts[first] - X) ** 2).sum(axis=1)
        for half in (slice(0, m), slice(m, 2 * m)):
            better = phi[half] < best_phi
            best_s = np.where(better, s[half], best_s)
            best_phi = np.where(better, phi[half], best_phi)
        near = self.curve(best_s)
        return np.linalg.norm(X - near, axis=1), near


# --- implicit sets ----------------------------------------------------------------

def _value_and_grad(e: Expr, Y):
    """Values (M,) and gradients (M, n) of ``e`` at the rows of ``Y``."""
    M, n = Y.shape
    eye = np.eye(n)
    xs = [Jet((Y[:, j], np.broadcast_to(eye[j][:, None], (n, M)).copy())) for j in range(n)]
    out = evaluate(e, xs)
    if not isinstance(out, Jet):
        return np.full(M, float(out)), np.zeros((M, n))
    val = np.broadcast_to(out.coeffs[0], (M,))
    grad = np.broadcast_to(out.coeffs[1], (n, M)).T
    return np.array(val, dtype=float), np.array(grad, dtype=float)


@dataclass(frozen=True, eq=False)
class Implicit:
    """``{y : g(y) = 0 for g in equalities, h(y) <= 0 for h in inequalities}``."""

    dim: int
    equalities: tuple = ()
    inequalities: tuple = ()
    box: tuple = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "equalities", tuple(self.equalities))
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        for e in self.equalities + self.inequalities:
            if e.arity != self.dim:
                raise ValueError("constraint arity does not match the set dimension")
        box = self.box
        if box is None:
            box = (-10.0, 10.0)
        lo, hi = (np.broadcast_to(np.asarray(v, dtype=float), (self.dim,)).copy() for v in box)
        if np.any(lo >= hi):
            raise ValueError("empty bounding box")
        object.__setattr__(self, "box", (lo, hi))

    method = "implicit"

    @property
    def constraints(self):
        return self.equalities + self.inequalities

    def violation(self, Y):
        Y = np.atleast_2d(Y)
        v = np.zeros(len(Y))
        for g in self.equalities:
            v = np.maximum(v, np.abs(np.broadcast_to(evaluate(g, list(Y.T)), v.shape)))
        for h in self.inequalities:
            v = np.maximum(v, np.broadcast_to(evaluate(h, list(Y.T)), v.shape))
        return v

    def _seeds(self, cfg):
        key = ("seeds", cfg.starts, cfg.seed)
        if key not in self._cache:
            lo, hi = self.box
            if cfg.starts > 0:
                u = qmc.Halton(d=self.dim, scramble=True, seed=cfg.seed).random(cfg.starts)
                self._cache[key] = lo + u * (hi - lo)
            else:
                self._cache[key] = np.zeros((0, self.dim))
        return self._cache[key]

    def _eval_all(self, Y):
        vals, grads = [], []
        for e in self.constraints:
            v, g = _value_and_grad(e, Y)
            vals.append(v)
            grads.append(g)
        return np.stack(vals, axis=1), np.stack(grads, axis=1)  # (M, m), (M, m, n)

    def _violations(self, c):
        n_eq = len(self.equalities)
        v = np.abs(c)
        v[:, n_eq:] = np.maximum(c[:, n_eq:], 0.0)
        return v

    def _penalty_phase(self, Y, X):
        # Gauss-Newton steps on |y - x|^2 + rho * |violation|^2, backtracked on that merit
        eye = np.eye(self.dim)

        def merit(Z, idx, rho):
            c, _ = self._eval_all(Z)
            return ((Z - X[idx]) ** 2).sum(axis=1) + rho * (self._violations(c) ** 2).sum(axis=1)

        for rho in (1.0, 1e2, 1e4, 1e6, 1e8, 1e10):
            for _ in range(6):
                c, J = self._eval_all(Y)
                viol = self._violations(c)
                J = np.where((viol > 0)[:, :, None], J, 0.0)
                A = eye + rho * np.einsum("mki,mkj->mij", J, J)
                rhs = -((Y - X) + rho * np.einsum("mki,mk->mi", J, viol * np.sign(c)))
                D = _solve(A, rhs)
                Y = _backtrack(Y, D, lambda Z, idx: merit(Z, idx, rho), merit(Y, slice(None), rho))
        return Y

    def _restore(self, Y, iters=60, tol=0.0):
        # minimum-norm Gauss-Newton steps towards the violated constraints
        for _ in range(iters):
            c, J = self._eval_all(Y)
            viol = self._violations(c)
            total = viol.max(axis=1)
            todo = total > tol
            if not todo.any():
                break
            act = viol > 0
            Jn = np.where(act[:, :, None], J, 0.0)
            A = np.einsum("mki,mli->mkl", Jn, Jn)
            scale = np.maximum(np.abs(A).max(axis=(1, 2)), 1e-300)
            A = A + np.eye(Jn.shape[1]) * (1e-13 * scale[:, None, None] + (~act)[:, None, :])
            lam = _solve(A, np.where(act, c, 0.0))
            D = -np.einsum("mki,mk->mi", Jn, lam)
            D[~todo] = 0.0
            Y = _backtrack(Y, D, lambda Z, idx: self._violations(self._eval_all(Z)[0]).max(axis=1), total)
        return Y

    def _polish(self, Y, X, iters=60):
        # projection steps onto the linearised active constraints; a (shortened)
        # step is restored to feasibility and kept only if it gets closer to x
        n_eq = len(self.equalities)
        live = np.ones(len(Y), dtype=bool)
        for _ in range(iters):
            if not live.any():
                break
            idx = np.flatnonzero(live)
            Yl, Xl = Y[idx], X[idx]
            c, J = self._eval_all(Yl)
            gnorm = np.linalg.norm(J, axis=2)
            active = np.ones_like(c, dtype=bool)
            active[:, n_eq:] = c[:, n_eq:] >= -1e-9 * (1.0 + gnorm[:, n_eq:])
            active &= gnorm > 1e-300
            for _inner in range(c.shape[1] + 1):
                Yn, lam = _kkt_step(c, J, gnorm, active, Xl, Yl)
                wrong = np.zeros_like(active)
                wrong[:, n_eq:] = active[:, n_eq:] & (lam[:, n_eq:] < 0)
                if not wrong.any():
                    break
                active &= ~wrong
            D = np.where(np.isfinite(Yn), Yn - Yl, 0.0)
            cur = np.linalg.norm(Yl - Xl, axis=1)
            cur_viol = self.violation(Yl)
            moved = np.zeros(len(idx), dtype=bool)
            pending = np.linalg.norm(D, axis=1) > 4 * np.finfo(float).eps * (1.0 + cur)
            step = 1.0
            for _half in range(12):
                if not pending.any():
                    break
                sub = np.flatnonzero(pending)
                trial = self._restore(Yl[sub] + step * D[sub], iters=8, tol=_TIGHT)
                ok = (self.violation(trial) <= np.maximum(cur_viol[sub], _TIGHT)) & (
                    np.linalg.norm(trial - Xl[sub], axis=1) < cur[sub])
                Yl[sub[ok]] = trial[ok]
                moved[sub[ok]] = True
                pending[sub[ok]] = False
                step *= 0.5
            Y[idx] = Yl
            live[idx[~moved]] = False
        return Y

    @property
    def is_polyhedral(self) -> bool:
        return all(_degree(e.root) <= 1 for e in self.constraints)

    def _distances(self, X, cfg):
        M, n = X.shape
        if not self.constraints:
            return np.zeros(M), X.copy()
        if self.is_polyhedral:
            # convex: the local projection from x itself is the global one
            with np.errstate(all="ignore"):
                Y = self._polish(self._restore(X.copy(), iters=100), X)
            if np.any(self.violation(Y) > cfg.feas_tol):
                raise OracleFailure("no feasible point found for a polyhedral set")
            return np.linalg.norm(Y - X, axis=1), Y
        seeds = self._seeds(cfg)
        S = 1 + len(seeds)
        starts = np.concatenate([X[:, None, :], np.broadcast_to(seeds, (M,) + seeds.shape)], axis=1)
        Y0 = starts.reshape(M * S, n)
        Xr = np.repeat(X, S, axis=0)
        with np.errstate(all="ignore"):
            # two candidates per start: the penalty path, and a direct
            # feasibility restoration that keeps the starts spread over Q
            Y = np.concatenate([self._penalty_phase(Y0.copy(), Xr), Y0.copy()])
            Xr = np.concatenate([Xr, Xr])
            Y = self._restore(Y, iters=100)
            Y = self._polish(Y, Xr)
            S *= 2
            Y = Y.reshape(2, M, S // 2, n).transpose(1, 0, 2, 3).reshape(M * S, n)
            Xr = np.repeat(X, S, axis=0)
            viol = self.violation(Y).reshape(M, S)
        dist = np.linalg.norm(Y - Xr, axis=1).reshape(M, S)
        ok = np.isfinite(viol) & (viol <= cfg.feas_tol) & np.isfinite(dist)
        dist = np.where(ok, dist, np.inf)
        best = np.argmin(dist, axis=1)
        if not ok.any(axis=1).all():
            bad = np.flatnonzero(~ok.any(axis=1))
            raise OracleFailure(f"no feasible point found for query {X[bad[0]].tolist()}")
        Y = Y.reshape(M, S, n)
        near = Y[np.arange(M), best]
        return dist[np.arange(M), best], near


def _degree(node) -> float:
    """Polynomial degree of an AST (``inf`` for anything non-polynomial)."""
    if isinstance(node, Const):
        return 0
    if isinstance(node, Var):
        return 1
    if isinstance(node, Neg):
        return _degree(node.arg)
    if isinstance(node, (Add, Sub)):
        return max(_degree(node.left), _degree(node.right))
    if isinstance(node, Mul):
        return _degree(node.left) + _degree(node.right)
    if isinstance(node, Div):
        return _degree(node.left) if _degree(node.right) == 0 else np.inf
    if isinstance(node, Pow):
        return _degree(node.base) * node.exponent
    if isinstance(node, Call):
        return 0 if _degree(node.arg) == 0 else np.inf
    return np.inf


def _solve(A, b):
    try:
        out = np.linalg.solve(A, b[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError:
        out = np.einsum("mij,mj->mi", np.linalg.pinv(A), b)
    return np.where(np.isfinite(out), out, 0.0)


def _backtrack(Y, D, merit, current, halvings=30):
    """Largest step ``2^-j D`` that does not increase ``merit``, per row."""
    out = Y.copy()
    pending = np.any(D != 0, axis=1)
    step = 1.0
    for _ in range(halvings):
        if not pending.any():
            break
        idx = np.flatnonzero(pending)
        trial = Y[idx] + step * D[idx]
        m = merit(trial, idx)
        good = np.isfinite(m) & (m <= current[idx])
        out[idx[good]] = trial[good]
        pending[idx[good]] = False
        step *= 0.5
    return out


def _kkt_step(c, J, gnorm, active, X, Y):
    """Projection of X onto the linearisation of the active constraints at Y."""
    M, m, n = J.shape
    safe = np.where(gnorm > 0, gnorm, 1.0)
    Jn = np.where(active[:, :, None], J / safe[:, :, None], 0.0)
    cn = np.where(active, c / safe, 0.0)
    A = np.einsum("mki,mli->mkl", Jn, Jn)
    A = A + np.eye(m) * (~active)[:, None, :] + 1e-14 * np.eye(m)
    rhs = cn + np.einsum("mki,mi->mk", Jn, X - Y)
    lam = _solve(A, rhs)
    Yn = X - np.einsum("mki,mk->mi", Jn, lam)
    return Yn, lam


# --- unions ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Union:
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("a union needs at least one member")
        if len({m.dim for m in members}) != 1:
            raise ValueError("union members must share the dimension")
        object.__setattr__(self, "members", members)

    method = "union"

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def _distances(self, X, cfg):
        results = [m._distances(X, cfg) for m in self.members]
        vals = np.stack([r[0] for r in results], axis=1)
        k = np.argmin(vals, axis=1)  # lowest member index on ties
        near = np.stack([r[1] for r in results], axis=1)[np.arange(len(X)), k]
        return vals[np.arange(len(X)), k], near


# --- public API -------------------------------------------------------------------------

def distances(Q, X, cfg: DistanceConfig | None = None):
    """Distances from each row of ``X`` to ``Q``; returns ``(values, nearest)``."""
    cfg = cfg or DistanceConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != Q.dim:
        raise ValueError(f"query dimension {X.shape[1]} does not match set dimension {Q.dim}")
    if len(X) == 0:
        return np.zeros(0), X.copy()
    return Q._distances(X, cfg)


def distance(Q, x, cfg: DistanceConfig | None = None) -> DistanceResult:
    vals, near = distances(Q, np.asarray(x, dtype=float)[None, :], cfg)
    return DistanceResult(float(vals[0]), near[0], Q.method)


def contains(Q, x, tol: float, cfg: DistanceConfig | None = None) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return distance(Q, x, cfg).value <= tol


# --- benchmark sets ----------------------------------------------------------------------

def cusp(kind: str = "parametric"):
    """``{x1 >= 0, x1^2 = x2^3}``; the parametric form ``s -> (s^3, s^2)`` is the reference."""
    if kind == "parametric":
        return ParametricCurve((parse("s^3", ["s"]), parse("s^2", ["s"])), (0.0, 2.0))
    if kind == "implicit":
        return Implicit(2, [parse("x1^2 - x2^3", 2)], [parse("-x1", 2)])
    raise ValueError(f"unknown cusp representation {kind!r}")


def half_plane():
    """``{x1 >= 0}`` in the plane."""
    return Implicit(2, [], [parse("-x1", 2)])


def parabola(kind: str = "parametric"):
    """``{x2 = x1^2}``."""
    if kind == "parametric":
        return ParametricCurve((parse("s", ["s"]), parse("s^2", ["s"])), (-2.0, 2.0))
    if kind == "implicit":
        return Implicit(2, [parse("x2 - x1^2", 2)], [])
    raise ValueError(f"unknown parabola representation {kind!r}")


def whole_space(n: int = 2):
    return Implicit(n, [], [])


BENCHMARKS = {
    "cusp": cusp,
    "half-plane": half_plane,
    "parabola": parabola,
}
