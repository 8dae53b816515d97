"""C^1 distance between submanifolds and averaging of almost invariant ones.

Model geometries: Euclidean space R^m and the unit sphere S^m (embedded in
R^(m+1)), each with a finite group of isometries.  Submanifolds are
codimension one:

* ``closed-curve`` -- a closed curve in R^2 or on S^2, sampled at uniform
  parameter values and interpolated by trigonometric (Fourier) interpolation;
* ``patch`` -- a surface patch in R^3 sampled on a grid and interpolated
  piecewise linearly on its triangulation.
"""
import json
from dataclasses import dataclass

import numpy as np

from .errors import (BoundViolated, DimensionMismatch, HypothesisViolated, NoConvergence,
                     NotAGraph, NotAGroup, ParseError, UnknownIsometry)
from .parallel import pmap

EPSILON_LIMIT = 1 / 20000
BOUND_FACTOR = 136.0

ORTHO_TOL = 1e-12


class AmbientSpace:
    """R^m (``kind="R"``) or S^m (``kind="S"``) with a finite isometry group.

    Each isometry is ``(Q, t)`` acting as ``x -> Q x + t``; on the sphere
    ``t`` must be zero.  ``scale`` multiplies all lengths (not angles).
    """

    def __init__(self, kind, dim, isometries=None, scale=1.0):
        if kind not in ("R", "S"):
            raise ValueError(f"unknown ambient kind {kind!r}")
        self.kind = kind
        self.dim = dim
        self.coord_dim = dim if kind == "R" else dim + 1
        self.scale = float(scale)
        D = self.coord_dim
        if isometries is None:
            isometries = [np.eye(D)]
        group = []
        for item in isometries:
            if isinstance(item, tuple):
                Q, t = item
            else:
                Q, t = item, np.zeros(D)
            Q = np.asarray(Q, dtype=float)
            t = np.asarray(t, dtype=float).reshape(-1)
            if Q.shape != (D, D) or t.shape != (D,):
                raise DimensionMismatch(f"isometry has the wrong shape for {kind}^{dim}")
            if np.linalg.norm(Q.T @ Q - np.eye(D)) > ORTHO_TOL:
                raise ValueError("isometry matrix is not orthogonal")
            if kind == "S" and np.any(t):
                raise ValueError("sphere isometries cannot translate")
            group.append((Q, t))
        self.isometries = group
        self._check_group()

    def _check_group(self):
        for Q1, t1 in self.isometries:
            for Q2, t2 in self.isometries:
                if self.index_of((Q1 @ Q2, Q1 @ t2 + t1)) is None:
                    raise NotAGroup("isometries are not closed under composition")
        if self.index_of((np.eye(self.coord_dim), np.zeros(self.coord_dim))) is None:
            raise NotAGroup("isometry list lacks the identity")

    def index_of(self, g, tol=1e-9):
        Q, t = g
        for i, (Q2, t2) in enumerate(self.isometries):
            if np.allclose(Q, Q2, atol=tol) and np.allclose(t, t2, atol=tol):
                return i
        return None

    def __len__(self):
        return len(self.isometries)

    def exp(self, x, v):
        """Exponential map at points ``x`` (rows) applied to tangent vectors ``v``."""
        if self.kind == "R":
            return x + v
        theta = np.linalg.norm(v, axis=-1, keepdims=True)
        safe = np.where(theta > 0, theta, 1.0)
        y = np.cos(theta) * x + np.sin(theta) * v / safe
        return y / np.linalg.norm(y, axis=-1, keepdims=True)

    def to_json(self):
        group = []
        for Q, t in self.isometries:
            entry = {"matrix": Q.tolist()}
            if np.any(t):
                entry["translation"] = t.tolist()
            group.append(entry)
        return {"ambient": {"kind": self.kind, "dim": self.dim}, "group": group,
                "scale": self.scale}

    @classmethod
    def from_json(cls, obj):
        try:
            amb = obj["ambient"]
            group = []
            for g in obj.get("group", []):
                if isinstance(g, dict):
                    Q = np.array(g["matrix"], dtype=float)
                    t = np.array(g.get("translation", [0.0] * len(Q)), dtype=float)
                else:
                    Q = np.array(g, dtype=float)
                    t = np.zeros(len(Q))
                group.append((Q, t))
            return cls(amb["kind"], int(amb["dim"]), group or None, obj.get("scale", 1.0))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, (NotAGroup, DimensionMismatch)):
                raise
            raise ParseError(f"malformed ambient description: {exc}") from exc


def rotation2(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def cyclic_rotations(n, dim=2):
    """C_n acting on R^2 (or about the last axis of R^3) by rotations."""
    out = []
    for k in range(n):
        R = np.eye(dim)
        R[:2, :2] = rotation2(2 * np.pi * k / n)
        out.append(R)
    return out


# -- trigonometric interpolation of closed curves ---------------------------


class _Fourier:
    """Real trigonometric interpolant through samples at ``t_j = 2 pi j / M``."""

    def __init__(self, points):
        M = len(points)
        self.M = M
        self.coef = np.fft.fft(points, axis=0) / M
        k = np.fft.fftfreq(M, d=1.0 / M)
        self.k = k
        self.nyquist = (M % 2 == 0)

    def _basis(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        e = np.exp(1j * self.k * t)
        de = 1j * self.k * e
        if self.nyquist:
            N = self.M // 2
            e[..., N] = np.cos(N * t[..., 0])
            de[..., N] = -N * np.sin(N * t[..., 0])
        return e, de

    def __call__(self, t):
        e, _ = self._basis(t)
        return (e @ self.coef).real

    def derivative(self, t):
        _, de = self._basis(t)
        return (de @ self.coef).real

    def both(self, t):
        e, de = self._basis(t)
        return (e @ self.coef).real, (de @ self.coef).real


def _orthonormal_rows(F):
    """Orthonormalize each frame (rows of the trailing two axes) by QR."""
    Q, R = np.linalg.qr(np.swapaxes(F, -1, -2))
    signs = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    signs = np.where(signs == 0, 1.0, signs)
    return np.swapaxes(Q * signs[..., None, :], -1, -2)


class DiscretizedSubmanifold:
    """Samples of a codimension-one submanifold with orthonormal tangent frames.

    ``points`` has shape (M, D) and ``frames`` shape (M, k, D).  For
    ``topology="patch"`` the samples form a row-major grid of shape
    ``grid``.
    """

    def __init__(self, points, frames, topology="closed-curve", grid=None, check=True):
        points = np.asarray(points, dtype=float)
        frames = np.asarray(frames, dtype=float)
        if frames.ndim == 2:
            frames = frames[:, None, :]
        if points.ndim != 2 or frames.shape[0] != points.shape[0] or frames.shape[2] != points.shape[1]:
            raise DimensionMismatch("points (M, D) and frames (M, k, D) do not agree")
        if topology not in ("closed-curve", "patch"):
            raise ValueError(f"unknown topology {topology!r}")
        if topology == "closed-curve" and frames.shape[1] != 1:
            raise DimensionMismatch("a closed curve has one tangent vector per sample")
        if topology == "patch":
            if grid is None or grid[0] * grid[1] != len(points):
                raise DimensionMismatch("patch needs a grid shape matching the sample count")
            grid = (int(grid[0]), int(grid[1]))
        self.points = points
        self.frames = frames
        self.topology = topology
        self.grid = grid
        if check and self.frame_residual() > ORTHO_TOL:
            raise ValueError(f"tangent frames are not orthonormal (residual {self.frame_residual():.3g})")
        self._interp = None

    def __len__(self):
        return len(self.points)

    @property
    def tangent_dim(self):
        return self.frames.shape[1]

    def frame_residual(self):
        G = self.frames @ np.swapaxes(self.frames, 1, 2)
        return float(np.max(np.abs(G - np.eye(self.tangent_dim)), initial=0.0))

    def mesh_size(self):
        if self.topology == "closed-curve":
            return float(np.max(np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1)))
        P = self.points.reshape(*self.grid, -1)
        return float(max(np.max(np.linalg.norm(np.diff(P, axis=0), axis=-1), initial=0),
                         np.max(np.linalg.norm(np.diff(P, axis=1), axis=-1), initial=0)))

    def tangency_residual(self):
        """Largest sine between the frames and centred finite-difference secants."""
        if self.topology == "closed-curve":
            sec = np.roll(self.points, -1, axis=0) - np.roll(self.points, 1, axis=0)
            secants = sec[:, None, :]
        else:
            P = self.points.reshape(*self.grid, -1)
            su = np.gradient(P, axis=0).reshape(len(self.points), -1)
            sv = np.gradient(P, axis=1).reshape(len(self.points), -1)
            secants = np.stack([su, sv], axis=1)
        secants = secants / np.linalg.norm(secants, axis=-1, keepdims=True)
        proj = secants - (secants @ np.swapaxes(self.frames, 1, 2)) @ self.frames
        return float(np.max(np.linalg.norm(proj, axis=-1)))

    @property
    def curve(self):
        if self._interp is None:
            self._interp = _Fourier(self.points)
        return self._interp

    @classmethod
    def from_curve(cls, ambient, points):
        """Closed curve through ``points`` with frames from the spectral derivative."""
        points = np.asarray(points, dtype=float)
        if ambient.kind == "S":
            points = points / np.linalg.norm(points, axis=1, keepdims=True)
        t = 2 * np.pi * np.arange(len(points)) / len(points)
        tangents = _Fourier(points).derivative(t)
        if ambient.kind == "S":
            tangents = tangents - np.sum(tangents * points, axis=1, keepdims=True) * points
        tangents /= np.linalg.norm(tangents, axis=1, keepdims=True)
        return cls(points, tangents[:, None, :], "closed-curve")

    @classmethod
    def from_function(cls, ambient, fn, samples):
        """Closed curve ``theta -> fn(theta)`` sampled at ``samples`` uniform parameters."""
        theta = 2 * np.pi * np.arange(samples) / samples
        return cls.from_curve(ambient, np.array([fn(th) for th in theta]))

    @classmethod
    def from_grid(cls, points):
        """Patch from grid points of shape (nu, nv, 3), frames from grid differences."""
        P = np.asarray(points, dtype=float)
        nu, nv, D = P.shape
        su = np.gradient(P, axis=0).reshape(-1, D)
        sv = np.gradient(P, axis=1).reshape(-1, D)
        frames = _orthonormal_rows(np.stack([su, sv], axis=1))
        return cls(P.reshape(-1, D), frames, "patch", grid=(nu, nv))

    def normals(self, ambient):
        """Unit normals (tangent to the ambient space) at every sample."""
        D = self.points.shape[1]
        if D != ambient.coord_dim:
            raise DimensionMismatch("submanifold and ambient space disagree on dimension")
        blocks = [self.frames]
        if ambient.kind == "S":
            blocks.append(self.points[:, None, :])
        span = np.concatenate(blocks, axis=1)
        if span.shape[1] != D - 1:
            raise DimensionMismatch("only codimension-one submanifolds are supported")
        # last right-singular vector spans the orthogonal complement
        _, _, Vh = np.linalg.svd(span)
        nu = Vh[:, -1, :]
        if D == 2 and ambient.kind == "R":
            nu = np.stack([self.frames[:, 0, 1], -self.frames[:, 0, 0]], axis=1)
        elif D == 3 and span.shape[1] == 2:
            nu = np.cross(span[:, 0, :], span[:, 1, :])
        return nu / np.linalg.norm(nu, axis=1, keepdims=True)

    def to_csv(self):
        rows = np.concatenate([self.points, self.frames.reshape(len(self.points), -1)], axis=1)
        return "\n".join(",".join(f"{v:.17g}" for v in row) for row in rows) + "\n"

    @classmethod
    def from_csv(cls, text, ambient, topology="closed-curve", grid=None):
        rows = [line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
        try:
            data = np.array([[float(v) for v in line.split(",")] for line in rows])
        except ValueError as exc:
            raise ParseError(f"non-numeric CSV entry: {exc}") from exc
        D = ambient.coord_dim
        k = 1 if topology == "closed-curve" else 2
        if data.ndim != 2 or data.shape[1] != D * (1 + k):
            raise ParseError(f"expected {D * (1 + k)} columns per row for {topology} "
                             f"in {ambient.kind}^{ambient.dim}")
        return cls(data[:, :D], data[:, D:].reshape(len(data), k, D), topology, grid)


@dataclass(frozen=True)
class NormalSection:
    """Normal vector per sample of ``base``, plus where the ray met the other submanifold."""

    base: DiscretizedSubmanifold
    values: np.ndarray
    lengths: np.ndarray
    hit_tangents: np.ndarray
    hit_points: np.ndarray

    def norms(self):
        return np.abs(self.lengths)


def _curve_hits(base, other, ambient, normals):
    """For each sample, parameters t where ``other`` crosses the normal geodesic."""
    x = base.points
    tau = base.frames[:, 0, :]
    curve = other.curve
    K = max(16 * len(other), 1024)
    step = 2 * np.pi / K
    grid = step * np.arange(K)
    P = curve(grid)
    F = ((P[None, :, :] - x[:, None, :]) @ tau[:, :, None])[..., 0]
    Fn = np.roll(F, -1, axis=1)
    # cyclic brackets [grid_j, grid_j + step]; exact zeros may be reported twice and are
    # deduplicated by the caller
    rows, cols = np.nonzero(F * Fn <= 0)
    lo = grid[cols]
    hi = lo + step
    flo = F[rows, cols]
    t = np.where(flo == 0, lo, lo + 0.5 * step)
    # safeguarded Newton on f(t) = (curve(t) - x) . tau
    for _ in range(60):
        p, dp = curve.both(t)
        f = np.sum((p - x[rows]) * tau[rows], axis=1)
        df = np.sum(dp * tau[rows], axis=1)
        same = np.sign(f) == np.sign(flo)
        lo = np.where(same & (f != 0), t, lo)
        hi = np.where(~same & (f != 0), t, hi)
        flo = np.where(same & (f != 0), f, flo)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = t - f / df
        bad = ~np.isfinite(newton) | (newton <= lo) | (newton >= hi)
        t_new = np.where(bad, 0.5 * (lo + hi), newton)
        t_new = np.where(f == 0, t, t_new)
        if np.all(np.abs(t_new - t) <= 1e-15 * (1 + np.abs(t))):
            t = t_new
            break
        t = t_new
    p, dp = curve.both(t)
    if ambient.kind == "R":
        s = np.sum((p - x[rows]) * normals[rows], axis=1)
    else:
        p = p / np.linalg.norm(p, axis=1, keepdims=True)
        dp = dp - np.sum(dp * p, axis=1, keepdims=True) * p
        s = np.arctan2(np.sum(p * normals[rows], axis=1), np.sum(p * x[rows], axis=1))
    dp = dp / np.linalg.norm(dp, axis=1, keepdims=True)
    return rows, t, s, p, dp[:, None, :]


def _patch_hits(base, other, ambient, normals):
    if ambient.kind != "R" or other.points.shape[1] != 3:
        raise DimensionMismatch("patches are supported in R^3 only")
    nu, nv = other.grid
    idx = np.arange(nu * nv).reshape(nu, nv)
    a, b = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    c, d = idx[:-1, 1:].ravel(), idx[1:, 1:].ravel()
    tri = np.concatenate([np.stack([a, b, d], 1), np.stack([a, d, c], 1)])
    V = other.points
    v0, v1, v2 = V[tri[:, 0]], V[tri[:, 1]], V[tri[:, 2]]
    e1, e2 = v1 - v0, v2 - v0
    onormals = other.normals(ambient)
    x, n = base.points, normals
    # Moller-Trumbore for every (sample, triangle) pair
    h = np.cross(n[:, None, :], e2[None, :, :])
    det = np.sum(e1[None] * h, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / det
        s0 = x[:, None, :] - v0[None]
        u = np.sum(s0 * h, axis=-1) * inv
        q = np.cross(s0, e1[None])
        v = np.sum(n[:, None, :] * q, axis=-1) * inv
        dist = np.sum(e2[None] * q, axis=-1) * inv
    tol = 1e-9
    ok = (np.abs(det) > 1e-14) & (u >= -tol) & (v >= -tol) & (u + v <= 1 + tol)
    rows, cols = np.nonzero(ok)
    s = dist[rows, cols]
    uu, vv = u[rows, cols], v[rows, cols]
    t3 = tri[cols]
    w = np.stack([1 - uu - vv, uu, vv], axis=1)
    ref = onormals[t3[:, 0]]
    nn = np.zeros((len(rows), 3))
    for j in range(3):
        nj = onormals[t3[:, j]]
        nj = nj * np.sign(np.sum(nj * ref, axis=1, keepdims=True) + 1e-300)
        nn += w[:, j:j + 1] * nj
    nn /= np.linalg.norm(nn, axis=1, keepdims=True)
    p = x[rows] + s[:, None] * n[rows]
    # tangent plane at the hit = orthogonal complement of the interpolated normal
    _, _, Vh = np.linalg.svd(nn[:, None, :])
    return rows, cols.astype(float), s, p, Vh[:, 1:, :]


def express_as_section(N, N2, ambient):
    """Normal section ``s`` of ``N`` with ``exp(s(x))`` on ``N2`` for every sample x.

    Raises :class:`NotAGraph` if some normal geodesic of length < 1 (in the
    scaled metric) meets ``N2`` zero times or more than once.
    """
    if N.topology != N2.topology:
        raise DimensionMismatch("submanifolds have different topologies")
    normals = N.normals(ambient)
    hits = _curve_hits if N.topology == "closed-curve" else _patch_hits
    rows, _, s, p, tangents = hits(N, N2, ambient, normals)
    inside = ambient.scale * np.abs(s) < 1
    rows, s, p, tangents = rows[inside], s[inside], p[inside], tangents[inside]
    M = len(N)
    lengths = np.zeros(M)
    hit_p = np.zeros_like(N.points)
    hit_t = np.zeros((M,) + tangents.shape[1:])
    counts = np.zeros(M, dtype=int)
    order = np.lexsort((s, rows))
    last_row, last_s = -1, None
    for k in order:
        r = rows[k]
        if r == last_row and abs(s[k] - last_s) < 1e-9:
            continue
        counts[r] += 1
        lengths[r], hit_p[r], hit_t[r] = s[k], p[k], tangents[k]
        last_row, last_s = r, s[k]
    if np.any(counts != 1):
        bad = int(np.flatnonzero(counts != 1)[0])
        raise NotAGraph(f"normal geodesic at sample {bad} meets the other submanifold "
                        f"{counts[bad]} times within the unit ball bundle")
    return NormalSection(N, lengths[:, None] * normals, lengths, hit_t, hit_p)


def _max_angle(frame, other):
    """Largest principal angle between row-spans, computed from sines."""
    resid = other - (other @ np.swapaxes(frame, -1, -2)) @ frame
    sines = np.linalg.svd(resid, compute_uv=False)
    return np.arcsin(np.clip(sines.max(axis=-1), 0.0, 1.0))


def _transport_frames(N, section, ambient):
    """Tangent frames of N carried to the hit points along the normal geodesics.

    Trivial in R^m.  On the sphere the geodesic stays in the plane of
    (x, normal) and, in codimension one, every tangent vector of N is
    orthogonal to that plane, so it is parallel along the geodesic.
    """
    return N.frames


def c1_distance(N, N2, ambient, per_sample=False):
    """``max_x max(geodesic length to N2, largest tangent angle)`` over samples of N."""
    sec = express_as_section(N, N2, ambient)
    length = ambient.scale * sec.norms()
    angle = _max_angle(_transport_frames(N, sec, ambient), sec.hit_tangents)
    a = np.maximum(length, angle)
    return a if per_sample else float(a.max())


def translate(N, g, ambient=None):
    """Image of ``N`` under the isometry ``g = (Q, t)`` (or an index into ``ambient``)."""
    if isinstance(g, (int, np.integer)):
        if ambient is None or not 0 <= g < len(ambient):
            raise UnknownIsometry(f"no isometry with index {g}")
        Q, t = ambient.isometries[g]
    else:
        Q, t = g
        Q = np.asarray(Q, dtype=float)
        t = np.asarray(t, dtype=float)
        if ambient is not None and ambient.index_of((Q, t)) is None:
            raise UnknownIsometry("isometry is not in the ambient group")
    return DiscretizedSubmanifold(N.points @ Q.T + t, N.frames @ Q.T, N.topology, N.grid,
                                  check=False)


def invariance_defect(N, ambient):
    """``max_g d(N, gN)``."""
    return max(c1_distance(N, translate(N, i, ambient), ambient) for i in range(len(ambient)))


def _rebuild(N, points, ambient):
    if N.topology == "closed-curve":
        return DiscretizedSubmanifold.from_curve(ambient, points)
    return DiscretizedSubmanifold.from_grid(points.reshape(*N.grid, -1))


@dataclass
class SubmanifoldAveraging:
    result: DiscretizedSubmanifold
    epsilon: float
    bound: float
    distance: float
    residual: float
    iterations: int
    hypothesis_holds: bool


def average_submanifold(N, ambient, tol=1e-10, max_iter=50, force=False):
    """Average the normal sections of ``N`` towards all its translates, repeatedly.

    Refuses to run when ``eps = max_g d(N, gN) >= 1/20000`` unless ``force``.
    On success the returned submanifold has invariance residual below
    ``tol`` and, when the hypothesis holds, lies within ``136 sqrt(eps)``.
    """
    eps = invariance_defect(N, ambient)
    holds = eps < EPSILON_LIMIT
    if not holds and not force:
        raise HypothesisViolated(f"invariance defect {eps:.6g} is not below 1/20000")
    current, residual, it = N, eps, 0
    while residual >= tol:
        if it >= max_iter:
            raise NoConvergence(f"invariance residual still {residual:.3g} after {max_iter} steps")
        sections = pmap(lambda i, c=current: express_as_section(
            c, translate(c, i, ambient), ambient).values, range(len(ambient)))
        mean = sum(sections) / len(sections)
        current = _rebuild(current, ambient.exp(current.points, mean), ambient)
        residual = invariance_defect(current, ambient)
        it += 1
    distance = c1_distance(N, current, ambient)
    bound = BOUND_FACTOR * np.sqrt(eps)
    if holds and not distance < bound:
        raise BoundViolated(f"d(N, Nbar) = {distance:.6g} >= 136 sqrt(eps) = {bound:.6g}")
    return SubmanifoldAveraging(current, eps, bound, distance, residual, it, holds)


def load_submanifold(csv_text, sidecar):
    """Parse the CSV samples and JSON sidecar into ``(N, ambient)``."""
    if isinstance(sidecar, str):
        sidecar = json.loads(sidecar)
    ambient = AmbientSpace.from_json(sidecar)
    topology = sidecar.get("topology", "closed-curve")
    if topology not in ("closed-curve", "patch"):
        raise ParseError(f"unknown topology {topology!r}")
    grid = sidecar.get("grid")
    return DiscretizedSubmanifold.from_csv(csv_text, ambient, topology, grid), ambient
