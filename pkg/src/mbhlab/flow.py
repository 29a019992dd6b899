"""Negative-gradient dynamics: trajectory integration, critical-set
detection and classification, unstable-manifold shooting and connection
counting.

Shooting notes.  Connections out of an index-2 source are found by scanning
a one-parameter launch family, labeling each trajectory by its saddle
near-passes and arrival sector, and bisecting label changes; a candidate is
accepted only when the refined trajectory passes within half a capture
radius of the target saddle.  For sources sitting on a critical circle of an
underlying Morse-Bott function the unstable-sphere angles of tube-crossing
connections are below float resolution (the orbit hugs the circle for time
~ 1/eps), so the launch family is reparameterized as a ring at a small
normal offset around the circle, which is an equally dense sample of the
same unstable manifold; within-circle flow lines launch bitwise-exactly on
the circle, which the perturbed field leaves invariant.

Signed counts (ambient dimension <= 2) use one orientation convention
throughout: each 1-dimensional unstable manifold is oriented by its
canonically signed Hessian eigenvector, each 2-dimensional one by the
manifold orientation; the sign of a flow line into an index-0 point is the
exit side along the source eigenvector, and into an index-1 point it is the
orientation pairing of the arrival velocity with the target's unstable
eigenvector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    DegenerateCritical,
    NoConvergence,
    RelativeIndexNotOne,
)
from .landscapes import Landscape, wrap_signed

__all__ = [
    "FlowTolerances",
    "DEFAULT_TOLS",
    "CriticalPoint",
    "CriticalSubmanifold",
    "CriticalSet",
    "LimitInfo",
    "Trajectory",
    "ConnectionCount",
    "InvariantCircle",
    "detect_critical_set",
    "integrate_flow",
    "count_connections",
    "moduli_dimension",
]


@dataclass(frozen=True)
class FlowTolerances:
    """Documented numeric scales.  The catalog's critical values are
    separated by O(1); these sit safely below feature size."""

    grad_tol: float = 1e-8
    eig_tol: float = 1e-6
    cluster_tol: float = 1e-4
    capture_radius: float = 1e-3
    ode_tol: float = 1e-10
    t_max: float = 1e4
    shoot_radius: float = 1e-2
    line_sep_tol: float = 1e-2
    funnel_radius: float = 0.25

    def with_overrides(self, **kw) -> "FlowTolerances":
        return replace(self, **kw)


DEFAULT_TOLS = FlowTolerances()


# ---------------------------------------------------------------------------
# critical elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CriticalPoint:
    cid: str
    position: np.ndarray
    index: int
    hessian_spectrum: tuple
    f_value: float
    parent_submanifold: Optional[str] = None


@dataclass(frozen=True)
class CriticalSubmanifold:
    sid: str
    dimension: int
    bott_index: int
    samples: np.ndarray  # dense, ordered by angle
    f_value: float
    normal_signature: tuple  # (negative, zero, positive) eigenvalue counts

    def distance_to(self, landscape: Landscape, x) -> float:
        return float(np.min(landscape.distance(self.samples, x)))

    def nearest_sample(self, landscape: Landscape, x) -> np.ndarray:
        d = landscape.distance(self.samples, x)
        return self.samples[int(np.argmin(d))]


@dataclass
class CriticalSet:
    landscape: Landscape
    points: list
    submanifolds: list

    def by_id(self, key: str):
        for p in self.points:
            if p.cid == key:
                return p
        for s in self.submanifolds:
            if s.sid == key:
                return s
        raise KeyError(key)

    def points_of_index(self, k: int) -> list:
        return [p for p in self.points if p.index == k]

    def nu(self) -> tuple:
        """Critical counts per index; only meaningful when all isolated."""
        if self.submanifolds:
            raise DegenerateCritical("landscape has positive-dimensional critical set")
        top = max((p.index for p in self.points), default=0)
        return tuple(
            sum(1 for p in self.points if p.index == k) for k in range(top + 1)
        )

    def nearest_element(self, x):
        best = None
        for p in self.points:
            d = float(self.landscape.distance(p.position, x))
            if best is None or d < best[0]:
                best = (d, "point", p)
        for s in self.submanifolds:
            d = s.distance_to(self.landscape, x)
            if best is None or d < best[0]:
                best = (d, "submanifold", s)
        return best


@dataclass(frozen=True)
class LimitInfo:
    kind: str  # "point" | "submanifold"
    ident: str
    position: np.ndarray


@dataclass
class Trajectory:
    """Sampled flow line; f strictly decreasing along increasing time."""

    times: np.ndarray
    points: np.ndarray
    f_values: np.ndarray
    alpha_limit: Optional[LimitInfo]
    omega_limit: Optional[LimitInfo]
    landscape: Landscape

    def total_drop(self) -> float:
        return float(self.f_values[0] - self.f_values[-1])

    def monotone_defect(self) -> float:
        """Largest per-step increase of f (should be <= ~1e-10)."""
        if len(self.f_values) < 2:
            return 0.0
        return float(np.max(np.diff(self.f_values)))

    def image_points(self, resolution: float = 0.02) -> np.ndarray:
        """Resolution-dense sample of the image, endpoints and limits
        included."""
        pts = [self.points[0]]
        L = self.landscape
        for a, b in zip(self.points[:-1], self.points[1:]):
            gap = float(L.distance(a, b))
            if gap > resolution:
                n = int(math.ceil(gap / resolution))
                for i in range(1, n):
                    t = i / n
                    mid = a + t * (b - a)
                    if L.chart == "sphere":
                        mid = mid / np.linalg.norm(mid)
                    pts.append(mid)
            pts.append(b)
        for lim in (self.alpha_limit, self.omega_limit):
            if lim is not None:
                pts.append(lim.position)
        arr = np.asarray(pts)
        if L.chart == "torus":
            arr = L.wrap(arr)
        return arr

    def to_rows(self):
        """CSV rows (t, coordinates..., f)."""
        for t, x, fv in zip(self.times, self.points, self.f_values):
            yield [float(t), *[float(c) for c in x], float(fv)]


@dataclass
class ConnectionCount:
    source: str
    target: str
    signed: Optional[int]
    mod2: int
    representatives: list

    @property
    def count(self) -> int:
        return len(self.representatives)


def moduli_dimension(Ck, Ck2) -> int:
    """Expected dimension of the space of unparameterized flow lines between
    two critical submanifolds: lambda_k - lambda_k' + dim C_k - 1."""
    lam_k = Ck.bott_index if hasattr(Ck, "bott_index") else Ck.index
    lam_k2 = Ck2.bott_index if hasattr(Ck2, "bott_index") else Ck2.index
    dim_k = getattr(Ck, "dimension", 0)
    if lam_k <= lam_k2:
        raise ValueError("need lambda_k > lambda_k'")
    return lam_k - lam_k2 + dim_k - 1


# ---------------------------------------------------------------------------
# invariant circles (ring shooting)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InvariantCircle:
    """A coordinate circle the gradient field is tangent to, with exact
    special coordinates so launches on it stay on it bitwise.

    kinds: "torus" (data = (angle_axis, fixed_axis, fixed_value)) and
    "equator" (z = 0 on the sphere).
    """

    kind: str
    data: tuple = ()

    def contains(self, landscape: Landscape, x, tol: float = 1e-6) -> bool:
        return self.normal_distance(x) < tol

    def normal_distance(self, x) -> float:
        if self.kind == "torus":
            _, fixed_axis, fixed_value = self.data
            return float(abs(wrap_signed(x[fixed_axis] - fixed_value)))
        if self.kind == "equator":
            return float(abs(math.asin(np.clip(x[2], -1.0, 1.0))))
        raise ValueError(self.kind)

    def angle_of(self, x) -> float:
        if self.kind == "torus":
            axis = self.data[0]
            return float(np.mod(x[axis], 2 * math.pi))
        return float(np.mod(math.atan2(x[1], x[0]), 2 * math.pi))

    def point(self, s: float, landscape: Landscape) -> np.ndarray:
        if self.kind == "torus":
            axis, fixed_axis, fixed_value = self.data
            out = np.zeros(landscape.dim)
            out[axis] = s
            out[fixed_axis] = fixed_value
            return out
        return np.array([math.cos(s), math.sin(s), 0.0])

    def tangent(self, s: float, landscape: Landscape) -> np.ndarray:
        if self.kind == "torus":
            axis = self.data[0]
            out = np.zeros(landscape.dim)
            out[axis] = 1.0
            return out
        return np.array([-math.sin(s), math.cos(s), 0.0])

    def normal(self, s: float, landscape: Landscape) -> np.ndarray:
        if self.kind == "torus":
            fixed_axis = self.data[1]
            out = np.zeros(landscape.dim)
            out[fixed_axis] = 1.0
            return out
        return np.array([0.0, 0.0, 1.0])

    def offset_point(self, s: float, side: float, offset: float, landscape: Landscape) -> np.ndarray:
        base = self.point(s, landscape)
        return landscape.step(base, side * offset * self.normal(s, landscape))


# ---------------------------------------------------------------------------
# detection
# ---------------------------------------------------------------------------


def _newton_refine(L: Landscape, seeds: np.ndarray, iters: int = 60, step_cap: float = 0.25):
    x = np.array(seeds, dtype=float)
    for _ in range(iters):
        H, frame = L.hess_tangent(x)
        g = L.grad(x)
        gt = np.einsum("...ia,...i->...a", frame, g)
        pinv = np.linalg.pinv(H, rcond=1e-10)
        step = -np.einsum("...ab,...b->...a", pinv, gt)
        norms = np.linalg.norm(step, axis=-1, keepdims=True)
        step = np.where(norms > step_cap, step * (step_cap / np.maximum(norms, 1e-300)), step)
        x = L.step(x, np.einsum("...ia,...a->...i", frame, step))
        bad = ~np.all(np.isfinite(x), axis=-1)
        if np.any(bad):
            x[bad] = seeds[bad]
    return x


def _embed(L: Landscape, pts: np.ndarray) -> np.ndarray:
    if L.chart == "sphere":
        return np.asarray(pts, dtype=float)
    a = np.asarray(pts, dtype=float)
    out = []
    for i in range(L.dim):
        out.append(np.cos(a[..., i]))
        out.append(np.sin(a[..., i]))
    return np.stack(out, axis=-1)


def _from_embedding(L: Landscape, emb: np.ndarray) -> np.ndarray:
    if L.chart == "sphere":
        return emb / np.linalg.norm(emb, axis=-1, keepdims=True)
    angles = []
    for i in range(L.dim):
        angles.append(np.arctan2(emb[..., 2 * i + 1], emb[..., 2 * i]))
    return np.mod(np.stack(angles, axis=-1), 2 * math.pi)


def _pca_angles(emb: np.ndarray) -> np.ndarray:
    center = emb.mean(axis=0)
    U, S, Vt = np.linalg.svd(emb - center, full_matrices=False)
    axes = Vt[:2]
    # deterministic sign: largest-|.| component of each axis positive
    for i in range(2):
        j = int(np.argmax(np.abs(axes[i])))
        if axes[i][j] < 0:
            axes[i] = -axes[i]
    proj = (emb - center) @ axes.T
    return np.arctan2(proj[:, 1], proj[:, 0])


def _spectrum(L: Landscape, x):
    H, frame = L.hess_tangent(x)
    return np.linalg.eigvalsh(H)


def detect_critical_set(
    L: Landscape,
    seed: int = 0,
    tols: FlowTolerances = DEFAULT_TOLS,
    grid: Optional[int] = None,
    dense_samples: int = 512,
) -> CriticalSet:
    """Dense grid seeding + Newton refinement on the gradient, followed by
    clustering; one-dimensional clusters become circles classified by their
    normal Hessian."""
    if L.chart == "torus":
        per_axis = grid or (128 if L.dim == 1 else 48)
        seeds = L.grid_seeds(per_axis, seed=seed)
        adjacency = 3.5 * 2 * math.pi / per_axis
    else:
        count = grid or 1400
        seeds = L.grid_seeds(count, seed=seed)
        adjacency = 3.5 * math.sqrt(4 * math.pi / count)

    refined = _newton_refine(L, seeds)
    ok = L.grad_norm(refined) < 1e-11
    refined = refined[ok]
    if L.chart == "torus":
        refined = L.wrap(refined)
    if refined.shape[0] == 0:
        raise DegenerateCritical("no critical points found")

    # dedup at cluster_tol
    sites: list = []
    for x in refined:
        if not sites:
            sites.append(x)
            continue
        d = L.distance(np.asarray(sites), x)
        if float(np.min(d)) > tols.cluster_tol:
            sites.append(x)
    sites_arr = np.asarray(sites)

    # connected clusters at grid-scale adjacency
    n = len(sites)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        d = L.distance(sites_arr, sites_arr[i])
        for j in np.nonzero(d < adjacency)[0]:
            ri, rj = find(i), find(int(j))
            if ri != rj:
                parent[ri] = rj

    clusters: dict = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)

    points = []
    circles = []
    for members in clusters.values():
        pts = sites_arr[members]
        diameter = max(
            (float(L.distance(pts[i], pts[j])) for i in range(len(pts)) for j in range(i + 1, len(pts))),
            default=0.0,
        )
        if len(pts) >= 8 and diameter > 10 * tols.cluster_tol:
            circles.append(_build_circle(L, pts, tols, dense_samples))
        else:
            x = pts[0]
            spec = _spectrum(L, x)
            if np.any(np.abs(spec) <= tols.eig_tol):
                raise DegenerateCritical(
                    f"isolated critical point at {x} has near-zero Hessian eigenvalue {spec}"
                )
            index = int(np.sum(spec < -tols.eig_tol))
            points.append((x, index, tuple(float(v) for v in spec), float(L.f(x))))

    # deterministic ids ordered by (f, position)
    points.sort(key=lambda rec: (round(rec[3], 9), tuple(np.round(rec[0], 9))))
    critical_points = [
        CriticalPoint(cid=f"p{i}", position=rec[0], index=rec[1], hessian_spectrum=rec[2], f_value=rec[3])
        for i, rec in enumerate(points)
    ]
    circles.sort(key=lambda rec: round(rec[1], 9))
    submanifolds = [
        CriticalSubmanifold(
            sid=f"c{i}",
            dimension=1,
            bott_index=rec[2],
            samples=rec[0],
            f_value=rec[1],
            normal_signature=rec[3],
        )
        for i, rec in enumerate(circles)
    ]
    return CriticalSet(L, critical_points, submanifolds)


def _build_circle(L: Landscape, pts: np.ndarray, tols: FlowTolerances, dense_samples: int):
    emb = _embed(L, pts)
    angles = _pca_angles(emb)
    order = np.argsort(angles)
    emb_sorted = emb[order]
    ang_sorted = angles[order]

    # resample at uniform angles via linear interpolation in the embedding,
    # then push back onto the critical set with a few Newton steps
    target = np.linspace(-math.pi, math.pi, dense_samples, endpoint=False)
    ext_ang = np.concatenate([ang_sorted, ang_sorted[:1] + 2 * math.pi])
    ext_emb = np.concatenate([emb_sorted, emb_sorted[:1]])
    interp = np.empty((dense_samples, emb.shape[1]))
    for j in range(emb.shape[1]):
        interp[:, j] = np.interp(
            np.mod(target - ext_ang[0], 2 * math.pi) + ext_ang[0],
            ext_ang,
            ext_emb[:, j],
        )
    approx = _from_embedding(L, interp)
    dense = _newton_refine(L, approx, iters=25)
    keep = L.grad_norm(dense) < 1e-10
    dense = dense[keep]
    if L.chart == "torus":
        dense = L.wrap(dense)

    dense_angles = _pca_angles(_embed(L, dense))
    dense = dense[np.argsort(dense_angles)]

    f_vals = L.f(dense)
    if float(np.std(f_vals)) > 1e-8:
        raise DegenerateCritical("detected circle is not a level set of f")

    sub = dense[:: max(1, len(dense) // 64)]
    spectra = np.stack([_spectrum(L, x) for x in sub])
    zero_counts = np.sum(np.abs(spectra) <= tols.eig_tol, axis=1)
    if not np.all(zero_counts == 1):
        raise DegenerateCritical("circle cluster without exactly one flat Hessian direction")
    neg = np.sum(spectra < -tols.eig_tol, axis=1)
    pos = np.sum(spectra > tols.eig_tol, axis=1)
    if len(set(neg.tolist())) != 1 or len(set(pos.tolist())) != 1:
        raise DegenerateCritical("inconsistent normal signature along circle")
    bott = int(neg[0])
    return dense, float(np.mean(f_vals)), bott, (bott, 1, int(pos[0]))


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


class _EventSpec:
    def __init__(self, name, fn, terminal=False, direction=0):
        self.name = name
        self.fn = fn
        self.terminal = terminal
        self.direction = direction


def _make_event(spec: _EventSpec):
    def ev(t, y):
        return spec.fn(y)

    ev.terminal = spec.terminal
    ev.direction = spec.direction
    return ev


def _run_ivp(L, x0, sign, tols, events, t_max, max_step=np.inf):
    """Chunked RK45 with events; returns (times, points, event log, reason).

    reason: ("event", name, y) for a terminal event, ("t_max", None, y)
    otherwise.  The event log lists (name, t, y) for every non-terminal
    crossing in order.
    """
    rhs = L.flow_rhs(direction=sign)
    ev_objs = [_make_event(s) for s in events]
    log = []
    t0 = 0.0
    y = np.array(x0, dtype=float)
    times = [t0]
    pts = [y.copy()]
    chunk = 200.0
    while t0 < t_max:
        t1 = min(t0 + chunk, t_max)
        sol = solve_ivp(
            rhs,
            (t0, t1),
            y,
            method="RK45",
            rtol=tols.ode_tol,
            atol=tols.ode_tol,
            events=ev_objs,
            max_step=max_step,
            dense_output=False,
        )
        times.extend(sol.t[1:].tolist())
        pts.extend(list(sol.y.T[1:]))
        for idx, spec in enumerate(events):
            for te, ye in zip(sol.t_events[idx], sol.y_events[idx]):
                log.append((spec.name, float(te), np.array(ye)))
        log.sort(key=lambda rec: rec[1])
        if sol.status == 1:  # a terminal event fired
            for idx, spec in enumerate(events):
                if spec.terminal and len(sol.t_events[idx]):
                    y_end = np.array(sol.y_events[idx][-1])
                    times[-1] = float(sol.t_events[idx][-1])
                    pts[-1] = y_end
                    return (
                        np.array(times),
                        np.array(pts),
                        log,
                        ("event", spec.name, y_end),
                    )
        y = sol.y[:, -1].copy()
        if L.chart == "sphere":
            y = y / np.linalg.norm(y)
        t0 = sol.t[-1]
        if sol.status == -1:
            raise NoConvergence(f"integrator failed at t={t0}: {sol.message}")
    return np.array(times), np.array(pts), log, ("t_max", None, y)


def _classify_limit(L, cs: CriticalSet, y, tols) -> Optional[LimitInfo]:
    hit = cs.nearest_element(y)
    if hit is None:
        return None
    dist, kind, obj = hit
    if dist > tols.capture_radius:
        return None
    if kind == "point":
        return LimitInfo("point", obj.cid, obj.position)
    near = obj.nearest_sample(L, y)
    refined = _newton_refine(L, near[None, :], iters=8)[0]
    return LimitInfo("submanifold", obj.sid, refined)


def integrate_flow(
    L: Landscape,
    x0,
    cs: CriticalSet,
    direction: str = "both",
    tols: FlowTolerances = DEFAULT_TOLS,
    alpha_hint: Optional[LimitInfo] = None,
) -> Trajectory:
    """Integrate the negative gradient flow through x0 until capture.

    direction "forward" follows -grad (omega side), "backward" follows +grad
    (alpha side), "both" assembles the full flow line through x0.  Raises
    NoConvergence when t_max is exceeded before capture.
    """
    x0 = np.array(x0, dtype=float)
    if L.chart == "sphere":
        x0 = L.validate(x0)

    if float(L.grad_norm(x0)) < tols.grad_tol:
        lim = _classify_limit(L, cs, x0, tols)
        if lim is None:
            raise NoConvergence("start is critical but matches no known element")
        return Trajectory(
            times=np.array([0.0]),
            points=x0[None, :],
            f_values=np.array([float(L.f(x0))]),
            alpha_limit=lim,
            omega_limit=lim,
            landscape=L,
        )

    grad_event = _EventSpec(
        "capture", lambda y: float(L.grad_norm(y)) - tols.grad_tol, terminal=True, direction=-1
    )

    def run(sign):
        times, pts, _, reason = _run_ivp(L, x0, sign, tols, [grad_event], tols.t_max)
        if reason[0] != "event":
            raise NoConvergence(f"no capture before t_max={tols.t_max}")
        lim = _classify_limit(L, cs, reason[2], tols)
        if lim is None:
            raise NoConvergence("gradient vanished away from known critical set")
        return times, pts, lim

    if direction == "forward":
        times, pts, omega = run(-1)
        alpha = alpha_hint
        f_vals = np.asarray(L.f(pts))
        return Trajectory(times, pts, f_vals, alpha, omega, L)
    if direction == "backward":
        times, pts, alpha = run(+1)
        times = -times[::-1]
        pts = pts[::-1]
        f_vals = np.asarray(L.f(pts))
        return Trajectory(times, pts, f_vals, alpha, alpha_hint, L)

    f_times, f_pts, omega = run(-1)
    b_times, b_pts, alpha = run(+1)
    times = np.concatenate([-b_times[::-1], f_times[1:]])
    pts = np.concatenate([b_pts[::-1], f_pts[1:]])
    f_vals = np.asarray(L.f(pts))
    return Trajectory(times, pts, f_vals, alpha, omega, L)


# ---------------------------------------------------------------------------
# signs and frames
# ---------------------------------------------------------------------------


def _canonical_sign(vec: np.ndarray) -> np.ndarray:
    for c in vec:
        if abs(c) > 1e-8:
            return vec if c > 0 else -vec
    return vec


def unstable_frame(L: Landscape, cp: CriticalPoint, tols=DEFAULT_TOLS):
    """Chart/ambient unstable eigenvectors, ascending eigenvalue (most
    negative first), canonically signed."""
    H, frame = L.hess_tangent(cp.position)
    evals, evecs = np.linalg.eigh(H)
    out = []
    for lam, v in zip(evals, evecs.T):
        if lam < -tols.eig_tol:
            vec = frame @ v if L.chart == "sphere" else v
            out.append((float(lam), _canonical_sign(vec)))
    return out


def stable_frame(L: Landscape, cp: CriticalPoint, tols=DEFAULT_TOLS):
    H, frame = L.hess_tangent(cp.position)
    evals, evecs = np.linalg.eigh(H)
    out = []
    for lam, v in zip(evals, evecs.T):
        if lam > tols.eig_tol:
            vec = frame @ v if L.chart == "sphere" else v
            out.append((float(lam), _canonical_sign(vec)))
    return out


def orientation_form(L: Landscape, x, a, b) -> float:
    """The chart orientation 2-form evaluated on tangent vectors a, b."""
    if L.chart == "torus":
        return float(a[0] * b[1] - a[1] * b[0])
    return float(np.dot(np.cross(a, b), x))


def _tangent_offset(L: Landscape, x, base) -> np.ndarray:
    """Displacement of x from base as a tangent/chart vector at base."""
    if L.chart == "torus":
        return wrap_signed(np.asarray(x) - np.asarray(base))
    off = np.asarray(x) - np.asarray(base)
    off = off - np.dot(off, base) * np.asarray(base)
    return off


def _arrival_sign(L: Landscape, p: CriticalPoint, y_end, tols) -> int:
    """Sign of a flow line into an index-1 point from its arrival offset:
    the arrival velocity is opposite the offset, and the sign is its
    orientation pairing with the target's unstable eigenvector."""
    e_u = unstable_frame(L, p, tols)[0][1]
    off = _tangent_offset(L, y_end, p.position)
    val = orientation_form(L, p.position, -off, e_u)
    return 1 if val > 0 else -1


# ---------------------------------------------------------------------------
# connection counting
# ---------------------------------------------------------------------------


def _scan_events(L, cs, p, tols, saddles, floor):
    events = [
        _EventSpec(
            "success",
            lambda y: float(L.distance(y, p.position)) - 0.5 * tols.capture_radius,
            terminal=True,
            direction=-1,
        ),
        _EventSpec(
            "capture", lambda y: float(L.grad_norm(y)) - tols.grad_tol, terminal=True, direction=-1
        ),
    ]
    if floor is not None:
        events.append(
            _EventSpec("floor", lambda y: float(L.f(y)) - floor, terminal=True, direction=-1)
        )
    for s in saddles:
        events.append(
            _EventSpec(
                f"funnel:{s.cid}",
                (lambda pos: lambda y: float(L.distance(y, pos)) - tols.funnel_radius)(s.position),
                terminal=False,
                direction=0,
            )
        )
    return events


def _sector_label(L, element, y, tols) -> tuple:
    off = _tangent_offset(L, y, element.position)
    H, frame = L.hess_tangent(element.position)
    evals, evecs = np.linalg.eigh(H)
    comps = []
    norm = float(np.linalg.norm(off)) or 1.0
    for v in evecs.T:
        vec = frame @ v if L.chart == "sphere" else v
        vec = _canonical_sign(vec)
        c = float(np.dot(off, vec))
        comps.append(0 if abs(c) < 0.02 * norm else (1 if c > 0 else -1))
    return tuple(comps)


def _run_scan(L, cs, x0, p, tols, saddles, floor, t_label_max):
    events = _scan_events(L, cs, p, tols, saddles, floor)
    times, pts, log, reason = _run_ivp(L, x0, -1, tols, events, t_label_max, max_step=0.5)
    funnel_part = []
    state = {}
    for name, t, y in log:
        if not name.startswith("funnel:"):
            continue
        cid = name.split(":", 1)[1]
        if cid not in state:
            state[cid] = True  # entered
        else:
            # exit crossing: label the side along the saddle's unstable axis
            saddle = cs.by_id(cid)
            e_u = unstable_frame(L, saddle, tols)[0][1]
            off = _tangent_offset(L, y, saddle.position)
            side = 1 if float(np.dot(off, e_u)) > 0 else -1
            funnel_part.append((cid, side))
            del state[cid]
    kind, name, y_end = reason[0], reason[1], reason[2]
    if kind == "event" and name == "success":
        return ("success", tuple(funnel_part), times, pts, y_end)
    if kind == "event" and name == "capture":
        lim = _classify_limit(L, cs, y_end, tols)
        if lim is not None and lim.ident == p.cid:
            return ("success", tuple(funnel_part), times, pts, y_end)
        ident = lim.ident if lim else "?"
        elem = cs.by_id(ident) if lim else None
        sector = _sector_label(L, elem, y_end, tols) if elem is not None else ()
        return (("cap", ident, sector, tuple(funnel_part)), tuple(funnel_part), times, pts, y_end)
    if kind == "event" and name == "floor":
        hit = cs.nearest_element(y_end)
        ident = hit[2].cid if hit and hasattr(hit[2], "cid") else "?"
        elem = cs.by_id(ident) if ident != "?" else None
        sector = _sector_label(L, elem, y_end, tols) if elem is not None else ()
        return (("floor", ident, sector, tuple(funnel_part)), tuple(funnel_part), times, pts, y_end)
    return (("timeout", tuple(funnel_part)), tuple(funnel_part), times, pts, y_end)


def _floor_value(L, cs) -> Optional[float]:
    saddles = cs.points_of_index(1)
    sinks = cs.points_of_index(0)
    if not saddles or not sinks:
        return None
    f_saddle = min(s.f_value for s in saddles)
    f_sink = max(m.f_value for m in sinks)
    if f_saddle <= f_sink:
        return None
    return f_saddle - 0.3 * (f_saddle - f_sink)


def _truncate_at_success(L, times, pts, p):
    """Trajectory portion up to the success event, with p appended."""
    f_vals = np.asarray(L.f(pts))
    return times, pts, f_vals


def _representative(L, cs, q, p, times, pts, tols) -> Trajectory:
    pts = np.vstack([pts, p.position[None, :]])
    times = np.concatenate([times, [times[-1]]])
    f_vals = np.asarray(L.f(pts))
    return Trajectory(
        times=times,
        points=pts,
        f_values=f_vals,
        alpha_limit=LimitInfo("point", q.cid, q.position),
        omega_limit=LimitInfo("point", p.cid, p.position),
        landscape=L,
    )


def _cluster_lines(L, candidates, tols):
    """Merge candidate flow lines whose images are line_sep_tol-close."""
    from .cascades import hausdorff_distance

    distinct = []
    for cand in candidates:
        img = cand[0].image_points(resolution=tols.line_sep_tol / 2)
        dup = False
        for kept in distinct:
            if hausdorff_distance(img, kept[1], metric=L.distance) < tols.line_sep_tol:
                dup = True
                break
        if not dup:
            distinct.append((cand[0], img, cand[1]))
    return [(traj, sign) for traj, img, sign in distinct]


def count_connections(
    L: Landscape,
    cs: CriticalSet,
    q: CriticalPoint,
    p: CriticalPoint,
    tols: FlowTolerances = DEFAULT_TOLS,
    seed: int = 0,
    n_dirs: int = 96,
    invariant_circles: Sequence[InvariantCircle] = (),
) -> ConnectionCount:
    """Count gradient flow lines from q to p (relative index one)."""
    if q.index - p.index != 1:
        raise RelativeIndexNotOne(f"{q.cid} has index {q.index}, {p.cid} has {p.index}")

    signed_supported = L.dim <= 2
    candidates = []  # (trajectory, sign)

    if q.index == 1:
        candidates.extend(_direct_launches(L, cs, q, p, tols, invariant_circles))
    else:
        circle = next(
            (c for c in invariant_circles if c.contains(L, q.position)), None
        )
        if circle is not None:
            candidates.extend(_ring_scan(L, cs, q, p, tols, seed, n_dirs, circle))
        else:
            candidates.extend(_isotropic_scan(L, cs, q, p, tols, seed, n_dirs))

    lines = _cluster_lines(L, candidates, tols)
    signed = sum(s for _, s in lines) if signed_supported else None
    return ConnectionCount(
        source=q.cid,
        target=p.cid,
        signed=signed,
        mod2=len(lines) % 2,
        representatives=[t for t, _ in lines],
    )


def _direct_launches(L, cs, q, p, tols, invariant_circles):
    """Index-1 source: two launches along the unstable eigenvector; exact
    on-circle launch points when that eigenvector is tangent to an invariant
    circle through q."""
    e_u = unstable_frame(L, q, tols)[0][1]
    circle = None
    for c in invariant_circles:
        if c.contains(L, q.position):
            tang = c.tangent(c.angle_of(q.position), L)
            if abs(float(np.dot(tang, e_u))) > 0.9:
                circle = c
                break

    out = []
    for side in (+1, -1):
        if circle is not None:
            s_q = circle.angle_of(q.position)
            tang = c.tangent(s_q, L)
            orient = 1 if float(np.dot(tang, e_u)) > 0 else -1
            x0 = circle.point(s_q + side * orient * tols.shoot_radius, L)
        else:
            x0 = L.step(q.position, side * tols.shoot_radius * e_u)
        try:
            traj = integrate_flow(
                L, x0, cs, direction="forward", tols=tols,
                alpha_hint=LimitInfo("point", q.cid, q.position),
            )
        except NoConvergence:
            continue
        if traj.omega_limit is not None and traj.omega_limit.ident == p.cid:
            out.append((traj, side))
    return out


def _boundary_pairs(labels):
    n = len(labels)
    for i in range(n):
        j = (i + 1) % n
        if labels[i] != labels[j] and labels[i] is not None and labels[j] is not None:
            yield i, j


def _scan_and_refine(L, cs, q, p, tols, params, make_start, cyclic=True):
    """Label every launch in the family, bisect label boundaries, accept
    candidates whose refined run reaches half a capture radius of p."""
    saddles = [s for s in cs.points_of_index(1)]
    floor = _floor_value(L, cs)
    t_label = min(tols.t_max, 6000.0)

    labels = []
    found = []
    for val in params:
        res = _run_scan(L, cs, make_start(val), p, tols, saddles, floor, t_label)
        if res[0] == "success":
            times, pts = res[2], res[3]
            found.append((_representative(L, cs, q, p, times, pts, tols), res[4]))
            labels.append("success")
        else:
            labels.append(res[0])

    n = len(params)
    idx_pairs = (
        [(i, (i + 1) % n) for i in range(n)] if cyclic else [(i, i + 1) for i in range(n - 1)]
    )
    for i, j in idx_pairs:
        if labels[i] == labels[j]:
            continue
        if labels[i] == "success" or labels[j] == "success":
            continue
        a, b = params[i], params[j]
        la = labels[i]
        hit = None
        for _ in range(60):
            m = 0.5 * (a + b)
            res = _run_scan(L, cs, make_start(m), p, tols, saddles, floor, t_label)
            if res[0] == "success":
                hit = res
                break
            if res[0] == la:
                a = m
            else:
                b = m
            if abs(b - a) < 1e-13:
                break
        if hit is not None:
            times, pts = hit[2], hit[3]
            found.append((_representative(L, cs, q, p, times, pts, tols), hit[4]))

    out = []
    for traj, y_end in found:
        sign = _arrival_sign(L, p, y_end, tols)
        out.append((traj, sign))
    return out


def _isotropic_scan(L, cs, q, p, tols, seed, n_dirs):
    frame_vecs = unstable_frame(L, q, tols)
    if len(frame_vecs) != 2:
        raise DegenerateCritical(f"expected a 2-dimensional unstable frame at {q.cid}")
    E1 = frame_vecs[0][1]
    E2 = frame_vecs[1][1]
    if orientation_form(L, q.position, E1, E2) < 0:
        E2 = -E2

    rng = np.random.default_rng(seed)
    offset = rng.uniform(0.0, 1.0)
    alphas = (np.arange(n_dirs) + offset) * (2 * math.pi / n_dirs)

    def make_start(alpha):
        v = math.cos(alpha) * E1 + math.sin(alpha) * E2
        return L.step(q.position, tols.shoot_radius * v)

    return _scan_and_refine(L, cs, q, p, tols, list(alphas), make_start)


def _ring_scan(L, cs, q, p, tols, seed, n_dirs, circle: InvariantCircle):
    """Index-2 source on an invariant circle: on-circle launches catch the
    within-circle flow lines; ring launches at a small normal offset sweep
    the tube-leaving part of the unstable manifold."""
    out = []
    s_q = circle.angle_of(q.position)

    # exact on-circle launches (the circle is bitwise invariant)
    for side in (+1, -1):
        x0 = circle.point(s_q + side * tols.shoot_radius, L)
        try:
            traj = integrate_flow(
                L, x0, cs, direction="forward", tols=tols,
                alpha_hint=LimitInfo("point", q.cid, q.position),
            )
        except NoConvergence:
            continue
        if traj.omega_limit is not None and traj.omega_limit.ident == p.cid:
            y_end = traj.points[-1]
            sign = _arrival_sign(L, p, y_end, tols)
            out.append((traj, sign))

    # other critical points on the same circle bound the unstable arc of q
    blocked = []
    for other in cs.points:
        if other.cid != q.cid and circle.contains(L, other.position):
            blocked.append(circle.angle_of(other.position))

    rng = np.random.default_rng(seed)
    offset = rng.uniform(0.0, 1.0)
    base_angles = (np.arange(n_dirs) + offset) * (2 * math.pi / n_dirs)
    attr_tol = 0.05

    for side in (+1, -1):
        angles = [
            s
            for s in base_angles
            if all(abs(wrap_signed(s - b)) > attr_tol for b in blocked)
        ]

        def make_start(s, _side=side):
            return circle.offset_point(s, _side, tols.shoot_radius, L)

        out.extend(_scan_and_refine(L, cs, q, p, tols, angles, make_start, cyclic=True))
    return out
