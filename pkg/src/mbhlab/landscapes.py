"""Chart-based compact Riemannian manifolds with a smooth function.

Two chart families cover the whole catalog:

* flat n-tori with angle coordinates in radians (n = 1 is the circle), where
  the gradient is the tuple of partials and the Hessian the coordinate
  second-derivative matrix;
* the round unit sphere in 3-space, where the gradient is the ambient
  gradient projected onto the tangent plane and the Hessian is the projected
  ambient Hessian corrected by the radial term.

All function data is analytic: fields are sums of closed-form terms carrying
their own first and second derivatives.  Evaluation is numpy-vectorized over
leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cubical import CubicalComplex
from .errors import InvalidPoint, NotFound

__all__ = [
    "Point",
    "Landscape",
    "TorusLandscape",
    "SphereLandscape",
    "SubmanifoldSpec",
    "MorseBottStructure",
    "CatalogEntry",
    "catalog",
    "catalog_names",
    "TWO_PI",
]

TWO_PI = 2.0 * math.pi

CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class Point:
    """Serialization-friendly point: chart id plus coordinate tuple."""

    chart: str
    coords: tuple

    @classmethod
    def of(cls, landscape: "Landscape", x) -> "Point":
        return cls(landscape.chart, tuple(float(v) for v in np.asarray(x)))

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)


def wrap_angle(a):
    """Reduce angles to [0, 2*pi)."""
    return np.mod(a, TWO_PI)


def wrap_signed(a):
    """Reduce angle differences to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a), TWO_PI)


# ---------------------------------------------------------------------------
# scalar fields
# ---------------------------------------------------------------------------


class TorusField:
    """Sum of closed-form terms on the flat torus.

    Each term supplies value / gradient / Hessian closures taking an angle
    array of shape (..., n).
    """

    def __init__(self, n: int, terms):
        self.n = n
        self.terms = list(terms)

    def value(self, a):
        a = np.asarray(a, dtype=float)
        return sum(t[0](a) for t in self.terms)

    def grad(self, a):
        a = np.asarray(a, dtype=float)
        return sum(t[1](a) for t in self.terms)

    def hess(self, a):
        a = np.asarray(a, dtype=float)
        return sum(t[2](a) for t in self.terms)


def torus_cos_term(n: int, axis: int, amplitude: float = 1.0, offset: float = 0.0):
    """amplitude * cos(a_axis - offset) with analytic derivatives."""

    def value(a):
        return amplitude * np.cos(a[..., axis] - offset)

    def grad(a):
        g = np.zeros(a.shape)
        g[..., axis] = -amplitude * np.sin(a[..., axis] - offset)
        return g

    def hess(a):
        h = np.zeros(a.shape + (n,))
        h[..., axis, axis] = -amplitude * np.cos(a[..., axis] - offset)
        return h

    return (value, grad, hess)


def torus_separable_term(n: int, axis_u: int, axis_v: int, fu, fv):
    """fu(a_u) * fv(a_v) for 1-d profiles fu, fv given as (g, g', g'')."""
    fu0, fu1, fu2 = fu
    fv0, fv1, fv2 = fv

    def value(a):
        return fu0(a[..., axis_u]) * fv0(a[..., axis_v])

    def grad(a):
        u, v = a[..., axis_u], a[..., axis_v]
        g = np.zeros(a.shape)
        g[..., axis_u] = fu1(u) * fv0(v)
        g[..., axis_v] = fu0(u) * fv1(v)
        return g

    def hess(a):
        u, v = a[..., axis_u], a[..., axis_v]
        h = np.zeros(a.shape + (n,))
        h[..., axis_u, axis_u] = fu2(u) * fv0(v)
        h[..., axis_v, axis_v] = fu0(u) * fv2(v)
        cross = fu1(u) * fv1(v)
        h[..., axis_u, axis_v] = cross
        h[..., axis_v, axis_u] = cross
        return h

    return (value, grad, hess)


class SphereField:
    """Sum of terms on the unit sphere, each a function of u = a.x (a fixed
    axis) optionally multiplied by a profile in the azimuth about the z-axis.

    Terms use the degree-zero ambient extension F(x) = f(x/|x|); on the
    sphere the needed ambient derivatives of the atoms are

        grad(a.x) = a - (a.x) x
        hess(a.x) = -(a x^T + x a^T) - (a.x) I + 3 (a.x) x x^T
        grad(th)  = (-y, x, 0) / s^2
        hess(th)  = [[2xy, y^2-x^2, 0], [y^2-x^2, -2xy, 0], [0,0,0]] / s^4

    with s^2 = x^2 + y^2.
    """

    def __init__(self, terms):
        self.terms = list(terms)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return sum(t.value(x) for t in self.terms)

    def grad_ambient(self, x):
        x = np.asarray(x, dtype=float)
        return sum(t.grad(x) for t in self.terms)

    def hess_ambient(self, x):
        x = np.asarray(x, dtype=float)
        return sum(t.hess(x) for t in self.terms)


def _dot_atom(x, a):
    u = np.tensordot(x, a, axes=([-1], [0]))
    grad = a - u[..., None] * x
    eye = np.eye(3)
    outer_ax = a[:, None] * x[..., None, :] + x[..., :, None] * a[None, :]
    hess = -outer_ax - u[..., None, None] * eye + 3.0 * u[..., None, None] * (
        x[..., :, None] * x[..., None, :]
    )
    return u, grad, hess


def _azimuth_atom(x):
    s2 = x[..., 0] ** 2 + x[..., 1] ** 2
    theta = np.arctan2(x[..., 1], x[..., 0])
    grad = np.zeros(x.shape)
    grad[..., 0] = -x[..., 1] / s2
    grad[..., 1] = x[..., 0] / s2
    hess = np.zeros(x.shape + (3,))
    xy = x[..., 0] * x[..., 1]
    diff = x[..., 1] ** 2 - x[..., 0] ** 2
    hess[..., 0, 0] = 2 * xy / s2**2
    hess[..., 0, 1] = diff / s2**2
    hess[..., 1, 0] = diff / s2**2
    hess[..., 1, 1] = -2 * xy / s2**2
    return theta, grad, hess


class SphereDotTerm:
    """g(a . x) for a fixed unit axis a and profile g with g', g''."""

    def __init__(self, axis, g0: Callable, g1: Callable, g2: Callable):
        self.axis = np.asarray(axis, dtype=float)
        self.g0, self.g1, self.g2 = g0, g1, g2

    def value(self, x):
        u = np.tensordot(x, self.axis, axes=([-1], [0]))
        return self.g0(u)

    def grad(self, x):
        u, du, _ = _dot_atom(x, self.axis)
        return self.g1(u)[..., None] * du

    def hess(self, x):
        u, du, ddu = _dot_atom(x, self.axis)
        outer = du[..., :, None] * du[..., None, :]
        return self.g2(u)[..., None, None] * outer + self.g1(u)[..., None, None] * ddu


class SphereZonalAzimuthTerm:
    """g(z) * q(theta) with theta the azimuth about the z-axis.

    The latitude profile g must vanish identically (with g', g'') in a
    neighborhood of the poles so the azimuth singularity is never touched;
    evaluation masks those points outright.
    """

    def __init__(self, g0, g1, g2, q0, q1, q2, support_zmax: float):
        self.g = (g0, g1, g2)
        self.q = (q0, q1, q2)
        self.support_zmax = float(support_zmax)

    def _mask(self, x):
        return np.abs(x[..., 2]) < self.support_zmax

    def value(self, x):
        z = x[..., 2]
        out = np.zeros(z.shape)
        m = self._mask(x)
        if np.any(m):
            theta = np.arctan2(x[..., 1][m], x[..., 0][m])
            out[m] = self.g[0](z[m]) * self.q[0](theta)
        return out

    def grad(self, x):
        out = np.zeros(x.shape)
        m = self._mask(x)
        if not np.any(m):
            return out
        xm = x[m]
        z, dz, _ = _dot_atom(xm, np.array([0.0, 0.0, 1.0]))
        th, dth, _ = _azimuth_atom(xm)
        g0, g1 = self.g[0](z), self.g[1](z)
        q0, q1 = self.q[0](th), self.q[1](th)
        out[m] = g1[..., None] * q0[..., None] * dz + g0[..., None] * q1[..., None] * dth
        return out

    def hess(self, x):
        out = np.zeros(x.shape + (3,))
        m = self._mask(x)
        if not np.any(m):
            return out
        xm = x[m]
        z, dz, ddz = _dot_atom(xm, np.array([0.0, 0.0, 1.0]))
        th, dth, ddth = _azimuth_atom(xm)
        g0, g1, g2 = self.g[0](z), self.g[1](z), self.g[2](z)
        q0, q1, q2 = self.q[0](th), self.q[1](th), self.q[2](th)
        o_zz = dz[..., :, None] * dz[..., None, :]
        o_tt = dth[..., :, None] * dth[..., None, :]
        o_zt = dz[..., :, None] * dth[..., None, :] + dth[..., :, None] * dz[..., None, :]
        out[m] = (
            (g2 * q0)[..., None, None] * o_zz
            + (g1 * q0)[..., None, None] * ddz
            + (g0 * q2)[..., None, None] * o_tt
            + (g0 * q1)[..., None, None] * ddth
            + (g1 * q1)[..., None, None] * o_zt
        )
        return out


# ---------------------------------------------------------------------------
# landscapes
# ---------------------------------------------------------------------------


class Landscape:
    """Common interface: evaluation, retraction, distance, frames."""

    name: str
    chart: str
    dim: int

    def f(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def grad_norm(self, x):
        g = self.grad(x)
        return np.sqrt(np.sum(g * g, axis=-1))

    def hess_tangent(self, x):
        """(H, frame): H the dim x dim tangent Hessian, frame columns the
        tangent basis as chart/ambient vectors."""
        raise NotImplementedError

    def validate(self, x):
        raise NotImplementedError

    def step(self, x, v):
        """Retract x + v back onto the chart."""
        raise NotImplementedError

    def distance(self, x, y):
        raise NotImplementedError

    def flow_rhs(self, direction: int = -1):
        """Right-hand side of the (anti)gradient flow as a plain callable."""

        def rhs(_t, y):
            return direction * self.grad(y)

        return rhs


class TorusLandscape(Landscape):
    chart = "torus"

    def __init__(self, name: str, n: int, field: TorusField):
        self.name = name
        self.dim = n
        self.field = field

    def f(self, x):
        return self.field.value(x)

    def grad(self, x):
        return self.field.grad(x)

    def hess_tangent(self, x):
        x = np.asarray(x, dtype=float)
        H = self.field.hess(x)
        frame = np.broadcast_to(np.eye(self.dim), x.shape + (self.dim,)).copy()
        return H, frame

    def validate(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim or not np.all(np.isfinite(x)):
            raise InvalidPoint(f"bad torus point {x!r}")
        return wrap_angle(x)

    def step(self, x, v):
        return np.asarray(x) + v

    def wrap(self, x):
        return wrap_angle(x)

    def distance(self, x, y):
        d = wrap_signed(np.asarray(x) - np.asarray(y))
        return np.sqrt(np.sum(d * d, axis=-1))

    def grid_seeds(self, per_axis: int, seed: int = 0):
        rng = np.random.default_rng(seed)
        offsets = rng.uniform(0.0, 1.0, size=self.dim)
        axes = [
            (np.arange(per_axis) + offsets[i]) * (TWO_PI / per_axis)
            for i in range(self.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


class SphereLandscape(Landscape):
    chart = "sphere"

    def __init__(self, name: str, field: SphereField):
        self.name = name
        self.dim = 2
        self.field = field

    def f(self, x):
        return self.field.value(x)

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        g = self.field.grad_ambient(x)
        radial = np.sum(g * x, axis=-1, keepdims=True)
        return g - radial * x

    def tangent_frame(self, x):
        """Orthonormal (t1, t2) with (t1, t2, x) right-handed."""
        x = np.asarray(x, dtype=float)
        ref = np.zeros(x.shape)
        near_pole = np.abs(x[..., 2]) > 0.9
        ref[..., 2] = 1.0
        ref[near_pole] = [1.0, 0.0, 0.0]
        t1 = ref - np.sum(ref * x, axis=-1, keepdims=True) * x
        t1 = t1 / np.linalg.norm(t1, axis=-1, keepdims=True)
        t2 = np.cross(x, t1)
        return np.stack([t1, t2], axis=-1)

    def hess_tangent(self, x):
        x = np.asarray(x, dtype=float)
        Hamb = self.field.hess_ambient(x)
        g = self.field.grad_ambient(x)
        radial = np.sum(g * x, axis=-1)
        frame = self.tangent_frame(x)
        Ht = np.einsum("...ia,...ij,...jb->...ab", frame, Hamb, frame)
        Ht = Ht - radial[..., None, None] * np.eye(2)
        return Ht, frame

    def validate(self, x):
        x = np.asarray(x, dtype=float)
        norms = np.linalg.norm(x, axis=-1)
        if np.any(np.abs(norms - 1.0) > CONSTRAINT_TOL):
            raise InvalidPoint(f"point off the unit sphere by {np.max(np.abs(norms - 1.0)):.2e}")
        return x / norms[..., None]

    def step(self, x, v):
        y = np.asarray(x) + v
        return y / np.linalg.norm(y, axis=-1, keepdims=True)

    def wrap(self, x):
        x = np.asarray(x, dtype=float)
        return x / np.linalg.norm(x, axis=-1, keepdims=True)

    def distance(self, x, y):
        dot = np.clip(np.sum(np.asarray(x) * np.asarray(y), axis=-1), -1.0, 1.0)
        return np.arccos(dot)

    def grid_seeds(self, count: int, seed: int = 0):
        """Fibonacci sphere layout, rotated by a seeded offset."""
        rng = np.random.default_rng(seed)
        offset = rng.uniform(0.0, 1.0)
        i = np.arange(count)
        golden = (1 + 5**0.5) / 2
        z = 1 - 2 * (i + 0.5) / count
        theta = TWO_PI * ((i / golden + offset) % 1.0)
        r = np.sqrt(np.maximum(0.0, 1 - z * z))
        return np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=-1)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubmanifoldSpec:
    """Geometry of a known critical submanifold of a catalog function.

    kinds: "torus_circle" (data = (angle_axis, fixed_axis, fixed_value)),
    "equator" (z = 0 circle of the sphere), "pole" (data = (sign,)).
    Circles carry the rotation offset of their auxiliary cos function.
    """

    sid: str
    kind: str
    bott_index: int
    data: tuple = ()
    aux_offset: float = 0.0

    @property
    def dim(self) -> int:
        return 0 if self.kind == "pole" else 1

    def point_at(self, angle: float, landscape: Landscape):
        if self.kind == "torus_circle":
            axis, fixed_axis, fixed_value = self.data
            coords = np.zeros(landscape.dim)
            coords[axis] = angle
            if landscape.dim > 1:
                coords[fixed_axis] = fixed_value
            return coords
        if self.kind == "equator":
            return np.array([math.cos(angle), math.sin(angle), 0.0])
        if self.kind == "pole":
            (sign,) = self.data
            return np.array([0.0, 0.0, float(sign)])
        raise ValueError(self.kind)

    def angle_of(self, x) -> float:
        if self.kind == "torus_circle":
            axis = self.data[0]
            return float(wrap_angle(np.asarray(x)[..., axis]))
        if self.kind == "equator":
            return float(wrap_angle(math.atan2(x[1], x[0])))
        raise ValueError(f"{self.kind} has no angle coordinate")

    def normal_distance(self, x) -> float:
        if self.kind == "torus_circle":
            _, fixed_axis, fixed_value = self.data
            return float(np.abs(wrap_signed(np.asarray(x)[..., fixed_axis] - fixed_value)))
        if self.kind == "equator":
            return float(abs(math.asin(np.clip(x[2], -1.0, 1.0))))
        if self.kind == "pole":
            (sign,) = self.data
            return float(math.acos(np.clip(sign * x[2], -1.0, 1.0)))
        raise ValueError(self.kind)


@dataclass(frozen=True)
class MorseBottStructure:
    submanifolds: tuple
    tube_inner: float
    tube_outer: float
    eps_max: float

    def spec(self, sid: str) -> SubmanifoldSpec:
        for s in self.submanifolds:
            if s.sid == sid:
                return s
        raise KeyError(sid)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    landscape: Landscape
    manifold: str
    reference_betti: tuple
    is_morse: bool
    mb: Optional[MorseBottStructure] = None
    params: dict = field(default_factory=dict)

    def cubical_model(self) -> CubicalComplex:
        if self.manifold == "circle":
            return CubicalComplex.circle(4)
        if self.manifold == "torus2":
            return CubicalComplex.torus(4, 4)
        if self.manifold == "sphere2":
            return CubicalComplex.cube_surface()
        raise ValueError(self.manifold)


# dented-sphere bump: center at polar angle BETA from the north pole, with
# gaussian-in-chordal-distance profile A exp(-|x - c|^2 / w^2); tuned once so
# the critical inventory is exactly 1 min, 1 saddle, 2 maxima with critical
# values separated by >= 0.06 and positions by >= 0.33.
DENT_A = 0.5
DENT_W = 0.4
DENT_BETA = 1.2


def _sphere_height_field() -> SphereField:
    e_z = np.array([0.0, 0.0, 1.0])
    return SphereField([SphereDotTerm(e_z, lambda u: u, lambda u: np.ones_like(u), lambda u: np.zeros_like(u))])


def _sphere_zsq_field() -> SphereField:
    e_z = np.array([0.0, 0.0, 1.0])
    return SphereField(
        [SphereDotTerm(e_z, lambda u: u**2, lambda u: 2.0 * u, lambda u: 2.0 * np.ones_like(u))]
    )


def _sphere_dented_field() -> SphereField:
    e_z = np.array([0.0, 0.0, 1.0])
    c = np.array([math.sin(DENT_BETA), 0.0, math.cos(DENT_BETA)])
    k = 2.0 / DENT_W**2

    def g0(u):
        return DENT_A * np.exp(k * (u - 1.0))

    def g1(u):
        return DENT_A * k * np.exp(k * (u - 1.0))

    def g2(u):
        return DENT_A * k * k * np.exp(k * (u - 1.0))

    height = SphereDotTerm(e_z, lambda u: u, lambda u: np.ones_like(u), lambda u: np.zeros_like(u))
    return SphereField([height, SphereDotTerm(c, g0, g1, g2)])


def _build_catalog() -> dict:
    entries = {}

    circle = TorusLandscape("circle_cos", 1, TorusField(1, [torus_cos_term(1, 0)]))
    entries["circle_cos"] = CatalogEntry(
        name="circle_cos",
        description="circle with f = cos(theta): one max, one min",
        landscape=circle,
        manifold="circle",
        reference_betti=(1, 1),
        is_morse=True,
    )

    tilted = TorusLandscape(
        "torus_tilted",
        2,
        TorusField(2, [torus_cos_term(2, 0, 1.0), torus_cos_term(2, 1, 2.0)]),
    )
    entries["torus_tilted"] = CatalogEntry(
        name="torus_tilted",
        description="flat 2-torus with f = cos(theta) + 2 cos(phi): Morse, nu = (1,2,1)",
        landscape=tilted,
        manifold="torus2",
        reference_betti=(1, 2, 1),
        is_morse=True,
    )

    cosphi = TorusLandscape("torus_cosphi", 2, TorusField(2, [torus_cos_term(2, 1, 1.0)]))
    entries["torus_cosphi"] = CatalogEntry(
        name="torus_cosphi",
        description="flat 2-torus with f = cos(phi): critical circles at phi = pi (index 0) and phi = 0 (index 1)",
        landscape=cosphi,
        manifold="torus2",
        reference_betti=(1, 2, 1),
        is_morse=False,
        mb=MorseBottStructure(
            submanifolds=(
                SubmanifoldSpec("C0", "torus_circle", 0, (0, 1, math.pi), aux_offset=0.0),
                SubmanifoldSpec("C1", "torus_circle", 1, (0, 1, 0.0), aux_offset=0.5),
            ),
            tube_inner=0.2,
            tube_outer=0.4,
            eps_max=0.01,
        ),
        params={"aux_rotation_top": 0.5},
    )

    entries["sphere_height"] = CatalogEntry(
        name="sphere_height",
        description="round 2-sphere with f = z: poles only",
        landscape=SphereLandscape("sphere_height", _sphere_height_field()),
        manifold="sphere2",
        reference_betti=(1, 0, 1),
        is_morse=True,
    )

    entries["sphere_zsq"] = CatalogEntry(
        name="sphere_zsq",
        description="round 2-sphere with f = z^2: equator circle (index 0) plus two poles (index 2)",
        landscape=SphereLandscape("sphere_zsq", _sphere_zsq_field()),
        manifold="sphere2",
        reference_betti=(1, 0, 1),
        is_morse=False,
        mb=MorseBottStructure(
            submanifolds=(
                SubmanifoldSpec("C0", "equator", 0, aux_offset=0.0),
                SubmanifoldSpec("CN", "pole", 2, (1,)),
                SubmanifoldSpec("CS", "pole", 2, (-1,)),
            ),
            tube_inner=0.2,
            tube_outer=0.4,
            eps_max=0.02,
        ),
    )

    entries["sphere_dented"] = CatalogEntry(
        name="sphere_dented",
        description=(
            "round 2-sphere with f = z + bump: the bump at polar angle "
            f"{DENT_BETA} (amplitude {DENT_A}, width {DENT_W}) splits the top "
            "into two maxima and a saddle, nu = (1,1,2)"
        ),
        landscape=SphereLandscape("sphere_dented", _sphere_dented_field()),
        manifold="sphere2",
        reference_betti=(1, 0, 1),
        is_morse=True,
        params={"A": DENT_A, "w": DENT_W, "beta": DENT_BETA},
    )

    return entries


_CATALOG = None


def catalog() -> dict:
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = _build_catalog()
    return _CATALOG


def catalog_names() -> list:
    return sorted(catalog())


def get_entry(name: str) -> CatalogEntry:
    try:
        return catalog()[name]
    except KeyError:
        raise NotFound(f"unknown landscape {name!r}; known: {', '.join(catalog_names())}") from None
