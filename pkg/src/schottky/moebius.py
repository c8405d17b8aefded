"""Moebius maps of the Riemann sphere and their action on upper half-space.

Points of the sphere are plain Python ``complex`` numbers plus the sentinel
:data:`INF`.  Points of hyperbolic 3-space use the upper half-space model
``{(x1, x2, t) : t > 0}``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import Degenerate, NotLoxodromic

TRACE_TOL = 1e-9
_TIE_TOL = 1e-14
_EPS = 2.220446049250313e-16


class Infinity:
    """The point at infinity of the Riemann sphere (singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()

Point = Union[complex, Infinity]


def is_inf(z) -> bool:
    return z is INF


def as_point(z) -> Point:
    """Coerce ``z`` to a sphere point, rejecting NaN and float infinities."""
    if z is INF:
        return INF
    w = complex(z)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise ValueError(f"non-finite coordinate {z!r}; use INF for the point at infinity")
    return w


@dataclass(frozen=True)
class H3Point:
    x1: float
    x2: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.x1) and math.isfinite(self.x2) and math.isfinite(self.t)):
            raise ValueError("H3Point coordinates must be finite")
        if not self.t > 0:
            raise ValueError(f"H3Point height must be positive, got {self.t}")

    @property
    def z(self) -> complex:
        return complex(self.x1, self.x2)

    @classmethod
    def from_complex(cls, z: complex, t: float) -> "H3Point":
        return cls(float(z.real), float(z.imag), float(t))


ORIGIN = H3Point(0.0, 0.0, 1.0)


def _sign_key(entries) -> float:
    scale = max(abs(e) for e in entries)
    for e in entries:
        for part in (e.real, e.imag):
            if abs(part) > _TIE_TOL * scale:
                return part
    return 1.0


@dataclass(frozen=True)
class MoebiusMap:
    """z -> (a z + b) / (c z + d) with ad - bc = 1.

    Construct through :meth:`from_entries` to get the determinant and sign
    normalization; the raw constructor trusts its input.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def from_entries(cls, a, b, c, d) -> "MoebiusMap":
        a, b, c, d = complex(a), complex(b), complex(c), complex(d)
        ad, bc = a * d, b * c
        det = ad - bc
        if not all(cmath.isfinite(v) for v in (a, b, c, d, det)):
            raise Degenerate(f"non-finite matrix entries (det={det})")
        # products of det-1 matrices with large entries have a determinant that is
        # pure cancellation noise; rescaling by it would destroy them, so only
        # rescale when the determinant is off 1 by more than rounding
        noise = 64 * _EPS * (abs(ad) + abs(bc))
        if abs(det - 1) > noise:
            if det == 0 or abs(det) <= noise:
                raise Degenerate(f"singular matrix (det={det})")
            r = cmath.sqrt(det)
            a, b, c, d = a / r, b / r, c / r, d / r
        if _sign_key((a, b, c, d)) < 0:
            a, b, c, d = -a, -b, -c, -d
        return cls(a, b, c, d)

    @classmethod
    def from_matrix(cls, m) -> "MoebiusMap":
        m = np.asarray(m)
        return cls.from_entries(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @classmethod
    def dilation(cls, lam: complex) -> "MoebiusMap":
        k = cmath.sqrt(complex(lam))
        return cls.from_entries(k, 0, 0, 1 / k)

    @classmethod
    def translation(cls, b: complex) -> "MoebiusMap":
        return cls.from_entries(1, b, 0, 1)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def trace(self) -> complex:
        return self.a + self.d

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap.from_entries(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return compose(self, other)

    def __call__(self, z):
        return apply_sphere(self, z)

    def allclose(self, other: "MoebiusMap", tol: float = 1e-12) -> bool:
        """Equality in PSL(2,C): entrywise up to the overall sign."""
        p, q = self.matrix(), other.matrix()
        return bool(np.max(np.abs(p - q)) <= tol or np.max(np.abs(p + q)) <= tol)


def compose(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    """m1 o m2 (apply m2 first)."""
    return MoebiusMap.from_entries(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    )


def conjugate(m: MoebiusMap, by: MoebiusMap) -> MoebiusMap:
    """by o m o by^-1."""
    return compose(compose(by, m), by.inverse())


def apply_sphere(m: MoebiusMap, z) -> Point:
    if z is INF:
        if m.c == 0:
            return INF
        return m.a / m.c
    z = complex(z)
    num = m.a * z + m.b
    den = m.c * z + m.d
    if abs(den) <= 1e-15 * (abs(m.c * z) + abs(m.d)) or den == 0:
        return INF
    return num / den


def three_point_map(p1, p2, p3) -> MoebiusMap:
    """The map sending p1, p2, p3 to 0, 1, INF."""
    pts = [as_point(p) for p in (p1, p2, p3)]
    p1, p2, p3 = pts
    if p1 is INF:
        return MoebiusMap.from_entries(0, -(p2 - p3), 1, -p3)
    if p2 is INF:
        return MoebiusMap.from_entries(1, -p1, 1, -p3)
    if p3 is INF:
        return MoebiusMap.from_entries(1, -p1, 0, p2 - p1)
    return MoebiusMap.from_entries(p2 - p3, -p1 * (p2 - p3), p2 - p1, -p3 * (p2 - p1))


def map_sending(zero, infinity) -> MoebiusMap:
    """A map sending 0 to ``zero`` and INF to ``infinity``."""
    zero, infinity = as_point(zero), as_point(infinity)
    if zero is INF and infinity is INF:
        raise Degenerate("images of 0 and INF coincide")
    if zero is INF:
        return MoebiusMap.from_entries(infinity, 1, 1, 0)
    if infinity is INF:
        return MoebiusMap.from_entries(1, zero, 0, 1)
    if zero == infinity:
        raise Degenerate("images of 0 and INF coincide")
    return MoebiusMap.from_entries(infinity, zero, 1, 1)


# --- classification ---------------------------------------------------------


def classify(m: MoebiusMap, tol: float = TRACE_TOL) -> str:
    """One of 'identity', 'parabolic', 'elliptic', 'loxodromic'."""
    tr = m.trace()
    if abs(tr * tr - 4) <= tol:
        if abs(m.b) <= tol and abs(m.c) <= tol and abs(m.a - m.d) <= tol:
            return "identity"
        return "parabolic"
    if abs(tr.imag) <= tol and abs(tr.real) < 2:
        return "elliptic"
    return "loxodromic"


@dataclass(frozen=True)
class LoxodromicData:
    fixed_minus: Point
    fixed_plus: Point
    multiplier: complex
    translation_length: float


def _eigenpoint(m: MoebiusMap, e: complex) -> Point:
    # eigenvector of [[a,b],[c,d]] for eigenvalue e, read as a sphere point
    v1 = (m.b, e - m.a)
    v2 = (e - m.d, m.c)
    u = v1 if abs(v1[0]) + abs(v1[1]) >= abs(v2[0]) + abs(v2[1]) else v2
    if abs(u[1]) <= 1e-15 * abs(u[0]):
        return INF
    return u[0] / u[1]


def loxodromic_data(m: MoebiusMap) -> LoxodromicData:
    """Fixed points (repelling, attracting), multiplier |lam| > 1, translation length."""
    kind = classify(m)
    if kind != "loxodromic":
        raise NotLoxodromic(f"map is {kind} (trace {m.trace()})")
    tr = m.trace()
    root = cmath.sqrt(tr * tr - 4)
    k = (tr + root) / 2
    if abs(k) < 1:
        k = (tr - root) / 2
    k_small = 1 / k
    lam = k * k
    plus = _eigenpoint(m, k)
    minus = _eigenpoint(m, k_small)
    return LoxodromicData(minus, plus, lam, 2.0 * math.log(abs(k)))


def translation_length(m: MoebiusMap) -> float:
    return loxodromic_data(m).translation_length


# --- upper half-space --------------------------------------------------------


def apply_h3(m: MoebiusMap, x: H3Point) -> H3Point:
    """Poincare extension of ``m`` acting on upper half-space."""
    z, t = x.z, x.t
    cz_d = m.c * z + m.d
    den = abs(cz_d) ** 2 + abs(m.c) ** 2 * t * t
    w = ((m.a * z + m.b) * cz_d.conjugate() + m.a * m.c.conjugate() * t * t) / den
    return H3Point.from_complex(w, t / den)


def _frame(x: H3Point) -> MoebiusMap:
    # sends the origin (0,0,1) to x
    s = math.sqrt(x.t)
    return MoebiusMap(complex(s), x.z / s, 0j, complex(1 / s))


def h3_distance(x: H3Point, y: H3Point) -> float:
    num = abs(x.z - y.z) ** 2 + (x.t - y.t) ** 2
    return 2.0 * math.asinh(math.sqrt(num) / (2.0 * math.sqrt(x.t * y.t)))


def h3_displacement(m: MoebiusMap, x: H3Point = ORIGIN) -> float:
    """Hyperbolic distance d(x, m x), via the Frobenius norm of the recentred matrix."""
    f = _frame(x)
    n = compose(compose(f.inverse(), m), f)
    fro = abs(n.a) ** 2 + abs(n.b) ** 2 + abs(n.c) ** 2 + abs(n.d) ** 2
    return 2.0 * math.asinh(math.sqrt(max(fro - 2.0, 0.0)) / 2.0)


def _ball_vector(p) -> np.ndarray:
    """Image in the unit ball of a point of upper half-space or of the sphere,
    for the isometry sending (0,0,1) to the centre."""
    if p is INF:
        return np.array([0.0, 0.0, -1.0])
    if isinstance(p, H3Point):
        x1, x2, t = p.x1, p.x2, p.t
    else:
        x1, x2, t = p.real, p.imag, 0.0
    q2 = x1 * x1 + x2 * x2 + (t + 1.0) ** 2
    return np.array([2 * x1 / q2, 2 * x2 / q2, 2 * (t + 1.0) / q2 - 1.0])


def visual_angle(x: H3Point, y: H3Point, zeta) -> float:
    """Angle at ``x`` between the geodesic towards ``y`` and the ray towards ``zeta``."""
    f_inv = _frame(x).inverse()
    u = _ball_vector(apply_h3(f_inv, y))
    v = _ball_vector(apply_sphere(f_inv, zeta))
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    c = float(np.dot(u, v) / (nu * nv))
    return math.acos(min(1.0, max(-1.0, c)))


def kernel_value(distance: float, angle: float, s: float) -> float:
    """(cosh d - sinh d cos angle)^(-s)."""
    # cosh d - sinh d cos a = e^-d cos^2(a/2) + e^d sin^2(a/2), no cancellation
    base = math.exp(-distance) * math.cos(angle / 2) ** 2 + math.exp(distance) * math.sin(angle / 2) ** 2
    return base ** (-s)


def poisson_kernel(m: MoebiusMap, x: H3Point, zeta, s: float) -> float:
    """Poisson kernel of the orbit point m^-1 x seen from x, towards ``zeta``, to the power s."""
    if s < 0:
        raise ValueError("exponent s must be nonnegative")
    d = h3_displacement(m, x)
    if d == 0.0:
        return 1.0
    angle = visual_angle(x, apply_h3(m.inverse(), x), zeta)
    return kernel_value(d, angle, s)


# --- cross ratio -------------------------------------------------------------


def cross_ratio(z1, z2, z3, z4) -> Point:
    """(z1 - z3)(z2 - z4) / ((z1 - z4)(z2 - z3)), extended to the sphere."""
    pts = [as_point(z) for z in (z1, z2, z3, z4)]

    def factor(i, j):
        p, q = pts[i], pts[j]
        if p is INF and q is INF:
            return 0j
        if p is INF or q is INF:
            return None  # cancels against its partner factor
        return p - q

    num = [factor(0, 2), factor(1, 3)]
    den = [factor(0, 3), factor(1, 2)]
    n_zero = sum(1 for f in num if f is not None and f == 0)
    d_zero = sum(1 for f in den if f is not None and f == 0)
    if n_zero and d_zero:
        raise Degenerate("cross ratio is 0/0 for this configuration")
    if n_zero:
        return 0j
    if d_zero:
        return INF
    top = 1 + 0j
    for f in num:
        if f is not None:
            top *= f
    bottom = 1 + 0j
    for f in den:
        if f is not None:
            bottom *= f
    return top / bottom


# --- vectorised helpers used by the series code ------------------------------


def stack(maps) -> np.ndarray:
    return np.array([m.matrix() for m in maps], dtype=complex).reshape(-1, 2, 2)


def batch_displacement(mats: np.ndarray, x: H3Point = ORIGIN) -> np.ndarray:
    """d(x, M x) for a stack of SL(2,C) matrices of shape (k, 2, 2)."""
    s = math.sqrt(x.t)
    f = np.array([[s, x.z / s], [0, 1 / s]], dtype=complex)
    f_inv = np.array([[1 / s, -x.z / s], [0, s]], dtype=complex)
    n = f_inv @ mats @ f
    fro = np.sum(np.abs(n) ** 2, axis=(1, 2))
    return 2.0 * np.arcsinh(np.sqrt(np.maximum(fro - 2.0, 0.0)) / 2.0)


def batch_apply_h3(mats: np.ndarray, x: H3Point = ORIGIN):
    """Images (z, t) of x under a stack of matrices."""
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    z, t = x.z, x.t
    cz_d = c * z + d
    den = np.abs(cz_d) ** 2 + np.abs(c) ** 2 * t * t
    w = ((a * z + b) * np.conj(cz_d) + a * np.conj(c) * t * t) / den
    return w, t / den


def batch_apply_finite(mats: np.ndarray, z: complex) -> np.ndarray:
    """Images of a finite point; callers guarantee no pole is hit."""
    return (mats[:, 0, 0] * z + mats[:, 0, 1]) / (mats[:, 1, 0] * z + mats[:, 1, 1])


def batch_apply(mats: np.ndarray, z) -> np.ndarray:
    if z is INF:
        return mats[:, 0, 0] / mats[:, 1, 0]
    return batch_apply_finite(mats, complex(z))


def batch_derivative(mats: np.ndarray, z: complex) -> np.ndarray:
    """|M'(z)| = 1 / |c z + d|^2 for det-1 matrices."""
    return 1.0 / np.abs(mats[:, 1, 0] * z + mats[:, 1, 1]) ** 2
