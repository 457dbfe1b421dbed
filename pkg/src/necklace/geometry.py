"""Planar affine maps, points and enclosing balls.

Everything here is plain float64 arithmetic on 2x2 matrices. A map is stored
as the six numbers of ``z -> A z + t`` so that instances are hashable and
immutable; ``linear`` and ``translation`` give numpy views for bulk work.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

# Absolute floor used when comparing coordinates produced by float arithmetic.
EPS = 1e-12


class NotContractive(ValueError):
    """Raised when a map's operator norm is not below one."""


class SingularMap(ValueError):
    """Raised when a map has zero determinant (not a homeomorphism)."""


class Point(NamedTuple):
    x: float
    y: float

    def __sub__(self, other) -> "Point":  # type: ignore[override]
        return Point(self.x - other[0], self.y - other[1])

    def __add__(self, other) -> "Point":  # type: ignore[override]
        return Point(self.x + other[0], self.y + other[1])

    def scale(self, s: float) -> "Point":
        return Point(self.x * s, self.y * s)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, other) -> float:
        return math.hypot(self.x - other[0], self.y - other[1])

    @classmethod
    def from_complex(cls, z: complex) -> "Point":
        return cls(float(z.real), float(z.imag))

    def to_complex(self) -> complex:
        return complex(self.x, self.y)


def as_point(p) -> Point:
    if isinstance(p, Point):
        return p
    if isinstance(p, complex):
        return Point.from_complex(p)
    x, y = p
    return Point(float(x), float(y))


def spectral_norm(a: float, b: float, c: float, d: float) -> float:
    """Largest singular value of [[a, b], [c, d]] in closed form.

    Splitting the matrix into its conformal and anticonformal parts gives
    sigma_max = (|(a+d, c-b)| + |(a-d, c+b)|) / 2 with no cancellation, so
    similitudes (equal singular values) keep full precision.
    """
    return 0.5 * (math.hypot(a + d, c - b) + math.hypot(a - d, c + b))


@dataclass(frozen=True)
class AffineMap:
    """The map ``p -> [[a, b], [c, d]] p + (tx, ty)``.

    Contractions (operator norm < 1) are the members of an IFS; inverses of
    contractions are expansions and use the same type.
    """

    a: float
    b: float
    c: float
    d: float
    tx: float = 0.0
    ty: float = 0.0

    def __post_init__(self):
        vals = (self.a, self.b, self.c, self.d, self.tx, self.ty)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite coefficient in {vals}")
        for name in ("a", "b", "c", "d", "tx", "ty"):
            object.__setattr__(self, name, float(getattr(self, name)))

    # construction helpers -------------------------------------------------
    @classmethod
    def from_arrays(cls, linear, translation=(0.0, 0.0)) -> "AffineMap":
        m = np.asarray(linear, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"linear part must be 2x2, got shape {m.shape}")
        t = np.asarray(translation, dtype=float)
        if t.shape != (2,):
            raise ValueError(f"translation must have 2 entries, got shape {t.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1], t[0], t[1])

    @classmethod
    def from_complex(cls, w: complex, shift: complex = 0j, conjugate: bool = False) -> "AffineMap":
        """``z -> w*z + shift`` (or ``w*conj(z) + shift``) as a real map."""
        w = complex(w)
        shift = complex(shift)
        if conjugate:
            # w * conj(z) = [[wr, wi], [wi, -wr]] (x, y)
            return cls(w.real, w.imag, w.imag, -w.real, shift.real, shift.imag)
        return cls(w.real, -w.imag, w.imag, w.real, shift.real, shift.imag)

    @classmethod
    def similitude(cls, ratio: float, angle: float = 0.0, shift=(0.0, 0.0),
                   reflect: bool = False) -> "AffineMap":
        s = as_point(shift)
        return cls.from_complex(ratio * cmath.exp(1j * angle), s.to_complex(), conjugate=reflect)

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    # views ----------------------------------------------------------------
    @property
    def linear(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.tx, self.ty])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def norm(self) -> float:
        return spectral_norm(self.a, self.b, self.c, self.d)

    def is_similitude(self, tol: float = EPS) -> bool:
        # A = r * (rotation or reflection) iff the columns are orthogonal with equal length
        col = abs(self.a * self.b + self.c * self.d)
        return col <= tol and abs(math.hypot(self.a, self.c) - math.hypot(self.b, self.d)) <= tol

    # algebra --------------------------------------------------------------
    def __call__(self, p) -> Point:
        x, y = p
        return Point(self.a * x + self.b * y + self.tx, self.c * x + self.d * y + self.ty)

    def apply_array(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return pts @ self.linear.T + self.translation

    def __matmul__(self, inner: "AffineMap") -> "AffineMap":
        """``self @ inner`` is the composition ``self o inner``."""
        o, i = self, inner
        return AffineMap(
            o.a * i.a + o.b * i.c, o.a * i.b + o.b * i.d,
            o.c * i.a + o.d * i.c, o.c * i.b + o.d * i.d,
            o.a * i.tx + o.b * i.ty + o.tx, o.c * i.tx + o.d * i.ty + o.ty,
        )

    def inverse(self) -> "AffineMap":
        det = self.det
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d), 1e-300)
        if abs(det) <= 1e-14 * scale * scale:
            raise SingularMap(f"determinant {det!r} is zero; map is not invertible")
        ia, ib, ic, id_ = self.d / det, -self.b / det, -self.c / det, self.a / det
        return AffineMap(ia, ib, ic, id_,
                         -(ia * self.tx + ib * self.ty), -(ic * self.tx + id_ * self.ty))

    def fixed_point(self) -> Point:
        # (I - A) p = t
        m00, m01, m10, m11 = 1.0 - self.a, -self.b, -self.c, 1.0 - self.d
        det = m00 * m11 - m01 * m10
        if det == 0.0:
            raise SingularMap("I - A is singular; the map has no unique fixed point")
        return Point((m11 * self.tx - m01 * self.ty) / det, (-m10 * self.tx + m00 * self.ty) / det)

    def contraction_factor(self) -> float:
        r = self.norm
        if r >= 1.0:
            raise NotContractive(f"operator norm {r:.12g} is not < 1")
        return r

    def close_to(self, other: "AffineMap", tol: float = EPS) -> bool:
        return all(abs(u - v) <= tol for u, v in zip(self.coefficients(), other.coefficients()))

    def coefficients(self) -> tuple[float, float, float, float, float, float]:
        return (self.a, self.b, self.c, self.d, self.tx, self.ty)


# Functional aliases. The rest of the package mostly calls these.

def apply(m: AffineMap, p) -> Point:
    return m(p)


def compose(outer: AffineMap, inner: AffineMap) -> AffineMap:
    return outer @ inner


def inverse(m: AffineMap) -> AffineMap:
    return m.inverse()


def contraction_factor(m: AffineMap) -> float:
    return m.contraction_factor()


def fixed_point(m: AffineMap) -> Point:
    return m.fixed_point()


def compose_word(maps, word: Iterable[int]) -> AffineMap:
    """f_{i1} o f_{i2} o ... for a word of 1-based digits."""
    out = AffineMap.identity()
    for digit in word:
        out = out @ maps[digit - 1]
    return out


@dataclass(frozen=True)
class Ball:
    center: Point
    radius: float

    def __post_init__(self):
        if not self.radius >= 0.0:
            raise ValueError(f"radius must be nonnegative, got {self.radius!r}")
        object.__setattr__(self, "center", as_point(self.center))

    def contains_point(self, p, slack: float = 0.0) -> bool:
        return self.center.dist(p) <= self.radius + slack

    def contains_ball(self, other: "Ball", slack: float = 0.0) -> bool:
        return self.center.dist(other.center) + other.radius <= self.radius + slack

    def intersects(self, other: "Ball", slack: float = 0.0) -> bool:
        return self.center.dist(other.center) <= self.radius + other.radius + slack

    def separation(self, other: "Ball") -> float:
        """Positive gap between the balls, negative when they overlap."""
        return self.center.dist(other.center) - self.radius - other.radius

    def image(self, m: AffineMap) -> "Ball":
        return Ball(m(self.center), self.radius * m.norm)
