"""SO(3) and Galilean group machinery.

Vectors are plain ``numpy`` arrays of shape (3,).  The dual of each Lie
algebra is identified with the algebra through the Euclidean pairing, so
there is no separate dual type.  Group elements act on the left.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# |omega| * tau below this uses the power series of the sin/cos combinations
_SERIES_LIMIT = 0.5
_SERIES_TERMS = 9


def vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite vector {a}")
    return a


def hat(omega) -> np.ndarray:
    """Skew-symmetric matrix with hat(omega) @ r == cross(omega, r)."""
    wx, wy, wz = vec3(omega)
    return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])


def _phi(k: int, x: float) -> float:
    """sum_{j>=0} (-1)^j x^(2j) / (2j + k)!  for k = 1..4.

    phi(1) = sin(x)/x, phi(2) = (1 - cos x)/x^2, phi(3) = (x - sin x)/x^3,
    phi(4) = (cos x - 1 + x^2/2)/x^4.
    """
    if abs(x) < _SERIES_LIMIT:
        total, term, x2 = 0.0, 1.0 / float(np.prod(np.arange(1, k + 1))), x * x
        for j in range(_SERIES_TERMS):
            total += term
            term *= -x2 / ((2 * j + k + 1) * (2 * j + k + 2))
        return total
    s, c = np.sin(x), np.cos(x)
    if k == 1:
        return s / x
    if k == 2:
        return (1.0 - c) / x ** 2
    if k == 3:
        return (x - s) / x ** 3
    return (c - 1.0 + 0.5 * x * x) / x ** 4


def rotation(omega, tau: float = 1.0) -> np.ndarray:
    """exp(tau * hat(omega)) by the Rodrigues formula."""
    w = vec3(omega)
    x = float(np.linalg.norm(w)) * tau
    j = hat(w)
    return np.eye(3) + tau * _phi(1, x) * j + tau ** 2 * _phi(2, x) * (j @ j)


def rotation_about(axis, angle: float) -> np.ndarray:
    a = vec3(axis)
    n = np.linalg.norm(a)
    if n == 0.0:
        raise ValueError("rotation axis must be non-zero")
    return rotation(a / n, angle)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@dataclass(frozen=True)
class GalileanAlgebraElement:
    """Generator (omega, beta, delta, epsilon) of the Galilean Lie algebra."""

    omega: np.ndarray
    beta: np.ndarray
    delta: np.ndarray
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "omega", vec3(self.omega))
        object.__setattr__(self, "beta", vec3(self.beta))
        object.__setattr__(self, "delta", vec3(self.delta))
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @classmethod
    def from_vector(cls, v) -> "GalileanAlgebraElement":
        v = np.asarray(v, dtype=float).reshape(10)
        return cls(v[0:3], v[3:6], v[6:9], v[9])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.omega, self.beta, self.delta, [self.epsilon]])

    def matrix(self) -> np.ndarray:
        m = np.zeros((5, 5))
        m[:3, :3] = hat(self.omega)
        m[:3, 3] = self.beta
        m[:3, 4] = self.delta
        m[3, 4] = self.epsilon
        return m

    def scaled(self, s: float) -> "GalileanAlgebraElement":
        return GalileanAlgebraElement.from_vector(s * self.as_vector())

    @property
    def admissible(self) -> bool:
        return self.epsilon < 0.0


@dataclass(frozen=True)
class GalileanGroupElement:
    """Galilean transformation (A, b, d, e) acting on (r, t) by r -> A r + t b + d, t -> t + e."""

    a: np.ndarray
    b_vec: np.ndarray
    d_vec: np.ndarray
    e: float

    @classmethod
    def identity(cls) -> "GalileanGroupElement":
        return cls(np.eye(3), np.zeros(3), np.zeros(3), 0.0)

    @classmethod
    def from_matrix(cls, m) -> "GalileanGroupElement":
        m = np.asarray(m, dtype=float)
        return cls(m[:3, :3].copy(), m[:3, 3].copy(), m[:3, 4].copy(), float(m[3, 4]))

    def matrix(self) -> np.ndarray:
        m = np.eye(5)
        m[:3, :3] = self.a
        m[:3, 3] = self.b_vec
        m[:3, 4] = self.d_vec
        m[3, 4] = self.e
        return m

    def __matmul__(self, other: "GalileanGroupElement") -> "GalileanGroupElement":
        return GalileanGroupElement.from_matrix(self.matrix() @ other.matrix())

    def act(self, r, t: float, v) -> tuple[np.ndarray, float, np.ndarray]:
        """Image of a particle state (position r and velocity v at time t)."""
        r = np.asarray(r, dtype=float)
        v = np.asarray(v, dtype=float)
        r1 = r @ self.a.T + t * self.b_vec + self.d_vec
        v1 = v @ self.a.T + self.b_vec
        return r1, t + self.e, v1


def galilean_exp(x: GalileanAlgebraElement, tau: float) -> GalileanGroupElement:
    """exp(tau * x) in closed form.

    With J = hat(omega) and s = |omega| tau the power series collapse to
    b(tau) = V beta and d(tau) = V delta + epsilon W beta where
    V = tau I + tau^2 phi2 J + tau^3 phi3 J^2 and
    W = tau^2/2 I + tau^3 phi3 J + tau^4 phi4 J^2.
    """
    tau = float(tau)
    s = float(np.linalg.norm(x.omega)) * tau
    j = hat(x.omega)
    j2 = j @ j
    p2, p3, p4 = _phi(2, s), _phi(3, s), _phi(4, s)
    eye = np.eye(3)
    a = eye + tau * _phi(1, s) * j + tau ** 2 * p2 * j2
    v = tau * eye + tau ** 2 * p2 * j + tau ** 3 * p3 * j2
    w = 0.5 * tau ** 2 * eye + tau ** 3 * p3 * j + tau ** 4 * p4 * j2
    b = v @ x.beta
    d = v @ x.delta + x.epsilon * (w @ x.beta)
    return GalileanGroupElement(a, b, d, tau * x.epsilon)


@dataclass(frozen=True)
class GalileanMomentum:
    """Value (l, g, p, kappa) of the Galilean momentum map."""

    ell: np.ndarray
    g: np.ndarray
    p: np.ndarray
    kappa: float

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.ell, self.g, self.p, [self.kappa]])

    @classmethod
    def from_vector(cls, v) -> "GalileanMomentum":
        v = np.asarray(v, dtype=float).reshape(10)
        return cls(v[0:3], v[3:6], v[6:9], float(v[9]))

    def __add__(self, other: "GalileanMomentum") -> "GalileanMomentum":
        return GalileanMomentum.from_vector(self.as_vector() + other.as_vector())


# <J, x> = sum(GALILEAN_DUAL_SIGNS * J.as_vector() * x.as_vector())
GALILEAN_DUAL_SIGNS = np.array([1.0] * 3 + [-1.0] * 3 + [1.0] * 3 + [-1.0])


def free_particle_momentum(r, v, t: float, m: float) -> GalileanMomentum:
    """m (r x v, r - t v, v, |v|^2 / 2) for a free particle."""
    if not m > 0:
        raise ValueError(f"mass must be positive, got {m}")
    r, v = vec3(r), vec3(v)
    return GalileanMomentum(m * np.cross(r, v), m * (r - t * v), m * v, 0.5 * m * float(v @ v))


def galilean_pairing(j: GalileanMomentum, x: GalileanAlgebraElement) -> float:
    return float(
        j.ell @ x.omega - j.g @ x.beta + j.p @ x.delta - j.kappa * x.epsilon
    )


def sphere_momentum(point, radius: float, atol: float = 1e-9) -> np.ndarray:
    """Momentum map -R * Om of the rotation action on the sphere of radius R."""
    p = vec3(point)
    if abs(np.linalg.norm(p) - radius) > atol:
        raise ValueError(f"point {p} is not on the sphere of radius {radius}")
    return -radius * p


def so3_bracket(x, y) -> np.ndarray:
    return np.cross(x, y)


def coadjoint_star(x, xi) -> np.ndarray:
    """ad*_x xi for so(3): the vector eta with eta . y == xi . (x cross y) for all y."""
    return np.cross(xi, x)
