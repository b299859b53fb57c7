"""Closed-form partition functions of the concrete models.

All log-partitions are sums of per-particle (or per-oscillator) terms and
are evaluated in log space.  Natural units (m = c = k = 1) are assumed in
examples, but every physical scalar is an explicit argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from gibbs.engine import InadmissibleParameter
from gibbs.lie import GalileanAlgebraElement, vec3
from gibbs.oracle.integrate import Domain, gauss_quadrature
from gibbs.special import (
    bessel_k,
    bessel_k2,
    langevin,
    langevin_over_u,
    langevin_prime,
    log_bessel_k2,
    log_one_minus_exp_ratio,
    log_sinhc,
    one_minus_exp_ratio,
    thermal_excess,
)


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def _masses(masses) -> tuple[float, ...]:
    ms = tuple(_positive("mass", m) for m in masses)
    if not ms:
        raise ValueError("at least one particle is required")
    return ms


def _check_b(b) -> float:
    b = float(np.ravel(b)[0])
    if not (b > 0 and math.isfinite(b)):
        raise InadmissibleParameter(f"b must be > 0, got {b}")
    return b


@dataclass(frozen=True)
class IdealGasSpec:
    volume: float
    masses: tuple
    indistinguishable: bool = False

    def __post_init__(self):
        object.__setattr__(self, "volume", _positive("volume", self.volume))
        object.__setattr__(self, "masses", _masses(self.masses))

    @property
    def n(self) -> int:
        return len(self.masses)


@dataclass(frozen=True)
class GravityGasSpec:
    section_area: float
    height: float
    gravity: float
    masses: tuple

    def __post_init__(self):
        object.__setattr__(self, "section_area", _positive("section_area", self.section_area))
        object.__setattr__(self, "height", _positive("height", self.height))
        object.__setattr__(self, "gravity", _positive("gravity", self.gravity))
        object.__setattr__(self, "masses", _masses(self.masses))


@dataclass(frozen=True)
class RelativisticGasSpec:
    volume: float
    light_speed: float
    masses: tuple

    def __post_init__(self):
        object.__setattr__(self, "volume", _positive("volume", self.volume))
        object.__setattr__(self, "light_speed", _positive("light_speed", self.light_speed))
        object.__setattr__(self, "masses", _masses(self.masses))


@dataclass(frozen=True)
class SolidSpec:
    """One frequency per one-dimensional oscillator (3N of them for N atoms)."""

    frequencies: tuple

    def __post_init__(self):
        fs = tuple(_positive("frequency", f) for f in self.frequencies)
        if not fs:
            raise ValueError("at least one oscillator is required")
        object.__setattr__(self, "frequencies", fs)


@dataclass(frozen=True)
class SphereSpec:
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "radius", _positive("radius", self.radius))


@dataclass(frozen=True)
class VesselGeometry:
    """Box (square section centred on the z axis) or cylinder of axis e_z; z in [0, height]."""

    kind: str
    height: float
    radius: float = 0.0
    section_area: float = 0.0

    def __post_init__(self):
        if self.kind not in ("box", "cylinder"):
            raise ValueError(f"vessel geometry must be 'box' or 'cylinder', got {self.kind!r}")
        _positive("height", self.height)
        if self.kind == "cylinder":
            _positive("radius", self.radius)
        else:
            _positive("section_area", self.section_area)

    def domain(self, momentum_truncation: float = 0.0, n_particles: int = 1, tail_bound: float = 0.0) -> Domain:
        if self.kind == "cylinder":
            return Domain("cylinder", radius=self.radius, height=self.height,
                          momentum_truncation=momentum_truncation, n_particles=n_particles,
                          tail_bound=tail_bound)
        a = 0.5 * math.sqrt(self.section_area)
        return Domain("box", lo=(-a, -a, 0.0), hi=(a, a, self.height),
                      momentum_truncation=momentum_truncation, n_particles=n_particles,
                      tail_bound=tail_bound)

    @property
    def volume(self) -> float:
        return self.domain().position_volume()


@dataclass(frozen=True)
class VesselSpec:
    geometry: VesselGeometry
    masses: tuple

    def __post_init__(self):
        object.__setattr__(self, "masses", _masses(self.masses))


# ideal gas


def ideal_gas_log_partition(spec: IdealGasSpec, b: float) -> float:
    b = _check_b(b)
    total = sum(math.log(spec.volume) + 1.5 * math.log(2.0 * math.pi * m / b) for m in spec.masses)
    if spec.indistinguishable:
        total -= math.lgamma(spec.n + 1)
    return total


def ideal_gas_energy(spec: IdealGasSpec, b: float) -> float:
    return 1.5 * spec.n / _check_b(b)


def ideal_gas_pressure(spec: IdealGasSpec, b: float) -> float:
    """(2/3) E / V = N / (b V)."""
    return spec.n / (_check_b(b) * spec.volume)


# gas in a gravity field


def gravity_gas_log_partition(spec: GravityGasSpec, b: float) -> float:
    b = _check_b(b)
    total = 0.0
    for m in spec.masses:
        x = m * spec.gravity * b * spec.height
        total += (math.log(spec.section_area * spec.height)
                  + 1.5 * math.log(2.0 * math.pi * m / b)
                  + log_one_minus_exp_ratio(x))
    return total


def gravity_gas_energy(spec: GravityGasSpec, b: float) -> float:
    """3/(2b) + 1/b - m g h / (exp(m g h b) - 1) per particle."""
    b = _check_b(b)
    total = 0.0
    for m in spec.masses:
        mgh = m * spec.gravity * spec.height
        total += 1.5 / b + mgh * thermal_excess(mgh * b)
    return total


def gravity_gas_energy_derivative(spec: GravityGasSpec, b: float) -> float:
    b = _check_b(b)
    total = 0.0
    for m in spec.masses:
        mgh = m * spec.gravity * spec.height
        x = mgh * b
        # d/dx (1/x - 1/(e^x - 1)) = -1/x^2 + e^x/(e^x - 1)^2
        if x < 1e-3:
            slope = -1.0 / 12.0 + x * x / 240.0
        elif x > 700.0:
            slope = -1.0 / (x * x)
        else:
            slope = -1.0 / (x * x) + 0.25 / math.sinh(0.5 * x) ** 2
        total += -1.5 / b ** 2 + mgh * mgh * slope
    return total


def altitude_density(m: float, g: float, b: float, height: float, z):
    """Normalized marginal density of the altitude on [0, height]."""
    k = m * g * b
    z = np.asarray(z, dtype=float)
    return np.where((z >= 0) & (z <= height),
                    np.exp(-k * z) / (height * one_minus_exp_ratio(k * height)), 0.0)


# relativistic gases


def relativistic_log_partition(spec: RelativisticGasSpec, b: float) -> float:
    b = _check_b(b)
    c = spec.light_speed
    return sum(
        math.log(4.0 * math.pi * spec.volume * c / b) + 2.0 * math.log(m) + log_bessel_k2(m * b * c * c)
        for m in spec.masses
    )


def relativistic_energy(spec: RelativisticGasSpec, b: float) -> float:
    """3/b + m c^2 K1(x)/K2(x) per particle, x = m b c^2."""
    b = _check_b(b)
    c2 = spec.light_speed ** 2
    total = 0.0
    for m in spec.masses:
        x = m * b * c2
        total += 3.0 / b + m * c2 * bessel_k(1.0, x, scaled=True) / bessel_k2(x, scaled=True)
    return total


def relativistic_energy_derivative(spec: RelativisticGasSpec, b: float) -> float:
    b = _check_b(b)
    c2 = spec.light_speed ** 2
    total = 0.0
    for m in spec.masses:
        x = m * b * c2
        k0, k1, k2 = (bessel_k(0.0, x, True), bessel_k(1.0, x, True), bessel_k2(x, True))
        r1 = k1 / k2
        total += -3.0 / b ** 2 + (m * c2) ** 2 * (r1 * r1 - k0 / k2 + r1 / x)
    return total


def juttner_modulus_density(m: float, c: float, b: float, p):
    """Unnormalized density of |p|: p^2 exp(-b c sqrt(p^2 + m^2 c^2))."""
    p = np.asarray(p, dtype=float)
    return p * p * np.exp(-b * c * np.sqrt(p * p + (m * c) ** 2))


def massless_log_partition(volume: float, c: float, n: int, b: float) -> float:
    b = _check_b(b)
    if n < 0:
        raise ValueError("particle count must be >= 0")
    return n * math.log(8.0 * math.pi * volume / (c ** 3 * b ** 3))


def photon_log_partition(volume: float, c: float, b: float) -> float:
    """log P = 16 pi V / (c^3 b^3), the mean photon number."""
    b = _check_b(b)
    return 16.0 * math.pi * volume / (c ** 3 * b ** 3)


def photon_energy(volume: float, c: float, b: float) -> float:
    return 48.0 * math.pi * volume / (c ** 3 * _check_b(b) ** 4)


def photon_number_pmf(volume: float, c: float, b: float, n) -> np.ndarray:
    """Poisson law of the photon number with mean 16 pi V / (c^3 b^3)."""
    from scipy.special import gammaln

    lam = photon_log_partition(volume, c, b)
    n = np.asarray(n)
    if np.any(n < 0):
        raise ValueError("photon number must be >= 0")
    return np.exp(n * math.log(lam) - lam - gammaln(n + 1.0))


# harmonic solid


def solid_log_partition(spec: SolidSpec, b: float) -> float:
    b = _check_b(b)
    return -sum(math.log(f) for f in spec.frequencies) - len(spec.frequencies) * math.log(b)


def solid_energy(spec: SolidSpec, b: float) -> float:
    return len(spec.frequencies) / _check_b(b)


# rotations acting on a sphere


def sphere_log_partition(spec: SphereSpec, b) -> float:
    """log P for the exponent R * (Om . b) implied by J(m) = -R Om.

    P(b) = 4 pi sinh(R^2 |b|) / |b|, equal to the area 4 pi R^2 at b = 0.
    """
    r2 = spec.radius ** 2
    u = r2 * float(np.linalg.norm(vec3(b)))
    return math.log(4.0 * math.pi * r2) + log_sinhc(u)


def sphere_log_partition_gradient(spec: SphereSpec, b) -> np.ndarray:
    b = vec3(b)
    r2 = spec.radius ** 2
    u = r2 * float(np.linalg.norm(b))
    # R^2 L(u) * b / |b| = R^4 (L(u)/u) * b
    return r2 * r2 * langevin_over_u(u) * b


def sphere_log_partition_hessian(spec: SphereSpec, b) -> np.ndarray:
    b = vec3(b)
    r2 = spec.radius ** 2
    norm = float(np.linalg.norm(b))
    u = r2 * norm
    transverse = r2 * r2 * langevin_over_u(u)
    if norm == 0.0:
        return transverse * np.eye(3)
    n = b / norm
    radial = r2 * r2 * langevin_prime(u)
    return radial * np.outer(n, n) + transverse * (np.eye(3) - np.outer(n, n))


def sphere_mean_momentum(spec: SphereSpec, b) -> np.ndarray:
    return -sphere_log_partition_gradient(spec, b)


def sphere_density(spec: SphereSpec, b, point) -> np.ndarray:
    """Gibbs density w.r.t. the area measure, exp(R Om . b) / P(b)."""
    pts = np.asarray(point, dtype=float)
    return np.exp(spec.radius * (pts @ vec3(b)) - sphere_log_partition(spec, b))


def sphere_axial_density(spec: SphereSpec, b, u):
    """Density of cos(angle between Om and b) on [-1, 1]."""
    k = spec.radius ** 2 * float(np.linalg.norm(vec3(b)))
    u = np.asarray(u, dtype=float)
    if k == 0.0:
        return np.full_like(u, 0.5)
    # k exp(k u) / (2 sinh k), written to avoid overflow
    return k * np.exp(k * (u - 1.0)) / (1.0 - math.exp(-2.0 * k))


# gas in a moving vessel


def _epsilon(b: GalileanAlgebraElement) -> float:
    if b.epsilon == 0.0:
        raise ValueError("epsilon must be non-zero")
    return b.epsilon


def drift_velocity(b: GalileanAlgebraElement, r0) -> np.ndarray:
    """Velocity (omega x r0 + delta) / epsilon of the moving frame at r0."""
    eps = _epsilon(b)
    r0 = np.asarray(r0, dtype=float)
    return (np.cross(b.omega, r0) + b.delta) / eps


def frame_potential(b: GalileanAlgebraElement, r0) -> np.ndarray:
    """Potential f(r0) per unit mass seen in the moving frame."""
    eps = _epsilon(b)
    r0 = np.asarray(r0, dtype=float)
    wxr = np.cross(b.omega, r0)
    return (
        r0 @ b.beta / eps
        - np.sum(wxr * wxr, axis=-1) / (2.0 * eps ** 2)
        - (wxr @ b.delta) / eps ** 2
        - float(b.delta @ b.delta) / (2.0 * eps ** 2)
    )


def frame_potential_gradient(b: GalileanAlgebraElement, r0) -> np.ndarray:
    eps = _epsilon(b)
    r0 = np.asarray(r0, dtype=float)
    w = b.omega
    radial = float(w @ w) * r0 - (r0 @ w)[..., None] * w
    return b.beta / eps - radial / eps ** 2 - np.cross(b.delta, w) / eps ** 2


def vessel_coupling(spec: VesselSpec, b: GalileanAlgebraElement, i: int, r0, p0) -> np.ndarray:
    """<J_i, b> = -epsilon (|p0|^2 / (2 m_i) + m_i f(r0)) in co-moving Darboux coordinates."""
    eps = _epsilon(b)
    m = spec.masses[i]
    p0 = np.asarray(p0, dtype=float)
    return -eps * (np.sum(p0 * p0, axis=-1) / (2.0 * m) + m * frame_potential(b, r0))


def log_frame_envelope(spec: VesselSpec, b: GalileanAlgebraElement, i: int) -> float:
    """Upper bound of epsilon m_i f(r) over the vessel.

    For epsilon < 0 the exponent is convex in r, so its maximum sits at an
    extreme point: a vertex of the box, or a point of the two rim circles
    of the cylinder (scanned on a grid plus a Lipschitz margin).
    """
    eps = _epsilon(b)
    if eps > 0:
        raise InadmissibleParameter("epsilon must be < 0")
    m = spec.masses[i]
    geo = spec.geometry
    if geo.kind == "box":
        dom = geo.domain()
        corners = np.array(np.meshgrid(*zip(dom.lo, dom.hi), indexing="ij")).reshape(3, -1).T
        return float(np.max(eps * m * frame_potential(b, corners)))
    k = 4096
    phi = np.linspace(0.0, 2.0 * math.pi, k, endpoint=False)
    rim = np.stack([geo.radius * np.cos(phi), geo.radius * np.sin(phi), np.zeros(k)], axis=1)
    top = rim + np.array([0.0, 0.0, geo.height])
    vals = eps * m * frame_potential(b, np.concatenate([rim, top]))
    if not np.all(np.isfinite(vals)):
        raise ValueError("frame potential is unbounded on the vessel")
    w = float(np.linalg.norm(b.omega))
    rmax = math.hypot(geo.radius, geo.height)
    lipschitz = m * (np.linalg.norm(b.beta) + (w * w * rmax + np.linalg.norm(b.delta) * w) / abs(eps))
    return float(vals.max() + lipschitz * geo.radius * math.pi / k)


def vessel_position_log_integral(spec: VesselSpec, b: GalileanAlgebraElement, i: int,
                                 nodes: int = 48) -> float:
    """log of the integral over the vessel of exp(epsilon m_i f(r))."""
    shift = log_frame_envelope(spec, b, i)
    m = spec.masses[i]
    val = gauss_quadrature(
        spec.geometry.domain(),
        lambda r: np.exp(b.epsilon * m * frame_potential(b, r) - shift),
        nodes,
    )
    return shift + math.log(val)


def vessel_log_partition(spec: VesselSpec, b: GalileanAlgebraElement, nodes: int = 48) -> float:
    if not b.epsilon < 0:
        raise InadmissibleParameter(f"epsilon must be < 0, got {b.epsilon}")
    return sum(
        1.5 * math.log(2.0 * math.pi * m / -b.epsilon) + vessel_position_log_integral(spec, b, i, nodes)
        for i, m in enumerate(spec.masses)
    )


def _centrifuge_rate(spec: VesselSpec, b: GalileanAlgebraElement, i: int) -> float:
    if spec.geometry.kind != "cylinder":
        raise ValueError("the centrifuge law needs a cylindrical vessel")
    if not b.epsilon < 0:
        raise InadmissibleParameter(f"epsilon must be < 0, got {b.epsilon}")
    if np.any(b.beta != 0) or np.any(b.delta != 0) or np.any(b.omega[:2] != 0):
        raise ValueError("the centrifuge law needs omega along e_z and beta = delta = 0")
    w = b.omega[2]
    # m (omega/epsilon)^2 / (2 k T) with k T = -1/epsilon
    return -spec.masses[i] * w * w / (2.0 * b.epsilon)


def centrifuge_radial_density(spec: VesselSpec, b: GalileanAlgebraElement, i: int, delta_radius):
    """Normalized density of the distance to the rotation axis on [0, radius]."""
    a = _centrifuge_rate(spec, b, i)
    big_r = spec.geometry.radius
    d = np.asarray(delta_radius, dtype=float)
    norm = 0.5 * big_r ** 2 * one_minus_exp_ratio(a * big_r ** 2)
    dens = d * np.exp(a * (d * d - big_r ** 2)) / norm
    return np.where((d >= 0) & (d <= big_r), dens, 0.0)


def centrifuge_mean_radius(spec: VesselSpec, b: GalileanAlgebraElement, i: int) -> float:
    val, _ = integrate.quad(
        lambda d: d * centrifuge_radial_density(spec, b, i, d), 0.0, spec.geometry.radius,
        epsabs=0.0, epsrel=1e-12,
    )
    return val


__all__ = [
    "IdealGasSpec", "GravityGasSpec", "RelativisticGasSpec", "SolidSpec", "SphereSpec",
    "VesselGeometry", "VesselSpec", "bessel_k2", "langevin", "langevin_prime",
]
