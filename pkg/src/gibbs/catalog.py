"""ThermoModel descriptors for the concrete models.

Each builder wires a model's coupling, oracle domain, closed forms, sampler,
flow and test marginal together.  Parameters are flat arrays: length 1 for
the scalar models, 3 for the sphere and 10 for the vessel.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from gibbs import models as M
from gibbs.engine import OK, AdmissibilityResult, ThermoModel, UnsupportedModel, positive_scalar
from gibbs.lie import GALILEAN_DUAL_SIGNS, GalileanAlgebraElement, coadjoint_star, rotation, so3_bracket
from gibbs.mechanics import FlowSpec, integrate_flow
from gibbs.oracle import samplers as S
from gibbs.oracle.integrate import Domain, gauss_quadrature, gaussian_truncation

REL_TAIL = 1e-12
# quadrature cut-off in units of the Gaussian width (tail ~ 1e-32)
_QUAD_WIDTHS = 12.0


def _scalar(b) -> float:
    return float(np.ravel(b)[0])


def _kinetic(points, masses) -> np.ndarray:
    p = points[..., 3:6]
    return np.sum(np.sum(p * p, axis=-1) / (2.0 * np.asarray(masses)), axis=-1)


def _log_gauss_1d(sigma: float, nodes: int = 128) -> float:
    """log of the integral of exp(-x^2 / (2 sigma^2)) over the real line, by quadrature."""
    half = _QUAD_WIDTHS * sigma
    dom = Domain("box", lo=(-half,), hi=(half,))
    return math.log(gauss_quadrature(dom, lambda x: np.exp(-0.5 * (x[:, 0] / sigma) ** 2), nodes))


def _radial_log_integral(log_weight, upper: float, nodes: int = 256) -> float:
    """log of 4 pi int_0^upper p^2 exp(log_weight(p)) dp; log_weight(0) is the shift."""
    shift = log_weight(np.array([0.0]))[0]
    dom = Domain("box", lo=(0.0,), hi=(upper,))
    val = gauss_quadrature(dom, lambda x: x[:, 0] ** 2 * np.exp(log_weight(x[:, 0]) - shift), nodes)
    return math.log(4.0 * math.pi * val) + shift


def _gamma3_truncation(scale: float, n_particles: int, mass_fraction: float = 1.0) -> tuple[float, float]:
    """Radius where a Gamma(3, scale) modulus law keeps all but REL_TAIL of the mass.

    ``mass_fraction`` <= 1 is the ratio of the target's normalization to the
    Gamma law's when the target is dominated by it pointwise.
    """
    per = REL_TAIL * mass_fraction / (2 * n_particles)
    radius = float(stats.gamma.isf(per, 3, scale=scale))
    return radius, n_particles * float(stats.gamma.sf(radius, 3, scale=scale)) / mass_fraction


def _uniform_marginal(length: float):
    return (lambda pts: pts[:, 0, 0], lambda x: np.ones_like(np.asarray(x, dtype=float)), (0.0, length))


def ideal_gas_model(spec: M.IdealGasSpec) -> ThermoModel:
    side = spec.volume ** (1.0 / 3.0)
    masses = np.asarray(spec.masses)
    n = spec.n

    def domain(b):
        radius, tail = gaussian_truncation(np.sqrt(masses / _scalar(b)), n, REL_TAIL)
        return Domain("box", lo=(0.0,) * 3, hi=(side,) * 3, momentum_truncation=radius,
                      n_particles=n, tail_bound=tail)

    def transport(points, b, tau):
        flow = FlowSpec("free", dt=float(tau), steps=1, box=side)
        tr = integrate_flow(flow, points[..., :3], points[..., 3:], masses, None)
        return np.concatenate([tr.q[-1], tr.p[-1]], axis=-1)

    def quadrature(b):
        b = _scalar(b)
        total = sum(math.log(spec.volume) + 3.0 * _log_gauss_1d(math.sqrt(m / b)) for m in masses)
        return total - (math.lgamma(n + 1) if spec.indistinguishable else 0.0)

    return ThermoModel(
        name="ideal_gas",
        dim_b=1,
        coupling=lambda pts, b: _scalar(b) * _kinetic(pts, masses),
        admissible=positive_scalar,
        domain=domain,
        closed_form_log_partition=lambda b: M.ideal_gas_log_partition(spec, b),
        closed_form_gradient=lambda b: -M.ideal_gas_energy(spec, b),
        closed_form_hessian=lambda b: 1.5 * n / _scalar(b) ** 2,
        sampler=lambda b, k, seed: S.sample_ideal(spec, b, k, seed),
        transport=transport,
        marginal=lambda b: _uniform_marginal(side),
        hamiltonian=lambda pts: _kinetic(pts, masses),
        quadrature_log_partition=quadrature,
        params={"spec": spec},
    )


def gravity_gas_model(spec: M.GravityGasSpec) -> ThermoModel:
    side = math.sqrt(spec.section_area)
    masses = np.asarray(spec.masses)
    g = spec.gravity

    def hamiltonian(pts):
        return _kinetic(pts, masses) + np.sum(masses * g * pts[..., 2], axis=-1)

    def domain(b):
        radius, tail = gaussian_truncation(np.sqrt(masses / _scalar(b)), masses.size, REL_TAIL)
        return Domain("box", lo=(0.0, 0.0, 0.0), hi=(side, side, spec.height), momentum_truncation=radius,
                      n_particles=masses.size, tail_bound=tail)

    def quadrature(b):
        b = _scalar(b)
        total = 0.0
        for m in masses:
            k = m * g * b
            dom = Domain("box", lo=(0.0,), hi=(spec.height,))
            column = gauss_quadrature(dom, lambda z: np.exp(-k * z[:, 0]), 64)
            total += math.log(spec.section_area * column) + 3.0 * _log_gauss_1d(math.sqrt(m / b))
        return total

    def marginal(b):
        m0 = masses[0]
        return (lambda pts: pts[:, 0, 2],
                lambda z: M.altitude_density(m0, g, _scalar(b), spec.height, z),
                (0.0, spec.height))

    return ThermoModel(
        name="gravity_gas",
        dim_b=1,
        coupling=lambda pts, b: _scalar(b) * hamiltonian(pts),
        admissible=positive_scalar,
        domain=domain,
        closed_form_log_partition=lambda b: M.gravity_gas_log_partition(spec, b),
        closed_form_gradient=lambda b: -M.gravity_gas_energy(spec, b),
        closed_form_hessian=lambda b: -M.gravity_gas_energy_derivative(spec, b),
        sampler=lambda b, k, seed: S.sample_gravity(spec, b, k, seed),
        marginal=marginal,
        hamiltonian=hamiltonian,
        quadrature_log_partition=quadrature,
        params={"spec": spec},
    )


def _juttner_upper(m: float, c: float, b: float) -> float:
    """|p| where b c (sqrt(p^2 + m^2 c^2) - m c) reaches 80."""
    top = m * c + 80.0 / (b * c)
    return math.sqrt(top * top - (m * c) ** 2)


def relativistic_gas_model(spec: M.RelativisticGasSpec) -> ThermoModel:
    side = spec.volume ** (1.0 / 3.0)
    masses = np.asarray(spec.masses)
    c = spec.light_speed

    def hamiltonian(pts):
        p = pts[..., 3:6]
        return np.sum(c * np.sqrt(np.sum(p * p, axis=-1) + (masses * c) ** 2), axis=-1)

    def domain(b):
        b = _scalar(b)
        # the target is dominated by the massless law exp(-b c |p|)
        frac = min(S.juttner_acceptance(m, c, b) for m in masses)
        radius, tail = _gamma3_truncation(1.0 / (b * c), masses.size, frac)
        return Domain("box", lo=(0.0,) * 3, hi=(side,) * 3, momentum_truncation=radius,
                      n_particles=masses.size, tail_bound=tail)

    def quadrature(b):
        b = _scalar(b)
        return sum(
            math.log(spec.volume)
            + _radial_log_integral(lambda p, m=m: -b * c * np.sqrt(p * p + (m * c) ** 2),
                                   _juttner_upper(m, c, b))
            for m in masses
        )

    def marginal(b):
        b = _scalar(b)
        m0 = masses[0]
        return (lambda pts: np.linalg.norm(pts[:, 0, 3:6], axis=-1),
                lambda p: M.juttner_modulus_density(m0, c, b, p) * math.exp(b * m0 * c * c),
                (0.0, _juttner_upper(m0, c, b)))

    return ThermoModel(
        name="relativistic_gas",
        dim_b=1,
        coupling=lambda pts, b: _scalar(b) * hamiltonian(pts),
        admissible=positive_scalar,
        domain=domain,
        closed_form_log_partition=lambda b: M.relativistic_log_partition(spec, b),
        closed_form_gradient=lambda b: -M.relativistic_energy(spec, b),
        closed_form_hessian=lambda b: -M.relativistic_energy_derivative(spec, b),
        sampler=lambda b, k, seed: S.sample_relativistic(spec, b, k, seed),
        marginal=marginal,
        hamiltonian=hamiltonian,
        quadrature_log_partition=quadrature,
        params={"spec": spec},
    )


def massless_gas_model(volume: float, light_speed: float, n_particles: int) -> ThermoModel:
    side = volume ** (1.0 / 3.0)
    c = light_speed
    if n_particles < 1:
        raise ValueError("the massless gas model needs at least one particle")

    def hamiltonian(pts):
        return np.sum(c * np.linalg.norm(pts[..., 3:6], axis=-1), axis=-1)

    def domain(b):
        radius, tail = _gamma3_truncation(1.0 / (_scalar(b) * c), n_particles)
        return Domain("box", lo=(0.0,) * 3, hi=(side,) * 3, momentum_truncation=radius,
                      n_particles=n_particles, tail_bound=tail)

    def quadrature(b):
        b = _scalar(b)
        one = math.log(volume) + _radial_log_integral(lambda p: -b * c * p, 80.0 / (b * c))
        return n_particles * one

    return ThermoModel(
        name="massless_gas",
        dim_b=1,
        coupling=lambda pts, b: _scalar(b) * hamiltonian(pts),
        admissible=positive_scalar,
        domain=domain,
        closed_form_log_partition=lambda b: M.massless_log_partition(volume, c, n_particles, b),
        closed_form_gradient=lambda b: -3.0 * n_particles / _scalar(b),
        closed_form_hessian=lambda b: 3.0 * n_particles / _scalar(b) ** 2,
        sampler=lambda b, k, seed: S.sample_massless(volume, c, n_particles, b, k, seed),
        marginal=lambda b: _uniform_marginal(side),
        hamiltonian=hamiltonian,
        quadrature_log_partition=quadrature,
        params={"volume": volume, "light_speed": c, "n_particles": n_particles},
    )


def photon_gas_model(volume: float, light_speed: float) -> ThermoModel:
    """Variable photon number: only the closed form exists (no fixed phase space)."""

    def coupling(pts, b):
        raise UnsupportedModel("the photon gas has no fixed-dimension phase space")

    return ThermoModel(
        name="photon_gas",
        dim_b=1,
        coupling=coupling,
        admissible=positive_scalar,
        closed_form_log_partition=lambda b: M.photon_log_partition(volume, light_speed, b),
        params={"volume": volume, "light_speed": light_speed},
    )


def solid_model(spec: M.SolidSpec) -> ThermoModel:
    mu = S.solid_stiffness(spec)
    count = mu.size

    def hamiltonian(pts):
        q, p = pts[..., 0], pts[..., 1]
        return np.sum(0.5 * p * p + 0.5 * mu * q * q, axis=-1)

    def domain(b):
        b = _scalar(b)
        # per-axis normal tail, union bound over 2 * count axes
        z = float(stats.norm.isf(REL_TAIL / (4 * count)))
        qmax = z / math.sqrt(b * mu.min())
        pmax = z / math.sqrt(b)
        return Domain("box", lo=(-qmax, -pmax), hi=(qmax, pmax), n_particles=count,
                      tail_bound=4 * count * float(stats.norm.sf(z)))

    def transport(points, b, tau):
        steps = max(1, int(round(tau / 1e-3)))
        flow = FlowSpec("central_spring", dt=tau / steps, steps=steps, stiffness=mu)
        tr = integrate_flow(flow, points[..., :1], points[..., 1:], np.ones(count), None)
        return np.concatenate([tr.q[-1], tr.p[-1]], axis=-1)

    def quadrature(b):
        b = _scalar(b)
        total = 0.0
        for k in mu:
            sq, sp = _QUAD_WIDTHS / math.sqrt(b * k), _QUAD_WIDTHS / math.sqrt(b)
            dom = Domain("box", lo=(-sq, -sp), hi=(sq, sp))
            total += math.log(gauss_quadrature(
                dom, lambda x, k=k: np.exp(-0.5 * b * (x[:, 1] ** 2 + k * x[:, 0] ** 2)), 128))
        return total

    def marginal(b):
        sigma = 1.0 / math.sqrt(_scalar(b) * mu[0])
        return (lambda pts: pts[:, 0, 0], lambda q: stats.norm.pdf(q, scale=sigma), (-6 * sigma, 6 * sigma))

    return ThermoModel(
        name="solid",
        dim_b=1,
        coupling=lambda pts, b: _scalar(b) * hamiltonian(pts),
        admissible=positive_scalar,
        domain=domain,
        closed_form_log_partition=lambda b: M.solid_log_partition(spec, b),
        closed_form_gradient=lambda b: -M.solid_energy(spec, b),
        closed_form_hessian=lambda b: count / _scalar(b) ** 2,
        sampler=lambda b, k, seed: S.sample_solid(spec, b, k, seed),
        transport=transport,
        marginal=marginal,
        hamiltonian=hamiltonian,
        quadrature_log_partition=quadrature,
        params={"spec": spec},
    )


def sphere_model(spec: M.SphereSpec) -> ThermoModel:
    radius = spec.radius

    def coupling(pts, b):
        # <J, b> with J = -R Om
        return -radius * (pts[:, 0, :] @ np.asarray(b, dtype=float))

    def transport(points, b, tau):
        return points @ rotation(b, tau).T

    def quadrature(b):
        k = radius ** 2 * float(np.linalg.norm(b))
        dom = Domain("box", lo=(-1.0,), hi=(1.0,))
        val = gauss_quadrature(dom, lambda u: np.exp(k * (u[:, 0] - 1.0)), 128)
        return math.log(2.0 * math.pi * radius ** 2 * val) + k

    def marginal(b):
        norm = float(np.linalg.norm(b))
        axis = np.asarray(b) / norm if norm > 0 else np.array([0.0, 0.0, 1.0])
        return (lambda pts: pts[:, 0, :] @ axis / radius,
                lambda u: M.sphere_axial_density(spec, b, u),
                (-1.0, 1.0))

    return ThermoModel(
        name="sphere",
        dim_b=3,
        coupling=coupling,
        domain=lambda b: Domain("sphere_surface", radius=radius),
        closed_form_log_partition=lambda b: M.sphere_log_partition(spec, b),
        closed_form_gradient=lambda b: M.sphere_log_partition_gradient(spec, b),
        closed_form_hessian=lambda b: M.sphere_log_partition_hessian(spec, b),
        cocycle_theta=lambda x: np.zeros(3),
        momentum=lambda pts: -radius * pts[:, 0, :],
        ad_star=coadjoint_star,
        bracket=so3_bracket,
        sampler=lambda b, k, seed: S.sample_sphere(spec, b, k, seed),
        transport=transport,
        marginal=marginal,
        quadrature_log_partition=quadrature,
        params={"spec": spec},
    )


def _negative_epsilon(b) -> AdmissibilityResult:
    eps = float(np.ravel(b)[9])
    if eps < 0 and math.isfinite(eps):
        return OK
    return AdmissibilityResult(False, f"epsilon must be < 0, got {eps}")


def vessel_model(spec: M.VesselSpec, nodes: int = 48) -> ThermoModel:
    masses = np.asarray(spec.masses)

    def element(b) -> GalileanAlgebraElement:
        return GalileanAlgebraElement.from_vector(b)

    def coupling(pts, b):
        x = element(b)
        return sum(M.vessel_coupling(spec, x, i, pts[:, i, :3], pts[:, i, 3:6]) for i in range(masses.size))

    def domain(b):
        radius, tail = gaussian_truncation(np.sqrt(masses / -float(np.ravel(b)[9])), masses.size, REL_TAIL)
        return spec.geometry.domain(radius, masses.size, tail)

    def marginal(b):
        x = element(b)
        return (lambda pts: np.hypot(pts[:, 0, 0], pts[:, 0, 1]),
                lambda d: M.centrifuge_radial_density(spec, x, 0, d),
                (0.0, spec.geometry.radius))

    return ThermoModel(
        name="vessel",
        dim_b=10,
        coupling=coupling,
        admissible=_negative_epsilon,
        domain=domain,
        closed_form_log_partition=lambda b: M.vessel_log_partition(spec, element(b), nodes),
        dual_signs=GALILEAN_DUAL_SIGNS,
        sampler=lambda b, k, seed: S.sample_vessel(spec, element(b), k, seed),
        marginal=marginal,
        quadrature_log_partition=lambda b: M.vessel_log_partition(spec, element(b), 2 * nodes),
        params={"spec": spec},
    )
