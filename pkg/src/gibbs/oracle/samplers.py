"""Exact samplers for the Gibbs densities of the concrete models.

Particle ``i`` always draws from the stream ``child_seed(seed, i)``, so a
batch is reproducible and its particles are independent.
"""

from __future__ import annotations

import math

import numpy as np

from gibbs import rng as _rng
from gibbs.engine import EstimationError, InadmissibleParameter
from gibbs.lie import GalileanAlgebraElement, vec3
from gibbs.models import (
    GravityGasSpec,
    IdealGasSpec,
    RelativisticGasSpec,
    SolidSpec,
    SphereSpec,
    VesselSpec,
    frame_potential,
    log_frame_envelope,
)
from gibbs.oracle.integrate import SampleBatch
from gibbs.special import bessel_k2

MIN_ACCEPTANCE = 1e-6


def _positive_b(b) -> float:
    b = float(np.ravel(b)[0])
    if not (b > 0 and math.isfinite(b)):
        raise InadmissibleParameter(f"b must be > 0, got {b}")
    return b


def _count(n) -> int:
    n = int(n)
    if n < 0:
        raise ValueError("sample count must be >= 0")
    return n


def _streams(seed: int, count: int):
    return [_rng.generator(_rng.child_seed(seed, i)) for i in range(count)]


def _rejection(gen: np.random.Generator, propose, n: int, expected_rate: float | None = None) -> np.ndarray:
    """Collect ``n`` accepted proposals.

    ``propose(k)`` returns k candidates and their log acceptance ratios
    (all <= 0).  The run aborts when the observed or expected acceptance
    rate falls below MIN_ACCEPTANCE.
    """
    if expected_rate is not None and expected_rate < MIN_ACCEPTANCE:
        raise EstimationError(f"acceptance rate {expected_rate:.3g} is below {MIN_ACCEPTANCE:g}")
    out, have, tried, accepted = [], 0, 0, 0
    rate = expected_rate or 0.5
    while have < n:
        k = int(min(max((n - have) / max(rate, MIN_ACCEPTANCE) * 1.1 + 64, 256), 1 << 20))
        cand, log_ratio = propose(k)
        keep = np.log(gen.random(k)) < log_ratio
        tried += k
        accepted += int(keep.sum())
        out.append(cand[keep])
        have += int(keep.sum())
        rate = accepted / tried
        if tried >= 1 << 20 and rate < MIN_ACCEPTANCE:
            raise EstimationError(f"acceptance rate {rate:.3g} is below {MIN_ACCEPTANCE:g}")
    return np.concatenate(out)[:n]


def _cube_positions(gen, volume: float, n: int) -> np.ndarray:
    return volume ** (1.0 / 3.0) * gen.random((n, 3))


def sample_ideal(spec: IdealGasSpec, b, n: int, seed: int) -> SampleBatch:
    """Uniform positions in a cube of volume V; momentum components normal with variance m_i / b."""
    b, n = _positive_b(b), _count(n)
    pts = np.empty((n, len(spec.masses), 6))
    for i, (m, gen) in enumerate(zip(spec.masses, _streams(seed, len(spec.masses)))):
        pts[:, i, :3] = _cube_positions(gen, spec.volume, n)
        pts[:, i, 3:] = math.sqrt(m / b) * _rng.normal(gen, (n, 3))
    return SampleBatch(pts, seed, "phase")


def sample_gravity(spec: GravityGasSpec, b, n: int, seed: int) -> SampleBatch:
    """Altitude by inverting its truncated exponential law; the rest as in the ideal gas."""
    b, n = _positive_b(b), _count(n)
    side = math.sqrt(spec.section_area)
    pts = np.empty((n, len(spec.masses), 6))
    for i, (m, gen) in enumerate(zip(spec.masses, _streams(seed, len(spec.masses)))):
        k = m * spec.gravity * b
        u = gen.random((n, 3))
        pts[:, i, :2] = side * u[:, :2]
        pts[:, i, 2] = -np.log1p(u[:, 2] * math.expm1(-k * spec.height)) / k
        pts[:, i, 3:] = math.sqrt(m / b) * _rng.normal(gen, (n, 3))
    return SampleBatch(pts, seed, "phase")


def juttner_acceptance(m: float, c: float, b: float) -> float:
    """Acceptance rate x^2 K_2(x) / 2 (x = m b c^2) of the massless-law proposal."""
    x = m * b * c * c
    if x == 0.0:
        return 1.0
    return 0.5 * x * x * bessel_k2(x)


def _juttner(gen, m: float, c: float, b: float, n: int) -> np.ndarray:
    mc = m * c

    def propose(k):
        p = _rng.gamma3(gen, k, 1.0 / (b * c))
        # sqrt(p^2 + m^2 c^2) - p, without cancellation
        excess = mc * mc / (np.sqrt(p * p + mc * mc) + p)
        return p[:, None] * _rng.unit_vectors(gen, k), -b * c * excess

    if n == 0:
        return np.empty((0, 3))
    return _rejection(gen, propose, n, juttner_acceptance(m, c, b))


def sample_juttner(m: float, c: float, b: float, n: int, seed: int) -> SampleBatch:
    """Momenta with density proportional to exp(-b c sqrt(|p|^2 + m^2 c^2))."""
    for name, v in (("mass", m), ("light speed", c)):
        if not v > 0:
            raise ValueError(f"{name} must be positive")
    b, n = _positive_b(b), _count(n)
    gen = _rng.generator(seed)
    return SampleBatch(_juttner(gen, m, c, b, n), seed, "momentum")


def sample_relativistic(spec: RelativisticGasSpec, b, n: int, seed: int) -> SampleBatch:
    b, n = _positive_b(b), _count(n)
    pts = np.empty((n, len(spec.masses), 6))
    for i, (m, gen) in enumerate(zip(spec.masses, _streams(seed, len(spec.masses)))):
        pts[:, i, :3] = _cube_positions(gen, spec.volume, n)
        pts[:, i, 3:] = _juttner(gen, m, spec.light_speed, b, n)
    return SampleBatch(pts, seed, "phase")


def sample_massless(volume: float, c: float, n_particles: int, b, n: int, seed: int) -> SampleBatch:
    """|p| ~ Gamma(3, 1/(b c)) with isotropic direction."""
    b, n = _positive_b(b), _count(n)
    pts = np.empty((n, n_particles, 6))
    for i, gen in enumerate(_streams(seed, n_particles)):
        pts[:, i, :3] = _cube_positions(gen, volume, n)
        pts[:, i, 3:] = _rng.gamma3(gen, n, 1.0 / (b * c))[:, None] * _rng.unit_vectors(gen, n)
    return SampleBatch(pts, seed, "phase")


def solid_stiffness(spec: SolidSpec) -> np.ndarray:
    """mu_i = (2 pi nu_i)^2 for unit masses."""
    return (2.0 * math.pi * np.asarray(spec.frequencies)) ** 2


def sample_solid(spec: SolidSpec, b, n: int, seed: int) -> SampleBatch:
    """(q, p) per oscillator with unit mass: q ~ N(0, 1/(b mu)), p ~ N(0, 1/b)."""
    b, n = _positive_b(b), _count(n)
    mu = solid_stiffness(spec)
    pts = np.empty((n, mu.size, 2))
    for i, gen in enumerate(_streams(seed, mu.size)):
        z = _rng.normal(gen, (n, 2))
        pts[:, i, 0] = z[:, 0] / math.sqrt(b * mu[i])
        pts[:, i, 1] = z[:, 1] / math.sqrt(b)
    return SampleBatch(pts, seed, "oscillator")


def sample_sphere(spec: SphereSpec, b, n: int, seed: int) -> SampleBatch:
    """Points on the sphere with density proportional to exp(R Om . b)."""
    b, n = vec3(b), _count(n)
    radius = spec.radius
    gen = _rng.generator(seed)
    envelope = radius * radius * float(np.linalg.norm(b))
    rate = -math.expm1(-2.0 * envelope) / (2.0 * envelope) if envelope > 0 else 1.0

    def propose(k):
        om = radius * _rng.unit_vectors(gen, k)
        return om, radius * (om @ b) - envelope

    pts = _rejection(gen, propose, n, rate) if n else np.empty((0, 3))
    return SampleBatch(pts[:, None, :], seed, "position")


def sample_vessel(spec: VesselSpec, b: GalileanAlgebraElement, n: int, seed: int) -> SampleBatch:
    """Co-moving (r0, p0): p0 normal with variance m_i / (-epsilon), r0 by rejection."""
    if not b.epsilon < 0:
        raise InadmissibleParameter(f"epsilon must be < 0, got {b.epsilon}")
    n = _count(n)
    dom = spec.geometry.domain()
    pts = np.empty((n, len(spec.masses), 6))
    for i, (m, gen) in enumerate(zip(spec.masses, _streams(seed, len(spec.masses)))):
        shift = log_frame_envelope(spec, b, i)

        def propose(k, m=m, gen=gen, shift=shift):
            r = dom._positions(gen, k)
            log_ratio = b.epsilon * m * frame_potential(b, r) - shift
            assert np.all(log_ratio <= 1e-9), "envelope below the density"
            return r, log_ratio

        pts[:, i, :3] = _rejection(gen, propose, n) if n else np.empty((0, 3))
        pts[:, i, 3:] = math.sqrt(m / -b.epsilon) * _rng.normal(gen, (n, 3))
    return SampleBatch(pts, seed, "phase")


def write_csv(batch: SampleBatch, stream) -> None:
    """One row per particle per sample: sample_id, particle_id, x, y, z, px, py, pz."""
    pts = batch.points
    if pts.ndim == 2:
        pts = pts[:, None, :]
    n, count, width = pts.shape
    full = np.full((n, count, 6), np.nan)
    if batch.layout == "phase":
        full[...] = pts
    elif batch.layout == "position":
        full[..., :3] = pts
    elif batch.layout == "momentum":
        full[..., 3:] = pts
    elif batch.layout == "oscillator":
        # one-dimensional oscillators: q in x, p in px
        full[..., 0] = pts[..., 0]
        full[..., 3] = pts[..., 1]
    else:
        raise ValueError(f"unknown layout {batch.layout!r}")
    stream.write("sample_id,particle_id,x,y,z,px,py,pz\n")
    for s in range(n):
        for j in range(count):
            stream.write(f"{s},{j}," + ",".join(format(v, ".17g") for v in full[s, j]) + "\n")
