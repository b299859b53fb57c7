"""Leapfrog integration of separable Hamiltonians and invariance checks.

Positions ``q`` have shape (..., N, d) and momenta the same; ``masses``
has shape (N,).  Kinetic energy is sum |p_i|^2 / (2 m_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gibbs.lie import GalileanAlgebraElement, rotation
from gibbs.models import frame_potential, frame_potential_gradient
from gibbs.oracle.integrate import SampleBatch, gof_statistic

FLOW_KINDS = ("free", "gravity", "central_spring", "centrifuge_frame")


@dataclass(frozen=True)
class FlowSpec:
    """Hamiltonian H = T(p) + U(q) and the step schedule.

    ``stiffness`` may be a scalar or one value per particle; ``box`` is the
    side of a periodic cube [0, box)^d (None for open space).
    """

    kind: str
    dt: float = 1e-3
    steps: int = 1
    gravity: float = 1.0
    stiffness: object = 1.0
    frame: GalileanAlgebraElement | None = None
    box: float | None = None

    def __post_init__(self):
        if self.kind not in FLOW_KINDS:
            raise ValueError(f"unsupported (or non-separable) Hamiltonian kind {self.kind!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.kind == "centrifuge_frame" and self.frame is None:
            raise ValueError("centrifuge_frame needs a frame generator")


@dataclass
class Trajectory:
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray

    def __len__(self) -> int:
        return self.times.size

    def write_csv(self, stream) -> None:
        """t, then the flattened coordinates (q then p) of every particle."""
        flat_q = self.q.reshape(len(self), -1)
        flat_p = self.p.reshape(len(self), -1)
        header = ["t"] + [f"q{k}" for k in range(flat_q.shape[1])] + [f"p{k}" for k in range(flat_p.shape[1])]
        stream.write(",".join(header) + "\n")
        for t, a, b in zip(self.times, flat_q, flat_p):
            stream.write(",".join(format(v, ".17g") for v in np.concatenate([[t], a, b])) + "\n")


def _per_particle(values, like: np.ndarray) -> np.ndarray:
    return np.asarray(values, dtype=float)[:, None] * np.ones(like.shape[-1])


def force(spec: FlowSpec, q: np.ndarray, masses: np.ndarray) -> np.ndarray:
    m = _per_particle(masses, q)
    if spec.kind == "free":
        return np.zeros_like(q)
    if spec.kind == "gravity":
        f = np.zeros_like(q)
        f[..., -1] = -spec.gravity * m[..., -1]
        return f
    if spec.kind == "central_spring":
        k = np.broadcast_to(np.asarray(spec.stiffness, dtype=float), masses.shape)
        return -_per_particle(k, q) * q
    return -m * frame_potential_gradient(spec.frame, q)


def potential(spec: FlowSpec, q: np.ndarray, masses: np.ndarray) -> np.ndarray:
    """Total potential energy per configuration (sum over particles)."""
    m = np.asarray(masses, dtype=float)
    if spec.kind == "free":
        return np.zeros(q.shape[:-2])
    if spec.kind == "gravity":
        return np.sum(m * spec.gravity * q[..., -1], axis=-1)
    if spec.kind == "central_spring":
        k = np.broadcast_to(np.asarray(spec.stiffness, dtype=float), m.shape)
        return np.sum(0.5 * k * np.sum(q * q, axis=-1), axis=-1)
    return np.sum(m * frame_potential(spec.frame, q), axis=-1)


def energy(spec: FlowSpec, q, p, masses) -> np.ndarray:
    m = np.asarray(masses, dtype=float)
    return np.sum(np.sum(p * p, axis=-1) / (2.0 * m), axis=-1) + potential(spec, q, m)


def integrate_flow(spec: FlowSpec, q0, p0, masses, record_every: int | None = 1) -> Trajectory:
    """Kick-drift-kick leapfrog.

    Snapshots are kept every ``record_every`` steps (``None`` keeps only the
    initial and final states).  With ``spec.box`` set, positions wrap
    periodically after each drift.
    """
    q = np.array(q0, dtype=float)
    p = np.array(p0, dtype=float)
    m = np.asarray(masses, dtype=float)
    if q.shape != p.shape or q.ndim < 2 or q.shape[-2] != m.size:
        raise ValueError("q and p must have shape (..., N, d) matching the masses")
    inv_m = 1.0 / _per_particle(m, q)
    dt = spec.dt
    times, qs, ps = [0.0], [q.copy()], [p.copy()]
    f = force(spec, q, m)
    for step in range(1, spec.steps + 1):
        p += 0.5 * dt * f
        q += dt * p * inv_m
        if spec.box is not None:
            q %= spec.box
        f = force(spec, q, m)
        p += 0.5 * dt * f
        last = step == spec.steps
        if last or (record_every is not None and step % record_every == 0):
            times.append(step * dt)
            qs.append(q.copy())
            ps.append(p.copy())
    return Trajectory(np.array(times), np.stack(qs), np.stack(ps))


def conserved_drift(traj: Trajectory, observable) -> float:
    """max |observable(q_t, p_t) - observable(q_0, p_0)| over the trajectory."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    ref = np.asarray(observable(traj.q[0], traj.p[0]), dtype=float)
    worst = 0.0
    for q, p in zip(traj.q, traj.p):
        worst = max(worst, float(np.max(np.abs(np.asarray(observable(q, p)) - ref))))
    return worst


def angular_momentum(q, p) -> np.ndarray:
    """Total r x p, summed over particles."""
    return np.sum(np.cross(q, p), axis=-2)


def linear_momentum(q, p) -> np.ndarray:
    return np.sum(p, axis=-2)


def step_jacobian(spec: FlowSpec, q, p, masses, h: float = 1e-5) -> np.ndarray:
    """Finite-difference Jacobian of one leapfrog step at a single phase point."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    one = FlowSpec(spec.kind, spec.dt, 1, spec.gravity, spec.stiffness, spec.frame, None)
    z0 = np.concatenate([q.ravel(), p.ravel()])
    half = q.size

    def step(z):
        tr = integrate_flow(one, z[:half].reshape(q.shape), z[half:].reshape(p.shape), masses, None)
        return np.concatenate([tr.q[-1].ravel(), tr.p[-1].ravel()])

    jac = np.empty((z0.size, z0.size))
    for k in range(z0.size):
        e = np.zeros(z0.size)
        e[k] = h
        jac[:, k] = (step(z0 + e) - step(z0 - e)) / (2.0 * h)
    return jac


def rotate_points(points, axis, angle: float) -> np.ndarray:
    """Rotate (..., 3) points by ``angle`` about ``axis``."""
    axis = np.asarray(axis, dtype=float)
    rot = rotation(axis / np.linalg.norm(axis), angle)
    return np.asarray(points) @ rot.T


def flow_invariance_test(model, b, horizon: float = 10.0, n: int = 20_000, seed: int = 0,
                         transport=None, bins: int = 20) -> float:
    """p-value of a Gibbs batch pushed forward for time ``horizon``.

    The batch is drawn from rho_b, moved by ``transport`` (default: the
    model's own flow) and compared to rho_b on the model's test marginal.
    """
    if model.sampler is None or model.marginal is None:
        raise ValueError(f"{model.name} has no sampler or test marginal")
    move = transport if transport is not None else model.transport
    if move is None:
        raise ValueError(f"{model.name} has no flow")
    bv = np.ravel(np.asarray(b.as_vector() if hasattr(b, "as_vector") else b, dtype=float))
    batch = model.sampler(bv, n, seed)
    moved = SampleBatch(np.asarray(move(batch.points, bv, horizon)), seed, batch.layout)
    projection, density, support = model.marginal(bv)
    return gof_statistic(moved, density, bins, projection, support).p_value


def period(stiffness: float, mass: float = 1.0) -> float:
    return 2.0 * math.pi * math.sqrt(mass / stiffness)
