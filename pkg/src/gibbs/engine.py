"""Generic Gibbs and generalized-Gibbs engine.

A :class:`ThermoModel` bundles a coupling <J(z), b>, an admissibility
predicate and, when known, closed forms for log P and its derivatives.
Parameters are flat float arrays of length ``dim_b``; scalar models use
``dim_b == 1`` and their results are returned as plain floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from gibbs.oracle.integrate import Domain, mc_integrate


class GibbsError(Exception):
    """Base class for engine errors."""


class InadmissibleParameter(GibbsError, ValueError):
    """The parameter lies outside the set where the Gibbs integrals converge."""


class EstimationError(GibbsError, ArithmeticError):
    """A numerical estimate failed to converge."""


class UnsupportedModel(GibbsError, TypeError):
    """The model lacks the structure an operation needs."""


@dataclass(frozen=True)
class AdmissibilityResult:
    admissible: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.admissible


OK = AdmissibilityResult(True, "")


def positive_scalar(b) -> AdmissibilityResult:
    b = float(np.ravel(b)[0])
    if b > 0 and math.isfinite(b):
        return OK
    return AdmissibilityResult(False, f"b must be > 0, got {b}")


def always(b) -> AdmissibilityResult:
    return OK


@dataclass(frozen=True)
class ThermoModel:
    """Model descriptor consumed by every engine operation.

    ``coupling(points, b)`` returns <J(z), b> for each point (b * H(z) for
    classical models).  ``dual_signs`` defines the pairing between dual and
    algebra vectors, <xi, b> = sum(dual_signs * xi * b); ``None`` means the
    Euclidean dot product.
    """

    name: str
    dim_b: int
    coupling: Callable
    admissible: Callable = always
    domain: Callable | None = None
    closed_form_log_partition: Callable | None = None
    closed_form_gradient: Callable | None = None
    closed_form_hessian: Callable | None = None
    cocycle_theta: Callable | None = None
    momentum: Callable | None = None
    ad_star: Callable | None = None
    bracket: Callable | None = None
    dual_signs: np.ndarray | None = None
    sampler: Callable | None = None
    transport: Callable | None = None
    marginal: Callable | None = None
    hamiltonian: Callable | None = None
    quadrature_log_partition: Callable | None = None
    oracle_budget: int = 200_000
    params: dict | None = None

    @property
    def scalar(self) -> bool:
        return self.dim_b == 1

    def pairing(self, xi, b) -> float:
        xi = np.ravel(np.asarray(xi, dtype=float))
        b = np.ravel(np.asarray(b, dtype=float))
        if self.dual_signs is None:
            return float(xi @ b)
        return float(np.sum(self.dual_signs * xi * b))


def as_param(model: ThermoModel, b) -> np.ndarray:
    if hasattr(b, "as_vector"):
        b = b.as_vector()
    arr = np.ravel(np.asarray(b, dtype=float))
    if arr.size != model.dim_b:
        raise ValueError(f"{model.name} expects a parameter of size {model.dim_b}, got {arr.size}")
    return arr


def _out(model: ThermoModel, v):
    v = np.asarray(v, dtype=float)
    return float(v.ravel()[0]) if model.scalar else v


def check_admissible(model: ThermoModel, b) -> np.ndarray:
    bv = as_param(model, b)
    res = model.admissible(bv)
    if not res.admissible:
        raise InadmissibleParameter(f"{model.name}: {res.reason}")
    return bv


def fd_step(b: np.ndarray) -> float:
    return max(1e-5 * float(np.linalg.norm(b)), 1e-7)


def _fd(f, h: float) -> float:
    """Fourth-order central difference of a scalar function of t at t = 0."""
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


def oracle_log_partition(model: ThermoModel, b, n: int | None = None, seed: int = 0,
                         max_rel_stderr: float = 0.25):
    """Monte-Carlo estimate of P(b) over the model's oracle domain."""
    if model.domain is None:
        raise UnsupportedModel(f"{model.name} has no oracle domain")
    bv = check_admissible(model, b)
    dom: Domain = model.domain(bv)
    n = n or model.oracle_budget
    est = mc_integrate(dom, lambda z: np.exp(-model.coupling(z, bv)), n, seed)
    if not est.value > 0 or est.stderr > max_rel_stderr * est.value:
        raise EstimationError(
            f"{model.name}: oracle did not converge (value {est.value}, stderr {est.stderr})"
        )
    return est


def log_partition(model: ThermoModel, b, n: int | None = None, seed: int = 0) -> float:
    """log P(b); closed form when available, else the Monte-Carlo oracle."""
    bv = check_admissible(model, b)
    if model.closed_form_log_partition is not None:
        return float(model.closed_form_log_partition(bv))
    return math.log(oracle_log_partition(model, bv, n, seed).value)


def log_partition_gradient(model: ThermoModel, b, n: int | None = None, seed: int = 0) -> np.ndarray:
    bv = check_admissible(model, b)
    if model.closed_form_gradient is not None:
        return np.asarray(model.closed_form_gradient(bv), dtype=float).reshape(model.dim_b)
    h = fd_step(bv)
    grad = np.empty(model.dim_b)
    for i in range(model.dim_b):
        e = np.zeros(model.dim_b)
        e[i] = 1.0
        grad[i] = _fd(lambda t: log_partition(model, bv + t * e, n, seed), h)
    return grad


def finite_difference_gradient(model: ThermoModel, b) -> np.ndarray:
    """Gradient of log P by central differences only (never the analytic form)."""
    bv = check_admissible(model, b)
    h = fd_step(bv)
    grad = np.empty(model.dim_b)
    for i in range(model.dim_b):
        e = np.zeros(model.dim_b)
        e[i] = 1.0
        grad[i] = _fd(lambda t: log_partition(model, bv + t * e), h)
    return grad


def _to_dual(model: ThermoModel, grad: np.ndarray) -> np.ndarray:
    return grad if model.dual_signs is None else model.dual_signs * grad


def mean_momentum(model: ThermoModel, b, n: int | None = None, seed: int = 0):
    """E_J(b) = -D log P(b), expressed as a dual vector (E(b) for scalar models)."""
    return _out(model, -_to_dual(model, log_partition_gradient(model, b, n, seed)))


def entropy(model: ThermoModel, b, n: int | None = None, seed: int = 0) -> float:
    """S(b) = log P(b) + <E_J(b), b>."""
    bv = check_admissible(model, b)
    return log_partition(model, bv, n, seed) + model.pairing(mean_momentum(model, bv, n, seed), bv)


def log_partition_hessian(model: ThermoModel, b) -> np.ndarray:
    """Second derivative of log P, i.e. the covariance matrix of J under rho_b."""
    bv = check_admissible(model, b)
    if model.closed_form_hessian is not None:
        return np.asarray(model.closed_form_hessian(bv), dtype=float).reshape(model.dim_b, model.dim_b)
    h = fd_step(bv)
    hess = np.empty((model.dim_b, model.dim_b))
    for i in range(model.dim_b):
        e = np.zeros(model.dim_b)
        e[i] = 1.0
        cols = [log_partition_gradient(model, bv + t * e) for t in (2 * h, h, -h, -2 * h)]
        hess[:, i] = (-cols[0] + 8 * cols[1] - 8 * cols[2] + cols[3]) / (12 * h)
    return 0.5 * (hess + hess.T)


def covariance_form(model: ThermoModel, b, y, z) -> float:
    """<DE_J(b)(y), z> = -(second derivative of log P)(y, z); never positive on the diagonal."""
    bv = check_admissible(model, b)
    y = np.ravel(np.asarray(y, dtype=float))
    z = np.ravel(np.asarray(z, dtype=float))
    if model.closed_form_hessian is not None:
        return float(-(y @ log_partition_hessian(model, bv) @ z))
    h = fd_step(bv)
    return float(-_fd(lambda t: log_partition_gradient(model, bv + t * y) @ z, h))


def theta_b(model: ThermoModel, b, x) -> np.ndarray:
    """Theta_b(x) = Theta(x) - ad*_x E_J(b); vanishes at x = b."""
    if model.ad_star is None:
        raise UnsupportedModel(f"{model.name} has no coadjoint action")
    bv = check_admissible(model, b)
    x = np.ravel(np.asarray(x, dtype=float))
    mean = np.atleast_1d(mean_momentum(model, bv))
    theta = model.cocycle_theta(x) if model.cocycle_theta is not None else np.zeros_like(mean)
    return np.asarray(theta, dtype=float) - model.ad_star(x, mean)


def gamma_form(model: ThermoModel, b, x1, y1) -> float:
    """Gamma_b([x1, b], [y1, b]) = <Theta_b(x1), [y1, b]>."""
    if model.bracket is None:
        raise UnsupportedModel(f"{model.name} has no Lie bracket")
    bv = check_admissible(model, b)
    return model.pairing(theta_b(model, bv, x1), model.bracket(np.ravel(y1), bv))


def gibbs_density(model: ThermoModel, b, points) -> np.ndarray:
    """rho_b at the given phase points (Liouville density)."""
    bv = check_admissible(model, b)
    return np.exp(-model.coupling(points, bv) - log_partition(model, bv))


def shift_momentum(model: ThermoModel, mu) -> ThermoModel:
    """Model with momentum map J + mu (mu a constant dual vector)."""
    mu = np.ravel(np.asarray(mu, dtype=float))
    if mu.size != model.dim_b:
        raise ValueError("shift must match the dual dimension")
    signs = np.ones(model.dim_b) if model.dual_signs is None else model.dual_signs
    base = model

    def coupling(points, b):
        return base.coupling(points, b) + base.pairing(mu, b)

    changes = dict(name=f"{model.name}+shift", coupling=coupling)
    if model.closed_form_log_partition is not None:
        changes["closed_form_log_partition"] = lambda b: base.closed_form_log_partition(b) - base.pairing(mu, b)
    if model.closed_form_gradient is not None:
        changes["closed_form_gradient"] = lambda b: np.asarray(base.closed_form_gradient(b)) - signs * mu
    if model.momentum is not None:
        changes["momentum"] = lambda points: base.momentum(points) + mu
    if model.ad_star is not None:
        theta0 = model.cocycle_theta

        def theta(x):
            t0 = theta0(x) if theta0 is not None else np.zeros_like(mu)
            return t0 + base.ad_star(x, mu)

        changes["cocycle_theta"] = theta
    if model.quadrature_log_partition is not None:
        changes["quadrature_log_partition"] = lambda b: base.quadrature_log_partition(b) - base.pairing(mu, b)
    return replace(model, **changes)


@dataclass(frozen=True)
class ThermoReport:
    b: object
    log_p: float
    mean: object
    entropy: float
    variance: object
    temperature: float


def report(model: ThermoModel, b, boltzmann_constant: float = 1.0) -> ThermoReport:
    bv = check_admissible(model, b)
    log_p = log_partition(model, bv)
    mean = mean_momentum(model, bv)
    hess = log_partition_hessian(model, bv)
    temp = 1.0 / (boltzmann_constant * bv[0]) if model.scalar else math.nan
    return ThermoReport(
        b=_out(model, bv),
        log_p=log_p,
        mean=mean,
        entropy=log_p + model.pairing(mean, bv),
        variance=_out(model, hess) if model.scalar else hess,
        temperature=temp,
    )


def ray_derivatives(model: ThermoModel, direction, s: float) -> tuple[float, float, float]:
    """log P along b = s * direction, with its first and second s-derivatives."""
    d = as_param(model, direction)
    b = s * d
    check_admissible(model, b)
    log_p = log_partition(model, b)
    if model.closed_form_gradient is not None:
        first = float(log_partition_gradient(model, b) @ d)
        if model.closed_form_hessian is not None:
            second = float(d @ log_partition_hessian(model, b) @ d)
        else:
            h = fd_step(b) / max(np.linalg.norm(d), 1e-300)
            second = _fd(lambda t: log_partition_gradient(model, (s + t) * d) @ d, h)
        return log_p, first, float(second)
    h = max(1e-3 * abs(s), 1e-6)

    def f(t):
        return log_partition(model, (s + t) * d)

    first = _fd(f, h)
    # fourth-order second difference
    second = (-f(2 * h) + 16 * f(h) - 30 * log_p + 16 * f(-h) - f(-2 * h)) / (12 * h * h)
    return log_p, first, second


def equilibrate(model_a: ThermoModel, model_b: ThermoModel, b_a: float, b_b: float,
                max_iter: int = 200) -> float:
    """Common b' after two scalar systems exchange energy.

    Solves E_a(b') + E_b(b') = E_a(b_a) + E_b(b_b) by bisection; b' lies
    between b_a and b_b because both energies decrease in b.
    """
    if not (model_a.scalar and model_b.scalar):
        raise UnsupportedModel("equilibration needs scalar-parameter models")
    check_admissible(model_a, b_a)
    check_admissible(model_b, b_b)
    b_a, b_b = float(b_a), float(b_b)
    if b_a == b_b:
        return b_a
    target = mean_momentum(model_a, b_a) + mean_momentum(model_b, b_b)

    def excess(b):
        return mean_momentum(model_a, b) + mean_momentum(model_b, b) - target

    lo, hi = min(b_a, b_b), max(b_a, b_b)
    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo < 0 or f_hi > 0:
        raise EstimationError("energy is not decreasing in b; cannot bracket the equilibrium")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = excess(mid)
        if f_mid > 0:
            lo = mid
        elif f_mid < 0:
            hi = mid
        else:
            lo = hi = mid
            break
    b_eq = 0.5 * (lo + hi)
    if abs(excess(b_eq)) > 1e-10 * abs(target):
        raise EstimationError(f"equilibration residual {excess(b_eq)} too large")
    return b_eq


def grid_entropy(density_values, cell_volume: float, atol: float = 1e-6) -> float:
    """Riemann-sum entropy sum(rho log(1/rho)) * dv with 0 log 0 = 0."""
    rho = np.asarray(density_values, dtype=float)
    if np.any(rho < 0):
        raise ValueError("density must be non-negative")
    mass = float(rho.sum() * cell_volume)
    if abs(mass - 1.0) > atol:
        raise ValueError(f"density is not normalized (total mass {mass})")
    pos = rho[rho > 0]
    return float(-np.sum(pos * np.log(pos)) * cell_volume)
