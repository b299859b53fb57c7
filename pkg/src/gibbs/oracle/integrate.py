"""Monte-Carlo and quadrature integration over phase-space domains."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from gibbs import rng as _rng
from gibbs.special import gauss_legendre

KINDS = ("box", "cylinder", "sphere_surface", "full_momentum_space")
CHUNK = 1 << 16


@dataclass(frozen=True)
class Domain:
    """Per-particle integration region, repeated ``n_particles`` times.

    A point of one particle is its position coordinates (box: any dimension,
    cylinder/sphere: 3) followed by three momentum coordinates when
    ``momentum_truncation`` is positive; ``full_momentum_space`` carries
    momenta only.  Momenta live in a ball of radius ``momentum_truncation``;
    ``tail_bound`` is the relative mass of the integrand discarded outside it.
    """

    kind: str
    lo: tuple = ()
    hi: tuple = ()
    radius: float = 0.0
    height: float = 0.0
    momentum_truncation: object = 0.0
    n_particles: int = 1
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if self.kind == "box" and len(self.lo) != len(self.hi):
            raise ValueError("box corners must have equal length")
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        radii = np.broadcast_to(np.asarray(self.momentum_truncation, dtype=float), (self.n_particles,))
        if np.any(radii < 0) or (np.any(radii > 0) and not np.all(radii > 0)):
            raise ValueError("momentum truncation radii must be all positive or all zero")
        object.__setattr__(self, "momentum_truncation",
                           float(radii[0]) if np.all(radii == radii[0]) else tuple(float(r) for r in radii))
        if self.kind == "full_momentum_space" and not self.has_momenta:
            raise ValueError("full momentum space needs a truncation radius")

    @property
    def truncations(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.momentum_truncation, dtype=float), (self.n_particles,))

    @property
    def position_dim(self) -> int:
        if self.kind == "box":
            return len(self.lo)
        if self.kind == "full_momentum_space":
            return 0
        return 3

    @property
    def has_momenta(self) -> bool:
        return bool(self.truncations[0] > 0)

    @property
    def point_dim(self) -> int:
        return self.position_dim + (3 if self.has_momenta else 0)

    @property
    def dim(self) -> int:
        return self.point_dim * self.n_particles

    def position_volume(self) -> float:
        if self.kind == "box":
            return float(np.prod(np.subtract(self.hi, self.lo)))
        if self.kind == "cylinder":
            return math.pi * self.radius ** 2 * self.height
        if self.kind == "sphere_surface":
            return 4.0 * math.pi * self.radius ** 2
        return 1.0

    def single_volume(self, particle: int = 0) -> float:
        v = self.position_volume()
        if self.has_momenta:
            v *= 4.0 / 3.0 * math.pi * self.truncations[particle] ** 3
        return v

    def volume(self) -> float:
        return float(np.prod([self.single_volume(i) for i in range(self.n_particles)]))

    def _positions(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "box":
            lo, hi = np.array(self.lo), np.array(self.hi)
            return lo + (hi - lo) * rng.random((n, lo.size))
        if self.kind == "cylinder":
            u = rng.random((n, 3))
            r = self.radius * np.sqrt(u[:, 0])
            phi = 2.0 * math.pi * u[:, 1]
            return np.stack([r * np.cos(phi), r * np.sin(phi), self.height * u[:, 2]], axis=1)
        if self.kind == "sphere_surface":
            return self.radius * _rng.unit_vectors(rng, n)
        return np.empty((n, 0))

    def _momenta(self, rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
        direction = _rng.unit_vectors(rng, n)
        return direction * (radius * np.cbrt(rng.random(n)))[:, None]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Uniform points, shape (n, n_particles, point_dim)."""
        parts = []
        for i in range(self.n_particles):
            cols = [self._positions(rng, n)]
            if self.has_momenta:
                cols.append(self._momenta(rng, n, self.truncations[i]))
            parts.append(np.concatenate(cols, axis=1))
        return np.stack(parts, axis=1)


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n_samples: int
    seed: int

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.value - target) <= k * self.stderr


@dataclass
class SampleBatch:
    """Phase-space points drawn from a Gibbs density.

    ``layout`` names the last axis: "phase" (x y z px py pz), "position"
    (x y z), "momentum" (px py pz) or "oscillator" (q p).
    """

    points: np.ndarray
    seed: int
    layout: str = "phase"
    weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def positions(self) -> np.ndarray:
        if self.layout in ("phase", "position"):
            return self.points[..., :3]
        raise AttributeError(f"layout {self.layout!r} has no positions")

    @property
    def momenta(self) -> np.ndarray:
        if self.layout == "phase":
            return self.points[..., 3:6]
        if self.layout == "momentum":
            return self.points
        raise AttributeError(f"layout {self.layout!r} has no momenta")


def _chunk_stats(values: np.ndarray) -> tuple[int, float, float]:
    mean = float(values.mean())
    return values.size, mean, float(((values - mean) ** 2).sum())


def _merge(a, b):
    na, ma, m2a = a
    nb, mb, m2b = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, m2a + m2b + delta * delta * na * nb / n


def mc_integrate(domain: Domain, integrand, n: int, seed: int, workers: int = 1) -> Estimate:
    """Plain Monte-Carlo estimate of the integral of ``integrand`` over ``domain``.

    ``integrand`` maps an (m, n_particles, point_dim) array to m values.
    Chunk ``i`` draws from the stream ``child_seed(seed, i)``.
    """
    if n < 1000:
        raise ValueError(f"need at least 1000 samples, got {n}")
    vol = domain.volume()
    if not vol > 0:
        raise ValueError("domain has zero volume")

    sizes = [CHUNK] * (n // CHUNK) + ([n % CHUNK] if n % CHUNK else [])

    def run(i):
        pts = domain.sample(_rng.generator(_rng.child_seed(seed, i)), sizes[i])
        return _chunk_stats(vol * np.asarray(integrand(pts), dtype=float))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]

    total = parts[0]
    for p in parts[1:]:
        total = _merge(total, p)
    count, mean, m2 = total
    var = max(m2, 0.0) / (count - 1)
    return Estimate(mean, math.sqrt(var / count), count, seed)


def gauss_quadrature(domain: Domain, integrand, nodes_per_axis: int) -> float:
    """Tensor-product Gauss-Legendre rule.

    Supports boxes of dimension <= 3 and the cylinder (in polar coordinates).
    ``integrand`` maps an (m, dim) array of Cartesian points to m values.
    """
    if not 8 <= nodes_per_axis <= 256:
        raise ValueError("nodes_per_axis must lie in [8, 256]")
    if domain.kind == "box":
        dim = len(domain.lo)
        if dim > 3:
            raise ValueError(f"quadrature supports dimension <= 3, got {dim}")
        rules = [gauss_legendre(nodes_per_axis, a, b) for a, b in zip(domain.lo, domain.hi)]
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        weights = np.ones_like(grids[0])
        for axis, (_, w) in enumerate(rules):
            shape = [1] * dim
            shape[axis] = -1
            weights = weights * w.reshape(shape)
        pts = np.stack([g.ravel() for g in grids], axis=1)
        return float(np.sum(weights.ravel() * integrand(pts)))
    if domain.kind == "cylinder":
        r, wr = gauss_legendre(nodes_per_axis, 0.0, domain.radius)
        phi, wp = gauss_legendre(nodes_per_axis, 0.0, 2.0 * math.pi)
        z, wz = gauss_legendre(nodes_per_axis, 0.0, domain.height)
        rr, pp, zz = np.meshgrid(r, phi, z, indexing="ij")
        w = (wr * r)[:, None, None] * wp[None, :, None] * wz[None, None, :]
        pts = np.stack([(rr * np.cos(pp)).ravel(), (rr * np.sin(pp)).ravel(), zz.ravel()], axis=1)
        return float(np.sum(w.ravel() * integrand(pts)))
    raise ValueError(f"quadrature does not support domain kind {domain.kind!r}")


def gaussian_truncation(sigma, n_particles: int = 1, rel_tail: float = 1e-12):
    """Momentum-ball radius for isotropic normal momenta with per-axis std ``sigma``.

    ``sigma`` may hold one value per particle, giving one radius each.
    Returns (radius, tail_bound) where tail_bound is the union bound on the
    discarded probability over all particles.
    """
    z = float(stats.chi.isf(rel_tail / (2 * n_particles), df=3))
    sig = np.asarray(sigma, dtype=float)
    radius = float(sig) * z if sig.ndim == 0 else tuple(float(s) * z for s in sig)
    return radius, n_particles * float(stats.chi.sf(z, df=3))


@dataclass(frozen=True)
class GofResult:
    statistic: float
    dof: int
    p_value: float
    observed: np.ndarray
    expected: np.ndarray


def _bin_probabilities(density, edges: np.ndarray) -> np.ndarray:
    pieces = np.array([
        integrate.quad(density, a, b, epsabs=0.0, epsrel=1e-11, limit=200)[0]
        for a, b in zip(edges[:-1], edges[1:])
    ])
    return pieces / pieces.sum()


def gof_statistic(batch, density, bins: int = 20, projection=None, support=None) -> GofResult:
    """Chi-square test of a projected sample against a 1-D density.

    ``batch`` is a SampleBatch (with ``projection`` mapping its points to one
    coordinate per sample) or a 1-D array of already projected values.  The
    density is normalized numerically over ``support``; bins with expected
    count below 5 are merged with their neighbours.
    """
    if bins < 5:
        raise ValueError("need at least 5 bins")
    if isinstance(batch, SampleBatch):
        if projection is None:
            raise ValueError("a projection is required for a SampleBatch")
        values = np.asarray(projection(batch.points), dtype=float).ravel()
    else:
        values = np.asarray(batch, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("empty batch")
    lo, hi = support if support is not None else (values.min(), values.max())
    edges = np.linspace(lo, hi, bins + 1)
    observed = np.histogram(np.clip(values, lo, hi), bins=edges)[0].astype(float)
    expected = values.size * _bin_probabilities(density, edges)

    obs, exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            obs.append(acc_o)
            exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if exp:
            obs[-1] += acc_o
            exp[-1] += acc_e
        else:
            obs.append(acc_o)
            exp.append(acc_e)
    if len(exp) < 2:
        raise ValueError("fewer than two usable bins after merging")
    obs_a, exp_a = np.array(obs), np.array(exp)
    stat = float(np.sum((obs_a - exp_a) ** 2 / exp_a))
    dof = len(exp) - 1
    return GofResult(stat, dof, float(stats.chi2.sf(stat, dof)), obs_a, exp_a)
