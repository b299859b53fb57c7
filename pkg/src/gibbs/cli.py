"""Command-line front end: ``gibbs thermo|verify|sample|equilibrate``.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import sys
from dataclasses import replace

import numpy as np

from gibbs import engine as E
from gibbs import models as M
from gibbs.config import ConfigError, ModelSetup, build, load
from gibbs.oracle.samplers import write_csv

THERMO_COLUMNS = ("b", "T", "log_p", "energy", "entropy", "var_h", "status")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    return format(float(v), ".17g")


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def b_grid(args) -> list[float]:
    if args.b is not None:
        return [float(args.b)]
    if args.b_min is None or args.b_max is None:
        raise UsageError("give --b or both --b-min and --b-max")
    if args.b_max < args.b_min:
        raise UsageError("--b-max must not be below --b-min")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1 (empty b grid)")
    if args.steps == 1:
        return [float(args.b_min)]
    return [float(v) for v in np.linspace(args.b_min, args.b_max, args.steps)]


def thermo_rows(setup: ModelSetup, grid, boltzmann_constant: float = 1.0) -> list[tuple]:
    """One row per grid value s, with b = s * direction.

    ``energy`` is -d log P/ds and ``var_h`` is d^2 log P/ds^2 along the ray,
    i.e. the mean and variance of the Hamiltonian (of <J, direction> for
    vector parameters).
    """
    rows = []
    for s in grid:
        b = setup.parameter(s)
        verdict = setup.model.admissible(b)
        temp = setup.temperature(s, boltzmann_constant)
        if not verdict.admissible:
            rows.append((s, temp, math.nan, math.nan, math.nan, math.nan, "inadmissible"))
            continue
        log_p, first, second = E.ray_derivatives(setup.model, setup.direction, s)
        energy = -first
        rows.append((s, temp, log_p, energy, log_p + s * energy, second, "ok"))
    return rows


def cmd_thermo(args, cfg) -> int:
    setup = build(cfg.data)
    rows = thermo_rows(setup, b_grid(args), cfg.boltzmann_constant)
    with _output(args.out) as out:
        out.write(",".join(THERMO_COLUMNS) + "\n")
        for row in rows:
            out.write(",".join(_fmt(v) for v in row[:-1]) + f",{row[-1]}\n")
    return EXIT_OK


def _check(results, name: str, passed: bool, detail: str) -> None:
    results.append((name, bool(passed), detail))


def verify_checks(setup: ModelSetup, s: float, n: int, seed: int) -> list[tuple[str, bool, str]]:
    """Cross-checks of one model at b = s * direction; list of (name, passed, detail)."""
    model = setup.model
    b = E.check_admissible(model, setup.parameter(s))
    results: list[tuple[str, bool, str]] = []
    log_p = E.log_partition(model, b)

    if model.name == "photon_gas":
        vol, c = model.params["volume"], model.params["light_speed"]
        fd = float(E.finite_difference_gradient(model, b)[0])
        exact = M.photon_energy(vol, c, s)
        _check(results, "energy vs finite difference", abs(-fd - exact) <= 1e-7 * exact,
               f"-dlogP/db={-fd:.12g} closed={exact:.12g}")
        lam = log_p
        k = np.arange(int(10 * lam + 50) + 1)
        pmf = M.photon_number_pmf(vol, c, s, k)
        total, mean = pmf.sum(), float(k @ pmf)
        var = float(((k - mean) ** 2) @ pmf)
        _check(results, "photon number normalization", abs(total - 1.0) < 1e-12, f"sum={total:.15g}")
        _check(results, "photon number mean", abs(mean - lam) < 1e-10 * max(1.0, lam), f"mean={mean:.15g} lambda={lam:.15g}")
        _check(results, "photon number variance", abs(var - lam) < 1e-10 * max(1.0, lam), f"var={var:.15g}")
        return results

    if model.domain is not None:
        est = E.oracle_log_partition(model, b, n=max(n, 1000), seed=seed)
        closed = math.exp(log_p)
        _check(results, "closed form vs Monte-Carlo", est.within(closed, 3.0),
               f"P={closed:.10g} mc={est.value:.10g}+-{est.stderr:.3g}")
    if model.quadrature_log_partition is not None:
        quad = float(model.quadrature_log_partition(b))
        _check(results, "closed form vs quadrature", abs(log_p - quad) <= 1e-8 * max(1.0, abs(quad)),
               f"logP={log_p:.15g} quad={quad:.15g}")
    if model.closed_form_gradient is not None:
        g = E.log_partition_gradient(model, b)
        fd = E.finite_difference_gradient(model, b)
        err = float(np.max(np.abs(g - fd)) / max(np.max(np.abs(fd)), 1e-300))
        _check(results, "gradient vs finite differences", err <= 1e-6, f"relative error {err:.3g}")
    mean = E.mean_momentum(model, b)
    ent = E.entropy(model, b)
    resid = ent - log_p - model.pairing(mean, b)
    _check(results, "entropy identity", abs(resid) <= 1e-12 * max(1.0, abs(ent)), f"residual {resid:.3g}")
    cov = E.covariance_form(model, b, setup.direction, setup.direction)
    _check(results, "covariance negativity", cov <= 1e-12 * max(1.0, abs(cov)), f"<DE(d), d>={cov:.6g}")
    if model.sampler is not None:
        batch = model.sampler(b, n, seed)
        values = model.coupling(batch.points, b)
        target = model.pairing(mean, b)
        err = float(values.std(ddof=1) / math.sqrt(values.size))
        _check(results, "sampler mean of <J, b>", abs(values.mean() - target) <= 3.0 * err,
               f"sample={values.mean():.10g}+-{err:.3g} closed={target:.10g}")
    return results


def _biased(setup: ModelSetup, bias: float) -> ModelSetup:
    base = setup.model.closed_form_log_partition
    model = replace(setup.model, closed_form_log_partition=lambda b: base(b) + math.log1p(bias))
    return replace(setup, model=model)


def cmd_verify(args, cfg) -> int:
    setup = build(cfg.data)
    if setup.model.closed_form_log_partition is None:
        raise UsageError(f"{setup.kind} has no closed form to verify")
    if args.inject_bias:
        setup = _biased(setup, args.inject_bias)
    grid = b_grid(args) if (args.b is not None or args.b_min is not None) else [1.0]
    failed = 0
    with _output(args.out) as out:
        for s in grid:
            for name, passed, detail in verify_checks(setup, s, args.n, args.seed):
                failed += not passed
                out.write(f"{'PASS' if passed else 'FAIL'} b={_fmt(s)} {name}: {detail}\n")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_sample(args, cfg) -> int:
    setup = build(cfg.data)
    if setup.model.sampler is None:
        raise UsageError(f"{setup.kind} has no sampler")
    grid = b_grid(args) if (args.b is not None or args.b_min is not None) else [1.0]
    if len(grid) != 1:
        raise UsageError("sample takes a single --b")
    b = E.check_admissible(setup.model, setup.parameter(grid[0]))
    batch = setup.model.sampler(b, args.n, args.seed)
    with _output(args.out) as out:
        write_csv(batch, out)
    return EXIT_OK


def cmd_equilibrate(args, cfg) -> int:
    data = cfg.data
    try:
        part_a, part_b = build(data["model_a"]), build(data["model_b"])
        b_a, b_b = float(data["b_a"]), float(data["b_b"])
    except KeyError as exc:
        raise ConfigError(f"missing configuration key {exc.args[0]!r}") from exc
    for part in (part_a, part_b):
        if not part.model.scalar:
            raise UsageError("equilibrate needs scalar-parameter models")
    b_eq = E.equilibrate(part_a.model, part_b.model, b_a, b_b)
    # the smaller b is the hotter part; it gives energy away
    hot, b_hot = (part_a, b_a) if b_a <= b_b else (part_b, b_b)
    transfer = E.mean_momentum(hot.model, b_hot) - E.mean_momentum(hot.model, b_eq)
    with _output(args.out) as out:
        out.write("b_prime,T_prime,energy_transferred\n")
        out.write(f"{_fmt(b_eq)},{_fmt(1.0 / (cfg.boltzmann_constant * b_eq))},{_fmt(transfer)}\n")
    return EXIT_OK


COMMANDS = {
    "thermo": cmd_thermo,
    "verify": cmd_verify,
    "sample": cmd_sample,
    "equilibrate": cmd_equilibrate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gibbs", description="Gibbs and generalized Gibbs states.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("thermo", "tabulate log P, E, S and Var(H) over a b grid"),
        ("verify", "cross-check a model's closed form against the oracles"),
        ("sample", "draw phase-space points from the Gibbs density"),
        ("equilibrate", "common b after two systems exchange energy"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON model configuration")
        p.add_argument("--b", type=float, help="single parameter value")
        p.add_argument("--b-min", type=float)
        p.add_argument("--b-max", type=float)
        p.add_argument("--steps", type=int, default=10, help="grid points between --b-min and --b-max")
        p.add_argument("--n", type=int, default=200_000 if name == "verify" else 1000, help="sample count")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output path (default stdout)")
        if name == "verify":
            p.add_argument("--inject-bias", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.n < 0:
        parser.error("--n must be >= 0")
    try:
        cfg = load(args.config)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, UsageError, E.InadmissibleParameter, E.UnsupportedModel) as exc:
        print(f"gibbs {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except E.EstimationError as exc:
        print(f"gibbs {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
