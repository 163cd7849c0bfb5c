"""Command-line front end: characterization, optimization, construction, verification.

Subcommands
    characterize        exact PoA of a built-in family or a custom basis file
    optimize            optimal generating functions (add --fixed for constant incentives)
    worst-case          build a matching worst-case game instance (JSON)
    verify              oracle cross-checks: tightness + randomized upper bound
    sweep-perception    (sigma, gamma) grid of exact PoA values as CSV
    welfare-experiment  random concave welfare study: identical interest vs optimal
    triplets            dump I(n) / IR(n) as CSV

Exit codes: 0 success, 1 input error, 2 solver failure, 3 verification failure.
Grid and sample workloads fan out over a process pool; POALAB_THREADS caps the
worker count.  Identical configuration and seed produce byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import basis as basis_mod
from .basis import Side, load_basis_class
from .characterize import PoaReport, characterize_cost, characterize_welfare
from .game_oracle import enumerate_equilibria, load_game, random_in_class_game, save_game
from .index_set import enumerate_full, enumerate_reduced, write_csv as triplets_csv
from .lp_core import DEFAULT_TOLERANCES, SolverFailureError, SolverTolerances
from .optimize import (class_poa_from_rules, optimize_cost_rule, optimize_fixed_incentive,
                       optimize_welfare_rule)
from .worstcase import build_game, extract_recipe

FAMILIES = ("poly", "poly-mc", "bpr", "perception", "welfare-random", "custom")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3


class VerificationError(RuntimeError):
    """An oracle cross-check failed."""


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one CLI invocation."""

    command: str
    family: str = "poly"
    d: int = 1
    n: int = 2
    sigma: float = 1.0
    gamma: float = 1.0
    grid_step: float = 0.1
    k_max: int = 50
    t: float = 1.0
    seed: int = 0
    samples: int = 200
    fixed: bool = False
    full: bool = False
    eta: float = 1e-3
    basis: str | None = None
    game: str | None = None
    out: str | None = None
    fmt: str = "json"
    tol: float = DEFAULT_TOLERANCES.feasibility

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.grid_step <= 0:
            raise ValueError("grid step must be positive")
        if self.samples < 1:
            raise ValueError("sample count must be at least 1")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")

    @property
    def tolerances(self) -> SolverTolerances:
        return SolverTolerances(feasibility=self.tol, activity=DEFAULT_TOLERANCES.activity)


def worker_count() -> int:
    env = os.environ.get("POALAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def build_class(cfg: RunConfig):
    """Basis pairs for the configured family."""
    if cfg.basis is not None or cfg.family == "custom":
        if cfg.basis is None:
            raise ValueError("--family custom requires --basis <path>")
        return load_basis_class(cfg.basis)
    if cfg.family == "poly":
        return basis_mod.polynomial_basis(cfg.d, cfg.n)
    if cfg.family == "poly-mc":
        return basis_mod.polynomial_marginal_cost_basis(cfg.d, cfg.n)
    if cfg.family == "bpr":
        return basis_mod.bpr_basis(cfg.k_max, cfg.n, cfg.t)
    if cfg.family == "perception":
        return basis_mod.perception_affine_basis(cfg.sigma, cfg.gamma, cfg.n)
    if cfg.family == "welfare-random":
        w = basis_mod.random_concave_welfare(cfg.n, cfg.seed)
        return [basis_mod.marginal_contribution_welfare(w, cfg.n)]
    raise ValueError(f"unknown family {cfg.family!r}")


def _characterize_class(pairs, cfg: RunConfig) -> PoaReport:
    if pairs[0].side is Side.COST_MIN:
        return characterize_cost(pairs, tol=cfg.tolerances)
    return characterize_welfare(pairs, tol=cfg.tolerances)


def report_to_dict(report: PoaReport) -> dict:
    return {
        "poa": report.poa,
        "rho_star": report.rho_star,
        "nu_star": report.nu_star,
        "bounded": report.bounded,
        "side": report.side.value,
        "n": report.n,
        "active": [[j, [t.x, t.y, t.z]] for j, t in report.active],
    }


def _write_json(doc, path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def cmd_characterize(cfg: RunConfig) -> int:
    pairs = build_class(cfg)
    report = _characterize_class(pairs, cfg)
    print(f"poa {float(report.poa)!r}")
    if cfg.out:
        _write_json(report_to_dict(report), cfg.out)
    return EXIT_OK


def _rule_task(task):
    side_value, c_vals, n, label, tol = task
    tols = SolverTolerances(feasibility=tol)
    if Side(side_value) is Side.COST_MIN:
        return optimize_cost_rule(c_vals, n, label=label, tol=tols)
    return optimize_welfare_rule(c_vals, n, label=label, tol=tols)


def cmd_optimize(cfg: RunConfig) -> int:
    pairs = build_class(cfg)
    side = pairs[0].side
    if cfg.fixed:
        if side is not Side.COST_MIN:
            raise ValueError("fixed incentives apply to cost-side classes only")
        # recover congestion values c(k) = C(k)/k from the resource cost columns
        loads = np.arange(1, cfg.n + 1, dtype=float)
        cols = [np.asarray(p.c[1:]) / loads for p in pairs]
        result = optimize_fixed_incentive(cols, cfg.n, tol=cfg.tolerances)
        print(f"poa {float(result.poa)!r}")
        if cfg.out:
            _write_json({
                "poa": result.poa,
                "rho_star": result.rho_star,
                "nu_star": result.nu_star,
                "tau": None if result.tau is None else [float(v) for v in result.tau],
                "tau_available": result.tau_available,
            }, cfg.out)
        return EXIT_OK
    # the per-basis programs are independent; fan out and rejoin in basis order
    tasks = [(side.value, np.asarray(p.c), cfg.n, p.label, cfg.tol) for p in pairs]
    rules = _pooled_map(_rule_task, tasks)
    poa = class_poa_from_rules(rules)
    print(f"poa {float(poa)!r}")
    if cfg.out:
        if cfg.fmt == "csv":
            with open(cfg.out, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["label", "k", "f_opt", "poa"])
                for rule in rules:
                    for k, val in enumerate(rule.f_opt, start=1):
                        writer.writerow([rule.label, k, repr(float(val)),
                                         repr(float(rule.poa_j))])
        else:
            _write_json({
                "poa": poa,
                "rules": [{"label": r.label, "f_opt": [float(v) for v in r.f_opt],
                           "poa": r.poa_j} for r in rules],
            }, cfg.out)
    return EXIT_OK


def cmd_worst_case(cfg: RunConfig) -> int:
    pairs = build_class(cfg)
    report = characterize_cost(pairs, tol=cfg.tolerances)
    recipe = extract_recipe(report, pairs, eta_unbounded=cfg.eta)
    game = build_game(recipe, pairs, cfg.n)
    print(f"scenario {recipe.scenario.value} eta {float(recipe.eta)!r} "
          f"poa {float(report.poa)!r}")
    if cfg.out:
        save_game(game, cfg.out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    pairs = build_class(cfg)
    report = _characterize_class(pairs, cfg)
    failures = []

    if report.side is Side.COST_MIN:
        if cfg.game:
            game = load_game(cfg.game)
        else:
            recipe = extract_recipe(report, pairs, eta_unbounded=cfg.eta)
            game = build_game(recipe, pairs, cfg.n)
        oracle = enumerate_equilibria(game)
        if report.bounded:
            if oracle.poa is None or abs(oracle.poa - report.poa) > 1e-6:
                failures.append(f"tightness: oracle poa {oracle.poa} vs lp {report.poa}")
            else:
                print(f"tightness ok: oracle poa {oracle.poa!r} matches lp within 1e-6")
        else:
            floor = 0.9 * (1.0 - cfg.eta) / cfg.eta
            if oracle.poa is None or oracle.poa < floor:
                failures.append(f"unbounded construction: oracle poa {oracle.poa} below {floor}")
            else:
                print(f"unbounded ok: oracle poa {oracle.poa!r} at eta {cfg.eta!r}")

    bound = report.poa
    users = min(cfg.n, 3)
    for i in range(cfg.samples):
        game = random_in_class_game(pairs, users, seed=cfg.seed + i)
        oracle = enumerate_equilibria(game)
        if oracle.poa is not None and oracle.poa > bound + 1e-9:
            failures.append(f"sample {i}: oracle poa {oracle.poa} exceeds lp bound {bound}")
    print(f"random suite: {cfg.samples} instances within the lp bound"
          if not failures else f"random suite: {len(failures)} violation(s)")
    if failures:
        for line in failures:
            print(f"FAIL {line}", file=sys.stderr)
        raise VerificationError(f"{len(failures)} verification failure(s)")
    return EXIT_OK


def _perception_point(task) -> tuple[float, float, float]:
    sigma, gamma, n, tol = task
    pairs = basis_mod.perception_affine_basis(sigma, gamma, n)
    report = characterize_cost(pairs, tol=SolverTolerances(feasibility=tol))
    return sigma, gamma, report.poa


def _grid_values(bound: float, step: float) -> list[float]:
    count = int(round(bound / step)) + 1
    return [i * step for i in range(count)]


def cmd_sweep_perception(cfg: RunConfig) -> int:
    tasks = [(s, g, cfg.n, cfg.tol)
             for s in _grid_values(cfg.sigma, cfg.grid_step)
             for g in _grid_values(cfg.gamma, cfg.grid_step)]
    rows = _pooled_map(_perception_point, tasks)
    out = open(cfg.out, "w", newline="") if cfg.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["sigma", "gamma", "poa"])
        for sigma, gamma, poa in rows:
            writer.writerow([repr(float(sigma)), repr(float(gamma)), repr(float(poa))])
    finally:
        if cfg.out:
            out.close()
    return EXIT_OK


def _welfare_sample(task) -> tuple[float, float]:
    seed, n, tol = task
    tols = SolverTolerances(feasibility=tol)
    w = basis_mod.random_concave_welfare(n, seed)
    identical = characterize_welfare(
        [basis_mod.marginal_contribution_welfare(w, n)], tol=tols).poa
    optimal = optimize_welfare_rule(w, n, tol=tols).poa_j
    return identical, optimal


def _pooled_map(fn, tasks):
    workers = worker_count()
    if workers <= 1 or len(tasks) < 4:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def run_welfare_experiment(samples: int, n: int, seed: int,
                           tol: float = DEFAULT_TOLERANCES.feasibility):
    """Per-sample (identical-interest PoA, optimal PoA) plus a summary dict."""
    tasks = [(seed + i, n, tol) for i in range(samples)]
    results = _pooled_map(_welfare_sample, tasks)
    identical = np.array([r[0] for r in results])
    optimal = np.array([r[1] for r in results])
    improvement = identical / optimal
    hist_ident, edges_ident = np.histogram(identical, bins=40)
    hist_improve, edges_improve = np.histogram(improvement, bins=40)
    summary = {
        "samples": samples,
        "n": n,
        "seed": seed,
        "identical_interest_mean": float(identical.mean()),
        "optimal_mean": float(optimal.mean()),
        "improvement_mean": float(improvement.mean()),
        "improvement_min": float(improvement.min()),
        "identical_interest_histogram": {
            "edges": [float(v) for v in edges_ident],
            "counts": [int(v) for v in hist_ident],
        },
        "improvement_histogram": {
            "edges": [float(v) for v in edges_improve],
            "counts": [int(v) for v in hist_improve],
        },
    }
    return results, summary


def cmd_welfare_experiment(cfg: RunConfig) -> int:
    results, summary = run_welfare_experiment(cfg.samples, cfg.n, cfg.seed, cfg.tol)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample", "seed", "identical_poa", "optimal_poa", "improvement"])
            for i, (ident, opt) in enumerate(results):
                writer.writerow([i, cfg.seed + i, repr(float(ident)), repr(float(opt)),
                                 repr(float(ident / opt))])
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_triplets(cfg: RunConfig) -> int:
    ts = enumerate_full(cfg.n) if cfg.full else enumerate_reduced(cfg.n)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            triplets_csv(ts, fh)
    else:
        triplets_csv(ts, sys.stdout)
    return EXIT_OK


HANDLERS = {
    "characterize": cmd_characterize,
    "optimize": cmd_optimize,
    "worst-case": cmd_worst_case,
    "verify": cmd_verify,
    "sweep-perception": cmd_sweep_perception,
    "welfare-experiment": cmd_welfare_experiment,
    "triplets": cmd_triplets,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=FAMILIES, default="poly")
    p.add_argument("--d", type=int, default=1, help="polynomial degree")
    p.add_argument("--n", type=int, default=2, help="maximum number of users")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--grid-step", type=float, default=0.1, dest="grid_step")
    p.add_argument("--k-max", type=int, default=50, dest="k_max")
    p.add_argument("--t", type=float, default=1.0, help="BPR free-flow time")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--fixed", action="store_true", help="constant (fixed) incentives")
    p.add_argument("--full", action="store_true", help="full triplet set I(n)")
    p.add_argument("--eta", type=float, default=1e-3,
                   help="scaling for the unbounded worst-case construction")
    p.add_argument("--basis", default=None, help="custom basis class JSON file")
    p.add_argument("--game", default=None, help="game instance JSON to verify")
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCES.feasibility)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poalab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        _add_common(sub.add_parser(name))
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, nonzero for bad input
        return EXIT_OK if not exc.code else EXIT_INPUT
    try:
        cfg = RunConfig(command=args.command, family=args.family, d=args.d, n=args.n,
                        sigma=args.sigma, gamma=args.gamma, grid_step=args.grid_step,
                        k_max=args.k_max, t=args.t, seed=args.seed, samples=args.samples,
                        fixed=args.fixed, full=args.full, eta=args.eta, basis=args.basis,
                        game=args.game, out=args.out, fmt=args.fmt, tol=args.tol)
        return HANDLERS[cfg.command](cfg)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverFailureError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
