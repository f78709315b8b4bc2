"""Command line entry point: ``ionpair-grover {search,figures,validate,physics}``.

Every flag can also be given in a ``--config`` file of ``key = value`` lines
(keys are flag names without dashes, ``-`` or ``_`` both accepted).  Flags
given on the command line win over the file.

Exit codes: 0 success, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import engine, oracle, physics, trajfile, validation
from .gates import TargetIndex, all_ones

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MODES = ("search", "figures", "validate", "physics")
FIGURE_QUBITS = {1: 3, 2: 4, 3: 5}


def load_config(path: str) -> dict:
    parser = configparser.ConfigParser()
    text = Path(path).read_text()
    parser.read_string("[config]\n" + text)
    return {k.replace("-", "_"): v for k, v in parser["config"].items()}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output file (search/physics) or directory (figures)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--tol", type=float, default=1e-9, help="recurrence / tie tolerance")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ionpair-grover", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="flat key = value config file")
    sub = parser.add_subparsers(dest="mode")

    s = sub.add_parser("search", help="run one search and report")
    s.add_argument("--q", type=int, default=2)
    s.add_argument("--marked", help="marked state as bitstring (default all ones)")
    s.add_argument("--paper-index", type=int, help="marked state as 1-based index, 1 = |1...1>")
    s.add_argument("--iters", type=int, default=18)
    s.add_argument("--scheme", choices=("paper", "standard"), default="paper")
    _add_common(s)

    f = sub.add_parser("figures", help="regenerate the q=3,4,5 trajectories")
    f.add_argument("--iters", type=int, default=18)
    _add_common(f)

    v = sub.add_parser("validate", help="run the self-consistency checks")
    v.add_argument("--q-range", default="2..8", help="inclusive qubit range, e.g. 2..6")
    v.add_argument("--inject-fault", action="store_true", help="flip one extra P sign")
    _add_common(v)

    ph = sub.add_parser("physics", help="check the effective two-ion dynamics")
    ph.add_argument("--omega", type=float, default=0.05, help="Rabi frequency / trap")
    ph.add_argument("--eta", type=float, default=0.05, help="Lamb-Dicke parameter")
    ph.add_argument("--delta", type=float, default=0.95, help="detuning / trap")
    ph.add_argument("--fock-cutoff", type=int, default=physics.DEFAULT_FOCK_CUTOFF)
    ph.add_argument("--draws", type=int, default=10_000, help="Monte-Carlo dephasing draws")
    _add_common(ph)
    ph.set_defaults(tol=physics.DEFAULT_TOL)
    return parser, sub


def _apply_config(argv, parser, sub) -> list:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    try:
        cfg = load_config(known.config)
    except (OSError, configparser.Error) as exc:
        parser.error(f"cannot read config {known.config}: {exc}")
    mode = cfg.pop("mode", None)
    if mode is not None and not any(a in MODES for a in argv):
        argv = [*argv, mode]
    for name, action_parser in sub.choices.items():
        dests = {a.dest: a for a in action_parser._actions}
        defaults = {}
        for key, value in cfg.items():
            action = dests.get(key)
            if action is None:
                continue
            if action.type is not None:
                value = action.type(value)
            elif action.const is True:
                value = value.lower() in ("1", "true", "yes", "on")
            defaults[key] = value
        action_parser.set_defaults(**defaults)
    unknown = set(cfg) - {a.dest for p in sub.choices.values() for a in p._actions}
    if unknown:
        parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
    return argv


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _marked_from(args, parser) -> TargetIndex:
    if args.marked is not None and args.paper_index is not None:
        parser.error("give either --marked or --paper-index, not both")
    try:
        if args.paper_index is not None:
            return TargetIndex.from_paper_index(args.q, args.paper_index)
        if args.marked is None:
            return all_ones(args.q)
        target = TargetIndex.from_bitstring(args.marked)
    except ValueError as exc:
        parser.error(str(exc))
    if target.q != args.q:
        parser.error(f"marked bitstring {args.marked!r} has length {target.q}, expected q={args.q}")
    return target


def format_report(traj: engine.Trajectory, tol: float) -> str:
    rep = engine.search_report(traj, tie_tol=tol)
    co = ", ".join(t.bitstring for t in rep.co_maximal)
    lines = [
        f"scheme: {traj.scheme}",
        f"q: {traj.q}  marked: {traj.marked.bitstring}  iterations: {traj.n_iters}",
        f"peak: n={rep.peak_iteration}  P(marked)={rep.peak_probability:.12f}",
        f"co-maximal at peak: {co}",
        f"recurrence period: {rep.period if rep.period is not None else 'none'}",
        f"optimal iterations (textbook): {engine.optimal_iterations(2**traj.q)}",
    ]
    return "\n".join(lines) + "\n"


def cmd_search(args, parser) -> int:
    marked = _marked_from(args, parser)
    if args.iters < 0:
        parser.error("--iters must be non-negative")
    if args.scheme == "standard":
        if args.q > oracle.MAX_ORACLE_QUBITS:
            parser.error(f"standard scheme is dense; q <= {oracle.MAX_ORACLE_QUBITS}")
        traj = oracle.standard_grover_run(args.q, marked, args.iters)
    else:
        if not 2 <= args.q <= engine.MAX_ENGINE_QUBITS:
            parser.error(f"--q must lie in [2, {engine.MAX_ENGINE_QUBITS}]")
        traj = engine.run_search(args.q, marked, args.iters)
    tf = trajfile.from_trajectory(traj)
    problems = trajfile.check(tf)
    report = format_report(traj, args.tol)
    if args.out in (None, "-"):
        _emit(trajfile.dumps(tf, args.format), None)
        sys.stderr.write(report)
    else:
        _emit(trajfile.dumps(tf, args.format), args.out)
        sys.stdout.write(report)
    for msg in problems:
        sys.stderr.write(f"invalid trajectory: {msg}\n")
    return EXIT_FAIL if problems else EXIT_OK


def cmd_figures(args, parser) -> int:
    outdir = Path(args.out or "figures")
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        sys.stderr.write(f"cannot create {outdir}: {exc}\n")
        return EXIT_FAIL
    status = EXIT_OK
    for fig, q in FIGURE_QUBITS.items():
        traj = engine.run_search(q, all_ones(q), args.iters)
        tf = trajfile.from_trajectory(traj)
        path = outdir / f"fig{fig}.{args.format}"
        try:
            path.write_text(trajfile.dumps(tf, args.format))
        except OSError as exc:
            sys.stderr.write(f"cannot write {path}: {exc}\n")
            return EXIT_FAIL
        rep = engine.search_report(traj, tie_tol=args.tol)
        pm = traj.marked_probabilities
        within = int(math.floor(math.sqrt(2**q)))
        print(
            f"{path}: q={q} peak n={rep.peak_iteration} P={rep.peak_probability:.6f} "
            f"max P over n<={within}: {pm[1:within + 1].max():.6f} "
            f"co-maximal: {','.join(t.bitstring for t in rep.co_maximal)}"
        )
        if trajfile.check(tf):
            status = EXIT_FAIL
    return status


def _parse_range(text: str, parser):
    try:
        lo, _, hi = text.partition("..")
        lo, hi = int(lo), int(hi or lo)
    except ValueError:
        parser.error(f"bad --q-range {text!r}; expected e.g. 2..6")
    return lo, hi


def cmd_validate(args, parser) -> int:
    lo, hi = _parse_range(args.q_range, parser)
    start = time.perf_counter()
    try:
        results = validation.run_all(lo, hi, inject_fault=args.inject_fault, seed=args.seed)
    except ValueError as exc:
        parser.error(str(exc))
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed "
          f"in {time.perf_counter() - start:.1f} s")
    for r in failed:
        print(f"failed: {r.name}")
    return EXIT_FAIL if failed else EXIT_OK


def format_fit_table(table, fmt: str) -> str:
    cols = ("n", "fitted", "formula", "relative_error")
    if fmt == "json":
        return json.dumps([dict(zip(cols, row)) for row in table], indent=1) + "\n"
    rows = [",".join(cols)] + [f"{n},{a!r},{b!r},{e!r}" for n, a, b, e in table]
    return "\n".join(rows) + "\n"


def cmd_physics(args, parser) -> int:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", physics.RegimeWarning)
        try:
            p = physics.PulseParams(args.omega, args.eta, args.delta, force=True)
        except ValueError as exc:
            parser.error(str(exc))
    regime = p.regime_warnings()
    try:
        rate = physics.effective_rabi(p)
    except ZeroDivisionError as exc:
        parser.error(str(exc))
    lines = [f"parameters: omega={p.rabi} eta={p.lamb_dicke} delta={p.detuning} (trap = 1)"]
    lines.append(f"effective Rabi frequency (formula): {rate:.6e}")
    if regime:
        lines.append("WARNINGS")
        lines += [f"  {w}" for w in regime]
    checks = []

    if rate != 0.0:
        duration = math.pi / abs(rate)
        period = physics.drive_period(p)
        probe = np.arange(0.0, duration, period) if period else []
        times = np.concatenate([np.linspace(0.0, min(duration, period or duration), 101), probe])
        run = physics.simulate_full(
            p, physics.FullSystemState.basis("ge", 0, args.fock_cutoff), duration, args.tol, times
        )
        transfer = float(run.population("eg", 0)[-1])
        leak = float(run.phonon_change(0).max())
        lines.append(f"full dynamics |ge,0> -> |eg,0> at T=pi/|rate|: P={transfer:.6f} "
                     f"(peak {run.population('eg', 0).max():.6f}); max phonon change {leak:.2e}")
        checks += [("transfer >= 0.98", transfer >= 0.98), ("phonon change < 0.02", leak < 0.02)]

        lines.append("fit table")
        lines.append("  n, fitted, formula, relative_error, residual")
        fits = []
        table = []
        for n in (0, 1, 2):
            fit = physics.extract_effective_rabi(p, n, args.fock_cutoff, tol=args.tol)
            fits.append(fit)
            table.append((n, fit.fitted, fit.formula, fit.relative_error))
            lines.append(f"  {n}, {fit.fitted:.6e}, {fit.formula:.6e}, "
                         f"{fit.relative_error:.4f}, {fit.residual:.4f}")
        spread = abs(fits[0].fitted - fits[2].fitted) / abs(fits[0].fitted)
        lines.append(f"n=0 vs n=2 relative spread: {spread:.4f}")
        checks += [("fit within 5% of formula", fits[0].relative_error < 0.05),
                   ("n-independence < 2%", spread < 0.02)]
        conv = physics.cutoff_convergence(
            p, physics.FullSystemState.basis("ge", 0, args.fock_cutoff), duration, args.tol
        )
        lines.append(f"cutoff doubling changes final amplitudes by {conv:.2e}")
        checks.append(("cutoff convergence < 1e-6", conv < 1e-6))

    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(100):
        psi = np.zeros(4, dtype=complex)
        psi[list(physics.LOGICAL)] = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi /= np.linalg.norm(psi)
        t, e_e, e_g, phi = rng.uniform(0, 100), rng.normal(), rng.normal(), rng.uniform(0, 2 * np.pi)
        for out in (physics.free_evolution(psi, t, e_e, e_g), physics.collective_dephase(psi, phi)):
            worst = max(worst, abs(1.0 - physics.logical_fidelity(psi, out)),
                        np.max(np.abs(np.abs(out) ** 2 - np.abs(psi) ** 2)))
    lines.append(f"dephasing / free evolution: worst logical deviation {worst:.2e}")
    checks.append(("degeneracy shield < 1e-12", worst < 1e-12))

    probe_state = np.array([0.5, 0.5, 0.5, 0.5], dtype=complex)
    rho = physics.dephasing_average(probe_state, args.draws, args.seed)
    logical_dev = float(np.max(np.abs(rho[1:3, 1:3] - 0.25)))
    lines.append(f"Monte-Carlo dephasing ({args.draws} draws): logical block deviation "
                 f"{logical_dev:.2e}, |rho_gg,ee| = {abs(rho[0, 3]):.2e}")
    checks.append(("logical block unchanged by dephasing", logical_dev < 1e-12))

    lines.append("checks")
    lines += [f"  {'PASS' if ok else 'FAIL'}  {name}" for name, ok in checks]
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out not in (None, "-") and rate != 0.0:
        _emit(format_fit_table(table, args.format), args.out)
    if regime:
        return EXIT_OK
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_FAIL


COMMANDS = {"search": cmd_search, "figures": cmd_figures,
            "validate": cmd_validate, "physics": cmd_physics}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub = build_parser()
    try:
        argv = _apply_config(argv, parser, sub)
        args = parser.parse_args(argv)
        if args.mode is None:
            parser.error("a subcommand is required: " + ", ".join(MODES))
        return COMMANDS[args.mode](args, sub.choices[args.mode])
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
