"""Command-line entry point: ``ilms <verb> --config cfg.json --out dir``.

Exit codes: 0 success, 2 usage/config error, 3 instability, 4 divergence,
5 I/O failure.
"""

import argparse
import json
import logging
import os
import sys

from . import output
from .errors import DivergenceError, ILMSError, InstabilityError, ValidationError
from .experiments import (
    ExperimentSpec, run_experiment, table1_suite, write_report, write_table1_csv,
)
from .simulator import monte_carlo, to_db
from .theory import (
    SpectralData, build_chain, mean_stability_bound, steady_state,
    theory_curves,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INSTABILITY = 3
EXIT_DIVERGENCE = 4
EXIT_IO = 5

class UsageError(Exception):
    pass


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_spec(args):
    """Read the config file and apply --set/--seed/--replicas/--iterations."""
    if not args.config:
        raise UsageError("--config is required")
    try:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse {args.config}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--set expects key=value, got {item!r}")
        doc[key] = _parse_value(value)
    for key in ("seed", "replicas", "iterations"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    label = os.path.splitext(os.path.basename(args.config))[0]
    try:
        spec = ExperimentSpec.from_dict(doc, label=label)
        spec.network()
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    return spec


def _out_dir(args):
    if not args.out:
        raise UsageError("--out is required")
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_simulate(args):
    spec = load_spec(args)
    out = _out_dir(args)
    result = monte_carlo(spec.network(), spec.iterations, spec.replicas, spec.seed)
    path = os.path.join(out, "simulation.csv")
    output.write_sim_csv(path, result)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_theory(args):
    spec = load_spec(args)
    out = _out_dir(args)
    config = spec.network()
    chain = build_chain(config)
    rho = chain.spectral_radius
    summary_path = os.path.join(out, "steady_state.json")
    if not chain.stable:
        output.write_json(summary_path, {"msd_db": None, "emse_db": None,
                                         "spectral_radius": rho, "stable": False})
        raise InstabilityError(f"spectral radius {rho:.6g} >= 1; no steady state",
                               spectral_radius=rho)
    curves = theory_curves(chain, config.true_weights, spec.iterations)
    msd = steady_state(chain, chain.msd_weighting())
    emse = steady_state(chain, chain.emse_weighting())
    output.write_theory_csv(os.path.join(out, "theory.csv"), curves)
    output.write_json(summary_path, {
        "msd_db": float(to_db(msd)),
        "emse_db": float(to_db(emse)),
        "spectral_radius": rho,
        "stable": True,
    })
    print(f"steady-state MSD {to_db(msd):.4f} dB, EMSE {to_db(emse):.4f} dB, "
          f"rho={rho:.6f}")
    return EXIT_OK


def cmd_compare(args):
    spec = load_spec(args)
    out = _out_dir(args)
    report = run_experiment(spec)
    target = write_report(report, out)
    print(f"{report.label}: sim {report.sim_plateau_db:.3f} dB, "
          f"closed form {report.closed_form_plateau_db:.3f} dB, "
          f"steady state {report.steady_state_db:.3f} dB, "
          f"max transient delta {report.max_transient_delta_db:.3f} dB -> {target}")
    return EXIT_OK


def cmd_table1(args):
    out = _out_dir(args)
    doc = {}
    if args.config:
        doc = load_spec(args).network_dict()
    seed = args.seed if args.seed is not None else doc.get("seed", 0)
    rows = table1_suite(
        seed=seed,
        replicas=args.replicas or 0,
        iterations=args.iterations,
        jitter=doc.get("jitter", 0.5),
        field=doc.get("field", "complex"),
    )
    path = os.path.join(out, "table1.csv")
    write_table1_csv(path, rows)
    for r in rows:
        print(f"{r.data_type:10s} {r.snr_db:4.0f} dB  mu={r.step_size:<6g} "
              f"sim {r.sim_db:8.3f}  closed form {r.closed_form_db:8.3f}  "
              f"steady state {r.steady_state_db:8.3f}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_stability(args):
    spec = load_spec(args)
    config = spec.network()
    spectral = SpectralData.from_config(config)
    ok = True
    print("node  bound      mu         mean-stable")
    for k, node in enumerate(config.nodes):
        bound = mean_stability_bound(spectral, k)
        passed = 0 < node.step_size < bound
        ok &= passed
        print(f"{k + 1:4d}  {bound:<9.6g}  {node.step_size:<9.6g}  "
              f"{'pass' if passed else 'FAIL'}")
    rho = build_chain(config, spectral).spectral_radius
    print(f"mean-square spectral radius: {rho:.6g} "
          f"({'stable' if rho < 1 else 'unstable'})")
    return EXIT_OK if ok else EXIT_INSTABILITY


COMMANDS = {
    "simulate": cmd_simulate,
    "theory": cmd_theory,
    "compare": cmd_compare,
    "table1": cmd_table1,
    "stability": cmd_stability,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ilms", description="Incremental LMS simulation and mean-square theory."
    )
    parser.add_argument("verb", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON network/run configuration")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key (value parsed as JSON)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--replicas", type=int)
    parser.add_argument("--iterations", type=int)
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.verb](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InstabilityError as exc:
        print(f"unstable: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except ValidationError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ILMSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
