#!/usr/bin/env python3

import argparse
import logging
import sys

EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VIOLATED = 3

EXAMPLES = ("showex2", "showex", "adr", "contrast", "random")


class ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that exits with EXIT_USAGE on bad arguments."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _add_common_args(argp: argparse.ArgumentParser):
    source = argp.add_mutually_exclusive_group(required=True)
    source.add_argument(
        "--example", choices=EXAMPLES, help="name of a built-in example"
    )
    source.add_argument("--matrix", help="path to a matrix JSON file")

    # Example parameters; unset values use the generator defaults
    argp.add_argument("--lambda", dest="lam", type=float, help="showex2 lambda")
    argp.add_argument("--delta", type=float, help="showex/showex2 delta")
    argp.add_argument("--lambda1", type=float, help="showex lambda1")
    argp.add_argument("--lambda2", type=float, help="showex lambda2")
    argp.add_argument("--dim", type=int, help="showex dimension")
    argp.add_argument("--alpha", type=float, help="adr left endpoint")
    argp.add_argument("--beta", type=float, help="adr right endpoint")
    argp.add_argument("--n", type=int, help="adr grid size or random dimension")
    argp.add_argument(
        "--inner-product",
        choices=("trapezoidal", "euclidean"),
        help="adr inner product",
    )
    argp.add_argument(
        "--kind",
        choices=(
            "normal-accretive",
            "strictly-accretive",
            "sectorial-quarter",
            "unrestricted",
        ),
        help="random family",
    )
    argp.add_argument("--random-seed", type=int, help="random example seed")

    argp.add_argument("--seed", type=int, help="seed for all random draws")
    argp.add_argument("--output", help="report path (default: stdout)")
    argp.add_argument(
        "--no-timestamp",
        action="store_true",
        help="omit the timestamp for byte-identical reports",
    )
    argp.add_argument(
        "--assert",
        dest="assert_holds",
        action="store_true",
        help="exit with code 3 if any property or verdict is violated",
    )
    argp.add_argument(
        "--log-level",
        default="WARNING",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        help="logging level (logs go to stderr)",
    )


def _add_grid_args(argp: argparse.ArgumentParser):
    argp.add_argument("--t-max", type=float, help="end of the time grid")
    argp.add_argument("--n-points", type=int, help="number of grid points")


def _parse_check_args():
    argp = ArgumentParser(
        prog="run.py check",
        usage="run.py check [-h] (--example NAME | --matrix PATH) [options]",
    )
    _add_common_args(argp)

    return argp.parse_args(sys.argv[2:])


def _parse_evolve_args():
    argp = ArgumentParser(
        prog="run.py evolve",
        usage="run.py evolve [-h] (--example NAME | --matrix PATH) --u0 U0 [--csv CSV] [--snapshots PATH] [options]",
    )
    _add_common_args(argp)
    _add_grid_args(argp)
    argp.add_argument(
        "--u0",
        required=True,
        help="e<k>, ones, random, sin, witness or a vector JSON path",
    )
    argp.add_argument("--csv", help="path for the height series CSV")
    argp.add_argument(
        "--snapshots", help="path for u(t) snapshots (.safetensors)"
    )

    return argp.parse_args(sys.argv[2:])


def _parse_range_args():
    argp = ArgumentParser(
        prog="run.py range",
        usage="run.py range [-h] (--example NAME | --matrix PATH) [--csv CSV] [--n-angles N] [options]",
    )
    _add_common_args(argp)
    argp.add_argument("--csv", help="path for the boundary CSV")
    argp.add_argument("--n-angles", type=int, help="number of sweep angles")

    return argp.parse_args(sys.argv[2:])


def _parse_norms_args():
    argp = ArgumentParser(
        prog="run.py norms",
        usage="run.py norms [-h] (--example NAME | --matrix PATH) [--u0 U0] [--csv CSV] [options]",
    )
    _add_common_args(argp)
    _add_grid_args(argp)
    argp.add_argument("--u0", help="optional initial vector for h(t)")
    argp.add_argument("--csv", help="path for the norm series CSV")

    return argp.parse_args(sys.argv[2:])


def _parse_export_args():
    argp = ArgumentParser(
        prog="run.py export",
        usage="run.py export [-h] (--example NAME | --matrix PATH) save_path [options]",
    )
    _add_common_args(argp)
    argp.add_argument("save_path", help="path for the matrix JSON")

    return argp.parse_args(sys.argv[2:])


def _input_params(args):
    return {
        "lambda": args.lam,
        "delta": args.delta,
        "lambda1": args.lambda1,
        "lambda2": args.lambda2,
        "dim": args.dim,
        "alpha": args.alpha,
        "beta": args.beta,
        "n": args.n,
        "inner_product": args.inner_product,
        "kind": args.kind,
        "seed": args.random_seed,
    }


def _setup(command: str, args):
    from heightlab.pipelines import RunConfig, resolve_input

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    config = RunConfig.from_config(
        command=command,
        seed=args.seed,
        t_max=getattr(args, "t_max", None),
        n_points=getattr(args, "n_points", None),
        n_angles=getattr(args, "n_angles", None),
        csv_path=getattr(args, "csv", None),
        snapshots_path=getattr(args, "snapshots", None),
        timestamp=not args.no_timestamp,
    )
    resolved = resolve_input(
        example=args.example,
        matrix_path=args.matrix,
        params=_input_params(args),
    )

    return resolved, config


def check(args):
    """Entrypoint for the algebraic property checks"""
    from heightlab.pipelines import cmd_check

    resolved, config = _setup("check", args)
    return cmd_check(resolved, config)


def evolve(args):
    """Entrypoint for trajectory evolution and dynamics verdicts"""
    from heightlab.pipelines import cmd_evolve

    resolved, config = _setup("evolve", args)
    return cmd_evolve(resolved, args.u0, config)


def numerical_range(args):
    """Entrypoint for numerical range boundary sampling"""
    from heightlab.pipelines import cmd_range

    resolved, config = _setup("range", args)
    return cmd_range(resolved, config)


def norms(args):
    """Entrypoint for the operator-norm envelope E(t)"""
    from heightlab.pipelines import cmd_norms

    resolved, config = _setup("norms", args)
    return cmd_norms(resolved, config, u0_spec=args.u0)


def export(args):
    """Entrypoint for writing a matrix JSON file"""
    from heightlab.pipelines import cmd_export

    resolved, config = _setup("export", args)
    return cmd_export(resolved, args.save_path, config)


def main():
    # Nested argparse inspired by - https://shorturl.at/kuKW0
    parser = ArgumentParser(usage="run.py <command> [<args>]")
    parser.add_argument(
        "command",
        help="command to run",
        choices=("check", "evolve", "range", "norms", "export"),
    )

    # parse_args defaults to [1:] for args, but you need to
    # exclude the rest of the args too, or validation will fail
    args = parser.parse_args(sys.argv[1:2])

    commands = {
        "check": (check, _parse_check_args),
        "evolve": (evolve, _parse_evolve_args),
        "range": (numerical_range, _parse_range_args),
        "norms": (norms, _parse_norms_args),
        "export": (export, _parse_export_args),
    }
    entrypoint, parse_command_args = commands[args.command]
    command_args = parse_command_args()

    from heightlab.errors import DomainError, NumericalFailure
    from heightlab.data.reports import write_report

    try:
        report = entrypoint(command_args)
        write_report(report, command_args.output)
    except (DomainError, OSError) as e:
        logging.getLogger("run").error(str(e))
        sys.stderr.write(f"run.py {args.command}: error: {e}\n")
        sys.exit(EXIT_USAGE)
    except NumericalFailure as e:
        sys.stderr.write(
            f"run.py {args.command}: numerical failure: {e} "
            f"(residual = {e.residual})\n"
        )
        sys.exit(EXIT_NUMERICAL)


    violated = report.violated()
    if command_args.assert_holds and violated:
        sys.stderr.write(f"Violated: {', '.join(violated)}\n")
        sys.exit(EXIT_VIOLATED)


if __name__ == "__main__":
    main()
