"""Command-line interface.

Subcommands::

    svmrx sweep CONFIG [--workers N] [--output PATH]
    svmrx train CONFIG --receiver svm_ovo --model PATH [--kernel K] [--alpha A] [--snr S]
    svmrx eval CONFIG MODEL [--output PATH]
    svmrx selftest

On failure the last line on stderr is ``error: {json}`` with ``type``,
``code`` and ``message`` keys, and the exit status is non-zero.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import InvalidConfig, IoError, SvmrxError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SELFTEST = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("UsageError", "usage", message)
        sys.exit(EXIT_USAGE)


def _emit_error(kind: str, code: str, message: str) -> None:
    payload = {"type": kind, "code": code, "message": message}
    print("error: " + json.dumps(payload, sort_keys=True), file=sys.stderr)


def _print_records(records) -> None:
    print(f"{'alpha':>6} {'snr_db':>6} {'receiver':<12} {'kernel':<6} {'adc':>3} {'ber':>9} {'std_err':>9}")
    for r in records:
        print(
            f"{r.alpha:>6g} {r.snr_db:>6g} {r.receiver:<12} {r.kernel:<6} {r.adc_bits:>3} "
            f"{r.ber:>9.5f} {r.std_error:>9.2e}"
        )


def _cmd_sweep(args) -> int:
    from .harness.config import load_config
    from .harness.sweep import run_sweep

    config = load_config(args.config)
    if args.output:
        config = config.replace(output=args.output)
    records = run_sweep(config, workers=args.workers)
    _print_records(records)
    print(f"wrote {len(records)} rows to {config.output}")
    return EXIT_OK


def _pick(value, options, name):
    if value is None:
        return options[0]
    if value not in options:
        raise InvalidConfig(f"{name} {value} is not in the config grid {options}")
    return value


def _cmd_train(args) -> int:
    from .harness.config import SVM_RECEIVERS, load_config
    from .harness.sweep import train_svm_receiver
    from .svm.io import save_model

    config = load_config(args.config)
    if args.receiver not in SVM_RECEIVERS:
        raise InvalidConfig(f"--receiver must be one of {SVM_RECEIVERS}")
    alpha = _pick(args.alpha, config.alpha, "alpha")
    snr = _pick(args.snr, config.snr_db, "snr_db")
    kernel = args.kernel or config.kernel[0]
    model = train_svm_receiver(config, args.receiver, kernel, alpha, snr)
    save_model(model, args.model)
    print(f"saved {model.technique} model ({model.pool.shape[0]} support vectors) to {args.model}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    from .harness.config import load_config
    from .harness.records import write_csv
    from .harness.sweep import evaluate_model
    from .svm.io import load_model

    config = load_config(args.config)
    if args.output:
        config = config.replace(output=args.output)
    model = load_model(args.model)
    records = [evaluate_model(config, model, a, s) for a in config.alpha for s in config.snr_db]
    write_csv(records, config.output)
    _print_records(records)
    print(f"wrote {len(records)} rows to {config.output}")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    from .selftest import CHECKS

    ok = True
    for check in CHECKS:
        result = check()
        ok &= result.passed
        print(result.line(), flush=True)
    return EXIT_OK if ok else EXIT_SELFTEST


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="svmrx", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress per grid point")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep", help="run the configured (alpha, SNR, receiver) grid")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=1, help="parallel processes (default 1)")
    p.add_argument("--output", help="override the CSV path from the config")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("train", help="train one SVM receiver and save it")
    p.add_argument("config")
    p.add_argument("--receiver", required=True, choices=("svm_ovo", "svm_bitbank"))
    p.add_argument("--model", required=True, help="output model path")
    p.add_argument("--kernel", choices=("poly2", "rbf"))
    p.add_argument("--alpha", type=float, help="operating point (default: first in config)")
    p.add_argument("--snr", type=float, help="operating point (default: first in config)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model on the config grid")
    p.add_argument("config")
    p.add_argument("model")
    p.add_argument("--output", help="override the CSV path from the config")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("selftest", help="run the built-in oracle checks")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except InvalidConfig as exc:
        _emit_error(type(exc).__name__, exc.code, str(exc))
        return EXIT_USAGE
    except IoError as exc:
        _emit_error(type(exc).__name__, exc.code, str(exc))
        return EXIT_IO
    except SvmrxError as exc:
        _emit_error(type(exc).__name__, exc.code, str(exc))
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
