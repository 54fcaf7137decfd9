"""
Recip Main - Entry Point
Verifica numerica della reciprocita' per somme di somme di Kloosterman.

    main.py verify {all|kloo-lemmas|weil|...|reciprocity} [--p 2 --q 3 --s 1.5 --cmax 600 --rel-tol 1e-3 --sabotage --json out.json]
    main.py verify lfe --c 5 --d 2 --s "0.5+2i"
    main.py compute {phi-cap|mellin|kloosterman|phi-h|phi-plus|dg} [...]
    main.py tabulate tau --nmax 100 [--csv tau.csv]
"""

import os
import sys
import json
import argparse
import logging
import logging.config
from pathlib import Path
from dotenv import load_dotenv

from config.config_loader import ConfigLoader, parse_config
from core.errors import ConfigError, RecipError
from core.orchestrator import COMPUTE_KINDS, EXIT_ENGINE_ERROR, EXIT_FAILED, RecipOrchestrator, compute
from core.reports import parse_complex
from core.suites import SUITES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Kloosterman-sum reciprocity verification engine")
    parser.add_argument("--config", help="YAML config (default: $RECIP_CONFIG)")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", help="run verification suites")
    verify.add_argument("suites", nargs="+", choices=["all", *SUITES])
    verify.add_argument("--p", type=int)
    verify.add_argument("--q", type=int)
    verify.add_argument("--s", action="append", help="spectral point a+bi (repeatable)")
    verify.add_argument("--function", dest="test_function")
    verify.add_argument("--cmax", "--c-max", dest="c_max", type=int, help="Kloosterman modulus cutoff")
    verify.add_argument("--mn-cap", dest="mn_cap", type=int)
    verify.add_argument("--rel-tol", dest="rel_tol", type=float, help="relative tolerance of the composite identities")
    verify.add_argument("--workers", type=int)
    verify.add_argument("--c", type=int, help="modulus of the lfe / dgfe twist")
    verify.add_argument("--d", type=int, help="numerator of the lfe twist")
    verify.add_argument("--a", type=int, help="dgfe numerator a")
    verify.add_argument("--b", type=int, help="dgfe numerator b")
    verify.add_argument("--sabotage", action="store_true", default=None,
                        help="use exponent 2s instead of 2s-1 in the reciprocity factor")
    verify.add_argument("--json", help="write reports as a JSON array")

    calc = commands.add_parser("compute", help="evaluate a single quantity")
    calc.add_argument("kind", choices=COMPUTE_KINDS)
    calc.add_argument("--x", type=float)
    calc.add_argument("--xi", type=float, help="contour abscissa for phi-cap (default: chosen per x)")
    calc.add_argument("--s", type=parse_complex, default=complex(1.5))
    calc.add_argument("--u", type=parse_complex)
    calc.add_argument("--a", type=int)
    calc.add_argument("--b", type=int)
    calc.add_argument("--c", type=int)
    calc.add_argument("--ell", type=int)
    calc.add_argument("--t", type=float)
    calc.add_argument("--function")

    tab = commands.add_parser("tabulate", help="export tables")
    tab.add_argument("what", choices=["tau"])
    tab.add_argument("--nmax", type=int, required=True)
    tab.add_argument("--csv", help="CSV path (default: stdout)")
    return parser


def main(argv=None) -> int:
    """Entry point principale."""
    args = build_parser().parse_args(argv)

    # 1. Carica .env
    env_path = Path(os.getenv('RECIP_HOME', '.')).resolve() / '.env'
    load_dotenv(env_path)

    # 2. Carica configurazione
    try:
        config = ConfigLoader.load(args.config) if args.config else ConfigLoader.from_env()
    except (ValueError, FileNotFoundError) as e:
        print(f"❌ ERROR: {e}")
        return EXIT_FAILED

    # 3. Setup logging, path del file risolto rispetto a RECIP_HOME
    logging_config = config['logging']
    file_handler = logging_config.get('handlers', {}).get('file')
    if file_handler:
        log_file = Path(config['recip_home']) / file_handler['filename']
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler['filename'] = str(log_file)
    logging.config.dictConfig(logging_config)

    logger = logging.getLogger(__name__)
    logger.info(f"🏠 RECIP_HOME: {config['recip_home']}")
    logger.info(f"🚀 Starting with config: {config.get('_config_file', 'unknown')}")

    # 4. Flag -> RunConfig
    overrides = {}
    if args.command == "verify":
        overrides = {
            "suites": args.suites, "p": args.p, "q": args.q, "s": args.s,
            "test_function": args.test_function, "c_max": args.c_max, "mn_cap": args.mn_cap,
            "rel_tol": args.rel_tol, "workers": args.workers, "sabotage": args.sabotage, "json": args.json,
            "c": args.c, "d": args.d, "a": args.a, "b": args.b,
        }
    elif args.command == "tabulate":
        overrides = {"csv": args.csv}
    try:
        run_config = parse_config(config, overrides)
    except ConfigError as e:
        logger.error(f"❌ Invalid configuration: {e}")
        return EXIT_FAILED

    try:
        if args.command == "compute":
            result = compute(args.kind, run_config, x=args.x, xi=args.xi, s=args.s, u=args.u, a=args.a, b=args.b,
                             c=args.c, ell=args.ell, t=args.t, function=args.function)
            print(json.dumps(result, indent=2))
            return 0

        orchestrator = RecipOrchestrator(config, run_config)
        if args.command == "tabulate":
            return orchestrator.tabulate_tau(args.nmax)
        return orchestrator.run()

    except RecipError as e:
        logger.error(f"❌ {e.kind}: {e}")
        return EXIT_ENGINE_ERROR
    except Exception as e:
        logger.error(f"❌ Fatal error: {e}", exc_info=True)
        return EXIT_ENGINE_ERROR


if __name__ == "__main__":
    sys.exit(main())
