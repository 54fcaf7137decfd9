"""
Configuration Loader - Carica e valida configurazioni YAML
"""

import os
import yaml
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple
from pathlib import Path

from core.arith import is_prime
from core.errors import ConfigError
from core.reports import parse_complex

logger = logging.getLogger(__name__)

REQUIRED_SECTIONS = ("engine", "coeffs", "transforms", "exp_sums", "suites", "output", "logging")
COMPOSITE_SUITES = ("sieve", "ng-s", "reciprocity")
SIGMA_MIN = 1.25


def get_recip_home() -> Path:
    """
    Ottiene la directory del progetto dalla variabile d'ambiente RECIP_HOME.

    Returns:
        Path assoluto alla directory del progetto

    Raises:
        ValueError: Se RECIP_HOME non è impostato o non esiste
    """
    if 'RECIP_HOME' not in os.environ:
        raise ValueError(
            "RECIP_HOME environment variable not set. "
            "Set it in .env or export it before running."
        )

    recip_home = Path(os.environ['RECIP_HOME']).resolve()

    if not recip_home.exists():
        raise ValueError(f"RECIP_HOME path does not exist: {recip_home}")

    return recip_home


def resolve_path(path: str, relative_to: Optional[Path] = None) -> Path:
    """
    Risolve un path in assoluto.

    Se il path è relativo, lo risolve rispetto a RECIP_HOME o alla directory specificata.
    """
    p = Path(path)

    if p.is_absolute():
        return p.resolve()

    base_dir = relative_to if relative_to else get_recip_home()
    return (base_dir / p).resolve()


class ConfigLoader:
    """
    Loader per configurazioni YAML con validazione.
    """

    @classmethod
    def from_env(cls) -> Dict[str, Any]:
        """
        Carica configurazione dalle variabili d'ambiente RECIP_HOME e RECIP_CONFIG.

        Raises:
            ValueError: Se variabili d'ambiente mancanti o configurazione invalida
            FileNotFoundError: Se il file di configurazione non esiste
        """
        get_recip_home()

        config_path = os.getenv('RECIP_CONFIG')
        if not config_path:
            raise ValueError(
                "RECIP_CONFIG environment variable not set. "
                "Set it in .env or export it before running."
            )

        return cls.load(config_path)

    @classmethod
    def load(cls, config_path: str, validate_sinks: bool = True) -> Dict[str, Any]:
        """
        Carica configurazione da file YAML.

        Args:
            config_path: Path al file YAML (relativo a RECIP_HOME o assoluto)
            validate_sinks: Se True, valida che i sink configurati esistano

        Returns:
            Dict con configurazione completa (con 'recip_home' aggiunto)

        Raises:
            FileNotFoundError: Se il file non esiste
            ValueError: YAML malformato, sezione mancante o sink sconosciuto
        """
        if not config_path:
            raise ValueError("No config path given: pass --config or set RECIP_CONFIG")

        recip_home = get_recip_home()
        config_file = resolve_path(config_path, recip_home)
        if not config_file.is_file():
            logger.error(f"❌ Config {config_path} not found under RECIP_HOME={recip_home}")
            raise FileNotFoundError(f"Configuration file not found: {config_file}")

        try:
            config = yaml.safe_load(config_file.read_text())
        except yaml.YAMLError as e:
            logger.error(f"❌ Cannot parse {config_file}: {e}")
            raise ValueError(f"YAML parsing error in {config_file}: {e}") from e
        if not isinstance(config, dict):
            raise ValueError(f"{config_file} must contain a mapping of sections, got {type(config).__name__}")

        cls._validate_config_structure(config)
        if validate_sinks:
            cls._validate_sinks(config)

        config['recip_home'] = str(recip_home)
        config['_config_file'] = str(config_file)
        logger.info(f"✅ Configuration loaded from: {config_file}")
        cls._log_config_summary(config)
        return config

    @classmethod
    def _validate_config_structure(cls, config: Dict[str, Any]) -> None:
        """
        Raises:
            ValueError: Se manca una sezione obbligatoria
        """
        missing = [section for section in REQUIRED_SECTIONS if section not in config]
        if missing:
            raise ValueError(f"Missing required section(s) {missing} in configuration")
        for section in REQUIRED_SECTIONS:
            if not isinstance(config[section], dict):
                raise ValueError(f"Section '{section}' must be a mapping")

        if 'sinks' not in config['output']:
            raise ValueError("Missing 'sinks' in output configuration")
        if not isinstance(config['suites'].get('run', []), list):
            raise ValueError("suites.run must be a list of suite names")

    @classmethod
    def _validate_sinks(cls, config: Dict[str, Any]) -> None:
        """
        Raises:
            ValueError: Se un sink configurato non esiste
        """
        # Import qui per evitare circular import
        from adapters.factory import SinkFactory

        available = SinkFactory.get_available_classes()
        for sink_config in config['output']['sinks'] or []:
            if 'class' not in sink_config:
                raise ValueError(f"Sink config missing required 'class' field: {sink_config}")
            if sink_config['class'] not in available:
                raise ValueError(
                    f"Unknown sink class '{sink_config['class']}'. "
                    f"Available: {', '.join(available)}"
                )

    @classmethod
    def _log_config_summary(cls, config: Dict[str, Any]) -> None:
        logger.info("📋 Configuration Summary:")
        logger.info(f"  Suites: {', '.join(config['suites'].get('run', []))}")
        logger.info(f"  c_max / mn_cap: {config['engine'].get('c_max')} / {config['engine'].get('mn_cap')}")
        logger.info(f"  Sinks: {len(config['output']['sinks'] or [])}")


# ===== RUN CONFIG =====

@dataclass(frozen=True, kw_only=True)
class RunConfig:
    """
    Parametri validati di un run (YAML + flag da riga di comando).

    suite_options: parametri per suite (sezione `suites.options` del YAML)
    """
    suites: Tuple[str, ...]
    primes: Tuple[Tuple[int, int], ...]
    s_values: Tuple[complex, ...]
    test_function: str = "gauss13"
    weight: int = 12
    n_max: int = 100_000
    exact_bits: int = 127
    max_table_bytes: int = 256 * 1024 * 1024
    c_max: int = 300
    mn_cap: int = 100_000
    window_mass_tol: float = 1e-9
    phi_grid: Dict[str, float] = field(default_factory=dict)
    rel_tol: float = 1e-3
    workers: int = 1
    sabotage: bool = False
    json_path: Optional[str] = None
    csv_path: Optional[str] = None
    suite_options: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def options(self, suite: str) -> Dict[str, Any]:
        return dict(self.suite_options.get(suite) or {})


def _effective_workers(requested: int) -> int:
    cap = os.getenv("RECIP_THREADS")
    if cap:
        try:
            return max(1, min(requested, int(cap)))
        except ValueError:
            raise ConfigError("RECIP_THREADS", f"not an integer: {cap!r}", cap) from None
    return max(1, requested)


def _parse_pair(raw: Any) -> Tuple[int, int]:
    try:
        p, q = (int(v) for v in raw)
    except (TypeError, ValueError):
        raise ConfigError("primes", f"expected a [p, q] pair, got {raw!r}", raw) from None
    return p, q


def _positive_int(section: Mapping[str, Any], key: str, default: int, name: str) -> int:
    value = section.get(key, default)
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected an integer, got {value!r}", value) from None
    if value < 1:
        raise ConfigError(name, f"must be positive, got {value}", value)
    return value


def _with_twist_flags(options: Dict[str, Dict[str, Any]], flags: Mapping[str, Any],
                      raw_s: Optional[Any]) -> Dict[str, Dict[str, Any]]:
    """
    --c --d (lfe) e --c --a --b (dgfe) sostituiscono i casi YAML delle due suite.
    Con --s i punti spettrali dati diventano i punti della striscia.
    """
    given = {k for k in ("c", "d", "a", "b") if k in flags}
    if not given:
        return options
    if "c" not in flags:
        raise ConfigError("c", f"--{'/--'.join(sorted(given))} require the modulus --c")
    if ("a" in flags) != ("b" in flags):
        raise ConfigError("a", "--a and --b must be given together")
    c = int(flags["c"])
    if c < 1:
        raise ConfigError("c", f"modulus must be positive, got {c}", c)
    points = [str(v) for v in raw_s] if raw_s is not None else None

    lfe = dict(options.get("lfe") or {})
    lfe["moduli"] = [c]
    if "d" in flags:
        lfe["numerators"] = [int(flags["d"])]
    if points:
        lfe["strip_points"] = points
    options["lfe"] = lfe

    if "a" in flags:
        dgfe = dict(options.get("dgfe") or {})
        dgfe["cases"] = [[int(flags["a"]), int(flags["b"]), c]]
        if points:
            dgfe["s_values"] = points
        options["dgfe"] = dgfe
    return options


def parse_config(config: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """
    Unisce i default YAML con i flag e valida.

    Args:
        config: Dict caricato da ConfigLoader
        overrides: Flag da riga di comando (chiavi None ignorate):
            suites, p, q, s, test_function, c_max, mn_cap, rel_tol, workers, sabotage, json, csv,
            c, d, a, b (moduli di lfe e dgfe)

    Raises:
        ConfigError: Con il campo colpevole (primi uguali o non primi, sigma <= 5/4, numeri non validi)
    """
    flags = {k: v for k, v in (overrides or {}).items() if v is not None}
    engine = config.get("engine", {}) or {}
    coeffs = config.get("coeffs", {}) or {}
    transforms = config.get("transforms", {}) or {}
    exp_sums = config.get("exp_sums", {}) or {}
    suites = config.get("suites", {}) or {}

    run = flags.get("suites") or suites.get("run") or []
    if isinstance(run, str):
        run = [run]
    # Import qui per evitare circular import
    from core.suites import SUITES
    for name in run:
        if name != "all" and name not in SUITES:
            raise ConfigError("suites", f"unknown suite '{name}'. Available: {', '.join(SUITES)}", name)

    if "p" in flags or "q" in flags:
        if "p" not in flags or "q" not in flags:
            raise ConfigError("primes", "--p and --q must be given together")
        primes = [(int(flags["p"]), int(flags["q"]))]
    else:
        primes = [_parse_pair(pair) for pair in suites.get("primes", [[2, 3]])]
    for p, q in primes:
        if p == q:
            raise ConfigError("primes", f"EqualPrimes: p and q must be distinct, got p=q={p}", (p, q))
        for value in (p, q):
            if not is_prime(value):
                raise ConfigError("primes", f"{value} is not prime", (p, q))

    raw_s = flags["s"] if "s" in flags else suites.get("s_values", ["1.5"])
    if isinstance(raw_s, (str, int, float, complex)):
        raw_s = [raw_s]
    try:
        s_values = tuple(parse_complex(v) for v in raw_s)
    except ValueError as e:
        raise ConfigError("s", str(e), raw_s) from None
    if any(name in COMPOSITE_SUITES or name == "all" for name in run):
        for s in s_values:
            if s.real <= SIGMA_MIN:
                raise ConfigError("s", f"Re(s)={s.real:g} must exceed {SIGMA_MIN} for the Kloosterman suites", str(s))

    n_max = _positive_int(coeffs, "n_max", 100_000, "coeffs.n_max")
    mn_cap = int(flags.get("mn_cap", _positive_int(engine, "mn_cap", 100_000, "engine.mn_cap")))
    if mn_cap > n_max:
        raise ConfigError("engine.mn_cap", f"mn_cap={mn_cap} exceeds coeffs.n_max={n_max}", mn_cap)
    c_max = int(flags.get("c_max", _positive_int(engine, "c_max", 300, "engine.c_max")))
    if c_max < 1:
        raise ConfigError("engine.c_max", f"must be positive, got {c_max}", c_max)

    rel_tol = flags.get("rel_tol", engine.get("rel_tol", 1e-3))
    try:
        rel_tol = float(rel_tol)
    except (TypeError, ValueError):
        raise ConfigError("engine.rel_tol", f"expected a number, got {rel_tol!r}", rel_tol) from None
    if not rel_tol > 0:
        raise ConfigError("engine.rel_tol", f"must be positive, got {rel_tol}", rel_tol)

    workers = _effective_workers(int(flags.get("workers", _positive_int(engine, "workers", 1, "engine.workers"))))

    return RunConfig(
        suites=tuple(run),
        primes=tuple(primes),
        s_values=s_values,
        test_function=str(flags.get("test_function", transforms.get("test_function", "gauss13"))),
        weight=int(coeffs.get("weight", 12)),
        n_max=n_max,
        exact_bits=int(coeffs.get("exact_bits", 127)),
        max_table_bytes=_positive_int(exp_sums, "max_table_bytes", 256 * 1024 * 1024, "exp_sums.max_table_bytes"),
        c_max=c_max,
        mn_cap=mn_cap,
        window_mass_tol=float(transforms.get("window_mass_tol", 1e-9)),
        phi_grid=dict(transforms.get("phi_grid") or {}),
        rel_tol=rel_tol,
        workers=workers,
        sabotage=bool(flags.get("sabotage", False)),
        json_path=flags.get("json"),
        csv_path=flags.get("csv"),
        suite_options=_with_twist_flags(dict(suites.get("options") or {}), flags, raw_s if "s" in flags else None),
    )
