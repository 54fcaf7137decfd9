"""
Recip Orchestrator - Core Component
Esegue le suite in ordine di dipendenza e instrada i report ai sink.

Exit code:
    0  ogni report passa
    1  almeno una verifica fallita (o configurazione invalida, gestita da main)
    2  almeno una suite interrotta da un errore del motore
"""

import logging
import time
from typing import Any, Dict, List, Optional, Tuple

from config.config_loader import RunConfig
from core.errors import RecipError
from core.reports import Outcome, VerificationReport, create_error_report
from core.suites import SuiteContext, schedule
from infrastructure.table_cache import TableCache

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ENGINE_ERROR = 2


def exit_code_for(reports: List[VerificationReport]) -> int:
    if any(r.outcome is Outcome.ERROR for r in reports):
        return EXIT_ENGINE_ERROR
    if all(r.passed for r in reports):
        return EXIT_OK
    return EXIT_FAILED


def run_suites(run_config: RunConfig, context: Optional[SuiteContext] = None) -> Tuple[int, List[VerificationReport]]:
    """
    Esegue le suite richieste in sequenza (primitive prima delle composte).

    Un errore del motore dentro una suite diventa un report con `error` valorizzato
    e la suite successiva parte comunque.
    """
    context = context or SuiteContext(config=run_config)
    reports: List[VerificationReport] = []
    for entry in schedule(run_config.suites):
        started = time.perf_counter()
        logger.info(f"🚀 Suite '{entry.name}' (rank {entry.rank})")
        try:
            produced = entry.runner(context)
        except RecipError as e:
            logger.error(f"❌ Suite '{entry.name}' aborted: {e.kind}: {e}")
            produced = [create_error_report(entry.name, e, params={"suite": entry.name})]
        except Exception as e:
            logger.error(f"❌ Suite '{entry.name}' crashed: {e}", exc_info=True)
            produced = [create_error_report(entry.name, e, params={"suite": entry.name})]
        failed = [r for r in produced if not r.passed]
        elapsed = time.perf_counter() - started
        if failed:
            logger.warning(f"⚠️ Suite '{entry.name}': {len(failed)}/{len(produced)} reports not passing ({elapsed:.1f} s)")
        else:
            logger.info(f"✅ Suite '{entry.name}': {len(produced)} reports passing ({elapsed:.1f} s)")
        reports.extend(produced)
    return exit_code_for(reports), reports


class RecipOrchestrator:
    """
    Orchestratore di un run di verifica.

    Responsabilità:
    - Dimensionamento della TableCache
    - Creazione dei sink da configurazione (piu' --json / --csv)
    - Esecuzione delle suite e consegna dei report
    """

    def __init__(self, config: Dict[str, Any], run_config: RunConfig):
        self.config = config
        self.run_config = run_config
        TableCache.initialize(run_config.max_table_bytes)
        self.sinks = self._create_sinks()

    def _create_sinks(self) -> list:
        # Import qui per evitare circular import
        from adapters.factory import SinkFactory

        entries = list(self.config.get("output", {}).get("sinks") or [])
        if self.run_config.json_path:
            entries.append({"class": "JsonReportSink", "config": {"path": self.run_config.json_path}})
        if self.run_config.csv_path:
            entries.append({"class": "CsvTauSink", "config": {"path": self.run_config.csv_path}})
        home = self.config.get("recip_home")
        sinks = []
        for entry in entries:
            sink_config = dict(entry.get("config") or {})
            if home:
                sink_config.setdefault("recip_home", home)
            sinks.append(SinkFactory.create_sink(entry["class"], sink_config))
        logger.info(f"📍 {len(sinks)} sinks ready")
        return sinks

    def run(self) -> int:
        logger.info(f"🚀 Running suites: {', '.join(self.run_config.suites)}")
        code, reports = run_suites(self.run_config)
        self.deliver(reports)
        TableCache.get_instance().log_stats()
        passed = sum(1 for r in reports if r.passed)
        logger.info(f"📋 {passed}/{len(reports)} reports passing, exit code {code}")
        return code

    def deliver(self, reports: List[VerificationReport]) -> None:
        from adapters.ports import ReportSink

        for sink in self.sinks:
            if isinstance(sink, ReportSink):
                sink.emit(reports)
            sink.close()

    def tabulate_tau(self, n_max: int) -> int:
        """Scrive la tabella tau nei sink tabellari (stdout se nessuno e' configurato)."""
        from adapters.output.csv_tau_sink import STDOUT, CsvTauSink
        from adapters.ports import TauTableSink
        from core.coeffs import build_hecke_table

        if n_max < 1:
            logger.error(f"❌ --nmax must be positive, got {n_max}")
            return EXIT_FAILED
        table = build_hecke_table(self.run_config.weight, n_max)
        targets = [s for s in self.sinks if isinstance(s, TauTableSink)]
        if not targets:
            targets = [CsvTauSink("stdout", {"path": STDOUT})]
        for sink in targets:
            sink.write_table(table)
            sink.close()
        return EXIT_OK


# ===== COMPUTE =====

COMPUTE_KINDS = ("phi-cap", "mellin", "kloosterman", "phi-h", "phi-plus", "dg")


def compute(kind: str, run_config: RunConfig, **args) -> Dict[str, Any]:
    """
    Valuta una singola quantita' per il comando `compute`.

    Returns:
        Dict serializzabile in JSON con input, valore e provenienza

    Raises:
        ValueError: Se il tipo non e' tra COMPUTE_KINDS
        RecipError: Errori del dominio (es. MellinStrip, NotCoprime)
    """
    from core.analysis import get_test_function, mellin, mellin_quadrature
    from core.coeffs import build_hecke_table
    from core.exp_sums import kloosterman
    from core.lfun import DgParams, dg
    from core.reports import complex_to_json
    from core.transforms import PhiKernel, PhiTransformParams, phi_h, phi_plus

    testfn = get_test_function(args.get("function") or run_config.test_function)
    if kind == "phi-cap":
        params = PhiTransformParams(testfn=testfn, weight=run_config.weight, s=args["s"])
        xi = args.get("xi")
        value, spec = PhiKernel(params).direct(float(args["x"]), None if xi is None else float(xi))
        return {"kind": kind, "x": float(args["x"]), "s": str(params.s),
                "value": complex_to_json(value), "contour": spec.to_dict()}
    if kind == "mellin":
        closed = mellin(testfn, args["u"])
        quadrature = mellin_quadrature(testfn, args["u"])
        return {"kind": kind, "function": testfn.name, "u": str(args["u"]),
                "value": complex_to_json(closed), "mellin_quadrature": complex_to_json(quadrature),
                "gap": abs(closed - quadrature)}
    if kind == "kloosterman":
        a, b, c = int(args["a"]), int(args["b"]), int(args["c"])
        return {"kind": kind, "a": a, "b": b, "c": c, "value": kloosterman(a, b, c)}
    if kind == "phi-h":
        return {"kind": kind, "function": testfn.name, "ell": int(args["ell"]),
                "value": phi_h(testfn, int(args["ell"]))}
    if kind == "phi-plus":
        return {"kind": kind, "function": testfn.name, "t": float(args["t"]),
                "value": phi_plus(testfn, float(args["t"]))}
    if kind == "dg":
        table = build_hecke_table(run_config.weight, run_config.n_max)
        params = DgParams(a=int(args["a"]), b=int(args["b"]), modulus=int(args["c"]), s=args["s"])
        estimate = dg(params, table)
        return {"kind": kind, "a": params.a, "b": params.b, "c": params.modulus, "s": str(params.s),
                "value": complex_to_json(estimate.value), "budget": estimate.budget}
    raise ValueError(f"Unknown compute kind '{kind}'. Available: {', '.join(COMPUTE_KINDS)}")
