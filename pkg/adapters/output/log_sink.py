import logging
from typing import List

from adapters.ports import ReportSink
from core.reports import Outcome, VerificationReport

logger = logging.getLogger(__name__)


class LogReportSink(ReportSink):
    def __init__(self, name: str, config: dict):
        super().__init__(name, config)
        self.only_failures = bool(config.get('only_failures', False))

    def emit(self, reports: List[VerificationReport]) -> None:
        for r in reports:
            if r.outcome is Outcome.PASS:
                if not self.only_failures:
                    logger.info(f"✅ {r.identity} {r.params}: rel_gap={r.rel_gap:.3e} budget={r.budget:.3e}")
            elif r.outcome is Outcome.FAIL:
                logger.warning(f"⚠️ {r.identity} {r.params}: rel_gap={r.rel_gap:.3e} budget={r.budget:.3e}")
            else:
                logger.error(f"❌ {r.identity}: {r.error}")
