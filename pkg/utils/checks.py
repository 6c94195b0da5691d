from typing import Any, Dict, List
import logging

from models import CheckResult
from utils.errors import VerificationFailure

logger = logging.getLogger(__name__)


class CheckRecorder:
    """Collects named pass/fail verification checks for one run"""

    def __init__(self):
        self.results: List[CheckResult] = []

    def record(self, name: str, passed: bool, detail: str = "") -> CheckResult:
        """
        Store one check outcome

        Args:
            name: Check identifier (stable across runs)
            passed: Whether the check holds
            detail: Human-readable measured values

        Returns:
            The stored CheckResult
        """
        result = CheckResult(name=name, passed=bool(passed), detail=detail)
        self.results.append(result)
        if not result.passed:
            logger.warning(f"Check failed: {name} ({detail})")
        return result

    def extend(self, results: List[CheckResult]) -> None:
        for result in results:
            self.record(result.name, result.passed, result.detail)

    def check_below(self, name: str, value: float, limit: float, what: str = "value") -> CheckResult:
        """Pass when value < limit"""
        return self.record(name, value < limit, f"{what} = {value:.3e} (limit {limit:g})")

    @property
    def failed(self) -> List[str]:
        return [r.name for r in self.results if not r.passed]

    def get_summary(self) -> Dict[str, Any]:
        """
        Get a summary of all recorded checks

        Returns:
            Dictionary with totals and overall status
        """
        failed = self.failed
        return {
            "total": len(self.results),
            "passed": len(self.results) - len(failed),
            "failed": len(failed),
            "status": "pass" if not failed else "fail",
        }

    def raise_on_failure(self) -> None:
        """
        Raises:
            VerificationFailure: If any recorded check failed
        """
        if self.failed:
            raise VerificationFailure(self.failed)
