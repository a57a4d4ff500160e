"""
Check Suite Repository Interface
Defines contract for named verification suites.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional


@dataclass
class CheckResult:
    """One row of a verification table."""
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""


class SuiteInfo:
    """Suite information structure."""

    def __init__(self, name: str, description: str):
        self.name = name
        self.description = description


class CheckSuiteRepositoryInterface(ABC):
    """Interface for verification suite repositories."""

    @abstractmethod
    def get_available_suites(self) -> List[SuiteInfo]:
        """Get list of available suites."""
        pass

    @abstractmethod
    def run_suite(self, suite_name: str) -> List[CheckResult]:
        """
        Run a suite by name.

        Args:
            suite_name: Registered suite name

        Returns:
            One CheckResult per check
        """
        pass

    @abstractmethod
    def is_suite_available(self, suite_name: str) -> bool:
        """Check if a suite is registered."""
        pass

    @abstractmethod
    def get_suite_info(self, suite_name: str) -> Optional[SuiteInfo]:
        """Get information about a specific suite."""
        pass
