"""Verification suites."""

from .verification_suite_repository import VerificationSuiteRepository

__all__ = ["VerificationSuiteRepository"]
