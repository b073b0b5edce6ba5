from .oracle import OracleResult, optimal_schedule_length
from .verifier import RULES, Violation, ViolationReport, verify_schedule

__all__ = ["OracleResult", "RULES", "Violation", "ViolationReport", "optimal_schedule_length", "verify_schedule"]
