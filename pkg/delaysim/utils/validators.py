"""
Validation utilities for run-config values
"""
from typing import Any, Iterable, Sequence, Tuple

from config.solver_config import H_MIN


class ConfigValidator:
    """Utility class for validating run-config entries"""

    @staticmethod
    def validate_positive(value: Any) -> Tuple[bool, float]:
        """Validate a strictly positive finite number"""
        if isinstance(value, bool):
            return False, 0.0
        try:
            number = float(value)
        except (TypeError, ValueError):
            return False, 0.0

        if not number > 0 or number == float('inf'):
            return False, 0.0

        return True, number

    @staticmethod
    def validate_choice(value: Any, choices: Sequence[str]) -> Tuple[bool, str]:
        """Validate an enumerated option (exact match only)"""
        if not isinstance(value, str):
            return False, ""

        if value in choices:
            return True, value

        return False, ""

    @staticmethod
    def validate_keys(section: Any, allowed: Iterable[str]) -> Tuple[bool, str]:
        """Validate that a section is an object with known keys; returns the first stranger"""
        if not isinstance(section, dict):
            return False, ""

        allowed = set(allowed)
        for key in section:
            if key not in allowed:
                return False, key

        return True, ""

    @staticmethod
    def validate_seed(value: Any) -> Tuple[bool, int]:
        """Validate a generator seed"""
        if isinstance(value, bool) or not isinstance(value, int):
            return False, 0

        if value < 0:
            return False, 0

        return True, value

    @staticmethod
    def validate_h_ladder(values: Any) -> Tuple[bool, str]:
        """Validate a strictly decreasing list of step sizes"""
        if not isinstance(values, list) or not values:
            return False, "h_values must be a non-empty list"

        ok = all(ConfigValidator.validate_positive(h)[0] for h in values)
        if not ok:
            return False, "h_values must be positive numbers"

        if any(b >= a for a, b in zip(values, values[1:])):
            return False, "h_values must decrease strictly"

        if values[-1] < H_MIN:
            return False, f"smallest h must be at least {H_MIN}"

        return True, ""

    @staticmethod
    def validate_dts(values: Any) -> Tuple[bool, str]:
        """Validate the step sizes of a convergence study"""
        if not isinstance(values, list) or len(values) < 2:
            return False, "dts needs at least two step sizes"

        if not all(ConfigValidator.validate_positive(dt)[0] for dt in values):
            return False, "dts must be positive numbers"

        if len(set(values)) != len(values):
            return False, "dts must be distinct"

        return True, ""
