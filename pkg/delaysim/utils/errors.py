"""
Exception types raised by the simulator
"""
from typing import List, Optional


class SimulationError(Exception):
    """Base class for all simulator errors"""


class InputError(SimulationError, ValueError):
    """Argument outside the domain of an operation"""


class ConfigError(InputError):
    """Malformed run configuration, located by file and line"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None,
                 key: Optional[str] = None):
        self.path = path
        self.line = line
        self.key = key
        self.reason = message
        location = ''
        if path and line:
            location = f"{path}:{line}: "
        elif path:
            location = f"{path}: "
        elif line:
            location = f"line {line}: "
        super().__init__(f"{location}{message}")


class ContractViolation(SimulationError):
    """A runtime well-posedness assumption failed"""

    def __init__(self, assumption: str, detail: str):
        self.assumption = assumption
        self.detail = detail
        super().__init__(f"[{assumption}] {detail}")


class StepFailure(SimulationError):
    """Picard iteration inside one step did not converge"""

    def __init__(self, time: float, step: float, iterations: int, residual: float):
        self.time = time
        self.step = step
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"Picard iteration did not converge at t={time:.6g} (h={step:.3g}): "
            f"residual {residual:.3e} after {iterations} iterations"
        )


class ConvergenceError(SimulationError):
    """Waveform relaxation exceeded its sweep budget"""

    def __init__(self, message: str, residuals: List[float]):
        self.residuals = list(residuals)
        super().__init__(message)
