import asyncio
from concurrent.futures import ThreadPoolExecutor


class ConfigError(ValueError):
    """
    Error when a scenario document is missing a key or holds an invalid value.
    """

    def __init__(self, key: str, message: str = None):
        self.key = key
        self.message = message or "invalid value"
        super().__init__(f"{key}: {self.message}")

    def __str__(self):
        return f"Config error at '{self.key}': {self.message}"


class NumericalError(ArithmeticError):
    """
    Base of every failure raised while evaluating the analytical model.
    """

    ERROR_CODES = {
        "quadrature": "Adaptive quadrature did not reach the requested tolerance",
        "fixed_point": "Offloadability fixed point did not converge",
        "unstable": "Cloud server queue utilization reached or exceeded 1",
        "unserviceable": "A link carrying traffic has zero coverage probability",
    }

    SOLUTIONS = {
        "quadrature": "Loosen quadrature.rel_tol or raise quadrature.max_subdivisions",
        "fixed_point": "Check the task load; very small buffers with huge arrival rates converge slowly",
        "unstable": "Lower ground.lambda_u_per_km2 or raise compute.f_cs_ghz",
        "unserviceable": "Lower link.tau_db or raise the transmit power of the failing link",
    }

    code = "numerical"

    def __init__(self, message: str = None):
        self.reason = self.ERROR_CODES.get(self.code, "Unknown numerical failure")
        self.solution = self.SOLUTIONS.get(self.code, "")
        self.message = message or self.reason
        super().__init__(self.message)

    def __str__(self):
        return f"{self.code}: {self.message}"

    def describe(self) -> str:
        return f"{self.code}: {self.message}\nReason: {self.reason}\nYou can try to do:\n{self.solution}"


class QuadratureError(NumericalError):
    code = "quadrature"

    def __init__(self, estimate: float, error: float, message: str = None):
        self.estimate = estimate
        self.error = error
        super().__init__(
            message or f"best estimate {estimate!r} with error bound {error!r}"
        )


class FixedPointError(NumericalError):
    code = "fixed_point"

    def __init__(self, trace: list, message: str = None):
        self.trace = list(trace)
        tail = ", ".join(f"{x:.6g}" for x in self.trace[-5:])
        super().__init__(
            message or f"no convergence after {len(self.trace)} iterations, last iterates [{tail}]"
        )


class StabilityError(NumericalError):
    code = "unstable"

    def __init__(self, utilization: float):
        self.utilization = utilization
        super().__init__(f"utilization {utilization:.6g} >= 1")


class UnserviceableLinkError(NumericalError):
    code = "unserviceable"

    def __init__(self, link: str, tau: float):
        self.link = link
        self.tau = tau
        super().__init__(f"link {link} unserviceable at tau={tau:.6g}")


class SimulationError(RuntimeError):
    """
    Error when a Monte Carlo trial cannot be completed.
    """

    def __init__(self, redraws: int, message: str = None):
        self.redraws = redraws
        super().__init__(
            message
            or f"no visible satellite and no cloud server after {redraws} redraws"
        )


class ValidationFailed(Exception):
    """
    Error when at least one acceptance check fails.
    """

    def __init__(self, failed: list):
        self.failed = list(failed)
        super().__init__(f"{len(self.failed)} check(s) failed: {', '.join(self.failed)}")


EXIT_CODES = {
    ConfigError: 1,
    NumericalError: 2,
    SimulationError: 2,
    ValidationFailed: 3,
}


def exit_code_for(exc: BaseException) -> int:
    for cls, code in EXIT_CODES.items():
        if isinstance(exc, cls):
            return code
    return 2


def status_for(exc: BaseException) -> str:
    """Render an in-row status string for a failed sweep point."""
    if isinstance(exc, NumericalError):
        return str(exc)
    return f"error: {type(exc).__name__}: {exc}"


def run_async(coro):
    """This function is used to run async function in sync way. As `asyncio.run` not work in jupyter notebook.

    Args:
        coro (_type_): The function to run.

    Returns:
        _type_: The result of the function.
    """
    try:
        loop = asyncio.get_running_loop()
    except RuntimeError:
        loop = None

    if loop is not None and loop.is_running():
        # Jupyter Notebook or any other running loop
        with ThreadPoolExecutor() as executor:
            future = executor.submit(asyncio.run, coro)
            return future.result()
    return asyncio.run(coro)
