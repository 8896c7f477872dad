"""
Exceptions raised by the floquet-recoil library and mapped onto CLI exit codes.
"""


class FloquetRecoilError(Exception):
    """
    Base class for every error raised by this package.
    """


class DomainError(FloquetRecoilError, ValueError):
    """
    A value violates the precondition of an operation.
    """


class RelativisticInputError(DomainError):
    """
    A velocity reaches or exceeds the speed of light.
    """


class UnsupportedOrderError(DomainError):
    """
    A Bessel order or radiation harmonic outside the supported range.
    """


class IntegrationError(FloquetRecoilError, ArithmeticError):
    """
    Non-finite values met while integrating.
    """


class DivergenceError(IntegrationError):
    def __init__(self, message: str, step_index: int):
        super().__init__(f"{message} (step {step_index})")
        self.step_index = step_index


class NumericError(FloquetRecoilError, ArithmeticError):
    pass


class ConfigError(FloquetRecoilError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class RegimeError(FloquetRecoilError):
    """
    An operation requiring a regime-valid state got an invalid one.
    """

    def __init__(self, report):
        failed = ", ".join(name for name, ok in report.flags.items() if not ok)
        super().__init__(f"regime verdict {report.verdict.value}: failed checks {failed}")
        self.report = report
