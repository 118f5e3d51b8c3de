"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition."""


class MissingCertificateError(InvalidInputError):
    """An operation needs rank-1 generators the cone does not carry."""


class OracleUnavailableError(InvalidInputError):
    """No extreme-ray rule is known for this cone kind."""


class NumericalError(RuntimeError):
    """An iteration failed to converge or a numeric check broke down."""
