"""Exception types shared across the package."""


class DamError(Exception):
    """Base class for all errors raised by this package."""


class MechanismError(DamError):
    """A mechanism file or in-memory mechanism violates the model invariants."""


class UnknownNominalError(DamError):
    """A formula references a name that the mechanism does not define."""


class UnknownAgentError(DamError):
    """An agent id does not exist in the mechanism."""


class NotASellerError(DamError):
    """An operation expected a seller agent."""


class ActionError(DamError):
    """A joint action is structurally malformed (duplicate seller, non-buyer target)."""


class PreconditionError(DamError):
    """A joint action was applied although its precondition does not hold."""


class UnknownRuleError(DamError):
    """No auction rule is registered under the requested name."""


class FormulaSyntaxError(DamError):
    """Concrete-syntax parse failure, with source position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CoalitionOperatorError(DamError):
    """A coalition operator appeared where only the coalition-free fragment is allowed."""


class ArityError(DamError):
    """Mismatched argument counts (profile length, utilities per seller)."""


class InfeasibleProfileError(DamError):
    """A profile's own trajectory violates an action precondition."""


class OracleLimitError(DamError):
    """A brute-force oracle was asked to exceed its instance-size cap."""
