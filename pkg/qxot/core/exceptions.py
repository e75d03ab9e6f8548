"""Error hierarchy.

Every error carries the process exit code the CLI reports for it:
2 for usage errors, 3 for exceeded resource caps, 4 for invariant violations.
"""


class QxotError(Exception):
    exit_code: int = 1

    def __init__(self, detail: str, exit_code: int | None = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class UsageError(QxotError):
    exit_code = 2


class ResourceCapError(QxotError):
    exit_code = 3


class InvariantViolation(QxotError):
    exit_code = 4


# State engine
class GateError(UsageError):
    pass


class MeasurementError(UsageError):
    pass


class DimensionMismatchError(UsageError):
    pass


class InvalidPovmError(UsageError):
    pass


class StateInvariantError(InvariantViolation):
    pass


# Protocols
class InconsistentKeysError(UsageError):
    pass


class OutsideSubspaceError(InvariantViolation):
    pass


class ShadowMismatchError(InvariantViolation):
    pass


# Homomorphic encryption
class HeKeygenError(QxotError):
    pass


class HeDecryptionError(UsageError):
    pass


class ModulusMismatchError(UsageError):
    pass


# Circuits
class CircuitFormatError(UsageError):
    pass


class NonCliffordGateError(UsageError):
    pass
