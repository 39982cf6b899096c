"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: validation problems exit 2,
file and format problems exit 3, and internal invariant breaches exit 4.
"""


class QslocError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QslocError):
    """Bad arguments, inconsistent dimensions, or out-of-range parameters."""


class CapacityError(ValidationError):
    """Requested statevector exceeds the configured qubit cap."""


class NoSignalError(ValidationError):
    """An RSS vector contains no usable reading after flooring."""


class DatasetFormatError(QslocError):
    """A dataset file could not be parsed; the message names the location."""


class IndexNeverObservedError(QslocError):
    """A fingerprint index was never observed across the recorded shots."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"fingerprint index {index} was never observed in the shot counts")


class InternalInvariantError(QslocError):
    """A self-check that should never fail did; indicates a bug."""
