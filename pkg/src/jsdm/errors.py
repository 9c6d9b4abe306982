"""Exception hierarchy.

Everything raised on purpose by the library derives from :class:`JSDMError`,
which the command line maps to exit status 1.
"""


class JSDMError(Exception):
    """Base class for domain errors."""


class InvalidDistribution(JSDMError, ValueError):
    """Input cannot be turned into a probability distribution."""


class DimensionMismatch(JSDMError, ValueError):
    pass


class DomainError(JSDMError, ValueError):
    """Argument outside the domain where a function is defined."""


class AbsoluteContinuityViolation(JSDMError, ValueError):
    """KL divergence requested where q_i = 0 but p_i > 0."""


class Divergent(JSDMError, ArithmeticError):
    """An f-divergence evaluated to +inf under the edge-term conventions."""


class InvalidGenerator(JSDMError, ValueError):
    pass


class EmptyWindow(JSDMError, ValueError):
    pass


class SequenceTooShort(JSDMError, ValueError):
    pass


class InvalidState(JSDMError, ValueError):
    """Matrix is not a valid density matrix or POVM."""


class UnsupportedDimension(JSDMError, ValueError):
    pass
