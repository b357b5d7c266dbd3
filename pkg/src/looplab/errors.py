"""Exception hierarchy shared by all looplab modules."""


class LooplabError(Exception):
    """Base class for all looplab errors."""


class InvalidInput(LooplabError):
    """Malformed or inconsistent input (dimension mismatch, bad parameters)."""


class InvalidLevel(InvalidInput):
    """Level parameter outside the admissible range l > -1."""


class ConvergenceFailure(LooplabError):
    """An iterative or truncated computation failed to meet its tolerance."""


class NotInTopStratum(LooplabError):
    """The input lies outside the open dense stratum where factorization exists."""


class NonReducedSequence(LooplabError):
    """A reflection sequence failed the reducedness check."""


class ExperimentDegenerate(LooplabError):
    """Too many per-sample failures for an experiment to report a statistic."""


class DomainError(LooplabError):
    """Evaluation at a pole or outside the domain of a closed-form expression."""
