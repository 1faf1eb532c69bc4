"""Exception hierarchy shared by the solvers, the game loop, and the CLI."""


class MrcapError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(MrcapError):
    """An input value violates a documented precondition."""


class DeadlineInfeasibleError(InvalidParameterError):
    """A job class cannot finish on time: its constant term already
    exceeds the deadline (C >= D), so no slot assignment helps."""


class InfeasibleError(MrcapError):
    """The cluster cannot cover the aggregate minimum demand
    (sum of per-class minimum VM requirements exceeds capacity)."""


class InvalidBidError(MrcapError):
    """A bid falls outside [unit cost, per-class bid ceiling]."""


class ProtocolViolationError(MrcapError):
    """A message violates the allocation protocol, e.g. the resource
    manager handed a class fewer VMs than its guaranteed minimum."""
