"""Exception hierarchy shared by every module."""


class WeakCutError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(WeakCutError, ValueError):
    """An argument lies outside the domain of an operation."""


class ParseError(WeakCutError, ValueError):
    """A JSON document does not describe a valid object.

    ``source`` names the file (if any), ``line`` the 1-based line and
    ``element`` the offending element.
    """

    def __init__(self, message, source=None, line=None, element=None):
        self.source = source
        self.line = line
        self.element = element
        where = []
        if source is not None:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ResourceLimitError(WeakCutError):
    """An exhaustive sweep would exceed its configured size bound."""

    def __init__(self, what, bound):
        self.what = what
        self.bound = bound
        super().__init__(f"{what} exceeds the bound of {bound}")


class ConfigurationError(WeakCutError, ValueError):
    """A scenario, configuration or strategy is inconsistent."""


class SimulationError(WeakCutError):
    """Honest process logic raised while the simulator was running it."""

    def __init__(self, node, round_no, cause):
        self.node = node
        self.round = round_no
        self.cause = cause
        super().__init__(f"node {node!r} failed in round {round_no}: {cause!r}")
