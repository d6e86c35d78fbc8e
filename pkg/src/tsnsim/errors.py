class ContractError(ValueError):
    """A caller violated an operation's precondition."""


class TopologyError(ValueError):
    """Scenario wiring is invalid. ``element`` names the offending part."""

    def __init__(self, message: str, element=None):
        super().__init__(message)
        self.element = element


class NotYetSynchronized(RuntimeError):
    pass


class NoSamples(ValueError):
    pass


class NotConverged(ValueError):
    pass
