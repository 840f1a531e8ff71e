"""
Custom exceptions for the application
"""


class CollapseSimError(Exception):
    """Base exception for collapse simulation errors"""
    pass


class DomainError(CollapseSimError):
    """Argument outside its mathematical domain"""
    pass


class PreconditionError(CollapseSimError):
    """Operation precondition violated"""
    pass


class NodeError(CollapseSimError):
    """Wavefunction evaluated at (or too close to) a node"""
    pass


class PartitionError(CollapseSimError):
    """Peaks overlap too much to be weighted separately"""
    pass


class BoundaryConsistencyError(CollapseSimError):
    """Goursat boundary data admits no zeroth-order solution"""

    def __init__(self, message: str, max_discrepancy: float):
        super().__init__(message)
        self.max_discrepancy = max_discrepancy


class OrderingError(CollapseSimError):
    """Collapse events are not spacelike separated"""
    pass


class RegimeError(CollapseSimError):
    """Parameters outside the regime where the series can be trusted"""
    pass


class ValidationError(CollapseSimError):
    """Data validation errors"""
    pass


class ConfigurationError(CollapseSimError):
    """Configuration errors"""
    pass


class SimulationError(CollapseSimError):
    """Event engine reached an inconsistent state"""
    pass
