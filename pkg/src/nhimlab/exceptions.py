"""Error types shared across the package."""


class ContractError(ValueError):
    """An argument violates a documented precondition."""


class OutOfNeighborhoodError(ContractError):
    """A point lies outside the working ball max(|s|, |u|) < rho."""

    def __init__(self, norm: float, rho: float):
        super().__init__(f"point has normal norm {norm:.6g}, outside the ball of radius {rho:.6g}")
        self.norm = norm
        self.rho = rho


class DegenerateVectorError(ContractError):
    """A tangent vector has no unstable component to measure inclinations against."""


class DivergenceError(RuntimeError):
    """An iterative solve failed to reach its tolerance within the allowed steps."""


class EscapeError(RuntimeError):
    """An orbit left the working neighborhood; carries the last state still inside."""

    def __init__(self, message: str, survivor=None):
        super().__init__(message)
        self.survivor = survivor


class ModelInconsistencyError(RuntimeError):
    """The model broke one of its own structural promises during iteration."""


class EmptyMeshError(RuntimeError):
    """Every mesh node has been censored; no statistics remain."""


class ConfigError(ValueError):
    """A run configuration is malformed or inconsistent."""
