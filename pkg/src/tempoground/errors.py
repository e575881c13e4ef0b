class DomainError(ValueError):
    """Raised when an operation is called outside its valid input domain."""


class PoolExhaustedError(DomainError):
    """No query in the pool satisfies the negative-sampling constraints."""


class DataError(RuntimeError):
    """Input data is unusable (unreadable sources, too many skips, bad manifests)."""
