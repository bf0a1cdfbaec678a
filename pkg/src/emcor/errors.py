class UndefinedCorrelationError(ValueError):
    """A correlation was requested for a degenerate (constant) margin."""
