"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class SpecError(ValueError):
    """A configuration object violates one of its invariants."""


class DegenerateInputError(ValueError):
    """Input is valid but degenerate for the requested operation (e.g. all zeros)."""


class FormatError(ValueError):
    """A file could not be parsed as the expected format."""
