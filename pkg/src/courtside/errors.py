class DataError(Exception):
    """Bad input data: schema, parse or validation failures."""


class SchemaError(DataError):
    pass


class ParseError(DataError):
    pass


class ValidationError(DataError):
    pass


class NumericalError(RuntimeError):
    """Training produced a non-finite value."""
