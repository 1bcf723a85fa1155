"""Exception types mapped to CLI exit codes (usage=1, data=2, numeric=3)."""


class UsageError(Exception):
    """Bad command line: unknown flag, missing argument, invalid combination."""


class DataError(Exception):
    """Bad input data: malformed file, unknown token, id out of range."""


class NumericError(Exception):
    """Numeric failure: non-finite gradient, failed gradient check."""
