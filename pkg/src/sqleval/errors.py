"""Exception types shared across the package."""

from __future__ import annotations


class SqlEvalError(Exception):
    """Base class for all sqleval errors."""


class ParseError(SqlEvalError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position


class ResolutionError(SqlEvalError):
    """One or more identifiers do not resolve against the schema.

    ``unknown_tables`` / ``unknown_columns`` list the offending names so a
    hallucinated table can be told apart from a hallucinated attribute.
    """

    def __init__(self, unknown_tables=(), unknown_columns=()):
        self.unknown_tables = tuple(unknown_tables)
        self.unknown_columns = tuple(unknown_columns)
        parts = []
        if self.unknown_tables:
            parts.append("unknown tables: " + ", ".join(self.unknown_tables))
        if self.unknown_columns:
            parts.append("unknown columns: " + ", ".join(self.unknown_columns))
        super().__init__("; ".join(parts) or "unresolved identifiers")


class UnsupportedConstruct(SqlEvalError):
    """A node kind has no defined canonical form."""


class SearchBudgetExceeded(SqlEvalError):
    """Column-permutation search space too large to enumerate."""


class FormatError(SqlEvalError):
    """An input file violates its documented layout."""


class MissingDatabase(SqlEvalError):
    def __init__(self, db_id: str):
        super().__init__(f"no database file for db_id {db_id!r}")
        self.db_id = db_id


class PreconditionError(SqlEvalError):
    pass


class AllVotersFailed(SqlEvalError):
    pass


class ConfigError(SqlEvalError):
    pass


class OracleMismatch(SqlEvalError):
    """An oracle-labeled sample id is absent from the evaluation report."""


class BadFilter(SqlEvalError):
    pass


class NotFound(SqlEvalError):
    pass


class ValidationError(SqlEvalError):
    pass
