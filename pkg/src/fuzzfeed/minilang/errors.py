"""Diagnostics raised by the MiniLang front end."""
from __future__ import annotations


class MiniLangError(Exception):
    """Base class for all MiniLang front-end diagnostics."""

    def __init__(self, message, line=0, col=0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self):
        if self.line:
            return f"{self.line}:{self.col}: {self.message}"
        return self.message


class MiniSyntaxError(MiniLangError):
    """Lexical or grammatical error, with a source position."""


class MissingFoo(MiniLangError):
    """The program does not define 'foo'."""


class DuplicateFunction(MiniLangError):
    """The same function name is defined more than once."""


class BadSignature(MiniLangError):
    """A function has the wrong name, parameters, or return type."""


class MiniTypeError(MiniLangError):
    """Static type violation inside a function body."""

    def __init__(self, message, line=0, col=0, expected=None, found=None):
        super().__init__(message, line, col)
        self.expected = expected
        self.found = found


class MissingReturn(MiniLangError):
    """Some path through a function body reaches the end without return/throw."""


class MissingPrecondition(MiniLangError):
    """The program has no 'precondition' function."""
