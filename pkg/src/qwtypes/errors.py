"""Exception hierarchy shared by every module.

``exit_code`` is what the CLI returns when the error escapes a subcommand.
"""


class QWError(Exception):
    exit_code = 2


class SignatureError(QWError):
    pass


class DuplicateName(SignatureError):
    pass


class EmptySignature(SignatureError):
    pass


class UnknownConstructor(SignatureError):
    pass


class ArityMismatch(SignatureError):
    pass


class BadVariableIndex(SignatureError):
    pass


class NotImagePreserving(SignatureError):
    pass


class ParseError(QWError):
    pass


class NoNullaryConstructor(QWError):
    pass


class UnsupportedRuleSet(QWError):
    pass


class NoConstructorFits(QWError):
    pass


class NotSatisfying(QWError):
    """An algebra breaks one of the equations; ``witness`` says where."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class CapExceeded(QWError):
    exit_code = 3
