"""Exception hierarchy shared by all modules.

Every error carries a stable ``code`` (the class name) so the CLI can write
typed reject entries without inspecting messages.
"""


class FactualError(Exception):
    """Base class for every typed failure raised by this package."""

    @property
    def code(self) -> str:
        return type(self).__name__


# text grammars

class TextSyntaxError(FactualError, ValueError):
    """Malformed MR or scene-graph text (parentheses, arity, empty field)."""


class UnknownModifier(FactualError, ValueError):
    pass


class AmbiguousSlot(FactualError, ValueError):
    """Middle or quantifier-adjacent fields cannot be assigned a slot."""


class DuplicateFact(TextSyntaxError):
    pass


# conversion

class EmptySlot(FactualError, ValueError):
    pass


# embeddings

class FormatError(FactualError, ValueError):
    pass


class EmptyFile(FormatError):
    pass


class ZeroVector(FactualError, ValueError):
    pass


class DimensionMismatch(FactualError, ValueError):
    pass


class MissingKey(FactualError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class MissingImage(MissingKey):
    pass


# metrics

class EmptyInput(FactualError, ValueError):
    pass


class EmptyReference(FactualError, ValueError):
    pass


class NegativeInput(FactualError, ValueError):
    pass


class LengthMismatch(FactualError, ValueError):
    pass


class ZeroVariance(FactualError, ValueError):
    pass


class DegenerateM(FactualError, ValueError):
    pass


class GoldMissing(FactualError, ValueError):
    pass


class AllDistinct(FactualError, ValueError):
    pass


class NeverCrosses(FactualError, ValueError):
    pass


# dataset I/O

class MissingField(FactualError, ValueError):
    pass


class RecordError(FactualError, ValueError):
    """A JSONL line that is not a valid record object."""
