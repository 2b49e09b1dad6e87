"""Typed errors raised by the evaluation toolkit.

Every data or usage problem surfaces as a subclass of :class:`ZrsEvalError`
so callers (and the CLI) can catch one base type and report a clean
diagnostic instead of a traceback.
"""


class ZrsEvalError(Exception):
    """Base class for all toolkit errors."""


# -- file formats -----------------------------------------------------------

class FormatError(ZrsEvalError):
    """Malformed on-disk artifact."""


class EmptyFile(FormatError):
    pass


class RaggedRows(FormatError):
    pass


class NonNumericToken(FormatError):
    pass


class MissingColumn(FormatError):
    pass


class BadRow(FormatError):
    pass


class DuplicateItemId(FormatError):
    pass


class DuplicateSentenceId(FormatError):
    pass


class EmptyGoldText(FormatError):
    pass


class NonPositiveDuration(FormatError):
    pass


class BadRating(FormatError):
    pass


class BadTask(FormatError):
    pass


class BadReferenceType(FormatError):
    pass


# -- distance kernels -------------------------------------------------------

class DistanceError(ZrsEvalError):
    pass


class ZeroVector(DistanceError):
    pass


class DimMismatch(DistanceError):
    pass


class NotAProbabilityVector(DistanceError):
    pass


class EmptySequence(DistanceError):
    pass


class BothEmpty(DistanceError):
    pass


# -- bitrate ----------------------------------------------------------------

class EmptyInput(ZrsEvalError):
    pass


# -- abx --------------------------------------------------------------------

class MissingEmbedding(ZrsEvalError):
    pass


class NoCells(ZrsEvalError):
    pass


# -- human-judgment statistics ----------------------------------------------

class EmptyReference(ZrsEvalError):
    pass


class UnknownSentence(ZrsEvalError):
    pass


class EmptyValues(ZrsEvalError):
    pass


class ConstantInput(ZrsEvalError):
    pass


class LengthMismatch(ZrsEvalError):
    pass


class TooFewPoints(ZrsEvalError):
    pass


# -- synthetic corpora ------------------------------------------------------

class InfeasibleConfig(ZrsEvalError):
    pass
