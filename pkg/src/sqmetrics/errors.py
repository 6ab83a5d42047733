"""Exception hierarchy shared by all sqmetrics modules."""


class SqMetricsError(Exception):
    """Base class for data or processing failures."""


class InvalidSpecError(SqMetricsError, ValueError):
    """A parameter or domain-type invariant was violated."""


class WavError(SqMetricsError):
    """Base class for WAV decoding failures."""


class MalformedHeaderError(WavError):
    pass


class UnsupportedCodecError(WavError):
    pass


class TruncatedDataError(WavError):
    pass


class CalibrationError(SqMetricsError):
    pass


class SignalTooShortError(SqMetricsError, ValueError):
    """The input does not span the analysis window or interval required."""


class MissingBandError(SqMetricsError, ValueError):
    pass


class UndefinedSharpnessError(SqMetricsError, ValueError):
    pass


class EmptyInputError(SqMetricsError, ValueError):
    pass


class DuplicateKeyError(SqMetricsError, ValueError):
    pass
