"""Exception hierarchy shared across the toolkit."""


class ExemplarLeakError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ExemplarLeakError):
    """Invalid configuration (bad values, unknown keys, unknown preset)."""


class UnknownPreset(ConfigError):
    pass


class DataError(ExemplarLeakError):
    """Problems with dataset files or contents."""


class MissingFile(DataError):
    pass


class MalformedManifest(DataError):
    pass


class PayloadSizeMismatch(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class AssignmentError(ExemplarLeakError):
    """Pseudocategory construction failures."""


class UnbalancedInput(AssignmentError):
    pass


class CompositionMismatch(AssignmentError):
    pass


class UnmappedExemplar(AssignmentError):
    pass


class SplitError(ExemplarLeakError):
    pass


class InvalidK(SplitError):
    pass


class TooFewExemplars(SplitError):
    pass


class IndexOutOfRange(SplitError):
    pass


class ModelError(ExemplarLeakError):
    pass


class SingleClassInput(ModelError):
    pass


class ShapeMismatch(ModelError):
    pass


class NonFiniteLoss(ModelError):
    pass


class StatsError(ExemplarLeakError):
    pass


class LengthMismatch(StatsError):
    pass


class EmptyInput(StatsError):
    pass


class DegenerateSample(StatsError):
    pass
