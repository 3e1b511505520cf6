"""Exception hierarchy shared by the library and the CLI.

Every error carries a short ``category`` string; the CLI prints it on stderr so
batch scripts can branch on the failure kind without parsing messages.
"""


class FmcwHarError(Exception):
    category = "error"


class ConfigError(FmcwHarError, ValueError):
    category = "config"


class ShapeError(FmcwHarError, ValueError):
    category = "shape"


class SimulationError(FmcwHarError, ValueError):
    category = "simulation"


class SingularCovarianceError(FmcwHarError, ArithmeticError):
    category = "singular"

    def __init__(self, message, range_bin=None):
        super().__init__(message)
        self.range_bin = range_bin


class SegmentationError(FmcwHarError, ValueError):
    category = "segmentation"


class NotFittedError(FmcwHarError, RuntimeError):
    category = "not-fitted"


class TrainingError(FmcwHarError, RuntimeError):
    category = "training"


class SplitError(FmcwHarError, ValueError):
    category = "split"


class FormatError(FmcwHarError, ValueError):
    category = "format"


class VersionError(FormatError):
    category = "version"


class TruncatedFileError(FormatError):
    category = "truncated"

    def __init__(self, message, frame_index=None):
        super().__init__(message)
        self.frame_index = frame_index


class ChecksumError(FormatError):
    category = "checksum"
