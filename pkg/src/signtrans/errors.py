"""Exception types raised across the pipeline."""


class SignTransError(Exception):
    """Base class for all package errors."""


# --- keypoint parsing / featurization ---

class MissingPerson(SignTransError):
    """Keypoint file contains no detected person."""


class MalformedKeypoints(SignTransError):
    """Keypoint arrays have the wrong length, cardinality, or invalid values."""


class EmptyVideo(SignTransError):
    """A video with zero frames cannot be featurized."""


# --- frame sampling ---

class TooFewFrames(SignTransError):
    """Randomized sampling needs at least as many frames as samples."""


# --- autodiff ---

class ShapeMismatch(SignTransError):
    pass


class InvalidProbability(SignTransError):
    pass


class NonScalarLoss(SignTransError):
    pass


class DoubleBackward(SignTransError):
    """backward() was called twice on the same graph without a fresh forward."""


class OutOfVocabulary(SignTransError):
    pass


class OddDimension(SignTransError):
    """Sinusoidal positional encodings need an even model dimension."""


class EmptySequence(SignTransError):
    """Encoder input must contain at least one frame."""


# --- training ---

class EmptyDataset(SignTransError):
    pass


class NumericFailure(SignTransError):
    """Loss became NaN/inf during training."""


class IncompatibleVersion(SignTransError):
    """Checkpoint was written for a different model/config."""


class CorruptFile(SignTransError):
    """Checkpoint failed its checksum or is truncated."""


# --- metrics ---

class LengthMismatch(SignTransError):
    """Hypothesis and reference lists are not aligned."""


class CorpusTooSmall(SignTransError):
    """CIDEr needs at least two samples to define idf."""


# --- corpus ---

class IoFailure(SignTransError):
    pass


class InvalidConfig(SignTransError):
    pass
