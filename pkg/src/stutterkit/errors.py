"""Exception hierarchy shared across the toolkit."""


class StutterKitError(Exception):
    """Base class for all data / model errors raised by this package."""


class UnknownLabel(StutterKitError):
    def __init__(self, name):
        super().__init__(f"unknown label name: {name!r}")
        self.name = name


class DuplicateId(StutterKitError):
    def __init__(self, utt_id):
        super().__init__(f"duplicate utterance id: {utt_id!r}")
        self.utt_id = utt_id


class EmptySplit(StutterKitError):
    def __init__(self, split):
        super().__init__(f"split {split!r} has no records")
        self.split = split


class ZeroClassCount(StutterKitError):
    def __init__(self, label):
        super().__init__(f"class {label!r} has zero training samples; weight undefined")
        self.label = label


class MissingFile(StutterKitError):
    pass


class MalformedWav(StutterKitError):
    pass


class ChannelCount(StutterKitError):
    def __init__(self, n_channels):
        super().__init__(f"expected mono audio, got {n_channels} channels")
        self.n_channels = n_channels


class TooShort(StutterKitError):
    pass


class BadMagic(StutterKitError):
    pass


class TruncatedPayload(StutterKitError):
    pass


class EmptySequence(StutterKitError):
    pass


class FrameCountMismatch(StutterKitError):
    def __init__(self, t_a, t_b):
        super().__init__(f"frame counts differ: {t_a} vs {t_b}")
        self.t_a = t_a
        self.t_b = t_b


class ContextTooShort(StutterKitError):
    def __init__(self, t, receptive_field):
        super().__init__(
            f"sequence of {t} frames is shorter than the receptive field ({receptive_field})"
        )
        self.t = t
        self.receptive_field = receptive_field


class NonFiniteGradient(StutterKitError):
    def __init__(self, param_name):
        super().__init__(f"non-finite gradient for parameter {param_name!r}")
        self.param_name = param_name


class ZeroNorm(StutterKitError):
    pass


class NotFitted(StutterKitError):
    pass


class ConfigError(StutterKitError):
    pass
