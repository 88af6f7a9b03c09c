"""Exception hierarchy shared by all modules."""


class ImgSearchError(Exception):
    pass


class DomainRangeError(ImgSearchError, IndexError):
    """Evaluation outside ``[0, N)``."""


class VerticalPairError(ImgSearchError, ValueError):
    """Slope requested for two points with the same abscissa."""


class InputError(ImgSearchError, ValueError):
    pass


class ConfigurationError(ImgSearchError, ValueError):
    pass


class InsufficientDataError(ImgSearchError, ValueError):
    pass


class BuildFailure(ImgSearchError, RuntimeError):
    """Inverter verification kept failing after the retry budget."""


class CapacityError(ImgSearchError, ValueError):
    """Build domain exceeds the desk-scale guard."""


class SizeGuardError(ImgSearchError, ValueError):
    """Brute-force oracle refused an instance that is too large."""


class ArtifactError(ImgSearchError):
    pass


class ChecksumError(ArtifactError):
    pass
