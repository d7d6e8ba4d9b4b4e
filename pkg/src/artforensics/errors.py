"""Exception types shared across the package."""


class ArtForensicsError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(ArtForensicsError, ValueError):
    pass


class ShapeError(ArtForensicsError, ValueError):
    pass


class DecodeError(ArtForensicsError):
    def __init__(self, message, path=None):
        self.path = path
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class EmptyDataset(ArtForensicsError):
    pass


class StratificationError(ArtForensicsError, ValueError):
    def __init__(self, message, class_name=None):
        self.class_name = class_name
        super().__init__(message)


class DegenerateLabels(ArtForensicsError, ValueError):
    pass


class LabelError(ArtForensicsError, ValueError):
    pass


class UnsupportedModelFile(ArtForensicsError):
    pass
