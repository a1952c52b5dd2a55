class PLDNNError(Exception):
    """Base class for errors raised by this package."""


class InvalidArgument(PLDNNError, ValueError):
    pass


class NotFound(PLDNNError, LookupError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "not found"


class DocumentError(PLDNNError, ValueError):
    """A stored network or event log could not be read."""


class VersionError(DocumentError):
    pass


class DanglingTarget(DocumentError):
    pass
