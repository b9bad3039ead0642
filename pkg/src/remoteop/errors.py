"""Exception types raised across the package."""


class RemoteOpError(Exception):
    """Base class for all errors raised by remoteop."""


class DomainError(RemoteOpError, ValueError):
    """An argument is outside the domain of the operation."""


class ImpossibleOutcomeError(DomainError):
    """A forced measurement outcome has (numerically) zero probability."""


class LocalityError(RemoteOpError):
    """A party touched a qudit it does not currently hold."""


class UnsupportedError(RemoteOpError, NotImplementedError):
    pass


class ConfigError(RemoteOpError, ValueError):
    pass
