class ForestError(Exception):
    pass


class InvalidInputError(ForestError, ValueError):
    pass


class SpecError(InvalidInputError):
    pass


class GenerationError(InvalidInputError):
    pass


class InstanceParseError(InvalidInputError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class SizeError(ForestError):
    pass


class InvariantError(ForestError):
    pass


class CongestionError(ForestError):
    pass


class TopologyError(ForestError):
    pass


class ConfigurationError(ForestError):
    pass


class CertificationError(ForestError):
    def __init__(self, link: str, message: str = ""):
        super().__init__(message or f"certification failed on {link}")
        self.link = link
