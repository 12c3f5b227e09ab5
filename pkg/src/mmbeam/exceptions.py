"""Exception types raised by mmbeam."""


class ConfigurationError(ValueError):
    """Invalid experiment, codebook or channel configuration.

    ``key`` names the offending configuration entry when known, so the CLI
    can point at the line in the config file.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class SingularCombinerError(ArithmeticError):
    """The UE combiner correlation matrix is (numerically) singular."""
