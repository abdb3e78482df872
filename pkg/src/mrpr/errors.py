"""Exception types shared across the package."""


class ConfigurationError(Exception):
    """Bad user input: config files, topology files, CLI arguments."""


class TopologyError(ConfigurationError):
    """Topology file fails to parse or validate."""


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""
