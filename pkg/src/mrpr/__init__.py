"""Failure-aware routing and wavelength assignment simulator for optical
mesh networks: minimum-reconfiguration-probability routing with adaptive
shortest-hop and least-loaded baselines, plus the discrete-event machinery
to compare them."""

from .errors import ConfigurationError, InvariantViolation, TopologyError
from .topology import (Link, Router, Topology, load_topology, neighbors,
                       parse_topology, serialize)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "InvariantViolation", "TopologyError",
    "Link", "Router", "Topology",
    "load_topology", "neighbors", "parse_topology", "serialize",
    "__version__",
]
