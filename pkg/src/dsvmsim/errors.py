"""Exception types raised across the simulator."""


class DsvmError(Exception):
    """Base class for all simulator errors."""


class ConfigError(DsvmError):
    """Invalid or incomplete run configuration (CLI exit code 2)."""


# -- topology --

class InfeasibleTopology(DsvmError):
    """Requested graph parameters cannot yield a valid connected graph."""


class UnknownNode(DsvmError):
    """Node id outside the graph."""


# -- dataset --

class BadCovariance(DsvmError):
    """Covariance matrix is not symmetric positive definite."""


class ParseError(DsvmError):
    """CSV cell failed to parse; message names row and column."""


class MissingColumn(DsvmError):
    """Named label column not present in the CSV header."""


class NonNumericFeature(ParseError):
    """A feature cell is not numeric."""


class InsufficientData(DsvmError):
    """Requested per-node sample counts exceed the available pool."""


class SingleClassNode(DsvmError):
    """A node's train split ended up single-class after bounded reshuffles."""


# -- solvers / engine --

class SingularU(DsvmError):
    """Local quadratic term is singular (node has no neighbors)."""

class ShapeMismatch(DsvmError):
    """Partition and topology disagree on the node count."""


class DimensionMismatch(DsvmError):
    """Vector length does not match the trained dimension."""


class EmptyTestSet(DsvmError):
    """Risk requested over zero test samples."""


# -- adversary --

class CapViolation(DsvmError):
    """Per-node budgets exceed the attacker's total budget cap."""
