"""Exception hierarchy shared across the toolkit.

Every error raised by the library derives from :class:`AromError` so callers
(CLI, HTTP service) can map failures to machine-readable responses without
catching bare exceptions.
"""

from __future__ import annotations


class AromError(Exception):
    """Base class for all library errors."""


# -- feature-file format -------------------------------------------------

class FeatureFormatError(AromError):
    """A feature file violates the AROM1 container format."""


class BadMagicError(FeatureFormatError):
    """File does not start with the expected magic bytes."""


class VersionMismatchError(FeatureFormatError):
    """File declares a container version this reader does not support."""


class TruncatedPayloadError(FeatureFormatError):
    """Declared dimensions do not match the available payload bytes."""


class NonFiniteDataError(AromError):
    """NaN or infinite values where finite data is required."""


class InvalidFeatureSetError(AromError):
    """In-memory feature data violates a structural invariant."""


# -- numerics -------------------------------------------------------------

class DimensionMismatchError(AromError):
    """Operand shapes are incompatible."""


class DegenerateInputError(AromError):
    """Too few samples (or too little rank) for the requested estimate."""


class NotSymmetricError(AromError):
    """Matrix expected to be symmetric is not."""


class NotPositiveDefiniteError(AromError):
    """Matrix expected to be positive definite is not (try more ridge/shrinkage)."""


# -- pipeline plumbing ----------------------------------------------------

class UnlabeledDataError(AromError):
    """Operation needs labels but the feature set carries none."""


class FingerprintMismatchError(AromError):
    """Concept dictionary was built from a different encoding language."""


class ConfigError(AromError):
    """Experiment configuration is malformed or inconsistent."""
