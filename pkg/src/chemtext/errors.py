"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: :class:`ValidationError` exits 1,
:class:`RunFailure` (and any unexpected exception) exits 2.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """Invalid input data, arguments, or configuration."""


class RunFailure(RuntimeError):
    """A runtime failure: I/O trouble, an unreachable endpoint, or an
    evaluation run that exceeded its failure budget."""
