# errors.py - Exception types shared by all workbench modules

from typing import Optional


class WorkbenchError(ValueError):
    """Base class for every error the workbench raises on bad input or data."""


class FormulaSyntaxError(WorkbenchError):
    """Text does not conform to a DSL grammar."""

    def __init__(self, message: str, position: Optional[int] = None):
        if position is not None and position >= 0:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class VariableRangeError(WorkbenchError):
    """A propositional variable index exceeds the variable count."""


class OrderValidationError(WorkbenchError):
    """A relation is not reflexive or not transitive (or not a partial order)."""


class FaithfulnessError(WorkbenchError):
    """A structure violates one of the faithfulness conditions."""


class ReconstructionError(WorkbenchError):
    """An operator cannot be produced by minimization over any partial order."""


class InconsistentPairError(ReconstructionError):
    """op({u, v}) is not a non-empty subset of {u, v}."""


class NonTransitiveError(ReconstructionError):
    """The strict preference read off the pairs is not transitive."""


class TableMismatchError(ReconstructionError):
    """Minimization over the reconstructed order differs from the operator."""


class OperatorUndefinedError(WorkbenchError):
    """A partial operator table has no entry for the requested set."""


class PostulateError(WorkbenchError):
    """A postulate or sentence is malformed (free variables, bad arity, ...)."""


class SignatureMismatchError(WorkbenchError):
    """Two structures do not share a vocabulary."""


class NotACrownError(WorkbenchError):
    """An order or colored graph is not a member of the crown family."""


class NoSwapPairError(WorkbenchError):
    """No pair of far-apart vertices with equal neighborhoods exists."""


class CapExceededError(WorkbenchError):
    """A documented exactness cap would be exceeded."""
