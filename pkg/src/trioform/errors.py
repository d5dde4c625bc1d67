"""Exception types shared across the package."""


class FormationError(Exception):
    """Base class for all package errors."""


class ZeroLink(FormationError, ValueError):
    """A link vector is (numerically) zero, i.e. two robots coincide."""


class DomainError(FormationError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class NegativeDiscriminant(FormationError, ValueError):
    """The reduced cubic has a single real root (discriminant below zero)."""


class NotFeasible(FormationError, ValueError):
    """A candidate pair violates the sign constraints of the admissible region."""


class NotIsosceles(FormationError, ValueError):
    """An isosceles-only analysis was requested for unequal desired distances."""


class WrongKind(FormationError, ValueError):
    """An outcome of the wrong kind was passed to an outcome-specific check."""
