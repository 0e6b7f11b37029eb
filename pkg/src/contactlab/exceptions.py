"""Exception hierarchy shared by all modules."""


class ContactLabError(Exception):
    """Base class for errors raised by contactlab."""


class DomainError(ContactLabError, ValueError):
    """A point or tangent vector does not lie on the model."""


class UnsupportedFieldError(ContactLabError, TypeError):
    """A scalar field lacks data (e.g. derivatives) needed by an operation."""


class RefusalError(ContactLabError):
    """The request is outside what the operation can certify."""


class ToleranceError(ContactLabError):
    """A requested tolerance cannot be met at the current resolution."""


class InfeasibleError(ContactLabError):
    """A homology class or witness could not be found."""


class RegularityError(ContactLabError):
    """A generating function violates a regularity assumption."""


class FamilyEventError(ContactLabError):
    """Components of a family appear or disappear between time samples."""


class CompositionError(ContactLabError):
    """Endpoints of two certificates do not match."""


class SandwichViolation(ContactLabError, AssertionError):
    """Lower and upper length bounds fail to bracket a spectral value."""
