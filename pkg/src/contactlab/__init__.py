"""Numerical laboratory for Lorentzian distances on contactomorphism groups.

Submodules: :mod:`manifolds` (contact models), :mod:`flows` (paths, flows,
lengths, surgeries), :mod:`lorentz` (certified bounds), :mod:`genfun`
(generating functions and spectral invariants), :mod:`legendrian`
(Legendrian isotopies), :mod:`spacetime` (skies of product spacetimes) and
:mod:`cli` (scenario runner).
"""

from . import flows, genfun, legendrian, lorentz, manifolds, spacetime
from .exceptions import (CompositionError, ContactLabError, DomainError, FamilyEventError,
                         InfeasibleError, RefusalError, RegularityError, SandwichViolation,
                         ToleranceError, UnsupportedFieldError)
from .flows import (concatenate, flow_map, integrate, lorentz_length, reeb_path,
                    reeb_reparametrize, shelukhin_length, translation_path)
from .legendrian import chekanov_upper, leg_lorentz_length, leg_tau_lower, loop_from_cheap_path
from .lorentz import (NormEstimator, TauEstimator, loop_tau_lower, norm_upper, positive_loop,
                      reverse_triangle_check, tau_lower)
from .manifolds import ContactModel, GridSpec, ScalarField, extremize
from .spacetime import (ProductSpacetime, sky, sky_distance_upper, sky_order_certificate,
                        tau_g)

__version__ = "0.1.0"
