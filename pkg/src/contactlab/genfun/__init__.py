"""Generating functions on the 1-jet space of the circle and their spectral invariants."""

from .curves import LegendrianCurve
from .functions import Cutoff, GenFun, Term, jet_genfun, moment, trig_poly_terms
from .locus import (CriticalLocus, RegularityWarning, critical_locus, legendrian_from_genfun,
                    locus_with_fibers)
from .homology import CubicalComplex, Persistence, cubical_complex, persistence
from .spectral import (SpectralInvariant, SpectralValue, fiber_radii, spectral_invariant,
                       spectral_values)
from .lemma import FamilyVelocity, SandwichReport, family_velocity, zap_sandwich
from .hodograph import (Theorem3Report, genfun_for_path, hodograph, hodograph_inverse,
                        hodograph_jacobian, lift_to_str2, origin_fiber, pullback_residual,
                        theorem3_check, weight_field)
from .families import fishtail_family, jet_family, reeb_family, shipped_families, translation_family
