"""Paths of contactomorphisms, their flows, lengths and surgeries."""

from .integrate import (ConformalFactorField, FlowTrace, conformal_factor, flow_map,
                        integrate, vector_field)
from .io import dumps_path, load_path, loads_path, save_path
from .lengths import (LengthResult, default_grid, lorentz_length, shelukhin_length,
                      simpson_weights, slice_extrema)
from .modes import Mode
from .paths import (BasisPath, ComposedPath, ConcatenatedPath, HamiltonianPath, Motion,
                    ReebMotion, ReversedPath, RightTranslatedPath, TimeWarpedPath,
                    TorusMotion, TranslationMotion, motion_from_spec, path_from_spec,
                    profile_path, reeb_path, translation_path, zero_path)
from .surgery import (ReparametrizationInfo, concatenate, reeb_reparametrize, reverse,
                      right_translate, time_warp)
from .time import (FourierLoop, LinearTime, SplineTime, TimeFunction, TimeProfile,
                   smoothstep, smoothstep_prime)

__all__ = [
    "BasisPath", "ComposedPath", "ConcatenatedPath", "ConformalFactorField", "FlowTrace",
    "FourierLoop", "HamiltonianPath", "LengthResult", "LinearTime", "Mode", "Motion",
    "ReebMotion", "ReparametrizationInfo", "ReversedPath", "RightTranslatedPath",
    "SplineTime", "TimeFunction", "TimeProfile", "TimeWarpedPath", "TorusMotion",
    "TranslationMotion", "concatenate", "conformal_factor", "default_grid", "dumps_path",
    "flow_map", "integrate", "load_path", "loads_path", "lorentz_length",
    "motion_from_spec", "path_from_spec", "profile_path", "reeb_path",
    "reeb_reparametrize", "reverse", "right_translate", "save_path", "shelukhin_length",
    "simpson_weights", "slice_extrema", "smoothstep", "smoothstep_prime", "time_warp",
    "translation_path", "vector_field", "zero_path",
]
