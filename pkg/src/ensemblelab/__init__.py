"""Maximum-entropy ensembles for macrostates: fitting, reachability, GP-map
bounds, ensemble distillation and macroscopic-limit statistics."""

from .config import DEFAULT_TOL, ToleranceConfig
from .spectra import (DiagonalState, HermitianState, Macrostate, ObservableSet,
                      dephase, equivalence_class_dim, expectation, is_compatible,
                      sample_compatible, shannon_entropy)
from .maxent import (GibbsSolution, fit_canonical, fit_gge, free_energy,
                     free_entropy, gibbs_entropy_macro, gibbs_state, thermal_energy)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL", "ToleranceConfig",
    "DiagonalState", "HermitianState", "Macrostate", "ObservableSet", "dephase",
    "equivalence_class_dim", "expectation", "is_compatible", "sample_compatible",
    "shannon_entropy",
    "GibbsSolution", "fit_canonical", "fit_gge", "free_energy", "free_entropy",
    "gibbs_entropy_macro", "gibbs_state", "thermal_energy",
]
