"""Sound field interpolation with learned directionally weighted kernels.

Kernel ridge regression over a bank of von Mises-Fisher weighted plane-wave
kernels, with the mixture weights learned from the microphone signals under
an L1 (simplex) or L2 (unit sphere) constraint.
"""
from sfmkl.evaluation import EvalGrid, FieldSlice, error_slice, make_grid, nmse
from sfmkl.kernels import (
    GramSet,
    KernelBank,
    SubKernelParam,
    build_gram_set,
    default_bank,
    kappa_directional,
    kappa_quadrature_oracle,
    mix_gram,
    uniform_bank,
)
from sfmkl.mkl import L1Options, L2Options, MklResult, descent_direction, grad_J, solve_l1, solve_l2
from sfmkl.ridge import EstimatorState, estimate_field, fit_ridge, objective_J, solve_alpha
from sfmkl.scene import (
    MicArray,
    Observation,
    PointSource,
    Scene,
    Sphere,
    greens_field,
    observe,
    spherical_layer_layout,
)

__version__ = "0.1.0"
