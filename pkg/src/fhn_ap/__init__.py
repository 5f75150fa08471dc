"""Particle/spectral solver for the kinetic FitzHugh-Nagumo model with strong local interactions."""

from .diagnostics import l2_error, linf_error, observed_order, relative_entropy
from .experiments import (
    Box1D,
    CustomData,
    ExperimentReport,
    ExperimentSetup,
    Hetero2D,
    LinearGaussianBump,
    Spiral2D,
    exact_linear_solution,
    run_accuracy_sweep,
    run_entropy_sweep,
    run_field_experiment,
)
from .grid import Grid
from .kernel import (
    CompactIndicatorKernel,
    CustomKernel,
    GaussianKernel,
    KernelModes,
    KernelMoments,
    compute_modes,
    moments,
)
from .model import ModelParams, adaptation, nonlinearity
from .particles import Density, ParticleEnsemble, init_ensemble
from .spectral import Field, apply_L, forward, inverse, laplacian
from .timestepping import (
    BlowUpError,
    KineticState,
    LimitState,
    Scheme,
    SchemeConfig,
    integrate,
    step_hsdirk2,
    step_limit_rk1,
    step_limit_rk2,
    step_rk1,
)

__all__ = [name for name in dir() if not name.startswith("_")]
