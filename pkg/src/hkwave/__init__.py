"""
Harmonic analysis and wave propagation on compact symmetric spaces with even
root multiplicities.

Modules
-------
rootsys
    Root systems, Weyl groups, weight lattices and torus grids.
specfunc
    Shift operators, spherical functions, c-function and dimension polynomial.
fourier
    Spherical Fourier transform, holomorphic extension and synthesis.
wave
    Wave-equation solvers and Huygens diagnostics.
"""
from .rootsys import (ConfigError, SpaceConfig, SpectralParameter, SymmetricSpaceData,
                      build_space, enumerate_dominant, preset, torus_grid)
from .specfunc import (build_shift_operator, c_function, dimension, spherical_function,
                       spherical_oracle)
from .fourier import (RadialFunction, forward_transform, inverse_transform, pw_extend,
                      pw_extend_adjoint, standard_bump, synthesize_from_pw)
from .wave import (CauchyProblem, huygens_report, solve_contour, solve_reduction,
                   solve_series, trajectory)

__version__ = "1.0.0"

__all__ = [
    "ConfigError", "SpaceConfig", "SpectralParameter", "SymmetricSpaceData",
    "build_space", "enumerate_dominant", "preset", "torus_grid",
    "build_shift_operator", "c_function", "dimension", "spherical_function",
    "spherical_oracle", "RadialFunction", "forward_transform", "inverse_transform",
    "pw_extend", "pw_extend_adjoint", "standard_bump", "synthesize_from_pw",
    "CauchyProblem", "huygens_report", "solve_contour", "solve_reduction",
    "solve_series", "trajectory", "__version__",
]
