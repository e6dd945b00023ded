"""Multigrid-preconditioned Krylov solvers for 2D Helmholtz problems with
exterior-complex-scaling absorbing layers."""
from .grid import EcsGrid1D, GridError, TensorGrid2D, build_grid, coarsen, mesh_width
from .operators import (AxisSpec, ConfigurationError, ModelProblem, OperatorSpec,
                        StencilOperator, apply, assemble_dense, build_rhs, discretize,
                        second_derivative_stencil, to_sparse)
from .spectral import (PitchforkParams, characteristic_F, characteristic_G,
                       dense_eigenvalues, enclosing_circle, find_pitchfork,
                       smallest_real_eigenvalue)
from .preconditioners import PreconditionerSpec, build_preconditioner, qd_delta
from .multigrid import (Hierarchy, MgConfig, build_hierarchy, mg_cycle, prolong_bilinear,
                        restrict_fw, smooth, standalone_solve)
from .krylov import KrylovConfig, SolveReport, bicgstab
from .config import ExperimentConfig

__version__ = "0.1.0"
