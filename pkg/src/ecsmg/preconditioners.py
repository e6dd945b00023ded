"""Preconditioning operators built from the same model and grid as Z.

    laplacian   -Lap
    csl         -Lap + (beta1 + i beta2) k^2(x, y)
    csg         Z discretized with every mesh width multiplied by e^{i theta_alpha}
    qd          (1 - i) I + Z / |Re lambda0|
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Union

from .grid import TensorGrid2D, build_grid
from .operators import (ConfigurationError, ModelProblem, OperatorSpec,
                        StencilOperator, discretize)
from .spectral import smallest_real_eigenvalue

PRECONDITIONER_KINDS = ("none", "laplacian", "csl", "csg", "qd")


@dataclass(frozen=True)
class PreconditionerSpec:
    kind: str = "qd"
    beta1: float = -1.0
    beta2: float = -0.5
    theta_alpha: float = math.pi / 13
    lambda0: Union[complex, str, None] = "auto"
    lambda0_method: str = "dense_2d"
    qd_use_modulus: bool = False
    real_grid: bool = False  # csl only: discretize on the unrotated grid

    def __post_init__(self):
        if self.kind not in PRECONDITIONER_KINDS:
            raise ConfigurationError(f"unknown preconditioner {self.kind!r}")
        if self.kind == "csl" and self.beta2 == 0:
            raise ConfigurationError("CSL needs a nonzero imaginary shift beta2")
        if self.kind == "csg" and not 0 < self.theta_alpha < math.pi / 2:
            raise ConfigurationError("CSG rotation must lie in (0, pi/2)")

    @property
    def label(self) -> str:
        if self.kind == "csl":
            return f"CSL(beta=({self.beta1:g},{self.beta2:g}))"
        if self.kind == "csg":
            return f"CSG(theta_alpha={self.theta_alpha:.4g})"
        if self.kind == "qd":
            lam = self.lambda0
            return f"QD(Re lambda0={complex(lam).real:.4g})" if not isinstance(lam, str) else "QD"
        return self.kind


def model_operator_spec(model: ModelProblem) -> OperatorSpec:
    """The Helmholtz operator Z = -Lap_{l1,l2} - k^2(x, y)."""
    return OperatorSpec(model)


def resolve_lambda0(model: ModelProblem, spec: PreconditionerSpec,
                    grid: Optional[TensorGrid2D] = None) -> complex:
    lam = spec.lambda0
    if lam is None:
        raise ConfigurationError("QD preconditioner needs lambda0")
    if isinstance(lam, str):
        if lam != "auto":
            raise ConfigurationError(f"lambda0 must be a number or 'auto', got {lam!r}")
        return smallest_real_eigenvalue(model_operator_spec(model), spec.lambda0_method, grid)
    return complex(lam)


def qd_scale(lambda0: complex, use_modulus: bool = False) -> float:
    d = abs(lambda0) if use_modulus else abs(complex(lambda0).real)
    if d == 0:
        raise ConfigurationError("lambda0 with zero real part cannot scale the QD operator")
    return 1.0 / d


def preconditioner_operator_spec(model: ModelProblem, spec: PreconditionerSpec,
                                 grid: Optional[TensorGrid2D] = None) -> OperatorSpec:
    kind = spec.kind
    if kind == "none":
        return OperatorSpec(model, zz_scale=0.0, shift=1.0, k2_coeff=0.0)
    if kind == "laplacian":
        return OperatorSpec(model, k2_coeff=0.0)
    if kind == "csl":
        return OperatorSpec(model, k2_coeff=complex(spec.beta1, spec.beta2))
    if kind == "csg":
        return OperatorSpec(model, mesh_scale=cmath.exp(1j * spec.theta_alpha))
    lam0 = resolve_lambda0(model, spec, grid)
    return OperatorSpec(model, zz_scale=qd_scale(lam0, spec.qd_use_modulus),
                        shift=1 - 1j)


def preconditioner_grid(grid: TensorGrid2D, spec: PreconditionerSpec) -> TensorGrid2D:
    """Grid for the preconditioner; the target grid unless ``real_grid`` is set."""
    if spec.kind == "csl" and spec.real_grid:
        def flat(g):
            return build_grid(g.n, g.m_lo, g.m_hi, g.a, g.w, 0.0)
        return TensorGrid2D(flat(grid.gx), flat(grid.gy))
    return grid


def build_preconditioner(model: ModelProblem, grid: Optional[TensorGrid2D],
                         spec: PreconditionerSpec) -> StencilOperator:
    if grid is None:
        grid = model.grid()
    ospec = preconditioner_operator_spec(model, spec, grid)
    return discretize(ospec, preconditioner_grid(grid, spec))


def qd_delta(lambda0: complex) -> float:
    """``delta`` with ``delta^2 = 1/|Re lambda0|`` (QD scaling as ``delta^2 Z``)."""
    lam = complex(lambda0)
    if lam == 0:
        raise ConfigurationError("lambda0 must be nonzero")
    return 1.0 / math.sqrt(abs(lam.real))
