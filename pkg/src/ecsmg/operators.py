"""Five-point finite-difference Helmholtz operators on ECS tensor grids.

Every operator in this package has the form

    zz_scale * (-Lap_{l1,l2} + k2_coeff * k^2(x, y)) + shift

discretized on a grid whose mesh widths are multiplied by ``mesh_scale``
(potentials are still evaluated at the unscaled nodes).
The model operator Z is ``k2_coeff = -1``; the preconditioners only change
the four scalars.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .grid import EcsGrid1D, TensorGrid2D, build_grid

DENSE_CAP = 4096

MODEL_KINDS = ("MP1", "MP2", "MP3", "custom")
RHS_KINDS = ("centered_delta", "gaussian", "custom")


class ConfigurationError(ValueError):
    """A model or operator specification that cannot be discretized."""


@dataclass(frozen=True)
class AxisSpec:
    """Parameters of one ECS axis: cell counts, lengths and angle."""
    n: int
    m_lo: int = 0
    m_hi: int = 0
    a: float = 1.0
    w: float = 0.0
    theta: float = np.pi / 6

    def build(self) -> EcsGrid1D:
        return build_grid(self.n, self.m_lo, self.m_hi, self.a, self.w, self.theta)

    def scaled(self, s: float) -> AxisSpec:
        """Multiply all cell counts by ``s`` (lengths unchanged)."""
        def cnt(c):
            return int(round(c * s))
        return dataclasses.replace(self, n=cnt(self.n), m_lo=cnt(self.m_lo),
                                   m_hi=cnt(self.m_hi))


@dataclass(frozen=True)
class ModelProblem:
    """One of the benchmark Helmholtz problems.

    ``k2(x, y)`` is the constant ``k**2`` plus the potential part:
    ``nu * (exp(-x^2) + exp(-y^2))`` for MP2 and ``1/x + 1/y`` for MP3.
    """
    kind: str
    k: float
    x_axis: AxisSpec
    y_axis: Optional[AxisSpec] = None
    nu: float = 0.0
    l1: int = 0
    l2: int = 0
    rhs_kind: Optional[str] = None
    rhs_sign: float = -1.0
    rhs_func: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigurationError(f"unknown model kind {self.kind!r}")
        if self.y_axis is None:
            object.__setattr__(self, "y_axis", self.x_axis)
        if self.rhs_kind is None:
            default = "centered_delta" if self.kind in ("MP1", "custom") else "gaussian"
            object.__setattr__(self, "rhs_kind", default)
        if self.rhs_kind not in RHS_KINDS:
            raise ConfigurationError(f"unknown rhs kind {self.rhs_kind!r}")
        if not self.k >= 0:
            raise ConfigurationError("wavenumber k must be real and >= 0")
        if self.l1 < 0 or self.l2 < 0:
            raise ConfigurationError("angular momenta must be >= 0")
        if self.kind == "MP2" and self.nu < 0:
            raise ConfigurationError("MP2 well depth nu must be >= 0")

    def grid(self) -> TensorGrid2D:
        return TensorGrid2D(self.x_axis.build(), self.y_axis.build())

    def potential_1d(self, z: np.ndarray, axis: int) -> np.ndarray:
        """Axis part of the spatially varying wavenumber, without ``k^2``."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "MP2":
            return self.nu * np.exp(-z * z)
        if self.kind == "MP3":
            if np.any(z == 0):
                raise ConfigurationError("MP3 Coulomb term evaluated at coordinate 0")
            return 1.0 / z
        return np.zeros_like(z)

    def centrifugal_1d(self, z: np.ndarray, axis: int) -> np.ndarray:
        ll = self.l1 if axis == 0 else self.l2
        z = np.asarray(z, dtype=complex)
        if ll == 0:
            return np.zeros_like(z)
        if np.any(z == 0):
            raise ConfigurationError("angular term l(l+1)/x^2 evaluated at coordinate 0")
        return ll * (ll + 1) / (z * z)

    def k2(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return (self.k ** 2 + self.potential_1d(x, 0)[:, None]
                + self.potential_1d(y, 1)[None, :])


@dataclass(frozen=True)
class OperatorSpec:
    """Scalars turning the model problem into a concrete operator."""
    base: ModelProblem
    mesh_scale: complex = 1.0
    zz_scale: complex = 1.0
    shift: complex = 0.0
    k2_coeff: complex = -1.0

    def __post_init__(self):
        if self.mesh_scale == 0:
            raise ConfigurationError("mesh_scale must be nonzero")


def second_derivative_stencil(h_left, h_right):
    """Three-point second derivative on a non-uniform (complex) mesh.

    Returns ``(c_left, c_center, c_right)`` with
    ``u''(z_j) ~ c_left u_{j-1} + c_center u_j + c_right u_{j+1}``.
    Works elementwise on arrays.
    """
    h_left = np.asarray(h_left)
    h_right = np.asarray(h_right)
    if np.any(h_left == 0) or np.any(h_right == 0):
        raise ZeroDivisionError("zero mesh width in second-derivative stencil")
    s = 2.0 / (h_left + h_right)
    c_left = s / h_left
    c_right = s / h_right
    out = (c_left, -(c_left + c_right), c_right)
    if h_left.ndim == 0 and h_right.ndim == 0:
        return tuple(complex(c) for c in out)
    return out


def _neg_dzz(grid: EcsGrid1D, mesh_scale):
    """Coefficients of ``-d^2/dz^2`` at the interior nodes."""
    hw = grid.mesh_widths() * mesh_scale
    cl, cc, cr = second_derivative_stencil(hw[:-1], hw[1:])
    return -cl, -cc, -cr


@dataclass(frozen=True, eq=False)
class StencilOperator:
    """Matrix-free five-point operator; coefficient arrays have ``grid.shape``.

    Neighbour coefficients pointing at a Dirichlet node are stored as zero.
    """
    grid: TensorGrid2D
    center: np.ndarray
    west: np.ndarray
    east: np.ndarray
    south: np.ndarray
    north: np.ndarray
    spec: Optional[OperatorSpec] = None

    @property
    def shape(self):
        return self.grid.shape

    @property
    def size(self):
        return self.grid.size

    @property
    def diagonal(self) -> np.ndarray:
        return self.center

    def apply(self, u: np.ndarray, out: Optional[np.ndarray] = None) -> np.ndarray:
        return apply(self, u, out)

    def __matmul__(self, u):
        return apply(self, u)

    def residual(self, u, b):
        """``b - A u`` with ``u``, ``b`` given as 2D arrays."""
        return b - apply(self, u)


def _stencil_from_spec(spec: OperatorSpec, grid: TensorGrid2D) -> StencilOperator:
    model = spec.base
    gx, gy = grid.gx, grid.gy
    xw, xc, xe = _neg_dzz(gx, spec.mesh_scale)
    ys, yc, yn = _neg_dzz(gy, spec.mesh_scale)
    # potentials stay at the grid nodes; only the mesh widths are scaled
    x = gx.interior
    y = gy.interior

    diag = (xc[:, None] + yc[None, :]
            + model.centrifugal_1d(x, 0)[:, None]
            + model.centrifugal_1d(y, 1)[None, :])
    if spec.k2_coeff != 0:
        diag = diag + spec.k2_coeff * model.k2(x, y)

    nx, ny = grid.shape
    ones = np.ones((nx, ny), dtype=complex)
    z = spec.zz_scale
    center = z * diag + spec.shift * ones
    west = z * xw[:, None] * ones
    east = z * xe[:, None] * ones
    south = z * ys[None, :] * ones
    north = z * yn[None, :] * ones
    west[0, :] = 0
    east[-1, :] = 0
    south[:, 0] = 0
    north[:, -1] = 0
    for arr in (center, west, east, south, north):
        arr.setflags(write=False)
    return StencilOperator(grid, center, west, east, south, north, spec)


def discretize(spec: OperatorSpec, grid: Optional[TensorGrid2D] = None) -> StencilOperator:
    """Discretize ``spec`` on ``grid`` (default: the model's own grid)."""
    if grid is None:
        grid = spec.base.grid()
    return _stencil_from_spec(spec, grid)


def apply(op: StencilOperator, u: np.ndarray, out: Optional[np.ndarray] = None) -> np.ndarray:
    """Matrix-free ``A u``.  Accepts flat vectors or ``grid.shape`` arrays."""
    u = np.asarray(u)
    flat = u.ndim == 1
    if u.size != op.size:
        raise ValueError(f"vector has {u.size} entries, operator needs {op.size}")
    u2 = u.reshape(op.shape)
    if out is None:
        v = np.empty(op.shape, dtype=np.result_type(u2.dtype, op.center.dtype))
    else:
        v = out.reshape(op.shape)
    np.multiply(op.center, u2, out=v)
    v[1:, :] += op.west[1:, :] * u2[:-1, :]
    v[:-1, :] += op.east[:-1, :] * u2[1:, :]
    v[:, 1:] += op.south[:, 1:] * u2[:, :-1]
    v[:, :-1] += op.north[:, :-1] * u2[:, 1:]
    if out is not None:
        return out
    return v.reshape(-1) if flat else v


def to_sparse(op: StencilOperator) -> sp.csr_matrix:
    """Assemble the operator as a CSR matrix (row-major unknown ordering)."""
    nx, ny = op.shape
    idx = np.arange(nx * ny).reshape(nx, ny)
    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [op.center.ravel()]
    for coef, sl_row, sl_col in (
        (op.west, np.s_[1:, :], np.s_[:-1, :]),
        (op.east, np.s_[:-1, :], np.s_[1:, :]),
        (op.south, np.s_[:, 1:], np.s_[:, :-1]),
        (op.north, np.s_[:, :-1], np.s_[:, 1:]),
    ):
        rows.append(idx[sl_row].ravel())
        cols.append(idx[sl_col].ravel())
        vals.append(coef[sl_row].ravel())
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nx * ny, nx * ny))


def assemble_dense(op: StencilOperator, cap: int = DENSE_CAP) -> np.ndarray:
    if op.size > cap:
        raise ValueError(f"{op.size} unknowns exceed the dense assembly cap {cap}")
    nx, ny = op.shape
    A = np.zeros((nx * ny, nx * ny), dtype=complex)
    for i in range(nx):
        for j in range(ny):
            r = i * ny + j
            A[r, r] = op.center[i, j]
            if i > 0:
                A[r, r - ny] = op.west[i, j]
            if i < nx - 1:
                A[r, r + ny] = op.east[i, j]
            if j > 0:
                A[r, r - 1] = op.south[i, j]
            if j < ny - 1:
                A[r, r + 1] = op.north[i, j]
    return A


def center_index(grid: TensorGrid2D) -> tuple[int, int]:
    """Unknown index of the node nearest the centre of the real square."""
    def axis(g):
        node = g.m_lo + int(round(g.n / 2))
        return node - 1
    return axis(grid.gx), axis(grid.gy)


def build_rhs(model: ModelProblem, grid: Optional[TensorGrid2D] = None) -> np.ndarray:
    """Right-hand side as a ``grid.shape`` array, zero inside the layers."""
    if grid is None:
        grid = model.grid()
    b = np.zeros(grid.shape, dtype=complex)
    if model.rhs_kind == "centered_delta":
        b[center_index(grid)] = 1.0
        return b
    mask = grid.real_mask()
    X, Y = grid.coordinates()
    x, y = X.real, Y.real
    if model.rhs_kind == "gaussian":
        with np.errstate(over="ignore"):
            g = np.exp(model.rhs_sign * (x * x + y * y))
    else:
        if model.rhs_func is None:
            raise ConfigurationError("rhs_kind='custom' needs rhs_func")
        g = np.asarray(model.rhs_func(x, y), dtype=complex)
    b[mask] = g[mask]
    return b
