"""Exterior-complex-scaled (ECS) grids in one and two dimensions.

A 1D ECS grid is a uniform real segment ``[0, a]`` optionally extended at
either end by a straight complex contour of real width ``w`` rotated by the
angle ``theta``.  The high layer runs from ``a`` to ``a + w e^{i theta}``, the
low layer from ``0`` to ``-w e^{i theta}``, so that outgoing waves decay in
both directions.  End nodes carry homogeneous Dirichlet values; the unknowns
live at the interior nodes.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    """Invalid grid parameters or an impossible coarsening."""


@dataclass(frozen=True)
class EcsGrid1D:
    n: int
    m_lo: int
    m_hi: int
    a: float
    w: float
    theta: float
    nodes: np.ndarray = field(repr=False, compare=False)

    @property
    def cells(self) -> int:
        return self.m_lo + self.n + self.m_hi

    @property
    def num_unknowns(self) -> int:
        return self.cells - 1

    @property
    def h(self) -> float:
        return self.a / self.n

    @property
    def h_gamma(self) -> complex | None:
        """Complex layer mesh width (high layer, or the low one if alone)."""
        m = self.m_hi or self.m_lo
        if m == 0:
            return None
        return self.w / m * cmath.exp(1j * self.theta)

    @property
    def gamma(self) -> complex | None:
        m = self.m_hi or self.m_lo
        if m == 0:
            return None
        # integer ratio first so that halving every count keeps gamma bitwise
        return (self.w * self.n) / (m * self.a) * cmath.exp(1j * self.theta)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def real_slice(self) -> slice:
        """Node indices of the closed real segment ``[0, a]``."""
        return slice(self.m_lo, self.m_lo + self.n + 1)

    def mesh_widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, EcsGrid1D):
            return NotImplemented
        return (self.n, self.m_lo, self.m_hi, self.a, self.w, self.theta) == (
            other.n, other.m_lo, other.m_hi, other.a, other.w, other.theta)

    def __hash__(self):
        return hash((self.n, self.m_lo, self.m_hi, self.a, self.w, self.theta))


def _ecs_nodes(n, m_lo, m_hi, a, w, theta):
    rot = cmath.exp(1j * theta)
    lo = [-(w * ((m_lo - j) / m_lo)) * rot for j in range(m_lo)]
    real = [complex(a * (j / n)) for j in range(n + 1)]
    hi = [a + (w * (j / m_hi)) * rot for j in range(1, m_hi + 1)]
    return np.array(lo + real + hi, dtype=complex)


def build_grid(n, m_lo=0, m_hi=0, a=1.0, w=0.0, theta=np.pi / 6) -> EcsGrid1D:
    """Build a 1D ECS grid with ``m_lo + n + m_hi`` cells.

    Divisibility needed for coarsening is checked only when a multigrid
    hierarchy is built.
    """
    if int(n) != n or n < 2:
        raise GridError(f"need at least 2 real cells, got n={n}")
    if m_lo < 0 or m_hi < 0:
        raise GridError("layer cell counts must be non-negative")
    if not a > 0:
        raise GridError(f"real segment length must be positive, got a={a}")
    if (m_lo or m_hi) and not w > 0:
        raise GridError(f"layer width must be positive, got w={w}")
    if not 0 <= theta < np.pi / 2:
        raise GridError(f"ECS angle must lie in [0, pi/2), got {theta}")
    n, m_lo, m_hi = int(n), int(m_lo), int(m_hi)
    nodes = _ecs_nodes(n, m_lo, m_hi, float(a), float(w), float(theta))
    nodes.setflags(write=False)
    return EcsGrid1D(n, m_lo, m_hi, float(a), float(w), float(theta), nodes)


def mesh_width(grid: EcsGrid1D, j: int) -> complex:
    """Return ``z_{j+1} - z_j``."""
    if not 0 <= j < grid.cells:
        raise IndexError(f"cell index {j} out of range [0, {grid.cells})")
    return complex(grid.nodes[j + 1] - grid.nodes[j])


def can_coarsen(grid: EcsGrid1D) -> bool:
    return (grid.n % 2 == 0 and grid.n >= 4
            and grid.m_lo % 2 == 0 and grid.m_hi % 2 == 0)


def coarsen(grid: EcsGrid1D) -> EcsGrid1D:
    """Halve every cell count; coarse nodes are the even fine nodes."""
    if not can_coarsen(grid):
        raise GridError(
            f"cannot coarsen grid with cells (m_lo={grid.m_lo}, n={grid.n}, "
            f"m_hi={grid.m_hi}): all counts must be even and n >= 4")
    return build_grid(grid.n // 2, grid.m_lo // 2, grid.m_hi // 2,
                      grid.a, grid.w, grid.theta)


@dataclass(frozen=True)
class TensorGrid2D:
    """Tensor product of two ECS grids.

    Unknowns are stored as ``(nx, ny)`` arrays, ``x`` varying slowest, which
    is row-major order over the interior nodes.
    """
    gx: EcsGrid1D
    gy: EcsGrid1D

    @property
    def shape(self) -> tuple[int, int]:
        return (self.gx.num_unknowns, self.gy.num_unknowns)

    @property
    def size(self) -> int:
        nx, ny = self.shape
        return nx * ny

    def coarsen(self) -> TensorGrid2D:
        return TensorGrid2D(coarsen(self.gx), coarsen(self.gy))

    def can_coarsen(self) -> bool:
        return can_coarsen(self.gx) and can_coarsen(self.gy)

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Complex coordinates of all unknowns, each of shape ``self.shape``."""
        return np.meshgrid(self.gx.interior, self.gy.interior, indexing="ij")

    def real_mask(self) -> np.ndarray:
        """True at unknowns lying inside the real square ``[0, a]^2``."""
        def axis(g):
            idx = np.arange(1, g.cells)
            return (idx >= g.m_lo) & (idx <= g.m_lo + g.n)
        mx, my = axis(self.gx), axis(self.gy)
        return mx[:, None] & my[None, :]


def square_grid(n, m_lo=0, m_hi=0, a=1.0, w=0.0, theta=np.pi / 6) -> TensorGrid2D:
    g = build_grid(n, m_lo, m_hi, a, w, theta)
    return TensorGrid2D(g, g)
