"""Geometric multigrid with rediscretized coarse operators.

One cycle follows the generalized recursion

    MG(l, gamma_f, gamma_c):
        pre-smooth nu1 times
        restrict the residual
        e = 0
        for i in 1..gamma_c:
            e = MG(l+1, gamma_f, gamma_c) if i == 1 else MG(l+1, gamma_c, gamma_f)
        prolongate and add e, post-smooth nu2 times

with an exact solve at the coarsest level.  ``(1, 1)`` is a V-cycle,
``(2, 2)`` a W-cycle, ``(1, 2)`` an F-cycle and ``(1, g)`` an F-cycle with
``g - 1`` extra V-cycle recursions on every coarse level.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .grid import GridError, TensorGrid2D
from .operators import DENSE_CAP, OperatorSpec, StencilOperator, apply, discretize, to_sparse

log = logging.getLogger(__name__)

SMOOTHERS = ("jacobi", "rb_jacobi")


class MultigridError(RuntimeError):
    pass


class SingularCoarseOperator(MultigridError):
    pass


@dataclass(frozen=True)
class MgConfig:
    nu1: int = 1
    nu2: int = 1
    gamma_f: int = 1
    gamma_c: int = 1
    smoother: str = "rb_jacobi"
    omega: float = 1.0
    levels: Optional[int] = None
    coarse_cap: int = 1024
    tol: float = 1e-6
    max_cycles: int = 100
    literal_swap: bool = True

    def __post_init__(self):
        if self.nu1 < 0 or self.nu2 < 0:
            raise ValueError("smoothing counts must be >= 0")
        if self.gamma_f < 1 or self.gamma_c < 1:
            raise ValueError("cycle indices must be >= 1")
        if not self.omega > 0:
            raise ValueError("relaxation weight must be positive")
        if self.smoother not in SMOOTHERS:
            raise ValueError(f"unknown smoother {self.smoother!r}")

    @property
    def label(self) -> str:
        g = (self.gamma_f, self.gamma_c)
        if g == (1, 1):
            name = "V"
        elif g == (2, 2):
            name = "W"
        else:
            name = f"F_{self.gamma_f}^{self.gamma_c}"
        return f"{name}({self.nu1},{self.nu2})"


@dataclass(eq=False)
class Level:
    grid: TensorGrid2D
    op: StencilOperator


@dataclass(eq=False)
class Hierarchy:
    """Levels ``0`` (finest) to ``C`` (coarsest) and the coarse LU factors."""
    levels: list
    spec: Optional[OperatorSpec] = None
    lu: tuple = field(default=None, repr=False)

    @property
    def coarsest(self) -> int:
        return len(self.levels) - 1

    def op(self, l: int) -> StencilOperator:
        return self.levels[l].op

    def grid(self, l: int) -> TensorGrid2D:
        return self.levels[l].grid


def factorize(op: StencilOperator, cap: int = DENSE_CAP):
    if op.size > cap:
        raise MultigridError(f"coarsest level has {op.size} unknowns, dense cap is {cap}")
    A = to_sparse(op).toarray()
    lu, piv = sla.lu_factor(A, check_finite=True)
    diag = np.abs(np.diag(lu))
    if diag.min() <= 1e-14 * max(diag.max(), 1e-300):
        raise SingularCoarseOperator("coarsest-level operator is numerically singular")
    return lu, piv


def coarsest_solve(lu, b: np.ndarray) -> np.ndarray:
    shape = b.shape
    return sla.lu_solve(lu, b.reshape(-1)).reshape(shape)


def hierarchy_from_operators(ops) -> Hierarchy:
    """Hierarchy from explicitly given level operators (tests, custom setups)."""
    levels = [Level(op.grid, op) for op in ops]
    return Hierarchy(levels, None, factorize(ops[-1]))


def build_hierarchy(spec: OperatorSpec, grid: Optional[TensorGrid2D] = None,
                    levels: Optional[int] = None, coarse_cap: int = 1024) -> Hierarchy:
    """Rediscretize ``spec`` on successively coarsened grids.

    Without ``levels`` the grid is halved while possible and while the level
    still has more than ``coarse_cap`` unknowns.
    """
    if grid is None:
        grid = spec.base.grid()
    grids = [grid]
    if levels is not None:
        if levels < 1:
            raise ValueError("need at least one level")
        for _ in range(levels - 1):
            if not grids[-1].can_coarsen():
                raise GridError(f"grid with shape {grids[-1].shape} cannot be coarsened "
                                f"to {levels} levels")
            grids.append(grids[-1].coarsen())
    else:
        while grids[-1].size > coarse_cap and grids[-1].can_coarsen():
            grids.append(grids[-1].coarsen())
    lv = [Level(g, discretize(spec, g)) for g in grids]
    return Hierarchy(lv, spec, factorize(lv[-1].op))


def hierarchy_for(mg: MgConfig, spec: OperatorSpec, grid=None) -> Hierarchy:
    return build_hierarchy(spec, grid, mg.levels, mg.coarse_cap)


# -- smoothing -------------------------------------------------------------

def _red_mask(shape):
    i, j = np.indices(shape)
    return (i + j) % 2 == 0


_mask_cache: dict = {}


def red_mask(shape) -> np.ndarray:
    m = _mask_cache.get(shape)
    if m is None:
        m = _mask_cache[shape] = _red_mask(shape)
    return m


def smooth(op: StencilOperator, u: np.ndarray, b: np.ndarray, smoother: str = "jacobi",
           sweeps: int = 1, omega: float = 1.0) -> np.ndarray:
    """Weighted (red-black) Jacobi sweeps; returns a new array."""
    u = np.array(u, dtype=complex).reshape(op.shape)
    b = np.asarray(b).reshape(op.shape)
    if sweeps == 0:
        return u
    D = op.diagonal
    if np.any(D == 0):
        raise ZeroDivisionError("smoother needs a nonzero diagonal")
    winv = omega / D
    if smoother == "jacobi":
        for _ in range(sweeps):
            u += winv * (b - apply(op, u))
    elif smoother == "rb_jacobi":
        red = red_mask(op.shape)
        black = ~red
        for _ in range(sweeps):
            r = b - apply(op, u)
            u[red] += winv[red] * r[red]
            r = b - apply(op, u)
            u[black] += winv[black] * r[black]
    else:
        raise ValueError(f"unknown smoother {smoother!r}")
    return u


# -- grid transfers ----------------------------------------------------------

def _check_pair(fine_shape, coarse_shape):
    for nf, nc in zip(fine_shape, coarse_shape):
        if nf != 2 * nc + 1:
            raise GridError(f"shapes {fine_shape} and {coarse_shape} are not a coarsening pair")


def _fw_axis0(f):
    return 0.25 * f[0:-2:2] + 0.5 * f[1:-1:2] + 0.25 * f[2::2]


def restrict_fw(fine: np.ndarray, fine_grid: TensorGrid2D, coarse_grid: TensorGrid2D) -> np.ndarray:
    """Full weighting, ``1/16 [1 2 1; 2 4 2; 1 2 1]`` at coarse-coincident nodes."""
    f = np.asarray(fine).reshape(fine_grid.shape)
    _check_pair(fine_grid.shape, coarse_grid.shape)
    t = _fw_axis0(f)
    return _fw_axis0(t.T).T


def _interp_axis0(c):
    n = c.shape[0]
    out = np.empty((2 * n + 1,) + c.shape[1:], dtype=c.dtype)
    out[1::2] = c
    out[2:-1:2] = 0.5 * (c[:-1] + c[1:])
    out[0] = 0.5 * c[0]
    out[-1] = 0.5 * c[-1]
    return out


def prolong_bilinear(coarse: np.ndarray, coarse_grid: TensorGrid2D, fine_grid: TensorGrid2D) -> np.ndarray:
    """Bilinear interpolation with zero Dirichlet values on the boundary."""
    c = np.asarray(coarse).reshape(coarse_grid.shape)
    _check_pair(fine_grid.shape, coarse_grid.shape)
    return _interp_axis0(_interp_axis0(c).T).T


# -- cycles ------------------------------------------------------------------

def mg_cycle(l: int, hier: Hierarchy, b: np.ndarray, u: Optional[np.ndarray], cfg: MgConfig,
             gamma_f: Optional[int] = None, gamma_c: Optional[int] = None,
             trace: Optional[list] = None) -> np.ndarray:
    """One cycle of the generalized multigrid recursion starting at level ``l``.

    ``trace`` (if given) receives the level index every time work happens on
    a level: on entry and after each return from a coarser level.
    """
    gf = cfg.gamma_f if gamma_f is None else gamma_f
    gc = cfg.gamma_c if gamma_c is None else gamma_c
    op = hier.op(l)
    b = np.asarray(b).reshape(op.shape)
    if trace is not None:
        trace.append(l)
    if l == hier.coarsest:
        return coarsest_solve(hier.lu, b)
    if u is None:
        u = np.zeros(op.shape, dtype=complex)
    u = smooth(op, u, b, cfg.smoother, cfg.nu1, cfg.omega)
    r = b - apply(op, u)
    rc = restrict_fw(r, hier.grid(l), hier.grid(l + 1))
    e = np.zeros_like(rc)
    for i in range(1, gc + 1):
        if i == 1 or not cfg.literal_swap:
            e = mg_cycle(l + 1, hier, rc, e, cfg, gf, gc, trace)
        else:
            e = mg_cycle(l + 1, hier, rc, e, cfg, gc, gf, trace)
        if trace is not None:
            trace.append(l)
    u = u + prolong_bilinear(e, hier.grid(l + 1), hier.grid(l))
    return smooth(op, u, b, cfg.smoother, cfg.nu2, cfg.omega)


def cycle_trace(levels: int, gamma_f: int, gamma_c: int, literal_swap: bool = True) -> list:
    """Level-visit trace of one cycle, without doing any arithmetic."""
    out = []

    def rec(l, gf, gc):
        out.append(l)
        if l == levels - 1:
            return
        for i in range(1, gc + 1):
            if i == 1 or not literal_swap:
                rec(l + 1, gf, gc)
            else:
                rec(l + 1, gc, gf)
            out.append(l)

    rec(0, gamma_f, gamma_c)
    return out


@dataclass
class MgSolveResult:
    u: np.ndarray
    conv_factor: float
    cycles: int
    status: str
    residuals: list
    seconds: float = 0.0

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def __iter__(self):
        return iter((self.u, self.conv_factor, self.cycles))


def conv_factor(residuals, last: int = 5) -> float:
    """Geometric mean of the last ``last`` residual reduction factors."""
    res = [r for r in residuals]
    k = min(last, len(res) - 1)
    if k <= 0:
        return float("nan")
    if res[-1 - k] == 0:
        return 0.0
    return float((res[-1] / res[-1 - k]) ** (1.0 / k))


def standalone_solve(hier: Hierarchy, b: np.ndarray, cfg: MgConfig,
                     u0: Optional[np.ndarray] = None, tol: Optional[float] = None,
                     max_cycles: Optional[int] = None) -> MgSolveResult:
    """Iterate cycles on ``A_0 u = b`` until the relative residual drops below ``tol``.

    Status is ``converged``, ``diverged`` (residual grew three cycles in a
    row), ``stalled`` (five cycles with reduction factor above 0.999) or
    ``max_cycles``.
    """
    import time
    t0 = time.perf_counter()
    tol = cfg.tol if tol is None else tol
    max_cycles = cfg.max_cycles if max_cycles is None else max_cycles
    op = hier.op(0)
    b = np.asarray(b).reshape(op.shape)
    u = np.zeros(op.shape, dtype=complex) if u0 is None else np.array(u0, dtype=complex).reshape(op.shape)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return MgSolveResult(np.zeros(op.shape, dtype=complex), 0.0, 0, "converged", [0.0])
    res = [np.linalg.norm(b - apply(op, u))]
    status = "max_cycles"
    grow = flat = 0
    for cycle in range(1, max_cycles + 1):
        u = mg_cycle(0, hier, b, u, cfg)
        res.append(np.linalg.norm(b - apply(op, u)))
        ratio = res[-1] / res[-2] if res[-2] > 0 else 0.0
        grow = grow + 1 if ratio > 1 else 0
        flat = flat + 1 if ratio > 0.999 else 0
        if res[-1] <= tol * bnorm:
            status = "converged"
            break
        if grow >= 3:
            status = "diverged"
            break
        if flat >= 5:
            status = "stalled"
            break
    cycles = len(res) - 1
    rho = conv_factor(res)
    log.debug("standalone MG: %s after %d cycles, conv %.3g", status, cycles, rho)
    return MgSolveResult(u, rho, cycles, status, res, time.perf_counter() - t0)


class MultigridPreconditioner:
    """Callable applying one cycle with zero initial guess; counts cycles."""

    def __init__(self, hier: Hierarchy, cfg: MgConfig):
        self.hier = hier
        self.cfg = cfg
        self.cycles = 0

    def __call__(self, r: np.ndarray) -> np.ndarray:
        self.cycles += 1
        shape = np.shape(r)
        return mg_cycle(0, self.hier, r, None, self.cfg).reshape(shape)


def levels_for(grid: TensorGrid2D, coarse_cap: int = 1024) -> int:
    n = 1
    while grid.size > coarse_cap and grid.can_coarsen():
        grid = grid.coarsen()
        n += 1
    return n


__all__ = [
    "MgConfig", "Hierarchy", "Level", "build_hierarchy", "hierarchy_for",
    "hierarchy_from_operators", "smooth", "restrict_fw", "prolong_bilinear",
    "mg_cycle", "cycle_trace", "coarsest_solve", "standalone_solve",
    "MgSolveResult", "MultigridPreconditioner", "conv_factor", "factorize",
    "MultigridError", "SingularCoarseOperator", "levels_for",
]
