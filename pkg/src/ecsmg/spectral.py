"""Spectra of ECS-discretized operators.

The eigenvalues of the 1D ECS Laplacian (real segment of ``n`` cells with
width ``h`` followed by a complex contour of ``m`` cells with width
``gamma * h``) are the zeros of a closed-form characteristic function.  With
``cos 2p = 1 - lam h^2 / 2`` and ``sin q = gamma sin p`` the pole-free form is

    G(lam) = cos p cos(2np) sin(2mq) + cos q cos(2mq) sin(2np)

and ``F = G / (cos(2np) sin(2mq) cos q)`` is the tangent form.  The zeros
sit on a Y-shaped pitchfork: a branch near ``[0, 4/h^2]``, a branch along the
rotated segment ``[0, 4/h_gamma^2]`` and a short tail near the origin.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .grid import EcsGrid1D, TensorGrid2D, build_grid
from .operators import DENSE_CAP, OperatorSpec, assemble_dense, discretize

SERIES_CUTOFF = 1e-12
# dense_2d lambda0 estimates coarsen to at most this many unknowns (32 x 32)
LAMBDA0_DENSE_UNKNOWNS = 1024


class PoleError(ArithmeticError):
    """The tangent form of the characteristic function is singular here."""


@dataclass(frozen=True)
class PitchforkParams:
    n: int
    m: int
    h: float
    gamma: complex

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        if self.gamma == 0:
            raise ValueError("gamma must be nonzero")

    @property
    def h_gamma(self) -> complex:
        return self.gamma * self.h

    @property
    def R_z(self) -> complex:
        """End point of the complex contour."""
        return self.n * self.h + self.m * self.h_gamma

    @classmethod
    def from_grid(cls, grid: EcsGrid1D) -> PitchforkParams:
        if grid.m_lo or not grid.m_hi:
            raise ValueError("pitchfork parameters need a grid with a high layer only")
        return cls(grid.n, grid.m_hi, grid.h, grid.gamma)

    def grid(self) -> EcsGrid1D:
        """A 1D ECS grid with these parameters (real segment length ``n h``)."""
        a = self.n * self.h
        g = complex(self.gamma)
        w = abs(g) * self.m * self.h
        return build_grid(self.n, 0, self.m, a, w, cmath.phase(g))


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    labels: list = field(default_factory=list)
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    failed_seeds: list = field(default_factory=list)

    def __len__(self):
        return len(self.eigenvalues)


def _angles(lam, p: PitchforkParams):
    """``(p, q)`` with principal ``p`` and ``q`` matched so ``sin q = gamma sin p``."""
    s = lam * p.h * p.h
    pp = 0.5 * np.arccos(1 - s / 2 + 0j)
    qq = 0.5 * np.arccos(1 - s * p.gamma * p.gamma / 2 + 0j)
    target = p.gamma * np.sin(pp)
    flip = np.abs(np.sin(qq) - target) > np.abs(np.sin(-qq) - target)
    return pp, np.where(flip, -qq, qq)


def _f_series(lam, p: PitchforkParams):
    s = lam * p.h * p.h
    g2 = p.gamma * p.gamma
    ratio = p.n / (p.m * p.gamma) * (1 + s * (1 - g2) / 24
                                     + s * (p.n ** 2 - p.m ** 2 * g2) / 3)
    return ratio + 1 - s * (1 - g2) / 8


def characteristic_F(lam: complex, p: PitchforkParams) -> complex:
    """Tangent form ``tan(2np)/tan(2mq) + cos p / cos q``.

    Near ``lam = 0`` the removable singularity is evaluated by series.
    Raises :class:`PoleError` where the tangent form is singular.
    """
    lam = complex(lam)
    if abs(lam) * p.h * p.h < SERIES_CUTOFF:
        return complex(_f_series(lam, p))
    pp, qq = _angles(lam, p)
    t2 = np.tan(2 * p.m * qq)
    cq = np.cos(qq)
    c2n = np.cos(2 * p.n * pp)
    if abs(t2) < 1e-300 or abs(cq) < 1e-300 or abs(c2n) < 1e-300:
        raise PoleError(f"tangent form singular at lambda={lam}")
    return complex(np.tan(2 * p.n * pp) / t2 + np.cos(pp) / cq)


def _g_terms(lam, p: PitchforkParams):
    pp, qq = _angles(lam, p)
    t1 = np.cos(pp) * np.cos(2 * p.n * pp) * np.sin(2 * p.m * qq)
    t2 = np.cos(qq) * np.cos(2 * p.m * qq) * np.sin(2 * p.n * pp)
    return pp, qq, t1, t2


def characteristic_G(lam, p: PitchforkParams):
    """Pole-free characteristic function (vectorized over ``lam``)."""
    _, _, t1, t2 = _g_terms(np.asarray(lam, dtype=complex), p)
    return t1 + t2


def _g_relative(lam, p):
    """Relative size of the Newton correction at ``lam``: ``|G / G'| / |lam|``."""
    pp = np.arcsin(np.sqrt(complex(lam)) * p.h / 2)
    with np.errstate(all="ignore"):
        g, dg = _g_in_p(pp, p)
        if g == 0:
            return 0.0
        dlam = 4 * np.sin(2 * pp) / p.h ** 2
        r = abs(g / dg * dlam) / max(abs(lam), 1e-300)
    return float(r) if np.isfinite(r) else np.inf


def _q_of_p(pp, p: PitchforkParams):
    return np.arcsin(p.gamma * np.sin(pp))


def _g_in_p(pp, p: PitchforkParams):
    """G and dG/dp with ``q = arcsin(gamma sin p)`` (smooth through lam h^2 = 4)."""
    qq = _q_of_p(pp, p)
    n, m = p.n, p.m
    cp, sp_, cq, sq = np.cos(pp), np.sin(pp), np.cos(qq), np.sin(qq)
    c2n, s2n = np.cos(2 * n * pp), np.sin(2 * n * pp)
    c2m, s2m = np.cos(2 * m * qq), np.sin(2 * m * qq)
    g = cp * c2n * s2m + cq * c2m * s2n
    g_p = -sp_ * c2n * s2m - 2 * n * cp * s2n * s2m + 2 * n * cq * c2m * c2n
    g_q = 2 * m * cp * c2n * c2m - sq * c2m * s2n - 2 * m * cq * s2m * s2n
    return g, g_p + g_q * p.gamma * cp / cq


def _lam_of_p(pp, p):
    return 4 * np.sin(pp) ** 2 / p.h ** 2


def _newton(lam, p, known, maxiter=80, tol=1e-15):
    """Newton in the angle variable ``p``, deflated by known roots (in lam)."""
    pp = np.arcsin(np.sqrt(complex(lam)) * p.h / 2)
    with np.errstate(all="ignore"):
        for _ in range(maxiter):
            g, dg = _g_in_p(pp, p)
            if not (np.isfinite(g) and np.isfinite(dg)):
                return None
            if g == 0:
                break
            corr = dg / g
            if known:
                lam_p = _lam_of_p(pp, p)
                dlam = 4 * np.sin(2 * pp) / p.h ** 2
                corr -= sum(dlam / (lam_p - r) for r in known)
            if corr == 0 or not np.isfinite(corr):
                return None
            step = 1.0 / corr
            pp = pp - step
            if abs(step) <= tol * max(abs(pp), 1.0):
                break
        lam = _lam_of_p(pp, p)
    return complex(lam) if np.isfinite(lam) else None


def _seeds(p: PitchforkParams):
    n, m = p.n, p.m
    h_alpha = p.R_z / (n + m + 1)
    real = [(4 / p.h ** 2) * np.sin(j * np.pi / (2 * n)) ** 2 for j in range(1, n)]
    contour = [(4 / p.h_gamma ** 2) * np.sin(j * np.pi / (2 * m)) ** 2 for j in range(1, m)]
    tail = [(4 / h_alpha ** 2) * np.sin(j * np.pi / (2 * (n + m + 1))) ** 2
            for j in range(1, min(n + m, 8))]
    out = [(complex(s), "tail") for s in tail]
    out += [(complex(s), "real") for s in real]
    out += [(complex(s), "contour") for s in contour]
    return out


def _is_spurious(lam, p: PitchforkParams, rtol=1e-6):
    """Zeros of G at lam=0 or where both tangent-form terms blow up."""
    s = lam * p.h * p.h
    # G vanishes identically at the end points p = 0 and p = pi/2
    if abs(s) < 1e-10 or abs(s - 4) < 1e-9:
        return True
    pp, qq = _angles(lam, p)
    # a common zero of sin(2np) and sin(2mq) is genuine: the interface row
    # then fixes the ratio of the two sine amplitudes.  The cosine pair is not.
    if abs(np.cos(2 * p.n * pp)) < rtol and abs(np.cos(qq)) < rtol:
        return True
    return False


def find_pitchfork(p: PitchforkParams, count: Optional[int] = None,
                   resid_tol: float = 1e-10, dedup_rtol: float = 1e-8) -> SpectrumReport:
    """Locate the pitchfork eigenvalues as zeros of the pole-free form.

    Newton is seeded on the three branches; if that leaves roots missing,
    further seeds are run with deflation by the roots already found.  The
    recorded residual is the relative size of the last Newton step,
    ``|G / G'| / |lam|``.
    """
    total = p.n + p.m - 1
    if count is None:
        count = total
    if not 1 <= count <= total:
        raise ValueError(f"count must lie in [1, {total}]")

    roots: list[complex] = []
    labels: list[str] = []
    failed = []

    def accept(lam, label):
        """False only when the Newton run itself failed."""
        if lam is None or not np.isfinite(lam) or _g_relative(lam, p) > resid_tol:
            return False
        if _is_spurious(lam, p):
            return True
        scale = max(abs(lam), 1e-300)
        if not any(abs(lam - r) <= dedup_rtol * scale for r in roots):
            roots.append(complex(lam))
            labels.append(label)
        return True

    for seed, label in _seeds(p):
        if not accept(_newton(seed, p, None), label):
            failed.append(seed)

    if len(roots) < total:
        # deflated sweeps along all three branch segments
        ends = [4 / p.h ** 2, 4 / p.h_gamma ** 2, 4 * (p.n + p.m + 1) ** 2 / p.R_z ** 2]
        for frac in np.linspace(0.02, 1.0, 4 * total):
            for end in ends:
                if len(roots) >= total:
                    break
                seed = complex(frac * end) * (1 - 1e-3j)
                lam = _newton(seed, p, list(roots))
                if lam is not None:
                    lam = _newton(lam, p, None, maxiter=5)
                accept(lam, "deflated")
            if len(roots) >= total:
                break

    order = np.argsort(np.abs(roots), kind="stable")[:count]
    ev = np.array([roots[i] for i in order], dtype=complex)
    lab = [labels[i] for i in order]
    # deterministic output order: real part, then imaginary part
    order2 = np.lexsort((ev.imag, ev.real))
    ev = ev[order2]
    lab = [lab[i] for i in order2]
    res = np.array([_g_relative(lam, p) for lam in ev])
    return SpectrumReport(ev, lab, res, failed)


def dense_eigenvalues(matrix, cap: int = DENSE_CAP) -> np.ndarray:
    """All eigenvalues of a general complex matrix (LAPACK QR algorithm)."""
    A = np.asarray(matrix)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("need a square matrix")
    if A.shape[0] > cap:
        raise ValueError(f"dimension {A.shape[0]} exceeds the dense cap {cap}")
    return sla.eigvals(A, check_finite=True)


def laplacian_1d(grid: EcsGrid1D, mesh_scale=1.0) -> sp.csr_matrix:
    """Tridiagonal ``-d^2/dz^2`` on the interior nodes of a 1D ECS grid."""
    return operator_1d(grid, mesh_scale=mesh_scale)


def operator_1d(grid: EcsGrid1D, diag_extra=None, mesh_scale=1.0) -> sp.csr_matrix:
    from .operators import _neg_dzz
    w, c, e = _neg_dzz(grid, mesh_scale)
    if diag_extra is not None:
        c = c + diag_extra
    return sp.diags([w[1:], c, e[:-1]], [-1, 0, 1], format="csr")


def _factor_1d(spec: OperatorSpec, grid: EcsGrid1D, axis: int) -> np.ndarray:
    model = spec.base
    z = grid.interior
    extra = model.centrifugal_1d(z, axis)
    if spec.k2_coeff != 0:
        extra = extra + spec.k2_coeff * model.potential_1d(z, axis)
    A = operator_1d(grid, extra, spec.mesh_scale)
    return dense_eigenvalues(A.toarray())


def _coarse_for_dense(grid: TensorGrid2D, max_unknowns: int) -> TensorGrid2D:
    while grid.size > max_unknowns and grid.can_coarsen():
        grid = grid.coarsen()
    if grid.size > max_unknowns:
        raise ValueError(f"cannot coarsen below {grid.size} unknowns for dense eigensolve")
    return grid


def smallest_real_eigenvalue(spec: OperatorSpec, method: str = "dense_2d",
                             grid: Optional[TensorGrid2D] = None,
                             value: Optional[complex] = None,
                             max_unknowns: int = LAMBDA0_DENSE_UNKNOWNS) -> complex:
    """Eigenvalue of the operator with the smallest real part.

    ``dense_2d`` coarsens until at most ``max_unknowns`` remain and solves
    the dense problem; ``one_d_composition`` adds the extremal eigenvalues of
    the two 1D factor operators (exact for the separable model problems);
    ``config`` returns ``value`` unchanged.
    """
    if method == "config":
        if value is None:
            raise ValueError("method 'config' needs a value")
        return complex(value)
    if grid is None:
        grid = spec.base.grid()
    if method == "dense_2d":
        g = _coarse_for_dense(grid, max_unknowns)
        ev = dense_eigenvalues(assemble_dense(discretize(spec, g), cap=max_unknowns))
        return complex(ev[np.argmin(ev.real)])
    if method == "one_d_composition":
        z = spec.zz_scale
        mx = _factor_1d(spec, grid.gx, 0)
        my = _factor_1d(spec, grid.gy, 1)
        ex = mx[np.argmin((z * mx).real)]
        ey = my[np.argmin((z * my).real)]
        const = spec.k2_coeff * spec.base.k ** 2
        return complex(z * (ex + ey + const) + spec.shift)
    raise ValueError(f"unknown method {method!r}")


def enclosing_circle(k: float, delta: float) -> tuple[complex, float]:
    """Circle containing the spectrum of the QD-preconditioned operator.

    It is the image of the real axis under ``lam -> lam / (delta^2 lam + 1 - i k delta)``
    and passes through 0, ``1/delta^2`` and ``-i/(k delta^3)``.
    """
    if not (k > 0 and delta > 0):
        raise ValueError("k and delta must be positive")
    c = (0.5 - 0.5j / (k * delta)) / delta ** 2
    return complex(c), abs(c)


def spectrum_report(eigenvalues, labels=None, residuals=None) -> SpectrumReport:
    ev = np.asarray(eigenvalues, dtype=complex)
    order = np.lexsort((ev.imag, ev.real))
    ev = ev[order]
    labels = [labels[i] for i in order] if labels is not None else ["dense"] * len(ev)
    residuals = (np.asarray(residuals)[order] if residuals is not None
                 else np.full(len(ev), np.nan))
    return SpectrumReport(ev, labels, residuals)


__all__ = [
    "PitchforkParams", "SpectrumReport", "PoleError", "characteristic_F",
    "characteristic_G", "find_pitchfork", "dense_eigenvalues", "laplacian_1d",
    "operator_1d", "smallest_real_eigenvalue", "enclosing_circle", "spectrum_report",
]
