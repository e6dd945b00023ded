"""Right-preconditioned Bi-CGSTAB in complex arithmetic."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .multigrid import Hierarchy, MgConfig, MultigridError, standalone_solve

log = logging.getLogger(__name__)

BREAKDOWN_EPS = 1e-14


@dataclass(frozen=True)
class KrylovConfig:
    tol: float = 1e-6
    max_iter: int = 2000
    warm_start: bool = False
    warm_start_tol: float = 1e-2
    # "minres": rescale the guess by the scalar minimizing ||b - A(alpha x0)||;
    # "none": use the preconditioner solution as is
    warm_start_scale: str = "minres"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.warm_start_scale not in ("minres", "none"):
            raise ValueError(f"unknown warm_start_scale {self.warm_start_scale!r}")
        if self.warm_start and not self.warm_start_tol > self.tol:
            raise ValueError("warm-start tolerance must be looser than the outer tol")


@dataclass
class SolveReport:
    iterations: int = 0
    converged: bool = False
    status: str = "running"
    residuals: list = field(default_factory=list)
    recursive_residuals: list = field(default_factory=list)
    mg_cycles: int = 0
    warm_start_cycles: int = 0
    seconds: float = 0.0
    config: dict = field(default_factory=dict)

    @property
    def relative_residual(self) -> float:
        return self.residuals[-1] / self.residuals[0] if self.residuals and self.residuals[0] else 0.0


def _vdot(a, b):
    # np.vdot conjugates the first argument and reduces in a fixed order
    return np.vdot(a, b)


def bicgstab(A: Callable, M_inv: Optional[Callable], b: np.ndarray,
             x0: Optional[np.ndarray] = None, config: KrylovConfig = KrylovConfig(),
             bnorm: Optional[float] = None):
    """Solve ``A x = b`` with right preconditioning ``A M^{-1} y = b, x = M^{-1} y``.

    ``A`` and ``M_inv`` act on flat vectors.  The shadow vector is the
    initial residual.  Convergence is tested on the true residual
    ``||b - A x|| <= tol ||b||``; both true and recursive residual norms are
    recorded after every iteration.

    Returns ``(x, report)``.
    """
    t0 = time.perf_counter()
    b = np.asarray(b, dtype=complex).reshape(-1)
    if M_inv is None:
        M_inv = lambda v: v  # noqa: E731
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=complex).reshape(-1)
    bnorm = np.linalg.norm(b) if bnorm is None else bnorm
    rep = SolveReport(config={"tol": config.tol, "max_iter": config.max_iter})

    r = b - A(x) if x0 is not None else b.copy()
    rnorm = np.linalg.norm(r)
    rep.residuals.append(rnorm)
    rep.recursive_residuals.append(rnorm)
    if bnorm == 0:
        rep.converged, rep.status = True, "converged"
        rep.seconds = time.perf_counter() - t0
        return np.zeros_like(b), rep
    if rnorm <= config.tol * bnorm:
        rep.converged, rep.status = True, "converged"
        rep.seconds = time.perf_counter() - t0
        return x, rep

    r_hat = r.copy()
    rho = alpha = omega = 1.0 + 0j
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    r_hat_norm = rnorm

    for it in range(1, config.max_iter + 1):
        rho_new = _vdot(r_hat, r)
        if abs(rho_new) < BREAKDOWN_EPS * r_hat_norm * np.linalg.norm(r):
            rep.status = "breakdown_rho"
            break
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        p = r + beta * (p - omega * v)
        p_hat = M_inv(p)
        v = A(p_hat)
        denom = _vdot(r_hat, v)
        if abs(denom) < BREAKDOWN_EPS * r_hat_norm * np.linalg.norm(v):
            rep.status = "breakdown_alpha"
            break
        alpha = rho / denom
        s = r - alpha * v
        s_hat = M_inv(s)
        t = A(s_hat)
        tt = _vdot(t, t).real
        omega = _vdot(t, s) / tt if tt > 0 else 0.0
        x = x + alpha * p_hat + omega * s_hat
        r = s - omega * t
        rep.iterations = it
        rep.recursive_residuals.append(np.linalg.norm(r))
        true_r = np.linalg.norm(b - A(x))
        rep.residuals.append(true_r)
        if true_r <= config.tol * bnorm:
            rep.converged, rep.status = True, "converged"
            break
        if abs(omega) < BREAKDOWN_EPS:
            rep.status = "breakdown_omega"
            break
    else:
        rep.status = "max_iter"
    rep.seconds = time.perf_counter() - t0
    log.info("Bi-CGSTAB %s after %d iterations (rel. residual %.2e)",
             rep.status, rep.iterations, rep.relative_residual)
    return x, rep


def rescale_guess(A: Callable, x0: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``alpha * x0`` with ``alpha`` minimizing ``||b - alpha A x0||``.

    A preconditioner solution lives in the preconditioner's units (for QD a
    factor ``|Re lambda0|`` away from the target operator), so it is only a
    useful starting guess after this one-dimensional correction.
    """
    x0 = np.asarray(x0).reshape(-1)
    Ax = A(x0)
    nn = _vdot(Ax, Ax).real
    if nn == 0:
        return np.zeros_like(x0, dtype=complex)
    return (_vdot(Ax, np.asarray(b).reshape(-1)) / nn) * x0


def warm_start_guess(hier: Hierarchy, b: np.ndarray, inner_tol: float, mg: MgConfig):
    """Approximate ``M x = b`` by standalone multigrid to ``inner_tol``.

    Returns ``(x0, cycles)``; raises on multigrid divergence.
    """
    b = np.asarray(b)
    if not np.any(b):
        return np.zeros(b.shape, dtype=complex), 0
    res = standalone_solve(hier, b, mg, tol=inner_tol)
    if res.status == "diverged":
        raise MultigridError("multigrid diverged while computing the warm start")
    return res.u.reshape(b.shape), res.cycles
