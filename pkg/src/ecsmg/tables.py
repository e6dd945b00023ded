"""Built-in configurations reproducing the four benchmark tables.

Layer widths are not given with the tables; every axis here uses layers
whose complex cells have the same modulus as the real cells (``|h_gamma| = h``).
For MP1 that is width 0.25 on the unit square.
"""
from __future__ import annotations

import math

from .config import ExperimentConfig
from .krylov import KrylovConfig
from .multigrid import MgConfig
from .operators import AxisSpec, ModelProblem
from .preconditioners import PreconditionerSpec

THETA = math.pi / 6


def _mg(cycle, smoother, omega):
    gf, gc = cycle
    return MgConfig(nu1=1, nu2=1, gamma_f=gf, gamma_c=gc, smoother=smoother, omega=omega)


def _row(table, name, model, prec, mg, reference, lambda0_source="reference"):
    return ExperimentConfig(
        name=f"table{table}-{name}", model=model, preconditioner=prec,
        multigrid=mg, krylov=KrylovConfig(tol=1e-6, max_iter=3000),
        lambda0_source=lambda0_source if prec.kind == "qd" else "n/a",
        reference=dict(reference, table=table))


def mp1_model(k=160.0, n=256, m=64, a=1.0):
    ax = AxisSpec(n=n, m_lo=m, m_hi=m, a=a, w=a * m / n, theta=THETA)
    return ModelProblem("MP1", k, ax)


def half_layer_model(kind, k, a, n, m, nu=0.0):
    ax = AxisSpec(n=n, m_lo=0, m_hi=m, a=a, w=a * m / n, theta=THETA)
    return ModelProblem(kind, k, ax, nu=nu)


def table_configs(table: int) -> list:
    if table == 1:
        model = mp1_model()
        return [
            _row(1, "csl", model, PreconditionerSpec("csl", beta1=-1, beta2=-0.3),
                 _mg((1, 4), "jacobi", 0.8),
                 {"mg_conv": 0.43, "mg_cycles": 17, "iterations": 60, "cputime": "2m 11s"}),
            _row(1, "csg", model, PreconditionerSpec("csg", theta_alpha=math.pi / 14),
                 _mg((1, 3), "jacobi", 0.8),
                 {"mg_conv": 0.39, "mg_cycles": 15, "iterations": 62, "cputime": "2m 2s"}),
            _row(1, "qd", model, PreconditionerSpec("qd", lambda0=-2.6e4),
                 _mg((1, 1), "rb_jacobi", 1.0),
                 {"mg_conv": 0.09, "mg_cycles": 6, "iterations": 170, "cputime": "5m 39s",
                  "warm_start_benefit": 50}),
        ]
    if table == 2:
        model = half_layer_model("MP2", 4.0, 50.0, 512, 128, nu=7.0)
        return [
            _row(2, "csl", model, PreconditionerSpec("csl", beta1=-1, beta2=-0.4),
                 _mg((1, 3), "jacobi", 0.5),
                 {"mg_conv": 0.53, "mg_cycles": 22, "iterations": 137, "cputime": "7m 34s"}),
            _row(2, "csg", model, PreconditionerSpec("csg", theta_alpha=math.pi / 17),
                 _mg((1, 3), "jacobi", 0.5),
                 {"mg_conv": 0.53, "mg_cycles": 22, "iterations": 143, "cputime": "7m 36s"}),
            _row(2, "qd", model, PreconditionerSpec("qd", lambda0=-16.88),
                 _mg((1, 1), "rb_jacobi", 1.0),
                 {"mg_conv": 0.15, "mg_cycles": 8, "iterations": 357, "cputime": "19m 40s"}),
        ]
    if table == 3:
        model = half_layer_model("MP3", 2.0, 50.0, 512, 128)
        return [
            _row(3, "csl", model, PreconditionerSpec("csl", beta1=-1, beta2=-0.6),
                 _mg((1, 2), "jacobi", 0.8),
                 {"mg_conv": 0.32, "mg_cycles": 13, "iterations": 60, "cputime": "3m 9s"}),
            _row(3, "csg", model, PreconditionerSpec("csg", theta_alpha=math.pi / 13),
                 _mg((1, 2), "jacobi", 0.8),
                 {"mg_conv": 0.32, "mg_cycles": 13, "iterations": 61, "cputime": "3m 10s"}),
            _row(3, "qd", model, PreconditionerSpec("qd", lambda0=-4.19),
                 _mg((1, 1), "rb_jacobi", 1.05),
                 {"mg_conv": 0.17, "mg_cycles": 8, "iterations": 164, "cputime": "9m"}),
        ]
    if table == 4:
        model = half_layer_model("MP3", 4.0, 75.0, 768, 128)
        return [
            _row(4, "csl", model, PreconditionerSpec("csl", beta1=-1, beta2=-0.6),
                 _mg((1, 4), "jacobi", 0.8),
                 {"mg_conv": 0.32, "mg_cycles": 13, "iterations": 210, "cputime": "18m 20s"}),
            _row(4, "csg", model, PreconditionerSpec("csg", theta_alpha=math.pi / 13),
                 _mg((1, 3), "jacobi", 0.8),
                 {"mg_conv": 0.31, "mg_cycles": 12, "iterations": 160, "cputime": "14m 14s"}),
            _row(4, "qd", model, PreconditionerSpec("qd", lambda0=-16.18),
                 _mg((1, 1), "rb_jacobi", 1.05),
                 {"mg_conv": 0.13, "mg_cycles": 7, "iterations": 545, "cputime": "46m 40s"}),
        ]
    raise ValueError(f"no built-in configuration for table {table}")


TABLE_IDS = (1, 2, 3, 4)
