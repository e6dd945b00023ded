import math

import numpy as np
import pytest

from ecsmg.operators import ConfigurationError, OperatorSpec, assemble_dense, discretize
from ecsmg.preconditioners import (PreconditionerSpec, build_preconditioner,
                                   preconditioner_grid, qd_delta,
                                   qd_scale, resolve_lambda0)
from ecsmg.spectral import dense_eigenvalues
from ecsmg.tables import mp1_model

from conftest import small_model


def dense(model, spec):
    return assemble_dense(build_preconditioner(model, model.grid(), spec))


def Zdense(model):
    return assemble_dense(discretize(OperatorSpec(model)))


def test_qd_unit_scaling():
    m = small_model("MP2", 3.0, n=8, m_lo=0, m_hi=2, nu=2.0)
    M = dense(m, PreconditionerSpec("qd", lambda0=-1.0))
    np.testing.assert_allclose(M, (1 - 1j) * np.eye(M.shape[0]) + Zdense(m), atol=1e-12)


def test_csl_degenerates_to_model():
    # beta = (-1, 0) is Z itself; it is refused because it does not damp
    m = small_model("MP1", 7.0)
    spec0 = OperatorSpec(m, k2_coeff=complex(-1, 0))
    np.testing.assert_allclose(assemble_dense(discretize(spec0)), Zdense(m))
    with pytest.raises(ConfigurationError):
        PreconditionerSpec("csl", beta1=-1, beta2=0)


def test_laplacian_and_none():
    m = small_model("MP3", 2.0, n=8, m_lo=0, m_hi=2)
    L = dense(m, PreconditionerSpec("laplacian"))
    ref = assemble_dense(discretize(OperatorSpec(m, k2_coeff=0.0)))
    np.testing.assert_array_equal(L, ref)
    np.testing.assert_array_equal(dense(m, PreconditionerSpec("none")), np.eye(L.shape[0]))


def test_csg_uses_rotated_mesh_widths():
    m = small_model("MP1", 4.0)
    M = dense(m, PreconditionerSpec("csg", theta_alpha=math.pi / 13))
    ref = assemble_dense(discretize(OperatorSpec(m, mesh_scale=np.exp(1j * math.pi / 13))))
    np.testing.assert_array_equal(M, ref)


def test_qd_quadrant_definite_table1_parameters():
    m = mp1_model(k=160.0, n=16, m=4)
    ev = dense_eigenvalues(dense(m, PreconditionerSpec("qd", lambda0=-2.6e4)))
    assert ev.real.min() >= -1e-10
    assert ev.imag.max() <= 1e-10


@pytest.mark.parametrize("kind,k", [("MP1", 12.0), ("MP2", 3.0), ("MP3", 2.0)])
def test_qd_commutes_and_maps_spectrum(kind, k):
    m = small_model(kind, k, n=8, m_lo=2 if kind == "MP1" else 0, m_hi=2, nu=4.0)
    Z = Zdense(m)
    lam0 = resolve_lambda0(m, PreconditionerSpec("qd"))
    M = dense(m, PreconditionerSpec("qd", lambda0=lam0))
    comm = np.linalg.norm(M @ Z - Z @ M)
    assert comm <= 1e-10 * np.linalg.norm(Z) * np.linalg.norm(M)
    mu = dense_eigenvalues(M)
    lam = dense_eigenvalues(Z)
    mapped = (1 - 1j) + lam / abs(lam0.real)
    for x in mapped:
        assert np.min(np.abs(mu - x)) <= 1e-9 * max(1, abs(x))


def test_csl_spectrum_damped():
    m = mp1_model(k=40.0, n=16, m=4)
    ev = dense_eigenvalues(dense(m, PreconditionerSpec("csl", beta1=-1, beta2=-0.5)))
    assert ev.imag.max() <= 1e-10
    # distance from the origin, relative to |beta2| k^2 (measured, not derived)
    assert np.abs(ev).min() / (0.5 * 40.0 ** 2) > 0.1


def test_qd_delta_examples():
    assert qd_delta(-25600) == pytest.approx(1 / 160)
    assert qd_delta(-1) == 1.0
    assert qd_delta(-4) == 0.5
    with pytest.raises(ConfigurationError):
        qd_delta(0)


def test_qd_scale_variants():
    assert qd_scale(-4 + 3j) == 0.25
    assert qd_scale(-4 + 3j, use_modulus=True) == 0.2
    with pytest.raises(ConfigurationError):
        qd_scale(3j)


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        PreconditionerSpec("ilu")
    with pytest.raises(ConfigurationError):
        PreconditionerSpec("csl", beta2=0.0)
    with pytest.raises(ConfigurationError):
        PreconditionerSpec("csg", theta_alpha=2.0)
    m = small_model()
    with pytest.raises(ConfigurationError):
        resolve_lambda0(m, PreconditionerSpec("qd", lambda0=None))
    with pytest.raises(ConfigurationError):
        resolve_lambda0(m, PreconditionerSpec("qd", lambda0="guess"))


def test_csl_real_grid_option():
    m = small_model("MP1", 4.0)
    g = preconditioner_grid(m.grid(), PreconditionerSpec("csl", beta2=-0.5, real_grid=True))
    assert np.all(g.gx.nodes.imag == 0)
    g2 = preconditioner_grid(m.grid(), PreconditionerSpec("csl", beta2=-0.5))
    assert g2 == m.grid()
