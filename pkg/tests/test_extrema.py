import math

import numpy as np
import pytest
import scipy.linalg

from conftest import rand_pd, rand_unitary
from pdorbit.extrema import (
    AlreadyExtremalError,
    PreconditionError,
    certify,
    common_eigenbasis,
    commuting_descent_curve,
    expm_skew,
    find_ascending_pair,
    gamma_map,
    lift_path,
    local_probe,
    probe_descent_curve,
    random_skew,
    rotation_block_identities,
    spectral_descent_path,
)
from pdorbit.majorization import majorizes
from pdorbit.matcore import random_pd
from pdorbit.procrustes import (
    OrbitMembershipError,
    OrbitPoint,
    ProcrustesInstance,
    global_maximizer,
    global_minimizer,
    min_value,
    objective,
    relative_matrix,
)
from pdorbit.uinorms import NormSpec, vector_norm

MU = np.array([5.0, 3.0, 0.5])


def misordered_3x3():
    inst = ProcrustesInstance(np.diag([3.0, 2.0, 1.0]), np.diag(MU))
    return inst, np.diag([MU[1], MU[0], MU[2]])


def generic_instance(d, seed):
    inst = ProcrustesInstance(random_pd(d, [seed, 0], 30.0), random_pd(d, [seed, 1], 30.0))
    c = OrbitPoint.from_unitary(inst, rand_unitary(d, np.random.default_rng([seed, 2])))
    return inst, c


def test_expm_skew_matches_scipy(rng):
    for d in (1, 2, 4):
        x = 3 * random_skew(d, rng)
        np.testing.assert_allclose(expm_skew(x), scipy.linalg.expm(x), atol=1e-12)


def test_certify_minimizer(rng):
    inst = ProcrustesInstance(rand_pd(3, rng), rand_pd(3, rng))
    cert = certify(inst, global_minimizer(inst).C)
    assert cert.verdict == "global_min"
    assert cert.gap_min < 1e-9
    assert cert.descent is None and cert.extremal
    assert abs(cert.value - cert.min_value) < 1e-10


def test_certify_maximizer_2x2():
    inst = ProcrustesInstance(np.diag([4.0, 1.0]), np.diag([9.0, 1.0]))
    cert = certify(inst, np.diag([1.0, 9.0]))
    assert cert.verdict == "global_max"
    assert cert.witness is not None
    assert abs(cert.value - math.hypot(math.log(4), math.log(9))) < 1e-12


def test_certify_maximizer_random(rng):
    inst = ProcrustesInstance(rand_pd(4, rng), rand_pd(4, rng))
    cert = certify(inst, global_maximizer(inst).C)
    assert cert.verdict == "global_max" and cert.gap_max < 1e-9


def test_certify_misordered_gives_rotation_curve():
    inst, c = misordered_3x3()
    cert = certify(inst, c)
    assert cert.verdict == "not_extremal" and not cert.extremal
    curve = cert.descent
    assert curve.kind == "commuting_rotation"
    assert curve.descends()
    assert curve.plane == (0, 1)


def test_certify_rejects_non_orbit_point():
    inst, _ = misordered_3x3()
    with pytest.raises(OrbitMembershipError):
        certify(inst, np.diag([5.0, 3.0, 0.6]))


def test_certify_non_strict_norm_flags_value_only():
    inst, _ = misordered_3x3()
    inst = inst.with_norm(NormSpec.spectral())
    cert = certify(inst, global_minimizer(inst).C)
    assert cert.verdict == "global_min" and cert.value_optimal_only
    cert = certify(inst.with_norm(NormSpec.schatten(2)), global_minimizer(inst).C)
    assert not cert.value_optimal_only


def test_certify_degenerate_flag():
    inst = ProcrustesInstance(np.diag([2.0, 2.0, 1.0]), np.diag(MU))
    cert = certify(inst, global_minimizer(inst).C)
    assert cert.verdict == "global_min" and cert.degenerate_spectrum


def test_rotation_trace_identity_hand_example():
    alpha, beta = (2.0, 1.0), (1.0, 3.0)
    trace, det = rotation_block_identities(*alpha, *beta, math.pi / 2)
    assert abs(trace - 2.5) < 1e-15
    assert abs(det - 1.5) < 1e-15
    # hand product: W(t) diag(beta) W(t)* against diag(1/alpha)
    for t in np.linspace(-1.5, 1.5, 13):
        w = np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]])
        block = np.diag(1 / np.array(alpha)) @ w @ np.diag(beta) @ w.T
        tr, dt = rotation_block_identities(*alpha, *beta, t)
        assert abs(np.trace(block) - (3.5 - math.sin(t) ** 2)) < 1e-14
        assert abs(np.trace(block) - tr) < 1e-14
        assert abs(np.linalg.det(block) - dt) < 1e-14


def test_rotation_curve_2x2():
    inst = ProcrustesInstance(np.diag([2.0, 1.0]), np.diag([3.0, 1.0]))
    curve = commuting_descent_curve(inst, np.diag([1.0, 3.0]))
    assert np.all(curve.residuals < 1e-12)
    assert -math.pi / 2 < curve.t.min() and curve.t.max() < math.pi / 2
    j0 = int(np.argmin(np.abs(curve.t)))
    assert curve.t[j0] == 0
    np.testing.assert_array_equal(curve.gammas[j0], np.eye(2))
    assert curve.values[j0] == objective(inst, np.diag([1.0, 3.0]))
    assert curve.descends()
    for j in range(len(curve.t)):
        g = curve.gammas[j]
        np.testing.assert_allclose(g.conj().T @ g, np.eye(2), atol=1e-14)


def test_rotation_curve_3x3_decreases():
    inst, c = misordered_3x3()
    curve = commuting_descent_curve(inst, c, 41)
    assert len(curve.t) == 41
    assert np.all(curve.residuals < 1e-12)
    assert curve.descends(1e-12)
    # each point stays in the orbit
    for j in (0, 20, 40):
        np.testing.assert_allclose(np.linalg.eigvalsh(curve.point(j))[::-1], MU, atol=1e-12)


def test_rotation_curve_preconditions(rng):
    inst, c = misordered_3x3()
    with pytest.raises(AlreadyExtremalError, match="ascending"):
        commuting_descent_curve(inst, global_minimizer(inst).C)
    inst2 = ProcrustesInstance(rand_pd(3, rng), np.diag(MU))
    with pytest.raises(PreconditionError):
        commuting_descent_curve(inst2, c)


def test_common_eigenbasis_degenerate_a():
    inst = ProcrustesInstance(np.diag([2.0, 2.0, 1.0]), np.diag(MU))
    u = rand_unitary(2, np.random.default_rng(0))
    c = np.diag(MU).astype(complex)
    c[:2, :2] = u @ np.diag([MU[1], MU[0]]) @ u.conj().T
    q, alpha, beta = common_eigenbasis(inst, c)
    np.testing.assert_allclose(alpha, [2, 2, 1], atol=1e-12)
    np.testing.assert_allclose(beta, [MU[0], MU[1], MU[2]], atol=1e-12)
    np.testing.assert_allclose(q.conj().T @ c @ q, np.diag(beta), atol=1e-12)
    assert find_ascending_pair(alpha, beta) is None


def test_spectral_path_endpoints_and_laws():
    inst, c = generic_instance(3, 4)
    path = spectral_descent_path(inst, c, 41)
    j0 = int(np.argmin(np.abs(path.t)))
    assert path.t[j0] == 0
    np.testing.assert_allclose(path.l[j0], relative_matrix(inst, c), atol=1e-12)
    spectra = path.log_spectra()
    for end in (0, -1):
        assert abs(abs(path.t[end]) - 1) == 0
        np.testing.assert_allclose(spectra[end], path.a.values, atol=1e-12)
    values = path.values(inst.norm)
    assert abs(values[0] - min_value(inst)) < 1e-9
    np.testing.assert_allclose(path.determinants(), path.tau, rtol=1e-8)
    ref_tau = np.linalg.det(np.array(c.C)).real / np.linalg.det(np.array(inst.A)).real
    assert abs(path.tau - ref_tau) < 1e-8 * ref_tau
    for s in spectra:
        assert majorizes(s, spectra[j0], 1e-9)
    mask = path.t != 0
    assert np.all(values[mask] < values[j0])


def test_spectral_path_rejects_aligned(rng):
    inst = ProcrustesInstance(rand_pd(3, rng), rand_pd(3, rng))
    with pytest.raises(AlreadyExtremalError):
        spectral_descent_path(inst, global_minimizer(inst).C)


def test_lift_2x2():
    inst, c = generic_instance(2, 5)
    path = spectral_descent_path(inst, c, 21, t_max=0.2, symmetric=False)
    curve = lift_path(inst, path)
    assert curve.converged and curve.last_good_t is None
    assert len(curve.t) == 21
    assert np.all(curve.residuals < 1e-6)
    assert curve.residuals[0] < 1e-13
    np.testing.assert_array_equal(curve.gammas[0], np.eye(2))
    # Γ(U, V) is U [A^{-1/2} γCγ* A^{-1/2}] U*, so the orbit curve carries the spectrum of l(t)
    for j in (5, 20):
        g = curve.gammas[j]
        ct = g @ np.array(c.C) @ g.conj().T
        np.testing.assert_allclose(
            np.linalg.eigvalsh(relative_matrix(inst, ct)), np.linalg.eigvalsh(path.l[j]), atol=1e-6
        )
    exact = path.values(inst.norm)
    assert curve.values[0] - curve.values[-1] >= 0.5 * (exact[0] - exact[-1])
    assert curve.values[-1] < curve.values[0]


def test_lift_3x3_symmetric():
    inst, c = generic_instance(3, 9)
    path = spectral_descent_path(inst, c, 21, t_max=0.2)
    curve = lift_path(inst, path)
    assert curve.converged and np.all(curve.residuals < 1e-6)
    assert curve.descends()


def test_gamma_map_at_identity():
    inst, c = generic_instance(3, 1)
    eye = np.eye(3)
    np.testing.assert_allclose(gamma_map(inst, c.C, eye, eye), relative_matrix(inst, c), atol=1e-14)


def test_lift_requires_trivial_commutant():
    inst, c = misordered_3x3()
    path = spectral_descent_path(inst, c, 5, t_max=0.1)
    with pytest.raises(PreconditionError, match="commutant"):
        lift_path(inst, path)


def test_lift_failure_is_reported():
    inst, c = generic_instance(2, 5)
    path = spectral_descent_path(inst, c, 5, t_max=0.2, symmetric=False)
    curve = lift_path(inst, path, residual_tol=0.0, max_iter=1)
    assert not curve.converged
    assert curve.last_good_t == 0.0
    assert len(curve.t) == 1


def test_probe_at_minimizer():
    inst, _ = misordered_3x3()
    rep = local_probe(inst, global_minimizer(inst).C, 1e-3, 500, seed=0)
    assert not rep.decreased
    assert rep.min_delta > -1e-8


def test_probe_at_misordered_point():
    inst, c = misordered_3x3()
    rep = local_probe(inst, c, 1e-3, 500, seed=0)
    assert rep.decreased
    h = rep.best_direction
    np.testing.assert_allclose(h, h.conj().T, atol=1e-15)
    curve = probe_descent_curve(inst, c, rep, 11)
    assert curve.kind == "probe_direction"
    assert curve.values[-1] < curve.values[0]
    assert abs(curve.values[-1] - curve.values[0] - rep.min_delta) < 1e-12


def test_probe_scalar_b(rng):
    inst = ProcrustesInstance(rand_pd(3, rng), 2.0 * np.eye(3))
    rep = local_probe(inst, 2.0 * np.eye(3), 1e-3, 50)
    assert rep.min_delta == 0.0 and not rep.decreased


def test_probe_deterministic():
    inst, c = misordered_3x3()
    r1 = local_probe(inst, c, 1e-3, 40, seed=3)
    r2 = local_probe(inst, c, 1e-3, 40, seed=3)
    assert r1.min_delta == r2.min_delta
    np.testing.assert_array_equal(r1.best_direction, r2.best_direction)


def test_probe_rejects_bad_epsilon():
    inst, c = misordered_3x3()
    with pytest.raises(ValueError):
        local_probe(inst, c, 0.0)


@pytest.mark.parametrize("seed", range(6))
def test_certificate_soundness(seed):
    d = 2 + seed % 2
    inst, c = generic_instance(d, 100 + seed)
    cert = certify(inst, c, seed=seed)
    assert cert.verdict == "not_extremal"
    curve = cert.descent
    assert curve is not None and curve.kind == "spectral_path_lifted"
    assert curve.descends_at_ends(1e-12)
    cert = certify(inst, global_minimizer(inst).C)
    assert cert.verdict == "global_min"
    for eps in (1e-2, 1e-3):
        assert not local_probe(inst, global_minimizer(inst).C, eps, 500, seed=seed).decreased


def test_min_value_formula_needs_no_strict_convexity():
    inst, c = misordered_3x3()
    inst = inst.with_norm(NormSpec.spectral())
    lb, la = np.log(MU), np.log([3.0, 2.0, 1.0])
    assert global_minimizer(inst).value == vector_norm(inst.norm, lb - la)
