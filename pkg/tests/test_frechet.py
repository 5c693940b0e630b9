import numpy as np
import pytest

from crackscat.forward import DensitySolution, ForwardSystem, assemble_matrix, observation_directions
from crackscat.frechet import (Displacement, basis_labels, dS_assemble, dZ_trace, fd_jacobian, farfield_map,
                               frechet_farfield, horizontal_mode, incident_gradient, jacobian, normal_field, perturb,
                               reparametrization_field, tangential_field, vertical_mode)
from crackscat.geometry import ChebCrack, CrackSet

D = np.array([1.0, 0.0])


def _bump():
    """A smooth non-basis displacement with both components active."""
    return Displacement(lambda s: np.stack([0.3 * np.sin(2 * s), 0.5 * np.cos(3 * s) + 0.2 * s], -1),
                        lambda s: np.stack([0.6 * np.cos(2 * s), -1.5 * np.sin(3 * s) + 0.2], -1))


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_modes():
    s = np.linspace(-1, 1, 5)
    assert np.allclose(vertical_mode(2)(s), np.stack([0 * s, 2 * s**2 - 1], -1))
    assert np.allclose(vertical_mode(2).dh(s), np.stack([0 * s, 4 * s], -1))
    assert np.allclose(horizontal_mode(0)(s), np.stack([1 + 0 * s, 0 * s], -1))
    assert np.allclose(horizontal_mode(1).dh(s), np.stack([1 + 0 * s, 0 * s], -1))
    with pytest.raises(ValueError):
        horizontal_mode(2)


def test_scaled_displacement():
    h = _bump()
    s = np.linspace(-1, 1, 4)
    assert np.allclose(h.scaled(-2.0)(s), -2.0 * h(s))
    assert np.allclose(h.scaled(-2.0).dh(s), -2.0 * h.dh(s))


def test_tangential_weight_needs_derivative(example_b):
    with pytest.raises(ValueError):
        tangential_field(example_b[0], weight=lambda s: s)


def test_reparametrization_field_vanishes_at_tips(example_b):
    h = reparametrization_field(example_b[0])
    assert np.allclose(h(np.array([-1.0, 1.0])), 0.0)
    s = np.linspace(-0.9, 0.9, 7)
    fd = (h(s + 1e-6) - h(s - 1e-6)) / 2e-6
    assert np.allclose(h.dh(s), fd, atol=1e-6)


def test_basis_labels_order():
    labels = basis_labels([1, 0], [True, False])
    assert labels == [(0, "vertical", 0), (0, "vertical", 1), (0, "horizontal", 0), (0, "horizontal", 1),
                      (1, "vertical", 0)]


def test_dz_trace_zero(sol_a):
    grad = incident_gradient(3.0, D, sol_a.system.points)
    assert np.all(dZ_trace(sol_a.system, [None, None, None], grad) == 0)


def test_dz_trace_plane_wave(sol_b):
    system = sol_b.system
    vals = dZ_trace(system, [horizontal_mode(0)], lambda p: incident_gradient(3.0, D, p))
    assert np.allclose(vals, 3j * np.exp(3j * system.points[:, 0]))
    assert np.allclose(np.abs(vals), 3.0)


def test_dz_trace_matches_finite_difference(sol_b):
    system = sol_b.system
    h = _bump()
    hv = h(system.grids[0].s)
    exact = dZ_trace(system, [h], lambda p: incident_gradient(3.0, D, p))
    errs = []
    for eps in (1e-2, 1e-3):
        plus = np.exp(3j * (system.points + eps * hv) @ D)
        minus = np.exp(3j * (system.points - eps * hv) @ D)
        errs.append(np.abs((plus - minus) / (2 * eps) - exact).max())
    assert errs[1] < errs[0] / 50  # O(eps^2)


def test_ds_zero_perturbation(sol_a):
    assert np.all(dS_assemble(sol_a.system, [None, None, None]) == 0)


def test_ds_linear_in_h(sol_b):
    h = _bump()
    a = dS_assemble(sol_b.system, [h.scaled(2.5)])
    b = dS_assemble(sol_b.system, [h])
    assert np.abs(a - 2.5 * b).max() <= 1e-12 * np.abs(a).max()


@pytest.mark.parametrize("which", ["a", "b"])
def test_ds_taylor_order(which, example_a, example_b):
    cracks = example_a if which == "a" else example_b
    n, k = 32, 3.0
    system = ForwardSystem(cracks, n, k)
    h = [_bump()] + [vertical_mode(1)] * (len(cracks) - 1)
    ds = dS_assemble(system, h)
    rem = []
    for eps in (1e-3, 1e-4):
        moved = assemble_matrix(perturb(cracks, h, eps).grids(n), k)
        rem.append(np.linalg.norm(moved - system.matrix - eps * ds))
    assert np.log10(rem[0] / rem[1]) >= 1.9


def test_frechet_zero(sol_b):
    assert np.all(frechet_farfield(sol_b, [None]) == 0)


def test_frechet_gradient_check(example_b, sol_b):
    h = [_bump()]
    eps = 1e-5
    fd = (farfield_map(perturb(example_b, h, eps), 64, 3.0, D)
          - farfield_map(perturb(example_b, h, -eps), 64, 3.0, D)) / (2 * eps)
    an = frechet_farfield(sol_b, h)
    assert np.linalg.norm(an - fd) / np.linalg.norm(an) <= 1e-4


def test_frechet_linear(sol_a):
    h1 = [_bump(), None, vertical_mode(2)]
    h2 = [horizontal_mode(1), vertical_mode(0), None]
    combo = [Displacement(lambda s: 2 * _bump()(s) - 3 * horizontal_mode(1)(s),
                          lambda s: 2 * _bump().dh(s) - 3 * horizontal_mode(1).dh(s)),
             vertical_mode(0).scaled(-3.0), vertical_mode(2).scaled(2.0)]
    lhs = frechet_farfield(sol_a, combo)
    rhs = 2 * frechet_farfield(sol_a, h1) - 3 * frechet_farfield(sol_a, h2)
    assert np.abs(lhs - rhs).max() <= 1e-10 * np.abs(lhs).max()


@pytest.mark.parametrize("k", [1.0, 3.0])
def test_tangential_fields(k, example_a, example_b):
    for cracks in (example_a, example_b):
        sol = ForwardSystem(cracks, 64, k).solve(D)
        for j, crack in enumerate(cracks):
            tang = [None] * len(cracks)
            norm = [None] * len(cracks)
            tang[j] = reparametrization_field(crack)
            # same magnitude, rotated to the normal direction
            base = normal_field(crack)
            norm[j] = Displacement(lambda s, b=base: (1 - s**2)[..., None] * b(s),
                                   lambda s, b=base: -2 * s[..., None] * b(s) + (1 - s**2)[..., None] * b.dh(s))
            ratio = np.linalg.norm(frechet_farfield(sol, tang)) / np.linalg.norm(frechet_farfield(sol, norm))
            assert ratio <= 1e-4


def test_raw_tangent_moves_tips(sol_b, example_b):
    # z'(s) itself slides the tips, so its derivative is not small
    tip = np.linalg.norm(frechet_farfield(sol_b, [tangential_field(example_b[0])]))
    nrm = np.linalg.norm(frechet_farfield(sol_b, [normal_field(example_b[0])]))
    assert tip / nrm > 0.1


def test_frechet_needs_system(sol_b):
    bare = DensitySolution(sol_b.k, sol_b.d, sol_b.grids, sol_b.psi)
    with pytest.raises(ValueError):
        frechet_farfield(bare, [_bump()])


def test_jacobian_shape_and_columns(sol_a):
    jb = jacobian(sol_a, [2, 1, 3], [True, False, True])
    assert jb.shape == (32, 3 + 2 + 2 + 4 + 2)
    assert jb.columns("horizontal").sum() == 4
    j = jb.labels.index((1, "vertical", 0))
    col = frechet_farfield(sol_a, [None, vertical_mode(0), None])
    assert np.allclose(jb.matrix[:, j], col, atol=1e-13)


def test_jacobian_nesting(sol_a):
    small = jacobian(sol_a, 2, True)
    big = jacobian(sol_a, 4, True)
    for idx, lab in enumerate(small.labels):
        assert np.allclose(big.matrix[:, big.labels.index(lab)], small.matrix[:, idx], atol=1e-13)


def test_jacobian_translation_column_norms(example_a, sol_a):
    moved = ForwardSystem(example_a.translated((0.4, -0.7)), 64, 3.0).solve(D)
    a = np.linalg.norm(jacobian(sol_a, 3).matrix, axis=0)
    b = np.linalg.norm(jacobian(moved, 3).matrix, axis=0)
    assert np.allclose(a, b, rtol=1e-10)


def test_jacobian_empty_basis(sol_a):
    jb = jacobian(sol_a, None, False)
    assert jb.shape == (32, 0) and jb.labels == []
    fd = fd_jacobian(CrackSet(list(sol_a.system.cracks)), 16, 3.0, D, None, False)
    assert fd.shape == (32, 0)


def test_fd_jacobian_agrees_example_a(example_a, sol_a):
    an = jacobian(sol_a, 3).matrix
    fd = fd_jacobian(example_a, 64, 3.0, D, 3).matrix
    assert _rel(an, fd) <= 1e-4


def test_fd_jacobian_step_robust(example_b):
    j4 = fd_jacobian(example_b, 32, 3.0, D, 3, eps=1e-4).matrix
    j5 = fd_jacobian(example_b, 32, 3.0, D, 3, eps=1e-5).matrix
    assert _rel(j4, j5) <= 1e-5


def test_fd_jacobian_reports_failing_column():
    close = CrackSet([ChebCrack(0.0, 0.5, (0.0,)), ChebCrack(0.0, 0.5, (0.1,))], d_min=0.05)
    with pytest.raises(RuntimeError, match="column 0"):
        fd_jacobian(close, 16, 3.0, D, 0, False, eps=0.08)


def test_fd_jacobian_rejects_bad_eps(example_b):
    with pytest.raises(ValueError):
        fd_jacobian(example_b, 16, 3.0, D, 1, eps=0.0)


def test_custom_directions(sol_b):
    xh = observation_directions(8)
    assert jacobian(sol_b, 2, True, xh).shape == (8, 5)
