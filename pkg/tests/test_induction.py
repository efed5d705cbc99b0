import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vortex_induct import induction as ind
from vortex_induct.core_model import CODATA2018, ElectronState, Tube, kinematics_from_energy, loop_model
from vortex_induct.errors import DomainError, OffsetTooLargeError
from vortex_induct.numerics import QuadratureSpec, integrate

MU0 = CODATA2018.mu0


def biot_savart_potential(r, z, radius, current, n=100_000):
    """A_phi at (r, 0, z) from n straight segments of the source ring (midpoint rule)."""
    phi = 2 * np.pi * (np.arange(n) + 0.5) / n
    dist = np.sqrt(r * r + radius * radius - 2 * r * radius * np.cos(phi) + z * z)
    # dl . phi_hat at the field point is R dphi cos(phi)
    return MU0 * current / (4 * np.pi) * np.sum(radius * np.cos(phi) / dist) * (2 * np.pi / n)


# vector potential and ring field

def test_potential_on_axis_is_zero():
    loop = loop_model(ElectronState(1e5, 3, 1e-9))
    assert ind.vector_potential(0.0, 1e-9, loop) == 0.0
    assert np.all(ind.vector_potential(np.zeros(3), np.array([-1e-9, 0, 2e-9]), loop) == 0)
    with pytest.raises(DomainError):
        ind.vector_potential(-1e-9, 0.0, loop)


def test_potential_against_biot_savart_reference_point():
    loop = loop_model(ElectronState(1e5, 1, 1e-9))
    R = loop.r_ell
    got = ind.vector_potential(2 * R, R, loop)
    ref = biot_savart_potential(2 * R, R, R, loop.signed_current)
    assert got == pytest.approx(ref, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 50.0), st.floats(-50.0, 50.0), st.sampled_from([-4, -1, 1, 7]))
def test_potential_mirror_symmetry_and_array_path(r_hat, z_hat, ell):
    loop = loop_model(ElectronState(1e5, ell, 1e-9))
    r, z = r_hat * loop.r_ell, z_hat * loop.r_ell
    up = ind.vector_potential(r, z, loop)
    assert up == ind.vector_potential(r, -z, loop)
    arr = ind.vector_potential(np.array([r]), np.array([z]), loop)[0]
    assert arr == pytest.approx(up, rel=1e-13, abs=0)


def test_potential_far_field_is_dipole():
    loop = loop_model(ElectronState(1e5, 2, 1e-9))
    r, z = 3e-6, 4e-6
    dipole = MU0 * loop.dipole_moment * r / (4 * math.pi * (r * r + z * z) ** 1.5)
    assert ind.vector_potential(r, z, loop) == pytest.approx(dipole, rel=1e-6)


def test_loop_field_is_curl_of_potential():
    R, current = 1.0, 2.0
    loop = type(loop_model(ElectronState(1e5, 1, 1e-9)))(R, current, 1.0)
    for r, z in [(0.3, 0.2), (1.5, -0.7), (0.9, 0.05), (2.5, 3.0)]:
        h = 1e-5
        dadz = (ind.vector_potential(r, z + h, loop) - ind.vector_potential(r, z - h, loop)) / (2 * h)
        drad = ((r + h) * ind.vector_potential(r + h, z, loop)
                - (r - h) * ind.vector_potential(r - h, z, loop)) / (2 * h * r)
        br, bz = ind.loop_field(r, z, R, current)
        assert float(br) == pytest.approx(-dadz, rel=1e-7)
        assert float(bz) == pytest.approx(drad, rel=1e-7)


def test_loop_field_on_axis_and_on_ring():
    br, bz = ind.loop_field(np.zeros(3), np.array([-1.0, 0.0, 2.0]), 1.0, 1.0)
    assert np.all(br == 0)
    assert np.allclose(bz, MU0 / (2 * (1 + np.array([1.0, 0.0, 4.0])) ** 1.5), rtol=1e-14, atol=0)
    br, bz = ind.loop_field(1.0, 0.0, 1.0, 1.0)
    assert np.isnan(br) and np.isnan(bz)


def test_flux_dipole():
    m = 3 * CODATA2018.mu_B
    a = 1e-5
    assert ind.flux_dipole(a, 0.0, m) == pytest.approx(MU0 * m / (2 * a), rel=1e-15)
    assert ind.flux_dipole(a, 1e3, m) < 1e-20 * ind.flux_dipole(a, 0.0, m)
    for d in (-2e-5, 3e-6, 4e-5):
        eps = 1e-4 * a
        slope = -(ind.flux_dipole(a, d + eps, m) - ind.flux_dipole(a, d - eps, m)) / (2 * eps)
        shape = 1.5 * MU0 * m * a * a * d / (a * a + d * d) ** 2.5
        assert slope == pytest.approx(shape, rel=1e-7)
    with pytest.raises(DomainError):
        ind.flux_dipole(0.0, 1.0, m)


def test_flux_of_finite_loop_approaches_dipole():
    loop = loop_model(ElectronState(1e5, 1, 1e-9))
    a = 1e-5
    for d in (0.0, 5e-6, 2e-5):
        finite = 2 * math.pi * a * ind.vector_potential(a, d, loop)
        assert finite == pytest.approx(ind.flux_dipole(a, d, loop.dipole_moment), rel=1e-8)


# total current

def test_current_zero_at_midplane(electron, tube):
    tr = ind.current_trace(electron, tube, np.linspace(-1e-5, 1e-5, 3))
    assert tr.closed_form[1] == 0.0
    assert abs(tr.currents[1]) <= 1e-15 * tr.peak
    assert ind.current_at(0.0, electron, tube) == 0.0


def test_current_fig2_magnitude(electron, tube, fig2):
    tr = ind.current_trace(electron, tube, fig2.z_samples())
    assert 10e-12 < tr.peak < 30e-12
    assert np.allclose(tr.currents, tr.closed_form, rtol=0, atol=1e-9 * tr.peak)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1e-4), st.integers(-50, 50))
def test_current_antisymmetric_and_linear(z, ell):
    tube = Tube(1e-5, 1e-6, 2e-5, 9.43e6)
    one = ElectronState(1e5, 1, 1e-9)
    el = ElectronState(1e5, ell, 1e-9)
    peak = abs(ind.current_at(0.5 * tube.length, one, tube))
    i_plus = ind.current_at(z, one, tube)
    assert abs(i_plus + ind.current_at(-z, one, tube)) <= 1e-12 * peak
    assert ind.current_at(z, el, tube) == pytest.approx(ell * i_plus, rel=1e-12, abs=1e-300)


def test_trace_linearity_pointwise(tube, fig2):
    z = fig2.z_samples()
    base = ind.current_trace(ElectronState(1e5, 1, 1e-9), tube, z).currents
    for ell in (5, 10, -3):
        other = ind.current_trace(ElectronState(1e5, ell, 1e-9), tube, z).currents
        nz = base != 0
        assert np.allclose(other[nz] / base[nz], ell, rtol=1e-12, atol=0)


def test_peak_near_tube_ends(electron, tube):
    gamma = kinematics_from_energy(electron).gamma
    z = np.linspace(-3 * tube.length, 3 * tube.length, 120001)
    i = ind.current_at(z, electron, tube)
    z_pk = abs(z[np.argmax(np.abs(i))])
    assert abs(z_pk - 0.5 * tube.length) <= tube.radius / gamma
    long_tube = Tube(1e-5, 1e-6, 1e-3, 9.43e6)
    i = ind.current_at(z * 50, electron, long_tube)
    assert abs(abs(z[np.argmax(np.abs(i))] * 50) - 5e-4) <= long_tube.radius / gamma


def test_current_sign_obeys_lenz(tube):
    """While the dipole approaches, every ring current opposes its own flux growth, and the
    rings' combined field at the electron points against the dipole."""
    el = ElectronState(1e5, 4, 1e-9)
    v = kinematics_from_energy(el).speed
    m = loop_model(el).dipole_moment
    h = np.linspace(-0.5 * tube.length, 0.5 * tube.length, 401)
    eps = 1e-6 * tube.radius
    for z in (-3e-5, -1.2e-5, -4e-6, -1e-7):
        d_i = ind.ring_current_density(h, z, el, tube)
        flux_rate = v * (ind.flux_dipole(tube.radius, z + eps - h, m)
                         - ind.flux_dipole(tube.radius, z - eps - h, m)) / (2 * eps)
        growing = np.abs(flux_rate) > 1e-9 * np.max(np.abs(flux_rate))
        assert np.all(np.sign(d_i[growing]) == -np.sign(flux_rate[growing]))
        _, bz = ind.loop_field(0.0, z - h, tube.radius, d_i * (h[1] - h[0]))
        assert np.sum(bz) * m < 0
    assert ind.current_at(-1e-5, el, tube) < 0 < ind.current_at(1e-5, el, tube)


def test_current_trace_input_checks(electron, tube):
    with pytest.raises(ValueError):
        ind.current_trace(electron, tube, [0.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        ind.current_trace(electron, tube, [1.0, 0.0])


# finite-loop route

def test_wall_field_zero_in_dipole_plane(electron, tube):
    assert abs(ind.azimuthal_field(3e-6, 3e-6, electron, tube)) < 1e-12 * abs(
        ind.azimuthal_field(3e-6, 3e-6 + tube.radius / 2, electron, tube))


def test_wall_field_sign_flips_with_oam(tube):
    plus = ind.azimuthal_field(1e-6, 5e-6, ElectronState(1e5, 3, 1e-9), tube)
    minus = ind.azimuthal_field(1e-6, 5e-6, ElectronState(1e5, -3, 1e-9), tube)
    assert plus == -minus and plus != 0


def test_wall_field_integrates_to_total_current(electron, tube):
    half = 0.5 * tube.length
    spec = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-9)
    for z in (-1.5e-5, -4e-6, 9e-6, 2.5e-5):
        total = integrate(lambda h: ind.azimuthal_field(h, z, electron, tube), -half, half, spec)
        total *= tube.conductivity * tube.thickness
        assert total == pytest.approx(ind.current_at(z, electron, tube), rel=1e-6)


def test_finite_loop_emf_close_to_dipole_at_twenty_radii():
    el = ElectronState(1e5, 1, 1e-9)
    r_ell = loop_model(el).r_ell
    tube = Tube(20 * r_ell, 2 * r_ell, 40 * r_ell, 9.43e6)
    h, e_loop = ind.emf_profile(el, tube, 0.3 * tube.length, n=201)
    e_dip = ind.ring_current_density(h, 0.3 * tube.length, el, tube) / (
        tube.conductivity * tube.thickness)
    assert np.max(np.abs(e_loop - e_dip)) <= 0.02 * np.max(np.abs(e_dip))


def test_emf_profile_rejects_outside(electron, tube):
    with pytest.raises(ValueError):
        ind.azimuthal_field(tube.length, 0.0, electron, tube)


# energy loss

def dipole_energy_loss_ev(electron, tube):
    kin = kinematics_from_energy(electron)
    m = loop_model(electron).dipole_moment
    a = tube.radius
    # L * int (d_s A_dip(a, gamma s))^2 ds, the s-integral being B(3/2, 7/2) = 5 pi / 128
    coeff = (3 * MU0 * m * a / (4 * math.pi)) ** 2 * kin.gamma * (5 * math.pi / 128) / a**7
    joules = 2 * math.pi * tube.conductivity * a * tube.thickness * kin.velocity_factor * tube.length * coeff
    return joules / CODATA2018.e


FAST = QuadratureSpec(rel_tol=1e-6)


def test_energy_loss_zero_without_oam(tube):
    assert ind.energy_loss(ElectronState(1e5, 0, 1e-9), tube).magnitude_ev == 0.0


def test_energy_loss_matches_dipole_closed_form(tube):
    el = ElectronState(1e5, 10, 1e-9)
    res = ind.energy_loss(el, tube, FAST)
    assert res.sign == -1 and res.delta_e_ev < 0
    assert res.magnitude_ev == pytest.approx(dipole_energy_loss_ev(el, tube), rel=1e-5)
    assert res.magnitude_j == pytest.approx(res.magnitude_ev * CODATA2018.e, rel=1e-15)


def test_energy_loss_quadratic_in_oam(tube):
    e1 = ind.energy_loss(ElectronState(1e5, 3, 1e-9), tube, FAST).magnitude_ev
    e2 = ind.energy_loss(ElectronState(1e5, 6, 1e-9), tube, FAST).magnitude_ev
    assert e2 / e1 == pytest.approx(4.0, rel=1e-5)


# field-energy maps

def default_axes(tube, n):
    half = 0.5 * tube.length
    return (np.linspace(0, 4 * tube.radius, n),
            np.linspace(-half - 4 * tube.radius, half + 4 * tube.radius, n))


def test_field_map_zero_without_oam(tube):
    r, z = default_axes(tube, 21)
    grid = ind.field_energy_map(ElectronState(1e5, 0, 1e-9), tube, 0.0, r, z)
    assert np.all(grid.energy_density == 0)
    assert ind.total_field_energy(grid) == 0.0


def test_field_map_entering_concentrated_at_entrance(electron, tube):
    r, z = default_axes(tube, 81)
    grid = ind.field_energy_map(electron, tube, -0.5 * tube.length, r, z)
    u = grid.energy_density
    assert np.all(u >= 0) and np.all(np.isfinite(u))
    assert u[:, z < 0].sum() > 2 * u[:, z > 0].sum()
    i, j = np.unravel_index(np.argmax(u), u.shape)
    assert abs(z[j] + 0.5 * tube.length) < tube.radius


def test_field_map_midplane_symmetry(electron, tube):
    r, z = default_axes(tube, 81)
    u = ind.field_energy_map(electron, tube, 0.0, r, z).energy_density
    assert np.allclose(u, u[:, ::-1], rtol=1e-9, atol=1e-12 * u.max())


def test_field_energy_scales_with_oam_squared(tube):
    r, z = default_axes(tube, 61)
    e1 = ind.total_field_energy(ind.field_energy_map(ElectronState(1e5, 2, 1e-9), tube, 0.0, r, z))
    e2 = ind.total_field_energy(ind.field_energy_map(ElectronState(1e5, 4, 1e-9), tube, 0.0, r, z))
    assert e2 / e1 == pytest.approx(4.0, rel=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("z_e", [0.0, -1e-5])
def test_field_energy_grid_refinement(electron, tube, z_e):
    # from the CLI's default resolution to half its spacing
    coarse = ind.total_field_energy(ind.field_energy_map(electron, tube, z_e, *default_axes(tube, 201)))
    fine = ind.total_field_energy(ind.field_energy_map(electron, tube, z_e, *default_axes(tube, 401)))
    assert abs(fine - coarse) < 0.01 * fine


def test_field_map_independent_of_thread_count(electron, tube):
    r, z = default_axes(tube, 37)
    one = ind.field_energy_map(electron, tube, 3e-6, r, z, threads=1).energy_density
    many = ind.field_energy_map(electron, tube, 3e-6, r, z, threads=5).energy_density
    assert np.array_equal(one, many)


def test_field_map_warns_when_grid_too_small(electron, tube):
    r = np.linspace(0, 1.2 * tube.radius, 30)
    z = np.linspace(-0.5 * tube.length, 0.5 * tube.length, 30)
    with pytest.warns(RuntimeWarning):
        ind.total_field_energy(ind.field_energy_map(electron, tube, 0.0, r, z))


def test_field_map_axis_validation(electron, tube):
    with pytest.raises(ValueError):
        ind.field_energy_map(electron, tube, 0.0, [0.0, 0.0, 1.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        ind.field_energy_map(electron, tube, 0.0, [-1.0, 1.0], [0.0, 1.0])


# offsets

def test_offset_zero_matches_on_axis_peak(electron, tube):
    res = ind.offset_scan(electron, tube, [0.0], [1])
    z = np.linspace(0, tube.length, 200001)
    dense = np.max(np.abs(ind.current_at(z, electron, tube)))
    assert abs(res.peak_currents[0, 0]) == pytest.approx(dense, rel=1e-9)
    assert res.peak_currents[0, 0] > 0


def test_offset_ratio_constant_and_peak_decreasing(electron, tube):
    d = np.linspace(0, 0.5 * tube.radius, 11)
    res = ind.offset_scan(electron, tube, d, [1, 5, -2])
    assert np.allclose(res.ratios[1], 5.0, rtol=1e-12, atol=0)
    assert np.allclose(res.ratios[2], -2.0, rtol=1e-12, atol=0)
    assert np.all(np.diff(np.abs(res.peak_currents[0])) < 0)
    assert np.all(np.abs(res.peak_currents[0]) > 0.1 * abs(res.peak_currents[0, 0]))


def test_offset_too_large(electron, tube):
    with pytest.raises(OffsetTooLargeError):
        ind.offset_scan(electron, tube, [0.0, tube.radius], [1])
    with pytest.raises(ValueError):
        ind.offset_scan(electron, tube, [-1e-7], [1])
