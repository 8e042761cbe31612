"""Packet engine: spectra, free propagation, channel split, grid policy."""

import math

import numpy as np
import pytest

from tunneltimes.model import BarrierSpec, HBAR, NumericInvariantError, group_velocity, wavenumber
from tunneltimes.packets import (
    PacketSpec,
    channel_mean_k,
    cm_trajectory,
    default_grid,
    dispersion_time,
    evolve,
    gaussian_spectrum,
    second_central_moment,
    slow_tail_allowance,
    starting_point_packet,
)
from tunneltimes.timescales import evaluate_widths

FREE = BarrierSpec(height=0.0, width=0.5)
BARRIER = BarrierSpec(height=0.25, width=0.5)
# deep narrow well with a slow carrier; the spectrum reaches strongly
# reflected components, which stresses every grid-policy term
DEEP_WELL = BarrierSpec(height=-712.0, width=1.08e-5, left_edge=70.0)
DEEP_SPEC = PacketSpec.for_energy(l0=15.0, x0=0.0, e_mean=0.00641, n_k=4096, k_span=3.0)

FREE_SPEC = PacketSpec(l0=10.0, x0=-200.0, k0=0.5, n_k=1024)
BAR_SPEC = PacketSpec(l0=10.0, x0=-80.0, k0=0.5, n_k=2048)


@pytest.fixture(scope="module")
def deep_state():
    return evolve(DEEP_SPEC, DEEP_WELL, 0.0)


@pytest.fixture(scope="module")
def barrier_states():
    return {t: evolve(BAR_SPEC, BARRIER, t) for t in (1.5, 2.0, 2.5)}


def test_spectrum_unit_norm_and_mean():
    spectrum = gaussian_spectrum(FREE_SPEC)
    density = np.abs(spectrum.amplitude) ** 2
    assert np.trapezoid(density, spectrum.k) == pytest.approx(1.0, abs=1e-13)
    mean = np.trapezoid(density * spectrum.k, spectrum.k)
    assert mean == pytest.approx(FREE_SPEC.k0, abs=1e-12)
    assert spectrum.dk == pytest.approx(spectrum.k[1] - spectrum.k[0], rel=1e-15)
    # edges rolled off smoothly to zero
    assert abs(spectrum.amplitude[0]) == 0.0
    assert abs(spectrum.amplitude[-1]) == 0.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(l0=0.0, x0=0.0, k0=0.5),
        dict(l0=-3.0, x0=0.0, k0=0.5),
        dict(l0=10.0, x0=0.0, k0=0.0),
        dict(l0=10.0, x0=0.0, k0=-0.5),
        dict(l0=10.0, x0=0.0, k0=0.5, n_k=1000),
        dict(l0=10.0, x0=0.0, k0=0.5, n_k=0),
        dict(l0=10.0, x0=0.0, k0=0.5, k_span=0.0),
        # carrier below k_span * sigma_k: sampled spectrum would reach k <= 0
        dict(l0=15.0, x0=0.0, k0=0.10617079471088774, k_span=6.0),
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        PacketSpec(**kwargs)


def test_for_energy_sets_carrier():
    spec = PacketSpec.for_energy(l0=15.0, x0=-5.0, e_mean=0.00641, k_span=3.0)
    assert spec.k0 == pytest.approx(wavenumber(0.00641, DEEP_WELL.kinetic_coeff), rel=1e-15)
    assert spec.x0 == -5.0
    assert spec.sigma_k == pytest.approx(1.0 / 30.0, rel=1e-15)


def test_dispersion_time_value():
    assert dispersion_time(FREE_SPEC, FREE.kinetic_coeff) == pytest.approx(
        HBAR * 100.0 / FREE.kinetic_coeff, rel=1e-15
    )


def test_free_packet_matches_gaussian_motion():
    t_disp = dispersion_time(FREE_SPEC, FREE.kinetic_coeff)
    for t in (0.0, 0.25):
        state = evolve(FREE_SPEC, FREE, t, n_x=4096)
        var = second_central_moment(state.grid, np.abs(state.psi_full) ** 2)
        want_var = FREE_SPEC.l0**2 * (1.0 + (t / t_disp) ** 2)
        assert var == pytest.approx(want_var, rel=1e-4)
        want_cm = FREE_SPEC.x0 + group_velocity(FREE_SPEC.k0, FREE.kinetic_coeff) * t
        assert state.cm_full == pytest.approx(want_cm, abs=1e-5)
        assert state.n_full == pytest.approx(1.0, abs=1e-7)
        # transparent potential: the whole packet is the transmitted channel
        assert state.n_ref <= 1e-30
        assert np.max(np.abs(state.psi_ref)) <= 1e-12


def test_free_channel_means():
    means = channel_mean_k(FREE_SPEC, FREE)
    assert means.k_incident == pytest.approx(FREE_SPEC.k0, abs=1e-12)
    assert means.k_transmitted == pytest.approx(FREE_SPEC.k0, abs=1e-12)
    assert means.k_reflected is None
    assert means.reflected_weight == 0.0
    assert means.transmitted_weight == pytest.approx(1.0, abs=1e-13)


def test_transparent_starting_point_is_x0():
    assert starting_point_packet(FREE_SPEC, FREE) == FREE_SPEC.x0


def test_starting_point_narrow_spectrum_limit():
    # as the spectrum narrows the weighted shift converges on the
    # monochromatic starting point at the carrier
    k0 = wavenumber(0.125, BARRIER.kinetic_coeff)
    closed = evaluate_widths(BARRIER, k0).starting_point
    errs = []
    for l0 in (200.0, 500.0):
        spec = PacketSpec(l0=l0, x0=0.0, k0=k0, n_k=2048)
        errs.append(abs(starting_point_packet(spec, BARRIER) - closed))
    assert errs[1] <= abs(closed) * 1e-4
    assert errs[1] < errs[0]


def test_containment_error_reports_extent():
    # +/- 1.5 sigma holds ~87% of the packet
    x = np.linspace(-215.0, -185.0, 512)
    with pytest.raises(NumericInvariantError, match="grid holds only"):
        evolve(FREE_SPEC, FREE, 0.0, x=x)


def test_slow_tail_allowance_scales():
    assert slow_tail_allowance(FREE_SPEC, FREE) == 0.0
    modest = slow_tail_allowance(BAR_SPEC, BARRIER)
    assert 0.0 < modest < 100.0
    assert slow_tail_allowance(DEEP_SPEC, DEEP_WELL) > 1000.0


def test_default_grid_tracks_both_channels():
    t = 2.5
    grid = default_grid(BAR_SPEC, BARRIER, t)
    v = group_velocity(BAR_SPEC.k0, BARRIER.kinetic_coeff)
    assert grid[0] < 2.0 * BARRIER.left_edge - BAR_SPEC.x0 - v * t - 4.0 * BAR_SPEC.l0
    assert grid[-1] > BARRIER.right_edge + v * t + 4.0 * BAR_SPEC.l0
    # transparent case keeps the left end anchored at the launch point
    free_grid = default_grid(FREE_SPEC, FREE, t)
    assert free_grid[0] > FREE_SPEC.x0 - 8.0 * FREE_SPEC.l0 * (
        1.0 + t / dispersion_time(FREE_SPEC, FREE.kinetic_coeff)
    ) - 1e-9


def test_channel_additivity_and_support(barrier_states):
    state = barrier_states[1.5]
    assert np.max(np.abs(state.psi_tr + state.psi_ref - state.psi_full)) <= 1e-12
    # the remainder lives strictly on the incidence side
    beyond = state.grid >= BARRIER.left_edge
    assert np.all(state.psi_ref[beyond] == 0.0)
    assert abs(state.n_tr + state.n_ref - state.n_full) <= 1e-9


def test_barrier_channel_means_ordering():
    means = channel_mean_k(BAR_SPEC, BARRIER)
    assert means.k_reflected < means.k_incident < means.k_transmitted
    total = (
        means.transmitted_weight * means.k_transmitted
        + means.reflected_weight * means.k_reflected
    )
    assert total == pytest.approx(means.k_incident, abs=1e-12)
    assert means.transmitted_weight + means.reflected_weight == pytest.approx(1.0, abs=1e-12)


def test_reflected_weight_conserved_over_time(barrier_states):
    refs = [state.n_ref for state in barrier_states.values()]
    assert max(refs) - min(refs) <= 1e-9
    means = channel_mean_k(BAR_SPEC, BARRIER)
    assert refs[0] == pytest.approx(means.reflected_weight, rel=1e-6)


def test_transmitted_cm_moves_at_transmitted_group_velocity(barrier_states):
    # right of the barrier the transmitted channel is a free superposition
    # weighted by |A t|^2, so its CM velocity is the T-weighted group velocity
    slope = (barrier_states[2.5].cm_tr - barrier_states[2.0].cm_tr) / 0.5
    means = channel_mean_k(BAR_SPEC, BARRIER)
    want = group_velocity(means.k_transmitted, BARRIER.kinetic_coeff)
    assert slope == pytest.approx(want, rel=1e-6)


def test_deep_well_scenario(deep_state):
    state = deep_state
    assert abs(state.n_tr + state.n_ref - 1.0) <= 5e-8
    assert 5.2e-3 <= state.n_ref <= 7.8e-3
    separation = abs(state.cm_tr - state.cm_full)
    assert 0.3 <= separation <= 3.0
    beyond = state.grid >= DEEP_WELL.right_edge
    assert np.all(state.psi_ref[beyond] == 0.0)
    # the spectral prediction reproduces the synthesized transmitted CM
    predicted = starting_point_packet(DEEP_SPEC, DEEP_WELL)
    assert state.cm_tr == pytest.approx(predicted, rel=5e-3)


def test_cm_trajectory_structure():
    points = cm_trajectory(BAR_SPEC, BARRIER, [1.5, 2.0], n_x=4096)
    assert [p.t for p in points] == [1.5, 2.0]
    assert points[1].cm_tr > points[0].cm_tr
    with pytest.raises(ValueError, match="ascending"):
        cm_trajectory(BAR_SPEC, BARRIER, [2.0, 1.5])


def test_second_central_moment_gaussian():
    x = np.linspace(-80.0, 80.0, 4001)
    sigma = 7.0
    density = np.exp(-((x - 3.0) ** 2) / (2.0 * sigma**2))
    assert second_central_moment(x, density) == pytest.approx(sigma**2, rel=1e-6)
