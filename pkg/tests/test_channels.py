import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from tunneltime.channels import (Channel, channel_phases, channel_reports, decompose_incident,
                                 delay_times, montecarlo_sort, scattering_window, swpa_times,
                                 transit_times)
from tunneltime.core import DomainError, k_from_energy
from tunneltime.packets import (ChannelEmpty, PacketKind, PacketSpec, k_moment, k_sample,
                                moments, norms)
from tunneltime.potential import PotentialProfile, delta_like, invert, rectangular

M = 0.067
K0 = k_from_energy(0.02, M)
ASYM = ((1.5, 0.25), (2.0, 0.1), (1.0, 0.35))


def test_norms_match_packets():
    spec, p = PacketSpec(K0, 10.0, M), rectangular(0.3, 150.0, 5.0)
    tr, ref = channel_reports(spec, p)
    T, R = norms(spec, p)
    assert (tr.channel, ref.channel) == (Channel.TRANSMISSION, Channel.REFLECTION)
    assert tr.norm == T and ref.norm == R
    assert tr.mean_k == pytest.approx(k_moment(spec, p, PacketKind.TRANSMITTED, 1), rel=1e-14)
    # both channels together carry the incident momentum
    assert T * tr.mean_k + R * ref.mean_k == pytest.approx(K0, rel=1e-10)


def test_spatial_delay_is_velocity_times_delay_time():
    spec, p = PacketSpec(K0, 10.0, M), PotentialProfile(150.0, ASYM)
    tr, ref = channel_reports(spec, p)
    v = spec.hbar_over_m
    assert tr.spatial_delay == pytest.approx(v * tr.mean_k * tr.delay_time, rel=1e-12)
    assert ref.spatial_delay == pytest.approx(v * ref.mean_k * ref.delay_time, rel=1e-12)


def test_channel_phases_need_both_channels():
    with pytest.raises(ChannelEmpty):
        channel_phases(PacketSpec(K0, 10.0, M), rectangular(0.0, 150.0, 5.0))


def test_gauge_leaves_centre_of_mass():
    spec, p = PacketSpec(K0, 10.0, M), PotentialProfile(150.0, ASYM)
    s = k_sample(spec, p)
    a_tr, _ = channel_phases(spec, p)
    b_tr, _ = channel_phases(spec, p, gauge=lambda k: 3.0 * np.sin(k) + 7.0 * k)

    def cm(theta):
        h = 1e-5
        slope = (theta(s.k + h) - theta(s.k - h)) / (2 * h)
        return -s.tr(slope)

    assert cm(a_tr) == pytest.approx(0.0, abs=1e-7)
    assert cm(b_tr) == pytest.approx(0.0, abs=1e-7)


@pytest.mark.parametrize("profile", [rectangular(0.3, 150.0, 5.0), PotentialProfile(150.0, ASYM)])
def test_decomposition_adds_up(profile):
    spec = PacketSpec(K0, 10.0, M)
    f_tr, f_ref, f_int = decompose_incident(spec, profile)
    k = np.linspace(K0 - 8 * spec.sigma_k, K0 + 8 * spec.sigma_k, 4001)
    inc = f_tr(k) + f_ref(k) + f_int(k)
    assert np.trapezoid(np.abs(inc) ** 2, k) == pytest.approx(1.0, rel=1e-9)
    T, R = norms(spec, profile)
    assert np.trapezoid(np.abs(f_tr(k)) ** 2, k) == pytest.approx(T, rel=1e-8)
    assert np.trapezoid(np.abs(f_ref(k)) ** 2, k) == pytest.approx(R, rel=1e-8)


def test_channel_states_start_at_origin():
    spec, p = PacketSpec(K0, 10.0, M), PotentialProfile(150.0, ASYM)
    f_tr, f_ref, _ = decompose_incident(spec, p)
    k = np.linspace(K0 - 8 * spec.sigma_k, K0 + 8 * spec.sigma_k, 8001)
    for f in (f_tr, f_ref):
        amp = f(k)
        phase = np.unwrap(np.angle(amp))
        w = np.abs(amp) ** 2
        # <x> = -<phase'> for a k-space amplitude
        assert np.trapezoid(w * np.gradient(phase, k), k) / np.trapezoid(w, k) == pytest.approx(
            0.0, abs=1e-5)


def test_free_motion_times():
    spec, p = PacketSpec(K0, 10.0, M), rectangular(0.0, 200.0, 5.0)
    tt = transit_times(spec, p, 10.0, 20.0)
    assert tt.tau_tr == pytest.approx(35.0 / (spec.hbar_over_m * K0), rel=1e-10)
    dt = delay_times(spec, p)
    assert dt.tau_tr == pytest.approx(0.0, abs=1e-8)
    assert dt.x_tr == pytest.approx(0.0, abs=1e-8)
    # nothing is reflected, so the reflection entries carry the NaN sentinel
    assert np.isnan(dt.tau_ref_minus) and np.isnan(tt.tau_ref_minus)


@pytest.mark.parametrize("profile", [rectangular(0.3, 100.0, 5.0), PotentialProfile(100.0, ASYM)])
def test_delay_times_do_not_depend_on_a(profile):
    spec = PacketSpec(K0, 10.0, M)
    ref = delay_times(spec, profile)
    for a in (50.0, 500.0):
        moved = PotentialProfile(a, profile.segments)
        assert delay_times(spec, moved) == ref
        assert transit_times(spec, moved, 30.0, 40.0) == transit_times(spec, profile, 30.0, 40.0)


def test_standard_times_drift_with_a():
    spec, p = PacketSpec(K0, 5.0, M), PotentialProfile(50.0, ASYM)
    L = 25.0
    out = []
    for a in (50.0, 100.0, 500.0):
        out.append(swpa_times(spec, PotentialProfile(a, p.segments), L, L))
    out = np.array(out)
    m_hbar = 1.0 / spec.hbar_over_m
    k_tr = k_moment(spec, p, PacketKind.TRANSMITTED, 1)
    k_ref = k_moment(spec, p, PacketKind.REFLECTED, 1)
    slope_tr = (out[2, 0] - out[0, 0]) / 450.0
    slope_ref = (out[2, 1] - out[0, 1]) / 450.0
    assert slope_tr == pytest.approx(m_hbar * (1 / k_tr - 1 / K0), rel=1e-6)
    assert slope_ref == pytest.approx(m_hbar * (1 / k_ref - 1 / K0), rel=1e-6)
    assert abs(slope_tr) > 0


def test_swpa_warns_on_short_distances():
    with pytest.warns(RuntimeWarning):
        swpa_times(PacketSpec(K0, 10.0, M), rectangular(0.3, 100.0, 5.0), 5.0, 5.0)


def test_symmetric_barrier_reflection_times_agree():
    spec, p = PacketSpec(K0, 10.0, M), rectangular(0.3, 100.0, 5.0)
    tt = transit_times(spec, p, 20.0, 20.0)
    assert tt.tau_ref_minus == pytest.approx(tt.tau_ref_plus, rel=1e-8)
    dt = delay_times(spec, p)
    assert dt.tau_ref_minus == pytest.approx(dt.tau_ref_plus, rel=1e-8)


def test_inversion_swaps_reflection_sides():
    spec, p = PacketSpec(K0, 10.0, M), PotentialProfile(100.0, ASYM)
    a, b = delay_times(spec, p), delay_times(spec, invert(p))
    assert a.tau_ref_plus == pytest.approx(b.tau_ref_minus, rel=1e-10)
    assert a.tau_tr == pytest.approx(b.tau_tr, rel=1e-10)
    assert abs(a.tau_ref_plus - a.tau_ref_minus) > 1e-3


def test_transit_at_barrier_edges_is_flagged():
    spec, p = PacketSpec(K0, 10.0, M), rectangular(0.3, 100.0, 5.0)
    assert transit_times(spec, p, 0.0, 0.0).non_measurable
    assert not transit_times(spec, p, 1.0, 0.0).non_measurable
    with pytest.raises(DomainError):
        transit_times(spec, p, -1.0, 0.0)


def test_hartman_spatial_delay():
    spec, p = PacketSpec(K0, 15.0, M), rectangular(0.3, 100.0, 40.0)
    dt = delay_times(spec, p)
    assert dt.x_tr < -30.0
    assert dt.tau_tr < 0


def test_delta_barrier_delays_nonzero():
    dt = delay_times(PacketSpec(0.3, 20.0, 1.0), delta_like(0.02, 100.0))
    assert abs(dt.tau_tr) > 1e-3
    assert abs(dt.tau_ref_minus) > 1e-3


completed = st.tuples(
    st.lists(st.tuples(st.floats(0.5, 6.0), st.floats(0.0, 0.4)), min_size=1, max_size=3),
    st.floats(0.15, 0.9), st.floats(4.0, 30.0), st.floats(1.5, 20.0))


@settings(max_examples=20)
@given(completed)
def test_window_ordering(case):
    segs, k0, l0, a_over_l0 = case
    spec = PacketSpec(k0, l0, M)
    w = scattering_window(spec, PotentialProfile(a_over_l0 * l0, tuple(segs)))
    if w.completed:
        assert w.t_end > w.t_start > 0
        assert w.tau_scatt == w.t_end - w.t_start


def test_window_flags_incomplete_scattering():
    # k0 below the incident spread: part of the packet moves away from the barrier
    spec = PacketSpec(0.02, 10.0, M)
    w = scattering_window(spec, rectangular(0.3, 200.0, 5.0))
    assert not w.completed
    assert np.isnan(w.tau_scatt) and np.isnan(w.t_end)
    assert np.isfinite(w.tau_narrow)


def test_window_needs_distant_barrier():
    with pytest.raises(DomainError):
        scattering_window(PacketSpec(K0, 10.0, M), rectangular(0.3, 100.0, 5.0), a=5.0)


def test_window_start_near_degenerate_limit():
    # k0^2 exceeds the incident momentum variance by 1e-6 relative
    l0 = np.sqrt(1 + 1e-6) / (2 * K0)
    spec = PacketSpec(K0, l0, M)
    a = 100.0
    w = scattering_window(spec, rectangular(0.3, a, 5.0))
    assert w.completed
    exact = (a * a - l0 * l0) / (2 * spec.hbar_over_m * K0 * a)
    assert w.t_start == pytest.approx(exact, rel=1e-5)
    assert w.t_start == pytest.approx(a / (2 * spec.hbar_over_m * K0), rel=1e-2)


def test_window_start_free_leading_edge():
    spec, a = PacketSpec(K0, 10.0, M), 200.0
    w = scattering_window(spec, rectangular(0.3, a, 5.0))
    t = w.t_start
    v = spec.hbar_over_m
    # leading edge x + sigma_x reaches a
    edge = v * K0 * t + np.sqrt(oracles.free_gaussian_width2(10.0, M, t))
    assert edge == pytest.approx(a, rel=1e-10)


def test_narrow_packet_estimate_is_the_wide_packet_limit():
    ratios = []
    for l0 in (60.0, 240.0, 960.0):
        w = scattering_window(PacketSpec(K0, l0, M), rectangular(0.3, 20 * l0, 5.0))
        ratios.append(w.tau_narrow / w.tau_scatt)
    assert np.all(np.diff(np.abs(np.log(ratios))) < 0)
    assert ratios[-1] == pytest.approx(1.0, abs=2e-3)


def test_scattering_time_has_interior_minimum():
    l0s = np.geomspace(3.0, 150.0, 11)
    taus = [scattering_window(PacketSpec(K0, l0, M), rectangular(0.3, max(20 * l0, 100.0), 20.0))
            .tau_scatt for l0 in l0s]
    i = int(np.nanargmin(taus))
    assert 0 < i < len(l0s) - 1


def test_montecarlo_is_deterministic():
    spec, p = PacketSpec(K0, 10.0, M), rectangular(0.3, 100.0, 5.0)
    assert montecarlo_sort(spec, p, 20000, 5) == montecarlo_sort(spec, p, 20000, 5)
    assert montecarlo_sort(spec, p, 20000, 5) != montecarlo_sort(spec, p, 20000, 6)


def test_montecarlo_free_profile():
    spec = PacketSpec(K0, 10.0, M)
    mc = montecarlo_sort(spec, rectangular(0.0, 100.0, 5.0), 100000, 1)
    assert mc.n_tr == mc.n_samples and mc.frac_ref == 0.0
    assert abs(mc.mean_k_tr - K0) < 4 * mc.se_tr


def test_montecarlo_matches_quadrature():
    spec, p = PacketSpec(K0, 5.0, M), PotentialProfile(100.0, ASYM)
    n = 200000
    mc = montecarlo_sort(spec, p, n, 11)
    T, R = norms(spec, p)
    lo, hi = oracles.binomial_bounds(T, n)
    assert lo <= mc.frac_tr <= hi
    assert abs(mc.mean_k_tr - k_moment(spec, p, PacketKind.TRANSMITTED, 1)) < 4 * mc.se_tr
    assert abs(mc.mean_k_ref - k_moment(spec, p, PacketKind.REFLECTED, 1)) < 4 * mc.se_ref


def test_montecarlo_sech_sampling():
    spec = PacketSpec(K0, 10.0, M, shape="sech")
    mc = montecarlo_sort(spec, rectangular(0.0, 100.0, 5.0), 100000, 2)
    inc = moments(spec, rectangular(0.0, 100.0, 5.0), PacketKind.INCIDENT)
    assert abs(mc.mean_k_tr - inc.mean_k) < 4 * mc.se_tr


@pytest.mark.parametrize("n", [0, -3, 2.5])
def test_montecarlo_rejects_bad_sizes(n):
    with pytest.raises(DomainError):
        montecarlo_sort(PacketSpec(K0, 10.0, M), rectangular(0.3, 100.0, 5.0), n)
