"""Asymptotic moments of the incident, transmitted and reflected packets.

Everything is computed in the k-representation.  A packet of kind ``K`` is
``f_K(k, t) = M_K(k) exp(i xi_K(k, t))`` and its position moments follow from

    <x>       = -<xi'>
    <(dx)^2>  = <(ln' M)^2> + <(d xi')^2>

with averages taken over ``M_K^2``.  Scattered packets inherit the incident
weight times ``T`` or ``R``, so every average reduces to an integral over the
incident k-window weighted by ``T`` or ``R``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import log_ndtr

from .core import (DEFAULT_NODES, DEFAULT_WIDTH_FACTOR, DomainError, KGrid, QuadratureError,
                   UnitSystem, k_from_energy)
from .potential import PotentialProfile
from .scatter import (R_RESOLVED, ScatteringData, transmission, transmission_slope,
                      tunneling_params)

TAIL_RTOL = 1e-12
REFINE_RTOL = 1e-12
MAX_TAIL_SIGMAS = 40.0
# T comes out of a log-scale sweep and stays accurate down to underflow; R is
# found by cancellation and carries an absolute error of order eps^2, so the
# reflected averages are noise until |r| is well clear of rounding
EMPTY_TRANSMISSION = 1e-300
EMPTY_REFLECTION = R_RESOLVED


class PacketKind(enum.Enum):
    INCIDENT = "incident"
    TRANSMITTED = "transmitted"
    REFLECTED = "reflected"
    TO_BE_TRANSMITTED = "to_be_transmitted"
    TO_BE_REFLECTED = "to_be_reflected"


@dataclass(frozen=True)
class Shape:
    """A real, even weight family ``A(k; k0, l0)``.

    ``log_tail(z)`` is the log of the fraction of ``A^2`` lying more than
    ``z`` standard deviations above the centre; it sizes the k-window.
    """

    name: str
    amplitude: Callable
    log_derivative: Callable
    sigma: Callable
    log_tail: Callable


def _gauss_amp(k, k0, l0):
    return np.exp(-(l0 * (k - k0)) ** 2)


def _gauss_dlog(k, k0, l0):
    return -2.0 * l0 * l0 * (k - k0)


def _sech_beta(l0):
    # <(ln'A)^2> = beta^2/3 under sech^2, so this keeps the width at l0
    return np.sqrt(3.0) * l0


def _sech_amp(k, k0, l0):
    return 1.0 / np.cosh(_sech_beta(l0) * (k - k0))


def _sech_dlog(k, k0, l0):
    b = _sech_beta(l0)
    return -b * np.tanh(b * (k - k0))


def _sech_sigma(l0):
    # variance of sech^2(beta u) is pi^2/(12 beta^2)
    return np.pi / (np.sqrt(12.0) * _sech_beta(l0))


def _sech_log_tail(z):
    u = 2.0 * z * np.pi / np.sqrt(12.0)
    return -np.logaddexp(0.0, u)


SHAPES = {
    "gaussian": Shape("gaussian", _gauss_amp, _gauss_dlog, lambda l0: 0.5 / l0,
                      lambda z: log_ndtr(-z)),
    "sech": Shape("sech", _sech_amp, _sech_dlog, _sech_sigma, _sech_log_tail),
}


def register_shape(shape: Shape) -> None:
    """Make a custom weight family available to :class:`PacketSpec`."""
    SHAPES[shape.name] = shape


@dataclass(frozen=True)
class PacketSpec:
    """Incident packet ``A(k; k0, l0)`` with ``<x> = 0`` and ``<x^2> = l0^2`` at t = 0.

    Parameters
    ----------
    k0 : float
        Mean wavenumber, nm^-1.
    l0 : float
        Half-width, nm.
    mass_ratio : float
        Effective mass in units of the electron mass.
    shape : str
        Key into :data:`SHAPES`.
    width_factor, n_nodes : float, int
        Base k-window ``k0 +- width_factor * sigma_k`` and its node count.
    """

    k0: float
    l0: float
    mass_ratio: float = 1.0
    shape: str = "gaussian"
    width_factor: float = DEFAULT_WIDTH_FACTOR
    n_nodes: int = DEFAULT_NODES

    def __post_init__(self):
        if not self.k0 > 0:
            raise DomainError("k0 must be positive")
        if not self.l0 > 0:
            raise DomainError("l0 must be positive")
        if not self.mass_ratio > 0:
            raise DomainError("mass_ratio must be positive")
        if self.shape not in SHAPES:
            raise DomainError(f"unknown packet shape {self.shape!r}")

    @classmethod
    def from_energy(cls, E0: float, l0: float, mass_ratio: float, **kw) -> "PacketSpec":
        return cls(k_from_energy(E0, mass_ratio), l0, mass_ratio, **kw)

    @property
    def family(self) -> Shape:
        return SHAPES[self.shape]

    @property
    def sigma_k(self) -> float:
        return float(self.family.sigma(self.l0))

    @property
    def units(self) -> UnitSystem:
        return UnitSystem(mass_ratio=self.mass_ratio)

    @property
    def hbar_over_m(self) -> float:
        return self.units.hbar_over_m

    @property
    def k_scale(self) -> float:
        return 0.5 / self.l0

    def amplitude(self, k):
        return self.family.amplitude(np.asarray(k, dtype=float), self.k0, self.l0)

    def log_derivative(self, k):
        return self.family.log_derivative(np.asarray(k, dtype=float), self.k0, self.l0)

    def normalized_amplitude(self, k):
        """``A`` scaled so that ``int A^2 dk = 1`` over the whole line."""
        s = self.sigma_k
        a2, _ = quad(lambda q: self.amplitude(q) ** 2, self.k0 - MAX_TAIL_SIGMAS * s,
                     self.k0 + MAX_TAIL_SIGMAS * s, points=[self.k0], limit=200, epsabs=0)
        return self.amplitude(k) / np.sqrt(a2)


@dataclass(frozen=True)
class MomentReport:
    """Moments of one packet kind.

    ``x_of_t`` is ``(slope nm/fs, intercept nm)``; ``var_x_coeffs`` are
    ``(c0 nm^2, c1 nm^2/fs, c2 nm^2/fs^2)`` of ``c0 + c1 t + c2 t^2``.
    """

    kind: PacketKind
    norm: float
    mean_k: float
    var_k: float
    x_of_t: tuple
    var_x_coeffs: tuple

    def mean_x(self, t):
        return self.x_of_t[1] + self.x_of_t[0] * np.asarray(t, dtype=float)

    def var_x(self, t):
        t = np.asarray(t, dtype=float)
        c0, c1, c2 = self.var_x_coeffs
        return c0 + c1 * t + c2 * t * t


class KSample:
    """Incident weight and scattering data on an adapted quadrature grid.

    The window starts at ``k0 +- W sigma_k`` and is widened on each side until
    the omitted weight is below ``1e-12`` of the smaller channel norm; the
    panels are then bisected until ``T M^2`` and ``R M^2`` integrate to
    ``1e-12`` relative accuracy.  This matters for opaque barriers, where the
    transmitted packet sits many incident widths above k0.
    """

    def __init__(self, spec: PacketSpec, p: PotentialProfile):
        self.spec = spec
        self.profile = p
        self.grid = self._build_grid()
        k = self.grid.nodes
        a2 = spec.amplitude(k) ** 2
        norm = a2 @ self.grid.weights
        if not (np.isfinite(norm) and norm > 0):
            raise QuadratureError("incident weight does not normalise")
        self.k = k
        self.m2 = a2 / norm
        self.w = self.grid.weights * self.m2
        self.dlnA = spec.log_derivative(k)

    def _channel_weights(self, k):
        T, R = transmission(self.profile, k, self.spec.mass_ratio)
        return T, R

    def _build_grid(self) -> KGrid:
        spec, fam = self.spec, self.spec.family
        sig = spec.sigma_k
        base = KGrid.around(spec.k0, sig, spec.width_factor, spec.n_nodes)
        if self.profile.is_free:
            return base
        k = base.nodes
        m2 = spec.amplitude(k) ** 2
        m2 = m2 / (m2 @ base.weights)
        T, R = self._channel_weights(k)
        floor = max(min(T @ (m2 * base.weights), R @ (m2 * base.weights)), 1e-300)
        target = np.log(TAIL_RTOL * floor)
        z = spec.width_factor
        while fam.log_tail(z) > target and z < MAX_TAIL_SIGMAS:
            z += 0.5
        lo, hi = spec.k0 - z * sig, spec.k0 + z * sig
        n_panels = max(1, int(np.ceil(spec.n_nodes * z / spec.width_factor / base.panel_nodes)))
        edges = np.linspace(lo, hi, n_panels + 1)
        if lo < 0 < hi:
            # keep k = 0 on a panel edge so no node lands on it
            edges = np.unique(np.concatenate([edges, [0.0]]))
            edges = edges[np.concatenate([[True], np.diff(edges) > 1e-9 * sig])]
        grid = KGrid(edges, base.panel_nodes)

        def integrand(nodes):
            a2 = spec.amplitude(nodes) ** 2
            t, r = self._channel_weights(nodes)
            tp = transmission_slope(self.profile, nodes, spec.mass_ratio, spec.k_scale)
            return np.stack([t * a2, r * a2, t * a2 * nodes, tp * a2])

        return grid.refine(integrand, rtol=REFINE_RTOL)

    @cached_property
    def data(self) -> ScatteringData:
        return tunneling_params(self.profile, self.k, self.spec.mass_ratio,
                                k_scale=self.spec.k_scale)

    @cached_property
    def T_bar(self) -> float:
        return float(self.w @ self.data.T)

    @cached_property
    def R_bar(self) -> float:
        return float(self.w @ self.data.R)

    @property
    def has_tr(self) -> bool:
        return self.T_bar > EMPTY_TRANSMISSION

    @property
    def has_ref(self) -> bool:
        return self.R_bar > EMPTY_REFLECTION

    def inc(self, g) -> float:
        return float(self.w @ g)

    def tr(self, g) -> float:
        _require(self.T_bar, "transmission", EMPTY_TRANSMISSION)
        return float(self.w @ (self.data.T * g)) / self.T_bar

    def ref(self, g) -> float:
        """Average over ``R M^2`` in the incident variable k."""
        _require(self.R_bar, "reflection", EMPTY_REFLECTION)
        return float(self.w @ (self.data.R * g)) / self.R_bar


class ChannelEmpty(DomainError):
    """A scattering channel carries (numerically) no probability."""


def _require(norm, name, floor):
    if not norm > floor:
        raise ChannelEmpty(f"{name} channel is empty (probability {norm:.3g})")


@lru_cache(maxsize=256)
def _cached_sample(spec: PacketSpec, segments: tuple) -> KSample:
    return KSample(spec, PotentialProfile(1.0, segments))


def k_sample(spec: PacketSpec, p: PotentialProfile) -> KSample:
    """Cached :class:`KSample` for a (packet, barrier) pair.

    No k-space quantity depends on the barrier position, so the cache is
    keyed on the segments alone.
    """
    return _cached_sample(spec, p.segments)


def norms(spec: PacketSpec, p: PotentialProfile):
    """(T_bar, R_bar); both are integrated independently."""
    s = k_sample(spec, p)
    return s.T_bar, s.R_bar


def k_moment(spec: PacketSpec, p: PotentialProfile, kind: PacketKind, n: int) -> float:
    """Normalised ``<k^n>`` of a packet kind.

    Reflected kinds return ``<(-k)^n>`` of the reflected packet, i.e. moments
    of the incident variable under ``R M^2``; to-be kinds coincide with the
    scattered kinds.
    """
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    s = k_sample(spec, p)
    kn = s.k ** int(n)
    if kind is PacketKind.INCIDENT:
        return s.inc(kn)
    if kind in (PacketKind.TRANSMITTED, PacketKind.TO_BE_TRANSMITTED):
        return s.tr(kn)
    return s.ref(kn)


def _channel_stats(s: KSample, kind: PacketKind):
    """(norm, mean_k, var_k, <G>, <(lnM')^2>, <dG^2>, <dG dk>) in incident k."""
    d = s.data
    if kind is PacketKind.INCIDENT:
        avg, norm = s.inc, 1.0
        g = np.zeros_like(s.k)
        lnm = s.dlnA
    elif kind in (PacketKind.TRANSMITTED, PacketKind.TO_BE_TRANSMITTED):
        avg, norm = s.tr, s.T_bar
        g = d.Jp
        lnm = s.dlnA + 0.5 * d.dlnT
    else:
        avg, norm = s.ref, s.R_bar
        g = d.Jp - d.Fp
        lnm = s.dlnA + 0.5 * d.dlnR
    mk = avg(s.k)
    dk = s.k - mk
    mg = avg(g)
    dg = g - mg
    return norm, mk, avg(dk * dk), mg, avg(lnm * lnm), avg(dg * dg), avg(dg * dk)


def moments(spec: PacketSpec, p: PotentialProfile, kind: PacketKind) -> MomentReport:
    """Full asymptotic moment report for one packet kind.

    The scattered and to-be kinds share k-distributions and phase spread;
    the to-be packets differ only by a translation that puts their centre of
    mass at x = 0 at t = 0, and they move forward.
    """
    s = k_sample(spec, p)
    v = spec.hbar_over_m
    norm, mk, vk, mg, lnm2, dg2, dgdk = _channel_stats(s, kind)
    if kind is PacketKind.INCIDENT:
        x = (v * mk, 0.0)
        var = (lnm2, 0.0, v * v * vk)
        mean_k = mk
    elif kind is PacketKind.TRANSMITTED:
        x = (v * mk, p.d - mg)
        var = (lnm2 + dg2, -2.0 * v * dgdk, v * v * vk)
        mean_k = mk
    elif kind is PacketKind.REFLECTED:
        x = (-v * mk, 2.0 * p.a + mg)
        var = (lnm2 + dg2, -2.0 * v * dgdk, v * v * vk)
        mean_k = -mk
    else:
        # the channel phase minus its mean slope: the scattered packet, translated
        x = (v * mk, 0.0)
        var = (lnm2 + dg2, -2.0 * v * dgdk, v * v * vk)
        mean_k = mk
    return MomentReport(kind, float(norm), float(mean_k), float(vk),
                        tuple(map(float, x)), tuple(map(float, var)))


def mean_x(spec: PacketSpec, p: PotentialProfile, kind: PacketKind, t):
    """Centre of mass (nm) of a packet kind at time ``t`` (fs)."""
    return moments(spec, p, kind).mean_x(t)


def var_x(spec: PacketSpec, p: PotentialProfile, kind: PacketKind, t):
    """Position variance (nm^2) of a packet kind at time ``t`` (fs)."""
    return moments(spec, p, kind).var_x(t)


@dataclass(frozen=True)
class JointMoments:
    """Probability-weighted sum of the transmitted and reflected packets.

    ``chi`` is dimensionless: it multiplies ``hbar t / m`` (nm^2).
    """

    b_bar: float
    l2: float
    chi: float
    var_k: float
    hbar_over_m: float
    k_inc: float

    def distance(self, t):
        return self.hbar_over_m * np.asarray(t, dtype=float) * self.k_inc - self.b_bar

    def variance(self, t):
        tau = self.hbar_over_m * np.asarray(t, dtype=float)
        return self.l2 - 2.0 * tau * self.chi + tau * tau * self.var_k


def _resolved_channels(s: KSample):
    out = []
    if s.has_tr:
        out.append((PacketKind.TRANSMITTED, s.T_bar))
    if s.has_ref:
        out.append((PacketKind.REFLECTED, s.R_bar))
    return out


def joint_moments(spec: PacketSpec, p: PotentialProfile) -> JointMoments:
    s = k_sample(spec, p)
    d = s.data
    b_bar = p.a + s.inc(d.Jp) - s.inc(d.R * d.Fp)
    v = spec.hbar_over_m
    l2 = chi = var_k = 0.0
    # a channel below its floor carries rounding-level weight and is dropped
    for kind, norm in _resolved_channels(s):
        m = moments(spec, p, kind)
        l2 += norm * m.var_x_coeffs[0]
        chi -= norm * m.var_x_coeffs[1] / (2.0 * v)
        var_k += norm * m.var_k
    return JointMoments(float(b_bar), float(l2), float(chi), float(var_k), v, s.inc(s.k))


def joint_distance(spec: PacketSpec, p: PotentialProfile, t):
    """``S_tr+ref(t)`` (nm) from the channel-weighted sum.

    Equals ``(hbar t/m) <k>_inc - b_bar``; see :func:`joint_distance_closed`.
    """
    out = 0.0
    # S_tr = <x>_tr - b, S_ref = a - <x>_ref
    for kind, norm in _resolved_channels(k_sample(spec, p)):
        x = moments(spec, p, kind).mean_x(t)
        out = out + norm * ((x - p.b) if kind is PacketKind.TRANSMITTED else (p.a - x))
    return out


def joint_distance_closed(spec: PacketSpec, p: PotentialProfile, t):
    return joint_moments(spec, p).distance(t)


def joint_variance(spec: PacketSpec, p: PotentialProfile, t):
    """(variance nm^2, l^2 nm^2, chi, joint <(dk)^2> nm^-2) at time ``t``."""
    j = joint_moments(spec, p)
    return j.variance(t), j.l2, j.chi, j.var_k


def l2_closed(spec: PacketSpec, p: PotentialProfile) -> float:
    """``l^2`` via ``<(ln'A)^2> - <ln'T ln'R>/4 + phase spreads``.

    Independent of :func:`joint_moments`, which sums the channel variances.
    """
    s = k_sample(spec, p)
    d = s.data
    Tb, Rb = s.T_bar, s.R_bar
    cross = -s.inc(d.dlnT * d.dlnR)
    jt = d.Jp - s.tr(d.Jp)
    out = s.inc(s.dlnA ** 2) + 0.25 * cross + Tb * s.tr(jt * jt)
    if s.has_ref:
        g = d.Jp - d.Fp
        jr = g - s.ref(g)
        out += Rb * s.ref(jr * jr)
    return out


def gaussian_closed_forms(spec: PacketSpec, p: PotentialProfile) -> dict:
    """Closed-form Gaussian moments in terms of incident averages of T and T'."""
    if spec.shape != "gaussian":
        raise DomainError("closed forms hold for the Gaussian weight only")
    s = k_sample(spec, p)
    d = s.data
    l0, k0 = spec.l0, spec.k0
    Tb, Rb = s.T_bar, s.R_bar
    tp = s.inc(d.Tp)
    rp = -tp
    dk_tr = tp / (4 * l0 * l0 * Tb)
    dk_ref = rp / (4 * l0 * l0 * Rb)
    q = (s.k - k0) ** 2
    return {
        "k_tr": k0 + dk_tr,
        "k_ref": k0 + dk_ref,
        "shift_product": tp / (4 * l0 * l0),
        "var_k_tr": s.inc(d.T * q) / Tb - dk_tr * tp / (2 * l0 * l0 * Tb) + dk_tr ** 2,
        "var_k_ref": s.inc(d.R * q) / Rb - dk_ref * rp / (2 * l0 * l0 * Rb) + dk_ref ** 2,
        "var_k_joint": (1 - tp * tp / (4 * l0 * l0 * Tb * Rb)) / (4 * l0 * l0),
    }
