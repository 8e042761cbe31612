"""Spin-precession clock recovering the starting-point shift.

Protocol: a uniform magnetic field along z fills all space except a padded
interval [a - l, b + l] around the barrier, so a spin prepared in the x-y
plane precesses only while its carrier travels the field regions.  The
packet is launched far inside the left field region with azimuth pi/4, and
the transmitted spin is read when the transmitted CM crosses a detector at
b + L.  The azimuth excess over a classical particle started at the origin
then measures where the transmitted particle effectively started.

The Zeeman term is diagonal in S_z, so the two spinor components evolve as
independent scalar scattering problems.  Each component is solved in a
gauge with its field offset subtracted globally: the field regions become
potential-free (standard asymptotics, shared spectral amplitudes) while the
pad and barrier acquire offsets -/+ hbar omega / 2.  Spin-up is the
component raised in energy by the field, which is what makes the azimuth
advance (rather than regress) at omega.

The clock is read on the transmission channel wave: its precession counts
omega times the span the channel wave spends in the field, namely the
detection time minus the channel's own residence inside [a - l, b + l].
All three times are CM crossings - detection on the synthesized transmitted
packet, entry and exit on the channel asymptotes (incidence-side wave at
a - l, transmitted wave at b + l).  The channel wave enters late by the
starting-point shift yet crosses the interior in pad time plus
effective-width time, so the shift survives into the readout.  This is the
discriminating observable: phase-delay bookkeeping applied to the full
wave instead would cancel the shift against the detection delay and always
return zero.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .decomposition import _phase_sign
from .model import (
    HBAR,
    BarrierSpec,
    NumericInvariantError,
    PiecewisePotential,
    group_velocity,
)
from .packets import PacketSpec, _synthesize, _trapezoid_weights, gaussian_spectrum
from .scattering import interior_table

# spatial points for clock synthesis; both channels are smooth envelopes at
# readout times, so this resolves them with tens of points per sigma
N_X_CLOCK = 2048
_CONTAINMENT_TOL = 1e-6
_T_DET_XTOL = 1e-7


@dataclass(frozen=True)
class FieldLayout:
    """Field-free pad l around the barrier and detector offset L beyond it.

    The magnetic field occupies everything outside [a - l, b + l]; the
    detector sits at b + L.  omega_larmor is the precession frequency in
    1/ps, proportional to the field strength.
    """

    margin: float           # l, nm
    detector_offset: float  # L, nm
    omega_larmor: float     # 1/ps

    def __post_init__(self):
        if self.margin <= 0.0:
            raise ValueError("field-free margin must be positive")
        if self.detector_offset <= self.margin:
            raise ValueError("detector offset must exceed the field-free margin")
        if self.omega_larmor < 0.0:
            raise ValueError("omega_larmor must be non-negative")


@dataclass(frozen=True)
class SpinReadout:
    """Detected spin state and the starting point inferred from it."""

    t_det: float        # ps
    sx: float           # units of hbar
    sy: float           # units of hbar
    x_start_est: float  # nm


@dataclass(frozen=True)
class StartExtrapolation:
    """Clock runs over a frequency ladder and their zero-field limit."""

    omegas: tuple
    estimates: tuple
    extrapolated: float


def spin_potentials(barrier: BarrierSpec, layout: FieldLayout):
    """Gauge-shifted potentials seen by the spin-up and spin-down components.

    In each component's gauge the field regions are level zero; the pad and
    the barrier interval are shifted down (up) by half a Zeeman quantum for
    spin-up (spin-down).  At omega_larmor = 0 both reduce to the bare
    barrier profile.
    """
    half_zeeman = 0.5 * HBAR * layout.omega_larmor
    a = barrier.left_edge
    b = barrier.right_edge
    lo = a - layout.margin
    hi = b + layout.margin

    def shifted(sigma):
        off = -sigma * half_zeeman
        return PiecewisePotential((
            (lo, a, off),
            (a, b, barrier.height + off),
            (b, hi, off),
        ))

    return shifted(+1.0), shifted(-1.0)


def _validate_clock(spec: PacketSpec, barrier: BarrierSpec, layout: FieldLayout):
    a = barrier.left_edge
    if a - layout.margin <= 0.0:
        raise ValueError("left field boundary a - l must stay right of the origin")
    if layout.margin < 5.0 * spec.l0:
        raise ValueError("field-free margin must be at least 5 l0 so the packet "
                         "dephases from the field before reaching the barrier")
    if layout.detector_offset - layout.margin < 5.0 * spec.l0:
        raise ValueError("detector must sit at least 5 l0 beyond the field boundary")
    if spec.x0 + 5.0 * spec.l0 > a - layout.margin:
        raise ValueError("packet must launch inside the left field region")
    # principal-branch guard: total classical field time must precess the
    # azimuth by less than pi/4 so arctan stays on its branch
    v = group_velocity(spec.k0, barrier.kinetic_coeff)
    t_field = (a + layout.detector_offset - 2.0 * layout.margin) / v
    if layout.omega_larmor * t_field >= 0.25 * math.pi:
        raise ValueError(
            "precession angle leaves the principal branch; reduce omega_larmor "
            "below %.6g" % (0.25 * math.pi / t_field)
        )


def invert_precession(sx, sy, left_edge, detector_offset, margin, k, omega_larmor,
                      kinetic_coeff):
    """Starting point from the detected spin azimuth.

    x_start_est = a + L - 2 l + (v/omega) [pi/4 - arctan(sy/sx)], with v the
    group velocity at k; for finite packets k is the transmission-weighted
    mean wavenumber.  A classical particle started at the origin lands
    exactly on azimuth pi/4 + omega (a + L - 2 l)/v, so the bracket measures
    where the transmitted particle effectively started.
    """
    if sx == 0.0:
        raise ValueError("sx = 0 puts the azimuth on a branch boundary; "
                         "reduce omega_larmor")
    v = group_velocity(k, kinetic_coeff)
    angle = math.atan(sy / sx)
    return left_edge + detector_offset - 2.0 * margin + (v / omega_larmor) * (
        0.25 * math.pi - angle
    )


def synthetic_precession(x_start, left_edge, detector_offset, margin, k,
                         omega_larmor, kinetic_coeff):
    """(sx, sy) a clock would read for a particle started at x_start."""
    v = group_velocity(k, kinetic_coeff)
    azimuth = 0.25 * math.pi + omega_larmor * (
        left_edge + detector_offset - 2.0 * margin - x_start
    ) / v
    return 0.5 * math.cos(azimuth), 0.5 * math.sin(azimuth)


def _asymptote_crossing(qs, coeff, x_pos, kinetic_coeff, label):
    """CM crossing time at x_pos of the free asymptote sum_q coeff_q e^{iqx}.

    A free packet's CM runs ballistically, x(t) = <-d arg(coeff)/dq> +
    v(<q>) t with both means over |coeff|^2, so the crossing time is closed
    form in spectral space.  Flux-weighted arrivals would instead average
    the slowness 1/v(q) and pick up a spectral-convexity bias; CM crossings
    keep every clock time on the same mean-wavenumber footing.
    """
    dens = np.abs(coeff) ** 2
    norm = float(np.trapezoid(dens, qs))
    if norm <= 0.0:
        raise NumericInvariantError(
            "channel spectrum carries no weight at the %s boundary" % label
        )
    grad = np.gradient(coeff, qs)
    start = -float(np.trapezoid(np.imag(np.conj(coeff) * grad), qs)) / norm
    speed = group_velocity(float(np.trapezoid(dens * qs, qs)) / norm,
                           kinetic_coeff)
    t_cross = (x_pos - start) / speed
    if t_cross <= 0.0:
        raise NumericInvariantError(
            "channel asymptote already past the %s boundary at launch" % label
        )
    return t_cross


def run_clock(spec: PacketSpec, barrier: BarrierSpec, layout: FieldLayout,
              n_x=N_X_CLOCK, bracket=None) -> SpinReadout:
    """Evolve both spin components, detect the transmitted CM, read the clock.

    Detection time t_det solves spin-averaged cm_tr(t) = b + L on the
    transmission channel.  The spin azimuth is pi/4 plus omega times the
    channel's field time: t_det minus its residence inside [a - l, b + l],
    the latter the spin-averaged gap between the CM crossing of the
    incidence-side channel asymptote at a - l and that of the transmitted
    asymptote at b + l.
    """
    if layout.omega_larmor <= 0.0:
        raise ValueError("omega_larmor must be positive to run the clock")
    _validate_clock(spec, barrier, layout)

    spectrum = gaussian_spectrum(spec)
    qs = spectrum.k
    weights = _trapezoid_weights(qs)
    support = (barrier.left_edge - layout.margin,
               barrier.right_edge + layout.margin)
    detector = barrier.right_edge + layout.detector_offset

    # channel weight sqrt(T) exp(i s gamma) takes the bare barrier's phase
    # branch: the layered profile deforms continuously into the barrier as
    # omega -> 0, and the branch sets the entry arrival through d(arg)/dk
    branch = np.where(_phase_sign(barrier, qs) == 0.0, 1.0,
                      _phase_sign(barrier, qs))
    components = []
    for potential in spin_potentials(barrier, layout):
        amps, tables = interior_table(qs, potential, barrier.kinetic_coeff)
        trans = np.abs(amps.t) ** 2
        refl = np.abs(amps.r) ** 2
        c_tr = trans + 1j * branch * np.sqrt(np.maximum(trans * refl, 0.0))
        components.append((amps, tables, c_tr, trans))

    v0 = group_velocity(spec.k0, barrier.kinetic_coeff)
    t_nominal = (detector - spec.x0) / v0
    t_lo, t_hi = bracket if bracket is not None else (0.7 * t_nominal, 1.5 * t_nominal)
    t_disp = HBAR * spec.l0**2 / barrier.kinetic_coeff
    pad = 8.0 * spec.l0 * math.sqrt(1.0 + (t_hi / t_disp) ** 2)
    lo = min(spec.x0, 2.0 * barrier.left_edge - spec.x0 - v0 * t_hi) - pad
    hi = spec.x0 + v0 * t_hi + pad
    x = np.linspace(lo, hi, n_x)

    base_u = spectrum.amplitude * weights / math.sqrt(2.0 * math.pi)

    def synthesize(t, component):
        amps, tables, c_tr, _ = components[component]
        u_full = base_u * np.exp(-1j * barrier.kinetic_coeff * qs**2 * t / HBAR)
        return _synthesize(x, qs, u_full, u_full * c_tr, amps, tables, support)

    def transmitted_cm_gap(t):
        total = 0.0
        for component in (0, 1):
            _, psi_tr = synthesize(t, component)
            dens = np.abs(psi_tr) ** 2
            norm = np.trapezoid(dens, x)
            total += 0.5 * float(np.trapezoid(x * dens, x) / norm)
        return total - detector

    gap_lo = transmitted_cm_gap(t_lo)
    gap_hi = transmitted_cm_gap(t_hi)
    if not (gap_lo < 0.0 < gap_hi):
        raise NumericInvariantError(
            "transmitted CM does not cross the detector inside the time "
            "bracket [%g, %g] ps (gaps %g, %g nm)" % (t_lo, t_hi, gap_lo, gap_hi)
        )
    t_det = float(brentq(transmitted_cm_gap, t_lo, t_hi, xtol=_T_DET_XTOL))

    for component in (0, 1):
        psi_full, _ = synthesize(t_det, component)
        n_full = float(np.trapezoid(np.abs(psi_full) ** 2, x))
        if abs(n_full - 1.0) > _CONTAINMENT_TOL:
            raise NumericInvariantError(
                "grid holds %.9f of component %d at detection; widen the bracket "
                "or the grid" % (n_full, component)
            )

    # channel residence inside [a - l, b + l]: entry and exit are CM
    # crossings of the channel asymptotes (incidence-side wave at a - l,
    # transmitted wave at b + l), closed form in spectral space
    t_entry = 0.0
    t_exit = 0.0
    for amps, _, c_tr, _ in components:
        t_entry += 0.5 * _asymptote_crossing(
            qs, spectrum.amplitude * c_tr, support[0], barrier.kinetic_coeff,
            "entry")
        t_exit += 0.5 * _asymptote_crossing(
            qs, spectrum.amplitude * amps.t, support[1], barrier.kinetic_coeff,
            "exit")

    azimuth = 0.25 * math.pi + layout.omega_larmor * (t_det - (t_exit - t_entry))
    sx = 0.5 * math.cos(azimuth)
    sy = 0.5 * math.sin(azimuth)

    density = np.abs(spectrum.amplitude) ** 2
    t_mean = 0.5 * (components[0][3] + components[1][3])
    k_tr = float(np.trapezoid(density * t_mean * qs, qs)
                 / np.trapezoid(density * t_mean, qs))
    x_est = invert_precession(sx, sy, barrier.left_edge, layout.detector_offset,
                              layout.margin, k_tr, layout.omega_larmor,
                              barrier.kinetic_coeff)
    return SpinReadout(t_det=t_det, sx=sx, sy=sy, x_start_est=x_est)


def richardson_ladder(estimates):
    """Zero-field limit from clock estimates at omega, omega/2, omega/4.

    The estimator error is O(omega), so two Richardson stages on the halved
    ladder cancel the linear and quadratic terms.
    """
    first = 2.0 * estimates[1] - estimates[0]
    second = 2.0 * estimates[2] - estimates[1]
    return (4.0 * second - first) / 3.0


def extrapolate_start(spec: PacketSpec, barrier: BarrierSpec, layout: FieldLayout,
                      n_x=N_X_CLOCK) -> StartExtrapolation:
    """Clock runs at omega, omega/2, omega/4, extrapolated to zero field."""
    omegas = tuple(layout.omega_larmor / 2.0**j for j in range(3))
    estimates = tuple(
        run_clock(spec, barrier, replace(layout, omega_larmor=w), n_x=n_x).x_start_est
        for w in omegas
    )
    return StartExtrapolation(
        omegas=omegas,
        estimates=estimates,
        extrapolated=richardson_ladder(estimates),
    )
