"""Closed-form traversal widths and times for rectangular barriers and wells.

All widths below are effective lengths in nm.  Dividing a width by the group
speed ``2*K*k/HBAR`` (see :func:`tunneltimes.model.group_velocity`) converts it
to a time in ps; :class:`TimescaleRecord` carries both forms.  For a
rectangular barrier or well of signed height V0 and width d the module
evaluates:

* ``phase_width``     -- stationary-phase delay expressed as a length,
  ``d + d(arg t)/dk`` for the transmission amplitude t.
* ``dwell_width``     -- probability stored between the edges divided by the
  incident density, ``integral_a^b |psi_k|^2 dx`` for a unit incident wave.
* ``effective_width`` -- width of the region effectively traversed by the
  transmitted channel at speed ``hbar*k/m``.
* ``starting_point``  -- mean starting coordinate of the transmitted channel
  when the full ensemble starts from x = 0 (left edge at a > 0).

The four satisfy ``phase_width == effective_width - starting_point``
identically; tests enforce this to near machine precision.

Numerics
--------
Everything is written in terms of ``v = (k^2 - beta*kappa0^2) * d^2`` and the
even kernels of :mod:`tunneltimes.kernels`, so a single expression covers the
below-barrier (v < 0), above-barrier (v > 0) and edge (v = 0) cases without
cancellation.  For opaque barriers (kappa*d > 20) an algebraically equivalent
form scaled by 1/sinh^2(kappa*d) avoids overflow; it stays finite beyond
kappa*d = 700 where sinh itself cannot be represented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import cos_sqrt, sinc4_gap, sinc_cos_gap, sinc_gap, sinc_sqrt
from .model import BarrierSpec, NumericInvariantError, group_velocity

__all__ = [
    "TimescaleRecord",
    "LongWaveLimits",
    "ScalingLimit",
    "ResonanceRecord",
    "ResonanceTable",
    "evaluate_widths",
    "phase_width",
    "dwell_width",
    "effective_width",
    "starting_point",
    "transmission_reflection",
    "longwave_limits",
    "scaling_limit",
    "resonance_table",
    "lorentz_width",
]

# Switch to the 1/sinh^2-scaled evanescent form once -v = (kappa*d)^2 exceeds
# this; at the seam both forms agree to rounding.
_DEEP_SWITCH = 400.0

# Flag long-wave well limits as divergent when kappa0*d sits this close to a
# multiple of pi (transparency pole of the k -> 0 ratios).
_POLE_WINDOW = 1e-8


def _quadruple_kernel(k2, k02, beta, d, v):
    """Width quadruple plus (T, R) on the kernel branch; array friendly."""
    d2 = d * d
    f1 = sinc_sqrt(v)
    den = 4.0 * k2 + (k02 * k02) * d2 * f1 * f1
    g1 = sinc4_gap(v)
    d_phase = 2.0 * d * (2.0 * k2 + beta * k02 - (k02 * k02) * d2 * g1) / den
    d_dwell = 2.0 * d * k2 * (2.0 - beta * k02 * d2 * g1) / den
    half = sinc_sqrt(0.25 * v)
    b1 = k2 - beta * k02 * (0.25 * v) * half * half
    d_eff = 4.0 * d * b1 * (1.0 - beta * k02 * d2 * sinc_gap(v)) / den
    x_start = -2.0 * beta * k02 * d * (f1 + k2 * d2 * sinc_cos_gap(v)) / den
    t_coef = 4.0 * k2 / den
    r_coef = (k02 * k02) * d2 * f1 * f1 / den
    return d_phase, d_dwell, d_eff, x_start, t_coef, r_coef


def _quadruple_deep(k2, k02, d, v):
    """Same quadruple for opaque barriers, scaled by 1/sinh^2(kappa*d).

    Only the below-barrier branch of a positive barrier can reach here
    (v < -_DEEP_SWITCH requires beta = +1 and kappa^2 = k02 - k2 > 0).
    """
    us = np.sqrt(-v)  # kappa * d > 20
    kap2 = k02 - k2
    e1 = np.exp(-us)
    e2 = e1 * e1
    om = 1.0 - e2
    s2 = 4.0 * e2 / (om * om)          # 1/sinh^2(us)
    inv_sinh = 2.0 * e1 / om           # 1/sinh(us)
    coth = (1.0 + e2) / om
    r2 = k02 / kap2
    den = 4.0 * k2 * s2 + k02 * k02 / kap2
    grow = coth / us
    d_phase = 2.0 * d * (k2 * (kap2 - k2) / kap2 * s2 + (k02 * k02 / kap2) * grow) / den
    d_dwell = 2.0 * d * k2 * ((kap2 - k2) / kap2 * s2 + (k02 / kap2) * grow) / den
    onep = 1.0 + e1
    b1_s2 = k2 * s2 + k02 * e1 / (onep * onep)            # B1/sinh^2
    b1_us = (k2 * inv_sinh + 0.5 * k02 * (1.0 - e1) / onep) / us  # B1/(us*sinh)
    d_eff = 4.0 * d * (r2 * b1_us - (k2 / kap2) * b1_s2) / den
    x_start = (
        -2.0 * k02 * d
        * (((kap2 - k2) / kap2) * inv_sinh / us + (k2 / kap2) * coth * inv_sinh)
        / den
    )
    t_coef = 4.0 * k2 * s2 / den
    r_coef = (k02 * k02 / kap2) / den
    return d_phase, d_dwell, d_eff, x_start, t_coef, r_coef


def _quadruple(k_arr, k02, beta, d):
    k2 = k_arr * k_arr
    if k02 == 0.0:
        # free particle: every width is exactly d, transmission is total
        ones = np.ones_like(k2)
        zeros = np.zeros_like(k2)
        return [d * ones, d * ones, d * ones, zeros, ones, zeros]
    v = (k2 - beta * k02) * (d * d)
    deep = v < -_DEEP_SWITCH
    out = [np.empty_like(k2) for _ in range(6)]
    shallow = ~deep
    if shallow.any():
        vals = _quadruple_kernel(k2[shallow], k02, beta, d, v[shallow])
        for slot, val in zip(out, vals):
            slot[shallow] = val
    if deep.any():
        vals = _quadruple_deep(k2[deep], k02, d, v[deep])
        for slot, val in zip(out, vals):
            slot[deep] = val
    return out


@dataclass(frozen=True)
class TimescaleRecord:
    """Widths (nm), their time equivalents (ps) and T/R at one or many k."""

    k: object
    phase_width: object
    dwell_width: object
    effective_width: object
    starting_point: object
    transmission: object
    reflection: object
    phase_time: object
    dwell_time: object
    transmission_time: object
    free_time: object


def evaluate_widths(barrier: BarrierSpec, k) -> TimescaleRecord:
    """Evaluate the width quadruple, times and T/R at wavenumber(s) k > 0."""
    scalar = np.ndim(k) == 0
    k_arr = np.atleast_1d(np.asarray(k, dtype=float))
    if not np.all(k_arr > 0.0):
        raise ValueError("wavenumber k must be positive")
    k02 = barrier.kappa0 ** 2
    d = barrier.width
    d_phase, d_dwell, d_eff, x_start, t_coef, r_coef = _quadruple(
        k_arr, k02, barrier.beta, d
    )
    speed = group_velocity(k_arr, barrier.kinetic_coeff)
    fields = (
        k_arr,
        d_phase,
        d_dwell,
        d_eff,
        x_start,
        t_coef,
        r_coef,
        d_phase / speed,
        d_dwell / speed,
        d_eff / speed,
        d / speed,
    )
    if scalar:
        fields = tuple(float(f[0]) for f in fields)
    return TimescaleRecord(*fields)


def phase_width(barrier: BarrierSpec, k):
    return evaluate_widths(barrier, k).phase_width


def dwell_width(barrier: BarrierSpec, k):
    return evaluate_widths(barrier, k).dwell_width


def effective_width(barrier: BarrierSpec, k):
    return evaluate_widths(barrier, k).effective_width


def starting_point(barrier: BarrierSpec, k):
    return evaluate_widths(barrier, k).starting_point


def transmission_reflection(barrier: BarrierSpec, k):
    """Closed-form (T, R) for the rectangle; T + R = 1 to rounding."""
    rec = evaluate_widths(barrier, k)
    return rec.transmission, rec.reflection


@dataclass(frozen=True)
class LongWaveLimits:
    """k -> 0 limits of the four width ratios D/d.

    For wells whose kappa0*d sits within ``_POLE_WINDOW`` of a multiple of pi
    the diverging entries are reported as signed infinities (sign taken from
    the approach kappa0*d -> n*pi from below) and ``divergent`` is True.
    """

    phase_ratio: float
    dwell_ratio: float
    effective_ratio: float
    starting_ratio: float
    divergent: bool = False
    pole_index: int = 0


def longwave_limits(barrier: BarrierSpec) -> LongWaveLimits:
    """Limits of (phase, dwell, effective, starting)/d as k -> 0+."""
    u0 = barrier.kappa0 * barrier.width
    if u0 == 0.0:
        # Free particle: every width equals d at all k.
        return LongWaveLimits(1.0, 1.0, 1.0, 0.0)
    if barrier.beta < 0.0:
        near = round(u0 / math.pi)
        if near >= 1 and abs(u0 - near * math.pi) < _POLE_WINDOW:
            odd = near % 2 == 1
            return LongWaveLimits(
                math.inf,
                0.0,
                math.inf if odd else 0.0,
                math.inf if odd else -math.inf,
                divergent=True,
                pole_index=near,
            )
    v0 = -barrier.beta * u0 * u0
    f1 = sinc_sqrt(v0)
    c0 = cos_sqrt(v0)
    return LongWaveLimits(
        -2.0 * c0 / (v0 * f1),
        0.0,
        2.0 * f1 / (1.0 + c0),
        2.0 / (v0 * f1),
    )


@dataclass(frozen=True)
class ScalingLimit:
    """Exact widths at k = d/lam^2 next to their d -> 0 limiting values.

    In the joint limit d -> 0, k = d/lam^2 with lam and kappa0 fixed, the
    transmission tends to the constant 4/(4 + lam^4 kappa0^4) while the phase
    width and starting point diverge like 1/d; the effective width stays d.
    The dwell width tends to ``transmission_target * d`` for both signs of
    the potential (the dwell integral forces the same form for wells as for
    barriers).
    """

    lam: float
    k: float
    transmission: float
    transmission_target: float
    phase_width: float
    phase_target: float
    dwell_width: float
    dwell_target: float
    effective_width: float
    effective_target: float
    starting_point: float
    starting_target: float


def scaling_limit(barrier: BarrierSpec, lam: float) -> ScalingLimit:
    """Evaluate the widths at k = width/lam^2 and their small-width targets."""
    if lam <= 0.0:
        raise ValueError("length scale lam must be positive")
    d = barrier.width
    k = d / lam**2
    rec = evaluate_widths(barrier, k)
    k02 = barrier.kappa0 ** 2
    lam4 = lam**4
    denom = 4.0 + lam4 * k02 * k02
    t_star = 4.0 / denom
    phase_star = 2.0 * barrier.beta * lam4 * k02 / (denom * d)
    return ScalingLimit(
        lam=lam,
        k=k,
        transmission=rec.transmission,
        transmission_target=t_star,
        phase_width=rec.phase_width,
        phase_target=phase_star,
        dwell_width=rec.dwell_width,
        dwell_target=t_star * d,
        effective_width=rec.effective_width,
        effective_target=d,
        starting_point=rec.starting_point,
        starting_target=-phase_star,
    )


@dataclass(frozen=True)
class ResonanceRecord:
    """Width ratios at the transparent point kappa*d = n*pi (T = 1)."""

    n: int
    k_res: float
    phase_ratio: float
    dwell_ratio: float
    effective_ratio: float
    starting_ratio: float


@dataclass(frozen=True)
class ResonanceTable:
    records: tuple
    omitted: tuple  # (n, reason) pairs


def resonance_table(barrier: BarrierSpec, n_max: int) -> ResonanceTable:
    """Transparency points n = 1..n_max with closed-form width ratios.

    Orders whose incident wavenumber would be imaginary (wells deeper than
    the interior momentum n*pi/d allows) are listed in ``omitted`` with a
    reason instead of producing a record.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    d = barrier.width
    k02 = barrier.kappa0 ** 2
    beta = barrier.beta
    records = []
    omitted = []
    for n in range(1, n_max + 1):
        q = n * math.pi / d
        k2 = beta * k02 + q * q
        if k2 <= 0.0:
            omitted.append(
                (n, f"k_res would be imaginary (k_res^2 = {k2:.6g} <= 0)")
            )
            continue
        shift = beta * k02 * d * d / (2.0 * n * n * math.pi * math.pi)
        records.append(
            ResonanceRecord(
                n=n,
                k_res=math.sqrt(k2),
                phase_ratio=1.0 + shift,
                dwell_ratio=1.0 + shift,
                effective_ratio=1.0 if n % 2 == 1 else 1.0 + 2.0 * shift,
                starting_ratio=shift if n % 2 == 0 else -shift,
            )
        )
    return ResonanceTable(records=tuple(records), omitted=tuple(omitted))


def lorentz_width(
    barrier: BarrierSpec,
    n: int,
    delta: float | None = None,
    consistency_tol: float = 1e-4,
) -> float:
    """Fit the Lorentzian length a0 of the n-th transparency peak.

    Near a transparent point, T(k) = 1/(1 + a0^2 (k - k_res)^2).  The fit
    samples R/T at k_res +- delta and +- delta/2, solves for a0 on each
    stencil and averages the two sides (killing the odd-order error).  If the
    two stencil sizes disagree by more than ``consistency_tol`` relative, the
    peak is not Lorentzian at this resolution and the fit aborts.
    """
    table = resonance_table(barrier, n)
    record = next((r for r in table.records if r.n == n), None)
    if record is None:
        reason = dict(table.omitted).get(n, "order not present")
        raise ValueError(f"no transparency point of order n={n}: {reason}")
    k_res = record.k_res
    if delta is None:
        delta = 1e-3 * k_res

    def a0_squared(step: float) -> float:
        acc = 0.0
        for kk in (k_res - step, k_res + step):
            t_coef, r_coef = transmission_reflection(barrier, kk)
            acc += (r_coef / t_coef) / (kk - k_res) ** 2
        return 0.5 * acc

    coarse = math.sqrt(a0_squared(delta))
    fine = math.sqrt(a0_squared(0.5 * delta))
    if abs(coarse - fine) > consistency_tol * abs(fine):
        raise NumericInvariantError(
            "Lorentzian fit did not converge: a0 estimates "
            f"{coarse:.9g} (delta) and {fine:.9g} (delta/2) disagree beyond "
            f"{consistency_tol:g} relative; reduce delta={delta:g}"
        )
    return fine
