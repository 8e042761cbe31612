"""Transfer-matrix scattering for piecewise-constant potentials.

Conventions: a particle of energy E = kinetic_coeff * k**2 comes in from
the left with unit amplitude, so

    psi(x) = exp(ikx) + r exp(-ikx)   for x <= x_min,
    psi(x) = t exp(ikx)               for x >= x_max,

with (x_min, x_max) the support of the potential.  Inside a uniform
region at level V the squared local wavenumber is z = (E - V) /
kinetic_coeff; z < 0 marks a classically forbidden (evanescent) region.
Region propagators act on real (psi, psi') Cauchy data and have unit
determinant; thick evanescent regions are rescaled by exp(-kappa L) on
the fly so products stay representable for kappa L up to ~700.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import kernels
from .model import energy

# below this kappa*L the unscaled cosh/sinh entries stay < 2.5e8, far
# from overflow even after products over many regions
_SCALE_THRESHOLD = 20.0


def _region_matrix(z, length):
    """Scaled (psi, psi') propagator over one uniform region.

    Returns (mat, u) with the true propagator equal to exp(u) * mat.
    """
    v = z * length * length
    if v < 0.0:
        u = math.sqrt(-v)
        if u > _SCALE_THRESHOLD:
            kap = u / length
            em = math.exp(-2.0 * u)
            ch = 0.5 * (1.0 + em)
            sh = 0.5 * (1.0 - em)
            return np.array([[ch, sh / kap], [kap * sh, ch]]), u
    c = kernels.cos_sqrt(v)
    f = length * kernels.sinc_sqrt(v)
    return np.array([[c, f], [-z * f, c]]), 0.0


def transfer_matrix(k, potential, kinetic_coeff):
    """Scaled propagator across the whole support, left edge to right edge.

    Returns (mat, log_scale); the true propagator is exp(log_scale) * mat,
    and det(mat) = exp(-2 log_scale) up to rounding.
    """
    e = energy(k, kinetic_coeff)
    mat = np.eye(2)
    log_scale = 0.0
    for xl, xr, lev in potential.filled_regions():
        z = (e - lev) / kinetic_coeff
        pj, u = _region_matrix(z, xr - xl)
        mat = pj @ mat
        log_scale += u
    return mat, log_scale


@dataclass(frozen=True)
class Amplitudes:
    """Transmission/reflection amplitudes at one wavenumber."""

    k: float
    t: complex
    r: complex
    log_scale: float = 0.0
    det_defect: float = 0.0

    @property
    def transmission(self):
        return abs(self.t) ** 2

    @property
    def reflection(self):
        return abs(self.r) ** 2

    @property
    def phase(self):
        """arg t on the principal branch."""
        return cmath.phase(self.t)


def amplitudes(k, potential, kinetic_coeff):
    """t and r for unit incidence from the left at wavenumber k > 0."""
    k = float(k)
    if k <= 0:
        raise ValueError("need k > 0")
    mat, s = transfer_matrix(k, potential, kinetic_coeff)
    a, b = potential.support
    den = mat[0, 0] + mat[1, 1] + 1j * (mat[1, 0] / k - k * mat[0, 1])
    t = 2.0 * cmath.exp(-1j * k * (b - a) - s) / den
    num = mat[1, 1] - mat[0, 0] - 1j * (k * mat[0, 1] + mat[1, 0] / k)
    r = cmath.exp(2j * k * a) * num / den
    # det(mat) should be exp(-2s); normalize the residual by the entry
    # products so the check stays meaningful when exp(-2s) underflows
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    scale = max(1.0, abs(mat[0, 0] * mat[1, 1]) + abs(mat[0, 1] * mat[1, 0]))
    defect = (det - math.exp(-2.0 * s)) / scale
    return Amplitudes(k=k, t=complex(t), r=complex(r), log_scale=s, det_defect=defect)


@dataclass(frozen=True)
class SweepAmplitudes:
    """Amplitudes on a dense ascending k grid, phase already unwrapped."""

    k: np.ndarray
    t: np.ndarray
    r: np.ndarray
    phase: np.ndarray

    @property
    def transmission(self):
        return np.abs(self.t) ** 2

    @property
    def reflection(self):
        return np.abs(self.r) ** 2


def amplitudes_sweep(ks, potential, kinetic_coeff):
    """amplitudes() over an ascending k grid; arg t unwrapped along it.

    The grid must be fine enough that arg t moves by less than pi
    between neighbors, or the unwrap is meaningless.
    """
    ks = np.asarray(ks, dtype=float)
    t = np.empty(ks.shape, dtype=complex)
    r = np.empty(ks.shape, dtype=complex)
    for i, k in enumerate(ks):
        amp = amplitudes(k, potential, kinetic_coeff)
        t[i] = amp.t
        r[i] = amp.r
    return SweepAmplitudes(k=ks, t=t, r=r, phase=np.unwrap(np.angle(t)))


def ddk(fn, k, h=None):
    """d(fn)/dk at k by Richardson-extrapolated central differences.

    Uses the 4-point stencil k +- h, k +- 2h; fn must be smooth there.
    The default step balances truncation against rounding for phase-like
    functions of k in 1/nm.
    """
    if h is None:
        h = max(1e-6, 1e-4 * abs(k))
    d1 = (fn(k + h) - fn(k - h)) / (2.0 * h)
    d2 = (fn(k + 2.0 * h) - fn(k - 2.0 * h)) / (4.0 * h)
    return (4.0 * d1 - d2) / 3.0


@dataclass(frozen=True)
class RegionTable:
    """Right-edge Cauchy data for one region, arrays over the k grid.

    The true data at x_right is (psi, dpsi) * exp(sigma).  Wavefunction
    values inside the region must be continued from the right edge: that
    is the growing direction under a barrier, so the continuation only
    amplifies and never cancels.
    """

    x_left: float
    x_right: float
    z: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    sigma: np.ndarray


def interior_table(ks, potential, kinetic_coeff):
    """(SweepAmplitudes, [RegionTable, ...]) for stationary-state evaluation."""
    ks = np.asarray(ks, dtype=float)
    amps = amplitudes_sweep(ks, potential, kinetic_coeff)
    regions = potential.filled_regions()
    n = ks.size
    tables = [
        {
            "z": np.empty(n),
            "psi": np.empty(n, dtype=complex),
            "dpsi": np.empty(n, dtype=complex),
            "sigma": np.empty(n),
        }
        for _ in regions
    ]
    b = potential.support[1]
    for i, k in enumerate(ks):
        e = energy(k, kinetic_coeff)
        psi = amps.t[i] * cmath.exp(1j * k * b)
        dpsi = 1j * k * psi
        sigma = 0.0
        for j in range(len(regions) - 1, -1, -1):
            xl, xr, lev = regions[j]
            z = (e - lev) / kinetic_coeff
            norm = max(abs(psi), abs(dpsi) / k)
            if norm > 0.0:
                psi /= norm
                dpsi /= norm
                sigma += math.log(norm)
            tables[j]["z"][i] = z
            tables[j]["psi"][i] = psi
            tables[j]["dpsi"][i] = dpsi
            tables[j]["sigma"][i] = sigma
            # adjugate of the unit-determinant propagator pulls the data
            # back to the region's left edge
            pj, u = _region_matrix(z, xr - xl)
            psi, dpsi = pj[1, 1] * psi - pj[0, 1] * dpsi, -pj[1, 0] * psi + pj[0, 0] * dpsi
            sigma += u
    return amps, [
        RegionTable(x_left=reg[0], x_right=reg[1], **tab)
        for reg, tab in zip(regions, tables)
    ]


def _profile_values(x, k, t, r, region_tables, support):
    """psi_k at points x from precomputed single-k interior data."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape, dtype=complex)
    a, b = support
    left = x <= a
    right = x >= b
    out[left] = np.exp(1j * k * x[left]) + r * np.exp(-1j * k * x[left])
    out[right] = t * np.exp(1j * k * x[right])
    mid = ~(left | right)
    for reg in region_tables:
        m = mid & (x >= reg.x_left) & (x < reg.x_right)
        if not m.any():
            continue
        dx = x[m] - reg.x_right
        v = reg.z[0] * dx * dx
        out[m] = (
            reg.psi[0] * kernels.cos_sqrt(v) + reg.dpsi[0] * dx * kernels.sinc_sqrt(v)
        ) * math.exp(reg.sigma[0])
    return out


def stationary_value(x, k, potential, kinetic_coeff):
    """Stationary scattering state psi_k(x) for unit incidence, any x.

    Vectorized over x; exact piecewise evaluation, no spatial grid.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    amps, tables = interior_table(np.array([k], dtype=float), potential, kinetic_coeff)
    out = _profile_values(
        np.atleast_1d(x), k, amps.t[0], amps.r[0], tables, potential.support
    )
    return complex(out[0]) if scalar else out


def dwell_norm(k, potential, kinetic_coeff, x_min=None, x_max=None):
    """Integral of |psi_k|**2 over [x_min, x_max] by adaptive quadrature.

    Defaults to the support of the potential.  With unit incident
    amplitude this integral divided by the incident flux is the dwell
    time.
    """
    a, b = potential.support
    x_min = a if x_min is None else float(x_min)
    x_max = b if x_max is None else float(x_max)
    amps, tables = interior_table(np.array([k], dtype=float), potential, kinetic_coeff)
    t, r = amps.t[0], amps.r[0]

    def density(x):
        val = _profile_values(
            np.atleast_1d(np.asarray(x, dtype=float)),
            k,
            t,
            r,
            tables,
            potential.support,
        )
        return float(abs(val[0]) ** 2)

    breaks = sorted(
        {xl for xl, _, _ in potential.filled_regions()}
        | {xr for _, xr, _ in potential.filled_regions()}
    )
    interior = [p for p in breaks if x_min < p < x_max]
    val, _ = quad(density, x_min, x_max, points=interior or None, limit=200)
    return val
