"""Closed-form ergodic-rate lower bounds and their special functions.

The central quantity is ``omega``: the position-averaged excess correlation
between the spatial signatures of two drones independently uniform in a
spherical shell. It feeds the combining-receiver rate bound, whose remaining
terms capture channel-estimation noise and thermal noise under
channel-inversion power control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import si_ci_arrays
from .errors import SwarmMimoError
from .geometry import ArrayGeometry, ShellRegion


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------


def si(x):
    """Sine integral, the integral of sin(t)/t from 0 to x. Odd in x."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros_like(arr)
    pos = np.abs(arr) > 0
    s, _ = si_ci_arrays(np.abs(arr[pos]))
    out[pos] = np.sign(arr[pos]) * s
    return float(out[0]) if scalar else out


def ci(x):
    """Cosine integral for x > 0."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr <= 0):
        raise SwarmMimoError("ci requires x > 0")
    _, c = si_ci_arrays(arr)
    return float(c[0]) if scalar else c


def cb_db(b, region: ShellRegion):
    """Moments E[cos(b/d)] and E[sin(b/d)] for a shell-distributed radius d.

    The radius density is ``3 r^2 / (r_max^3 - r_min^3)`` on the shell; both
    moments are available in closed form through Si and Ci. Even/odd parity
    in ``b`` is applied, and the surface limit returns
    ``(cos(b/R), sin(b/R))`` exactly.
    """
    arr = np.asarray(b, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    sign = np.sign(arr)
    mag = np.abs(arr)
    c = np.ones_like(mag)
    d = np.zeros_like(mag)
    pos = mag > 0
    if np.any(pos):
        m = mag[pos]
        if region.is_surface or region.r_max - region.r_min < 1e-6 * region.r_max:
            c[pos] = np.cos(m / region.r_max)
            d[pos] = np.sin(m / region.r_max)
        else:
            c[pos], d[pos] = _cd_shell(m, region.r_min, region.r_max)
    d *= sign
    if scalar:
        return float(c[0]), float(d[0])
    return c, d


def _cd_shell(b, r_min, r_max):
    "Closed-form shell moments for strictly positive b."

    def endpoint(r):
        arg = b / r
        s, c_int = si_ci_arrays(arg)
        cosv = np.cos(arg)
        sinv = np.sin(arg)
        f = (2.0 * r * r - b * b) * r * cosv - b * r * r * sinv - b**3 * s
        g = (2.0 * r * r - b * b) * r * sinv + b * r * r * cosv + b**3 * c_int
        return f, g

    f_hi, g_hi = endpoint(r_max)
    f_lo, g_lo = endpoint(r_min)
    norm = 2.0 * (r_max**3 - r_min**3)
    return (f_hi - f_lo) / norm, (g_hi - g_lo) / norm


def expected_phase_sinc(dp: int, dq: int, geometry: ArrayGeometry, lam: float) -> float:
    """Spherical average of the inter-element phase factor.

    Averaging ``exp(-i (2 pi / lam) sin(theta) (dp dx cos(phi) + dq dy
    sin(phi)))`` over an isotropic direction gives
    ``sinc((2 / lam) * sqrt(dp^2 dx^2 + dq^2 dy^2))`` with the normalized
    sinc convention sin(pi x) / (pi x).
    """
    arg = (2.0 / lam) * math.hypot(dp * geometry.delta_x, dq * geometry.delta_y)
    return float(np.sinc(arg))


# ---------------------------------------------------------------------------
# signature-correlation excess
# ---------------------------------------------------------------------------


def _offset_products(count: int, delta: int):
    "Index products a^2 - (a - delta)^2 for all in-range positions."
    a = np.arange(max(0, delta), count + min(0, delta))
    return delta * (2 * a - delta)


def _omega_sum(geometry: ArrayGeometry, lam: float, cd_of_b) -> float:
    """Shared pair-sum: sinc^2 weight times the radial moment factor.

    ``cd_of_b`` maps an array of b values to C^2 + D^2; evaluation is
    memoized on the exact integer index products so repeated geometry pairs
    cost one special-function call.
    """
    mx, my = geometry.m_x, geometry.m_y
    dx2, dy2 = geometry.delta_x**2, geometry.delta_y**2
    scale = math.pi / lam
    cache: dict[tuple[int, int], float] = {}
    total = 0.0
    for dp in range(-(mx - 1), mx):
        px = _offset_products(mx, dp)
        for dq in range(-(my - 1), my):
            if dp == 0 and dq == 0:
                continue
            w = expected_phase_sinc(dp, dq, geometry, lam) ** 2
            if w < 1e-30:
                continue
            qy = _offset_products(my, dq)
            keys = [(int(p), int(q)) for p in px for q in qy]
            missing = sorted({k for k in keys if k not in cache})
            if missing:
                bvals = np.array([scale * (p * dx2 + q * dy2) for p, q in missing])
                vals = cd_of_b(bvals)
                cache.update(zip(missing, vals))
            total += w * sum(cache[k] for k in keys)
    return total


def omega(geometry: ArrayGeometry, lam: float, region: ShellRegion) -> float:
    """Excess signature correlation for shell-uniform drone positions.

    Nonnegative; zero for a line array at spacings that are multiples of
    half a wavelength. Requires the shell inner radius to exceed the array
    aperture.
    """
    if region.r_min <= geometry.aperture():
        raise SwarmMimoError(
            f"inner radius {region.r_min} must exceed the aperture "
            f"{geometry.aperture():.3f}"
        )

    def cd_of_b(b):
        c, d = cb_db(b, region)
        return np.atleast_1d(c) ** 2 + np.atleast_1d(d) ** 2

    return _omega_sum(geometry, lam, cd_of_b)


def omega_surface(geometry: ArrayGeometry, lam: float) -> float:
    """Limit of :func:`omega` when drones sit on a far sphere (C^2+D^2 = 1)."""
    return _omega_sum(geometry, lam, lambda b: np.ones_like(np.atleast_1d(b)))


# ---------------------------------------------------------------------------
# rate bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateParams:
    """Everything entering the closed-form rate bounds.

    ``rho_p = inf`` models perfect channel knowledge. ``kappa`` is the mean
    reciprocal effective gain and ``chi_wc`` the worst-case mean gain used
    for pilot sizing; their product never exceeds 1.
    """

    geometry: ArrayGeometry
    region: ShellRegion
    lam: float
    k: int
    rho_u: float
    rho_p: float
    prelog: float
    kappa: float = 1.0
    chi_wc: float = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise SwarmMimoError("drone count must be >= 1")
        if self.rho_u <= 0 or self.rho_p <= 0:
            raise SwarmMimoError("SNR targets must be positive")
        if not 0.0 < self.prelog <= 1.0:
            raise SwarmMimoError("pre-log fraction must be in (0, 1]")
        if self.kappa * self.chi_wc > 1.0 + 1e-9:
            raise SwarmMimoError(
                "kappa * chi_wc cannot exceed 1 (it is a mean reciprocal times a minimum)"
            )
        if self.lam <= 0:
            raise SwarmMimoError("wavelength must be positive")

    @property
    def m(self) -> int:
        return self.geometry.m


def _estimation_noise_term(p: RateParams) -> float:
    "Channel-estimation plus noise contribution with worst-case pilot sizing."
    if math.isinf(p.rho_p):
        return 0.0
    ratio = p.region.mean_square_radius() / p.region.r_max**2
    return (1.0 + p.k * p.rho_u) * p.kappa * p.chi_wc * ratio / (p.rho_u * p.rho_p)


def mrc_bound_shell(params: RateParams, omega_value: float | None = None) -> float:
    """Ergodic-rate lower bound (bits/s/Hz) for shell-uniform drones.

    ``omega_value`` short-circuits the pair sum when the caller already has
    it (sweeps, optimal spacings).
    """
    p = params
    if omega_value is None:
        omega_value = omega(p.geometry, p.lam, p.region)
    m = p.m
    denom = (
        p.rho_u * (p.k - 1) * (1.0 + omega_value / m)
        + 1.0
        + _estimation_noise_term(p)
    )
    return p.prelog * math.log2(1.0 + m * p.rho_u / denom)


def mrc_bound_general(
    interference_moment: float,
    e_inv_beta_chi: float,
    params: RateParams,
    d_wc: float | None = None,
) -> float:
    """Rate bound from externally supplied moments (arbitrary placements).

    ``interference_moment`` is the mean of ``p_uj p_uk |g_k^H g_j|^2`` for
    one interferer; ``e_inv_beta_chi`` the mean of ``1 / (beta chi)``.
    Feeding the closed-form shell moments reproduces
    :func:`mrc_bound_shell` exactly.
    """
    p = params
    m = p.m
    if d_wc is None:
        d_wc = p.region.r_max
    est = 0.0
    if not math.isinf(p.rho_p):
        est = (
            (1.0 + p.k * p.rho_u)
            * e_inv_beta_chi
            * (p.lam / (4.0 * math.pi * d_wc)) ** 2
            * p.chi_wc
            / (p.rho_u * p.rho_p)
        )
    denom = (p.k - 1) * interference_moment / (m * p.rho_u) + est + 1.0
    return p.prelog * math.log2(1.0 + m * p.rho_u / denom)


def shell_moments(params: RateParams, omega_value: float | None = None):
    """Closed-form (interference_moment, e_inv_beta_chi) for the shell model."""
    p = params
    if omega_value is None:
        omega_value = omega(p.geometry, p.lam, p.region)
    moment = p.rho_u**2 * (p.m + omega_value)
    e_inv = (
        p.kappa
        * (4.0 * math.pi / p.lam) ** 2
        * p.region.mean_square_radius()
    )
    return moment, e_inv


def mrc_bound_optimal(params: RateParams, array_kind: str = "ula") -> float:
    """Far-sphere rate bound at an optimal spacing.

    The line-array branch drops the correlation excess entirely; the
    rectangular branch keeps the residual pair sum of its own geometry.
    """
    p = params
    kind = array_kind.lower()
    if kind == "ula":
        omega_value = 0.0
    elif kind == "ura":
        omega_value = omega_surface(p.geometry, p.lam)
    else:
        raise SwarmMimoError(f"unknown array kind {array_kind!r}")
    m = p.m
    est = 0.0
    if not math.isinf(p.rho_p):
        est = (1.0 + p.k * p.rho_u) * p.kappa * p.chi_wc / (p.rho_u * p.rho_p)
    denom = p.rho_u * (p.k - 1) * (1.0 + omega_value / m) + 1.0 + est
    return p.prelog * math.log2(1.0 + m * p.rho_u / denom)


def zf_bound_two(expectation_estimate: float, prelog: float, rho_u: float) -> float:
    """Two-drone zero-forcing rate bound from the sampled inverse moment.

    ``expectation_estimate`` is the mean of ``1 / (M - (1 + cross/M))``
    where ``cross`` is the pairwise signature correlation sum; it comes from
    the Monte Carlo module.
    """
    if expectation_estimate <= 0:
        raise SwarmMimoError("inverse-SINR expectation must be positive")
    return prelog * math.log2(1.0 + rho_u / expectation_estimate)


def m_required(q_target: float, bandwidth: float, params: RateParams) -> int:
    """Smallest element count whose optimal-spacing bound meets a throughput.

    Inverts the line-array far-sphere bound at target ``q_target`` bits/s in
    ``bandwidth`` Hz and rounds up.
    """
    p = params
    if q_target < 0:
        raise SwarmMimoError("target throughput must be nonnegative")
    if q_target == 0:
        return 0
    est = 0.0
    if not math.isinf(p.rho_p):
        est = p.kappa * p.chi_wc * (1.0 + p.k * p.rho_u) / (p.rho_u**2 * p.rho_p)
    factor = (p.k - 1) + 1.0 / p.rho_u + est
    snr_needed = 2.0 ** (q_target / (p.prelog * bandwidth)) - 1.0
    return math.ceil(factor * snr_needed - 1e-9)
