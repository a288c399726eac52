"""Cross-dipole antennas: field patterns, polarization projection, effective gain.

Each antenna is a pair of orthogonal half-wave dipoles (nominally along its
local z and y axes) fed by complex coefficients. The coupling between a
transmit and a receive antenna at an arbitrary relative position and with
arbitrary orientations is the scalar

    h = conj(E_tx)^T  T  E_rx,

where the entries of ``T`` are the projections of the transmit-side
polarization basis vectors onto the receive dipole axes and the field-pattern
factors inside ``E_tx``/``E_rx`` are evaluated at the elevation angles seen in
each antenna's own frame. The effective gain ``chi = G_t * G_r * |h|^2``
multiplies in the dipole gains because the patterns themselves are normalized
to a unity maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import geometry as geo
from ._kernels import response_batch
from .errors import DegenerateExcitationError, SingularDirectionError, SwarmMimoError

#: Gain of a half-wave dipole relative to isotropic (approx. 2.15 dB).
HALF_WAVE_DIPOLE_GAIN = 1.643


@dataclass(frozen=True)
class DipoleExcitation:
    """Amplitudes and phases feeding the (theta, psi) dipoles of one antenna."""

    amp_theta: float = 1.0
    phase_theta: float = 0.0
    amp_psi: float = 0.0
    phase_psi: float = 0.0

    def __post_init__(self):
        if self.amp_theta < 0 or self.amp_psi < 0:
            raise SwarmMimoError("excitation amplitudes must be nonnegative")
        if not np.isfinite([self.amp_theta, self.amp_psi]).all():
            raise SwarmMimoError("excitation amplitudes must be finite")

    def weights(self) -> np.ndarray:
        "Complex feed coefficients (E_theta, E_psi)."
        return np.array(
            [
                self.amp_theta * np.exp(1j * self.phase_theta),
                self.amp_psi * np.exp(1j * self.phase_psi),
            ]
        )

    @property
    def is_unit(self) -> bool:
        return abs(self.amp_theta**2 + self.amp_psi**2 - 1.0) < 1e-12

    @staticmethod
    def linear() -> "DipoleExcitation":
        "Single fed dipole (theta branch only)."
        return DipoleExcitation(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def circular(sign: float = 1.0) -> "DipoleExcitation":
        "Equal-split feeds in phase quadrature."
        return DipoleExcitation(1 / math.sqrt(2), 0.0, 1 / math.sqrt(2), sign * math.pi / 2)


@dataclass(frozen=True)
class DipoleGeometry:
    """Physical dipole length and broadside gain."""

    length: float
    gain: float = HALF_WAVE_DIPOLE_GAIN

    def __post_init__(self):
        if self.length <= 0:
            raise SwarmMimoError("dipole length must be positive")
        if self.gain < 1.0:
            raise SwarmMimoError("dipole gain must be >= 1")

    @staticmethod
    def half_wave(f0: float) -> "DipoleGeometry":
        return DipoleGeometry(geo.wavelength(f0) / 2.0)

    def length_ratio(self, f0: float) -> float:
        "Dipole length over wavelength at the operating frequency."
        return self.length / geo.wavelength(f0)


@dataclass(frozen=True)
class AntennaConfig:
    """Excitation, orientation, and dipole geometry of one cross-dipole antenna."""

    excitation: DipoleExcitation
    orientation: geo.RotationAngles = field(default_factory=geo.RotationAngles)
    dipole: DipoleGeometry | None = None

    def dipole_for(self, f0: float) -> DipoleGeometry:
        return self.dipole if self.dipole is not None else DipoleGeometry.half_wave(f0)


@dataclass(frozen=True)
class PolarizationResult:
    """Coupling factor with antenna gains applied, its power, and the PLF."""

    h: complex
    plf: float
    chi: float


def field_pattern(theta: float, dipole: DipoleGeometry, f0: float) -> float:
    """Normalized dipole field pattern at elevation ``theta`` from the axis.

    The removable singularity at theta in {0, pi} returns the limit 0.
    """
    ratio = dipole.length_ratio(f0)
    s = math.sin(theta)
    if abs(s) < 1e-12:
        return 0.0
    return (math.cos(math.pi * ratio * math.cos(theta)) - math.cos(math.pi * ratio)) / s


def polarization_basis(uav_rel: np.ndarray):
    """Electric-field basis vectors (theta_hat, psi_hat) and direction p_hat.

    ``theta_hat`` spans the plane of the z dipole and the propagation
    direction (oriented so its z component is nonnegative); ``psi_hat`` does
    the same for the y dipole. Both are orthogonal to ``p_hat``.
    """
    v = np.asarray(uav_rel, dtype=float)
    d = float(np.linalg.norm(v))
    if d == 0.0:
        raise SingularDirectionError("zero relative position")
    x, y, z = v
    rho_t = math.hypot(x, y)
    rho_p = math.hypot(x, z)
    if rho_t <= 1e-14 * d:
        raise SingularDirectionError("direction on the z axis: theta basis undefined")
    if rho_p <= 1e-14 * d:
        raise SingularDirectionError("direction on the y axis: psi basis undefined")
    theta_hat = np.array([-x * z, -y * z, x * x + y * y]) / (d * rho_t)
    psi_hat = np.array([-x * y, x * x + z * z, -y * z]) / (d * rho_p)
    return theta_hat, psi_hat, v / d


def t_matrix(
    uav_rel: np.ndarray,
    tx_rot: np.ndarray | None = None,
    rx_rot: np.ndarray | None = None,
) -> np.ndarray:
    """2x2 projection of the transmit polarization basis onto receive dipoles.

    With both rotations equal to the identity this reduces to the closed
    form ``[[rho_t, -yz/rho_t], [-yz/rho_p, rho_p]] / d``.
    """
    v = np.asarray(uav_rel, dtype=float)
    tx = np.eye(3) if tx_rot is None else np.asarray(tx_rot, dtype=float)
    rx = np.eye(3) if rx_rot is None else np.asarray(rx_rot, dtype=float)
    theta_hat, psi_hat, _ = polarization_basis(tx.T @ v)
    theta_ref = tx @ theta_hat
    psi_ref = tx @ psi_hat
    z_rx = rx[:, 2]
    y_rx = rx[:, 1]
    return np.array(
        [
            [theta_ref @ z_rx, theta_ref @ y_rx],
            [psi_ref @ z_rx, psi_ref @ y_rx],
        ]
    )


def channel_factor(
    tx: AntennaConfig,
    rx: AntennaConfig,
    uav_rel: np.ndarray,
    f0: float,
) -> PolarizationResult:
    """Complex coupling, PLF, and effective gain for one antenna pair.

    ``h`` carries the sqrt of both dipole gains so that ``chi = |h|^2``.
    """
    wt = tx.excitation.weights()
    wr = rx.excitation.weights()
    if np.all(wt == 0) or np.all(wr == 0):
        raise DegenerateExcitationError("all-zero excitation")
    pos = np.asarray(uav_rel, dtype=float)[None, :]
    h, _, n1, n2 = response_batch(
        pos,
        np.zeros((1, 3)),
        geo.rotation_matrix(tx.orientation)[None, :, :],
        geo.rotation_matrix(rx.orientation),
        wt,
        wr,
        tx.dipole_for(f0).length_ratio(f0),
        rx.dipole_for(f0).length_ratio(f0),
        gs_per_sample=False,
    )
    hval = complex(h[0, 0])
    if not np.isfinite(hval.real):
        raise SingularDirectionError(
            "direction singular in the rotated transmit frame"
        )
    denom = float(n1[0, 0] * n2[0, 0])
    plf = abs(hval) ** 2 / denom if denom > 1e-30 else 0.0
    gains = tx.dipole_for(f0).gain * rx.dipole_for(f0).gain
    hfull = math.sqrt(gains) * hval
    return PolarizationResult(h=hfull, plf=min(plf, 1.0), chi=abs(hfull) ** 2)


# ---------------------------------------------------------------------------
# array-level gains
# ---------------------------------------------------------------------------


def _gs_rotations(gs_configs) -> np.ndarray:
    return np.stack([geo.rotation_matrix(c.orientation) for c in gs_configs])


def _common_excitation(gs_configs, f0):
    "All array elements must share a feed and dipole geometry."
    first = gs_configs[0]
    w = first.excitation.weights()
    ratio = first.dipole_for(f0).length_ratio(f0)
    gain = first.dipole_for(f0).gain
    for c in gs_configs[1:]:
        if not np.allclose(c.excitation.weights(), w):
            raise SwarmMimoError("array elements must share one excitation")
    return w, ratio, gain


def effective_gain_array(
    gs_configs,
    uav_position: np.ndarray,
    uav_orientation: geo.RotationAngles,
    f0: float,
    uav_config: AntennaConfig | None = None,
    geometry: geo.ArrayGeometry | None = None,
):
    """Per-element effective gains chi and their mean for one drone position.

    Without ``geometry`` the elements are treated as co-located at the
    origin (gains then differ only through per-element orientations). Any
    element whose direction is singular raises; elements are never silently
    skipped.
    """
    if len(gs_configs) < 1:
        raise SwarmMimoError("need at least one array element")
    if uav_config is None:
        uav_config = AntennaConfig(gs_configs[0].excitation)
    w_tx, ratio_tx, gain_tx = _common_excitation(gs_configs, f0)
    w_rx = uav_config.excitation.weights()
    ratio_rx = uav_config.dipole_for(f0).length_ratio(f0)
    gain_rx = uav_config.dipole_for(f0).gain
    if geometry is not None:
        if geometry.m != len(gs_configs):
            raise SwarmMimoError("geometry and gs_configs disagree on element count")
        elem = geo.element_positions(geometry)
    else:
        elem = np.zeros((len(gs_configs), 3))
    h, _, _, _ = response_batch(
        np.asarray(uav_position, float)[None, :],
        elem,
        _gs_rotations(gs_configs),
        geo.rotation_matrix(uav_orientation),
        w_tx,
        w_rx,
        ratio_tx,
        ratio_rx,
        gs_per_sample=False,
    )
    chi = gain_tx * gain_rx * np.abs(h[0]) ** 2
    if not np.all(np.isfinite(chi)):
        raise SingularDirectionError("singular direction for at least one element")
    return chi, float(chi.mean())


def chi_batch(
    positions: np.ndarray,
    elem: np.ndarray,
    gs_rots: np.ndarray,
    uav_rots: np.ndarray,
    w_tx: np.ndarray,
    w_rx: np.ndarray,
    gains: float,
    ratio_tx: float = 0.5,
    ratio_rx: float = 0.5,
    gs_per_sample: bool | None = None,
) -> np.ndarray:
    """Effective gains for batches of drones, shape ``(n, M)``.

    Thin vectorized counterpart of :func:`effective_gain_array` used by the
    Monte Carlo estimators; NaN lanes (singular directions) propagate to the
    caller, which redraws.
    """
    h, _, _, _ = response_batch(positions, elem, gs_rots, uav_rots, w_tx, w_rx,
                                ratio_tx, ratio_rx, gs_per_sample=gs_per_sample)
    return gains * np.abs(h) ** 2


def worst_case_gain(
    gs_configs,
    f0: float,
    uav_config: AntennaConfig | None = None,
    budget: int = 10_000,
    seed: int = 0,
    refine_top: int = 10,
    distance: float = 1.0e4,
) -> float:
    """Smallest mean effective gain found over directions and drone attitudes.

    Stochastic search: uniform candidates over (elevation, azimuth, roll,
    pitch, yaw) followed by local refinement of the best candidates. The
    result is deterministic for a fixed seed and is an upper bound on the
    true minimum; configurations with exact polarization nulls will keep
    producing smaller values as the budget grows.
    """
    if budget < 1:
        raise SwarmMimoError("search budget must be positive")
    if uav_config is None:
        uav_config = AntennaConfig(gs_configs[0].excitation)
    w_tx, ratio_tx, gain_tx = _common_excitation(gs_configs, f0)
    w_rx = uav_config.excitation.weights()
    ratio_rx = uav_config.dipole_for(f0).length_ratio(f0)
    gains = gain_tx * uav_config.dipole_for(f0).gain
    gs_rots = _gs_rotations(gs_configs)
    elem = np.zeros((len(gs_configs), 3))

    def mean_gain(x):
        theta = min(max(x[0], 1e-6), math.pi - 1e-6)
        pos = distance * np.array(
            [math.cos(x[1]) * math.sin(theta), math.sin(x[1]) * math.sin(theta), math.cos(theta)]
        )
        roll = min(max(x[2], -math.pi / 2), math.pi / 2)
        pitch = min(max(x[3], -math.pi / 2), math.pi / 2)
        rot = geo.rotation_matrices(roll, pitch, x[4])
        chi = chi_batch(pos[None, :], elem, gs_rots, rot, w_tx, w_rx, gains,
                        ratio_tx, ratio_rx, gs_per_sample=False)
        if not np.all(np.isfinite(chi)):
            return np.inf
        return float(chi.mean())

    rng = np.random.default_rng(seed)
    cands = np.column_stack(
        [
            np.arccos(1.0 - 2.0 * rng.uniform(size=budget)),
            rng.uniform(0.0, 2 * math.pi, budget),
            rng.uniform(-math.pi / 2, math.pi / 2, budget),
            rng.uniform(-math.pi / 2, math.pi / 2, budget),
            rng.uniform(0.0, 2 * math.pi, budget),
        ]
    )
    vals = np.array([mean_gain(x) for x in cands])
    order = np.argsort(vals)
    best = float(vals[order[0]])
    for idx in order[:refine_top]:
        res = minimize(
            mean_gain,
            cands[idx],
            method="Nelder-Mead",
            options={"maxiter": 400, "xatol": 1e-5, "fatol": 1e-14},
        )
        best = min(best, float(res.fun))
    return best


def kappa_estimate(
    gs_configs,
    f0: float,
    rng: np.random.Generator,
    n: int = 100_000,
    uav_config: AntennaConfig | None = None,
    chi_floor: float = 1e-12,
    distance: float = 1.0e4,
    orientation_ranges=geo.DEFAULT_ORIENTATION_RANGES,
    unit_gain: bool = False,
):
    """Monte Carlo mean of the reciprocal mean gain over drone geometries.

    Samples below ``chi_floor`` are excluded (counted) to guard the
    reciprocal against polarization nulls. ``unit_gain`` swaps in a
    hypothetical loss-free antenna (gain pinned to 1), for which the result
    is exactly 1. Returns ``(kappa, stderr, n_excluded)``.
    """
    if n < 1:
        raise SwarmMimoError("sample count must be positive")
    if unit_gain:
        return 1.0, 0.0, 0
    if uav_config is None:
        uav_config = AntennaConfig(gs_configs[0].excitation)
    w_tx, ratio_tx, gain_tx = _common_excitation(gs_configs, f0)
    w_rx = uav_config.excitation.weights()
    gains = gain_tx * uav_config.dipole_for(f0).gain
    gs_rots = _gs_rotations(gs_configs)
    elem = np.zeros((len(gs_configs), 3))
    region = geo.ShellRegion(distance, distance)

    total = 0.0
    total_sq = 0.0
    kept = 0
    excluded = 0
    chunk = 16384
    remaining = n
    while remaining > 0:
        take = min(chunk, remaining)
        remaining -= take
        pos = geo.sample_shell_positions(region, rng, take)
        ang = geo.sample_orientations(rng, take, orientation_ranges)
        rots = geo.rotation_matrices(ang[:, 0], ang[:, 1], ang[:, 2])
        chi = chi_batch(pos, elem, gs_rots, rots, w_tx, w_rx, gains,
                        ratio_tx, uav_config.dipole_for(f0).length_ratio(f0),
                        gs_per_sample=False)
        mean = chi.mean(axis=1)
        good = np.isfinite(mean) & (mean >= chi_floor)
        excluded += int(np.size(mean) - np.count_nonzero(good))
        inv = 1.0 / mean[good]
        total += float(inv.sum())
        total_sq += float((inv * inv).sum())
        kept += int(inv.size)
    if kept == 0:
        raise SwarmMimoError("all samples fell below the gain floor")
    kappa = total / kept
    var = max(total_sq / kept - kappa**2, 0.0)
    stderr = math.sqrt(var / kept)
    return kappa, stderr, excluded
