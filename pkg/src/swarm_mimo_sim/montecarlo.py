"""Seeded Monte Carlo estimators that validate and feed the closed forms.

Reproducibility contract: every estimator consumes a fixed-size chunk of
samples from its own counter-based random substream, and partial sums are
combined in chunk order. Results are therefore bit-identical for a fixed
seed no matter how the chunks are scheduled, and independent of the
parallelism inside the numeric kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .channel import instantaneous_sinr_mrc, sinr_zf
from .errors import SwarmMimoError
from .polarization import DipoleExcitation, HALF_WAVE_DIPOLE_GAIN, chi_batch
from .rates import cb_db, expected_phase_sinc

#: Samples per substream chunk. Part of the reproducibility contract:
#: changing it changes the draws for a given seed.
CHUNK = 8192


def substream(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for chunk ``index`` of an experiment seed."""
    key = np.random.SeedSequence(seed).generate_state(2, np.uint64)
    counter = np.zeros(4, dtype=np.uint64)
    counter[3] = index
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


@dataclass(frozen=True)
class EstimatorResult:
    """Sample mean with its standard error and provenance."""

    mean: float
    stderr: float
    n: int
    seed: int


class _Accumulator:
    "Combines per-chunk partial sums in fixed chunk order."

    def __init__(self):
        self.parts: list[tuple[float, float, int]] = []

    def add(self, values: np.ndarray):
        v = np.asarray(values, dtype=float)
        self.parts.append((float(v.sum()), float((v * v).sum()), int(v.size)))

    def result(self, seed: int) -> EstimatorResult:
        total = math.fsum(p[0] for p in self.parts)
        total_sq = math.fsum(p[1] for p in self.parts)
        n = sum(p[2] for p in self.parts)
        if n == 0:
            raise SwarmMimoError("no samples accumulated")
        mean = total / n
        var = max(total_sq / n - mean * mean, 0.0)
        stderr = math.sqrt(var / n) if n > 1 else 0.0
        return EstimatorResult(mean=mean, stderr=stderr, n=n, seed=seed)


@dataclass(frozen=True)
class ScenarioSpec:
    """Array, drone population, and antenna configuration of one experiment.

    ``gs_orientation``:
      * ``fixed`` - every element upright (identity rotation);
      * ``identical`` - one common random orientation redrawn per sample;
      * ``pseudo-random`` - per-element orientations drawn once from
        ``orientation_seed`` and frozen for the scenario.

    ``pattern``:
      * ``dipole`` - half-wave patterns and gains;
      * ``isotropic`` - flat unit patterns, unit gains, polarization kept;
      * ``unit`` - effective gain pinned to 1 (pure geometry).
    """

    geometry: geo.ArrayGeometry
    region: geo.ShellRegion
    k: int = 2
    rho_u: float = 1.0
    rho_p: float = 10.0
    f_c: float = 2.4e9
    excitation: str = "circular"
    gs_orientation: str = "fixed"
    pattern: str = "dipole"
    chi_wc: float = 1.0
    orientation_seed: int = 0
    orientation_ranges: tuple = geo.DEFAULT_ORIENTATION_RANGES

    def __post_init__(self):
        if self.k < 1:
            raise SwarmMimoError("drone count must be >= 1")
        if self.excitation not in ("linear", "circular"):
            raise SwarmMimoError(f"unknown excitation {self.excitation!r}")
        if self.gs_orientation not in ("fixed", "identical", "pseudo-random"):
            raise SwarmMimoError(f"unknown gs_orientation {self.gs_orientation!r}")
        if self.pattern not in ("dipole", "isotropic", "unit"):
            raise SwarmMimoError(f"unknown pattern {self.pattern!r}")

    @property
    def lam(self) -> float:
        return geo.wavelength(self.f_c)

    def feed_weights(self) -> np.ndarray:
        exc = (
            DipoleExcitation.circular()
            if self.excitation == "circular"
            else DipoleExcitation.linear()
        )
        return exc.weights()

    def pattern_ratio(self) -> float:
        "Dipole length over wavelength; 0 collapses the pattern to 1."
        return 0.5 if self.pattern == "dipole" else 0.0

    def element_gains(self) -> float:
        return HALF_WAVE_DIPOLE_GAIN**2 if self.pattern == "dipole" else 1.0

    def frozen_gs_rotations(self) -> np.ndarray:
        "(M, 3, 3) rotations for the pseudo-random array, frozen per seed."
        rng = substream(self.orientation_seed, 0xA11A)
        ang = geo.sample_orientations(rng, self.geometry.m, self.orientation_ranges)
        return geo.rotation_matrices(ang[:, 0], ang[:, 1], ang[:, 2])


def _gs_rotations_for_chunk(spec: ScenarioSpec, rng, n: int, frozen):
    if spec.gs_orientation == "pseudo-random":
        return frozen
    if spec.gs_orientation == "identical":
        ang = geo.sample_orientations(rng, n, spec.orientation_ranges)
        return geo.rotation_matrices(ang[:, 0], ang[:, 1], ang[:, 2])
    return np.broadcast_to(np.eye(3), (spec.geometry.m, 3, 3)).copy()


def _uav_rotations(spec: ScenarioSpec, rng, n: int) -> np.ndarray:
    ang = geo.sample_orientations(rng, n, spec.orientation_ranges)
    return geo.rotation_matrices(ang[:, 0], ang[:, 1], ang[:, 2])


def _chi_for(spec: ScenarioSpec, positions, gs_rots, uav_rots, elem) -> np.ndarray:
    "(n, M) effective gains under the scenario's pattern mode."
    if spec.pattern == "unit":
        return np.ones((positions.shape[0], elem.shape[0]))
    w = spec.feed_weights()
    return chi_batch(
        positions, elem, gs_rots, uav_rots, w, w,
        spec.element_gains(), spec.pattern_ratio(), spec.pattern_ratio(),
        gs_per_sample=spec.gs_orientation == "identical",
    )


def _channel_for(spec: ScenarioSpec, positions, gs_rots, uav_rots, elem):
    """(n, M) complex channel rows with exact distances and pathloss."""
    from ._kernels import response_batch

    lam = spec.lam
    if spec.pattern == "unit":
        rel = positions[:, None, :] - elem[None, :, :]
        dist = np.sqrt(np.sum(rel * rel, axis=-1))
        h = np.ones_like(dist, dtype=np.complex128)
        n1 = n2 = None
    else:
        w = spec.feed_weights()
        r = spec.pattern_ratio()
        h, dist, n1, n2 = response_batch(
            positions, elem, gs_rots, uav_rots, w, w, r, r,
            gs_per_sample=spec.gs_orientation == "identical",
        )
        h = h * math.sqrt(spec.element_gains())
    beta = (lam / (4.0 * math.pi * dist)) ** 2
    return np.sqrt(beta) * h * np.exp(-2j * math.pi * dist / lam), beta, h


def _redraw_bad(spec, rng, positions, uav_rots, chi, frozen):
    "Resample any singular-direction lanes (probability-zero events)."
    elem = geo.element_positions(spec.geometry)
    for _ in range(100):
        bad = ~np.all(np.isfinite(chi), axis=1)
        if not np.any(bad):
            return positions, uav_rots, chi
        idx = np.flatnonzero(bad)
        positions[idx] = geo.sample_shell_positions(spec.region, rng, idx.size)
        uav_rots[idx] = _uav_rotations(spec, rng, idx.size)
        gs = _gs_rotations_for_chunk(spec, rng, idx.size, frozen)
        chi[idx] = _chi_for(spec, positions[idx], gs, uav_rots[idx], elem)
    raise SwarmMimoError("persistent singular directions while sampling")


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def estimate_interference_moment(spec: ScenarioSpec, n: int, seed: int) -> EstimatorResult:
    """Mean of ``p_uj p_uk |g_k^H g_j|^2`` for two independent shell drones.

    Uses full channel synthesis (exact distances) and uncapped
    channel-inversion powers.
    """
    if n < 1:
        raise SwarmMimoError("sample count must be positive")
    elem = geo.element_positions(spec.geometry)
    acc = _Accumulator()
    done = 0
    index = 0
    while done < n:
        take = min(CHUNK, n - done)
        rng = substream(seed, index)
        index += 1
        done += take
        pos_k = geo.sample_shell_positions(spec.region, rng, take)
        pos_j = geo.sample_shell_positions(spec.region, rng, take)
        rot_k = _uav_rotations(spec, rng, take)
        rot_j = _uav_rotations(spec, rng, take)
        gs = _gs_rotations_for_chunk(spec, rng, take, spec.frozen_gs_rotations()
                                     if spec.gs_orientation == "pseudo-random" else None)
        g_k, beta_k, h_k = _channel_for(spec, pos_k, gs, rot_k, elem)
        g_j, beta_j, h_j = _channel_for(spec, pos_j, gs, rot_j, elem)
        gain_k = np.mean(np.abs(g_k) ** 2, axis=1)
        gain_j = np.mean(np.abs(g_j) ** 2, axis=1)
        cross = np.abs(np.sum(np.conj(g_k) * g_j, axis=1)) ** 2
        vals = (spec.rho_u / gain_k) * (spec.rho_u / gain_j) * cross
        if not np.all(np.isfinite(vals)):
            raise SwarmMimoError("singular sample in interference moment")
        acc.add(vals)
    return acc.result(seed)


def estimate_zf_inverse_moment(spec: ScenarioSpec, n: int, seed: int) -> EstimatorResult:
    """Mean of ``1 / (M - |s|^2 / M)`` for two shell drones.

    ``s`` is the inner product of the unit-modulus signature phases; the
    moment plugs directly into the two-drone zero-forcing bound. Note the
    integrand blows up on the measure-zero set where the two drones share a
    projected bearing, so the sample mean is heavy-tailed at small element
    counts; it stabilizes once the array is large enough that near-collinear
    draws are rare at the requested sample size.
    """
    m = spec.geometry.m
    elem = geo.element_positions(spec.geometry)
    lam = spec.lam
    acc = _Accumulator()
    done = 0
    index = 0
    chunk = max(1, min(CHUNK, 4_194_304 // max(m, 1)))  # bound the (take, M) buffers
    while done < n:
        take = min(chunk, n - done)
        rng = substream(seed, index)
        index += 1
        done += take
        pos_1 = geo.sample_shell_positions(spec.region, rng, take)
        pos_2 = geo.sample_shell_positions(spec.region, rng, take)
        d1 = np.sqrt(np.sum((pos_1[:, None, :] - elem[None, :, :]) ** 2, axis=-1))
        d2 = np.sqrt(np.sum((pos_2[:, None, :] - elem[None, :, :]) ** 2, axis=-1))
        s = np.sum(np.exp(2j * math.pi * (d1 - d2) / lam), axis=1)
        cross = np.abs(s) ** 2 - m
        acc.add(1.0 / (m - 1.0 - cross / m))
    return acc.result(seed)


def estimate_ergodic_rate(
    spec: ScenarioSpec,
    n: int,
    seed: int,
    receiver: str = "mrc",
    csi: str = "estimated",
    prelog: float = 1.0,
) -> EstimatorResult:
    """Mean over drone placements of ``prelog * log2(1 + SINR)``.

    Each draw places ``spec.k`` drones, applies channel-inversion power
    control, optionally perturbs the channel with pilot noise sized by the
    scenario's worst-case gain, and evaluates the instantaneous SINR of the
    selected receiver. The estimate averages drones and draws; ``stderr``
    reflects draw-to-draw variation.
    """
    if receiver not in ("mrc", "zf"):
        raise SwarmMimoError(f"unknown receiver {receiver!r}")
    if csi not in ("perfect", "estimated"):
        raise SwarmMimoError(f"unknown csi mode {csi!r}")
    if receiver == "zf" and csi != "perfect":
        raise SwarmMimoError("zero-forcing here assumes perfect channel knowledge")
    k = spec.k
    elem = geo.element_positions(spec.geometry)
    lam = spec.lam
    p_p = spec.rho_p * (4.0 * math.pi * spec.region.r_max / lam) ** 2 / spec.chi_wc
    frozen = (spec.frozen_gs_rotations()
              if spec.gs_orientation == "pseudo-random" else None)
    acc = _Accumulator()
    done = 0
    index = 0
    draws_per_chunk = max(1, CHUNK // max(k, 1))
    while done < n:
        take = min(draws_per_chunk, n - done)
        rng = substream(seed, index)
        index += 1
        done += take
        pos = geo.sample_shell_positions(spec.region, rng, take * k)
        rots = _uav_rotations(spec, rng, take * k)
        if spec.gs_orientation == "identical":
            # one common array orientation per draw, shared by its k drones
            gs = np.repeat(_gs_rotations_for_chunk(spec, rng, take, frozen), k, axis=0)
        else:
            gs = _gs_rotations_for_chunk(spec, rng, take * k, frozen)
        g_rows, beta, h = _channel_for(spec, pos, gs, rots, elem)
        g = g_rows.reshape(take, k, -1)  # (draws, K, M)
        mean_gain = np.mean(np.abs(g) ** 2, axis=2)
        powers = spec.rho_u / mean_gain
        if csi == "estimated":
            noise = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
            g_hat = g + noise / math.sqrt(2.0 * p_p)
        else:
            g_hat = g
        vals = np.empty(take)
        for i in range(take):
            gm = g[i].T  # (M, K)
            if receiver == "mrc":
                sinr = instantaneous_sinr_mrc(gm, g_hat[i].T, powers[i])
            else:
                sinr = sinr_zf(gm, powers[i])
            vals[i] = prelog * float(np.mean(np.log2(1.0 + sinr)))
        acc.add(vals)
    return acc.result(seed)


def gain_cdf(spec: ScenarioSpec, n: int, seed: int, thresholds_db: np.ndarray):
    """Empirical CDF of the summed effective gain over the array.

    Returns ``(thresholds_db, cdf, stats)`` where ``stats`` carries the
    median in dB and the probability of falling below 10 dB.
    """
    thresholds_db = np.asarray(thresholds_db, dtype=float)
    thr = 10.0 ** (thresholds_db / 10.0)
    counts = np.zeros(thr.shape, dtype=np.int64)
    below_10 = 0
    elem = geo.element_positions(spec.geometry)
    frozen = (spec.frozen_gs_rotations()
              if spec.gs_orientation == "pseudo-random" else None)
    sums = np.empty(n)
    done = 0
    index = 0
    while done < n:
        take = min(CHUNK, n - done)
        rng = substream(seed, index)
        index += 1
        pos = geo.sample_shell_positions(spec.region, rng, take)
        rots = _uav_rotations(spec, rng, take)
        gs = _gs_rotations_for_chunk(spec, rng, take, frozen)
        chi = _chi_for(spec, pos, gs, rots, elem)
        pos, rots, chi = _redraw_bad(spec, rng, pos, rots, chi, frozen)
        total = chi.sum(axis=1)
        counts += (total[:, None] < thr[None, :]).sum(axis=0)
        below_10 += int(np.count_nonzero(total < 10.0))
        sums[done:done + take] = total
        done += take
    cdf = counts / n
    stats = {
        "median_db": float(10.0 * np.log10(np.median(sums))),
        "p_below_10db": below_10 / n,
        "n": n,
        "seed": seed,
    }
    return thresholds_db, cdf, stats


def validate_expectations(spec: ScenarioSpec, n: int, seed: int, max_pairs: int = 64):
    """Check the closed-form pair-phase moments against direct sampling.

    For element pairs (l, l') the phase of the distance difference splits
    into a reciprocal-radius part (shell moments C and D) and a
    direction part (the sinc average). Each row reports the closed form,
    the Monte Carlo mean of the exact phase factor, and the deviation in
    standard errors. The sampled phase uses the same second-order distance
    expansion the closed form integrates.
    """
    geometry = spec.geometry
    lam = spec.lam
    m = geometry.m
    pairs = [(l, lp) for l in range(1, m + 1) for lp in range(1, m + 1) if l != lp]
    if len(pairs) > max_pairs:
        rng = substream(seed, 0xFA1)
        keep = rng.choice(len(pairs), size=max_pairs, replace=False)
        pairs = [pairs[i] for i in sorted(keep)]
    rng = substream(seed, 1)
    d, theta, phi = geo._shell_draws(spec.region, rng, n)
    rows = []
    for l, lp in pairs:
        q, p = divmod(l - 1, geometry.m_x)
        qp, pp = divmod(lp - 1, geometry.m_x)
        bval = (math.pi / lam) * (
            (p * p - pp * pp) * geometry.delta_x**2
            + (q * q - qp * qp) * geometry.delta_y**2
        )
        cval, dval = cb_db(bval, spec.region)
        sincval = expected_phase_sinc(p - pp, q - qp, geometry, lam)
        closed = complex(cval, dval) * sincval
        phase = bval / d - (2.0 * math.pi / lam) * np.sin(theta) * (
            (p - pp) * geometry.delta_x * np.cos(phi)
            + (q - qp) * geometry.delta_y * np.sin(phi)
        )
        z = np.exp(1j * phase)
        mc = complex(z.mean())
        se = float(np.sqrt((np.abs(z - mc) ** 2).mean() / n))
        dev = abs(mc - closed) / se if se > 0 else 0.0
        rows.append(
            {
                "l": l,
                "lp": lp,
                "closed_re": closed.real,
                "closed_im": closed.imag,
                "mc_re": mc.real,
                "mc_im": mc.imag,
                "stderr": se,
                "dev_se": dev,
            }
        )
    max_dev = max(r["dev_se"] for r in rows)
    return rows, max_dev
