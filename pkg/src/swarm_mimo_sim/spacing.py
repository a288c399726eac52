"""Antenna-spacing optimization and correlation-excess sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SwarmMimoError
from .geometry import ArrayGeometry, ShellRegion
from .rates import omega


@dataclass(frozen=True)
class SpacingGrid:
    """Correlation excess sampled over spacing/wavelength grid points."""

    delta_x_over_lam: np.ndarray
    delta_y_over_lam: np.ndarray | None
    omega_values: np.ndarray


def optimal_spacing_ula(m: int, lam: float, r_min: float) -> list[float]:
    """Line-array spacings nulling the correlation excess.

    All half-wavelength multiples whose aperture still fits inside the shell
    inner radius; empty when even the first multiple does not fit.
    """
    if r_min <= 0 or lam <= 0:
        raise SwarmMimoError("wavelength and inner radius must be positive")
    if m < 2:
        return [lam / 2.0]
    n_max = math.floor(2.0 * r_min / (lam * (m - 1)))
    return [n * lam / 2.0 for n in range(1, n_max + 1)]


def optimal_spacing_ura(
    m_x: int, m_y: int, lam: float, r_min: float
) -> list[tuple[float, float]]:
    """Rectangular-array spacing pairs with near-zero correlation excess.

    Pairs ``(n lam/2, m lam/2)`` with ``n >= m_y`` and ``m >= m_x`` whose
    aperture fits the inner radius, ordered most compact first.
    """
    if r_min <= 0 or lam <= 0:
        raise SwarmMimoError("wavelength and inner radius must be positive")
    if m_x == 1 and m_y == 1:
        return [(lam / 2.0, lam / 2.0)]
    limit = 4.0 * r_min**2 / lam**2

    def axis_cap(count_sq: int, start: int, other_min_sq: float) -> int:
        # largest multiplier keeping the aperture inside the shell; a
        # one-element axis contributes nothing, so only its minimum is used
        if count_sq == 0:
            return start
        room = limit - other_min_sq
        if room <= 0:
            return start - 1
        return min(int(math.floor(math.sqrt(room / count_sq))), start + 10_000)

    cx = (m_x - 1) ** 2
    cy = (m_y - 1) ** 2
    n_cap = axis_cap(cx, m_y, cy * m_x**2)
    out = []
    for n in range(m_y, n_cap + 1):
        m_cap = axis_cap(cy, m_x, cx * n**2)
        for m in range(m_x, m_cap + 1):
            if cx * n**2 + cy * m**2 >= limit:
                continue
            aperture = math.hypot((m_x - 1) * n, (m_y - 1) * m) * lam / 2.0
            out.append((n * lam / 2.0, m * lam / 2.0, aperture))
    out.sort(key=lambda t: (t[2], t[0], t[1]))
    return [(dx, dy) for dx, dy, _ in out]


def omega_sweep(
    m_x: int,
    m_y: int,
    lam: float,
    region: ShellRegion,
    ratios_x: np.ndarray,
    ratios_y: np.ndarray | None = None,
) -> SpacingGrid:
    """Evaluate the correlation excess across spacing/wavelength ratios.

    One-dimensional for a line array; a full grid when ``ratios_y`` is given.
    """
    ratios_x = np.asarray(ratios_x, dtype=float)
    if ratios_x.size == 0:
        raise SwarmMimoError("spacing grid must be nonempty")
    if ratios_y is None:
        vals = np.array(
            [
                omega(ArrayGeometry(m_x, m_y, rx * lam, 0.0), lam, region)
                for rx in ratios_x
            ]
        )
        return SpacingGrid(ratios_x, None, vals)
    ratios_y = np.asarray(ratios_y, dtype=float)
    vals = np.empty((ratios_x.size, ratios_y.size))
    for i, rx in enumerate(ratios_x):
        for j, ry in enumerate(ratios_y):
            vals[i, j] = omega(ArrayGeometry(m_x, m_y, rx * lam, ry * lam), lam, region)
    return SpacingGrid(ratios_x, ratios_y, vals)
