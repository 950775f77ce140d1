"""Two-cell geometry, distance path loss and Rayleigh block fading."""

from dataclasses import dataclass

import numpy as np

from .fblmath import db_to_linear


@dataclass(frozen=True)
class CellLayout:
    """Macro cell at ``macro_position`` and one small cell, both in metres."""

    macro_position: tuple = (0.0, 0.0)
    small_position: tuple = (500.0, 0.0)
    macro_radius: float = 500.0
    small_radius: float = 250.0

    def __post_init__(self):
        if self.macro_radius <= 0 or self.small_radius <= 0:
            raise ValueError("cell radii must be positive")

    @property
    def inter_site_distance(self):
        return float(np.hypot(*np.subtract(self.small_position, self.macro_position)))


@dataclass(frozen=True)
class PathLossModel:
    exponent: float = 4.0
    reference_snr_edge_db: float = 3.0
    min_distance: float = 1.0

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("path loss exponent must be positive")
        if self.min_distance <= 0:
            raise ValueError("min_distance must be positive")


@dataclass
class LinkSnapshot:
    """Radio state of one user (or a batch of users) for one attempt.

    Every field is a float or an array of matching shape. ``snr_*`` is the
    instantaneous SNR, the product of the path-loss mean and the fading gain.
    """

    distance_macro: np.ndarray
    distance_small: np.ndarray
    mean_snr_macro: np.ndarray
    mean_snr_small: np.ndarray
    fading_macro: np.ndarray
    fading_small: np.ndarray

    @property
    def snr_macro(self):
        return self.mean_snr_macro * self.fading_macro

    @property
    def snr_small(self):
        return self.mean_snr_small * self.fading_small


def calibrate_power(model, cell_radius):
    """Coefficient K with K * cell_radius**-exponent equal to the edge SNR target."""
    if cell_radius <= 0:
        raise ValueError("cell_radius must be positive")
    return db_to_linear(model.reference_snr_edge_db) * cell_radius**model.exponent


def mean_snr(model, power, distance):
    d = np.maximum(np.asarray(distance, dtype=float), model.min_distance)
    return power * d ** (-model.exponent)


def distances(layout, position):
    """Distances from ``position`` (shape (..., 2)) to the macro and small sites."""
    pos = np.asarray(position, dtype=float)
    dm = np.hypot(pos[..., 0] - layout.macro_position[0], pos[..., 1] - layout.macro_position[1])
    ds = np.hypot(pos[..., 0] - layout.small_position[0], pos[..., 1] - layout.small_position[1])
    return dm, ds


def mean_snrs(layout, model, position):
    """Fading-free (macro, small) SNRs with each cell calibrated to its own edge."""
    dm, ds = distances(layout, position)
    km = calibrate_power(model, layout.macro_radius)
    ks = calibrate_power(model, layout.small_radius)
    return mean_snr(model, km, dm), mean_snr(model, ks, ds)


def draw_fading(rng, shape):
    """Unit-mean exponential power gains (Rayleigh amplitude)."""
    return rng.standard_exponential(shape)


def draw_snapshot(layout, model, position, rng=None, fading=True):
    """Sample the two links of a user at ``position``.

    With ``fading=False`` (or ``rng=None``) both fading gains are exactly 1.
    """
    dm, ds = distances(layout, position)
    sm, ss = mean_snrs(layout, model, position)
    shape = np.shape(dm)
    if fading and rng is not None:
        g = draw_fading(rng, shape + (2,))
        fm, fs = g[..., 0], g[..., 1]
    else:
        fm, fs = np.ones(shape), np.ones(shape)
    if shape == ():
        fm, fs = float(fm), float(fs)
    return LinkSnapshot(dm, ds, sm, ss, fm, fs)


def place_user(layout, rng, size=None):
    """Uniform positions over the macro coverage disc, shape ``(size, 2)`` or ``(2,)``."""
    n = 1 if size is None else size
    u = rng.random(2 * n).reshape(n, 2)
    r = layout.macro_radius * np.sqrt(u[:, 0])
    theta = 2.0 * np.pi * u[:, 1]
    pos = np.column_stack([layout.macro_position[0] + r * np.cos(theta),
                           layout.macro_position[1] + r * np.sin(theta)])
    return pos[0] if size is None else pos
