"""Pathloss, transmit power, and SINR audit math.

Packet motion never depends on these numbers: the transport layer moves
packets per schedule, and the audit runs alongside to verify that every
scheduled reception would sustain a positive constant rate. Power follows
the cell-area rule P * a**(alpha/2), which makes the received power across
one cell diagonal independent of the cell size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LinkSample",
    "RateReport",
    "pathloss",
    "tx_power",
    "sinr",
    "rate_of",
    "interference_at",
    "sinr_at",
]


def pathloss(r: float, alpha: float) -> float:
    """Channel power gain r**(-alpha); co-located endpoints are rejected."""
    if r <= 0:
        raise ValueError("pathloss needs a positive distance")
    return r ** (-alpha)


def tx_power(cell_area: float, power_const: float, alpha: float) -> float:
    """Transmit power P * cell_area**(alpha/2) for a cell-scaled transmitter."""
    if not 0 < cell_area <= 1:
        raise ValueError(f"cell_area must lie in (0, 1], got {cell_area}")
    if power_const <= 0:
        raise ValueError("power_const must be positive")
    return power_const * cell_area ** (alpha / 2.0)


@dataclass(frozen=True)
class LinkSample:
    """One receiver with its signal source and the concurrent interferer set."""

    tx_pos: tuple[float, float]
    rx_pos: tuple[float, float]
    tx_power: float
    interferers: tuple[tuple[tuple[float, float], float], ...] = ()
    noise: float = 1.0


def sinr(link: LinkSample, alpha: float) -> float:
    """Signal over noise plus summed interference, all via the pathloss law."""
    dx = link.tx_pos[0] - link.rx_pos[0]
    dy = link.tx_pos[1] - link.rx_pos[1]
    signal = link.tx_power * pathloss(math.hypot(dx, dy), alpha)
    interference = 0.0
    for pos, power in link.interferers:
        d = math.hypot(pos[0] - link.rx_pos[0], pos[1] - link.rx_pos[1])
        if d <= 0:
            raise ValueError("interferer co-located with receiver")
        interference += power * d ** (-alpha)
    return signal / (link.noise + interference)


def rate_of(s) -> float | np.ndarray:
    """Normalized rate log2(1 + SINR), monotone in SINR."""
    return np.log2(1.0 + np.asarray(s, dtype=float))


# ======== vectorized audit helpers ========


def interference_at(
    rx_pos: np.ndarray, tx_pos: np.ndarray, tx_power_w: np.ndarray, alpha: float
) -> np.ndarray:
    """Summed interferer power at each receiver, (R,) from (R,2) x (T,2)."""
    if len(tx_pos) == 0:
        return np.zeros(len(rx_pos))
    d2 = ((rx_pos[:, None, :] - tx_pos[None, :, :]) ** 2).sum(axis=2)
    if (d2 <= 0).any():
        raise ValueError("interferer co-located with receiver")
    return (tx_power_w[None, :] * d2 ** (-alpha / 2.0)).sum(axis=1)


def sinr_at(
    rx_pos: np.ndarray,
    signal_tx: np.ndarray,
    signal_power: float,
    int_pos: np.ndarray,
    int_power: np.ndarray,
    noise: float,
    alpha: float,
) -> np.ndarray:
    """SINR for many receivers of one transmitter against one interferer set."""
    d2 = ((rx_pos - signal_tx[None, :]) ** 2).sum(axis=1)
    if (d2 <= 0).any():
        raise ValueError("receiver co-located with its transmitter")
    signal = signal_power * d2 ** (-alpha / 2.0)
    return signal / (noise + interference_at(rx_pos, int_pos, int_power, alpha))


@dataclass
class RateReport:
    """Running minima of audited SINR and rate per reception category.

    Categories: 'primary' for broadcast receptions at relay nodes (the K1
    proxy), 'delivery' for sink-cell handoffs (the K2 proxy), 'secondary'
    for intra-secondary hop receptions.
    """

    min_sinr: dict = field(
        default_factory=lambda: {"primary": math.inf, "delivery": math.inf, "secondary": math.inf}
    )
    samples: dict = field(
        default_factory=lambda: {"primary": 0, "delivery": 0, "secondary": 0}
    )

    def record(self, category: str, sinr_values: np.ndarray) -> None:
        if len(sinr_values) == 0:
            return
        self.min_sinr[category] = min(self.min_sinr[category], float(np.min(sinr_values)))
        self.samples[category] += int(len(sinr_values))

    def min_rate(self, category: str) -> float:
        s = self.min_sinr[category]
        return float("nan") if math.isinf(s) else float(rate_of(s))

    def floor(self, category: str) -> float:
        s = self.min_sinr[category]
        return float("nan") if math.isinf(s) else s
