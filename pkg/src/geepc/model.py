"""Single-cell uplink model: snapshot generation and link-level quantities.

A snapshot fixes one realization of the cell (UE placement, channel gains,
power caps, circuit constants). Everything else in the package computes pure
functions of a snapshot and a transmit-power vector: per-UE SINR, effective
interference, Shannon throughput, total power consumption, and the global
energy efficiency (GEE) defined as total throughput over total consumed
power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .units import dbm_to_watts

LN2 = float(np.log(2.0))

# UEs closer than this to the BS are pushed out to avoid a singular path loss.
MIN_BS_DISTANCE_M = 1.0


@dataclass(frozen=True)
class CellGeometry:
    """Square cell, BS at the center, half-side `radius` in meters.

    The path loss at distance d (meters) is ``pl0_db + 10 * exponent *
    log10(d)`` in dB.
    """

    radius: float = 100.0
    pl0_db: float = 71.0
    exponent: float = 3.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"cell radius must be positive, got {self.radius}")
        if self.exponent <= 0:
            raise ValueError(f"path-loss exponent must be positive, got {self.exponent}")


@dataclass(frozen=True)
class RadioConstants:
    """Per-deployment radio constants, in the units used by configuration files."""

    max_power_dbm: float = 23.0
    bs_circuit_dbm: float = 30.0
    ue_circuit_dbm: float = 20.0
    amp_inefficiency: float = 5.0
    noise_dbm: float = -113.0

    def __post_init__(self):
        if self.amp_inefficiency < 1.0:
            raise ValueError("amplifier inefficiency must be >= 1")


@dataclass(frozen=True)
class NetworkSnapshot:
    """One immutable realization of the cell.

    Attributes
    ----------
    k : int
        Number of UEs.
    gains : ndarray
        Linear channel gain of each UE toward the BS.
    noise_power : float
        Receiver noise power in watts.
    max_power : ndarray
        Per-UE transmit power cap in watts.
    circuit_power_bs : float
        BS circuit power in watts.
    circuit_power_ue : ndarray
        Per-UE circuit power in watts.
    amp_inefficiency : ndarray
        Per-UE power-amplifier inefficiency (>= 1).
    positions : ndarray
        Per-UE distance from the BS in meters (kept for reporting).
    seed : int
        Seed used to generate the snapshot.
    """

    k: int
    gains: np.ndarray
    noise_power: float
    max_power: np.ndarray
    circuit_power_bs: float
    circuit_power_ue: np.ndarray
    amp_inefficiency: np.ndarray
    positions: np.ndarray
    seed: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"UE count must be >= 1, got {self.k}")
        for name in ("gains", "max_power", "circuit_power_ue", "amp_inefficiency", "positions"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (self.k,):
                raise ValueError(f"{name} must have length k={self.k}, got shape {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not np.all(self.gains > 0):
            raise ValueError("channel gains must be positive")
        if not np.all(self.max_power > 0):
            raise ValueError("power caps must be positive")
        if self.noise_power <= 0:
            raise ValueError("noise power must be positive")
        if self.circuit_power_bs < 0 or np.any(self.circuit_power_ue < 0):
            raise ValueError("circuit powers must be non-negative")
        if np.any(self.amp_inefficiency < 1):
            raise ValueError("amplifier inefficiency must be >= 1")

    @property
    def fixed_power(self) -> float:
        """Power consumed regardless of transmission (BS + UE circuits), watts."""
        return float(self.circuit_power_bs + self.circuit_power_ue.sum())


@dataclass(frozen=True)
class LinkMetrics:
    """All link-level quantities at one power vector."""

    sinr: np.ndarray
    eff_interference: np.ndarray
    throughput: np.ndarray
    total_throughput: float
    total_power: float
    gee: float


def _nonneg_seed(seed: int) -> int:
    # numpy generators need a non-negative seed; fold negatives deterministically
    return int(seed) % (1 << 63)


def generate_snapshot(geometry: CellGeometry, k: int, radio: RadioConstants, seed: int) -> NetworkSnapshot:
    """Draw one random cell realization.

    UE positions are uniform over the square of half-side ``geometry.radius``
    centered at the BS, with distances floored at ``MIN_BS_DISTANCE_M``. Gains
    follow the log-distance path-loss model. Deterministic in `seed`.
    """
    if k < 1:
        raise ValueError(f"UE count must be >= 1, got {k}")
    rng = np.random.default_rng(_nonneg_seed(seed))
    xy = rng.uniform(-geometry.radius, geometry.radius, size=(k, 2))
    dist = np.maximum(np.hypot(xy[:, 0], xy[:, 1]), MIN_BS_DISTANCE_M)
    loss_db = geometry.pl0_db + 10.0 * geometry.exponent * np.log10(dist)
    gains = 10.0 ** (-loss_db / 10.0)
    return NetworkSnapshot(
        k=k,
        gains=gains,
        noise_power=float(dbm_to_watts(radio.noise_dbm)),
        max_power=np.full(k, float(dbm_to_watts(radio.max_power_dbm))),
        circuit_power_bs=float(dbm_to_watts(radio.bs_circuit_dbm)),
        circuit_power_ue=np.full(k, float(dbm_to_watts(radio.ue_circuit_dbm))),
        amp_inefficiency=np.full(k, float(radio.amp_inefficiency)),
        positions=dist,
        seed=int(seed),
    )


def check_power(snapshot: NetworkSnapshot, p) -> np.ndarray:
    """Validate and coerce a power vector for `snapshot`."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    if p.shape != (snapshot.k,):
        raise ValueError(f"power vector must have length {snapshot.k}, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("power vector must be finite")
    if np.any(p < 0):
        raise ValueError("transmit powers must be non-negative")
    return p


def received_powers(snapshot: NetworkSnapshot, p) -> np.ndarray:
    """Per-UE received power at the BS, watts."""
    return check_power(snapshot, p) * snapshot.gains


def sinr(snapshot: NetworkSnapshot, p) -> np.ndarray:
    """Per-UE SINR at the BS: own received power over all other UEs' power plus noise."""
    s = received_powers(snapshot, p)
    interference = s.sum() - s + snapshot.noise_power
    return s / interference


def effective_interference(snapshot: NetworkSnapshot, p) -> np.ndarray:
    """Interference-plus-noise seen by each UE, normalized by its own gain (watts).

    A small value means a good channel: low interference and/or a strong gain.
    """
    s = received_powers(snapshot, p)
    return (s.sum() - s + snapshot.noise_power) / snapshot.gains


def local_effective_interference(power: float, sinr_value: float) -> float:
    """Effective interference from quantities a UE knows locally: p / SINR.

    Valid only while the UE transmits (SINR > 0); equal to the gain-normalized
    interference computed from global channel knowledge.
    """
    if sinr_value <= 0:
        raise ValueError(f"local effective interference is undefined at SINR {sinr_value}")
    return power / sinr_value


def metrics(snapshot: NetworkSnapshot, p) -> LinkMetrics:
    """Compute SINRs, throughputs, total power consumption, and the GEE at `p`."""
    p = check_power(snapshot, p)
    s = p * snapshot.gains
    interference = s.sum() - s + snapshot.noise_power
    sinr_values = s / interference
    throughput = np.log1p(sinr_values) / LN2
    total_throughput = float(throughput.sum())
    total_power = float(snapshot.fixed_power + (snapshot.amp_inefficiency * p).sum())
    gee = total_throughput / total_power if total_power > 0 else 0.0
    return LinkMetrics(
        sinr=sinr_values,
        eff_interference=interference / snapshot.gains,
        throughput=throughput,
        total_throughput=total_throughput,
        total_power=total_power,
        gee=gee,
    )
