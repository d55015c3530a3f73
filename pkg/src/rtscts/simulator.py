"""Monte Carlo companion to the closed-form analysis.

Samples candidate transceiver pairs in a square window, applies either
contention resolution rule exactly (pairwise conflicts found with a k-d
tree), and estimates the retained-transmitter density and the interference
at a typical retained pair's receiver.  Replications use independent,
reproducible random streams derived from one base seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .analysis import ThinningType, path_loss, retained_intensity
from .geometry import NetworkParams

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SimulationConfig:
    """Replication plan: window side length, replication count, base seed."""

    window_size: float
    n_replications: int
    seed: int

    def __post_init__(self):
        if not (math.isfinite(self.window_size) and self.window_size > 0.0):
            raise ValueError(f"window_size must be finite and > 0, got {self.window_size}")
        if self.n_replications < 1:
            raise ValueError(f"n_replications must be >= 1, got {self.n_replications}")
        if not (0 <= int(self.seed) < 2 ** 63):
            raise ValueError(f"seed must be a nonnegative 63-bit integer, got {self.seed}")


@dataclass(frozen=True)
class TransceiverPair:
    """One candidate pair: transmitter, receiver, orientation, mark."""

    tx: tuple[float, float]
    rx: tuple[float, float]
    orientation: float
    mark: float


class PointConfiguration:
    """Sampled candidate pairs in a centered square window.

    positions     (n, 2) transmitter coordinates
    orientations  (n,) receiver bearing from each transmitter
    marks         (n,) independent uniform marks, drawn for every sample so
                  random streams agree across contention rules
    """

    def __init__(self, positions: np.ndarray, orientations: np.ndarray,
                 marks: np.ndarray, window_size: float, d: float):
        self.positions = positions
        self.orientations = orientations
        self.marks = marks
        self.window_size = window_size
        self.d = d

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def receivers(self) -> np.ndarray:
        """(n, 2) receiver coordinates at distance d along each orientation."""
        return self.positions + self.d * np.column_stack(
            (np.cos(self.orientations), np.sin(self.orientations)))

    @property
    def pairs(self):
        """Iterate the configuration as TransceiverPair views."""
        rx = self.receivers
        for i in range(len(self)):
            yield TransceiverPair(
                tx=(float(self.positions[i, 0]), float(self.positions[i, 1])),
                rx=(float(rx[i, 0]), float(rx[i, 1])),
                orientation=float(self.orientations[i]),
                mark=float(self.marks[i]))


def replication_stream(seed: int, rep: int) -> np.random.Generator:
    """Independent generator for one replication of one experiment seed."""
    return np.random.default_rng(np.random.SeedSequence((seed, rep)))


def sample_bipolar(params: NetworkParams, window_size: float,
                   rng: np.random.Generator) -> PointConfiguration:
    """Draw a Poisson number of pairs uniformly in the window.

    Draw order is fixed (count, positions, orientations, marks) so a given
    stream yields the same geometry regardless of what the caller does with
    the marks.
    """
    half = 0.5 * window_size
    n = rng.poisson(params.lambda_p * window_size * window_size)
    positions = rng.uniform(-half, half, size=(n, 2))
    orientations = rng.uniform(0.0, TWO_PI, size=n)
    marks = rng.uniform(size=n)
    return PointConfiguration(positions, orientations, marks, window_size, params.d)


def _conflict_pairs(cfg: PointConfiguration, params: NetworkParams):
    """Indices (i, j), i < j, of candidate conflicts plus the per-direction
    blocking masks: hits_i[k] true when pair j can silence pair i."""
    n = len(cfg)
    if n < 2:
        empty = np.empty(0, dtype=np.intp)
        return empty, empty, np.empty(0, bool), np.empty(0, bool)
    interaction_radius = max(params.r_cs, params.d + params.r_tx)
    tree = cKDTree(cfg.positions)
    cand = tree.query_pairs(interaction_radius, output_type="ndarray")
    if cand.shape[0] == 0:
        empty = np.empty(0, dtype=np.intp)
        return empty, empty, np.empty(0, bool), np.empty(0, bool)
    ii = cand[:, 0]
    jj = cand[:, 1]
    rx = cfg.receivers
    d_tx = np.linalg.norm(cfg.positions[ii] - cfg.positions[jj], axis=1)
    sense = d_tx <= params.r_cs
    # closed boundaries throughout, matching the kernel definitions
    j_at_rx_i = np.linalg.norm(cfg.positions[jj] - rx[ii], axis=1) <= params.r_tx
    i_at_rx_j = np.linalg.norm(cfg.positions[ii] - rx[jj], axis=1) <= params.r_tx
    hits_i = sense | j_at_rx_i
    hits_j = sense | i_at_rx_j
    return ii, jj, hits_i, hits_j


def thin_type1(cfg: PointConfiguration, params: NetworkParams) -> np.ndarray:
    """Keep pairs whose own zone contains no other transmitter.

    The relation is directional: a transmitter inside my carrier-sense disk
    or my receiver's handshake disk silences me, whatever its own pair
    experiences.
    """
    ii, jj, hits_i, hits_j = _conflict_pairs(cfg, params)
    degree = np.zeros(len(cfg), dtype=np.intp)
    np.add.at(degree, ii[hits_i], 1)
    np.add.at(degree, jj[hits_j], 1)
    return degree == 0


def thin_type2(cfg: PointConfiguration, params: NetworkParams) -> np.ndarray:
    """Keep pairs not silenced by any lower-marked conflictor.

    Marks are frozen before resolution: a silenced pair still silences
    others.  Equal marks (measure zero) break by index.
    """
    ii, jj, hits_i, hits_j = _conflict_pairs(cfg, params)
    blocked = np.zeros(len(cfg), dtype=bool)
    if ii.size:
        m = cfg.marks
        j_beats_i = (m[jj] < m[ii]) | ((m[jj] == m[ii]) & (jj < ii))
        blocked[ii[hits_i & j_beats_i]] = True
        blocked[jj[hits_j & ~j_beats_i]] = True
    return ~blocked


def thin(cfg: PointConfiguration, params: NetworkParams,
         thinning: ThinningType) -> np.ndarray:
    if thinning is ThinningType.TYPE_I:
        return thin_type1(cfg, params)
    return thin_type2(cfg, params)


@dataclass(frozen=True)
class EstimateWithCI:
    """Replication average with a normal-approximation 95 percent half-width."""

    mean: float
    ci95: float
    n_replications: int


def empirical_intensity(params: NetworkParams, thinning: ThinningType,
                        config: SimulationConfig) -> EstimateWithCI:
    """Estimate the retained-transmitter density by replication.

    Only transmitters in the window shrunk by the conflict reach
    r_cs + r_tx + d are counted, so every counted pair saw its complete
    conflict neighborhood.
    """
    guard = params.r_cs + params.r_tx + params.d
    inner = config.window_size - 2.0 * guard
    if inner <= 0.0:
        raise ValueError(
            f"window_size must exceed twice the conflict reach {guard}, "
            f"got {config.window_size}")
    area = inner * inner
    values = np.empty(config.n_replications)
    for rep in range(config.n_replications):
        rng = replication_stream(config.seed, rep)
        cfg = sample_bipolar(params, config.window_size, rng)
        kept = thin(cfg, params, thinning)
        interior = (np.abs(cfg.positions) <= 0.5 * inner).all(axis=1)
        values[rep] = np.count_nonzero(kept & interior) / area
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
    return EstimateWithCI(mean=mean, ci95=1.96 * stderr,
                          n_replications=config.n_replications)


@dataclass(frozen=True)
class PalmResult:
    """Interference at the typical retained pair's receiver.

    mean / ci95                 over accepted replications
    n_accepted / n_replications acceptance bookkeeping; the acceptance rate
                                estimates retained_intensity / lambda_p
    min_interferer_distance     closest counted interferer to the receiver
                                across all accepted replications (inf if none)
    low_mark_close_interferers  diagnostic count of interferers inside the
                                receiver's handshake disk with a lower mark
                                than the typical pair; such a transmitter
                                would have silenced the pair, so anything
                                nonzero flags a thinning bug
    """

    mean: float
    ci95: float
    n_accepted: int
    n_replications: int
    acceptance_rate: float
    min_interferer_distance: float
    low_mark_close_interferers: int


def palm_interference(params: NetworkParams, thinning: ThinningType,
                      config: SimulationConfig,
                      interference_radius: float) -> PalmResult:
    """Condition on a typical pair at the origin being retained and measure
    the interference its receiver sees.

    A pair at the origin with orientation zero joins each sampled
    configuration (its mark drawn last, keeping the background stream
    intact).  Replications where it survives thinning contribute the summed
    received power at its receiver from every other retained transmitter
    within interference_radius of the origin; the radius matches the
    truncation of the quadrature so the two estimates are comparable.
    """
    if not (math.isfinite(interference_radius) and interference_radius > 0.0):
        raise ValueError(
            f"interference_radius must be finite and > 0, got {interference_radius}")
    reach = max(params.r_cs, params.d + params.r_tx)
    needed = 2.0 * (interference_radius + params.d + reach)
    if config.window_size < needed:
        raise ValueError(
            f"window_size must be >= {needed} so counted interferers see their "
            f"complete conflict neighborhood, got {config.window_size}")

    rx_typ = np.array([params.d, 0.0])
    samples = []
    n_accepted = 0
    min_dist = math.inf
    low_mark_close = 0
    for rep in range(config.n_replications):
        rng = replication_stream(config.seed, rep)
        cfg = sample_bipolar(params, config.window_size, rng)
        mark_typ = rng.uniform()
        n = len(cfg)
        aug = PointConfiguration(
            positions=np.vstack([cfg.positions, [[0.0, 0.0]]]),
            orientations=np.append(cfg.orientations, 0.0),
            marks=np.append(cfg.marks, mark_typ),
            window_size=cfg.window_size, d=cfg.d)
        kept = thin(aug, params, thinning)
        if not kept[n]:
            continue
        n_accepted += 1
        others = kept[:n] & (np.linalg.norm(cfg.positions, axis=1) <= interference_radius)
        if others.any():
            dists = np.linalg.norm(cfg.positions[others] - rx_typ, axis=1)
            samples.append(params.p_t * float(np.sum(path_loss(dists, params.path_loss))))
            min_dist = min(min_dist, float(dists.min()))
            low_mark_close += int(np.count_nonzero(
                (dists < params.r_tx) & (cfg.marks[others] < mark_typ)))
        else:
            samples.append(0.0)

    if n_accepted == 0:
        raise RuntimeError(
            "no replication retained the typical pair; increase n_replications "
            "or lower lambda_p")
    arr = np.asarray(samples)
    mean = float(arr.mean())
    stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return PalmResult(mean=mean, ci95=1.96 * stderr, n_accepted=n_accepted,
                      n_replications=config.n_replications,
                      acceptance_rate=n_accepted / config.n_replications,
                      min_interferer_distance=min_dist,
                      low_mark_close_interferers=low_mark_close)
