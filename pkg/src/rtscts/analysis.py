"""Closed-form and numerical analysis of handshake-thinned bipolar networks.

Covers the retained-transmitter intensity for both thinning rules, the
pair-retention kernels (probability that two candidate pairs at a given
relative placement are both retained), and the mean interference measured at
a retained pair's receiver, computed by adaptive midpoint quadrature over
the relative-placement space.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .geometry import (
    NetworkParams,
    PathLossModel,
    exclusion_zone_area,
    pair_union_area_batch,
    zone_reach,
)

TWO_PI = 2.0 * math.pi


class ThinningType(enum.Enum):
    """Contention resolution rule applied to the candidate process."""

    TYPE_I = "type1"
    TYPE_II = "type2"

    @classmethod
    def parse(cls, label: str) -> "ThinningType":
        for member in cls:
            if member.value == label:
                return member
        raise ValueError(f"unknown thinning type {label!r}, expected 'type1' or 'type2'")


def path_loss(dist, model: PathLossModel):
    """Received power per unit transmit power at the given distance(s).

    Distances below the near-field cutoff are clamped to it, keeping the
    value finite at zero separation.
    """
    dist = np.asarray(dist, dtype=float)
    out = model.amplitude * np.maximum(dist, model.near_field_cutoff) ** (-model.exponent)
    return float(out) if out.ndim == 0 else out


def intensity_type1(params: NetworkParams) -> float:
    """Density of retained transmitters when any intruder in a pair's own
    guard zone silences it."""
    v_o = exclusion_zone_area(params).v_o
    return params.lambda_p * math.exp(-params.lambda_p * v_o)


def intensity_type2(params: NetworkParams) -> float:
    """Density of retained transmitters when only lower-marked intruders
    silence a pair."""
    v_o = exclusion_zone_area(params).v_o
    # -expm1 keeps full precision for small lambda_p * v_o
    return -math.expm1(-params.lambda_p * v_o) / v_o


def retained_intensity(params: NetworkParams, thinning: ThinningType) -> float:
    if thinning is ThinningType.TYPE_I:
        return intensity_type1(params)
    return intensity_type2(params)


def optimal_lambda_p_type1(params: NetworkParams) -> float:
    """Candidate density maximizing the retained intensity under the first rule.

    The retained intensity lambda_p * exp(-lambda_p * v_o) peaks at 1 / v_o
    with maximum value 1 / (e * v_o).
    """
    return 1.0 / exclusion_zone_area(params).v_o


# Number of series terms for the small-excess branch of
# ordered_pair_retention; remainder is below 1/31! of the leading scale.
_SERIES_TERMS = 30


def ordered_pair_retention(v, params: NetworkParams):
    """Joint retention weight for two pairs whose zones union to area v.

    Expectation over two independent uniform marks of the indicator that the
    second mark is the lower one times the void weight exp(-lambda_p * w),
    where w grows from the shared-zone area at mark order zero: the
    higher-marked pair must clear its own zone, the lower-marked pair the
    rest of the union.  Equal to the double integral over 0 < t2 < t1 < 1 of
    exp(-lambda_p * (v_o * t1 + (v - v_o) * t2)).

    Values lie in [0, 1/2]; 1/2 exactly when lambda_p is zero.  The excess
    a = lambda_p * (v - v_o) switches between a closed form (a > 1) and an
    alternating series in a (a <= 1) to avoid cancellation.
    """
    v = np.asarray(v, dtype=float)
    scalar = v.ndim == 0
    v = np.atleast_1d(v)
    if params.lambda_p == 0.0:
        out = np.full(v.shape, 0.5)
        return float(out[0]) if scalar else out

    v_o = exclusion_zone_area(params).v_o
    b = params.lambda_p * v_o
    a = np.maximum(params.lambda_p * (v - v_o), 0.0)
    out = np.empty(v.shape)

    direct = a > 1.0
    if direct.any():
        ad = a[direct]
        num = b * math.exp(-b) * np.expm1(-ad) - ad * math.expm1(-b)
        out[direct] = num / (ad * b * (ad + b))

    series = ~direct
    if series.any():
        asr = a[series]
        # coeff[n] = (-1)^n / (n+1)! * integral_0^1 t^(n+1) exp(-b t) dt
        k = np.arange(1, _SERIES_TERMS + 2, dtype=float)
        if b >= 1.0:
            moments = special.gammainc(k + 1.0, b) * special.gamma(k + 1.0) / b ** (k + 1.0)
        else:
            # gammainc / b**(k+1) hits subnormals for small b; expand the
            # moment integral in b instead (remainder under b^31 / 31!)
            m = np.arange(_SERIES_TERMS + 1, dtype=float)
            b_pow = (-b) ** m / special.factorial(m)
            moments = (b_pow[None, :] / (k[:, None] + m[None, :] + 1.0)).sum(axis=1)
        signs = np.where(np.arange(_SERIES_TERMS + 1) % 2 == 0, 1.0, -1.0)
        coeff = signs * moments / special.factorial(np.arange(1, _SERIES_TERMS + 2))
        acc = np.full(asr.shape, coeff[_SERIES_TERMS])
        for n in range(_SERIES_TERMS - 1, -1, -1):
            acc = coeff[n] + asr * acc
        out[series] = acc

    return float(out[0]) if scalar else out


def _conflict_masks(r, phi, theta, params: NetworkParams):
    d, rt = params.d, params.r_tx
    s1 = r <= params.r_cs
    s2 = r * r - 2.0 * r * d * np.cos(phi) + d * d <= rt * rt
    s3 = r * r + 2.0 * r * d * np.cos(phi - theta) + d * d <= rt * rt
    return s1, s2, s3


def pair_retention_kernel(r, phi, theta, params: NetworkParams,
                          thinning: ThinningType):
    """Probability that two candidate pairs at relative placement (r, phi,
    theta) are both retained, given both are present.

    Under the first rule any of the three conflict events suppresses the
    pair, otherwise retention requires the union zone void of other
    candidates.  Under the second rule mutual carrier sense or a two-sided
    receiver conflict is fatal; a one-sided receiver conflict forces a mark
    ordering (weight ordered_pair_retention); no conflict allows either
    ordering (twice that weight).
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    r, phi, theta = np.broadcast_arrays(r, phi, theta)
    shape = r.shape
    r = np.atleast_1d(r).ravel()
    phi = np.atleast_1d(phi).ravel()
    theta = np.atleast_1d(theta).ravel()

    s1, s2, s3 = _conflict_masks(r, phi, theta, params)
    out = np.zeros(r.shape)
    if thinning is ThinningType.TYPE_I:
        alive = ~(s1 | s2 | s3)
        if alive.any():
            v = pair_union_area_batch(r[alive], phi[alive], theta[alive], params)
            out[alive] = np.exp(-params.lambda_p * v)
    else:
        alive = ~(s1 | (s2 & s3))
        if alive.any():
            v = pair_union_area_batch(r[alive], phi[alive], theta[alive], params)
            weight = ordered_pair_retention(v, params)
            one_sided = (s2 ^ s3)[alive]
            out[alive] = np.where(one_sided, weight, 2.0 * weight)

    if shape == ():
        return float(out[0])
    return out.reshape(shape)


@dataclass(frozen=True)
class QuadratureConfig:
    """Controls for the mean-interference quadrature.

    r_max       truncation radius of the relative-placement integral
    rel_tol     stop once one grid doubling changes the value by less
    base_grid   starting cell counts (radial, bearing, orientation)
    max_levels  doublings attempted before giving up
    """

    r_max: float = 70.0
    rel_tol: float = 5e-3
    base_grid: tuple[int, int, int] = (16, 32, 32)
    max_levels: int = 6

    def __post_init__(self):
        if not (math.isfinite(self.r_max) and self.r_max > 0.0):
            raise ValueError(f"r_max must be finite and > 0, got {self.r_max}")
        if not (0.0 < self.rel_tol < 1.0):
            raise ValueError(f"rel_tol must be in (0, 1), got {self.rel_tol}")
        if len(self.base_grid) != 3 or any(int(n) < 2 for n in self.base_grid):
            raise ValueError(f"base_grid needs three counts >= 2, got {self.base_grid}")
        if self.max_levels < 1:
            raise ValueError(f"max_levels must be >= 1, got {self.max_levels}")


@dataclass(frozen=True)
class InterferenceResult:
    """Converged mean interference at a retained pair's receiver.

    value       mean interference power
    tail_bound  upper bound on the mass beyond r_max (not included in value)
    history     successive estimates, one per grid level
    grid        cell counts of the finest (accepted) near-field grid
    """

    value: float
    tail_bound: float
    history: tuple[float, ...]
    grid: tuple[int, int, int]


class QuadratureConvergenceError(RuntimeError):
    """Grid doubling failed to stabilize the interference integral."""

    def __init__(self, history, rel_tol):
        self.history = tuple(history)
        self.rel_tol = rel_tol
        tail = ", ".join(f"{v:.6g}" for v in self.history[-4:])
        super().__init__(
            f"interference quadrature did not reach rel_tol={rel_tol:g}; "
            f"last estimates: {tail}")


def interference_tail_bound(params: NetworkParams, thinning: ThinningType,
                            r_max: float) -> float:
    """Upper bound on the interference mass from placements beyond r_max.

    Uses kernel <= 1 and distance-to-receiver >= r - d, so it is valid for
    any r_max at least d plus the near-field cutoff.
    """
    model = params.path_loss
    x = r_max - params.d
    if x < model.near_field_cutoff:
        raise ValueError(
            f"r_max must be >= d + near_field_cutoff for the tail bound, got {r_max}")
    lam = retained_intensity(params, thinning)
    if lam == 0.0:
        return 0.0
    pref = params.lambda_p ** 2 * params.p_t / (TWO_PI * lam)
    alpha = model.exponent
    radial = x ** (2.0 - alpha) / (alpha - 2.0) + params.d * x ** (1.0 - alpha) / (alpha - 1.0)
    return pref * 4.0 * math.pi ** 2 * model.amplitude * radial


_CHUNK = 1 << 17


def _event_half_widths(r: float, params: NetworkParams) -> tuple[float, float]:
    """Angular half-widths of the two receiver-conflict bands at radius r.

    The interferer-at-my-receiver event is a bearing band |phi| <= phi_star;
    the me-at-their-receiver event is a band of the bearing-minus-orientation
    variable xi around pi with half-width psi_star.  Both are empty unless
    |r - d| < r_tx.
    """
    d, rt = params.d, params.r_tx
    if abs(r - d) >= rt or r == 0.0:
        return 0.0, 0.0
    phi_star = math.acos(min(max((r * r + d * d - rt * rt) / (2.0 * r * d), -1.0), 1.0))
    psi_star = math.pi - math.acos(
        min(max((rt * rt - r * r - d * d) / (2.0 * r * d), -1.0), 1.0))
    return phi_star, psi_star


def _block_sum(r, phi_iv, xi_iv, n_phi, n_theta, params, weight) -> float:
    """Midpoint sum of path_loss * retention-weight over one angular block.

    The block is a rectangle in (bearing phi, difference xi = phi - theta);
    the weight kind selects the no-conflict kernel ('exp' for the first
    rule, 'both' for twice the ordered weight) or the one-sided 'single'
    ordered weight.  Cell areas are included; the radial factor is not.
    """
    (p0, p1), (x0, x1) = phi_iv, xi_iv
    if p1 <= p0 or x1 <= x0:
        return 0.0
    dphi = (p1 - p0) / n_phi
    dxi = (x1 - x0) / n_theta
    phi_mid = p0 + (np.arange(n_phi) + 0.5) * dphi
    xi_mid = x0 + (np.arange(n_theta) + 0.5) * dxi
    phi_grid = np.repeat(phi_mid, n_theta)
    xi_grid = np.tile(xi_mid, n_phi)
    d = params.d

    chunk_sums = []
    for lo in range(0, phi_grid.size, _CHUNK):
        pg = phi_grid[lo:lo + _CHUNK]
        theta = pg - xi_grid[lo:lo + _CHUNK]
        v = pair_union_area_batch(r, pg, theta, params)
        if weight == "exp":
            w = np.exp(-params.lambda_p * v)
        elif weight == "both":
            w = 2.0 * ordered_pair_retention(v, params)
        else:
            w = ordered_pair_retention(v, params)
        dist = np.sqrt(np.maximum(r * r - 2.0 * r * d * np.cos(pg) + d * d, 0.0))
        chunk_sums.append(float(np.sum(path_loss(dist, params.path_loss) * w)))
    return math.fsum(chunk_sums) * dphi * dxi


def _near_field_sum(params, thinning, r_lo, r_hi, n_r, n_phi, n_theta) -> float:
    """Midpoint sum of path_loss * kernel * r over [r_lo, r_hi] x angles.

    Each radial slice splits the angular square along the exact conflict-band
    edges at its midpoint radius, so no cell straddles a kernel jump: the
    first rule integrates only the conflict-free block, the second adds the
    two one-sided bands at half weight.  The orientation variable is taken
    relative to the bearing, which makes the second band's edges radial-only.
    """
    dr = (r_hi - r_lo) / n_r
    slice_sums = []
    for i in range(n_r):
        r = r_lo + (i + 0.5) * dr
        phi_star, psi_star = _event_half_widths(r, params)
        phi_out = (phi_star, TWO_PI - phi_star)
        phi_in = (-phi_star, phi_star)
        xi_out = (math.pi + psi_star, 3.0 * math.pi - psi_star)
        xi_in = (math.pi - psi_star, math.pi + psi_star)
        total = _block_sum(r, phi_out, xi_out, n_phi, n_theta, params,
                           "exp" if thinning is ThinningType.TYPE_I else "both")
        if thinning is ThinningType.TYPE_II and phi_star > 0.0:
            total += _block_sum(r, phi_in, xi_out, n_phi, n_theta, params, "single")
            total += _block_sum(r, phi_out, xi_in, n_phi, n_theta, params, "single")
        slice_sums.append(r * total)
    return math.fsum(slice_sums) * dr


def _far_field_sum(params, k_far, r_lo, r_hi, n_r, n_phi) -> float:
    """Same integral where the kernel is the constant k_far: the orientation
    average is trivial and contributes a factor 2*pi."""
    if n_r == 0 or r_hi <= r_lo:
        return 0.0
    dr = (r_hi - r_lo) / n_r
    dphi = TWO_PI / n_phi
    r_mid = r_lo + (np.arange(n_r) + 0.5) * dr
    phi_mid = (np.arange(n_phi) + 0.5) * dphi
    d = params.d
    slice_sums = []
    for i in range(n_r):
        r = r_mid[i]
        dist = np.sqrt(np.maximum(r * r - 2.0 * r * d * np.cos(phi_mid) + d * d, 0.0))
        slice_sums.append(r * float(np.sum(path_loss(dist, params.path_loss))))
    return k_far * TWO_PI * math.fsum(slice_sums) * dr * dphi


def mean_interference(params: NetworkParams, thinning: ThinningType,
                      config: QuadratureConfig | None = None) -> InterferenceResult:
    """Mean interference at a retained pair's receiver from the other
    retained transmitters.

    Integrates path_loss(distance to the receiver) against the second-order
    density of retained pairs, written in relative polar coordinates and
    averaged over the interferer's orientation.  The radial domain splits at
    twice the zone reach: beyond it the two zones cannot interact, the kernel
    is a known constant, and the orientation dimension drops out.  Both
    blocks use the midpoint rule and every dimension doubles per level until
    the value moves by less than rel_tol, else QuadratureConvergenceError.

    Raises the same error immediately if the truncated integral cannot be
    trusted, and ValueError for an r_max below d + near_field_cutoff.
    """
    if config is None:
        config = QuadratureConfig()
    lam = retained_intensity(params, thinning)
    tail = interference_tail_bound(params, thinning, config.r_max)
    if params.lambda_p == 0.0:
        return InterferenceResult(value=0.0, tail_bound=0.0, history=(0.0,),
                                  grid=config.base_grid)

    pref = params.lambda_p ** 2 * params.p_t / (TWO_PI * lam)
    r_split = min(2.0 * zone_reach(params), config.r_max)
    near_len = r_split - params.r_cs
    if near_len <= 0.0:
        raise ValueError(f"r_max must exceed r_cs, got {config.r_max}")
    far_len = config.r_max - r_split
    if thinning is ThinningType.TYPE_I:
        v_o = exclusion_zone_area(params).v_o
        k_far = math.exp(-2.0 * params.lambda_p * v_o)
    else:
        v_o = exclusion_zone_area(params).v_o
        k_far = 2.0 * float(ordered_pair_retention(2.0 * v_o, params))
    # keep far radial spacing comparable to the near block's
    far_cells_per_near = max(1, round(far_len / near_len)) if far_len > 0.0 else 0

    history: list[float] = []
    previous = None
    for level in range(config.max_levels):
        scale = 1 << level
        n_r = config.base_grid[0] * scale
        n_phi = config.base_grid[1] * scale
        n_theta = config.base_grid[2] * scale
        raw = _near_field_sum(params, thinning, params.r_cs, r_split,
                              n_r, n_phi, n_theta)
        raw += _far_field_sum(params, k_far, r_split, config.r_max,
                              n_r * far_cells_per_near if far_len > 0.0 else 0,
                              n_phi)
        estimate = pref * raw
        history.append(estimate)
        if previous is not None:
            if abs(estimate - previous) <= config.rel_tol * max(abs(estimate), 1e-300):
                return InterferenceResult(value=estimate, tail_bound=tail,
                                          history=tuple(history),
                                          grid=(n_r, n_phi, n_theta))
        previous = estimate
    raise QuadratureConvergenceError(history, config.rel_tol)
