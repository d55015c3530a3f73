"""Planar geometry for transmitter-receiver pairs with circular guard zones.

Every pair is a transmitter plus a receiver at fixed separation ``d``.  The
zone a pair clears around itself is the union of a carrier-sense disk of
radius ``r_cs`` at the transmitter and a handshake disk of radius ``r_tx``
at the receiver, with ``r_tx < r_cs``.  This module computes areas of such
zones, areas of unions of small disk collections, and the pairwise conflict
events between two pairs.  All lengths share one unit; areas are squared
units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

# Relative slack used when classifying tangent or identical circles.
_TOL = 1e-12


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class Disk:
    """Closed disk given by center coordinates and radius."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        _require(_finite(self.center[0], self.center[1], self.radius),
                 "disk center and radius must be finite")
        _require(self.radius >= 0.0, f"disk radius must be >= 0, got {self.radius}")


@dataclass(frozen=True)
class PathLossModel:
    """Power-law attenuation amplitude * max(r, near_field_cutoff)**-exponent."""

    amplitude: float
    exponent: float
    near_field_cutoff: float

    def __post_init__(self):
        _require(_finite(self.amplitude, self.exponent, self.near_field_cutoff),
                 "path loss parameters must be finite")
        _require(self.amplitude > 0.0, f"amplitude must be > 0, got {self.amplitude}")
        # exponent > 2 keeps the far-field interference integral finite
        _require(self.exponent > 2.0, f"exponent must be > 2, got {self.exponent}")
        _require(self.near_field_cutoff >= 0.0,
                 f"near_field_cutoff must be >= 0, got {self.near_field_cutoff}")


@dataclass(frozen=True)
class NetworkParams:
    """Parameters of the bipolar network and its guard-zone geometry.

    lambda_p   intensity of candidate transmitters per unit area
    d          transmitter-to-receiver separation of every pair
    r_cs       carrier-sense radius around a transmitter
    r_tx       handshake-cleared radius around a receiver, r_tx < r_cs
    p_t        transmit power of every retained transmitter
    path_loss  attenuation model applied to transmitter-receiver distances
    """

    lambda_p: float
    d: float
    r_cs: float
    r_tx: float
    p_t: float
    path_loss: PathLossModel

    def __post_init__(self):
        _require(_finite(self.lambda_p, self.d, self.r_cs, self.r_tx, self.p_t),
                 "network parameters must be finite")
        _require(self.lambda_p >= 0.0, f"lambda_p must be >= 0, got {self.lambda_p}")
        _require(self.d > 0.0, f"d must be > 0, got {self.d}")
        _require(self.r_tx > 0.0, f"r_tx must be > 0, got {self.r_tx}")
        _require(self.r_tx < self.r_cs,
                 f"r_tx must be < r_cs, got r_tx={self.r_tx}, r_cs={self.r_cs}")
        _require(self.p_t > 0.0, f"p_t must be > 0, got {self.p_t}")

    @classmethod
    def make(cls, lambda_p: float, *, d: float = 2.0, r_cs: float = 2.0,
             r_tx: float = 1.0, p_t: float = 1.0, alpha: float = 4.0,
             amplitude: float = 1.0,
             near_field_cutoff: float | None = None) -> "NetworkParams":
        """Build params with the documentation defaults; cutoff defaults to 1e-3*d."""
        if near_field_cutoff is None:
            near_field_cutoff = 1e-3 * d
        return cls(lambda_p=lambda_p, d=d, r_cs=r_cs, r_tx=r_tx, p_t=p_t,
                   path_loss=PathLossModel(amplitude=amplitude, exponent=alpha,
                                           near_field_cutoff=near_field_cutoff))


@dataclass(frozen=True)
class ExclusionGeometry:
    """Area and opening angles of one pair's guard zone.

    v_o        area of the union of the two guard disks
    gamma_1    half-opening of the chord seen from the transmitter disk center
    gamma_2    half-opening of the chord seen from the receiver disk center
    degenerate True when the disks do not properly intersect (nested/disjoint)
    """

    v_o: float
    gamma_1: float
    gamma_2: float
    degenerate: bool


@dataclass(frozen=True)
class PairConfiguration:
    """Relative placement of a second pair against a reference pair.

    The reference pair sits at the origin with orientation 0, so its receiver
    is at (d, 0).  The second transmitter is at polar position (r, phi) and
    its receiver at angle theta from it.  Angles are normalized to [0, 2*pi).
    """

    r: float
    phi: float
    theta: float

    def __post_init__(self):
        _require(_finite(self.r, self.phi, self.theta),
                 "pair configuration must be finite")
        _require(self.r >= 0.0, f"r must be >= 0, got {self.r}")
        object.__setattr__(self, "phi", self.phi % TWO_PI)
        object.__setattr__(self, "theta", self.theta % TWO_PI)


@dataclass(frozen=True)
class ConflictEvents:
    """Closed-boundary conflict indicators between two pairs.

    s1  transmitters within carrier-sense range of each other
    s2  second transmitter inside the reference pair's receiver disk
    s3  reference transmitter inside the second pair's receiver disk
    """

    s1: bool
    s2: bool
    s3: bool

    @property
    def any(self) -> bool:
        return self.s1 or self.s2 or self.s3


def lens_area(r1: float, r2: float, dist: float) -> float:
    """Area of the intersection of two disks with radii r1, r2 at center
    distance dist.  Returns 0 for disjoint disks and the smaller disk's area
    for nested ones; continuous across both regime boundaries."""
    _require(_finite(r1, r2, dist), "lens_area arguments must be finite")
    _require(r1 >= 0.0 and r2 >= 0.0, "radii must be >= 0")
    _require(dist >= 0.0, f"dist must be >= 0, got {dist}")
    if dist >= r1 + r2:
        return 0.0
    if dist <= abs(r1 - r2):
        rmin = min(r1, r2)
        return math.pi * rmin * rmin
    a1 = math.acos(_clamp_unit((dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist * r1)))
    a2 = math.acos(_clamp_unit((dist * dist + r2 * r2 - r1 * r1) / (2.0 * dist * r2)))
    tri = 0.5 * math.sqrt(max(
        (-dist + r1 + r2) * (dist + r1 - r2) * (dist - r1 + r2) * (dist + r1 + r2),
        0.0))
    return r1 * r1 * a1 + r2 * r2 * a2 - tri


def _clamp_unit(x: float) -> float:
    return -1.0 if x < -1.0 else (1.0 if x > 1.0 else x)


def exclusion_zone_area(params: NetworkParams, *, strict: bool = False) -> ExclusionGeometry:
    """Area of one pair's guard zone (carrier-sense disk union receiver disk).

    In the proper-intersection regime |r_cs - r_tx| < d < r_cs + r_tx the
    closed form uses the chord opening angles; outside it the area degenerates
    to the containing disk (small d) or to two disjoint disks (large d) and
    the result is flagged.  With strict=True the disjoint regime is rejected.
    """
    d, rc, rt = params.d, params.r_cs, params.r_tx
    if d >= rc + rt:
        if strict:
            raise ValueError(
                f"d must be < r_cs + r_tx in strict mode, got d={d}, r_cs+r_tx={rc + rt}")
        return ExclusionGeometry(v_o=math.pi * (rc * rc + rt * rt),
                                 gamma_1=0.0, gamma_2=0.0, degenerate=True)
    if d <= rc - rt:
        # receiver disk swallowed by the carrier-sense disk
        return ExclusionGeometry(v_o=math.pi * rc * rc,
                                 gamma_1=0.0, gamma_2=math.pi, degenerate=True)
    g1 = math.acos(_clamp_unit((d * d + rc * rc - rt * rt) / (2.0 * d * rc)))
    g2 = math.acos(_clamp_unit((d * d + rt * rt - rc * rc) / (2.0 * d * rt)))
    v_o = (math.pi - g1) * rc * rc + (math.pi - g2) * rt * rt + d * rc * math.sin(g1)
    return ExclusionGeometry(v_o=v_o, gamma_1=g1, gamma_2=g2, degenerate=False)


def union_of_disks_area(disks) -> float:
    """Exact area of the union of up to eight disks.

    Decomposes each circle into boundary arcs cut by the other circles and
    sums the Green's theorem line integral over arcs not covered by any other
    disk.  Duplicate and fully contained disks are dropped first; tangencies
    are classified with a 1e-12 relative slack.

    Parameters
    ----------
    disks : sequence of Disk
        At most eight disks.  An empty sequence yields area 0.

    Returns
    -------
    float
        Union area, exact up to floating point rounding.
    """
    disks = list(disks)
    if len(disks) == 0:
        return 0.0
    _require(len(disks) <= 8, f"at most 8 disks supported, got {len(disks)}")
    items = []
    for dsk in disks:
        if not isinstance(dsk, Disk):
            dsk = Disk(center=(float(dsk[0][0]), float(dsk[0][1])), radius=float(dsk[1]))
        if dsk.radius > 0.0:
            items.append((dsk.center[0], dsk.center[1], dsk.radius))
    if not items:
        return 0.0

    tol = _TOL * max(it[2] for it in items)
    order = sorted(range(len(items)), key=lambda i: (-items[i][2], i))
    kept: list[int] = []
    for i in order:
        xi, yi, ri = items[i]
        swallowed = False
        for j in kept:
            xj, yj, rj = items[j]
            if math.hypot(xi - xj, yi - yj) + ri <= rj + tol:
                swallowed = True
                break
        if not swallowed:
            kept.append(i)
    circles = [items[j] for j in kept]

    total = 0.0
    for idx, (xi, yi, ri) in enumerate(circles):
        cuts: list[float] = []
        for jdx, (xj, yj, rj) in enumerate(circles):
            if jdx == idx:
                continue
            dc = math.hypot(xj - xi, yj - yi)
            if dc + tol >= ri + rj or dc <= abs(ri - rj) + tol:
                continue
            mid = math.atan2(yj - yi, xj - xi)
            half = math.acos(_clamp_unit((dc * dc + ri * ri - rj * rj) / (2.0 * dc * ri)))
            cuts.append((mid - half) % TWO_PI)
            cuts.append((mid + half) % TWO_PI)
        if cuts:
            cuts.sort()
            arcs = [(cuts[k], cuts[k + 1]) for k in range(len(cuts) - 1)]
            arcs.append((cuts[-1], cuts[0] + TWO_PI))
        else:
            arcs = [(0.0, TWO_PI)]
        for a0, a1 in arcs:
            tm = 0.5 * (a0 + a1)
            px = xi + ri * math.cos(tm)
            py = yi + ri * math.sin(tm)
            covered = False
            for jdx, (xj, yj, rj) in enumerate(circles):
                if jdx == idx:
                    continue
                if (px - xj) ** 2 + (py - yj) ** 2 < rj * rj * (1.0 - _TOL):
                    covered = True
                    break
            if not covered:
                total += 0.5 * (ri * ri * (a1 - a0)
                                + xi * ri * (math.sin(a1) - math.sin(a0))
                                - yi * ri * (math.cos(a1) - math.cos(a0)))
    return total


def _pair_disks(cfg: PairConfiguration, params: NetworkParams) -> list[Disk]:
    d = params.d
    tx2 = (cfg.r * math.cos(cfg.phi), cfg.r * math.sin(cfg.phi))
    rx2 = (tx2[0] + d * math.cos(cfg.theta), tx2[1] + d * math.sin(cfg.theta))
    return [
        Disk(center=(0.0, 0.0), radius=params.r_cs),
        Disk(center=(d, 0.0), radius=params.r_tx),
        Disk(center=tx2, radius=params.r_cs),
        Disk(center=rx2, radius=params.r_tx),
    ]


def pair_union_area(cfg: PairConfiguration, params: NetworkParams) -> float:
    """Area of the union of both pairs' guard zones (four disks).

    Lies between one zone's area and twice that area; reaches the upper bound
    once the pairs are far enough apart for their zones not to overlap.
    """
    return union_of_disks_area(_pair_disks(cfg, params))


def conflict_events(cfg: PairConfiguration, params: NetworkParams) -> ConflictEvents:
    """Evaluate the three pairwise conflict indicators with closed boundaries."""
    d, rc, rt = params.d, params.r_cs, params.r_tx
    r, phi, theta = cfg.r, cfg.phi, cfg.theta
    s1 = r <= rc
    s2 = r * r - 2.0 * r * d * math.cos(phi) + d * d <= rt * rt
    s3 = r * r + 2.0 * r * d * math.cos(phi - theta) + d * d <= rt * rt
    return ConflictEvents(s1=s1, s2=s2, s3=s3)


# ---------------------------------------------------------------------------
# Vectorized four-disk union used by the interference quadrature.  Same arc
# decomposition as union_of_disks_area, specialized to the fixed radius
# pattern [r_cs, r_tx, r_cs, r_tx] and batched over configurations.  Kept
# private; tests pin it against the scalar path.
# ---------------------------------------------------------------------------


def _union4_pair_area(cx: np.ndarray, cy: np.ndarray, r_cs: float, r_tx: float) -> np.ndarray:
    m_count = cx.shape[0]
    rad = (r_cs, r_tx, r_cs, r_tx)
    tol = _TOL * r_cs

    dxm = cx[:, None, :] - cx[:, :, None]  # [m, i, j] = x_j - x_i
    dym = cy[:, None, :] - cy[:, :, None]
    dist = np.sqrt(dxm * dxm + dym * dym)

    # Containment pruning in fixed radius-descending order (0, 2, 1, 3).
    # With only two radius values the possible containments are: disk 2 dies
    # iff identical to 0; small disks die inside either large one; disk 3
    # additionally dies if identical to the surviving disk 1.
    alive = np.ones((m_count, 4), dtype=bool)
    alive[:, 2] = dist[:, 0, 2] > tol
    in_0 = dist[:, 0, 1] + r_tx <= r_cs + tol
    in_2 = (dist[:, 2, 1] + r_tx <= r_cs + tol) & alive[:, 2]
    alive[:, 1] = ~(in_0 | in_2)
    in3_0 = dist[:, 0, 3] + r_tx <= r_cs + tol
    in3_2 = (dist[:, 2, 3] + r_tx <= r_cs + tol) & alive[:, 2]
    in3_1 = (dist[:, 1, 3] <= tol) & alive[:, 1]
    alive[:, 3] = ~(in3_0 | in3_2 | in3_1)

    area = np.zeros(m_count)
    slot_idx = np.arange(6)[None, :]
    rows = np.arange(m_count)
    with np.errstate(invalid="ignore", divide="ignore"):
        for i in range(4):
            ri = rad[i]
            angs = np.full((m_count, 6), np.inf)
            crossings = []
            col = 0
            for j in range(4):
                if j == i:
                    continue
                rj = rad[j]
                dij = dist[:, i, j]
                cross = (alive[:, i] & alive[:, j]
                         & (dij > abs(ri - rj) + tol) & (dij < ri + rj - tol))
                mid = np.arctan2(dym[:, i, j], dxm[:, i, j])
                carg = (dij * dij + ri * ri - rj * rj) / (2.0 * dij * ri)
                half = np.arccos(np.clip(carg, -1.0, 1.0))
                crossings.append((mid, half, cross))
                angs[:, col] = np.where(cross, np.mod(mid - half, TWO_PI), np.inf)
                angs[:, col + 1] = np.where(cross, np.mod(mid + half, TWO_PI), np.inf)
                col += 2
            angs.sort(axis=1)
            n_cuts = np.isfinite(angs).sum(axis=1)

            start = np.where(np.isfinite(angs), angs, 0.0)
            end = np.zeros_like(start)
            end[:, :5] = np.where(np.isfinite(angs[:, 1:]), angs[:, 1:], 0.0)
            first = np.where(n_cuts > 0, angs[:, 0], 0.0)
            last_slot = np.clip(n_cuts - 1, 0, 5)
            end[rows, last_slot] = first + TWO_PI
            none = n_cuts == 0
            start[none, 0] = 0.0
            end[none, 0] = TWO_PI

            valid = (slot_idx < n_cuts[:, None]) | (none[:, None] & (slot_idx == 0))
            valid &= alive[:, i][:, None]

            # an arc of circle i lies inside disk j exactly when its midpoint
            # angle falls in j's crossing interval, so coverage needs no trig
            tmid = 0.5 * (start + end)
            covered = np.zeros((m_count, 6), dtype=bool)
            for mid, half, cross in crossings:
                inside = np.mod(tmid - (mid[:, None] - half[:, None]), TWO_PI) < 2.0 * half[:, None]
                covered |= inside & cross[:, None]

            seg = 0.5 * (ri * ri * (end - start)
                         + cx[:, i][:, None] * ri * (np.sin(end) - np.sin(start))
                         - cy[:, i][:, None] * ri * (np.cos(end) - np.cos(start)))
            area += np.where(valid & ~covered, seg, 0.0).sum(axis=1)
    return area


def zone_reach(params: NetworkParams) -> float:
    """Radius of the smallest transmitter-centered disk holding a pair's
    whole zone; two pairs' zones cannot touch beyond twice this."""
    return max(params.r_cs, params.d + params.r_tx)


def pair_union_area_batch(r, phi, theta, params: NetworkParams) -> np.ndarray:
    """Vectorized pair_union_area over arrays of (r, phi, theta).

    Once the transmitters are at least two zone reaches apart the zones
    cannot touch and the union area is exactly twice the single-zone area;
    those entries skip the arc decomposition.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    r, phi, theta = np.broadcast_arrays(r, phi, theta)
    flat_r = r.ravel()
    flat_phi = phi.ravel()
    flat_theta = theta.ravel()

    v_o = exclusion_zone_area(params).v_o
    out = np.full(flat_r.shape, 2.0 * v_o)
    near = flat_r < 2.0 * zone_reach(params)
    if near.any():
        rr = flat_r[near]
        pp = flat_phi[near]
        tt = flat_theta[near]
        d = params.d
        tx2x = rr * np.cos(pp)
        tx2y = rr * np.sin(pp)
        cx = np.stack([np.zeros_like(rr), np.full_like(rr, d),
                       tx2x, tx2x + d * np.cos(tt)], axis=1)
        cy = np.stack([np.zeros_like(rr), np.zeros_like(rr),
                       tx2y, tx2y + d * np.sin(tt)], axis=1)
        out[near] = _union4_pair_area(cx, cy, params.r_cs, params.r_tx)
    return out.reshape(r.shape)


def monte_carlo_union_area(disks, n_darts: int, rng) -> tuple[float, float]:
    """Estimate a disk-union area by uniform darts in the bounding box.

    Returns (estimate, standard_error).  Meant for spot checks against the
    exact arc decomposition; the error shrinks like 1/sqrt(n_darts).
    """
    disks = list(disks)
    _require(bool(disks), "need at least one disk")
    _require(n_darts >= 1, "n_darts must be positive")
    cx = np.array([dk.center[0] for dk in disks])
    cy = np.array([dk.center[1] for dk in disks])
    rad = np.array([dk.radius for dk in disks])
    lo_x, hi_x = (cx - rad).min(), (cx + rad).max()
    lo_y, hi_y = (cy - rad).min(), (cy + rad).max()
    box = (hi_x - lo_x) * (hi_y - lo_y)
    if box == 0.0:
        return 0.0, 0.0

    hits = 0
    remaining = n_darts
    while remaining > 0:
        chunk = min(remaining, 1_000_000)
        px = rng.uniform(lo_x, hi_x, size=chunk)
        py = rng.uniform(lo_y, hi_y, size=chunk)
        inside = np.zeros(chunk, dtype=bool)
        for x0, y0, r0 in zip(cx, cy, rad):
            inside |= (px - x0) ** 2 + (py - y0) ** 2 <= r0 * r0
        hits += int(inside.sum())
        remaining -= chunk
    p = hits / n_darts
    return box * p, box * math.sqrt(p * (1.0 - p) / n_darts)
