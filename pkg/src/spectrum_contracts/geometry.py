"""Air-to-ground radio geometry and coverage partition.

Aerial relays hovering at a common height compete with a ground base
station for users spread over a square analysis window.  A user hears a
relay through a mix of line-of-sight and obstructed paths; the mix is
governed by the elevation angle, so coverage depends on height in a
non-trivial way.  This module computes:

* the line-of-sight probability and averaged pathloss models,
* the SNR-based ownership partition of the window into per-transmitter
  regions, evaluated on a regular grid of cell centers,
* mean demand derived from region areas and user densities, which is
  what turns a physical deployment into a ladder of contract types,
* height sweeps that re-run the partition and both solvers per height.

Distances are meters, angles are degrees, powers are dB-scale (dBm for
absolute powers), frequencies Hz.  The base station antenna sits at
ground level at its planar position, so its pathloss uses horizontal
distance; a relay at height H above a point at horizontal distance r is
seen under elevation atan(H / r) at slant range sqrt(r^2 + H^2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .contract import TypeLadder, ladder_from_lambdas
from .solver import Objective, TieBreak, solve

SPEED_OF_LIGHT = 2.99792458e8

MBS_OWNER = -1


@dataclass(frozen=True)
class TerrainParams:
    """Sigmoid steepness/offset and the per-path excess losses in dB.

    ``a`` and ``b`` shape the line-of-sight probability curve;
    ``eta_los`` and ``eta_nlos`` are the excess losses added to free
    space on the open and obstructed paths respectively.
    """

    a: float
    b: float
    eta_los: float
    eta_nlos: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise ValueError(f"a must be positive, got {self.a}")
        if not (math.isfinite(self.b) and self.b > 0.0):
            raise ValueError(f"b must be positive, got {self.b}")
        if not (math.isfinite(self.eta_los) and self.eta_los >= 0.0):
            raise ValueError(f"eta_los must be >= 0, got {self.eta_los}")
        if not math.isfinite(self.eta_nlos) or self.eta_nlos <= self.eta_los:
            raise ValueError(
                f"eta_nlos must exceed eta_los, got {self.eta_nlos} <= {self.eta_los}"
            )


@dataclass(frozen=True)
class RadioParams:
    """Carrier frequency and dB-scale power levels.

    ``p_mbs`` and ``p_uav`` are transmit powers in dBm, ``noise`` the
    noise floor in dBm.  ``channel_bandwidth`` is carried as metadata
    for reporting; no formula here consumes it.
    """

    frequency: float
    p_mbs: float
    p_uav: float
    noise: float
    channel_bandwidth: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.frequency) and self.frequency > 0.0):
            raise ValueError(f"frequency must be positive, got {self.frequency}")
        for name in ("p_mbs", "p_uav", "noise"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.channel_bandwidth is not None and not (
            math.isfinite(self.channel_bandwidth) and self.channel_bandwidth > 0.0
        ):
            raise ValueError(
                f"channel_bandwidth must be positive, got {self.channel_bandwidth}"
            )


@dataclass(frozen=True)
class Placement:
    """Planar transmitter layout with one shared relay height."""

    uav_positions: tuple[tuple[float, float], ...]
    height: float
    mbs_position: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        positions = tuple(
            (float(x), float(y)) for x, y in self.uav_positions
        )
        object.__setattr__(self, "uav_positions", positions)
        object.__setattr__(
            self, "mbs_position", tuple(float(v) for v in self.mbs_position)
        )
        if not (math.isfinite(self.height) and self.height > 0.0):
            raise ValueError(f"height must be positive, got {self.height}")
        for x, y in positions:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError("UAV positions must be finite")
        if len(set(positions)) != len(positions):
            raise ValueError("UAV positions must be distinct")


@dataclass(frozen=True)
class RegionGrid:
    """Ownership labels on a cell grid plus per-UAV region areas.

    ``owner`` holds one label per cell: -1 for the base station, else
    the index of the owning UAV.  ``areas`` are in square meters,
    counted from owned cells.
    """

    extent: float
    cell_size: float
    owner: np.ndarray
    areas: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (math.isfinite(self.extent) and self.extent > 0.0):
            raise ValueError(f"extent must be positive, got {self.extent}")
        if not (math.isfinite(self.cell_size) and self.cell_size > 0.0):
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        total = 4.0 * self.extent * self.extent
        if sum(self.areas) > total * (1.0 + 1e-12):
            raise ValueError("region areas exceed the analysis window")

    @property
    def cell_area(self) -> float:
        return self.cell_size * self.cell_size

    @property
    def total_area(self) -> float:
        """Area actually tiled by cells (<= the window square)."""
        return self.owner.size * self.cell_area

    @property
    def mbs_area(self) -> float:
        return int(np.count_nonzero(self.owner == MBS_OWNER)) * self.cell_area


@dataclass(frozen=True)
class DensityMap:
    """Mean active-user density around each UAV, per square meter."""

    rho: tuple[float, ...]

    def __post_init__(self) -> None:
        rho = tuple(float(v) for v in self.rho)
        object.__setattr__(self, "rho", rho)
        if len(rho) == 0:
            raise ValueError("density map must cover at least one UAV")
        for value in rho:
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"density must be positive, got {value}")


@dataclass(frozen=True)
class DerivedTypes:
    """Mean demand per UAV with zero-area UAVs separated out."""

    lambdas: tuple[float, ...]
    kept_uavs: tuple[int, ...]
    excluded_uavs: tuple[int, ...]
    warnings: tuple[str, ...]

    def ladder(self) -> TypeLadder:
        """Ascending type ladder; equal demands merge into one type."""
        return ladder_from_lambdas(self.lambdas)


@dataclass(frozen=True)
class HeightRecord:
    """Everything the height sweep learns at one height."""

    height: float
    areas: tuple[float, ...]
    lambdas: tuple[float, ...]
    excluded_uavs: tuple[int, ...]
    revenue: float
    welfare: float
    sold_revenue: int
    sold_welfare: int


def p_los(theta, terrain: TerrainParams):
    """Line-of-sight probability at elevation ``theta`` degrees.

    Accepts scalars or arrays; raises if any angle leaves [0, 90].
    """
    theta_arr = np.asarray(theta, dtype=np.float64)
    if np.any(theta_arr < 0.0) or np.any(theta_arr > 90.0) or np.any(np.isnan(theta_arr)):
        raise ValueError("elevation angle must lie in [0, 90] degrees")
    result = 1.0 / (1.0 + terrain.a * np.exp(-terrain.b * (theta_arr - terrain.a)))
    if np.isscalar(theta) or theta_arr.ndim == 0:
        return float(result)
    return result


def _free_space(d, frequency: float):
    return 20.0 * np.log10(4.0 * math.pi * frequency * np.asarray(d) / SPEED_OF_LIGHT)


def pathloss_uav(theta, d, terrain: TerrainParams, radio: RadioParams):
    """Average pathloss in dB from a relay seen at angle theta, range d.

    The open and obstructed paths share the free-space term and differ
    by their excess losses; averaging over the line-of-sight probability
    collapses to the obstructed loss minus the probability-weighted
    excess gap.
    """
    d_arr = np.asarray(d, dtype=np.float64)
    if np.any(d_arr <= 0.0) or np.any(np.isnan(d_arr)):
        raise ValueError("distance must be positive")
    prob = np.asarray(p_los(theta, terrain))
    free = _free_space(d_arr, radio.frequency)
    loss = prob * (free + terrain.eta_los) + (1.0 - prob) * (free + terrain.eta_nlos)
    if np.isscalar(d) and np.isscalar(theta):
        return float(loss)
    return loss


def pathloss_mbs(d, terrain: TerrainParams, radio: RadioParams):
    """Pathloss in dB from the base station: obstructed path only."""
    d_arr = np.asarray(d, dtype=np.float64)
    if np.any(d_arr <= 0.0) or np.any(np.isnan(d_arr)):
        raise ValueError("distance must be positive")
    loss = _free_space(d_arr, radio.frequency) + terrain.eta_nlos
    if np.isscalar(d):
        return float(loss)
    return loss


def snr(transmit_power, pathloss, noise):
    """Received SNR in dB: transmit power less pathloss less noise."""
    return transmit_power - pathloss - noise


def _cell_centers(extent: float, cell_size: float) -> np.ndarray:
    """Symmetric cell-center coordinates tiling [-extent, extent]."""
    n = int(math.floor(2.0 * extent / cell_size + 1e-9))
    n = max(n, 1)
    return (np.arange(n) - (n - 1) / 2.0) * cell_size


def partition_regions(
    placement: Placement,
    terrain: TerrainParams,
    radio: RadioParams,
    extent: float = 3000.0,
    cell_size: float = 5.0,
) -> RegionGrid:
    """Assign every grid cell to its best-SNR transmitter.

    Cells are scored at their centers.  The base station is evaluated
    first and UAVs in index order with a strict improvement test, so
    exact SNR ties resolve to the base station, then to the lowest UAV
    index.  A transmitter directly on a cell center yields an infinite
    SNR and simply wins that cell; nothing errors.
    """
    if not (math.isfinite(extent) and extent > 0.0):
        raise ValueError(f"extent must be positive, got {extent}")
    if not (math.isfinite(cell_size) and cell_size > 0.0):
        raise ValueError(f"cell_size must be positive, got {cell_size}")
    for x, y in placement.uav_positions:
        if abs(x) > extent or abs(y) > extent:
            raise ValueError(
                f"UAV at ({x}, {y}) lies outside the analysis window"
            )
    centers = _cell_centers(extent, cell_size)
    xs, ys = np.meshgrid(centers, centers, indexing="ij")

    mx, my = placement.mbs_position
    r_mbs = np.hypot(xs - mx, ys - my)
    with np.errstate(divide="ignore"):
        best = snr(radio.p_mbs, _free_space(r_mbs, radio.frequency) + terrain.eta_nlos, radio.noise)
    owner = np.full(xs.shape, MBS_OWNER, dtype=np.int64)

    height = placement.height
    for n, (ux, uy) in enumerate(placement.uav_positions):
        r = np.hypot(xs - ux, ys - uy)
        d = np.hypot(r, height)
        theta = np.degrees(np.arctan2(height, r))
        loss = pathloss_uav(theta, d, terrain, radio)
        candidate = snr(radio.p_uav, loss, radio.noise)
        take = candidate > best
        owner[take] = n
        best = np.where(take, candidate, best)

    cell_area = cell_size * cell_size
    areas = tuple(
        float(np.count_nonzero(owner == n)) * cell_area
        for n in range(len(placement.uav_positions))
    )
    return RegionGrid(extent=extent, cell_size=cell_size, owner=owner, areas=areas)


def derive_types(grid: RegionGrid, density: DensityMap) -> DerivedTypes:
    """Mean demand per UAV: region area times local user density.

    UAVs that own no cells generate no demand and are excluded, with a
    warning recorded in the result (and emitted through ``warnings``).
    """
    if len(density.rho) != len(grid.areas):
        raise ValueError(
            f"{len(density.rho)} densities for {len(grid.areas)} UAV regions"
        )
    lambdas: list[float] = []
    kept: list[int] = []
    excluded: list[int] = []
    notes: list[str] = []
    for n, (area, rho) in enumerate(zip(grid.areas, density.rho)):
        lam = area * rho
        if lam > 0.0:
            lambdas.append(lam)
            kept.append(n)
        else:
            excluded.append(n)
            notes.append(
                f"UAV {n} owns no cells at this geometry and is excluded"
            )
    for note in notes:
        warnings.warn(note, stacklevel=2)
    return DerivedTypes(
        lambdas=tuple(lambdas),
        kept_uavs=tuple(kept),
        excluded_uavs=tuple(excluded),
        warnings=tuple(notes),
    )


def height_sweep(
    heights,
    *,
    uav_positions,
    terrain: TerrainParams,
    radio: RadioParams,
    density: DensityMap,
    total_channels: int,
    load: float,
    extent: float = 3000.0,
    cell_size: float = 5.0,
    mbs_position: tuple[float, float] = (0.0, 0.0),
    use_k_cap: bool = True,
    tie: TieBreak | None = None,
) -> list[HeightRecord]:
    """Partition, derive demand, and solve both objectives per height.

    Heights must be strictly ascending.  A height where every UAV loses
    its region still yields a record, with zero revenue and welfare.
    """
    from .contract import MbsLoad

    heights = [float(h) for h in heights]
    if not heights:
        raise ValueError("height sweep needs at least one height")
    if any(b <= a for a, b in zip(heights, heights[1:])):
        raise ValueError("heights must be strictly ascending")
    mbs = MbsLoad(total_channels, load)
    records = []
    for height in heights:
        placement = Placement(
            uav_positions=tuple(uav_positions),
            height=height,
            mbs_position=mbs_position,
        )
        grid = partition_regions(placement, terrain, radio, extent, cell_size)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            derived = derive_types(grid, density)
        if derived.lambdas:
            ladder = derived.ladder()
            rev = solve(
                ladder, mbs, Objective.MBS_REVENUE, use_k_cap=use_k_cap, tie=tie
            )
            soc = solve(
                ladder, mbs, Objective.SOCIAL_WELFARE, use_k_cap=use_k_cap, tie=tie
            )
            record = HeightRecord(
                height=height,
                areas=grid.areas,
                lambdas=derived.lambdas,
                excluded_uavs=derived.excluded_uavs,
                revenue=rev.revenue,
                welfare=soc.welfare,
                sold_revenue=rev.sold,
                sold_welfare=soc.sold,
            )
        else:
            record = HeightRecord(
                height=height,
                areas=grid.areas,
                lambdas=(),
                excluded_uavs=derived.excluded_uavs,
                revenue=0.0,
                welfare=0.0,
                sold_revenue=0,
                sold_welfare=0,
            )
        records.append(record)
    return records
