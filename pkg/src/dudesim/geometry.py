"""Point processes on a square window and building footprint measurements."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .blockage import BuildingStats
from .errors import InvalidParameterError


@dataclass(frozen=True)
class Window:
    """Square observation region ``[0, side) x [0, side)`` in metres."""

    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise InvalidParameterError(f"window side must be > 0, got {self.side}")

    @property
    def area(self) -> float:
        return self.side * self.side

    def contains(self, p) -> bool:
        x, y = p
        return 0 <= x < self.side and 0 <= y < self.side


def sample_ppp(intensity: float, window: Window, rng: np.random.Generator) -> np.ndarray:
    """Sample a homogeneous Poisson point process.

    Returns an ``(n, 2)`` array of coordinates; ``n`` is Poisson with mean
    ``intensity * side**2`` and points are i.i.d. uniform on the window.
    """
    if not intensity >= 0:
        raise InvalidParameterError(f"intensity must be >= 0, got {intensity}")
    n = rng.poisson(intensity * window.area)
    return rng.random((n, 2)) * window.side


def _wrap(delta, side):
    d = np.abs(delta)
    return np.minimum(d, side - d)


def toroidal_distance(p, q, window: Window) -> float:
    """Wrap-around distance between two points of the window."""
    for pt in (p, q):
        if not window.contains(pt):
            raise InvalidParameterError(f"point {tuple(pt)} lies outside the window")
    dx = _wrap(p[0] - q[0], window.side)
    dy = _wrap(p[1] - q[1], window.side)
    return float(math.hypot(dx, dy))


def pairwise_toroidal_distance(a: np.ndarray, b: np.ndarray, side: float) -> np.ndarray:
    """Distance matrix of shape ``(len(a), len(b))`` under the torus metric."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    dx = _wrap(a[:, None, 0] - b[None, :, 0], side)
    dy = _wrap(a[:, None, 1] - b[None, :, 1], side)
    return np.hypot(dx, dy)


@dataclass(frozen=True)
class Footprint:
    """A building outline; vertices are ordered and implicitly closed.

    Only consecutive duplicate vertices and zero area are rejected; general
    self-intersection is not detected.
    """

    building_id: str
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise InvalidParameterError(f"building {self.building_id}: vertices must be (n, 2)")
        if len(v) < 3:
            raise InvalidParameterError(
                f"building {self.building_id}: polygon needs >= 3 vertices, got {len(v)}"
            )
        if np.any(np.all(v == np.roll(v, -1, axis=0), axis=1)):
            raise InvalidParameterError(f"building {self.building_id}: repeated consecutive vertex")
        object.__setattr__(self, "vertices", v)
        if _shoelace(v) == 0:
            raise InvalidParameterError(f"building {self.building_id}: polygon has zero area")


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    # shift to the first vertex to limit cancellation for map coordinates
    x = x - x[0]
    y = y - y[0]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _vertices(f) -> np.ndarray:
    if isinstance(f, Footprint):
        return f.vertices
    return Footprint("<anonymous>", f).vertices


def polygon_area(f) -> float:
    """Absolute shoelace area in m^2 (accepts a Footprint or a vertex list)."""
    return _shoelace(_vertices(f))


def polygon_perimeter(f) -> float:
    v = _vertices(f)
    edges = np.roll(v, -1, axis=0) - v
    return float(np.hypot(edges[:, 0], edges[:, 1]).sum())


def footprint_stats(footprints: Iterable, region_area: float) -> BuildingStats:
    """Mean area, built-up fraction and mean perimeter of a set of footprints."""
    footprints = list(footprints)
    if not footprints:
        raise InvalidParameterError("at least one footprint is required")
    if not region_area > 0:
        raise InvalidParameterError(f"region area must be > 0, got {region_area}")
    areas = [polygon_area(f) for f in footprints]
    perims = [polygon_perimeter(f) for f in footprints]
    kappa = math.fsum(areas) / region_area
    if kappa >= 1:
        raise InvalidParameterError(
            f"buildings cover {kappa:.3f} of the region; the fraction must be < 1"
        )
    return BuildingStats(
        A=math.fsum(areas) / len(areas),
        kappa=kappa,
        rho_perim=math.fsum(perims) / len(perims),
    )


def read_footprints(path) -> list[Footprint]:
    """Load footprints from a ``building_id,x,y`` CSV file.

    Rows of one building must be contiguous and in vertex order. Blank lines
    and lines starting with ``#`` are skipped.
    """
    text = Path(path).read_text()
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(rows)
    header = [h.strip() for h in next(reader, [])]
    if header != ["building_id", "x", "y"]:
        raise InvalidParameterError(f"{path}: expected header 'building_id,x,y', got {header}")

    groups: dict[str, list[tuple[float, float]]] = {}
    last = None
    for n, row in enumerate(reader, start=2):
        if len(row) != 3:
            raise InvalidParameterError(f"{path}: data row {n} has {len(row)} fields, expected 3")
        bid = row[0].strip()
        try:
            xy = (float(row[1]), float(row[2]))
        except ValueError:
            raise InvalidParameterError(f"{path}: data row {n} has non-numeric coordinates") from None
        if bid != last and bid in groups:
            raise InvalidParameterError(f"{path}: rows of building '{bid}' are not contiguous")
        groups.setdefault(bid, []).append(xy)
        last = bid
    return [Footprint(bid, np.array(v)) for bid, v in groups.items()]
