"""Scene grids, antenna layouts and propagation delays.

The scene lies in the plane z = 0 and the antennas in the plane z = standoff.
Pixel (p, q) spans ``origin + [p, p+1) * pixel_size`` along x and
``origin + [q, q+1) * pixel_size`` along y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError

__all__ = [
    "SPEED_OF_LIGHT",
    "ArrayGeometry",
    "Scene",
    "TargetSpec",
    "build_square_array",
    "default_targets",
    "delay_table",
    "paint_targets",
    "pixel_center",
    "pixel_centers",
    "two_way_delay",
]

SPEED_OF_LIGHT = 299_792_458.0


def _centered_origin(rows, cols, pixel_size):
    return (-rows * pixel_size / 2.0, -cols * pixel_size / 2.0, 0.0)


@dataclass(frozen=True)
class Scene:
    """P x Q grid of nonnegative scattering coefficients.

    When ``origin`` is omitted the grid is centered on the array boresight.
    """

    coefficients: np.ndarray = field(repr=False)
    pixel_size: float
    origin: tuple | None = None

    def __post_init__(self):
        coef = np.array(self.coefficients, dtype=float)
        if coef.ndim != 2 or coef.size == 0:
            raise DomainError("scene coefficients must be a nonempty 2-D array")
        if not np.all(np.isfinite(coef)) or np.any(coef < 0):
            raise DomainError("scene coefficients must be finite and >= 0")
        if not (self.pixel_size > 0):
            raise DomainError(f"pixel_size must be > 0, got {self.pixel_size!r}")
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        origin = self.origin
        if origin is None:
            origin = _centered_origin(*coef.shape, self.pixel_size)
        object.__setattr__(self, "origin", tuple(float(v) for v in origin))

    @classmethod
    def empty(cls, rows: int, cols: int, pixel_size: float, origin=None) -> "Scene":
        if rows < 1 or cols < 1:
            raise DomainError("scene needs at least one row and one column")
        return cls(np.zeros((rows, cols)), pixel_size, origin)

    @property
    def rows(self) -> int:
        return self.coefficients.shape[0]

    @property
    def cols(self) -> int:
        return self.coefficients.shape[1]

    @property
    def shape(self):
        return self.coefficients.shape

    def with_coefficients(self, coefficients) -> "Scene":
        return replace(self, coefficients=coefficients)

    def __eq__(self, other):
        if not isinstance(other, Scene):
            return NotImplemented
        return (
            self.pixel_size == other.pixel_size
            and self.origin == other.origin
            and np.array_equal(self.coefficients, other.coefficients)
        )

    __hash__ = None


@dataclass(frozen=True)
class TargetSpec:
    """Axis-aligned rectangle of constant reflectivity, half-open index ranges."""

    row_start: int
    row_stop: int
    col_start: int
    col_stop: int
    coefficient: float = 1.0
    shape: str = "rectangle"

    def __post_init__(self):
        if self.shape != "rectangle":
            raise DomainError(f"unsupported target shape {self.shape!r}")
        if self.coefficient < 0:
            raise DomainError("target coefficient must be >= 0")
        if self.row_stop <= self.row_start or self.col_stop <= self.col_start:
            raise DomainError("target extents must be nonempty")


def default_targets(rows: int = 32, cols: int = 32) -> list[TargetSpec]:
    """Two identical unit rectangles, mirror-symmetric about the vertical center line.

    On the 32 x 32 reference grid these are the 6 x 6 blocks at rows 13-18,
    columns 7-12 and 19-24; other grid sizes scale the layout proportionally.
    """
    h = max(1, round(6 * rows / 32))
    w = max(1, round(6 * cols / 32))
    r0 = min(round(13 * rows / 32), rows - h)
    c0 = min(round(7 * cols / 32), max(0, cols // 2 - w))
    return [TargetSpec(r0, r0 + h, c0, c0 + w, 1.0), TargetSpec(r0, r0 + h, cols - c0 - w, cols - c0, 1.0)]


def paint_targets(scene: Scene, targets) -> Scene:
    """Write targets over a zero background; later targets win on overlap."""
    coef = np.zeros(scene.shape)
    for t in targets:
        if t.row_start < 0 or t.col_start < 0 or t.row_stop > scene.rows or t.col_stop > scene.cols:
            raise DomainError(f"target {t} exceeds the {scene.rows}x{scene.cols} grid")
        coef[t.row_start:t.row_stop, t.col_start:t.col_stop] = t.coefficient
    return scene.with_coefficients(coef)


def pixel_center(scene: Scene, p: int, q: int) -> np.ndarray:
    if not (0 <= p < scene.rows and 0 <= q < scene.cols):
        raise IndexError(f"pixel ({p}, {q}) outside {scene.rows}x{scene.cols} grid")
    ox, oy, oz = scene.origin
    return np.array([ox + (p + 0.5) * scene.pixel_size, oy + (q + 0.5) * scene.pixel_size, oz])


def pixel_centers(scene: Scene) -> np.ndarray:
    """All pixel centers, shape (P*Q, 3), flattened row-major."""
    ox, oy, oz = scene.origin
    x = ox + (np.arange(scene.rows) + 0.5) * scene.pixel_size
    y = oy + (np.arange(scene.cols) + 0.5) * scene.pixel_size
    xx, yy = np.meshgrid(x, y, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel(), np.full(xx.size, oz)])


@dataclass(frozen=True)
class ArrayGeometry:
    """Transmitter and receiver positions, all in the plane z = standoff."""

    tx_positions: np.ndarray = field(repr=False)
    rx_position: np.ndarray
    standoff: float
    array_side: float

    def __post_init__(self):
        tx = np.atleast_2d(np.asarray(self.tx_positions, dtype=float))
        rx = np.asarray(self.rx_position, dtype=float)
        if tx.shape[0] < 1 or tx.shape[1] != 3 or rx.shape != (3,):
            raise DomainError("need at least one 3-D transmitter and one 3-D receiver")
        if not np.allclose(tx[:, 2], self.standoff) or not math.isclose(rx[2], self.standoff):
            raise DomainError("all antennas must lie in the plane z = standoff")
        tx.setflags(write=False)
        rx.setflags(write=False)
        object.__setattr__(self, "tx_positions", tx)
        object.__setattr__(self, "rx_position", rx)

    @property
    def n_tx(self) -> int:
        return self.tx_positions.shape[0]


def build_square_array(n_tx: int, side: float, standoff: float) -> ArrayGeometry:
    """Transmitters evenly spaced around a square perimeter, receiver at its center.

    Spacing starts at the (+, +) corner and runs counter-clockwise, so four
    transmitters land on the corners.  A single transmitter sits at the center.
    """
    if n_tx < 1:
        raise DomainError("need at least one transmitter")
    if not (side > 0 and standoff > 0):
        raise DomainError("side and standoff must be positive")
    h = side / 2.0
    if n_tx == 1:
        tx = [[0.0, 0.0, standoff]]
    else:
        corners = np.array([[h, h], [-h, h], [-h, -h], [h, -h], [h, h]])
        tx = []
        for s in np.arange(n_tx) * 4.0 / n_tx:
            k = int(s)
            frac = s - k
            xy = corners[k] + frac * (corners[k + 1] - corners[k])
            tx.append([xy[0], xy[1], standoff])
    return ArrayGeometry(np.array(tx), np.array([0.0, 0.0, standoff]), standoff, side)


def two_way_delay(tx, pixel, rx) -> float:
    """Propagation time transmitter -> pixel -> receiver, in seconds."""
    tx, pixel, rx = (np.asarray(v, dtype=float) for v in (tx, pixel, rx))
    return float((np.linalg.norm(tx - pixel) + np.linalg.norm(pixel - rx)) / SPEED_OF_LIGHT)


def delay_table(geometry: ArrayGeometry, points) -> np.ndarray:
    """Two-way delays for every transmitter and point, shape (I, len(points))."""
    points = np.atleast_2d(points)
    out_leg = np.linalg.norm(geometry.tx_positions[:, None, :] - points[None], axis=2)
    back_leg = np.linalg.norm(points - geometry.rx_position, axis=1)
    return (out_leg + back_leg[None]) / SPEED_OF_LIGHT


def spreading_table(geometry: ArrayGeometry, points) -> np.ndarray:
    """Spherical-spreading amplitude 1/(|tx - p| |p - rx|), shape (I, len(points))."""
    points = np.atleast_2d(points)
    out_leg = np.linalg.norm(geometry.tx_positions[:, None, :] - points[None], axis=2)
    back_leg = np.linalg.norm(points - geometry.rx_position, axis=1)
    return 1.0 / (out_leg * back_leg[None])
