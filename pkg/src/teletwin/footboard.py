"""Pedal board model: foot samples -> pedal press states -> minimap feedback.

The board lives in its own 2-D plane (meters); foot height is measured
above the board. Press detection is level-triggered: a valid foot inside a
pedal's rectangle below that pedal's press height presses it.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class PedalId(str, Enum):
    CLUTCH = "clutch"
    CAMERA = "camera"
    SWITCH = "switch"
    ENERGY1 = "energy1"
    ENERGY2 = "energy2"
    ENERGY3 = "energy3"
    ENERGY4 = "energy4"
    THIRTY_DEGREE = "thirty_degree"


@dataclass(frozen=True)
class FootSample:
    side: Side
    planar_position: np.ndarray  # (2,) board-plane meters
    height: float                # meters above board
    tracking_valid: bool = True

    def __post_init__(self):
        if self.tracking_valid and self.height < 0.0:
            raise ValueError("foot height must be >= 0 while tracking is valid")


@dataclass(frozen=True)
class PedalRegion:
    pedal: PedalId
    min_corner: np.ndarray  # (2,)
    max_corner: np.ndarray  # (2,)
    press_height: float = 0.02

    def __post_init__(self):
        if self.press_height <= 0.0:
            raise ValueError("press_height must be positive")
        if not np.all(np.asarray(self.min_corner) < np.asarray(self.max_corner)):
            raise ValueError(f"degenerate rectangle for pedal {self.pedal.value}")

    def contains(self, point: np.ndarray) -> bool:
        x, y = float(point[0]), float(point[1])
        return (self.min_corner[0] <= x <= self.max_corner[0]
                and self.min_corner[1] <= y <= self.max_corner[1])


@dataclass(frozen=True)
class PedalLayout:
    regions: tuple[PedalRegion, ...]

    def __post_init__(self):
        for i, a in enumerate(self.regions):
            for b in self.regions[i + 1:]:
                overlap = (np.all(a.min_corner < b.max_corner)
                           and np.all(b.min_corner < a.max_corner))
                if overlap:
                    raise ValueError(
                        f"pedal regions {a.pedal.value} and {b.pedal.value} overlap")

    def pedals(self) -> tuple[PedalId, ...]:
        return tuple(r.pedal for r in self.regions)


def default_layout(press_height: float = 0.02) -> PedalLayout:
    """8 pedals in two rows of four on a 0.6 x 0.4 m board centered at the origin."""
    front = (PedalId.CLUTCH, PedalId.CAMERA, PedalId.THIRTY_DEGREE, PedalId.SWITCH)
    back = (PedalId.ENERGY1, PedalId.ENERGY2, PedalId.ENERGY3, PedalId.ENERGY4)
    slots = [(-0.29, -0.17), (-0.15, -0.03), (0.03, 0.15), (0.17, 0.29)]
    regions = []
    for row, (y0, y1) in ((front, (-0.18, -0.03)), (back, (0.03, 0.18))):
        for pedal, (x0, x1) in zip(row, slots):
            regions.append(PedalRegion(pedal, np.array([x0, y0]), np.array([x1, y1]),
                                       press_height))
    return PedalLayout(tuple(regions))


@dataclass(frozen=True)
class PedalState:
    pressed: dict[PedalId, bool]
    edges: tuple[tuple[Side, PedalId], ...] = ()
    tracking_warning: bool = False

    @staticmethod
    def empty() -> "PedalState":
        return PedalState({p: False for p in PedalId})

    def is_pressed(self, pedal: PedalId) -> bool:
        return self.pressed.get(pedal, False)

    def edge(self, pedal: PedalId) -> bool:
        return any(p == pedal for _, p in self.edges)


def detect_pedals(feet: list[FootSample], layout: PedalLayout,
                  previous: PedalState) -> PedalState:
    """Level-triggered press detection with edge events against the previous tick.

    Invalid-tracking feet contribute nothing and raise the tracking warning.
    A foot presses at most one pedal; a point on a shared boundary resolves
    to the lexicographically smallest pedal id.
    """
    pressed = {r.pedal: False for r in layout.regions}
    hits: list[tuple[Side, PedalId]] = []
    warning = False
    for foot in feet:
        if not foot.tracking_valid:
            warning = True
            continue
        containing = [r for r in layout.regions
                      if r.contains(foot.planar_position) and foot.height < r.press_height]
        if not containing:
            continue
        region = min(containing, key=lambda r: r.pedal.value)
        pressed[region.pedal] = True
        hits.append((foot.side, region.pedal))
    edges = tuple((side, pedal) for side, pedal in hits
                  if not previous.is_pressed(pedal))
    return PedalState(pressed, edges, warning)


@dataclass(frozen=True)
class PedalIcon:
    pedal: PedalId
    min_corner: np.ndarray
    max_corner: np.ndarray
    black: bool


@dataclass(frozen=True)
class FootIcon:
    side: Side
    position: np.ndarray  # (2,) map coordinates == board coordinates
    scale: float          # >= 1, grows with foot height
    visible: bool


@dataclass(frozen=True)
class MinimapModel:
    pedal_icons: tuple[PedalIcon, ...]
    foot_icons: tuple[FootIcon, ...]
    click_event: bool


def minimap(feet: list[FootSample], layout: PedalLayout, pedals: PedalState,
            k: float = 2.0) -> MinimapModel:
    """Minimap view model: black pressed pedals, feet scaled 1 + k*height.

    click_event is true exactly on ticks carrying a press edge, so a held
    pedal clicks once per press.
    """
    if k <= 0.0:
        raise ValueError("scale gain k must be positive")
    icons = tuple(PedalIcon(r.pedal, r.min_corner, r.max_corner,
                            pedals.is_pressed(r.pedal))
                  for r in layout.regions)
    foot_icons = tuple(
        FootIcon(f.side, np.asarray(f.planar_position, dtype=float),
                 1.0 + k * f.height if f.tracking_valid else 1.0,
                 f.tracking_valid)
        for f in feet)
    return MinimapModel(icons, foot_icons, bool(pedals.edges))
