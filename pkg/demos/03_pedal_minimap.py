#!/usr/bin/env python3
"""Foot tracking to pedal presses to the minimap view model.

Run:  python3 demos/03_pedal_minimap.py
"""
import numpy as np

from teletwin.footboard import (
    FootSample,
    PedalId,
    PedalState,
    Side,
    default_layout,
    detect_pedals,
    minimap,
)

layout = default_layout()
print("pedal board (0.6 x 0.4 m, two rows):")
for region in layout.regions:
    print(f"  {region.pedal.value:14s} x [{region.min_corner[0]:+.2f}, "
          f"{region.max_corner[0]:+.2f}]  y [{region.min_corner[1]:+.2f}, "
          f"{region.max_corner[1]:+.2f}]")

clutch_center = np.array([-0.23, -0.105])
story = [
    ("hovering above the clutch", clutch_center, 0.08),
    ("descending", clutch_center, 0.03),
    ("pressed", clutch_center, 0.0),
    ("holding", clutch_center, 0.0),
    ("lifted off", clutch_center, 0.05),
]
state = PedalState.empty()
print("\nleft foot over the clutch pedal:")
for label, pos, height in story:
    feet = [FootSample(Side.LEFT, pos, height),
            FootSample(Side.RIGHT, np.array([0.2, -0.35]), 0.0)]
    state = detect_pedals(feet, layout, state)
    model = minimap(feet, layout, state, k=2.0)
    icon = next(i for i in model.pedal_icons if i.pedal is PedalId.CLUTCH)
    foot_icon = model.foot_icons[0]
    print(f"  {label:26s} height {height:.2f} -> pressed={state.is_pressed(PedalId.CLUTCH)!s:5s} "
          f"icon={'black' if icon.black else 'grey '} "
          f"scale={foot_icon.scale:.2f} click={model.click_event}")
print("one click on the press transition, none while holding")
