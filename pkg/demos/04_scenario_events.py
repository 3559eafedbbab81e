#!/usr/bin/env python3
"""Scenario event engine on its own: grasp a ring, detach the tower, fail.

Run:  python3 demos/04_scenario_events.py
"""
import numpy as np

from teletwin.kinematics import Pose
from teletwin.scenario import ArmObservation, ScenarioSession, load_bundled

defn = load_bundled("ring_tower_transfer_1")
print(f"scenario: {defn.title}")
for line in defn.instructions:
    print(f"  - {line}")

def obs(pos, grip=0.0, error=0.0):
    residual = np.zeros(6)
    residual[0] = error
    return {"right": ArmObservation(Pose.from_translation(pos), grip, residual)}

session = ScenarioSession(defn)
ring = np.array([0.44, -0.05, 0.28])

script = [
    ("approach the ring", obs(ring)),
    ("close the jaws", obs(ring, grip=1.0)),
    ("pull gently (2 mm tracking error -> 1 unit)", obs(ring, grip=1.0, error=0.002)),
    ("yank hard (12 mm error -> 6 units > detach 5)", obs(ring, grip=1.0, error=0.012)),
    ("after failure every step is a no-op", obs(ring, grip=1.0)),
]
for tick, (label, arms) in enumerate(script):
    events = session.step(arms, None, 0.01, tick)
    names = ", ".join(e.kind.value for e in events) or "-"
    print(f"tick {tick}: {label:46s} events: {names}")
print(f"\nhalted={session.halted} failed={session.failed} "
      "(the tower detach ends the exercise immediately)")
