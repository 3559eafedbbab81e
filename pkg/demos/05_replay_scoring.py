#!/usr/bin/env python3
"""Replay frozen sessions and read the score breakdown.

Run:  python3 demos/05_replay_scoring.py
"""
import json
from pathlib import Path

from teletwin.config import EngineConfig
from teletwin.scenario import load_bundled
from teletwin.session import read_log, run_replay

fixtures = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
cfg = EngineConfig()

print("three operators, same exercise, increasing skill:\n")
for name in ("wrist_articulation_1_novice", "wrist_articulation_1_intermediate",
             "wrist_articulation_1_perfect"):
    frames = read_log((fixtures / f"{name}.jsonl").read_text())
    report, state = run_replay(load_bundled("wrist_articulation_1"), frames, cfg)
    doc = json.loads(report)
    eff = doc["efficiency"]
    penalties = ", ".join(f"{p['kind']} x{p['count']}" for p in doc["penalties"]) or "none"
    print(f"{name.split('_')[-1]:13s} total {doc['total']:6.1f}  "
          f"time {eff['total_time']['value_s']:6.1f}s "
          f"path {eff['economy_of_motion']['value_m']:6.2f}m  penalties: {penalties}")

print("\nreplaying the same log twice is byte-identical:")
frames = read_log((fixtures / "ring_tower_transfer_1_perfect.jsonl").read_text())
a, _ = run_replay(load_bundled("ring_tower_transfer_1"), frames, cfg)
b, _ = run_replay(load_bundled("ring_tower_transfer_1"), frames, cfg)
print(f"  identical: {a == b}")
