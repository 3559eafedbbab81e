#!/usr/bin/env python3
"""Walk through the arm model: forward kinematics, Jacobians and the IK solver.

Run:  python3 demos/01_ik_playground.py
"""
import numpy as np

from teletwin.kinematics import (
    default_chain,
    forward_kinematics,
    geometric_jacobian,
    numeric_jacobian,
    solve_ik,
)

chain = default_chain()
print("six revolute joints, link stack 0.30/0.25/0.05/0.05/0.04 m")
print(f"maximum reach: {chain.max_reach():.2f} m")

home = forward_kinematics(chain, chain.home)
print(f"\nhome tool pose: position {home.translation}, rotation =\n{home.rotation}")

# the geometric Jacobian agrees with central differences everywhere
rng = np.random.default_rng(1)
theta = rng.uniform(chain.lower_limits, chain.upper_limits)
gap = np.max(np.abs(geometric_jacobian(chain, theta) - numeric_jacobian(chain, theta)))
print(f"\nJacobian vs finite differences at a random pose: max gap {gap:.2e}")

# solve back to a known pose from a perturbed seed
goal = rng.uniform(chain.lower_limits, chain.upper_limits) * 0.7
target = forward_kinematics(chain, goal)
seed = goal + rng.uniform(-0.05, 0.05, size=6)
result = solve_ik(chain, target, seed)
reached = forward_kinematics(chain, result.theta)
print(f"\nIK from a perturbed seed: {result.status.value} "
      f"in {result.iterations} iterations")
print(f"position error {np.linalg.norm(reached.translation - target.translation):.2e} m")

# an unreachable target runs out of iterations instead of diverging wildly
far = target.__class__.from_translation((1.0, 0.0, 0.0))
result = solve_ik(chain, far, chain.home.copy())
print(f"\nunreachable target: {result.status.value}, "
      f"residual {np.linalg.norm(result.residual[:3]):.3f} m")
