"""Walk through the reward arithmetic, from a single pose error to the
weighted leaderboard totals.

Run with: python3 demos/reward_walkthrough.py
"""

import math

import numpy as np

from robobench import evaluation, rotation
from robobench.core import Goal, Pose

# A cube resting at the arena centre, with a goal 10 cm away on the table.
goal = Goal(level=1, pose=Pose.identity((0.10, 0.0, 0.0325)))
pose = Pose.identity((0.0, 0.0, 0.0325))

e_xy = evaluation.position_error(goal.pose.position, pose.position)
print(f"position error (xy term only, both resting):  {e_xy:.6f}")
print(f"  = 0.5 * 0.10 / 0.39 = {0.5 * 0.10 / 0.39:.6f}")

# Lifting the object adds a height term normalised by the 10 cm ceiling.
lifted = Pose.identity((0.10, 0.0, 0.0825))
e_lift = evaluation.position_error(goal.pose.position, lifted.position)
print(f"position error after a 5 cm lift (xy matched): {e_lift:.6f}")

# Orientation error is the rotation angle over pi, so a half turn is 1.
quarter = rotation.from_axis_angle([0.0, 0.0, 1.0], math.pi / 2)
print(f"rotation error of a quarter turn:              "
      f"{evaluation.rotation_error(quarter, rotation.IDENTITY):.6f}")

# Step rewards are the negated errors; level 4 averages both components.
spec1 = evaluation.RewardSpec(phase=2, level=1)
spec4 = evaluation.RewardSpec(phase=2, level=4)
goal4 = Goal(level=4, pose=Pose(np.array([0.0, 0.0, 0.08]), quarter))
print(f"level 1 step reward:                           "
      f"{evaluation.step_reward(spec1, goal, pose):.6f}")
print(f"level 4 step reward (pos matched, 90 deg off): "
      f"{evaluation.step_reward(spec4, goal4, Pose.identity((0.0, 0.0, 0.08))):.6f}")

# Goals are sampled per level; level 1 stays on the table.
rng = np.random.default_rng(0)
for level in (1, 2, 3, 4):
    g = evaluation.sample_goal(level, 2, rng)
    x, y, z = g.pose.position
    print(f"level {level} goal sample: ({x:+.3f}, {y:+.3f}, {z:.3f})")

# Totals weight the four per-level averages by difficulty (1, 2, 3, 4).
# One row of the published phase 2 results, reproduced from its averages:
r = (-5472, -2898, -9080, -21428)
total = evaluation.aggregate_score(*r)
print(f"ardentstork total: {total:.0f} (published -124221)")
