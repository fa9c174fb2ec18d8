"""Train the caching surface against its two baselines and compare power.

A short budget keeps this to a few minutes on one core; the ordering is
noisy at this length. Pass a larger episode count as the first argument
(the acceptance suite uses 200 episodes over five seeds).

    python3 demos/train_and_compare.py 60
"""

import sys

import numpy as np

from starcache import ScenarioConfig
from starcache.harness import train_run

episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 30
base = ScenarioConfig(episodes=episodes, seed=0)

print(f"{'variant':18s} {'P_s (W)':>8s} {'P_w (W)':>8s} {'hit rate':>9s} {'reward':>8s}")
for variant in ("Caching-at-STARS", "STARS-Aided", "STARS-NoCache"):
    res = train_run(base.replace(variant=variant))
    s = res.summary
    print(f"{variant:18s} {s['P_s']:8.3f} {s['P_w']:8.3f} {s['hit_rate']:9.3f} {s['reward']:8.3f}")

# %% Where the power goes in the final window of the caching run.
rows = [r for r in res.rows if r.episode >= episodes - max(1, episodes // 10)]
print("\nNoCache final window: mean backhaul fetches per slot",
      np.mean([r.lambda_r for r in rows]), "(every request goes to the remote server)")
