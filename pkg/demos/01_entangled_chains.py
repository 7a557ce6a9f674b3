"""Chaining entangled primitives so that many parties share one classical bit.

Each singlet (or GHZ state) lets its holders forward a single bit while the
receiver can still recover any one input with some bias.  Chaining them
multiplies the biases, so inputs deeper in the chain are guessed worse.
"""

import numpy as np

from mqrac.earac import (
    bell_chain,
    closed_form_bell,
    closed_form_ghz,
    enumerate_branches,
    ghz_chain,
    grid9,
    per_pair_success,
)

# %% A three-input Bell chain: x0 and x1 share the first singlet, x2 the second.
layout = bell_chain(3)
print(layout.describe())

# Every measurement branch for one (x, y) pair; probabilities add up to one.
traces = list(enumerate_branches(layout, 0b101, 0))
print(len(traces), "branches, total probability", sum(t.probability for t in traces))

# %% Per-pair success depends only on how deep the input sits.
table = per_pair_success(layout)
print("per-question success:", table[0])
print("levels:", [layout.level_of(y) for y in range(3)])

# %% Averages against the closed forms.
for n in range(2, 8):
    sim = per_pair_success(bell_chain(n)).mean()
    print(f"bell n={n}: simulated {sim:.9f}  closed form {closed_form_bell(n):.9f}")

for n in (3, 5, 7):
    sim = per_pair_success(ghz_chain(n)).mean()
    print(f"ghz  n={n}: simulated {sim:.9f}  closed form {closed_form_ghz(n):.9f}")

# %% Nine inputs in a two-level GHZ tree: every input sits at depth two.
grid = per_pair_success(grid9())
print("grid9 success range:", grid.min(), grid.max(), "mean", grid.mean())
print("two-level prediction:", (1 + 1 / 3) / 2)
print("all equal:", np.ptp(grid) < 1e-12)
