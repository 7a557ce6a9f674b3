"""What one classical bit passed down a chain can achieve.

Every party sees the incoming bit plus its own input and forwards one bit.
Exhaustive search finds the best deterministic strategy; alternating AND and
OR relays turn out to reach the optimum for the usual task.
"""

from mqrac.classical import (
    appendix_tasks,
    enumerate_optimal,
    evaluate_strategy,
    search_budget,
    zigzag_formula,
    zigzag_strategy,
)
from mqrac.core import RacTask

# %% Three inputs, two of them with the first party.
best = enumerate_optimal(RacTask.standard(3, 2))
print("optimum", best.score, "via", best.route, "search over", best.budget, "candidates")
print("winning tables", best.strategy.to_json())

# %% The alternating strategy matches the search and a closed formula.
for n in range(3, 7):
    task = RacTask.standard(n, 2)
    print(n, enumerate_optimal(task).score, evaluate_strategy(zigzag_strategy(n), task), zigzag_formula(n))

# Beyond n = 6 only the strategy and formula are compared.
for n in (7, 8, 12):
    print(n, evaluate_strategy(zigzag_strategy(n), RacTask.standard(n, 2)), zigzag_formula(n))

# %% Search cost grows quickly, so enumeration has an explicit cap.
for n in range(3, 9):
    print(n, search_budget(n, 2))

# %% Relabelled tasks can be easier or harder than the plain one.
for row in appendix_tasks():
    print(f"{row.label:40s} {enumerate_optimal(row.task).score}")
