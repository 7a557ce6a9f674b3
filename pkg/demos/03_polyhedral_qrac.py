"""Turning a two-party polyhedral QRAC into a relay protocol.

The first party prepares one of a few vertices, each relay optionally rotates
the qubit, and the rotations are picked so that the orbit covers every
encoding vertex.  The receiver then keeps the two-party measurements; the
price is that the task becomes a relabelled one.
"""

from collections import Counter

import numpy as np

from mqrac.core import RacTask
from mqrac.qrac import (
    PENTAKIS_UNITARIES,
    TETRAKIS_UNITARIES,
    classical_value,
    distinct_rotations,
    generated_group_order,
    match_vertex,
    pentakis_construction,
    tetrakis_construction,
)

# %% (4,2): tetrakis hexahedron, 90 degree turns about y and z.
tet = tetrakis_construction()
print("measurement axes:\n", np.round(tet.encoding.directions, 3))
print("initial vertices:", tet.assignment.initial)
print("free inputs:", [format(x, "04b") for x in tet.assignment.free_inputs])
for x, xp in tet.remap.as_strings().items():
    print(x, "->", xp)

# %% Quantum value against the classical optimum of the same task.
q = tet.quantum_value()
print(f"quantum {q:.4f}  classical {classical_value(tet.task())}  two-party classical {classical_value(RacTask.standard(4, 4))}")
print(f"with measurements re-fitted to the relabelled task: {tet.reoptimized_value():.4f}")

# %% (6,3): pentakis dodecahedron, half turns about x, y and z.
pent = pentakis_construction()
hits = Counter(match_vertex(v, pent.encoding.vertices) for v in pent.final_states())
print("vertex hit counts:", sorted(set(hits.values())), "over", len(hits), "vertices")
print(f"quantum {pent.quantum_value():.4f}  classical {classical_value(pent.task())}  "
      f"two-party classical {classical_value(RacTask.standard(6, 6))}")

# %% Half turns commute on the Bloch sphere but not as qubit unitaries.
mats = [m for _, m in PENTAKIS_UNITARIES.composites()]
print("distinct Bloch rotations:", distinct_rotations(mats))
gens = [PENTAKIS_UNITARIES.su2(b) for b in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
print("order of the generated qubit group:", generated_group_order(gens))
print("(4,2) composite rotations:", distinct_rotations([m for _, m in TETRAKIS_UNITARIES.composites()]))
