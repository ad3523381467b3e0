"""Partial products over leaves spiralling onto a closed geodesic.

Leaves accumulate on the closed leaf with gaps halving at each step.  With
masses that alternate in sign the partial products converge geometrically.
With masses of one sign the cumulative mass grows linearly and outruns the
gap decay.

Run: python demos/spiral_convergence.py
"""

import math

from shearlab import kernel as K
from shearlab import oracles as O
from shearlab import shear as S
from shearlab.verify import spiral_instance

trace = O.spiral_convergence(spiral_instance(24))
print(" n   change of partial product")
for row in trace[::3]:
    print(f"{row.n:3d}   {row.matrix_delta:.3e}")
print(f"fitted log-decay per step {trace[-1].rate:+.4f} (ln 2 / 2 = {math.log(2) / 2:.4f})")

growing = S.spiral_config(
    2 * math.log(2), K.Geodesic.of(-1, "inf"), K.Geodesic.of(-0.7, "inf"), [1.0], 20, h_weights=[1.0]
)
print(f"same-sign masses: fitted rate {O.spiral_convergence(growing)[-1].rate:+.4f} (diverges)")

fam = S.spiral_config(1.3, K.Geodesic.of(-1, "inf"), K.Geodesic.of(-0.6, "inf"), [0.4, -0.25], 2)
print(f"closed leaf after shearing: {K.translation_length(fam.closed_leaf_image()):.12f} = 1.3 + 0.4 - 0.25")
