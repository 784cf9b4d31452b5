"""Survey the ellipticity constants of the built-in systems.

Each first-order tensor A gets its constant nu(A) = min over unit
directions a of the smallest singular value of the direction matrix
(Aa), refined on the sphere, plus a brute-force cross-check.
"""

import numpy as np

from efos import (
    brute_nu,
    cauchy_riemann,
    dirac,
    ellipticity_constant,
    generalized_cauchy_riemann,
    operator_norm,
)
from efos.tensor import ConstantTensor

systems = [
    ("cauchy_riemann", cauchy_riemann()),
    ("dirac", dirac()),
    ("generalized_cr(2,1,1,1)", generalized_cauchy_riemann(2, 1, 1, 1)),
    ("generalized_cr(3,2,1,4)", generalized_cauchy_riemann(3, 2, 1, 4)),
]

print(f"{'system':28s} {'nu':>12s} {'brute':>12s} {'min|det|':>10s} {'|A|':>8s}")
for name, A in systems:
    rep = ellipticity_constant(A, 2048)
    coarse = brute_nu(A, 50_000)
    print(
        f"{name:28s} {rep.nu:12.8f} {coarse:12.8f} {rep.min_abs_det:10.6f} "
        f"{operator_norm(A):8.4f}"
    )

print()
print("A tensor that annihilates a rank-one direction is not elliptic:")
entries = np.zeros((2, 2, 2))
entries[0, 0, 0] = 1.0
entries[1, 1, 0] = 1.0
rep = ellipticity_constant(ConstantTensor(entries), 512)
print(f"  (Aa) = a1*I  ->  nu = {rep.nu:.2e}, elliptic = {rep.elliptic}")
print(f"  degenerate direction found by refinement: a = {np.round(rep.argmin_direction, 6)}")
