"""A tour of the two-qubit canonical (KAK) decomposition.

Any two-qubit unitary factors as U = (K1 x K2) A (K3 x K4) with a canonical
core A = expm(-i/2 (c1 XX + c2 YY + c3 ZZ)) and pi/2 >= c1 >= c2 >= |c3|.
The triple (c1, c2, c3) labels the local-equivalence class: it tells you,
before any compilation, how much entangling power a gate carries.
"""

import numpy as np
from scipy.stats import unitary_group

from ccrkit.kak import cartan_coefficients, kak_decompose, local_equivalent

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
ISWAP = np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

print("canonical coefficients (units of pi):")
for name, gate in (("CNOT", CNOT), ("iSWAP", ISWAP), ("SWAP", SWAP)):
    c = cartan_coefficients(gate).as_array() / np.pi
    print(f"  {name:6s} ({c[0]:.3f}, {c[1]:.3f}, {c[2]:.3f})")

rng = np.random.default_rng(1)
u = unitary_group.rvs(4, random_state=rng)
dec = kak_decompose(u)
print(f"\nrandom SU(4) round-trip error: {np.abs(dec.reconstruct() - u).max():.2e}")

# two iSWAP-class gates differing only by local rotations are equivalent
k = np.kron(unitary_group.rvs(2, random_state=rng), unitary_group.rvs(2, random_state=rng))
print(f"iSWAP ~ locals . iSWAP: {local_equivalent(ISWAP, k @ ISWAP)}")
print(f"iSWAP ~ CNOT:           {local_equivalent(ISWAP, CNOT)}")
