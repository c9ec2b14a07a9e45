"""
Alice signals to Bob through a triple slit
==========================================

Alice measures in the computational or the Hadamard basis. Bob's screen
sees two-path sectors in the first case and three-path sectors in the
second. With the Born rule both patterns coincide; with a deformation of
strength epsilon they separate linearly in epsilon.
"""

import numpy as np

from sorkinsim import Born, SorkinDeformed, a2b_signaling
from sorkinsim.scenarios import CANONICAL_A2B

a, b, g = CANONICAL_A2B
rep = a2b_signaling(a, b, g, Born())
print("Born, computational:", np.round(rep.bob_distributions[0], 12))
print("Born, Hadamard     :", np.round(rep.bob_distributions[1], 12))

# %%
print(f"{'eps':>6} {'TV':>12} {'TV/eps':>12}")
for eps in np.linspace(0, 0.1, 11):
    tv = a2b_signaling(a, b, g, SorkinDeformed(eps)).total_variation_B
    print(f"{eps:6.2f} {tv:12.4e} {tv / eps if eps else float('nan'):12.6e}")

# %%
# Without a third path there is nothing to deform.
print("gamma = 0:", a2b_signaling(0.6, 0.8j, 0, SorkinDeformed(0.1)).total_variation_B)
