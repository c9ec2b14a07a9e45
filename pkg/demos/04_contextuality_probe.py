"""
Block measures under two completions of Alice's basis
=====================================================

The measure of a block of Bob's outcomes is context-free under the Born
rule, whatever basis Alice uses. The deformed recipe can make it depend on
Alice's choice.
"""

import numpy as np

from sorkinsim import Born, BipartiteState, PartitionSpec, SorkinDeformed, contextuality_probe
from sorkinsim.qlinalg import random_unitary

rng = np.random.default_rng(4)
state = BipartiteState.random(2, 6, rng)
blocks = PartitionSpec.contiguous([3, 3])
u, v = random_unitary(2, rng), random_unitary(2, rng)

for recipe in (Born(), SorkinDeformed(0.05)):
    mu = contextuality_probe(state, blocks, u, v, recipe)
    print(f"{recipe!r}")
    for k, (m1, m2) in enumerate(mu):
        print(f"  block {k}: {m1:.12f} vs {m2:.12f}  (diff {m1 - m2:+.2e})")
