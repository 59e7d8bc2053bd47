#!/usr/bin/env python3
"""State-context-property view of a stock.

Before a trade the stock is in a state that generally actualizes no price
interval at all; the trade context collapses it onto an eigenstate, and
only then is "having a price between x and y" an actual property.
"""

import numpy as np

from spheremarket import (
    PriceIntervalProperty,
    UniformRho,
    UnitVector3,
    actual_properties,
    from_polar,
    is_eigenstate,
    sample_uniform,
    sphere_as_scop,
    transition,
)

POLE = UnitVector3(0.0, 0.0, 1.0)

price_map = {
    POLE: PriceIntervalProperty(100.0, 150.0),
    -POLE: PriceIntervalProperty(50.0, 100.0),
}
system = sphere_as_scop(UniformRho(), [POLE], price_map)

print("=== system shape ===")
print(f"contexts   : {len(system.contexts)} (one per trade direction)")
print(f"eigenstates: {len(system.states)}")
print(f"properties : {sorted((p.lower, p.upper) for p in system.properties)}")

print("\n=== eigenstates versus potentiality states ===")
rng = np.random.default_rng(41)
fresh = sample_uniform(rng)
print(f"endpoint state is eigenstate : {is_eigenstate(system, POLE, POLE)}")
print(f"random state is eigenstate   : {is_eigenstate(system, fresh, POLE)}")
print(f"actual properties before any trade: {set(actual_properties(system, fresh)) or '{}'}")

print("\n=== a trade actualizes the price ===")
state, context = fresh, POLE
state, _ = transition(system, state, context, rng)
props = actual_properties(system, state)
print(f"collapsed onto z = {state.z:+.0f} endpoint")
for p in props:
    print(f"actual now: price in ({p.lower}, {p.upper})")

print("\n=== the transition law row for a tilted state ===")
tilted = from_polar(1.0, 0.0)
for (q, _f), prob in system.transition_distribution(tilted, POLE):
    print(f"-> endpoint z = {q.z:+.0f} with probability {prob:.4f}")
print("rows always sum to one: the trade certainly actualizes some price")

print("\n=== repeated trades in the same context change nothing ===")
outcomes = {transition(system, state, POLE, rng)[0] for _ in range(1000)}
print(f"distinct successors of the collapsed state over 1000 trades: {len(outcomes)}")
