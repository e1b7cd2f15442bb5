"""Two consumers switch between low and high load while a meter integrates power.

``load`` accumulates time spent with both units on high load (weighted by
the detector output), ``total`` is the consumed energy.  ASAP scheduling
resolves simultaneous expirations by edge order.
"""
from hawkmc import estimate_many, fixtures
from hawkmc.smc import format_table

model = fixtures.load("energy")
unpruned = fixtures.load("energy", prune=False)
print(f"product locations: {len(unpruned.locations)} before pruning, {len(model.locations)} after")

results = estimate_many(model, fixtures.load_properties("energy"), 10_000, 0.95, "asap", seed=0, workers=4)
print(format_table(results))
