"""Composition from blocks agrees with a hand-written automaton.

We compose the temperature block diagram, load the same system written
as one automaton, rename it into the composed names and replay both with
shared seeds.  The traces match event for event.
"""
from hawkmc import RngStream, Simulator, fixtures, print_canonical, to_json

composed = fixtures.load("temperature").canonical()
manual = fixtures.load_monolith("temperature").canonical()

print(print_canonical(composed))
same_structure = to_json(composed).replace(composed.name, "") == to_json(manual).replace(manual.name, "")
print(f"same structure: {same_structure}")

left, right = Simulator(composed), Simulator(manual)
agree = sum(left.simulate(100, "uniform", RngStream(s)) == right.simulate(100, "uniform", RngStream(s))
            for s in range(100))
print(f"identical traces: {agree}/100 seeds")
