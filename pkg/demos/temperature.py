"""Room temperature under a hysteresis controller with a lossy sensor.

The plant integrates a heating or cooling rate, the sensor samples the
temperature every U(10, 20) time units, and a relay flips the rate
when the sampled value leaves the comfort band.  Because the controller
only sees samples, the room can undershoot the band's lower edge.
"""
from hawkmc import RngStream, Simulator, estimate_many, fixtures
from hawkmc.smc import format_table

model = fixtures.load("temperature")
print(f"composed automaton: {len(model.locations)} locations, variables {', '.join(model.variables)}")

# one path, printed at its discrete events
trace = Simulator(model).simulate(100, "uniform", RngStream(7))
print("\nfirst events of one path:")
for step, state in list(zip(trace.steps, trace.states))[:24]:
    if type(step).__name__ == "DiscreteStep":
        print(f"  t={state.time:7.3f}  {step.label:18s} temp={state.valuation['temp']:.3f}")

# how far the temperature drops within 100 time units
results = estimate_many(model, fixtures.load_properties("temperature"), 10_000, 0.95, "uniform", seed=0)
print("\n" + format_table(results))
