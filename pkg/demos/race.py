"""Two random clocks race: estimate who fires first and compare with the exact answer.

T1 ~ U(0, 10) and T2 ~ U(5, 15).  T1 wins with probability 7/8, which we
also get by integrating the joint density over {t1 < t2}.
"""
from scipy import integrate

from hawkmc import estimate_many, fixtures
from hawkmc.smc import format_table

model = fixtures.load("race")
props = fixtures.load_properties("race")

exact, _ = integrate.dblquad(lambda t2, t1: 0.01, 0, 10, lambda t1: max(t1, 5), lambda t1: 15)
print(f"P(T1 first) by integration: {exact:.6f}\n")

for runs in (100, 1000, 10_000):
    results = estimate_many(model, props, runs, 0.95, "asap", seed=1)
    print(f"{runs} runs")
    print(format_table(results))
    print()

# The interval width shrinks roughly like 1/sqrt(runs); each one should cover 0.875.
