# %% [markdown]
# # Checking the exact answer by simulation
#
# The embedded jump chain picks index `r` with probability `b_r / (-b_1)` and
# moves the population by `r - 1`. Tracked indices are tallied until the
# population hits zero or a cap is reached. Each path draws from its own
# counter-based stream, so results do not depend on batching or threads.

# %%
import numpy as np

from crossing_lab import CrossingSet, compare, conditional_distribution, estimate_distribution, simulate_path, simulate_paths
from crossing_lab.montecarlo import Caps
from crossing_lab.presets import birth_death

# %%
law, cset = birth_death(1, 2), CrossingSet((0,))
exact = conditional_distribution(law, cset, 1, K=100)
emp = estimate_distribution(law, cset, 1, n_paths=100_000, caps=Caps(10**4, 10**6), seed=7)
print("extinct fraction:", emp.extinct_fraction, " censored:", emp.n_censored)
report = compare(exact, emp)
for c in report.cells[:6]:
    print(f"{c.index}  exact={c.exact:.5f}  empirical={c.empirical:.5f}  z={c.z:+.2f}")
print("max |z| =", round(report.max_abs_z, 3), " passed:", report.passed)

# %% [markdown]
# The batched kernel and the plain Python walker read the same random
# stream, so any single path can be replayed exactly.

# %%
batch = simulate_paths(law, cset, 1, 1000, seed=7)
print(batch.outcome(123))
print(simulate_path(law, cset, 1, 7, path_index=123))

# %% [markdown]
# Weights only rescale holding times. With `w_i = i` the time to extinction
# shrinks but the crossing counts are untouched.

# %%
plain = simulate_paths(law, cset, 1, 20000, seed=1, timed=True)
fast = simulate_paths(law.with_weights("identity"), cset, 1, 20000, seed=1, timed=True)
ok = plain.extinct
print("same counts:", np.array_equal(plain.counts, fast.counts))
print("mean time to extinction, constant weights:", plain.elapsed_time[ok].mean())
print("mean time to extinction, identity weights:", fast.elapsed_time[ok].mean())
