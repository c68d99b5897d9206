# %% [markdown]
# # Death counts for a law with triple births
#
# `B(u) = 2q - 3pu + u^3` is a valid branching law when `3p = 2q + 1`. Each
# birth adds two particles, so from one particle the death count is always
# odd and every even coefficient vanishes.

# %%
import numpy as np

from crossing_lab import CrossingSet, cubic_death_series, death_series, solve_rho_series
from crossing_lab.presets import cubic

# %% [markdown]
# Three independent routes to the same coefficients: the general
# multivariate solver, the univariate death-count routine, and a closed
# recursion specific to this law.

# %%
p, q = 3.0, 4.0
law = cubic(p, q)
K = 40
general = solve_rho_series(law, CrossingSet((0,)), K).coeffs
fast = death_series(law, K).coeffs
closed = cubic_death_series(p, q, K)
print("rho_1 =", fast[1], "expected", 2 * q / (3 * p))
print("max |general - closed| =", np.abs(general - closed).max())
print("max |fast - closed|    =", np.abs(fast - closed).max())
print("even coefficients:", fast[2::2][:6])

# %% [markdown]
# The balance condition is enforced.

# %%
try:
    cubic_death_series(1.0, 2.0, 5)
except ValueError as exc:
    print("rejected:", exc)
