# %% [markdown]
# # Joint crossing counts for a birth-death process
#
# With the crossing set `{0, 2}` we count deaths `Y_0` and births `Y_2`
# together. Started from one particle, extinction forces `Y_0 = Y_2 + 1`, so
# only the cells `(n, n - 1)` carry mass. Their closed form is
#
#     P(Y_0 = n, Y_2 = n - 1) = (2n-3)!! 2^(n-1) mu^n lam^(n-1) / (n! (mu+lam)^(2n-1))

# %%
import math

import numpy as np

from crossing_lab import CrossingSet, solve_rho_series
from crossing_lab.presets import birth_death


def closed_form(n, mu, lam):
    if n == 1:
        return mu / (mu + lam)
    dfact = math.prod(range(2 * n - 3, 0, -2))
    return dfact * 2 ** (n - 1) * mu**n * lam ** (n - 1) / (math.factorial(n) * (mu + lam) ** (2 * n - 1))


# %%
mu, lam = 1.0, 1.0
s = solve_rho_series(birth_death(mu, lam), CrossingSet((0, 2)), 30)
print(" n   series              closed form         diff")
for n in range(1, 11):
    got = s[(n, n - 1)]
    print(f"{n:2d}   {got:.15e}  {closed_form(n, mu, lam):.15e}  {abs(got - closed_form(n, mu, lam)):.1e}")

# %% [markdown]
# Every other cell is exactly zero.

# %%
off = [abs(s[tuple(e)]) for e in s.space.exps if e[1] != e[0] - 1]
print("largest off-pattern coefficient:", max(off))

# %% [markdown]
# Summing the pattern gives the extinction probability, slowly in the
# critical case because the tail decays like `n^(-3/2)`.

# %%
for mu, lam in [(2, 1), (1, 1), (1, 3)]:
    s = solve_rho_series(birth_death(mu, lam), CrossingSet((0, 2)), 30)
    print(f"mu={mu} lam={lam}: captured mass {s.coeffs.sum():.6f}  rho={min(1, mu / lam):.6f}")
