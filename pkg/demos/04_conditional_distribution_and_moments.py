# %% [markdown]
# # Crossing distributions given extinction
#
# The series coefficients are sub-probabilities: they sum to the extinction
# probability. Dividing by `rho^i` gives the law of the crossing counts given
# that the process dies out, which is the useful object when `rho < 1`.

# %%
from crossing_lab import CrossingSet, conditional_distribution, marginal, moments
from crossing_lab.presets import birth_death

# %% [markdown]
# Supercritical birth-death with `mu = 1, lam = 2`: the extinction probability
# is one half and a single death is the most likely way to die.

# %%
law = birth_death(1, 2)
d = conditional_distribution(law, CrossingSet((0,)), i=1, K=60)
print("rho =", d.rho)
for n in (1, 3, 5, 7):
    print(f"P(Y_0 = {n} | extinct) = {d[n]:.10f}")
print("captured mass:", d.captured_mass)

# %% [markdown]
# Starting from two particles doubles every count in distribution: the law is
# the self-convolution of the one-particle law.

# %%
d2 = conditional_distribution(law, CrossingSet((0,)), i=2, K=60)
print([round(d2[n], 8) for n in range(2, 9)])

# %% [markdown]
# Moments come from partial sums and carry a convergence flag. In the
# subcritical case `mu = 2, lam = 1` the generating function is
# `(3 - sqrt(9 - 8v)) / 2`, giving mean 2 and variance 6.

# %%
print(moments(birth_death(2, 1), CrossingSet((0,)), 0, K=200))

# %% [markdown]
# At criticality the mean is infinite and the report says so.

# %%
print(moments(birth_death(1, 1), CrossingSet((0,)), 0, K=400).label)

# %% [markdown]
# Marginals of a joint table, here the birth count in the `{0, 2}` setting.

# %%
joint = conditional_distribution(birth_death(1, 1), CrossingSet((0, 2)), 1, K=20)
print(marginal(joint, 2)[:6])
print(joint.to_csv().splitlines()[:4])
