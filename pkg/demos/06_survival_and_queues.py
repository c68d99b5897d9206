# %% [markdown]
# # Surviving populations and batch-arrival queues
#
# On the event that the population never dies out, every tracked up-crossing
# happens infinitely often. A finite simulation can only show the counts
# growing without bound among paths still alive at the step cap.

# %%
from crossing_lab import CrossingSet, conditional_distribution, moments, survival_divergence_check
from crossing_lab.montecarlo import Caps
from crossing_lab.presets import birth_death, mxm1

# %%
law = birth_death(1, 2)
for L in (10, 50, 200):
    rep = survival_divergence_check(law, m=2, L=L, n_paths=10_000, caps=Caps(10**4, 10**6), seed=6)
    print(f"L={L:4d}: {rep.n_surviving} survivors, fraction with Y_2 >= L = {rep.fraction:.4f}")

# %% [markdown]
# A queue with exponential service at rate `mu` and batch arrivals of size
# `j` at rate `lam_j` is a branching law with `b_0 = mu` and
# `b_{j+1} = lam_j`. The death count started from one customer is the number
# of services in a busy period.

# %%
# customers arrive at rate 0.5 * 1 + 0.25 * 2 = 1, served at rate 2
law, cset = mxm1(2.0, [0.5, 0.25]), CrossingSet((0,))
print(law.b)
busy = conditional_distribution(law, cset, 1, K=100)
print("P(busy period serves n customers):", [round(busy[n], 6) for n in range(1, 7)])
print(moments(law, cset, 0, K=400))  # mean 1 / (1 - load) = 2
