# # A Hamiltonian-driven measurement and its time reverse
#
# A three-level system with eigenvalue blocks {c00} and {c11, c12} couples to
# a pointer through an explicit Hamiltonian.  After a quarter period the
# pointer has recorded the block together with a rotation d inside it.

# %%
import numpy as np

from ppse import ProcessTag, appendix_a
from ppse.timesym import appendix_a_experiment, recover_initial, rotation_d

# %% [markdown]
# Sweep the rotation angle.  With the post-selected state (c00 + c12)/sqrt(2)
# the weight of k = 1 follows |d12|^2 / (1 + |d12|^2); post-selecting on
# (c00 + c11)/sqrt(2) instead gives the same curve in |d11|.

# %%
print(f"{'d11':>8}{'P1 (c12)':>12}{'P1 (c11)':>12}{'process ii':>14}")
for x in (0.0, 0.5, 1 / np.sqrt(2), np.sqrt(3) / 2, 1.0):
    rep = appendix_a(rotation_d(x))
    alt = appendix_a(rotation_d(x), post="c11")
    print(f"{x:8.4f}{rep.probabilities[1]:12.6f}{alt.probabilities[1]:12.6f}"
          f"{rep.deviation(ProcessTag.II):14.2e}")

# %% [markdown]
# Running the physical post-selected state backwards through the same
# unitaries and projecting onto the pre-selected state recovers it exactly.

# %%
exp = appendix_a_experiment(rotation_d(0.6))
back, rec, prob = recover_initial(exp)
print("reverse projection probability:", round(prob, 6))
print("recovered system amplitudes:", np.round(rec.reshape(exp.n, exp.p)[:, 0], 6))

# %% [markdown]
# Resetting the pointer to ready before running backwards is not the time
# reverse of the forward run, and its weights differ.

# %%
rep = appendix_a(rotation_d(1 / np.sqrt(2)))
print("forward weights:", np.round(rep.forward_weights, 6))
print("reset weights:  ", np.round(rep.details["reset_weights"], 6))
