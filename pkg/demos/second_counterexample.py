# # Interchanging the selections
#
# A four-level system evolves by a cyclic permutation U before and after a
# coarse measurement with blocks {c00} and {c11, c12, c13}.  Swapping the
# pre- and post-selected states changes the answer; applying the
# time-reversal operator Theta as well does not.

# %%
import numpy as np

from ppse import ProcessTag, appendix_b, check_motion_reversal, reverse_ppse
from ppse.timesym import B_VARIANTS, appendix_b_experiment, appendix_b_theta, appendix_b_unitary

theta, u = appendix_b_theta(), appendix_b_unitary()
print("T unitary:", np.allclose(theta.t @ theta.t.conj().T, np.eye(4)))
print("Theta^-1 U Theta = U^dag:", check_motion_reversal(u, theta))

# %% [markdown]
# Prob[k=1] for the three variants.  In the original ordering U carries the
# k = 1 component of the pre-selected state onto c13, which is orthogonal to
# the post-selected state, so k = 1 never occurs.

# %%
for v in B_VARIANTS:
    print(f"{v:>14}: Prob[k=1] = {appendix_b(v):.6f}")

# %% [markdown]
# The four first-row processes agree for every variant, since U passes the
# motion-reversal check.

# %%
for v in B_VARIANTS:
    rep = reverse_ppse(appendix_b_experiment(v), (ProcessTag.II, ProcessTag.III, ProcessTag.IV))
    print(f"{v:>14}: max deviation {rep.max_deviation:.1e}")
