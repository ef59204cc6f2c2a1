# # Coarse versus fine records
#
# The same selections and the same observable can give different statistics
# depending on whether the pointer records only the eigenvalue or also the
# basis vector inside a degenerate block.

# %%
import numpy as np

from ppse import Eigenstructure, Experiment, HilbertSpace, IntermediateModel, Mode, SelectionEvent
from ppse import density_for, outcome_prob

space = HilbertSpace(("c0", "c1", "c2"))
eigen = Eigenstructure.standard(space, (1, 2))


def prob_k0(a, b, mode):
    exp = Experiment(IntermediateModel(eigen, mode), SelectionEvent.of(a), SelectionEvent.of(b))
    return outcome_prob(density_for(exp), 0)


# %% [markdown]
# A hand-sized case: the two amplitudes in block {c1, c2} cancel when the
# pointer cannot tell them apart.

# %%
a = np.ones(3) / np.sqrt(3)
b = np.array([1, 1, -1]) / np.sqrt(3)
print("coarse:", prob_k0(a, b, Mode.COARSE), " fine:", round(prob_k0(a, b, Mode.FINE), 6))

# %% [markdown]
# Random real states almost always show a gap as well.

# %%
rng = np.random.default_rng(2024)
for _ in range(3):
    a, b = (v / np.linalg.norm(v) for v in rng.normal(size=(2, 3)))
    print(f"coarse {prob_k0(a, b, Mode.COARSE):.6f}  fine {prob_k0(a, b, Mode.FINE):.6f}")
