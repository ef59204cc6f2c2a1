# # Three boxes
#
# A particle is prepared in an equal superposition of three boxes X, Y, Z and
# later found in (X + Y - Z)/sqrt(3).  In between, someone opens one box.
# The ensemble of runs that pass both selections tells us how often the
# particle was seen in the opened box.

# %%
import numpy as np

from ppse import three_box
from ppse.ensemble import three_box_states

a, b = three_box_states()
print("pre :", np.round(a.real, 4))
print("post:", np.round(b.real, 4))

# %% [markdown]
# Opening X (or Y) finds the particle with certainty.  Opening Z does not:
# the transition amplitude through Z is -1/3 while the unopened pair
# contributes 2/3 coherently, so Prob(found in Z) = (1/9) / (1/9 + 4/9).

# %%
for box in "XYZ":
    rep = three_box(box)
    print(f"open {box}: found {rep.prob_found:.6f}  (oracle {rep.oracle_found:.6f})")

# %% [markdown]
# Opening all three boxes at once is a different measurement.  Its outcome
# distribution is uniform, which is where the familiar 1/3 for Z comes from.

# %%
print("all boxes open:", np.round(three_box("Z").all_boxes, 6))
