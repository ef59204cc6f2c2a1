# # Writing scenarios as text
#
# Every catalog scenario is a plain-text description that parses back to the
# same object.  The same text can be handed to the `ppse` command.

# %%
from ppse.scenario import builtin, parse, render, run

text = render(builtin("three-box-Z"))
print(text)
assert parse(text) == builtin("three-box-Z")

# %% [markdown]
# A new scenario: a qubit measured in the computational basis between two
# selections on the diagonal.

# %%
qubit = """
scenario "qubit" {
  space dim = 2 basis = [up, down]
  state plus = 1/sqrt(2), 1/sqrt(2)
  state minus = 1/sqrt(2), -1/sqrt(2)
  measure { blocks = [[up], [down]] mode = nondegenerate }
  preselect { basis = plus index = 0 }
  postselect { basis = minus index = 0 }
  options { look = up }
}
"""
print(run(parse(qubit)).to_table())

# %% [markdown]
# Mistakes are reported with their line and column.

# %%
try:
    parse(qubit.replace("1/sqrt(2), -1", "1/sqrt(2), -1j"))
except Exception as exc:
    print(type(exc).__name__, exc)
