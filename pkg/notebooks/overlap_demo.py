# coding: utf-8

# # Extension against the direct sum
#
# Right of the abscissa of convergence the series can be summed directly.
# The extension must agree there to within the two error bounds combined.

import numpy as np

from merocont import direct_sum, evaluate_extension, make_geometric_plus_b

series = make_geometric_plus_b(2.0, 1.0)  # sum (2**n + 1)**-s

# ## One point

s = 1.5 + 0.5j
ext = evaluate_extension(series, s, tol=1e-12)
ref = direct_sum(series, s, tol=1e-12)
print("extension", ext.value, "+/-", ext.error_bound)
print("direct   ", ref.value, "+/-", ref.error_bound)
print("gap      ", abs(ext.value - ref.value))

# ## A small grid

for re in np.linspace(0.5, 2.5, 5):
    s = complex(re, 1.0)
    ext = evaluate_extension(series, s, tol=1e-12)
    ref = direct_sum(series, s, tol=1e-12)
    print(f"{re:4.1f}  {abs(ext.value - ref.value):.2e}  budget {ext.error_bound + ref.error_bound:.2e}")

# ## Left of the abscissa
#
# Only the extension is defined here.

for s in (-0.5, -1.5 + 2j, -2.5):
    ext = evaluate_extension(series, s, tol=1e-10)
    print(s, ext.value, ext.plan.N)
