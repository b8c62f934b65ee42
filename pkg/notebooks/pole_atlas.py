# coding: utf-8

# # Pole atlas
#
# Poles of the extension can only sit on the lattice (p - shift) / sigma,
# with p a pole of the base continuation and shift in the additive
# semigroup of the expansion exponents.  A contour residue tells which
# candidates are real.

from merocont import make_geometric_plus_b, make_zeta_beta, predicted_poles, verify_pole

# ## sum (2**n + 1)**-s
#
# Every lattice point on the real axis is a simple pole with residue 1/log 2.

series = make_geometric_plus_b(2.0, 1.0)
for cand in predicted_poles(series, (-3.2, 0.2, -0.5, 0.5)):
    v = verify_pole(series, cand)
    print(f"{cand.location.real:5.1f}  {v.status:12s}  {v.residue.real:.10f}")

# ## sum (n + n**0.5)**-s
#
# Half-integer shifts appear.  Some lattice points carry a zero binomial
# coefficient and turn out removable; the contour residue then vanishes.

series = make_zeta_beta(0.5)
for cand in predicted_poles(series, (-2.2, 1.2, -0.1, 0.1)):
    v = verify_pole(series, cand)
    print(f"{cand.location.real:5.1f}  {v.status:12s}  {abs(v.residue):.3e}")
