"""Why positive multipliers cannot rescue small-width square certificates.

Multiplying a quadratic q by (sum lam_i^2 x_i^2)^r raises the degree but, for
several regimes, provably cannot create a sum-of-k-nomial-squares certificate
where none existed.  The machinery behind that is all computable:

* parity aggregates: the coefficient sums of the product over monomials with
  a fixed odd-variable pattern collapse to closed forms in q;
* parity certificates: matrices indexed by degree-(r+1) monomials with
  entries k-1 / -1 by parity, whose k x k principal submatrices are all psd;
* certificate lifts: a 4x4 separator with unit diagonal lifts to the
  degree-(r+1) index set with its pairing scaled by (sum lam_i^2)^r.

Run:  python3 demos/04_multiplier_lifts.py
"""

import math
from fractions import Fraction

from factorwidth.dualcone import bnr_certificate, cos_ray, lift_quaternary_certificate
from factorwidth.families import PnaSpec, pna_form
from factorwidth.polyforms import (
    QuadraticForm,
    default_gram,
    monomial_basis,
    multiplier_gram,
    multiply_weighted_power,
    parity_aggregates,
    quadratic_gram,
    soks_test,
)
from factorwidth.symcore import SymMatrix, frobenius_inner

print("1. Parity aggregates collapse to closed forms.")
q = pna_form(PnaSpec(3, 2))
lam = [1, 1, 1]
p = multiply_weighted_power(q, lam, 1)
p0, pij = parity_aggregates(p)
print(f"   product of the (a=2) symmetric quadratic with the r=1 multiplier:")
print(f"   all-even aggregate p0 = {p0}  (= 3 * trace = 18)")
print(f"   two-odd aggregates   = { {k: str(v) for k, v in pij.items()} }")
print(f"   (each equals 2 * 3 * q_ij = 6)")

print("\n2. Parity certificates pair with ANY Gram of the product through")
print("   those aggregates, so the pairing is a closed form in (n, k, r, a):")
for (n, k, r, a) in [(3, 2, 1, Fraction(19, 10)), (3, 2, 2, Fraction(19, 10)),
                     (4, 3, 1, Fraction(14, 10))]:
    B = bnr_certificate(n, r, k)
    qa = pna_form(PnaSpec(n, a))
    H = default_gram(multiply_weighted_power(qa, [1] * n, r),
                     monomial_basis(n, r + 1))
    pairing = frobenius_inner(B, H)
    closed = n ** (r + 1) * ((k - 1) * a - (n - 1))
    print(f"   n={n} k={k} r={r} a={a}:  <B, H> = {pairing}  "
          f"(closed form {closed});  negative iff a below (n-1)/(k-1)")

print("\n3. Any 4x4 unit-diagonal separator lifts to every multiplier degree")
print("   with a predictably scaled pairing:")
B4 = cos_ray(math.pi / 2, math.pi / 4)
Q = SymMatrix.from_rows([[2, 1, 0, -1], [1, 3, 1, 0], [0, 1, 1, 1],
                         [-1, 0, 1, 4]])
qf = QuadraticForm(Q=Q)
for r in (1, 2):
    for lam in ([1, 1, 1, 1], [1, 2, 1, 3]):
        lifted = lift_quaternary_certificate(B4, r, 1.0)
        gram = default_gram(multiply_weighted_power(qf, lam, r),
                            monomial_basis(4, r + 1))
        lhs = float(frobenius_inner(lifted, gram))
        scale = float(sum(Fraction(v) ** 2 for v in lam)) ** r
        rhs = scale * float(frobenius_inner(B4, Q))
        print(f"   r={r} lam={lam}:  <lift, Gram> = {lhs:+.6f}   "
              f"scale * <B4, Q> = {rhs:+.6f}")

print("\n4. The punchline at width 2: multipliers never help.  Below the")
print("   threshold the multiplied forms are rejected with verified")
print("   certificates; at the threshold they are accepted (the multiplied")
print("   form under the width-preserving lift Gram):")
for a in (Fraction(19, 10), Fraction(2)):
    qa = pna_form(PnaSpec(3, a))
    p0_poly = qa.to_poly()
    v0 = soks_test(p0_poly, 2, quadratic_gram(p0_poly))
    p1_poly = multiply_weighted_power(qa, [1, 1, 1], 1)
    if a < 2:
        g1 = default_gram(p1_poly, monomial_basis(3, 2))
    else:
        g1 = multiplier_gram(qa, [1, 1, 1], 1)
    v1 = soks_test(p1_poly, 2, g1)
    print(f"   a={a}:  r=0 -> {v0.status:11s}  r=1 -> {v1.status}")
