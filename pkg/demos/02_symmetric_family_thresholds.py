"""The symmetric one-parameter family and its exact width-k thresholds.

The quadratic (x1 + ... + xn)^2 + (a-1) * (x1^2 + ... + xn^2) has the Gram
matrix with a on the diagonal and 1 elsewhere.  It is a sum of k-nomial
squares exactly when a >= (n-1)/(k-1); this demo builds the explicit uniform
witness at the threshold and certified rejections just below it.

Run:  python3 demos/02_symmetric_family_thresholds.py
"""

from fractions import Fraction

from factorwidth.decompose import fw_membership
from factorwidth.families import (
    PnaSpec,
    pna_form,
    pna_threshold,
    pna_witness_decomposition,
    sobs_comparison,
)

print("Width-k thresholds (n-1)/(k-1) for small n:")
for n in range(3, 7):
    row = [f"k={k}: {pna_threshold(n, k)}" for k in range(2, n + 1)]
    print(f"    n={n}:  " + "   ".join(row))

print("\nAt the threshold the witness is fully explicit: one scaled block per")
print("k-subset, each a rank-one-perturbed constant matrix, summing to the")
print("Gram without any error at all (exact rational arithmetic):")
for (n, k) in [(3, 2), (4, 3), (6, 4)]:
    thr = pna_threshold(n, k)
    d = pna_witness_decomposition(n, k, thr)
    K0, B0 = d.blocks[0]
    print(f"    (n={n}, k={k}, a={thr}): {len(d.blocks)} blocks, "
          f"residual = {d.residual}, block[0] on {K0.indices} = "
          f"{[str(x) for x in B0.rows()[0]]}")

print("\nJust below the threshold membership fails, and the solver certifies")
print("it with a matrix whose k x k principal submatrices are all psd yet")
print("pairs negatively with the Gram:")
for (n, k) in [(3, 2), (4, 3), (6, 4)]:
    a = pna_threshold(n, k) - Fraction(1, 20)
    Q = pna_form(PnaSpec(n, a)).Q
    v = fw_membership(Q, k)
    print(f"    (n={n}, k={k}, a={a}): {v.status}, normalized certificate "
          f"value {v.certificate.normalized_value(Q):.4f}")

print("\nFor k = 2 there is a one-shot oracle: keep the diagonal, flip the")
print("off-diagonal entries negative, and test psd-ness of the result.")
for a in (Fraction(19, 10), Fraction(2)):
    rep = sobs_comparison(pna_form(PnaSpec(3, a)).Q)
    print(f"    n=3, a={a}: comparison matrix psd -> "
          f"sum of binomial squares = {rep.is_sobs}")

print("\nCLI equivalents:")
print("    factorwidth pna 4 3            # threshold 3/2")
print("    factorwidth pna 4 3 3/2        # witness decomposition exists")
print("    factorwidth pna 4 3 1.4        # below threshold: none")
