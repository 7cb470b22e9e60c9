"""Membership in the dual cones (FW_k^n)* and separating-certificate search.

A symmetric matrix is in the dual cone exactly when every k x k principal
submatrix is psd, so membership is a finite battery of small psd tests.  Two
search strategies produce separating certificates for non-members of FW_k:

* a parametrized family of extreme rays of (FW_3^4)* (cosine-patterned 4 x 4
  matrices), scanned over a grid and refined by coordinate descent;
* Dykstra cyclic projections onto the submatrix-psd sets, started at the
  steepest separating direction -Q/||Q||_F, for arbitrary (n, k).

No unverified certificate leaves this module: every returned matrix re-passes
the dual membership battery and pairs strictly negatively with its target.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .symcore import (
    SymMatrix,
    Support,
    frobenius_inner,
    is_psd,
    principal_submatrix,
    _project_psd_float,
)
from .polyforms import monomial_basis

__all__ = [
    "DualCertificate",
    "DualMembershipReport",
    "ExtremeRayReport",
    "CosExtremeRay",
    "dual_membership",
    "verify_candidate",
    "cos_ray",
    "cos_certificate_search",
    "dykstra_dual_certificate",
    "check_extreme_candidate",
    "bnr_certificate",
    "lift_quaternary_certificate",
    "certificate_to_json",
]


@dataclass
class DualCertificate:
    """Separating witness: B in (FW_k^n)* with <B, Q> < 0 for the target Q."""

    B: SymMatrix
    k: int
    value: float
    worst_minor_margin: float
    normalization: float

    def __post_init__(self):
        bound = -1e-9 * (1.0 + self.B.max_abs())
        if self.worst_minor_margin < bound:
            raise ValueError(
                f"certificate has an infeasible minor (margin "
                f"{self.worst_minor_margin:.3e} < {bound:.3e})")

    def normalized_value(self, target: SymMatrix) -> float:
        denom = self.B.frob_norm() * target.frob_norm()
        return self.value / denom if denom > 0 else 0.0


@dataclass
class DualMembershipReport:
    is_member: bool
    k: int
    worst_support: Support
    worst_margin: float
    exact: bool


@dataclass(frozen=True)
class CosExtremeRay:
    """Parameters selecting one member of the (FW_3^4)* extreme-ray family."""

    a: float
    c: float
    permutation: tuple[int, int, int, int] = (0, 1, 2, 3)
    diag_scale: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        if any(d == 0 for d in self.diag_scale):
            raise ValueError("diagonal scales must be nonzero")

    def matrix(self) -> SymMatrix:
        base = cos_ray(self.a, self.c).as_array()
        out = _apply_perm_scale(base, self.permutation, np.array(self.diag_scale))
        return SymMatrix.from_array(out)


@dataclass
class ExtremeRayReport:
    is_psd: bool
    is_extreme: bool
    reason: str
    psd_rank: Optional[int] = None
    in_dual: Optional[bool] = None
    submatrix_ranks: Optional[list] = None


# ---------------------------------------------------------------------------
# Dual membership battery
# ---------------------------------------------------------------------------


def _k_subsets(n: int, k: int):
    return list(itertools.combinations(range(n), k))


def _submatrix_margins(Bf: np.ndarray, subsets) -> tuple[np.ndarray, np.ndarray]:
    stack = np.stack([Bf[np.ix_(K, K)] for K in subsets])
    lam = np.linalg.eigvalsh((stack + np.transpose(stack, (0, 2, 1))) / 2.0)
    margins = lam[:, 0]
    scales = 1.0 + np.max(np.abs(stack), axis=(1, 2))
    return margins, scales


def dual_membership(B: SymMatrix, k: int, tol: float = 1e-9
                    ) -> DualMembershipReport:
    """Check all C(n, k) principal submatrices of B for psd-ness.

    With exact rational input and ``tol == 0`` each verdict comes from the
    exact pivot test; the reported margins are float approximations either way.
    """
    n = B.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    subsets = _k_subsets(n, k)
    margins, scales = _submatrix_margins(B.as_array(), subsets)
    worst = int(np.argmin(margins))
    exact = B.is_exact and tol == 0
    if exact:
        member = all(
            is_psd(principal_submatrix(B, Support.of(K)), 0).is_psd
            for K in subsets
        )
    else:
        member = bool(np.all(margins >= -tol * scales))
    return DualMembershipReport(
        is_member=member, k=k, worst_support=Support.of(subsets[worst]),
        worst_margin=float(margins[worst]), exact=exact)


# ---------------------------------------------------------------------------
# The cosine family of extreme rays of (FW_3^4)*
# ---------------------------------------------------------------------------


def cos_ray(a: float, c: float) -> SymMatrix:
    """The circulant-patterned 4x4 extreme-ray normal form with angles (a, c)."""
    ca, cc, cac = math.cos(a), math.cos(c), math.cos(a - c)
    rows = [
        [1.0, ca, cac, cc],
        [ca, 1.0, cc, cac],
        [cac, cc, 1.0, ca],
        [cc, cac, ca, 1.0],
    ]
    return SymMatrix.from_rows(rows)


def _cos_ray_array(a: float, c: float) -> np.ndarray:
    ca, cc, cac = math.cos(a), math.cos(c), math.cos(a - c)
    return np.array([
        [1.0, ca, cac, cc],
        [ca, 1.0, cc, cac],
        [cac, cc, 1.0, ca],
        [cc, cac, ca, 1.0],
    ])


def _apply_perm_scale(base: np.ndarray, perm, dfull: np.ndarray) -> np.ndarray:
    """Return D P base P^T D with P[perm[i], i] = 1 and D = diag(dfull)."""
    out = np.empty_like(base)
    for i in range(4):
        for j in range(4):
            out[perm[i], perm[j]] = base[i, j]
    return out * np.outer(dfull, dfull)


def cos_certificate_search(Q: SymMatrix, grid_size: int = 64,
                           refine_iters: int = 200) -> Optional[DualCertificate]:
    """Search the cosine family for a normalized separator of a 4x4 target.

    Grid phase: all angle cells, 24 permutations and 16 diagonal sign patterns,
    minimizing <D P B(a,c) P^T D, Q> / ||.||_F; ties break toward the smallest
    (a-index, c-index, permutation, sign) tuple.  Refinement runs coordinate
    descent on the angles and multiplicative positive diagonal scales.  A
    certificate is returned only if the minimum is below -1e-8 and the dual
    membership battery re-verifies at k = 3.
    """
    if Q.n != 4:
        raise ValueError("the cosine family lives on 4x4 targets")
    Qf = Q.as_array()
    step = 2.0 * math.pi / grid_size
    grid = -math.pi + (np.arange(grid_size) + 0.5) * step
    CA = np.cos(grid)[:, None] * np.ones((1, grid_size))
    CC = np.ones((grid_size, 1)) * np.cos(grid)[None, :]
    CAC = np.cos(grid[:, None] - grid[None, :])
    norm_b = np.sqrt(4.0 * (1.0 + CA ** 2 + CAC ** 2 + CC ** 2))

    perms = list(itertools.permutations(range(4)))
    signs = list(itertools.product((1.0, -1.0), repeat=4))
    best = None
    for p_idx, perm in enumerate(perms):
        for s_idx, sg in enumerate(signs):
            D = np.outer(sg, sg)
            Y = (Qf * D)[np.ix_(perm, perm)]
            t0 = float(np.trace(Y))
            w1 = 2.0 * (Y[0, 1] + Y[2, 3])
            w2 = 2.0 * (Y[0, 2] + Y[1, 3])
            w3 = 2.0 * (Y[0, 3] + Y[1, 2])
            vals = (t0 + w1 * CA + w2 * CAC + w3 * CC) / norm_b
            flat = int(np.argmin(vals))
            ia, ic = divmod(flat, grid_size)
            cand = (float(vals[ia, ic]), ia, ic, p_idx, s_idx)
            if best is None or cand < best:
                best = cand

    _, ia, ic, p_idx, s_idx = best
    a, c = float(grid[ia]), float(grid[ic])
    perm = perms[p_idx]
    sg = np.array(signs[s_idx])
    d = np.ones(4)

    def objective(aa, cc_, dd):
        mat = _apply_perm_scale(_cos_ray_array(aa, cc_), perm, sg * dd)
        nrm = float(np.linalg.norm(mat))
        return float(np.vdot(mat, Qf)) / nrm, mat

    val, mat = objective(a, c, d)
    step_ang = step / 2.0
    step_mul = 1.25
    for _ in range(refine_iters):
        improved = False
        for delta in (step_ang, -step_ang):
            v2, _ = objective(a + delta, c, d)
            if v2 < val:
                a, val, improved = a + delta, v2, True
            v2, _ = objective(a, c + delta, d)
            if v2 < val:
                c, val, improved = c + delta, v2, True
        for i in range(4):
            for factor in (step_mul, 1.0 / step_mul):
                d2 = d.copy()
                d2[i] *= factor
                v2, _ = objective(a, c, d2)
                if v2 < val:
                    d, val, improved = d2, v2, True
        if not improved:
            step_ang *= 0.6
            step_mul = 1.0 + (step_mul - 1.0) * 0.6
            if step_ang < 1e-12:
                break

    if val >= -1e-8:
        return None
    _, mat = objective(a, c, d)
    mat = mat / np.linalg.norm(mat)
    B = SymMatrix.from_array(mat)
    report = dual_membership(B, 3, 1e-9)
    if not report.is_member:
        return None
    return DualCertificate(
        B=B, k=3, value=float(frobenius_inner(B, Q)),
        worst_minor_margin=report.worst_margin, normalization=B.frob_norm())


# ---------------------------------------------------------------------------
# Dykstra projection onto the dual cone
# ---------------------------------------------------------------------------


def verify_candidate(candidate: np.ndarray, Q: SymMatrix, k: int,
                     cleanup_passes: int = 100) -> Optional[DualCertificate]:
    """Polish an unverified certificate direction and verify it strictly.

    The candidate is normalized, repaired by plain cyclic projections onto the
    submatrix-psd sets until it passes the membership battery, re-normalized,
    and accepted only with <B, Q> < -1e-8 ||Q||_F ||B||_F.  Both the input
    direction and its negative are worth trying; this handles one sign.
    """
    n = Q.n
    qnorm = Q.frob_norm()
    norm = float(np.linalg.norm(candidate))
    if norm == 0.0 or qnorm == 0.0 or not np.all(np.isfinite(candidate)):
        return None
    subsets = _k_subsets(n, k)
    ix_list = [np.ix_(K, K) for K in subsets]
    y = candidate / norm
    for _ in range(cleanup_passes):
        margins, scales = _submatrix_margins(y, subsets)
        if np.all(margins >= -1e-9 * scales):
            break
        for ix in ix_list:
            y[ix] = _project_psd_float(y[ix])
    ynorm = float(np.linalg.norm(y))
    if ynorm < 1e-10:
        return None
    y = y / ynorm
    margins, scales = _submatrix_margins(y, subsets)
    if np.any(margins < -1e-9 * scales):
        return None
    value = float(np.vdot(y, Q.as_array()))
    if value >= -1e-8 * qnorm:
        return None
    B = SymMatrix.from_array(y)
    report = dual_membership(B, k, 1e-9)
    if not report.is_member:
        return None
    return DualCertificate(
        B=B, k=k, value=float(frobenius_inner(B, Q)),
        worst_minor_margin=report.worst_margin,
        normalization=B.frob_norm())


def _splitting_gap_candidate(Q: SymMatrix, k: int, iters: int = 1500
                             ) -> Optional[np.ndarray]:
    """Run the bare consensus splitting and read off the infeasibility gap.

    For targets outside FW_k the scaled-multiplier trajectory settles onto the
    minimal displacement between the psd product and the consensus subspace;
    its ambient assembly is (up to sign and polish) a separating certificate.
    """
    from .decompose import _coverage, _SupportIndex, enumerate_supports
    from .symcore import _project_psd_batch

    n = Q.n
    supports = enumerate_supports(n, k)
    Af = Q.as_array()
    mult = _coverage(n, supports)
    if np.any((mult == 0) & (np.abs(Af) > 0)):
        # entries outside every support separate trivially
        gap = np.where(mult == 0, -Af, 0.0)
        return gap / np.linalg.norm(gap)
    index = _SupportIndex(n, supports)
    inv_mult = np.where(mult > 0, 1.0 / np.where(mult > 0, mult, 1.0), 0.0)
    Z = index.gather(Af * inv_mult)
    U = np.zeros_like(Z)
    for _ in range(iters):
        X = _project_psd_batch(Z - U)
        W = X + U
        corr = (Af - index.accumulate(W)) * inv_mult
        Z = W + index.gather(corr)
        U += X - Z
    gap = index.accumulate(X - Z) * inv_mult
    norm = float(np.linalg.norm(gap))
    if norm == 0.0 or not np.all(np.isfinite(gap)):
        return None
    return gap / norm


def dykstra_dual_certificate(Q: SymMatrix, k: int, max_cycles: int = 5000
                             ) -> Optional[DualCertificate]:
    """Separating-certificate search in (FW_k^n)* for an arbitrary target.

    Two phases, both ending in the same strict verification:

    1. gap extraction: the consensus-splitting gap direction is assembled,
       polished and verified (this nails thin separations that projection
       iterations approach only sublinearly);
    2. Dykstra cyclic projections onto the sets {B : B_K psd} from the
       steepest separating direction -Q/||Q||_F, testing the iterate after
       each full cycle, giving up after ``max_cycles``.

    ``None`` means no certificate was found; it is never a membership proof.
    """
    n = Q.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    qnorm = Q.frob_norm()
    if qnorm == 0:
        return None

    candidate = _splitting_gap_candidate(Q, k)
    if candidate is not None:
        for sign in (1.0, -1.0):
            cert = verify_candidate(sign * candidate, Q, k)
            if cert is not None:
                return cert

    Qf = Q.as_array()
    subsets = _k_subsets(n, k)
    ix_list = [np.ix_(K, K) for K in subsets]
    x = -Qf / qnorm
    corr = np.zeros((len(subsets), k, k))

    for cycle in range(1, max_cycles + 1):
        for s, ix in enumerate(ix_list):
            v = x[ix] + corr[s]
            proj = _project_psd_float(v)
            corr[s] = v - proj
            x[ix] = proj
        xnorm = float(np.linalg.norm(x))
        if xnorm < 1e-12:
            return None  # iterate collapsed onto the origin: no separator here
        xhat = x / xnorm
        margins, scales = _submatrix_margins(xhat, subsets)
        if np.all(margins >= -1e-9 * scales):
            value = float(np.vdot(xhat, Qf))
            if value < -1e-8 * qnorm:
                cert = verify_candidate(xhat, Q, k, cleanup_passes=0)
                if cert is not None:
                    return cert
        elif cycle % 25 == 0:
            cert = verify_candidate(xhat, Q, k)
            if cert is not None:
                return cert
    return None


# ---------------------------------------------------------------------------
# Extreme-ray predicate (k = n-1)
# ---------------------------------------------------------------------------


def check_extreme_candidate(B: SymMatrix) -> ExtremeRayReport:
    """Decide whether B spans an extreme ray of (FW_{n-1}^n)*.

    psd candidates are extreme exactly when they have rank one; non-psd
    candidates are extreme exactly when they lie in the dual cone and every
    (n-1) x (n-1) principal submatrix has numerical rank n-2.
    """
    n = B.n
    if n < 2:
        raise ValueError("need n >= 2")
    Bf = B.as_array()
    lam = np.linalg.eigvalsh(Bf)
    scale = max(B.max_abs(), 1e-300)
    psd = bool(lam[0] >= -1e-9 * (1.0 + scale))
    if psd:
        rank = int(np.sum(np.abs(lam) > 1e-8 * scale))
        return ExtremeRayReport(
            is_psd=True, is_extreme=(rank == 1), psd_rank=rank,
            reason=f"psd with rank {rank}"
            + (": spans an extreme ray" if rank == 1 else ": decomposable"))
    report = dual_membership(B, n - 1, 1e-9)
    subsets = _k_subsets(n, n - 1)
    ranks = []
    for K in subsets:
        sub = Bf[np.ix_(K, K)]
        sl = np.linalg.eigvalsh(sub)
        sub_scale = max(float(np.max(np.abs(sub))), 1e-300)
        ranks.append(int(np.sum(np.abs(sl) > 1e-8 * sub_scale)))
    extreme = report.is_member and all(r == n - 2 for r in ranks)
    if not report.is_member:
        reason = "not in the dual cone"
    elif extreme:
        reason = f"non-psd, all {n-1}x{n-1} submatrices have rank {n-2}"
    else:
        reason = f"submatrix ranks {sorted(set(ranks))} differ from {n-2}"
    return ExtremeRayReport(
        is_psd=False, is_extreme=extreme, in_dual=report.is_member,
        submatrix_ranks=ranks, reason=reason)


# ---------------------------------------------------------------------------
# Structured certificates from the parity construction
# ---------------------------------------------------------------------------


def bnr_certificate(n: int, r: int, k: int) -> SymMatrix:
    """Parity certificate on the degree-(r+1) monomial index set.

    Entry (i, j) is k-1 when the exponent sum i+j is even in every position
    and -1 otherwise.  Every k x k principal submatrix is psd, so the matrix
    lies in the dual cone of the width-k Gram matrices.
    """
    if n < 1 or r < 0 or k < 2:
        raise ValueError("need n >= 1, r >= 0, k >= 2")
    tuples = monomial_basis(n, r + 1).tuples
    m = len(tuples)
    rows = [[0] * m for _ in range(m)]
    for i in range(m):
        ti = tuples[i]
        for j in range(i, m):
            tj = tuples[j]
            even = all((a + b) % 2 == 0 for a, b in zip(ti, tj))
            rows[i][j] = rows[j][i] = (k - 1) if even else -1
    return SymMatrix.from_rows(rows)


def lift_quaternary_certificate(B4: SymMatrix, r: int, omega=1) -> SymMatrix:
    """Lift a unit-diagonal 4x4 dual certificate to the degree-(r+1) index set.

    The lifted entry for index pair (i, j) depends only on the odd positions
    of i+j: the matching entry of B4 when exactly two positions (k != l) are
    odd, 1 when none are, omega when all four are, and 0 otherwise.
    """
    if B4.n != 4:
        raise ValueError("base certificate must be 4x4")
    if r < 0:
        raise ValueError("r must be nonnegative")
    for i in range(4):
        di = B4[i, i]
        ok = (di == 1) if B4.is_exact else abs(float(di) - 1.0) <= 1e-12
        if not ok:
            raise ValueError("base certificate must have unit diagonal")
    tuples = monomial_basis(4, r + 1).tuples
    m = len(tuples)
    exact = B4.is_exact and not isinstance(omega, float)
    one = 1 if exact else 1.0
    zero = 0 if exact else 0.0
    om = omega if exact else float(omega)
    rows = [[zero] * m for _ in range(m)]
    for i in range(m):
        ti = tuples[i]
        for j in range(i, m):
            tj = tuples[j]
            odd = [p for p in range(4) if (ti[p] + tj[p]) % 2 == 1]
            if len(odd) == 0:
                v = one
            elif len(odd) == 2:
                v = B4[odd[0], odd[1]] if exact else float(B4[odd[0], odd[1]])
            elif len(odd) == 4:
                v = om
            else:
                v = zero
            rows[i][j] = rows[j][i] = v
    return SymMatrix.from_rows(rows)


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------


def certificate_to_json(cert: DualCertificate) -> dict:
    from .symcore import matrix_to_json

    return {
        "n": cert.B.n,
        "k": cert.k,
        "B": matrix_to_json(cert.B),
        "value": float(cert.value),
        "worst_minor_margin": cert.worst_minor_margin,
    }
