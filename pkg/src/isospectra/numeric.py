"""Complex-arithmetic substrate.

Dense polynomials (ascending coefficients), Pochhammer-family symbols,
simultaneous Aberth-Ehrlich root finding, characteristic-polynomial
eigenvalues, multiset matching, and forward-mode dual numbers.

All arithmetic is double-precision complex.  Matrices are small by design
(N <= 12): the eigensolver goes through the Faddeev-LeVerrier characteristic
polynomial, which is perfectly adequate at desk scale but ill-conditioned
beyond it, hence the hard cap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.polynomial.polynomial as npp

from .errors import CardinalityMismatch, DegenerateInput, NonConvergence

TRIM_REL = 1e-14        # trailing |c| <= TRIM_REL * max|c| is treated as zero
ROOT_TOL = 1e-12        # default scaled-residual tolerance for roots
ROOT_MAX_ITER = 200
EIGEN_CAP = 12          # charpoly eigensolver trusted up to this dimension
_TINY = 1e-300


class Poly:
    """Dense complex polynomial with coefficients in ascending powers.

    Trailing coefficients below TRIM_REL * max|c| are trimmed on
    construction, so `degree` always refers to a nonzero leading coefficient
    (the zero polynomial keeps a single 0 coefficient and degree 0).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if c.ndim != 1:
            raise DegenerateInput("polynomial coefficients must be 1-D")
        if not np.all(np.isfinite(c)):
            raise DegenerateInput("non-finite polynomial coefficient")
        scale = float(np.max(np.abs(c))) if c.size else 0.0
        if scale == 0.0:
            self.coeffs = np.zeros(1, dtype=complex)
            return
        keep = np.nonzero(np.abs(c) > TRIM_REL * scale)[0]
        self.coeffs = np.array(c[: keep[-1] + 1], dtype=complex)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, z):
        return npp.polyval(z, self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Poly):
            return Poly(npp.polymul(self.coeffs, other.coeffs))
        return Poly(self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Poly(self.coeffs / scalar)

    def __add__(self, other):
        if isinstance(other, Poly):
            return Poly(npp.polyadd(self.coeffs, other.coeffs))
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Poly):
            return Poly(npp.polysub(self.coeffs, other.coeffs))
        return NotImplemented

    def __neg__(self):
        return Poly(-self.coeffs)

    def deriv(self) -> "Poly":
        if self.degree == 0:
            return Poly([0.0])
        return Poly(npp.polyder(self.coeffs))

    def monic(self) -> "Poly":
        return Poly(self.coeffs / self.coeffs[-1])

    def padded(self, length: int) -> np.ndarray:
        """Coefficients zero-padded on the high end to `length` entries."""
        out = np.zeros(length, dtype=complex)
        out[: len(self.coeffs)] = self.coeffs
        return out

    def compose_affine(self, c0: complex, c1: complex) -> "Poly":
        """The polynomial u -> p(c0 + c1*u), by Horner composition."""
        acc = np.array([self.coeffs[-1]], dtype=complex)
        inner = np.array([c0, c1], dtype=complex)
        for a in self.coeffs[-2::-1]:
            acc = npp.polyadd(npp.polymul(acc, inner), [a])
        return Poly(acc)

    def __repr__(self):
        return f"Poly({np.array2string(self.coeffs, separator=', ')})"


@dataclass
class ZeroSet:
    """Roots of one polynomial plus separation/residual metadata."""

    zeros: np.ndarray
    min_separation: float
    max_poly_residual: float

    def __len__(self):
        return len(self.zeros)


@dataclass
class EigenMultiset:
    """Eigenvalues with unordered (multiset) semantics."""

    values: np.ndarray
    match_distance: Optional[float] = None

    def __len__(self):
        return len(self.values)


# ---------------------------------------------------------------------------
# Pochhammer-family symbols
# ---------------------------------------------------------------------------

def pochhammer(alpha, j: int):
    """Rising factorial (alpha)_j = alpha (alpha+1) ... (alpha+j-1), (alpha)_0 = 1."""
    if j < 0:
        raise ValueError("pochhammer order must be >= 0")
    out = 1.0 + 0.0j
    a = complex(alpha)
    for i in range(j):
        out *= a + i
    return out


def q_pochhammer(gamma, q, m: int):
    """q-shifted factorial (gamma; q)_m = (1-gamma)(1-gamma q)...(1-gamma q^(m-1))."""
    if m < 0:
        raise ValueError("q-pochhammer order must be >= 0")
    out = 1.0 + 0.0j
    g = complex(gamma)
    qq = complex(q)
    for _ in range(m):
        out *= 1.0 - g
        g *= qq
    return out


def wilson_pochhammer_poly(a, k: int) -> Poly:
    """[a; z]_k = (a^2+z)((a+1)^2+z)...((a+k-1)^2+z) as a degree-k Poly in z."""
    if k < 0:
        raise ValueError("order must be >= 0")
    p = Poly([1.0])
    a = complex(a)
    for i in range(k):
        p = p * Poly([(a + i) ** 2, 1.0])
    return p


def aw_pochhammer_poly(a, q, m: int) -> Poly:
    """{a; q; x}_m = prod_{j<m} (1 + a^2 q^(2j) - 2 a q^j x), degree m in x."""
    if m < 0:
        raise ValueError("order must be >= 0")
    p = Poly([1.0])
    a = complex(a)
    q = complex(q)
    for j in range(m):
        qj = q**j
        p = p * Poly([1.0 + a * a * qj * qj, -2.0 * a * qj])
    return p


def qracah_pochhammer_poly(gd, q, m: int) -> Poly:
    """prod_{s<m} (1 - z q^s + gd q^(2s+1)) as a degree-m Poly in z."""
    if m < 0:
        raise ValueError("order must be >= 0")
    p = Poly([1.0])
    gd = complex(gd)
    q = complex(q)
    for s in range(m):
        p = p * Poly([1.0 + gd * q ** (2 * s + 1), -(q**s)])
    return p


def racah_lambda_pochhammer_poly(gd1, n: int) -> Poly:
    """prod_{s<n} (-lam + s*gd1 + s^2) as a degree-n Poly in lam; empty product is 1."""
    if n < 0:
        raise ValueError("order must be >= 0")
    p = Poly([1.0])
    gd1 = complex(gd1)
    for s in range(n):
        p = p * Poly([s * gd1 + s * s, -1.0])
    return p


def elementary_coeffs_hyp(alphas, betas):
    """Coefficients a_0..a_p of prod(alpha_j - x) and b_1..b_{q+1} of x prod(beta_k - 1 - x).

    Returns (a, b) with a[j] = a_j (length p+1) and b[k-1] = b_k (length q+1).
    """
    a = Poly([1.0])
    for al in alphas:
        a = a * Poly([complex(al), -1.0])
    b = Poly([0.0, 1.0])
    for be in betas:
        b = b * Poly([complex(be) - 1.0, -1.0])
    p, qn = len(alphas), len(betas)
    return a.padded(p + 1), b.padded(qn + 2)[1:]


def elementary_coeffs_basic(alphas, betas):
    """Coefficients a_1..a_r of prod(1 + alpha_j x) = 1 + sum a_j x^j, same for betas.

    Returns (a, b) with a[j-1] = a_j (length r) and b[k-1] = b_k (length s).
    """
    a = Poly([1.0])
    for al in alphas:
        a = a * Poly([1.0, complex(al)])
    b = Poly([1.0])
    for be in betas:
        b = b * Poly([1.0, complex(be)])
    r, s = len(alphas), len(betas)
    return a.padded(r + 1)[1:], b.padded(s + 1)[1:]


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def _backward_error(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    """|p(z)| relative to the evaluation scale sum_i |c_i| |z|^i."""
    return np.abs(npp.polyval(z, c)) / (npp.polyval(np.abs(z), np.abs(c)) + _TINY)


def poly_roots(p, tol: float = ROOT_TOL, max_iter: int = ROOT_MAX_ITER) -> ZeroSet:
    """All roots of `p` by simultaneous Aberth-Ehrlich iteration.

    Initial guesses sit on a circle whose radius is max(1, Fujiwara
    coefficient-ratio bound), rotated by 0.42 rad so symmetric root
    configurations do not stall the iteration.  Corrections are driven to
    rounding level, then every root gets a guarded Newton polish (a step is
    kept only if the scaled backward error improves).  Multiple roots
    converge linearly and bottom out near sqrt(eps); that is inherent to
    double precision, and all downstream constructions require distinct
    zeros anyway.

    Raises DegenerateInput for the zero polynomial or degree < 1, and
    NonConvergence if the scaled residual still exceeds `tol` at the end.
    """
    c = (p if isinstance(p, Poly) else Poly(p)).coeffs
    deg = len(c) - 1
    if deg < 1:
        raise DegenerateInput("poly_roots needs degree >= 1")
    c = c / np.max(np.abs(c))
    dc = npp.polyder(c)

    k = np.arange(deg, 0, -1, dtype=float)
    ratios = np.abs(c[:-1] / c[-1]) ** (1.0 / k)
    radius = max(1.0, 2.0 * float(ratios.max()))
    angles = 2.0 * np.pi * np.arange(deg) / deg + 0.42
    z = radius * np.exp(1j * angles)

    for _ in range(max_iter):
        pv = npp.polyval(z, c)
        dv = npp.polyval(z, dc)
        dv = np.where(np.abs(dv) < _TINY, _TINY, dv)
        w = pv / dv
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - w * s
        step = np.where(np.abs(denom) < 1e-12, w, w / denom)
        z = z - step
        if np.max(np.abs(step)) <= 1e-15 * (1.0 + np.max(np.abs(z))):
            break

    for _ in range(3):
        pv = npp.polyval(z, c)
        dv = npp.polyval(z, dc)
        dv = np.where(np.abs(dv) < _TINY, _TINY, dv)
        cand = z - pv / dv
        better = _backward_error(c, cand) < _backward_error(c, z)
        z = np.where(better, cand, z)

    res = _backward_error(c, z)
    worst = float(res.max())
    if worst > tol:
        raise NonConvergence(
            f"root residual {worst:.3e} > tol {tol:.1e} after {max_iter} iterations"
        )
    z = z[np.lexsort((z.imag, z.real))]
    if deg > 1:
        diff = np.abs(z[:, None] - z[None, :])
        np.fill_diagonal(diff, np.inf)
        min_sep = float(diff.min())
    else:
        min_sep = float("inf")
    return ZeroSet(zeros=z, min_separation=min_sep, max_poly_residual=worst)


# ---------------------------------------------------------------------------
# Dense eigenvalues via Faddeev-LeVerrier + Aberth
# ---------------------------------------------------------------------------

def charpoly_coeffs(a: np.ndarray) -> np.ndarray:
    """Ascending coefficients of det(lam*I - A) by the Faddeev-LeVerrier recursion."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    cs = np.zeros(n + 1, dtype=complex)
    cs[n] = 1.0
    mk = a.copy()
    ck = -np.trace(mk)
    cs[n - 1] = ck
    for k in range(2, n + 1):
        mk = a @ (mk + ck * np.eye(n))
        ck = -np.trace(mk) / k
        cs[n - k] = ck
    return cs


def matrix_eigenvalues(m, tol: float = ROOT_TOL) -> EigenMultiset:
    """Eigenvalue multiset of a dense complex matrix.

    Default (and only) path: Faddeev-LeVerrier characteristic polynomial,
    then `poly_roots`, then a Newton polish of every eigenvalue against
    det(lam*I - A) evaluated by LU (step = 1 / trace((lam*I - A)^-1)).  The
    polish repairs what the charpoly coefficient representation loses to
    conditioning; without it, well-separated spectra of desk-scale matrices
    can come back with only ~5 correct digits.  The matrix is pre-scaled by
    its largest entry.  N = 1 returns the entry exactly; N > EIGEN_CAP is
    refused because even the polished charpoly route degrades well before
    dense QR would.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DegenerateInput("matrix_eigenvalues needs a square matrix, N >= 1")
    if not np.all(np.isfinite(a)):
        raise DegenerateInput("non-finite matrix entry")
    n = a.shape[0]
    if n == 1:
        return EigenMultiset(values=a[0, :1].copy())
    if n > EIGEN_CAP:
        raise DegenerateInput(f"charpoly eigensolver capped at N = {EIGEN_CAP}")
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return EigenMultiset(values=np.zeros(n, dtype=complex))
    b = a / scale
    cs = charpoly_coeffs(b)
    roots = poly_roots(Poly(cs), tol=tol, max_iter=max(ROOT_MAX_ITER, 300))
    eye = np.eye(n)
    eps = float(np.finfo(float).eps)
    values = roots.zeros.copy()
    for i, lam in enumerate(values):
        for _ in range(10):
            try:
                inv = np.linalg.inv(lam * eye - b)
            except np.linalg.LinAlgError:
                break  # exactly singular: lam is an eigenvalue to rounding
            tr = np.trace(inv)
            if not np.isfinite(tr) or abs(tr) < _TINY:
                break
            step = 1.0 / tr
            lam = lam - step
            if abs(step) <= 0.5 * eps * (1.0 + abs(lam)):
                break
        values[i] = lam
    return EigenMultiset(values=values * scale)


def multiset_match(a, b) -> float:
    """Greedy matched distance between two equal-size multisets.

    Both sides are sorted by (re, im); each element of the first is paired
    with its nearest unused partner in the second.  The max pairwise
    distance is returned, normalized by max(1, max |b|).
    """
    va = np.asarray(a.values if isinstance(a, EigenMultiset) else a, dtype=complex).ravel()
    vb = np.asarray(b.values if isinstance(b, EigenMultiset) else b, dtype=complex).ravel()
    if len(va) != len(vb):
        raise CardinalityMismatch(f"multiset sizes {len(va)} != {len(vb)}")
    if len(va) == 0:
        return 0.0
    va = va[np.lexsort((va.imag, va.real))]
    vb = vb[np.lexsort((vb.imag, vb.real))]
    used = np.zeros(len(vb), dtype=bool)
    worst = 0.0
    for x in va:
        d = np.abs(vb - x)
        d[used] = np.inf
        j = int(np.argmin(d))
        used[j] = True
        worst = max(worst, float(d[j]))
    return worst / max(1.0, float(np.max(np.abs(vb))))


# ---------------------------------------------------------------------------
# Forward-mode dual numbers
# ---------------------------------------------------------------------------

class Dual:
    """Scalar forward-mode dual: a value plus a vector of partials.

    Supports +, -, *, /, integer powers, and principal sqrt (via `dsqrt`);
    that is all the matrix formulas need.
    """

    __slots__ = ("val", "eps")

    def __init__(self, val, eps):
        self.val = complex(val)
        self.eps = np.asarray(eps, dtype=complex)

    @staticmethod
    def seed(values):
        """One dual per value, with identity partials (d v_i / d v_j = delta_ij)."""
        values = np.asarray(values, dtype=complex)
        n = len(values)
        eye = np.eye(n, dtype=complex)
        return [Dual(values[i], eye[i]) for i in range(n)]

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.eps + other.eps)
        return Dual(self.val + other, self.eps)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.eps)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Dual) else -complex(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.val * other.eps + other.val * self.eps)
        return Dual(self.val * other, self.eps * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            return Dual(self.val * inv, (self.eps - self.val * inv * other.eps) * inv)
        return Dual(self.val / other, self.eps / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.val
        return Dual(other * inv, -other * inv * inv * self.eps)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("Dual powers restricted to nonnegative integers")
        out = Dual(1.0, np.zeros_like(self.eps))
        for _ in range(k):
            out = out * self
        return out

    def __repr__(self):
        return f"Dual({self.val!r}, {self.eps!r})"


def dsqrt(x):
    """Principal square root for complex scalars or Duals."""
    if isinstance(x, Dual):
        r = complex(np.sqrt(x.val))
        return Dual(r, x.eps / (2.0 * r))
    return complex(np.sqrt(complex(x)))


def value_of(x):
    """Plain complex value of a complex or Dual scalar."""
    return x.val if isinstance(x, Dual) else complex(x)


# ---------------------------------------------------------------------------
# Compensated (double-double) complex arithmetic.
#
# The explicit polynomial sums of the q-top families cancel by up to ~11
# digits at N = 8 in the working parameter box, so their terms need to be
# accumulated with roughly twice double precision.  These are the classic
# error-free transformations (Dekker/Knuth): every stored quantity is an IEEE
# double, no arbitrary precision involved.  A complex double-double is the
# 4-tuple (re_hi, re_lo, im_hi, im_lo).
# ---------------------------------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a: float, b: float):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a: float, b: float):
    p = a * b
    t = _SPLITTER * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLITTER * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(ahi, alo, bhi, blo):
    s, e = _two_sum(ahi, bhi)
    e += alo + blo
    hi = s + e
    return hi, e - (hi - s)


def _dd_mul(ahi, alo, bhi, blo):
    p, e = _two_prod(ahi, bhi)
    e += ahi * blo + alo * bhi
    hi = p + e
    return hi, e - (hi - p)


def _dd_div(ahi, alo, bhi, blo):
    q1 = ahi / bhi
    # r = a - q1*b
    phi, plo = _dd_mul(q1, 0.0, bhi, blo)
    rhi, rlo = _dd_add(ahi, alo, -phi, -plo)
    q2 = rhi / bhi
    phi, plo = _dd_mul(q2, 0.0, bhi, blo)
    rhi, rlo = _dd_add(rhi, rlo, -phi, -plo)
    q3 = rhi / bhi
    hi, lo = _dd_add(q1, 0.0, q2, 0.0)
    return _dd_add(hi, lo, q3, 0.0)


def ddc(z) -> tuple:
    """Promote a complex double to a complex double-double (exact)."""
    z = complex(z)
    return (z.real, 0.0, z.imag, 0.0)


def ddc_to_complex(x) -> complex:
    return complex(x[0] + x[1], x[2] + x[3])


def ddc_add(x, y):
    rhi, rlo = _dd_add(x[0], x[1], y[0], y[1])
    ihi, ilo = _dd_add(x[2], x[3], y[2], y[3])
    return (rhi, rlo, ihi, ilo)


def ddc_neg(x):
    return (-x[0], -x[1], -x[2], -x[3])


def ddc_mul(x, y):
    # (a+bi)(c+di) = (ac - bd) + (ad + bc) i
    achi, aclo = _dd_mul(x[0], x[1], y[0], y[1])
    bdhi, bdlo = _dd_mul(x[2], x[3], y[2], y[3])
    adhi, adlo = _dd_mul(x[0], x[1], y[2], y[3])
    bchi, bclo = _dd_mul(x[2], x[3], y[0], y[1])
    rhi, rlo = _dd_add(achi, aclo, -bdhi, -bdlo)
    ihi, ilo = _dd_add(adhi, adlo, bchi, bclo)
    return (rhi, rlo, ihi, ilo)


def ddc_div(x, y):
    # x / y = x * conj(y) / |y|^2
    num = ddc_mul(x, (y[0], y[1], -y[2], -y[3]))
    m1hi, m1lo = _dd_mul(y[0], y[1], y[0], y[1])
    m2hi, m2lo = _dd_mul(y[2], y[3], y[2], y[3])
    dhi, dlo = _dd_add(m1hi, m1lo, m2hi, m2lo)
    rhi, rlo = _dd_div(num[0], num[1], dhi, dlo)
    ihi, ilo = _dd_div(num[2], num[3], dhi, dlo)
    return (rhi, rlo, ihi, ilo)


def ddc_powi(x, k: int):
    """Integer power by repeated multiplication (k may be negative)."""
    if k < 0:
        return ddc_div(ddc(1.0), ddc_powi(x, -k))
    out = ddc(1.0)
    base = x
    kk = k
    while kk:
        if kk & 1:
            out = ddc_mul(out, base)
        base = ddc_mul(base, base)
        kk >>= 1
    return out
