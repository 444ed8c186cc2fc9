"""Polynomial families and their defining equations.

Each family is constructed directly from its explicit finite sum as a dense
coefficient vector.  Where the textbook sum divides by a Pochhammer symbol
that also appears in a prefactor (Wilson, Askey-Wilson, Jacobi), the ratio is
rewritten as a shifted Pochhammer product, so the builders are entire in the
parameters and only genuinely missing denominators are rejected.

Variable conventions (the "natural" variable of each family):

  ghyp, gbasic   z
  wilson         z = x^2          (lift: x = sqrt(z), principal branch)
  racah          z = lambda(x)    (lift: y = sqrt(z + theta^2), theta = (gamma+delta+1)/2)
  aw             x = cos(theta)   (lift: z = x + sqrt(x^2 - 1) = e^(i theta))
  qracah         z = q^-x + gamma delta q^(x+1)   (companions z^(+-) = z(x +- 1))
  jacobi         x                (maps to ghyp via z = 2/(1-x))

Square roots are principal everywhere; every identity evaluated here is
invariant under a consistent branch flip, so the choice is immaterial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import (
    BranchPoint,
    InvalidParameters,
    NonConvergence,
    RepeatedZeros,
    SingularSample,
)
from .numeric import (
    Poly,
    ZeroSet,
    aw_pochhammer_poly,
    ddc,
    ddc_add,
    ddc_div,
    ddc_mul,
    ddc_neg,
    ddc_powi,
    ddc_to_complex,
    dsqrt,
    pochhammer,
    poly_roots,
    q_pochhammer,
    qracah_pochhammer_poly,
    racah_lambda_pochhammer_poly,
    wilson_pochhammer_poly,
)

_TINY = 1e-300
DENOM_TOL = 1e-13          # vanishing-denominator rejection inside the sums
PARAM_POLE_TOL = 1e-10     # plain Pochhammer validity margin
QPARAM_POLE_TOL = 1e-12    # q-Pochhammer validity margin
ZERO_SEP_REL = 1e-8        # distinctness threshold, relative to zero scale
BRANCH_TOL = 1e-10
SINGULAR_RADIUS = 1e-3     # exclusion radius around defining-equation poles


class Family(str, Enum):
    GHYP = "ghyp"
    GBASIC = "gbasic"
    WILSON = "wilson"
    RACAH = "racah"
    AW = "aw"
    QRACAH = "qracah"
    JACOBI = "jacobi"


Q_FAMILIES = frozenset({Family.GBASIC, Family.AW, Family.QRACAH})
FOUR_PARAM_FAMILIES = frozenset({Family.WILSON, Family.RACAH, Family.AW, Family.QRACAH})
#: families whose zero dynamics run in a lifted variable
LIFTED_FAMILIES = frozenset({Family.WILSON, Family.RACAH})


@dataclass(frozen=True)
class FamilySpec:
    """One polynomial instance: family tag, degree, parameters, optional base."""

    family: Family
    N: int
    alphas: tuple = ()
    betas: tuple = ()
    q: Optional[complex] = None


def make_spec(family, N, alphas=(), betas=(), q=None) -> FamilySpec:
    fam = Family(family)
    return FamilySpec(
        family=fam,
        N=int(N),
        alphas=tuple(complex(a) for a in alphas),
        betas=tuple(complex(b) for b in betas),
        q=None if q is None else complex(q),
    )


def racah_theta(spec: FamilySpec) -> complex:
    g, d = spec.alphas[2], spec.alphas[3]
    return (g + d + 1.0) / 2.0


def jacobi_to_ghyp(spec: FamilySpec) -> FamilySpec:
    """The ghyp instance whose zeros are 2/(1 - x_n) for Jacobi zeros x_n."""
    al, be = spec.alphas
    return make_spec(Family.GHYP, spec.N, alphas=(spec.N + al + be + 1.0,), betas=(al + 1.0,))


def validate_spec(spec: FamilySpec) -> None:
    """Raise InvalidParameters unless the construction's denominators are safe.

    Rejections mirror the "after appropriate cancellations the denominators do
    not vanish" convention: only symbols that actually survive in a denominator
    (or in the leading coefficient) are checked.
    """
    if not isinstance(spec.family, Family):
        raise InvalidParameters(f"unknown family {spec.family!r}")
    if spec.N < 1:
        raise InvalidParameters("N must be >= 1")
    fam = spec.family
    if fam in Q_FAMILIES:
        if spec.q is None:
            raise InvalidParameters(f"{fam.value} requires a base q")
        if abs(spec.q - 1.0) <= 1e-9 or abs(spec.q) < 1e-12:
            raise InvalidParameters("base q must stay away from 0 and 1")
    elif spec.q is not None:
        raise InvalidParameters(f"{fam.value} takes no base q")
    if fam in FOUR_PARAM_FAMILIES and len(spec.alphas) != 4:
        raise InvalidParameters(f"{fam.value} needs exactly 4 parameters")
    if fam in FOUR_PARAM_FAMILIES and spec.betas:
        raise InvalidParameters(f"{fam.value} takes no beta parameters")
    if fam == Family.JACOBI and len(spec.alphas) != 2:
        raise InvalidParameters("jacobi needs exactly (alpha, beta)")
    N, q = spec.N, spec.q

    def poch_ok(base, count, label):
        for i in range(count):
            if abs(base + i) < PARAM_POLE_TOL:
                raise InvalidParameters(f"{label}: factor ({base} + {i}) vanishes")

    def qpoch_ok(base, count, label):
        g = complex(base)
        for i in range(count):
            if abs(1.0 - g) < QPARAM_POLE_TOL * max(1.0, abs(g)):
                raise InvalidParameters(f"{label}: factor (1 - {base} q^{i}) vanishes")
            g *= q

    if fam == Family.GHYP:
        for k, be in enumerate(spec.betas):
            poch_ok(be, N, f"beta_{k + 1}")
    elif fam == Family.GBASIC:
        qpoch_ok(q, N, "(q; q)_m")
        for k, be in enumerate(spec.betas):
            qpoch_ok(be, N, f"(beta_{k + 1}; q)_m")
    elif fam == Family.WILSON:
        a, b, c, d = spec.alphas
        for u, lbl in ((a + b, "a+b"), (a + c, "a+c"), (a + d, "a+d")):
            poch_ok(u, N, f"({lbl})_N")
        poch_ok(N + a + b + c + d - 1.0, N, "(N+a+b+c+d-1)_N")
    elif fam == Family.RACAH:
        al, be, ga, de = spec.alphas
        poch_ok(al + 1.0, N, "(alpha+1)_n")
        poch_ok(be + de + 1.0, N, "(beta+delta+1)_n")
        poch_ok(ga + 1.0, N, "(gamma+1)_n")
        poch_ok(N + al + be + 1.0, N, "(N+alpha+beta+1)_N")
    elif fam == Family.AW:
        a, b, c, d = spec.alphas
        if abs(a) < 1e-12:
            raise InvalidParameters("askey-wilson needs a != 0")
        qpoch_ok(q, N, "(q; q)_m")
        for u, lbl in ((a * b, "ab"), (a * c, "ac"), (a * d, "ad")):
            qpoch_ok(u, N, f"({lbl}; q)_N")
        qpoch_ok(a * b * c * d * q ** (N - 1), N, "(abcd q^(N-1); q)_N")
    elif fam == Family.QRACAH:
        al, be, ga, de = spec.alphas
        qpoch_ok(q, N, "(q; q)_m")
        qpoch_ok(al * q, N, "(alpha q; q)_m")
        qpoch_ok(be * de * q, N, "(beta delta q; q)_m")
        qpoch_ok(ga * q, N, "(gamma q; q)_m")
        qpoch_ok(al * be * q ** (N + 1), N, "(alpha beta q^(N+1); q)_N")
    elif fam == Family.JACOBI:
        al, be = spec.alphas
        poch_ok(N + al + be + 1.0, N, "(N+alpha+beta+1)_N")


# ---------------------------------------------------------------------------
# Explicit-sum builders
# ---------------------------------------------------------------------------

def _guard_denominator(den, num):
    if abs(den) < DENOM_TOL * max(1.0, abs(num)):
        raise InvalidParameters("vanishing denominator in term accumulation")


def _build_ghyp(spec: FamilySpec) -> np.ndarray:
    N = spec.N
    coef = np.zeros(N + 1, dtype=complex)
    for m in range(N + 1):
        num = pochhammer(-N, m)
        for al in spec.alphas:
            num *= pochhammer(al, m)
        den = complex(math.factorial(m))
        for be in spec.betas:
            den *= pochhammer(be, m)
        _guard_denominator(den, num)
        coef[N - m] = num / den
    return coef


def _build_gbasic(spec: FamilySpec) -> np.ndarray:
    N, q = spec.N, spec.q
    r, s = len(spec.alphas), len(spec.betas)
    coef = np.zeros(N + 1, dtype=complex)
    for m in range(N + 1):
        num = q_pochhammer(q ** (-N), q, m)
        for al in spec.alphas:
            num *= q_pochhammer(al, q, m)
        den = q_pochhammer(q, q, m)
        for be in spec.betas:
            den *= q_pochhammer(be, q, m)
        _guard_denominator(den, num)
        sign = (-1) ** (m * (s - r))
        coef[m] = num / den * sign * q ** ((m * (m - 1) // 2) * (s - r))
    return coef


def _build_wilson(spec: FamilySpec) -> np.ndarray:
    N = spec.N
    a, b, c, d = spec.alphas
    sig = a + b + c + d
    coef = np.zeros(N + 1, dtype=complex)
    for k in range(N + 1):
        pref = pochhammer(-N, k) * pochhammer(N + sig - 1.0, k) / math.factorial(k)
        for u in (a + b, a + c, a + d):
            pref *= pochhammer(u + k, N - k)
        coef[: k + 1] += pref * wilson_pochhammer_poly(a, k).padded(k + 1)
    return coef


def _build_racah(spec: FamilySpec) -> np.ndarray:
    N = spec.N
    al, be, ga, de = spec.alphas
    gd1 = ga + de + 1.0
    coef = np.zeros(N + 1, dtype=complex)
    for n in range(N + 1):
        num = pochhammer(-N, n) * pochhammer(N + al + be + 1.0, n)
        den = complex(math.factorial(n))
        for u in (al + 1.0, be + de + 1.0, ga + 1.0):
            den *= pochhammer(u, n)
        _guard_denominator(den, num)
        coef[: n + 1] += (num / den) * racah_lambda_pochhammer_poly(gd1, n).padded(n + 1)
    return coef


def _build_aw(spec: FamilySpec) -> np.ndarray:
    N, q = spec.N, spec.q
    a, b, c, d = spec.alphas
    prod = a * b * c * d
    coef = np.zeros(N + 1, dtype=complex)
    for m in range(N + 1):
        num = q**m * q_pochhammer(q ** (-N), q, m) * q_pochhammer(prod * q ** (N - 1), q, m)
        den = q_pochhammer(q, q, m)
        _guard_denominator(den, num)
        pref = num / den
        for u in (a * b, a * c, a * d):
            pref *= q_pochhammer(u * q**m, q, N - m)
        coef[: m + 1] += pref * aw_pochhammer_poly(a, q, m).padded(m + 1)
    return coef * a ** (-N)


def _build_qracah(spec: FamilySpec) -> np.ndarray:
    N, q = spec.N, spec.q
    al, be, ga, de = spec.alphas
    coef = np.zeros(N + 1, dtype=complex)
    for m in range(N + 1):
        num = q**m * q_pochhammer(q ** (-N), q, m) * q_pochhammer(al * be * q ** (N + 1), q, m)
        den = q_pochhammer(q, q, m)
        for u in (al * q, be * de * q, ga * q):
            den *= q_pochhammer(u, q, m)
        _guard_denominator(den, num)
        coef[: m + 1] += (num / den) * qracah_pochhammer_poly(ga * de, q, m).padded(m + 1)
    return coef


def _build_jacobi(spec: FamilySpec) -> np.ndarray:
    # ((alpha+1)_N / N!) 2F1(-N, N+alpha+beta+1; alpha+1; (1-x)/2), with the
    # prefactor folded in as (alpha+1)_N / (alpha+1)_m = (alpha+1+m)_(N-m).
    N = spec.N
    al, be = spec.alphas
    half = Poly([0.5, -0.5])
    power = Poly([1.0])
    coef = np.zeros(N + 1, dtype=complex)
    for m in range(N + 1):
        pref = (
            pochhammer(-N, m)
            * pochhammer(N + al + be + 1.0, m)
            * pochhammer(al + 1.0 + m, N - m)
            / (math.factorial(m) * math.factorial(N))
        )
        coef[: m + 1] += pref * power.padded(m + 1)
        power = power * half
    return coef


_BUILDERS = {
    Family.GHYP: _build_ghyp,
    Family.GBASIC: _build_gbasic,
    Family.WILSON: _build_wilson,
    Family.RACAH: _build_racah,
    Family.AW: _build_aw,
    Family.QRACAH: _build_qracah,
    Family.JACOBI: _build_jacobi,
}


def build_polynomial(spec: FamilySpec) -> Poly:
    """The degree-N polynomial of `spec` in its natural variable.

    ghyp output is exactly monic (the m = 0 term is z^N with coefficient 1);
    the other families keep their textbook normalization.
    """
    validate_spec(spec)
    p = Poly(_BUILDERS[spec.family](spec))
    if p.degree != spec.N:
        raise InvalidParameters(
            f"leading coefficient degenerates: degree {p.degree} != N = {spec.N}"
        )
    return p


@lru_cache(maxsize=512)
def _term_table(spec: FamilySpec):
    """Per-term (prefactor, linear factors) of the family sum, in compensated form.

    Every term of each explicit sum is pref * prod_s (A_s + B_s * z) for
    family-specific constants; the table holds them as complex double-doubles
    so evaluation keeps ~30 significant digits through the cancellation.
    """
    N = spec.N
    fam = spec.family
    one = ddc(1.0)

    def poch_dd(a, m):
        out = one
        for i in range(m):
            out = ddc_mul(out, ddc_add(a, ddc(i)))
        return out

    def qpoch_dd(g, qd, m):
        out = one
        gg = g
        for _ in range(m):
            out = ddc_mul(out, ddc_add(one, ddc_neg(gg)))
            gg = ddc_mul(gg, qd)
        return out

    table = []
    if fam == Family.GHYP:
        for m in range(N + 1):
            num = poch_dd(ddc(-N), m)
            for al in spec.alphas:
                num = ddc_mul(num, poch_dd(ddc(al), m))
            den = ddc(float(math.factorial(m)))
            for be in spec.betas:
                den = ddc_mul(den, poch_dd(ddc(be), m))
            table.append((ddc_div(num, den), ((ddc(0.0), one),) * (N - m)))
    elif fam == Family.GBASIC:
        qd = ddc(spec.q)
        r, s = len(spec.alphas), len(spec.betas)
        for m in range(N + 1):
            num = qpoch_dd(ddc_powi(qd, -N), qd, m)
            for al in spec.alphas:
                num = ddc_mul(num, qpoch_dd(ddc(al), qd, m))
            den = qpoch_dd(qd, qd, m)
            for be in spec.betas:
                den = ddc_mul(den, qpoch_dd(ddc(be), qd, m))
            pref = ddc_div(num, den)
            sign = (-1.0) ** (m * (s - r))
            pref = ddc_mul(pref, ddc(sign))
            pref = ddc_mul(pref, ddc_powi(qd, (m * (m - 1) // 2) * (s - r)))
            table.append((pref, ((ddc(0.0), one),) * m))
    elif fam == Family.WILSON:
        a, b, c, d = spec.alphas
        sig = ddc_add(ddc_add(ddc(a), ddc(b)), ddc_add(ddc(c), ddc(d)))
        pair_sums = [ddc_add(ddc(a), ddc(u)) for u in (b, c, d)]
        for k in range(N + 1):
            pref = ddc_mul(poch_dd(ddc(-N), k), poch_dd(ddc_add(sig, ddc(N - 1)), k))
            pref = ddc_div(pref, ddc(float(math.factorial(k))))
            for u in pair_sums:
                pref = ddc_mul(pref, poch_dd(ddc_add(u, ddc(k)), N - k))
            factors = []
            for i in range(k):
                t = ddc_add(ddc(a), ddc(i))
                factors.append((ddc_mul(t, t), one))
            table.append((pref, tuple(factors)))
    elif fam == Family.RACAH:
        al, be, ga, de = spec.alphas
        gd1 = ddc_add(ddc_add(ddc(ga), ddc(de)), one)
        nab1 = ddc_add(ddc_add(ddc(al), ddc(be)), ddc(N + 1))
        dens = (
            ddc_add(ddc(al), one),
            ddc_add(ddc_add(ddc(be), ddc(de)), one),
            ddc_add(ddc(ga), one),
        )
        for n in range(N + 1):
            num = ddc_mul(poch_dd(ddc(-N), n), poch_dd(nab1, n))
            den = ddc(float(math.factorial(n)))
            for u in dens:
                den = ddc_mul(den, poch_dd(u, n))
            factors = []
            for s in range(n):
                a_s = ddc_add(ddc_mul(ddc(float(s)), gd1), ddc(float(s * s)))
                factors.append((a_s, ddc(-1.0)))
            table.append((ddc_div(num, den), tuple(factors)))
    elif fam == Family.AW:
        qd = ddc(spec.q)
        a, b, c, d = spec.alphas
        add = ddc(a)
        prod = ddc_mul(ddc_mul(add, ddc(b)), ddc_mul(ddc(c), ddc(d)))
        a_pow = ddc_powi(add, -N)
        for m in range(N + 1):
            num = ddc_mul(ddc_powi(qd, m), qpoch_dd(ddc_powi(qd, -N), qd, m))
            num = ddc_mul(num, qpoch_dd(ddc_mul(prod, ddc_powi(qd, N - 1)), qd, m))
            pref = ddc_mul(ddc_div(num, qpoch_dd(qd, qd, m)), a_pow)
            qm = ddc_powi(qd, m)
            for u in (ddc(b), ddc(c), ddc(d)):
                pref = ddc_mul(pref, qpoch_dd(ddc_mul(ddc_mul(add, u), qm), qd, N - m))
            factors = []
            for j in range(m):
                qj = ddc_powi(qd, j)
                a_j = ddc_add(one, ddc_mul(ddc_mul(add, add), ddc_mul(qj, qj)))
                b_j = ddc_mul(ddc(-2.0), ddc_mul(add, qj))
                factors.append((a_j, b_j))
            table.append((pref, tuple(factors)))
    elif fam == Family.QRACAH:
        qd = ddc(spec.q)
        al, be, ga, de = spec.alphas
        gd = ddc_mul(ddc(ga), ddc(de))
        for m in range(N + 1):
            num = ddc_mul(ddc_powi(qd, m), qpoch_dd(ddc_powi(qd, -N), qd, m))
            ab_q = ddc_mul(ddc_mul(ddc(al), ddc(be)), ddc_powi(qd, N + 1))
            num = ddc_mul(num, qpoch_dd(ab_q, qd, m))
            den = qpoch_dd(qd, qd, m)
            for u in (ddc(al), ddc_mul(ddc(be), ddc(de)), ddc(ga)):
                den = ddc_mul(den, qpoch_dd(ddc_mul(u, qd), qd, m))
            factors = []
            for s in range(m):
                a_s = ddc_add(one, ddc_mul(gd, ddc_powi(qd, 2 * s + 1)))
                factors.append((a_s, ddc_neg(ddc_powi(qd, s))))
            table.append((ddc_div(num, den), tuple(factors)))
    elif fam == Family.JACOBI:
        al, be = spec.alphas
        half = (ddc(0.5), ddc(-0.5))
        nab1 = ddc_add(ddc_add(ddc(al), ddc(be)), ddc(N + 1))
        for m in range(N + 1):
            num = ddc_mul(poch_dd(ddc(-N), m), poch_dd(nab1, m))
            num = ddc_mul(num, poch_dd(ddc_add(ddc(al), ddc(m + 1)), N - m))
            den = ddc(float(math.factorial(m) * math.factorial(N)))
            table.append((ddc_div(num, den), (half,) * m))
    else:
        raise InvalidParameters(f"no structured evaluation for {fam!r}")
    return tuple(table)


def structured_eval(spec: FamilySpec, z):
    """(value, derivative, |term| scale) of the family sum at scalar z.

    Terms are evaluated in factored product form with compensated
    (double-double) accumulation: the monomial expansion of the q-top
    families cancels by ~10 digits at N = 8 in the working parameter box,
    which would otherwise sink the zero accuracy and every residual
    downstream.  The derivative only steers Newton steps, so plain doubles
    suffice for it.
    """
    zdd = ddc(complex(z))
    table = _term_table(spec)
    val = ddc(0.0)
    dval = 0.0 + 0.0j
    scale = 0.0
    for pref, factors in table:
        t = pref
        p_plain = ddc_to_complex(pref)
        dp = 0.0 + 0.0j
        for a_s, b_s in factors:
            f = ddc_add(a_s, ddc_mul(b_s, zdd))
            fp = ddc_to_complex(f)
            dp = dp * fp + p_plain * ddc_to_complex(b_s)
            p_plain = p_plain * fp
            t = ddc_mul(t, f)
        val = ddc_add(val, t)
        dval += dp
        scale = max(scale, abs(ddc_to_complex(t)))
    return ddc_to_complex(val), dval, scale


def refine_zeros(spec: FamilySpec, roots: np.ndarray, steps: int = 12):
    """Newton-polish roots against the structured evaluation.

    Iterates until the Newton step falls below rounding level in z (the root
    is then accurate to the last representable digit).  Returns the refined
    roots plus the worst relative forward-error estimate |p/p'| / (1 + |z|).
    """
    out = np.array(roots, dtype=complex)
    worst = 0.0
    eps = np.finfo(float).eps
    for i, z in enumerate(out):
        step = np.inf
        for _ in range(steps):
            val, dval, _ = structured_eval(spec, z)
            if abs(dval) < _TINY:
                break
            step = val / dval
            if abs(step) <= 0.25 * eps * (1.0 + abs(z)):
                break
            z = z - step
        val, dval, _ = structured_eval(spec, z)
        fe = abs(val / dval) / (1.0 + abs(z)) if abs(dval) > _TINY else np.inf
        out[i] = z
        worst = max(worst, fe)
    return out, worst


def compute_zeros(spec: FamilySpec, tol: float = 1e-12, max_iter: int = 200) -> ZeroSet:
    """Zeros in the family's natural variable, sorted by (re, im).

    Roots come from Aberth on the expanded coefficients, then are polished
    against the structured sum (which does not suffer the expansion's
    cancellation); max_poly_residual on the result is the worst relative
    forward-error estimate |p/p'| / (1 + |z|) after polishing.  Raises
    RepeatedZeros when the minimal pairwise separation drops below
    ZERO_SEP_REL times the zero scale; every downstream construction assumes
    distinct zeros.
    """
    zs = poly_roots(build_polynomial(spec), tol=max(tol, 1e-9), max_iter=max_iter)
    refined, worst = refine_zeros(spec, zs.zeros)
    if worst > tol:
        raise NonConvergence(
            f"zero forward-error estimate {worst:.3e} > tol {tol:.1e} after refinement"
        )
    refined = refined[np.lexsort((refined.imag, refined.real))]
    out = ZeroSet(
        zeros=refined,
        min_separation=_min_sep(refined),
        max_poly_residual=max(worst, 0.0),
    )
    scale = max(1.0, float(np.max(np.abs(out.zeros))))
    if out.min_separation < ZERO_SEP_REL * scale:
        raise RepeatedZeros(
            f"min zero separation {out.min_separation:.3e} below {ZERO_SEP_REL:.0e} * scale"
        )
    return out


def _min_sep(values: np.ndarray) -> float:
    if len(values) < 2:
        return float("inf")
    diff = np.abs(values[:, None] - values[None, :])
    np.fill_diagonal(diff, np.inf)
    return float(diff.min())


def lift_zero_variables(spec: FamilySpec, zs: ZeroSet) -> ZeroSet:
    """Map natural-variable zeros to the lifted variable of the family.

    wilson:  x_n = sqrt(z_n);  racah:  y_n = sqrt(z_n + theta^2);
    aw:      z_n = x_n + sqrt(x_n^2 - 1);
    qracah:  the 2N companion values z_n^(+), z_n^(-), concatenated.
    """
    z = zs.zeros
    fam = spec.family
    if fam == Family.WILSON:
        if np.any(np.abs(z) < BRANCH_TOL):
            raise BranchPoint("wilson lift needs z_n != 0")
        lifted = np.sqrt(z.astype(complex))
    elif fam == Family.RACAH:
        t2 = racah_theta(spec) ** 2
        if np.any(np.abs(z + t2) < BRANCH_TOL):
            raise BranchPoint("racah lift needs z_n + theta^2 != 0")
        lifted = np.sqrt(z + t2)
    elif fam == Family.AW:
        lifted = z + np.sqrt(z * z - 1.0)
    elif fam == Family.QRACAH:
        gdq4 = 4.0 * spec.alphas[2] * spec.alphas[3] * spec.q
        if np.any(np.abs(z * z - gdq4) < BRANCH_TOL):
            raise BranchPoint("qracah shift hits the square-root branch point")
        zp = np.array([qracah_shift(spec, v, +1) for v in z])
        zm = np.array([qracah_shift(spec, v, -1) for v in z])
        lifted = np.concatenate([zp, zm])
    else:
        raise InvalidParameters(f"no lifted variable for family {fam.value}")
    return ZeroSet(
        zeros=lifted,
        min_separation=_min_sep(lifted),
        max_poly_residual=zs.max_poly_residual,
    )


# ---------------------------------------------------------------------------
# Scalar coefficient functions of the difference / q-difference equations.
# All of these accept complex or Dual arguments.
# ---------------------------------------------------------------------------

def wilson_sym(spec: FamilySpec):
    """Elementary symmetric functions (sigma1..sigma4) of (a, b, c, d)."""
    a, b, c, d = spec.alphas
    s1 = a + b + c + d
    s2 = a * b + a * c + a * d + b * c + b * d + c * d
    s3 = b * c * d + a * c * d + a * b * d + a * b * c
    s4 = a * b * c * d
    return s1, s2, s3, s4


def wilson_D(spec: FamilySpec, x):
    """Quartic D(x) = s4 + i s3 x - s2 x^2 - i s1 x^3 + x^4."""
    s1, s2, s3, s4 = wilson_sym(spec)
    return s4 + 1j * s3 * x - s2 * x * x - 1j * s1 * x**3 + x**4


def wilson_D_prime(spec: FamilySpec, x):
    s1, s2, s3, _ = wilson_sym(spec)
    return 1j * s3 - 2.0 * s2 * x - 3j * s1 * x * x + 4.0 * x**3


def wilson_B(spec: FamilySpec, x):
    """B(x) = (a+ix)(b+ix)(c+ix)(d+ix) / (2ix (2ix+1)); numerator equals D(x)."""
    return wilson_D(spec, x) / (2j * x * (2j * x + 1.0))


def racah_Dtilde(spec: FamilySpec, y):
    al, be, ga, de = spec.alphas
    num = (
        (2.0 * y + ga + de + 1.0)
        * (2.0 * y + ga - de + 1.0)
        * (2.0 * y + 2.0 * al - ga - de + 1.0)
        * (2.0 * y + 2.0 * be - ga + de + 1.0)
    )
    return num / (32.0 * y * (2.0 * y + 1.0))


def aw_D(spec: FamilySpec, z):
    a, b, c, d = spec.alphas
    q = spec.q
    z2 = z * z
    return ((1.0 - a * z) * (1.0 - b * z) * (1.0 - c * z) * (1.0 - d * z)) / (
        (1.0 - z2) * (1.0 - q * z2)
    )


def aw_G(spec: FamilySpec, z):
    return aw_D(spec, z) * (spec.q * z - 1.0 / z)


def aw_K(q, zn, zm):
    return ((zm - q * zn) * (q * zn * zm - 1.0)) / ((zm - zn) * (zn * zm - 1.0))


def qracah_Z(spec: FamilySpec, z):
    """Z = q^x = (z + sqrt(z^2 - 4 gamma delta q)) / (2 gamma delta q)."""
    gd = spec.alphas[2] * spec.alphas[3]
    return (z + dsqrt(z * z - 4.0 * gd * spec.q)) / (2.0 * gd * spec.q)


def qracah_B(spec: FamilySpec, z):
    al, be, ga, de = spec.alphas
    q = spec.q
    Z = qracah_Z(spec, z)
    Z2 = Z * Z
    gd = ga * de
    num = (1.0 - al * q * Z) * (1.0 - be * de * q * Z) * (1.0 - ga * q * Z) * (1.0 - gd * q * Z)
    return num / ((1.0 - gd * q * Z2) * (1.0 - gd * q * q * Z2))


def qracah_D(spec: FamilySpec, z):
    al, be, ga, de = spec.alphas
    q = spec.q
    Z = qracah_Z(spec, z)
    Z2 = Z * Z
    gd = ga * de
    num = q * (1.0 - Z) * (1.0 - de * Z) * (be - ga * Z) * (al - gd * Z)
    return num / ((1.0 - gd * Z2) * (1.0 - gd * q * Z2))


def qracah_shift(spec: FamilySpec, z, sign: int):
    """z^(+-) = z(x +- 1) = q^(+-1) z +- (1-q^2)/(2q) [z - sqrt(z^2 - 4 gamma delta q)]."""
    q = spec.q
    gd = spec.alphas[2] * spec.alphas[3]
    root = dsqrt(z * z - 4.0 * gd * q)
    return q ** float(sign) * z + sign * (1.0 - q * q) / (2.0 * q) * (z - root)


def qracah_C(spec: FamilySpec, z, sign: int):
    """d z^(+-) / d z, in closed form."""
    q = spec.q
    gd = spec.alphas[2] * spec.alphas[3]
    root = dsqrt(z * z - 4.0 * gd * q)
    return q ** float(sign) + sign * (1.0 - q * q) / (2.0 * q) * (1.0 - z / root)


# ---------------------------------------------------------------------------
# Defining-equation residuals
# ---------------------------------------------------------------------------

def _normalized(terms) -> complex:
    terms = np.asarray(terms, dtype=complex)
    scale = float(np.max(np.abs(terms)))
    return complex(np.sum(terms) / max(scale, _TINY))


def _ghyp_operator_halves(spec: FamilySpec, poly: Poly):
    """The two halves of the hypergeometric ODE applied to `poly`, as Polys.

    D_N acts diagonally on coefficients: z^m -> (m - N) z^m, so both operator
    products reduce to per-coefficient multipliers followed by d/dz on the
    second half.
    """
    N = spec.N
    c = poly.padded(poly.degree + 1)
    m = np.arange(len(c))
    x = m - N
    mult1 = x.astype(complex)
    for be in spec.betas:
        mult1 *= be - 1.0 - x
    first = Poly(c * mult1)
    mult2 = np.ones(len(c), dtype=complex)
    for al in spec.alphas:
        mult2 *= al - x
    second = Poly(c * mult2).deriv()
    return first, second


def _gbasic_operator_halves(spec: FamilySpec, poly: Poly):
    N, q = spec.N, spec.q
    r, s = len(spec.alphas), len(spec.betas)
    c = poly.padded(poly.degree + 1)
    m = np.arange(len(c))
    qm = q ** m.astype(float)
    mult1 = (qm - 1.0).astype(complex)
    for be in spec.betas:
        mult1 *= be / q * qm - 1.0
    first = Poly(c * mult1)
    mult2 = (q ** (-float(N)) * qm - 1.0).astype(complex)
    for al in spec.alphas:
        mult2 *= al * qm - 1.0
    mult2 *= qm ** (s - r)
    second = Poly(np.concatenate([[0.0], c * mult2]))  # the overall factor z
    return first, second


def _check_not_singular(dists, what):
    if min(dists) < SINGULAR_RADIUS:
        raise SingularSample(f"sample within {SINGULAR_RADIUS:g} of a {what} pole")


def defining_equation_residual(spec: FamilySpec, sample, poly: Optional[Poly] = None):
    """LHS of the family's defining (q-)difference/differential equation at `sample`.

    The equation is evaluated on `poly` (default: the built polynomial, which
    solves it by construction), split into its top-level additive terms, and
    the sum is returned normalized by the largest term magnitude.  `sample`
    lives in the residual variable: z for ghyp/gbasic/aw/qracah, x for wilson,
    y for racah, and z = 2/(1-x) on the mapped ghyp equation for jacobi.
    """
    fam = spec.family
    s = complex(sample)
    if fam == Family.JACOBI:
        gh = jacobi_to_ghyp(spec)
        if poly is None:
            return defining_equation_residual(gh, s)
        return defining_equation_residual(gh, s, poly=poly)
    if poly is None:
        # structured form: immune to the monomial expansion's cancellation
        value = lambda u: structured_eval(spec, u)[0]
    else:
        value = poly

    if fam in (Family.GHYP, Family.GBASIC):
        if poly is None:
            poly = build_polynomial(spec)
        halves = (
            _ghyp_operator_halves(spec, poly)
            if fam == Family.GHYP
            else _gbasic_operator_halves(spec, poly)
        )
        return _normalized([halves[0](s), -halves[1](s)])

    if fam == Family.WILSON:
        _check_not_singular([abs(s), abs(s - 0.5j), abs(s + 0.5j)], "wilson B(x)")
        sig = sum(spec.alphas)
        w = lambda x: value(x * x)
        terms = [
            wilson_B(spec, -s) * (w(s) - w(s + 1j)),
            wilson_B(spec, s) * (w(s) - w(s - 1j)),
            spec.N * (spec.N + sig - 1.0) * w(s),
        ]
        return _normalized(terms)

    if fam == Family.RACAH:
        _check_not_singular([abs(s), abs(s - 0.5), abs(s + 0.5)], "racah Dtilde(y)")
        al, be = spec.alphas[0], spec.alphas[1]
        t2 = racah_theta(spec) ** 2
        qt = lambda y: value(y * y - t2)
        terms = [
            racah_Dtilde(spec, s) * (qt(s + 1.0) - qt(s)),
            racah_Dtilde(spec, -s) * (qt(s - 1.0) - qt(s)),
            -spec.N * (spec.N + al + be + 1.0) * qt(s),
        ]
        return _normalized(terms)

    if fam == Family.AW:
        q = spec.q
        _check_not_singular(
            [abs(s), abs(s * s - 1.0), abs(q * s * s - 1.0), abs(s * s - q)], "askey-wilson D(z)"
        )
        a, b, c, d = spec.alphas
        Q = lambda z: value((z * z + 1.0) / (2.0 * z))
        lam = (q ** (-spec.N) - 1.0) * (1.0 - a * b * c * d * q ** (spec.N - 1))
        terms = [
            lam * Q(s),
            aw_D(spec, s) * (Q(s) - Q(q * s)),
            aw_D(spec, 1.0 / s) * (Q(s) - Q(s / q)),
        ]
        return _normalized(terms)

    if fam == Family.QRACAH:
        al, be, ga, de = spec.alphas
        q = spec.q
        gd = ga * de
        if abs(s * s - 4.0 * gd * q) < SINGULAR_RADIUS:
            raise SingularSample("sample at the q-racah square-root branch point")
        Z = qracah_Z(spec, s)
        Z2 = Z * Z
        _check_not_singular(
            [
                abs(1.0 - gd * q * Z2),
                abs(1.0 - gd * q * q * Z2),
                abs(1.0 - gd * Z2),
            ],
            "q-racah B/D",
        )
        lam = (q ** (-spec.N) - 1.0) * (1.0 - al * be * q ** (spec.N + 1))
        zp = qracah_shift(spec, s, +1)
        zm = qracah_shift(spec, s, -1)
        terms = [
            qracah_B(spec, s) * (value(zp) - value(s)),
            qracah_D(spec, s) * (value(zm) - value(s)),
            -lam * value(s),
        ]
        return _normalized(terms)

    raise InvalidParameters(f"no defining equation for family {fam.value}")


def residual_samples(spec: FamilySpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Non-singular samples in the annulus 0.3 <= |.| <= 2 of the residual variable."""
    out = []
    while len(out) < count:
        s = rng.uniform(0.3, 2.0) * np.exp(2j * np.pi * rng.uniform())
        try:
            _probe_singular(spec, s)
        except SingularSample:
            continue
        out.append(s)
    return np.array(out)


def _probe_singular(spec: FamilySpec, s: complex) -> None:
    fam = spec.family
    if fam == Family.WILSON:
        _check_not_singular([abs(s), abs(s - 0.5j), abs(s + 0.5j)], "wilson")
    elif fam == Family.RACAH:
        _check_not_singular([abs(s), abs(s - 0.5), abs(s + 0.5)], "racah")
    elif fam == Family.AW:
        q = spec.q
        _check_not_singular(
            [abs(s), abs(s * s - 1.0), abs(q * s * s - 1.0), abs(s * s - q)], "askey-wilson"
        )
    elif fam == Family.QRACAH:
        ga, de = spec.alphas[2], spec.alphas[3]
        gd = ga * de
        q = spec.q
        if abs(s * s - 4.0 * gd * q) < SINGULAR_RADIUS:
            raise SingularSample("branch point")
        Z2 = qracah_Z(spec, s) ** 2
        _check_not_singular(
            [abs(1.0 - gd * q * Z2), abs(1.0 - gd * q * q * Z2), abs(1.0 - gd * Z2)], "q-racah"
        )


def max_defining_residual(spec: FamilySpec, count: int = 10, seed: int = 0) -> float:
    """Max |normalized residual| over `count` seeded random samples.

    No polynomial override is passed: evaluation stays on the structured
    (cancellation-proof) form; the coefficient form is only as good as the
    monomial expansion.
    """
    base = jacobi_to_ghyp(spec) if spec.family == Family.JACOBI else spec
    rng = np.random.default_rng(seed)
    samples = residual_samples(base, count, rng)
    return max(abs(defining_equation_residual(base, s)) for s in samples)


def q_to_one_limit_check(spec: FamilySpec, q_near_1: float) -> float:
    """Coefficient deviation between the q-deformed and plain hypergeometric sums.

    `spec` is a ghyp-style instance whose alphas/betas act as exponents: the
    basic side uses parameters q^alpha_j, q^beta_k and argument scaled by
    (q-1)^(s-r).  Returns max_m |phi_m - F_m| / max(1, max|F_m|), which is
    O(|q-1|).  N = 0 is allowed here (both sides are the constant 1).
    """
    if not (0.0 < abs(q_near_1 - 1.0) <= 0.01):
        raise InvalidParameters("q must satisfy 0 < |q-1| <= 0.01")
    N = spec.N
    r, s = len(spec.alphas), len(spec.betas)
    q = float(q_near_1)
    f_side = np.zeros(N + 1, dtype=complex)
    phi_side = np.zeros(N + 1, dtype=complex)
    for m in range(N + 1):
        num = pochhammer(-N, m)
        for al in spec.alphas:
            num *= pochhammer(al, m)
        den = complex(math.factorial(m))
        for be in spec.betas:
            den *= pochhammer(be, m)
        f_side[m] = num / den

        qnum = q_pochhammer(q ** (-N), q, m)
        for al in spec.alphas:
            qnum *= q_pochhammer(q ** complex(al), q, m)
        qden = q_pochhammer(q, q, m)
        for be in spec.betas:
            qden *= q_pochhammer(q ** complex(be), q, m)
        sign = (-1) ** (m * (s - r))
        phase = sign * q ** ((m * (m - 1) // 2) * (s - r))
        phi_side[m] = qnum / qden * phase * (q - 1.0) ** ((s - r) * m)
    dev = np.max(np.abs(phi_side - f_side))
    return float(dev / max(1.0, float(np.max(np.abs(f_side)))))
