"""Solvable zero dynamics: coefficient systems, nonlinear systems, RK4, oracle.

Variable conventions for the dynamics (differ from the natural polynomial
variable for two families):

  ghyp, gbasic  z   (same as the polynomial)
  wilson        x, with z = x^2
  racah         y, with z = y^2 - theta^2
  aw            x   (same as the polynomial)
  qracah        z   (same as the polynomial)
  jacobi        x, pushed forward from the equivalent ghyp z-dynamics

The coefficient systems carry a `time_factor` (1, or i for Wilson/Racah, as
their displays prescribe): cdot = time_factor * (A c + h).  Trajectories are
complex throughout; no realness is assumed anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as npp

from . import families as fam
from .errors import (
    BasisIllConditioned,
    Collision,
    DivideByZeroVariable,
    InvalidParameters,
    NonConvergence,
    SingularA,
)
from .matrices import basic_f
from .numeric import Poly, ZeroSet, elementary_coeffs_basic, elementary_coeffs_hyp, poly_roots

_TINY = 1e-300
COLLISION_REL = 1e-9       # pairwise separation guard during integration
X_GUARD = 1e-6             # Wilson/Racah: |x_n| (resp. |y_n|) must stay above this
RK4_FALLBACK_STEP = 1e-4   # solve_c fallback when triangular eigenvalues collide
PIVOT_TOL = 1e-12


@dataclass
class CSystem:
    """Linear coefficient system cdot = time_factor * (A c + h) for c_1..c_N."""

    A: np.ndarray
    h: np.ndarray
    time_factor: complex
    diagonal: bool


@dataclass
class TrajectoryRecord:
    """Time grid plus matched ODE / algebraic-oracle zero trajectories."""

    times: np.ndarray
    ode_zeros: np.ndarray
    oracle_zeros: np.ndarray
    max_deviation: float


# ---------------------------------------------------------------------------
# Coefficient systems
# ---------------------------------------------------------------------------

def c_system(spec: fam.FamilySpec) -> CSystem:
    """The family's linear system for the coefficients c_1..c_N (c_0 = 1 fixed).

    ghyp/gbasic are lower bidiagonal with an affine drive from c_0; the four
    named families are diagonal in their polynomial bases.  The diagonal of A
    always equals the closed-form spectrum.
    """
    fam.validate_spec(spec)
    if spec.family == fam.Family.JACOBI:
        return c_system(fam.jacobi_to_ghyp(spec))
    N = spec.N
    A = np.zeros((N, N), dtype=complex)
    h = np.zeros(N, dtype=complex)
    f = spec.family
    if f == fam.Family.GHYP:
        for m in range(1, N + 1):
            diag = complex(m)
            for be in spec.betas:
                diag *= be - 1.0 + m
            A[m - 1, m - 1] = diag
            sub = complex(N + 1 - m)
            for al in spec.alphas:
                sub *= al - 1.0 + m
            if m == 1:
                h[0] = sub
            else:
                A[m - 1, m - 2] = sub
        return CSystem(A=A, h=h, time_factor=1.0 + 0.0j, diagonal=False)
    if f == fam.Family.GBASIC:
        q = spec.q
        r, s = len(spec.alphas), len(spec.betas)
        for m in range(1, N + 1):
            diag = -(q ** float((s - r) * (N - m))) * (q ** float(-m) - 1.0)
            for al in spec.alphas:
                diag *= al * q ** (N - m) - 1.0
            A[m - 1, m - 1] = diag
            sub = q ** (N - m + 1) - 1.0
            for be in spec.betas:
                sub *= be * q ** (N - m) - 1.0
            if m == 1:
                h[0] = sub
            else:
                A[m - 1, m - 2] = sub
        return CSystem(A=A, h=h, time_factor=1.0 + 0.0j, diagonal=False)

    m = np.arange(1, N + 1, dtype=complex)
    if f == fam.Family.WILSON:
        rates = m * (2 * N - m + sum(spec.alphas) - 1.0)
        tf = 1j
    elif f == fam.Family.RACAH:
        al, be = spec.alphas[0], spec.alphas[1]
        rates = m * (m - 2 * N - al - be - 1.0)
        tf = 1j
    elif f == fam.Family.AW:
        q = spec.q
        prod = np.prod(spec.alphas)
        rates = q ** float(-N) * (1.0 - q**m) * (1.0 - prod * q ** (2 * N - 1 - m))
        tf = 1.0 + 0.0j
    elif f == fam.Family.QRACAH:
        q = spec.q
        ab = spec.alphas[0] * spec.alphas[1]
        rates = q ** float(-N) * (1.0 - q**m) * (1.0 - ab * q ** (2 * N - m + 1))
        tf = 1.0 + 0.0j
    else:
        raise InvalidParameters(f"no coefficient system for {f!r}")
    np.fill_diagonal(A, rates)
    return CSystem(A=A, h=h, time_factor=tf, diagonal=True)


def solve_c(cs: CSystem, c0, t: float) -> np.ndarray:
    """Exact solution of cdot = time_factor (A c + h) at time t.

    Diagonal systems exponentiate componentwise.  Triangular systems use the
    modal expansion (exact while the diagonal is pairwise distinct), with the
    particular solution c_p = -A^(-1) h; near-confluent diagonals fall back to
    dense RK4 at a fixed small step.
    """
    c0 = np.asarray(c0, dtype=complex).ravel()
    n = len(c0)
    tau = cs.time_factor
    lam = np.diag(cs.A)
    if cs.diagonal:
        return c0 * np.exp(tau * lam * t)

    if np.any(np.abs(lam) < 1e-14) and np.any(np.abs(cs.h) > 0):
        raise SingularA("triangular A is singular while h != 0")
    sep = np.min(np.abs(lam[:, None] - lam[None, :]) + np.diag(np.full(n, np.inf)))
    scale = max(1.0, float(np.max(np.abs(lam))))
    if sep > 1e-9 * scale:
        cp = np.linalg.solve(cs.A, -cs.h)
        V = np.zeros((n, n), dtype=complex)
        for k in range(n):
            V[k, k] = 1.0
            for i in range(k + 1, n):
                V[i, k] = (cs.A[i, :i] @ V[:i, k]) / (lam[k] - lam[i])
        eta = np.linalg.solve(V, c0 - cp)
        return cp + V @ (eta * np.exp(tau * lam * t))

    steps = max(1, int(np.ceil(abs(t) / RK4_FALLBACK_STEP)))
    h_step = t / steps
    c = c0.copy()
    rhs = lambda v: tau * (cs.A @ v + cs.h)
    for _ in range(steps):
        k1 = rhs(c)
        k2 = rhs(c + 0.5 * h_step * k1)
        k3 = rhs(c + 0.5 * h_step * k2)
        k4 = rhs(c + h_step * k3)
        c = c + (h_step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return c


# ---------------------------------------------------------------------------
# Nonlinear right-hand sides
# ---------------------------------------------------------------------------

def _rhs_terms_ghyp(spec, z):
    a, b = elementary_coeffs_hyp(spec.alphas, spec.betas)
    p, qn = len(spec.alphas), len(spec.betas)
    from .matrices import fg_tables

    tab = fg_tables(z, max(qn + 1, max(p, 1)))
    terms = []
    for n in range(len(z)):
        row = [b[k - 1] * tab.f[k, n] for k in range(1, qn + 2)]
        row += [-a[j] * tab.g[j, n] for j in range(0, p + 1)]
        terms.append(row)
    return np.asarray(terms, dtype=complex)


def _rhs_terms_gbasic(spec, z):
    q = spec.q
    N = spec.N
    r, s = len(spec.alphas), len(spec.betas)
    a, b = elementary_coeffs_basic(spec.alphas, spec.betas)
    qn = q ** float(-N)
    sgn_s = (-1.0) ** (s + 1)
    sgn_r = (-1.0) ** r
    terms = []
    for n in range(len(z)):
        fn = lambda p: basic_f(q, p, z, n)
        row = [sgn_s * (q - 1.0) * fn(1)]
        row += [
            sgn_s
            * b[k - 1]
            * (-1.0) ** k
            / q**k
            * ((q ** (k + 1) - 1.0) * fn(k + 1) - (q**k - 1.0) * fn(k))
            for k in range(1, s + 1)
        ]
        row.append(
            sgn_r
            * z[n]
            * (qn * (q ** float(s - r + 1) - 1.0) * fn(s - r + 1) - (q ** float(s - r) - 1.0) * fn(s - r))
        )
        row += [
            sgn_r
            * z[n]
            * a[j - 1]
            * (-1.0) ** j
            * (
                qn * (q ** float(j + s + 1 - r) - 1.0) * fn(j + s + 1 - r)
                - (q ** float(j + s - r) - 1.0) * fn(j + s - r)
            )
            for j in range(1, r + 1)
        ]
        terms.append(row)
    return np.asarray(terms, dtype=complex)


def _rhs_terms_wilson(spec, x):
    if np.any(np.abs(x) < X_GUARD):
        raise DivideByZeroVariable("wilson dynamics needs |x_n| > 0")
    x2 = x * x

    def piece(xv, xv2):
        out = np.zeros(len(x), dtype=complex)
        for n in range(len(x)):
            prod = np.prod(
                [
                    (xv2[n] - xv2[m] - 1.0 - 2j * xv[n]) / (xv2[n] - xv2[m])
                    for m in range(len(x))
                    if m != n
                ]
            ) if len(x) > 1 else 1.0
            out[n] = fam.wilson_D(spec, xv[n]) / (2j * xv[n]) * prod
        return out

    e_plus = piece(x, x2)
    e_minus = piece(-x, x2)
    pref = -1j / (2.0 * x)
    return np.stack([pref * e_plus, pref * e_minus], axis=1)


def _rhs_terms_racah(spec, y):
    if np.any(np.abs(y) < X_GUARD):
        raise DivideByZeroVariable("racah dynamics needs |y_n| > 0")
    y2 = y * y

    def piece(yv, yv2):
        out = np.zeros(len(y), dtype=complex)
        for n in range(len(y)):
            prod = np.prod(
                [
                    1.0 + (1.0 + 2.0 * yv[n]) / (yv2[n] - yv2[m])
                    for m in range(len(y))
                    if m != n
                ]
            ) if len(y) > 1 else 1.0
            out[n] = fam.racah_Dtilde(spec, yv[n]) * (2.0 * yv[n] + 1.0) * prod
        return out

    e_plus = piece(y, y2)
    e_minus = piece(-y, y2)
    pref = -1j / (2.0 * y)
    return np.stack([pref * e_plus, pref * e_minus], axis=1)


def _rhs_terms_aw(spec, x):
    q = spec.q
    z = x + np.sqrt(x * x - 1.0)

    def piece(zv):
        out = np.zeros(len(x), dtype=complex)
        for n in range(len(x)):
            prod = np.prod(
                [fam.aw_K(q, zv[n], zv[m]) for m in range(len(x)) if m != n]
            ) if len(x) > 1 else 1.0
            out[n] = fam.aw_G(spec, zv[n]) * prod
        return out

    pref = (q - 1.0) / (2.0 * q ** float(spec.N))
    return np.stack([pref * piece(z), pref * piece(1.0 / z)], axis=1)


def _rhs_terms_qracah(spec, z):
    out = np.zeros((len(z), 2), dtype=complex)
    for n in range(len(z)):
        zp = fam.qracah_shift(spec, z[n], +1)
        zm = fam.qracah_shift(spec, z[n], -1)
        prod_p = np.prod(
            [(zp - z[m]) / (z[n] - z[m]) for m in range(len(z)) if m != n]
        ) if len(z) > 1 else 1.0
        prod_m = np.prod(
            [(zm - z[m]) / (z[n] - z[m]) for m in range(len(z)) if m != n]
        ) if len(z) > 1 else 1.0
        out[n, 0] = fam.qracah_B(spec, z[n]) * (zp - z[n]) * prod_p
        out[n, 1] = fam.qracah_D(spec, z[n]) * (zm - z[n]) * prod_m
    return out


def _rhs_terms_jacobi(spec, x):
    gh = fam.jacobi_to_ghyp(spec)
    zvar = 2.0 / (1.0 - x)
    terms = _rhs_terms_ghyp(gh, zvar)
    # pushforward: x = 1 - 2/z, so xdot = (2/z^2) zdot, applied termwise
    return terms * (2.0 / zvar**2)[:, None]


_RHS_BUILDERS = {
    fam.Family.GHYP: _rhs_terms_ghyp,
    fam.Family.GBASIC: _rhs_terms_gbasic,
    fam.Family.WILSON: _rhs_terms_wilson,
    fam.Family.RACAH: _rhs_terms_racah,
    fam.Family.AW: _rhs_terms_aw,
    fam.Family.QRACAH: _rhs_terms_qracah,
    fam.Family.JACOBI: _rhs_terms_jacobi,
}


def _check_separation(z: np.ndarray) -> None:
    if len(z) < 2:
        return
    diff = np.abs(z[:, None] - z[None, :])
    np.fill_diagonal(diff, np.inf)
    if diff.min() < COLLISION_REL * max(1.0, float(np.max(np.abs(z)))):
        raise Collision(f"pairwise separation fell below {COLLISION_REL:g} * scale")


def rhs_terms(spec: fam.FamilySpec, z) -> np.ndarray:
    """Per-component additive terms of the zero dynamics, shape (N, n_terms)."""
    z = np.asarray(z, dtype=complex).ravel()
    _check_separation(z)
    return _RHS_BUILDERS[spec.family](spec, z)


def nonlinear_rhs(spec: fam.FamilySpec, z) -> np.ndarray:
    """Right-hand side of the family's zero dynamics, in the dynamics variable."""
    return rhs_terms(spec, z).sum(axis=1)


def equilibrium_residual_per_zero(spec: fam.FamilySpec, zeros_natural) -> np.ndarray:
    """Per-zero dynamics residual at natural-variable zeros, term-normalized."""
    z = np.asarray(zeros_natural, dtype=complex).ravel()
    if spec.family in fam.LIFTED_FAMILIES:
        z = fam.lift_zero_variables(spec, ZeroSet(z, np.inf, 0.0)).zeros
    terms = rhs_terms(spec, z)
    scale = np.maximum(np.max(np.abs(terms), axis=1), _TINY)
    return terms.sum(axis=1) / scale


def equilibrium_residual(spec: fam.FamilySpec, zs) -> float:
    """Max-norm of the normalized dynamics residual at natural-variable zeros."""
    z = zs.zeros if isinstance(zs, ZeroSet) else zs
    return float(np.max(np.abs(equilibrium_residual_per_zero(spec, z))))


def to_dynamics_variable(spec: fam.FamilySpec, zeros_natural: np.ndarray) -> np.ndarray:
    """Map natural-variable zeros to the dynamics variable (lift where needed)."""
    z = np.asarray(zeros_natural, dtype=complex).ravel()
    if spec.family in fam.LIFTED_FAMILIES:
        return fam.lift_zero_variables(spec, ZeroSet(z, np.inf, 0.0)).zeros
    if spec.family == fam.Family.JACOBI:
        return z  # jacobi zeros are already in x
    return z


# ---------------------------------------------------------------------------
# Fixed-step integration
# ---------------------------------------------------------------------------

def integrate(spec: fam.FamilySpec, z0, t1: float, steps: int, record_every: int = 1):
    """Classical RK4 at fixed step h = t1/steps, with collision guards.

    Returns (times, trajectory) where trajectory[k] is the state at times[k];
    states are recorded every `record_every` steps (first and last always).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    z = np.asarray(z0, dtype=complex).ravel().copy()
    h = t1 / steps
    times = [0.0]
    traj = [z.copy()]
    rhs = lambda v: nonlinear_rhs(spec, v)
    for k in range(1, steps + 1):
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * h * k1)
        k3 = rhs(z + 0.5 * h * k2)
        k4 = rhs(z + h * k3)
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        _check_separation(z)
        if k % record_every == 0 or k == steps:
            times.append(k * h)
            traj.append(z.copy())
    return np.asarray(times), np.asarray(traj)


# ---------------------------------------------------------------------------
# Algebraic oracle
# ---------------------------------------------------------------------------

def _basis_matrix(spec: fam.FamilySpec) -> np.ndarray:
    """Columns j = 0..N: coefficients (ascending, length N+1) of the degree-(N-j)
    basis polynomial in the oracle variable (u = x^2 / y^2 for wilson/racah)."""
    N = spec.N
    B = np.zeros((N + 1, N + 1), dtype=complex)
    f = spec.family
    if f in (fam.Family.GHYP, fam.Family.GBASIC):
        for j in range(N + 1):
            B[N - j, j] = 1.0
        return B
    for j in range(N + 1):
        deg = N - j
        if deg == 0:
            B[0, j] = 1.0
            continue
        sub = fam.make_spec(f, deg, spec.alphas, spec.betas, spec.q)
        p = fam.build_polynomial(sub)
        if f == fam.Family.WILSON:
            p = p.monic()
        elif f == fam.Family.RACAH:
            p = p.monic().compose_affine(-fam.racah_theta(spec) ** 2, 1.0)
        B[: deg + 1, j] = p.coeffs
    return B


def _expand_on_basis(B: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Solve target = sum_j c_j * B[:, j] by leading-term elimination."""
    N = B.shape[0] - 1
    resid = target.astype(complex).copy()
    c = np.zeros(N + 1, dtype=complex)
    for j in range(N + 1):
        deg = N - j
        pivot = B[deg, j]
        # the elimination is only trustworthy while each head dominates its column
        if abs(pivot) < PIVOT_TOL * max(1.0, float(np.max(np.abs(B[:, j])))):
            raise BasisIllConditioned(f"basis pivot |{abs(pivot):.3e}| at degree {deg}")
        c[j] = resid[deg] / pivot
        resid -= c[j] * B[:, j]
    return c


def _match_order(candidates: np.ndarray, previous: np.ndarray) -> np.ndarray:
    """Order `candidates` by greedy nearest-neighbor continuity with `previous`."""
    cand = list(candidates)
    out = np.empty(len(previous), dtype=complex)
    for i, p in enumerate(previous):
        j = int(np.argmin([abs(cv - p) for cv in cand]))
        out[i] = cand.pop(j)
    return out


def _sqrt_continuous(u: np.ndarray, previous: np.ndarray) -> np.ndarray:
    """Per-component square root with the sign chosen nearest to `previous`."""
    r = np.sqrt(u.astype(complex))
    flip = np.abs(-r - previous) < np.abs(r - previous)
    return np.where(flip, -r, r)


def algebraic_trajectory(spec: fam.FamilySpec, z0, times) -> np.ndarray:
    """Zeros of the exactly evolved polynomial at each time, continuity-matched.

    `z0` is the start in the dynamics variable.  Steps: (1) expand the initial
    monic polynomial on the family basis, (2) evolve the coefficients with the
    exact linear flow, (3) re-assemble and take roots, (4) map back through the
    square root where the dynamics runs in a lifted variable, (5) order each
    time slice by continuity with the previous one.
    """
    if spec.family == fam.Family.JACOBI:
        gh = fam.jacobi_to_ghyp(spec)
        ztraj = algebraic_trajectory(gh, 2.0 / (1.0 - np.asarray(z0, dtype=complex)), times)
        return 1.0 - 2.0 / ztraj
    z0 = np.asarray(z0, dtype=complex).ravel()
    B = _basis_matrix(spec)
    lifted = spec.family in fam.LIFTED_FAMILIES
    u0 = z0 * z0 if lifted else z0
    target = npp.polyfromroots(u0)
    if spec.family in (fam.Family.AW, fam.Family.QRACAH):
        target = target * B[spec.N, 0]  # match the basis head's leading coefficient
    c_full = _expand_on_basis(B, target)
    cs = c_system(spec)
    out = np.empty((len(times), len(z0)), dtype=complex)
    prev = z0
    prev_u = u0
    for k, t in enumerate(times):
        c_t = solve_c(cs, c_full[1:], float(t))
        coeffs = B @ np.concatenate([[c_full[0]], c_t])
        poly_t = Poly(coeffs)
        if poly_t.degree != len(z0):
            # exploding modes pushed the leading coefficient below trim level
            raise NonConvergence(
                f"coefficient dynamic range exhausted at t = {t:g} "
                f"(polynomial degree {poly_t.degree} < N = {len(z0)})"
            )
        roots = poly_roots(poly_t, tol=1e-9, max_iter=400).zeros
        if lifted:
            u_t = _match_order(roots, prev_u)
            z_t = _sqrt_continuous(u_t, prev)
            prev_u = u_t
        else:
            z_t = _match_order(roots, prev)
        out[k] = z_t
        prev = z_t
    return out


def algebraic_solution(spec: fam.FamilySpec, z0, t: float) -> np.ndarray:
    """One-shot oracle: zeros at time t, matched by continuity with z0."""
    return algebraic_trajectory(spec, z0, [t])[0]


def evolve_compare(
    spec: fam.FamilySpec,
    z0,
    t1: float,
    steps: int,
    record_every: int = 1,
) -> TrajectoryRecord:
    """Integrate the nonlinear system and compare against the algebraic oracle.

    The per-time deviation is the matched multiset distance (normalized by
    max(1, oracle magnitude), as in `multiset_match`); max_deviation is its
    maximum over the recorded grid.
    """
    from .numeric import multiset_match

    times, ode = integrate(spec, z0, t1, steps, record_every=record_every)
    oracle = algebraic_trajectory(spec, z0, times)
    dev = max(multiset_match(ode[k], oracle[k]) for k in range(len(times)))
    return TrajectoryRecord(
        times=times, ode_zeros=ode, oracle_zeros=oracle, max_deviation=float(dev)
    )


def linearization_matrix(spec: fam.FamilySpec, z, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of the dynamics RHS at `z`."""
    z = np.asarray(z, dtype=complex).ravel()
    n = len(z)
    J = np.zeros((n, n), dtype=complex)
    for m in range(n):
        e = np.zeros(n, dtype=complex)
        e[m] = h
        J[:, m] = (nonlinear_rhs(spec, z + e) - nonlinear_rhs(spec, z - e)) / (2.0 * h)
    return J
