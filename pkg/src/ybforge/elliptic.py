"""Elliptic r- and R-matrices of the exceptional cyclic case (sl(2)).

The classical series is the resummed geometric family of the deformation
grades; the quantum object is the infinite product of elementary 8-vertex
factors applied to the standard trigonometric R-matrix of the evaluation
representation.  Jacobi elliptic functions (theta series, nome via the
arithmetic-geometric mean) provide the independent oracle for the
cross-ratio identity of the product matrix entries.

Spectral conventions: legs carry lam and mu; the square root of the leg
ratio is realized by the symbols l, m with lam = l^2, mu = m^2, so that
every coefficient stays a Laurent monomial.
"""

from __future__ import annotations

import cmath
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .classical import C_ELEM, D_ELEM, MC, LieTensor, transpose_spectral
from .errors import (
    ConvergenceFailure,
    EpsilonOutOfDisc,
    NonConvergent,
)
from .scalars import ONE, ZERO, Scalar, rat, sym


# ---------------------------------------------------------------------------
# classical elliptic series (section 7 families)
# ---------------------------------------------------------------------------

def elliptic_family_tables(eps: Scalar, m: int, terms: int):
    """Per-grade coefficient families before resummation:

        A^m_n = (-eps^{2n})^m,  B^m_n = (eps^{2n-1})^m (m even, else 0),
        C^m_n = (eps^{2n-1})^m (m odd, else 0),   n = 1..terms.
    """
    A = [(-(eps ** (2 * n))) ** m for n in range(1, terms + 1)]
    if m % 2 == 0:
        B = [(eps ** (2 * n - 1)) ** m for n in range(1, terms + 1)]
        C = [ZERO] * terms
    else:
        B = [ZERO] * terms
        C = [(eps ** (2 * n - 1)) ** m for n in range(1, terms + 1)]
    return A, B, C


def _sigma3_pair() -> LieTensor:
    t = {}
    for i, si in ((0, 1), (1, -1)):
        for j, sj in ((0, 1), (1, -1)):
            t[(MC(i, i), MC(j, j))] = rat(si * sj)
    return LieTensor(2, t)


def elliptic_r_series(
    eps: Scalar,
    terms: int,
    names: Tuple[str, str] = ("l", "m"),
) -> LieTensor:
    """Partial sums of the elliptic deformation r_eps = r + X - X^t.

    eps must be a Scalar (use rat(...) for numeric values; |eps| < 1 for
    convergence of the resummed coefficients).  The legs carry the square
    root symbols names = (l, m) with lam = l^2, mu = m^2; x = l/m.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    ev = eps.is_rational()
    if ev is not None and abs(ev) >= 1:
        raise EpsilonOutOfDisc("|eps| must be < 1")
    l, mm = sym(names[0]), sym(names[1])
    x = l / mm
    s3 = _sigma3_pair()
    f1_f1 = LieTensor(2, {(MC(0, 1), MC(1, 0)): ONE})
    f0_f0 = LieTensor(2, {(MC(1, 0), MC(0, 1)): (l ** 2) * (mm ** -2)})
    f1_f0 = LieTensor(2, {(MC(0, 1), MC(0, 1)): mm ** -2})
    f0_f1 = LieTensor(2, {(MC(1, 0), MC(1, 0)): l ** 2})
    X = LieTensor(2, {})
    for n in range(1, terms + 1):
        e2n = eps ** (2 * n)
        a = -(e2n / (ONE + e2n)) * x ** (-2 * n)
        X = X + s3.scale(a)
        e4 = eps ** (4 * n - 2)
        b = (e4 / (ONE - e4)) * x ** (2 * (1 - n))
        X = X + (f1_f1 + f0_f0).scale(b)
        c = ((eps ** (2 * n - 1)) / (ONE - e4)) * x ** (2 * (1 - n))
        X = X + (f1_f0 + f0_f1).scale(c)
    # trigonometric base (2.15) in the same square-root coordinates:
    # phi = sigma3 (x) sigma3 / 4, E_- (x) E_+ + xbar/(1-xbar) C, xbar = mu/lam
    xbar = (mm ** 2) * (l ** -2)
    phi = s3.scale(rat(1, 4))
    lower = LieTensor(2, {(MC(1, 0), MC(0, 1)): ONE})
    C = s3.scale(rat(1, 2)) + LieTensor(
        2, {(MC(1, 0), MC(0, 1)): ONE, (MC(0, 1), MC(1, 0)): ONE}
    )
    r = phi + lower + C.scale(xbar / (ONE - xbar))
    return r + X - transpose_spectral(X, names)


def lie2_to_matrix(t: LieTensor, assignment: Dict[str, complex]) -> np.ndarray:
    """Numeric 4x4 (2x2 legs) image of a two-leg LieTensor."""
    out = np.zeros((4, 4), dtype=complex)
    for (a, b), v in t.terms.items():
        if a[0] != "m" or b[0] != "m":
            raise ValueError("matrix evaluation needs matrix-unit legs")
        m1 = np.zeros((2, 2), dtype=complex)
        m1[a[1], a[2]] = 1
        m2 = np.zeros((2, 2), dtype=complex)
        m2[b[1], b[2]] = 1
        out += complex(v.evaluate(assignment)) * np.kron(m1, m2)
    return out


def elliptic_cybe_residual_numeric(
    eps_value: complex,
    terms: int,
    lam: complex,
    mu: complex,
    nu: complex,
) -> float:
    """Max-entry CYBE residual of the partial-sum elliptic r at a numeric point."""
    from fractions import Fraction

    e = rat(Fraction(eps_value).limit_denominator(10 ** 9)) if isinstance(
        eps_value, float
    ) else rat(eps_value)
    r = elliptic_r_series(e, terms)

    def mat(s1, s2):
        return lie2_to_matrix(r, {"l": s1, "m": s2})

    sl, sm, sn = [cmath.sqrt(z) for z in (lam, mu, nu)]
    r12 = np.kron(mat(sl, sm), np.eye(2))
    r13 = _lift13(mat(sl, sn))
    r23 = np.kron(np.eye(2), mat(sm, sn))
    res = (
        _comm(r12, r13) + _comm(r12, r23) + _comm(r13, r23)
    )
    return float(np.max(np.abs(res)))


def _comm(a, b):
    return a @ b - b @ a


def _lift13(m4: np.ndarray) -> np.ndarray:
    out = np.zeros((8, 8), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    for p in range(2):
                        out[4 * i + 2 * p + j, 4 * k + 2 * p + l] += m4[2 * i + j, 2 * k + l]
    return out


# ---------------------------------------------------------------------------
# the quantum elliptic R-matrix as an infinite product (section 7)
# ---------------------------------------------------------------------------

_P4 = np.zeros((4, 4))
for _i in range(2):
    for _j in range(2):
        _P4[2 * _i + _j, 2 * _j + _i] = 1.0


def factor_matrix(j: int, eps: complex, q: complex, x: complex) -> np.ndarray:
    """The j-th elementary 8-vertex factor in the paper's display gauge.

    Odd j = 2m-1: a = 1 - eps^{2j}, b = 1 - eps^{2j} q^2/x, c = 0,
                  d = eps^j (1/q - q) / sqrt(x).
    Even j = 2m:  a = 1 - eps^{2j} q^2/x, b = 1 - eps^{2j}/x,
                  c = eps^j (1/q - q) / sqrt(x), d = 0.
    """
    sx = cmath.sqrt(x)
    e = eps ** j
    if j % 2 == 1:
        a = 1 - eps ** (2 * j)
        b = 1 - eps ** (2 * j) * q ** 2 / x
        c = 0.0
        d = e * (1 / q - q) / sx
    else:
        a = 1 - eps ** (2 * j) * q ** 2 / x
        b = 1 - eps ** (2 * j) / x
        c = e * (1 / q - q) / sx
        d = 0.0
    return np.array(
        [
            [a, 0, 0, d],
            [0, b, c, 0],
            [0, c, b, 0],
            [d, 0, 0, a],
        ],
        dtype=complex,
    )


# -- elementary factors solved from the recursion (7.5) ----------------------

def _eval_images(q: complex, s: complex):
    """Rescaled-generator and Cartan images in the 2-dim evaluation rep at
    spectral value s (homogeneous picture): f_1 = K^1 e_1, f_0 = K^0 e_0,
    f_{-1} = e_{-1} K_1, f_{-0} = e_{-0} K_0."""
    up = np.array([[0, 1], [0, 0]], dtype=complex)
    dn = np.array([[0, 0], [1, 0]], dtype=complex)
    qf = q - 1 / q
    return {
        "f1": (1 / q) * up,
        "f0": (s / q) * dn,
        "fm1": (q * qf) * dn,
        "fm0": (q * qf / s) * up,
        "K1low": np.diag([q, 1 / q]).astype(complex),
        "K0low": np.diag([1 / q, q]).astype(complex),
        "K1up": np.diag([1 / q, q]).astype(complex),
        "K0up": np.diag([q, 1 / q]).astype(complex),
    }


def solve_factor(m: int, eps: complex, q: complex, lam: complex, mu: complex) -> np.ndarray:
    """F^m in the evaluation reps (lam, mu), solved from (7.5).

    The recursion pins F^m up to one overall scalar (certified by a
    one-dimensional numeric nullspace); for large m, where eps^{2m} is
    below double precision, the exact first-order form
    F^m = 1 - eps^m sum_sigma f_sigma (x) f_{-tau^m sigma} is used
    instead.  The scalar ambiguity cancels in (F^t)^{-1} R F.
    """
    im1, im2 = _eval_images(q, lam), _eval_images(q, mu)
    if (abs(eps) ** (2 * m)) < 1e-14:
        G1 = np.zeros((4, 4), dtype=complex)
        for sig in (1, 0):
            t = sig if m % 2 == 0 else 1 - sig
            G1 -= np.kron(im1[f"f{sig}"], im2[f"fm{t}"])
        return np.eye(4, dtype=complex) + (eps ** m) * G1
    I2 = np.eye(2, dtype=complex)
    rows = []
    for sig in (1, 0):
        t = sig if m % 2 == 0 else 1 - sig
        A = np.kron(I2, im2[f"f{sig}"])
        B = (eps ** m) * np.kron(im1[f"f{t}"], im2[f"K{sig}low"])
        C = (eps ** m) * np.kron(im1[f"f{t}"], im2[f"K{sig}up"])
        rows.append(np.kron(A + B, np.eye(4)) - np.kron(np.eye(4), (A + C).T))
    _, s, vh = np.linalg.svd(np.vstack(rows))
    if int(np.sum(s < s[0] * 1e-10)) != 1:
        raise NonConvergent(f"factor recursion at m={m} is not rank-deficient by 1")
    F = vh[-1].conj().reshape(4, 4)
    return F / (np.trace(F) / 4)


def trig_R_fundamental(q: complex, x: complex) -> np.ndarray:
    """Standard trigonometric R for the affine sl(2) evaluation reps.

    Solved numerically from the intertwining relations
    Delta(g) R = R Delta'(g) for g in {e_{+-1}, e_{+-0}}, normalized to 1
    on the highest-weight product vector.  x = lam/mu; only the ratio of
    the leg spectral parameters enters.
    """
    qf = q - 1 / q
    lam = cmath.sqrt(x)
    mu = 1 / cmath.sqrt(x)
    up = np.array([[0, 1], [0, 0]], dtype=complex)
    dn = np.array([[0, 0], [1, 0]], dtype=complex)
    K1 = np.diag([q, 1 / q]).astype(complex)
    K0 = np.diag([1 / q, q]).astype(complex)

    def images(s):
        return {
            "e1": up, "f1": qf * dn,
            "e0": s * dn, "f0": (qf / s) * up,
            "K1": K1, "K0": K0,
        }

    im1, im2 = images(lam), images(mu)
    I2 = np.eye(2, dtype=complex)
    mats = []
    for name, Kname in (("e1", "K1"), ("e0", "K0")):
        # Delta(e_a) = 1 (x) e_a + e_a (x) K_a;  Delta' is the flip
        D = np.kron(I2, im2[name]) + np.kron(im1[name], im2[Kname])
        Dp = np.kron(im1[name], I2) + np.kron(im1[Kname], im2[name])
        mats.append((D, Dp))
    for name, Kname in (("f1", "K1"), ("f0", "K0")):
        # Delta(e_{-a}) = e_{-a} (x) 1 + K_a^{-1} (x) e_{-a}
        D = np.kron(im1[name], I2) + np.kron(np.linalg.inv(im1[Kname]), im2[name])
        Dp = np.kron(I2, im2[name]) + np.kron(im1[name], np.linalg.inv(im2[Kname]))
        mats.append((D, Dp))
    rows = [np.kron(D, np.eye(4)) - np.kron(np.eye(4), Dp.T) for D, Dp in mats]
    A = np.vstack(rows)
    _, s, vh = np.linalg.svd(A)
    nullity = int(np.sum(s < s[0] * 1e-9))
    if nullity != 1:
        raise NonConvergent(f"intertwiner space has numeric dimension {nullity}")
    R = vh[-1].conj().reshape(4, 4)
    if abs(R[0, 0]) < 1e-12:
        raise NonConvergent("intertwiner vanishes on the highest-weight vector")
    return R / R[0, 0]


def trig_R_principal(q: complex, x: complex) -> np.ndarray:
    """The trigonometric R in the principal (symmetric) gauge.

    The basis rescaling v_1 -> lam^{-1/2} v_1 per leg (the matrix form of
    the renormalization f_1 -> sqrt(lam) e_12) symmetrizes the two c
    entries; this is the gauge in which the elementary elliptic factors
    are written.
    """
    R = trig_R_fundamental(q, x)
    g = np.diag([1, 1, 1 / cmath.sqrt(x), 1 / cmath.sqrt(x)]).astype(complex)
    return g @ R @ np.linalg.inv(g)


_DISPLAY_SIGN = np.diag([1.0, 1.0, 1.0, -1.0])


def elliptic_R_product(
    eps: complex, q: complex, x: complex, M: int
) -> np.ndarray:
    """R_eps = (F^t)^{-1} R F with F = F^1 F^2 ... F^{2M} (M factor pairs).

    The factors are solved from (7.5) in the evaluation reps at spectral
    values (x, 1); F^t is the leg flip (swap matrix conjugation plus the
    exchange of the two spectral values).  The output is rotated into the
    display gauge: principal-picture basis plus the diagonal sign that
    matches the paper's corner convention.  The truncation keeps M
    odd/even factor pairs; the first omitted factor deviates from the
    identity by O(eps^{2M+1}).
    """
    if abs(eps) >= 1:
        raise EpsilonOutOfDisc("|eps| < 1 is required for the infinite product")
    if M < 1:
        raise ValueError("M must be >= 1")
    lam, mu = x, 1.0 + 0j
    F = np.eye(4, dtype=complex)
    Fsw = np.eye(4, dtype=complex)
    for j in range(1, 2 * M + 1):
        F = F @ solve_factor(j, eps, q, lam, mu)
        Fsw = Fsw @ solve_factor(j, eps, q, mu, lam)
    Ft = _P4 @ Fsw @ _P4
    R = np.linalg.solve(Ft, trig_R_fundamental(q, x) @ F)
    g = np.diag([1, 1, 1 / cmath.sqrt(x), 1 / cmath.sqrt(x)]).astype(complex)
    Rp = g @ R @ np.linalg.inv(g)
    return _DISPLAY_SIGN @ Rp @ _DISPLAY_SIGN


def eight_vertex_entries(R: np.ndarray, tol: float = 1e-9):
    """(a, b, c, d) of an 8-vertex matrix; raises if the zero pattern fails."""
    pattern_zero = [
        (0, 1), (0, 2), (1, 0), (1, 3), (2, 0), (2, 3), (3, 1), (3, 2),
    ]
    scale = float(np.max(np.abs(R)))
    for (i, j) in pattern_zero:
        if abs(R[i, j]) > tol * scale:
            raise NonConvergent(f"entry {(i, j)} breaks the 8-vertex pattern")
    return R[0, 0], R[1, 1], R[1, 2], R[0, 3]


# ---------------------------------------------------------------------------
# Jacobi elliptic functions: theta series, nome via AGM
# ---------------------------------------------------------------------------

def agm(a: complex, b: complex, tol: float = 1e-15, maxit: int = 64) -> complex:
    for _ in range(maxit):
        if abs(a - b) <= tol * max(1.0, abs(a)):
            return (a + b) / 2
        a, b = (a + b) / 2, cmath.sqrt(a * b)
    raise ConvergenceFailure("AGM did not converge")


def _thetas(v: complex, nome: complex, nterms: int = 24):
    t1 = 0j
    t2 = 0j
    t3 = 1 + 0j
    t4 = 1 + 0j
    for n in range(nterms):
        qh = nome ** ((n + 0.5) ** 2)
        t1 += 2 * ((-1) ** n) * qh * cmath.sin((2 * n + 1) * v)
        t2 += 2 * qh * cmath.cos((2 * n + 1) * v)
        if n >= 1:
            qn = nome ** (n * n)
            t3 += 2 * qn * cmath.cos(2 * n * v)
            t4 += 2 * ((-1) ** n) * qn * cmath.cos(2 * n * v)
    return t1, t2, t3, t4


def jacobi_from_nome(v: complex, nome: complex):
    """(sn, cn, dn) at theta argument v (u = theta3(0)^2 * v)."""
    if abs(nome) >= 1:
        raise ConvergenceFailure("|nome| < 1 required")
    t1, t2, t3, t4 = _thetas(v, nome)
    z1, z2, z3, z4 = _thetas(0.0, nome)
    sn = (z3 / z2) * (t1 / t4)
    cn = (z4 / z2) * (t2 / t4)
    dn = (z4 / z3) * (t3 / t4)
    return sn, cn, dn


def nome_from_modulus(k: complex) -> complex:
    kp = cmath.sqrt(1 - k * k)
    K = cmath.pi / (2 * agm(1, kp))
    Kp = cmath.pi / (2 * agm(1, k))
    return cmath.exp(-cmath.pi * Kp / K)


def jacobi_elliptic(u: complex, k: complex):
    """(sn, cn, dn)(u, k) via AGM nome and theta series.

    Validated by the identities sn^2 + cn^2 = 1 and dn^2 + k^2 sn^2 = 1 to
    better than 1e-12 in the standard convergence region |k| < 1.
    """
    if k == 0:
        return cmath.sin(u), cmath.cos(u), 1.0 + 0j
    nome = nome_from_modulus(k)
    kp = cmath.sqrt(1 - k * k)
    K = cmath.pi / (2 * agm(1, kp))
    v = cmath.pi * u / (2 * K)
    return jacobi_from_nome(v, nome)


# ---------------------------------------------------------------------------
# cross-ratio fit of the product matrix against the Jacobi oracle
# ---------------------------------------------------------------------------

def product_cross_ratios(eps: complex, q: complex, u: complex, M: int):
    """(a+d, b+c, b-c)/(a-d) of R_eps at x = exp(2 pi i u)."""
    x = cmath.exp(2j * cmath.pi * u)
    R = elliptic_R_product(eps, q, x, M)
    a, b, c, d = eight_vertex_entries(R)
    return (
        (a + d) / (a - d),
        (b + c) / (a - d),
        (b - c) / (a - d),
    )


def jacobi_cross_ratios(u: complex, rho: complex, nome: complex):
    """dn, cn, sn ratios at theta arguments (pi/2)(u +- rho)."""
    vp = cmath.pi * (u + rho) / 2
    vm = cmath.pi * (u - rho) / 2
    sp, cp, dp = jacobi_from_nome(vp, nome)
    sm, cm, dm = jacobi_from_nome(vm, nome)
    return dp / dm, cp / cm, sp / sm


def fit_elliptic_parameters(
    eps: complex,
    q: complex,
    M: int,
    u_points: Sequence[complex] = (0.11, 0.23),
    guess: Optional[Tuple[complex, complex]] = None,
    iterations: int = 60,
):
    """Fit (nome, rho) so the product cross-ratios match the Jacobi ratios.

    Newton iteration on the dn and sn equations at two sample points; the
    caller verifies the full identity at independent points afterwards.
    The converged values are nome = -eps and rho = i log(q)/pi.
    """
    if guess is None:
        guess = (-complex(eps), 1j * cmath.log(complex(q)) / cmath.pi)
    params = np.array(
        [guess[0].real, guess[0].imag, guess[1].real, guess[1].imag], dtype=float
    )
    targets = []
    for u in u_points:
        A, B, C = product_cross_ratios(eps, q, u, M)
        targets.append((u, A, C))

    def residual(p):
        nome = complex(p[0], p[1])
        rho = complex(p[2], p[3])
        out = []
        for (u, A, C) in targets:
            try:
                dnr, cnr, snr = jacobi_cross_ratios(u, rho, nome)
            except ConvergenceFailure:
                return None
            out.extend([(dnr - A).real, (dnr - A).imag, (snr - C).real, (snr - C).imag])
        return np.array(out)

    for _ in range(iterations):
        r0 = residual(params)
        if r0 is None:
            raise ConvergenceFailure("fit wandered outside the nome disc")
        if np.max(np.abs(r0)) < 1e-13:
            break
        J = np.zeros((len(r0), 4))
        for k in range(4):
            dp = np.zeros(4)
            dp[k] = 1e-7
            r1 = residual(params + dp)
            if r1 is None:
                raise ConvergenceFailure("fit wandered outside the nome disc")
            J[:, k] = (r1 - r0) / 1e-7
        step, *_ = np.linalg.lstsq(J, -r0, rcond=None)
        params = params + step
    nome = complex(params[0], params[1])
    rho = complex(params[2], params[3])
    return nome, rho


def verify_elliptic_ratios(
    eps: complex,
    q: complex,
    M: int,
    nome: complex,
    rho: complex,
    u_values: Sequence[complex],
) -> List[float]:
    """Absolute deviations of all three cross-ratios at each u."""
    devs = []
    for u in u_values:
        A, B, C = product_cross_ratios(eps, q, u, M)
        dnr, cnr, snr = jacobi_cross_ratios(u, rho, nome)
        devs.append(max(abs(A - dnr), abs(B - cnr), abs(C - snr)))
    return devs
