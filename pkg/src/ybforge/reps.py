"""Finite-dimensional and evaluation representations, Kronecker evaluation.

Matrices are dense lists of Scalar rows.  A representation fixes images of
the generators e_{+-alpha}, of the basic Cartan exponentials
exp(phi(alpha,.)) and exp(phi(.,alpha)) (as diagonals), and of the H_a
(diagonal, rational entries).  The defining relation

    [e_a, e_{-a}] = exp(phi(a,.)) - exp(-phi(.,a))

forces a scalar q - 1/q on one side of each lowering operator; it is
carried by the negative images so that the positive generators stay unit
matrix-like.  All images are integer powers of the spec's exponential
base, which keeps everything inside the rational-function field.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import scalars
from ._linalg import nullspace
from .cartan import CartanSpec, AffineExtension
from .errors import (
    DimensionMismatch,
    IntertwinerNotUnique,
    MissingImage,
    NoHighestRoot,
    NoSolution,
    SpecMismatch,
)
from .freealg import AlgebraElement, TensorElement, _term_symbols
from .scalars import ONE, ZERO, Scalar, render

Matrix = List[List[Scalar]]


# ---------------------------------------------------------------------------
# small exact matrix helpers
# ---------------------------------------------------------------------------

def mat_zero(n: int, m: Optional[int] = None) -> Matrix:
    m = n if m is None else m
    return [[ZERO] * m for _ in range(n)]


def mat_identity(n: int) -> Matrix:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a: Matrix, c: Scalar) -> Matrix:
    return [[x * c for x in row] for row in a]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    out = [[ZERO] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        for t in range(k):
            c = ai[t]
            if c.is_zero():
                continue
            bt = b[t]
            row = out[i]
            for j in range(m):
                if not bt[j].is_zero():
                    row[j] = row[j] + c * bt[j]
    return out


def mat_kron(a: Matrix, b: Matrix) -> Matrix:
    na, nb = len(a), len(b)
    out = [[ZERO] * (na * nb) for _ in range(na * nb)]
    for i in range(na):
        for j in range(na):
            if a[i][j].is_zero():
                continue
            for k in range(nb):
                for l in range(nb):
                    if not b[k][l].is_zero():
                        out[i * nb + k][j * nb + l] = a[i][j] * b[k][l]
    return out


def mat_is_zero(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


def mat_equal(a: Matrix, b: Matrix) -> bool:
    return mat_is_zero(mat_sub(a, b))


def mat_subs(a: Matrix, mapping) -> Matrix:
    return [[x.substitute(mapping) for x in row] for row in a]


def unit_matrix(n: int, i: int, j: int, c: Scalar = ONE) -> Matrix:
    out = mat_zero(n)
    out[i][j] = c
    return out


# ---------------------------------------------------------------------------
# Representation
# ---------------------------------------------------------------------------

class Representation:
    def __init__(
        self,
        spec: CartanSpec,
        dim: int,
        pos: Dict[int, Matrix],
        neg: Dict[int, Matrix],
        row_diag: Dict[int, List[Scalar]],
        col_diag: Dict[int, List[Scalar]],
        h_diag: Dict[int, List[Scalar]],
        spectral: Optional[str] = None,
        scalar_map: Optional[Dict[str, Scalar]] = None,
        check: bool = True,
    ):
        self.spec = spec
        self.dim = dim
        self.pos = pos
        self.neg = neg
        self.row_diag = row_diag
        self.col_diag = col_diag
        self.h_diag = h_diag
        self.spectral = spectral
        self.scalar_map = dict(scalar_map or {})
        if check:
            self._check_relations()

    # -- consistency ----------------------------------------------------------

    def _check_relations(self):
        spec = self.spec
        for a in range(spec.n):
            if a not in self.pos or a not in self.neg:
                raise MissingImage(f"generator {a} lacks an image")
        # (1.3): H diagonal, [H_a, e_b] = H_a(b) e_b
        for a in range(spec.m):
            if a not in self.h_diag:
                continue
            for b in range(spec.n):
                hb = spec.H[a][b]
                E = self.pos[b]
                for i in range(self.dim):
                    for j in range(self.dim):
                        if E[i][j].is_zero():
                            continue
                        got = self.h_diag[a][i] - self.h_diag[a][j]
                        if not (got - hb).is_zero():
                            raise SpecMismatch(
                                f"(1.3) fails for H_{a}, e_{b} at entry ({i},{j})"
                            )
        # (1.4) as exact matrix identity
        for a in range(spec.n):
            comm = mat_sub(
                mat_mul(self.pos[a], self.neg[a]), mat_mul(self.neg[a], self.pos[a])
            )
            target = [
                [
                    (self.row_diag[a][i] - _inv(self.col_diag[a][i])) if i == j else ZERO
                    for j in range(self.dim)
                ]
                for i in range(self.dim)
            ]
            if not mat_equal(comm, target):
                raise SpecMismatch(f"(1.4) fails for generator {a}")
        for a in range(spec.n):
            for b in range(spec.n):
                if a == b:
                    continue
                comm = mat_sub(
                    mat_mul(self.pos[a], self.neg[b]), mat_mul(self.neg[b], self.pos[a])
                )
                if not mat_is_zero(comm):
                    raise SpecMismatch(f"[e_{a}, e_(-{b})] != 0 in representation")
        # lattice vectors must act trivially
        for vec in spec._lattice:
            img = self.cartan_image(vec)
            if not mat_equal(img, mat_identity(self.dim)):
                raise SpecMismatch(
                    "relation lattice vector does not act as the identity"
                )

    # -- images ---------------------------------------------------------------

    def cartan_image(self, vec) -> Matrix:
        diag = [ONE] * self.dim
        n = self.spec.n
        for a in range(n):
            if vec[a]:
                for i in range(self.dim):
                    diag[i] = diag[i] * self.row_diag[a][i] ** vec[a]
            if vec[n + a]:
                for i in range(self.dim):
                    diag[i] = diag[i] * self.col_diag[a][i] ** vec[n + a]
        return [
            [diag[i] if i == j else ZERO for j in range(self.dim)]
            for i in range(self.dim)
        ]

    def element_image(self, x: AlgebraElement, spectral: Optional[Scalar] = None) -> Matrix:
        """Matrix image; `spectral` substitutes this rep's spectral symbol."""
        if x.spec is not self.spec:
            raise SpecMismatch("element spec differs from representation spec")
        out = mat_zero(self.dim)
        for key, coeff in x.terms.items():
            m = mat_identity(self.dim)
            neg, vec, pos = key
            for b in neg:
                m = mat_mul(m, self.neg[b])
            if any(vec):
                m = mat_mul(m, self.cartan_image(vec))
            for a in pos:
                m = mat_mul(m, self.pos[a])
            c = coeff.substitute(self.scalar_map) if self.scalar_map else coeff
            out = mat_add(out, mat_scale(m, c))
        if spectral is not None and self.spectral is not None:
            out = mat_subs(out, {self.spectral: spectral})
        return out


def _inv(s: Scalar) -> Scalar:
    return s.inverse()


# ---------------------------------------------------------------------------
# the fundamental representation of sl(N)
# ---------------------------------------------------------------------------

def fundamental_slN(
    N: int, spec: Optional[CartanSpec] = None, base: str = "z"
) -> Representation:
    """Vector representation: e_i -> E_{i,i+1}, e_{-i} -> (q-1/q) E_{i+1,i}.

    The Cartan exponentials act diagonally with integer powers of the
    spec's exponential base; the scalar q - q^{-1} = base^N - base^{-N} on
    the lowering operators is forced by requiring (1.4) exactly.
    """
    from .cartan import standard_slN_spec

    if spec is None:
        spec = standard_slN_spec(N, base=base)
    if spec.exp_base is None:
        raise SpecMismatch("fundamental_slN needs a spec with an exponential base")
    base, scale = spec.exp_base
    n = spec.n
    if n != N - 1:
        raise DimensionMismatch(f"spec rank {n} does not match sl({N})")
    dim = N
    qfac = Scalar.symbol(base, scale // 2) - Scalar.symbol(base, -(scale // 2))
    pos = {a: unit_matrix(dim, a, a + 1) for a in range(n)}
    neg = {a: unit_matrix(dim, a + 1, a, qfac) for a in range(n)}
    # (alpha_a, eps_i) = delta_{i,a} - delta_{i,a+1}; kappa powers scale/2
    row_diag = {}
    col_diag = {}
    for a in range(n):
        d = []
        for i in range(dim):
            e = (1 if i == a else 0) - (1 if i == a + 1 else 0)
            d.append(Scalar.symbol(base, (scale // 2) * e) if e else ONE)
        row_diag[a] = d
        col_diag[a] = list(d)
    h_diag = {}
    for a in range(n):
        d = []
        for i in range(dim):
            w = Fraction(N - 1 - a, N) if i <= a else Fraction(-(a + 1), N)
            d.append(scalars.rat(w))
        h_diag[a] = d
    return Representation(spec, dim, pos, neg, row_diag, col_diag, h_diag)


def evaluation_rep(
    ext: AffineExtension,
    finite_rep: Representation,
    spectral: str = "lam",
) -> Representation:
    """Adjoin e_0 = lam * E_-, e_{-0} = lam^{-1} (q - 1/q) E_+ per (2.3).

    E_+ / E_- are the highest and lowest root vectors of the finite
    representation (for sl(N): E_{1N} and E_{N1}); the central element acts
    trivially and the derivation is dropped (it has no finite image).
    """
    spec = ext.extended
    fin = finite_rep
    N = fin.dim
    if fin.spec.exp_base is None or spec.exp_base is None:
        raise SpecMismatch("evaluation_rep needs exponential-base specs")
    base, scale = spec.exp_base
    # highest root vector = product of all raising images (nonzero for slN)
    hi = mat_identity(N)
    for a in range(fin.spec.n):
        hi = mat_mul(hi, fin.pos[a])
    if mat_is_zero(hi):
        raise NoHighestRoot("could not build a highest root vector image")
    lo = [[ONE if (i, j) == (N - 1, 0) else ZERO for j in range(N)] for i in range(N)]
    lam = Scalar.symbol(spectral)
    qfac = Scalar.symbol(base, scale // 2) - Scalar.symbol(base, -(scale // 2))
    pos = {a: fin.pos[a] for a in range(fin.spec.n)}
    neg = {a: fin.neg[a] for a in range(fin.spec.n)}
    pos[spec.n - 1] = mat_scale(lo, lam)
    neg[spec.n - 1] = mat_scale(hi, lam.inverse() * qfac)
    row_diag = {a: list(fin.row_diag[a]) for a in range(fin.spec.n)}
    col_diag = {a: list(fin.col_diag[a]) for a in range(fin.spec.n)}
    d0 = []
    for i in range(N):
        e = -((1 if i == 0 else 0) - (1 if i == N - 1 else 0))
        d0.append(Scalar.symbol(base, (scale // 2) * e) if e else ONE)
    row_diag[spec.n - 1] = d0
    col_diag[spec.n - 1] = list(d0)
    h_diag = {a: list(fin.h_diag[a]) for a in fin.h_diag}
    return Representation(
        spec, N, pos, neg, row_diag, col_diag, h_diag, spectral=spectral
    )


# ---------------------------------------------------------------------------
# evaluation of algebra and tensor elements
# ---------------------------------------------------------------------------

def evaluate(
    x,
    reps: Sequence[Representation],
    spectral: Optional[Sequence[Optional[Scalar]]] = None,
) -> Matrix:
    """Kronecker-product image; leg 1 is the leftmost factor."""
    if isinstance(x, AlgebraElement):
        reps_ = [reps] if isinstance(reps, Representation) else list(reps)
        if len(reps_) != 1:
            raise DimensionMismatch("AlgebraElement takes exactly one representation")
        s = spectral[0] if spectral else None
        return reps_[0].element_image(x, s)
    if not isinstance(x, TensorElement):
        raise TypeError("evaluate expects an AlgebraElement or TensorElement")
    reps = list(reps)
    if len(reps) != x.nlegs:
        raise DimensionMismatch(
            f"{x.nlegs}-leg tensor evaluated against {len(reps)} representations"
        )
    spectral = list(spectral) if spectral else [None] * len(reps)
    dims = [r.dim for r in reps]
    total = 1
    for d in dims:
        total *= d
    out = mat_zero(total)
    for key, coeff in x.terms.items():
        legs = []
        for leg, rep in enumerate(reps):
            el = AlgebraElement(x.spec, {key[leg]: ONE})
            legs.append(rep.element_image(el, spectral[leg]))
        m = legs[0]
        for nxt in legs[1:]:
            m = mat_kron(m, nxt)
        out = mat_add(out, mat_scale(m, coeff))
    return out


def prefactor_image(rep1: Representation, rep2: Representation) -> Matrix:
    """Diagonal image of exp(phi^{ab} H_a (x) H_b) on rep1 (x) rep2."""
    spec = rep1.spec
    if spec.exp_base is None:
        raise SpecMismatch("prefactor needs an exponential-base spec")
    base, scale = spec.exp_base
    d1, d2 = rep1.dim, rep2.dim
    out = mat_zero(d1 * d2)
    for i in range(d1):
        for j in range(d2):
            expo = Fraction(0)
            for a in range(spec.m):
                if a not in rep1.h_diag:
                    continue
                for b in range(spec.m):
                    if b not in rep2.h_diag:
                        continue
                    phi = spec.phi[a][b].is_rational()
                    if phi is None:
                        raise SpecMismatch("prefactor needs rational phi entries")
                    if phi:
                        expo += (
                            phi
                            * rep1.h_diag[a][i].is_rational()
                            * rep2.h_diag[b][j].is_rational()
                        )
            e = expo * scale
            if e.denominator != 1:
                raise SpecMismatch("prefactor exponent is not integral in the base")
            out[i * d2 + j][i * d2 + j] = (
                Scalar.symbol(base, int(e)) if e else ONE
            )
    return out


# ---------------------------------------------------------------------------
# matrix-level Yang-Baxter residual
# ---------------------------------------------------------------------------

def matrix_ybe_residual(Rfunc, dim: int, names=("lam", "mu", "nu")) -> Matrix:
    """Residual of R12(l,m) R13(l,n) R23(m,n) = R23 R13 R12.

    Rfunc(a, b) returns the dim^2 x dim^2 matrix at spectral symbols a, b
    (spectral-free R-matrices may ignore the arguments).
    """
    lam, mu, nu = (Scalar.symbol(n) for n in names)
    ident = mat_identity(dim)

    def lift(m: Matrix, legs: Tuple[int, int]) -> Matrix:
        # place a dim^2 x dim^2 matrix into legs of a three-fold space
        big = dim ** 3
        out = mat_zero(big)
        for I in range(big):
            i = [(I // dim ** 2) % dim, (I // dim) % dim, I % dim]
            for a in range(dim):
                for b in range(dim):
                    src = m[i[legs[0]] * dim + i[legs[1]]][a * dim + b]
                    if src.is_zero():
                        continue
                    j = i[:]
                    j[legs[0]], j[legs[1]] = a, b
                    J = j[0] * dim ** 2 + j[1] * dim + j[2]
                    out[I][J] = out[I][J] + src
        return out

    R12 = lift(Rfunc(lam, mu), (0, 1))
    R13 = lift(Rfunc(lam, nu), (0, 2))
    R23 = lift(Rfunc(mu, nu), (1, 2))
    lhs = mat_mul(mat_mul(R12, R13), R23)
    rhs = mat_mul(mat_mul(R23, R13), R12)
    return mat_sub(lhs, rhs)


# ---------------------------------------------------------------------------
# intertwiner solving
# ---------------------------------------------------------------------------

def _pair_weight_key(rep1: Representation, rep2: Representation, i: int, j: int) -> str:
    # total K (x) K eigenvalue of the product vector v_i (x) v_j
    parts = []
    for a in range(rep1.spec.n):
        parts.append(render(rep1.row_diag[a][i] * rep2.row_diag[a][j]))
        parts.append(render(rep1.col_diag[a][i] * rep2.col_diag[a][j]))
    return "|".join(parts)


def coproduct_image(
    spec: CartanSpec,
    x: AlgebraElement,
    rep1: Representation,
    rep2: Representation,
    spectral: Optional[Sequence[Optional[Scalar]]] = None,
    opposite: bool = False,
) -> Matrix:
    from .freealg import coproduct

    d = coproduct(x, opposite=opposite)
    return evaluate(d, [rep1, rep2], spectral)


def _reachability(mats: Sequence[Matrix], dim: int) -> List[List[bool]]:
    """reach[i][k]: basis vector k maps onto i under words in the given images."""
    reach = [[i == k for k in range(dim)] for i in range(dim)]
    for m in mats:
        for i in range(dim):
            for k in range(dim):
                if not m[i][k].is_zero():
                    reach[i][k] = True
    for t in range(dim):
        for i in range(dim):
            if reach[i][t]:
                for k in range(dim):
                    if reach[t][k]:
                        reach[i][k] = True
    return reach


def solve_R_in_rep(
    spec: CartanSpec,
    rep1: Representation,
    rep2: Representation,
    spectral: Optional[Sequence[Optional[Scalar]]] = None,
    triangular: bool = True,
) -> Matrix:
    """The matrix solving Delta(x) R = R Delta'(x) for all generators x.

    With triangular=True the unknown is restricted to the shape of the
    universal R: relative to the Cartan prefactor the tail lowers in leg 1
    and raises in leg 2, which is encoded by reachability under the
    negative (resp. positive) images.  For evaluation representations the
    reachability is all-to-all and plain intertwining already determines R
    up to one scalar.  Raises unless the solution space is one-dimensional;
    normalized to 1 on the highest-weight product vector (index (0, 0)).
    """
    d1, d2 = rep1.dim, rep2.dim
    if d1 != d2:
        raise DimensionMismatch("intertwiner solving expects equal-dimension legs")
    dim = d1 * d2
    weights = [
        _pair_weight_key(rep1, rep2, i, j) for i in range(d1) for j in range(d2)
    ]
    if triangular:
        reach_neg = _reachability([rep1.neg[a] for a in rep1.neg], d1)
        reach_pos = _reachability([rep2.pos[a] for a in rep2.pos], d2)
    slots = []
    for I in range(dim):
        for J in range(dim):
            if weights[I] != weights[J]:
                continue
            if triangular:
                i, j = divmod(I, d2)
                k, l = divmod(J, d2)
                if not (reach_neg[i][k] and reach_pos[j][l]):
                    continue
            slots.append((I, J))
    slot_index = {s: k for k, s in enumerate(slots)}
    rows: List[List[Scalar]] = []
    gens = [AlgebraElement.generator(spec, sgn, a) for a in range(spec.n) for sgn in (+1, -1)]
    for g in gens:
        D = coproduct_image(spec, g, rep1, rep2, spectral)
        Dp = coproduct_image(spec, g, rep1, rep2, spectral, opposite=True)
        # D . R - R . D' = 0, entry (I, J)
        for I in range(dim):
            for J in range(dim):
                row = [ZERO] * len(slots)
                touched = False
                for K in range(dim):
                    if (K, J) in slot_index and not D[I][K].is_zero():
                        row[slot_index[(K, J)]] = row[slot_index[(K, J)]] + D[I][K]
                        touched = True
                    if (I, K) in slot_index and not Dp[K][J].is_zero():
                        row[slot_index[(I, K)]] = row[slot_index[(I, K)]] - Dp[K][J]
                        touched = True
                if touched:
                    rows.append(row)
    basis = nullspace(rows) if rows else []
    if len(basis) == 0:
        raise NoSolution("intertwining system has only the zero solution")
    if len(basis) > 1:
        raise IntertwinerNotUnique(f"intertwiner space has dimension {len(basis)}")
    vec = basis[0]
    R = mat_zero(dim)
    for (I, J), k in slot_index.items():
        R[I][J] = vec[k]
    norm = R[0][0]
    if norm.is_zero():
        raise NoSolution("intertwiner vanishes on the highest-weight product vector")
    inv = norm.inverse()
    return [[x * inv for x in row] for row in R]
