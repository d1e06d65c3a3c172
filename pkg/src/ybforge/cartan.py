"""Cartan data (phi, H), generalized Cartan matrices, Serre coefficients.

A CartanSpec carries two layers.  The additive layer is the (phi, H) pair
defining the pairing phi(alpha, beta); it drives the generalized Cartan
matrix and the classification.  The multiplicative layer is the table
kappa[a][b] of values e^{phi(alpha_a, alpha_b)}, kept as one Laurent
monomial per entry so that all structure constants of the quantized
algebra stay inside the rational-function field.  Relations such as (the
exponential of) a vanishing linear combination of pairing functionals are
imposed by substitution in the kappa table; the resulting lattice of
trivial Cartan exponentials is computed once and used to canonicalize
group-like elements.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import scalars
from .errors import MalformedGCM, NoIntegerK, NonIntegerRatio, NotAffine
from .scalars import ONE, Scalar, parse, rat, render, sym


# ---------------------------------------------------------------------------
# small exact integer/rational linear algebra
# ---------------------------------------------------------------------------

def det_fraction(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(rows)
    m = [list(map(Fraction, r)) for r in rows]
    det = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col]:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            if m[r][col]:
                f = m[r][col] * inv
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return det


def integer_kernel(rows: List[List[int]], ncols: int) -> List[Tuple[int, ...]]:
    """Basis of {w in Z^ncols : M w = 0} via unimodular column reduction."""
    cols = [[rows[r][c] for r in range(len(rows))] for c in range(ncols)]
    u = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]
    ucols = [[u[r][c] for r in range(ncols)] for c in range(ncols)]
    active = list(range(ncols))
    for r in range(len(rows)):
        live = [j for j in active if cols[j][r] != 0]
        while len(live) > 1:
            live.sort(key=lambda j: abs(cols[j][r]))
            j0 = live[0]
            for j in live[1:]:
                q = cols[j][r] // cols[j0][r]
                if q:
                    for k in range(len(rows)):
                        cols[j][k] -= q * cols[j0][k]
                    for k in range(ncols):
                        ucols[j][k] -= q * ucols[j0][k]
            live = [j for j in live if cols[j][r] != 0]
        if live:
            active.remove(live[0])
    basis = []
    for j in active:
        if all(v == 0 for v in cols[j]):
            basis.append(tuple(ucols[j]))
    return basis


def hnf_rows(basis: List[Tuple[int, ...]]) -> List[Tuple[int, ...]]:
    """Row Hermite normal form (pivots positive, entries above reduced)."""
    rows = [list(b) for b in basis if any(b)]
    if not rows:
        return []
    ncols = len(rows[0])
    out: List[List[int]] = []
    col = 0
    while rows and col < ncols:
        live = [r for r in rows if r[col] != 0]
        if not live:
            col += 1
            continue
        while True:
            live.sort(key=lambda r: abs(r[col]))
            piv = live[0]
            rest = [r for r in live[1:]]
            done = True
            for r in rest:
                q = r[col] // piv[col]
                if q:
                    for k in range(ncols):
                        r[k] -= q * piv[k]
                if r[col]:
                    done = False
            live = [r for r in live if r[col] != 0]
            if done or len(live) <= 1:
                break
        piv = live[0]
        if piv[col] < 0:
            for k in range(ncols):
                piv[k] = -piv[k]
        for prev in out:
            q = prev[col] // piv[col]
            if q:
                for k in range(ncols):
                    prev[k] -= q * piv[k]
        out.append(piv)
        rows = [r for r in rows if any(r) and r is not piv]
        col += 1
    return [tuple(r) for r in out]


def reduce_mod_lattice(vec: Tuple[int, ...], hnf: List[Tuple[int, ...]]) -> Tuple[int, ...]:
    v = list(vec)
    for row in hnf:
        col = next(i for i, x in enumerate(row) if x)
        q = v[col] // row[col]
        if q:
            for k in range(len(v)):
                v[k] -= q * row[k]
    return tuple(v)


# ---------------------------------------------------------------------------
# CartanSpec
# ---------------------------------------------------------------------------

def _is_unit_monomial(s: Scalar) -> bool:
    return (
        len(s.num) == 1
        and next(iter(s.num.values())) == 1
        and s.den == {scalars.ONE_MONO: Fraction(1)}
    )


class CartanSpec:
    """The (M, N, phi, H) data plus the multiplicative pairing table."""

    def __init__(
        self,
        phi: Sequence[Sequence[Scalar]],
        H: Sequence[Sequence[Scalar]],
        kappa: Sequence[Sequence[Scalar]],
        root_names: Optional[Sequence[str]] = None,
        cartan_names: Optional[Sequence[str]] = None,
        exp_base: Optional[Tuple[str, int]] = None,
        relations_meta: Optional[list] = None,
    ):
        self.phi = tuple(tuple(row) for row in phi)
        self.H = tuple(tuple(row) for row in H)
        self.kappa = tuple(tuple(row) for row in kappa)
        self.m = len(self.phi)
        self.n = len(self.kappa)
        if any(len(r) != self.m for r in self.phi):
            raise ValueError("phi must be square over M")
        if len(self.H) != self.m or any(len(r) != self.n for r in self.H):
            raise ValueError("H must be |M| x |N|")
        self.root_names = tuple(root_names) if root_names else tuple(
            str(i + 1) for i in range(self.n)
        )
        self.cartan_names = tuple(cartan_names) if cartan_names else tuple(
            f"H{i + 1}" for i in range(self.m)
        )
        self.exp_base = exp_base
        self.relations_meta = relations_meta or []
        for row in self.kappa:
            for entry in row:
                if not _is_unit_monomial(entry):
                    raise ValueError(
                        "kappa entries must be Laurent monomials with coefficient 1"
                    )
        self._lattice = self._character_kernel()
        for a in range(self.n):
            if all((self.kappa[a][b] * self.kappa[b][a]).is_one() for b in range(self.n)):
                raise ValueError(
                    f"inadmissible spec: e^(phi({a},.)+phi(.,{a})) = 1 on all roots"
                )

    # -- construction --------------------------------------------------------

    @staticmethod
    def generic(n: int, unit_pairs: Sequence[Tuple[int, int]] = ()) -> "CartanSpec":
        """Fully generic rank-n spec; kappa entries are independent symbols.

        unit_pairs lists (sigma, rho) for which e^{phi(sigma,.)+phi(.,rho)}=1
        is imposed by eliminating the rho-column of the table.
        """
        phi = [[sym(f"p{a + 1}_{b + 1}") for b in range(n)] for a in range(n)]
        H = [[ONE if a == b else scalars.ZERO for b in range(n)] for a in range(n)]
        kappa: List[List[Scalar]] = [
            [sym(f"E{a + 1}_{b + 1}") for b in range(n)] for a in range(n)
        ]
        eliminated = {}
        for sigma, rho in unit_pairs:
            for beta in range(n):
                eliminated[(beta, rho)] = (sigma, beta)
        for (beta, rho), (sigma, b2) in eliminated.items():
            src = eliminated.get((sigma, b2))
            if src is None:
                kappa[beta][rho] = sym(f"E{sigma + 1}_{b2 + 1}").inverse()
            else:
                s2, b3 = src
                kappa[beta][rho] = sym(f"E{s2 + 1}_{b3 + 1}")
        spec = CartanSpec(
            phi, H, kappa,
            relations_meta=[{"type": "pair_unit", "sigma": s, "rho": r} for s, r in unit_pairs],
        )
        for sigma, rho in unit_pairs:
            for beta in range(n):
                if not (spec.kappa[sigma][beta] * spec.kappa[beta][rho]).is_one():
                    raise ValueError("unit_pairs substitution is inconsistent")
        return spec

    @staticmethod
    def from_gram(
        gram: Sequence[Sequence[int]],
        base: str = "z",
        scale: Optional[int] = None,
        root_names: Optional[Sequence[str]] = None,
    ) -> "CartanSpec":
        """One-parameter quantized spec with kappa[a][b] = base^(scale*gram/2).

        gram is the symmetrized Cartan matrix (integer entries); the additive
        pairing is gram/2 so that [e_a, e_-a] has classical limit t_a with
        (phi+phi^t)(a,a) = gram_aa.
        """
        n = len(gram)
        if scale is None:
            scale = 2
        phi = [[rat(gram[a][b], 2) for b in range(n)] for a in range(n)]
        H = [[ONE if a == b else scalars.ZERO for b in range(n)] for a in range(n)]
        kappa = []
        for a in range(n):
            row = []
            for b in range(n):
                e = Fraction(gram[a][b], 2) * scale
                if e.denominator != 1:
                    raise ValueError("scale does not clear half-integer pairings")
                row.append(Scalar.symbol(base, int(e)) if e else ONE)
            kappa.append(row)
        return CartanSpec(
            phi, H, kappa, root_names=root_names, exp_base=(base, scale),
            relations_meta=[{"type": "exp_base", "name": base, "scale": scale}],
        )

    # -- derived data --------------------------------------------------------

    def pairing(self, a: int, b: int) -> Scalar:
        """Additive phi(alpha_a, alpha_b) = sum phi^{cd} H_c(a) H_d(b)."""
        total = scalars.ZERO
        for c in range(self.m):
            hc = self.H[c][a]
            if hc.is_zero():
                continue
            for d in range(self.m):
                hd = self.H[d][b]
                if hd.is_zero():
                    continue
                total = total + self.phi[c][d] * hc * hd
        return total

    def _character_kernel(self) -> List[Tuple[int, ...]]:
        n = self.n
        symbols = sorted(
            {name for row in self.kappa for s in row for name, _ in next(iter(s.num))}
        )
        sym_index = {name: i for i, name in enumerate(symbols)}
        rows: List[List[int]] = []
        for beta in range(n):
            for si in range(len(symbols)):
                row = [0] * (2 * n)
                for a in range(n):
                    for name, e in next(iter(self.kappa[a][beta].num)):
                        if sym_index[name] == si:
                            row[a] += e
                    for name, e in next(iter(self.kappa[beta][a].num)):
                        if sym_index[name] == si:
                            row[n + a] += e
                rows.append(row)
        basis = integer_kernel(rows, 2 * n)
        return hnf_rows(basis)

    def reduce_exponent(self, vec: Tuple[int, ...]) -> Tuple[int, ...]:
        """Canonical representative of a Cartan-exponential vector."""
        if not self._lattice:
            return vec
        return reduce_mod_lattice(vec, self._lattice)

    def character(self, vec: Tuple[int, ...], beta: int) -> Scalar:
        """Commutation scalar of exp(sum u_a phi(a,.) + v_a phi(.,a)) with e_beta."""
        out = ONE
        n = self.n
        for a in range(n):
            if vec[a]:
                out = out * self.kappa[a][beta] ** vec[a]
            if vec[n + a]:
                out = out * self.kappa[beta][a] ** vec[n + a]
        return out

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "rank_M": self.m,
            "rank_N": self.n,
            "phi": [[render(x) for x in row] for row in self.phi],
            "H": [[render(x) for x in row] for row in self.H],
            "relations": list(self.relations_meta)
            + [{"type": "kappa_table", "table": [[render(x) for x in row] for row in self.kappa]}],
            "root_names": list(self.root_names),
        }

    @staticmethod
    def from_json(data: dict) -> "CartanSpec":
        phi = [[parse(x) for x in row] for row in data["phi"]]
        H = [[parse(x) for x in row] for row in data["H"]]
        kappa = None
        exp_base = None
        meta = []
        for rel in data.get("relations", []):
            if rel.get("type") == "kappa_table":
                kappa = [[parse(x) for x in row] for row in rel["table"]]
            elif rel.get("type") == "exp_base":
                exp_base = (rel["name"], rel["scale"])
                meta.append(rel)
            else:
                meta.append(rel)
        if kappa is None:
            raise ValueError("spec JSON carries no kappa table")
        return CartanSpec(
            phi, H, kappa,
            root_names=data.get("root_names"),
            exp_base=exp_base,
            relations_meta=meta,
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)

    def __repr__(self):
        return f"CartanSpec(n={self.n}, m={self.m})"


# ---------------------------------------------------------------------------
# generalized Cartan matrix and classification
# ---------------------------------------------------------------------------

def generalized_cartan_matrix(spec: CartanSpec):
    """Integer GCM with A_aa = 2 and A_ab = (phi(a,b)+phi(b,a))/phi(a,a).

    Returns (A, symmetrizable).  Raises NonIntegerRatio outside the
    quantized Kac-Moody regime.
    """
    n = spec.n
    A = [[0] * n for _ in range(n)]
    for a in range(n):
        diag = spec.pairing(a, a)
        if diag.is_zero():
            raise NonIntegerRatio(f"phi({a},{a}) = 0")
        A[a][a] = 2
        for b in range(n):
            if b == a:
                continue
            ratio = (spec.pairing(a, b) + spec.pairing(b, a)) / diag
            r = ratio.is_rational()
            if r is None or r.denominator != 1:
                raise NonIntegerRatio(
                    f"(phi({a},{b})+phi({b},{a}))/phi({a},{a}) is not an integer"
                )
            if r > 0:
                raise NonIntegerRatio(f"positive off-diagonal ratio at ({a},{b})")
            A[a][b] = int(r)
    return [row[:] for row in A], _symmetrizer(A) is not None


def _symmetrizer(A) -> Optional[List[Fraction]]:
    n = len(A)
    d: List[Optional[Fraction]] = [None] * n
    for start in range(n):
        if d[start] is not None:
            continue
        d[start] = Fraction(1)
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                if i == j or (A[i][j] == 0 and A[j][i] == 0):
                    continue
                if (A[i][j] == 0) != (A[j][i] == 0):
                    return None
                if A[i][j] == 0:
                    continue
                val = d[i] * Fraction(A[i][j], A[j][i])
                if d[j] is None:
                    d[j] = val
                    stack.append(j)
                elif d[j] != val:
                    return None
    return [x if x is not None else Fraction(1) for x in d]


class Classification:
    FINITE = "FiniteType"
    AFFINE = "AffineType"
    OTHER = "Other"


def classify(A) -> str:
    """Finite / affine / other for a symmetrizable GCM (Definition 1.2)."""
    n = len(A)
    if any(len(row) != n for row in A):
        raise MalformedGCM("matrix not square")
    for i in range(n):
        if A[i][i] != 2:
            raise MalformedGCM("diagonal entries must equal 2")
        for j in range(n):
            if i != j and (A[i][j] > 0 or not isinstance(A[i][j], int)):
                raise MalformedGCM("off-diagonal entries must be non-positive integers")
    d = _symmetrizer(A)
    if d is None:
        raise MalformedGCM("matrix is not symmetrizable")
    B = [[d[i] * A[i][j] for j in range(n)] for i in range(n)]

    def minor(idx):
        sub = [[B[i][j] for j in idx] for i in idx]
        return det_fraction(sub)

    full = minor(list(range(n)))
    from itertools import combinations

    proper_positive = True
    for size in range(1, n):
        for idx in combinations(range(n), size):
            if minor(list(idx)) <= 0:
                proper_positive = False
                break
        if not proper_positive:
            break
    if proper_positive and full > 0:
        return Classification.FINITE
    if proper_positive and full == 0:
        return Classification.AFFINE
    return Classification.OTHER


# ---------------------------------------------------------------------------
# Serre data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SerreData:
    alpha: int
    beta: int
    k: int
    q: Scalar
    coefficients: Tuple[Scalar, ...]


def q_binomial(n: int, m: int, q: Scalar) -> Scalar:
    """Gaussian binomial [n choose m]_q with [j]_q = (q^j-1)/(q-1)."""
    if m < 0 or m > n:
        return scalars.ZERO
    out = ONE
    for i in range(1, m + 1):
        out = out * (q ** (n - m + i) - ONE) / (q ** i - ONE)
    return out


def serre_coefficients(spec: CartanSpec, alpha: int, beta: int) -> SerreData:
    """Coefficients Q^k_m = (-1)^m e^{m phi(a,b)} q^{m(m-1)/2} [k m]_q."""
    if alpha == beta:
        raise NoIntegerK("Serre data requires distinct roots")
    diag = spec.pairing(alpha, alpha)
    if diag.is_zero():
        raise NoIntegerK(f"phi({alpha},{alpha}) = 0")
    ratio = (spec.pairing(alpha, beta) + spec.pairing(beta, alpha)) / diag
    r = ratio.is_rational()
    if r is None or r.denominator != 1 or r > 0:
        raise NoIntegerK("(1.7) admits no positive integer k at exponent zero")
    k = 1 - int(r)
    q = spec.kappa[alpha][alpha]
    e_ab = spec.kappa[alpha][beta]
    coeffs = []
    for m_ in range(k + 1):
        c = q_binomial(k, m_, q) * (e_ab ** m_) * (q ** (m_ * (m_ - 1) // 2))
        if m_ % 2:
            c = -c
        coeffs.append(c)
    return SerreData(alpha, beta, k, q, tuple(coeffs))


# ---------------------------------------------------------------------------
# affine extension
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineExtension:
    base: CartanSpec
    extended: CartanSpec
    u: Scalar
    affine_root: int
    c_index: int
    d_index: int
    gcm: tuple


def affine_extend(
    spec: CartanSpec,
    u: Scalar,
    extra_root: Sequence[Scalar],
    kappa_row: Optional[Sequence[Scalar]] = None,
) -> AffineExtension:
    """Adjoin the extra root plus central c and derivation d per (1.12).

    extra_root gives H_a(0) for each a in M of the base spec.  The extended
    pairing is phi + u c(x)d + (1-u) d(x)c; c pairs trivially with every
    root and d grades the new root.
    """
    n, m = spec.n, spec.m
    if len(extra_root) != m:
        raise ValueError("extra_root must give H_a(0) for each Cartan generator")
    mm = m + 2  # + c, d
    zero = scalars.ZERO
    phi = [[zero] * mm for _ in range(mm)]
    for a in range(m):
        for b in range(m):
            phi[a][b] = spec.phi[a][b]
    c_index, d_index = m, m + 1
    phi[c_index][d_index] = u
    phi[d_index][c_index] = ONE - u
    H = [[zero] * (n + 1) for _ in range(mm)]
    for a in range(m):
        for b in range(n):
            H[a][b] = spec.H[a][b]
        H[a][n] = extra_root[a]
    H[d_index][n] = ONE  # [d, e_0] = e_0
    if kappa_row is None:
        if spec.exp_base is None:
            raise NotAffine(
                "cannot derive the multiplicative row for the new root without an exp base"
            )
        base, scale = spec.exp_base
        # additive pairing of the new root against everything, via extra_root
        def pair_new(bidx: int) -> Scalar:
            total = scalars.ZERO
            for a_ in range(m):
                ha = extra_root[a_]
                if ha.is_zero():
                    continue
                for b_ in range(m):
                    hb = spec.H[b_][bidx] if bidx < n else extra_root[b_]
                    if hb.is_zero():
                        continue
                    total = total + spec.phi[a_][b_] * ha * hb
            return total

        def pair_old_new(aidx: int) -> Scalar:
            total = scalars.ZERO
            for a_ in range(m):
                ha = spec.H[a_][aidx]
                if ha.is_zero():
                    continue
                for b_ in range(m):
                    hb = extra_root[b_]
                    if hb.is_zero():
                        continue
                    total = total + spec.phi[a_][b_] * ha * hb
            return total

        kappa = [[spec.kappa[a][b] for b in range(n)] for a in range(n)]
        for a in range(n):
            e = pair_old_new(a).is_rational()
            if e is None or (e * scale).denominator != 1:
                raise NotAffine("new-root pairing is not exponentiable in the base")
            kappa[a].append(Scalar.symbol(base, int(e * scale)) if e else ONE)
        new_row = []
        for b in range(n + 1):
            e = pair_new(b).is_rational()
            if e is None or (e * scale).denominator != 1:
                raise NotAffine("new-root pairing is not exponentiable in the base")
            new_row.append(Scalar.symbol(base, int(e * scale)) if e else ONE)
        kappa.append(new_row)
    else:
        kappa = [[spec.kappa[a][b] for b in range(n)] for a in range(n)]
        for a in range(n):
            kappa[a].append(kappa_row[a])
        kappa.append(list(kappa_row[n:]) if len(kappa_row) > n else list(kappa_row))
        if len(kappa[-1]) != n + 1:
            raise ValueError("kappa_row must provide the full new row")
    extended = CartanSpec(
        phi, H, kappa,
        root_names=list(spec.root_names) + ["0"],
        cartan_names=list(spec.cartan_names) + ["c", "d"],
        exp_base=spec.exp_base,
        relations_meta=list(spec.relations_meta),
    )
    A, symmetrizable = generalized_cartan_matrix(extended)
    if not symmetrizable or classify(A) != Classification.AFFINE:
        raise NotAffine("extended generalized Cartan matrix is not of affine type")
    return AffineExtension(
        base=spec, extended=extended, u=u,
        affine_root=n, c_index=c_index, d_index=d_index,
        gcm=tuple(tuple(r) for r in A),
    )


# ---------------------------------------------------------------------------
# standard specs
# ---------------------------------------------------------------------------

def slN_gram(N: int) -> List[List[int]]:
    n = N - 1
    return [
        [2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(n)]
        for i in range(n)
    ]


def standard_slN_spec(N: int, base: str = "z") -> CartanSpec:
    """Quantized sl(N) spec; kappa[a][b] = base^(N*gram_ab), q = base^(2N)."""
    return CartanSpec.from_gram(slN_gram(N), base=base, scale=2 * N)


def affine_slN_extension(N: int, base: str = "z", u: Optional[Scalar] = None) -> AffineExtension:
    """Untwisted affine extension A_{N-1}^(1) by the lowest root."""
    spec = standard_slN_spec(N, base=base)
    if u is None:
        u = rat(1, 2)
    # highest root theta = alpha_1 + ... + alpha_{N-1}; H_a(0) = -H_a(theta)
    extra = []
    for a in range(spec.m):
        total = scalars.ZERO
        for b in range(spec.n):
            total = total + spec.H[a][b]
        extra.append(-total)
    return affine_extend(spec, u, extra)
