"""Normal-ordered arithmetic in the algebra A(phi, H).

Elements are finite sums of terms
    (negative word) * (Cartan exponential) * (positive word)
with exact Scalar coefficients.  Multiplication re-normalizes using the
defining relations: Cartan exponentials commute past generators with a
kappa scalar, and

    e_a * e_{-b} = e_{-b} * e_a + delta_ab (K_a - Kt_a),

where K_a = exp(phi(a, .)) and Kt_a = exp(-phi(., a)).  Cartan
exponentials are tracked as integer vectors over the basis of row
functionals phi(a, .) and column functionals phi(., a); the central and
derivation coordinates of an affine spec act trivially on every
commutation character and are not carried here (affine work goes through
the loop substitution e_0 = lam E_-).

TensorElement holds 2- or 3-fold tensor products of such terms with a
single overall coefficient per term tuple.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import scalars
from .cartan import CartanSpec
from .errors import SpecMismatch, UnsupportedElement
from .scalars import ONE, ZERO, Scalar

Word = Tuple[int, ...]
Vec = Tuple[int, ...]
TermKey = Tuple[Word, Vec, Word]          # (negatives, cartan vector, positives)


def zero_vec(spec: CartanSpec) -> Vec:
    return (0,) * (2 * spec.n)


def row_vec(spec: CartanSpec, alpha: int, coeff: int = 1) -> Vec:
    v = [0] * (2 * spec.n)
    v[alpha] = coeff
    return spec.reduce_exponent(tuple(v))


def col_vec(spec: CartanSpec, alpha: int, coeff: int = 1) -> Vec:
    v = [0] * (2 * spec.n)
    v[spec.n + alpha] = coeff
    return spec.reduce_exponent(tuple(v))


def vec_add(spec: CartanSpec, a: Vec, b: Vec) -> Vec:
    return spec.reduce_exponent(tuple(x + y for x, y in zip(a, b)))


def vec_neg(spec: CartanSpec, a: Vec) -> Vec:
    return spec.reduce_exponent(tuple(-x for x in a))


class CartanExp:
    """Formal group-like exponential of a Cartan functional."""

    __slots__ = ("spec", "vec")

    def __init__(self, spec: CartanSpec, vec: Vec):
        self.spec = spec
        self.vec = spec.reduce_exponent(tuple(vec))

    @staticmethod
    def K(spec: CartanSpec, gamma: int) -> "CartanExp":
        """exp(phi(gamma, .))"""
        return CartanExp(spec, row_vec(spec, gamma))

    @staticmethod
    def Kt(spec: CartanSpec, gamma: int) -> "CartanExp":
        """exp(-phi(., gamma))"""
        return CartanExp(spec, col_vec(spec, gamma, -1))

    @staticmethod
    def K_lower(spec: CartanSpec, rho: int) -> "CartanExp":
        """K_rho = exp(phi(., rho))"""
        return CartanExp(spec, col_vec(spec, rho))

    @staticmethod
    def K_upper(spec: CartanSpec, sigma: int) -> "CartanExp":
        """K^sigma = exp(-phi(sigma, .))"""
        return CartanExp(spec, row_vec(spec, sigma, -1))

    def __mul__(self, other: "CartanExp") -> "CartanExp":
        return CartanExp(self.spec, vec_add(self.spec, self.vec, other.vec))

    def inverse(self) -> "CartanExp":
        return CartanExp(self.spec, vec_neg(self.spec, self.vec))

    def kappa(self, beta: int) -> Scalar:
        """Scalar in K e_beta = kappa * e_beta K."""
        return self.spec.character(self.vec, beta)

    def __eq__(self, other):
        return isinstance(other, CartanExp) and self.vec == other.vec

    def __hash__(self):
        return hash(self.vec)

    def __repr__(self):
        return f"K{list(self.vec)}"


# ---------------------------------------------------------------------------
# normal ordering
# ---------------------------------------------------------------------------

def _term_symbols(key: TermKey) -> Tuple:
    neg, vec, pos = key
    syms: List = [("n", b) for b in neg]
    if any(vec):
        syms.append(("k", vec))
    syms.extend(("p", a) for a in pos)
    return tuple(syms)


def _normal_order(spec: CartanSpec, symbols: Sequence, coeff: Scalar) -> Dict[TermKey, Scalar]:
    """Normal order a mixed product of generator letters and Cartan vectors."""
    out: Dict[TermKey, Scalar] = {}
    work: List[Tuple[Tuple, Scalar]] = [(tuple(symbols), coeff)]
    zero = zero_vec(spec)
    while work:
        syms, c = work.pop()
        i = 0
        resolved = True
        syms = list(syms)
        while i < len(syms) - 1:
            a, b = syms[i], syms[i + 1]
            if a[0] == "p" and b[0] == "n":
                alpha, beta = a[1], b[1]
                swapped = syms[:i] + [b, a] + syms[i + 2:]
                work.append((tuple(swapped), c))
                if alpha == beta:
                    kv = row_vec(spec, alpha)
                    ktv = col_vec(spec, alpha, -1)
                    work.append((tuple(syms[:i] + [("k", kv)] + syms[i + 2:]), c))
                    work.append((tuple(syms[:i] + [("k", ktv)] + syms[i + 2:]), -c))
                resolved = False
                break
            if a[0] == "k" and b[0] == "n":
                # K e_{-b} = kappa(K,b)^-1 e_{-b} K
                scal = spec.character(a[1], b[1])
                syms[i], syms[i + 1] = b, a
                c = c / scal
                i = max(i - 1, 0)
                continue
            if a[0] == "p" and b[0] == "k":
                # e_a K = kappa(K,a)^-1 K e_a
                scal = spec.character(b[1], a[1])
                syms[i], syms[i + 1] = b, a
                c = c / scal
                i = max(i - 1, 0)
                continue
            if a[0] == "k" and b[0] == "k":
                merged = vec_add(spec, a[1], b[1])
                syms[i: i + 2] = [("k", merged)] if any(merged) else []
                i = max(i - 1, 0)
                continue
            i += 1
        if not resolved:
            continue
        neg = tuple(s[1] for s in syms if s[0] == "n")
        pos = tuple(s[1] for s in syms if s[0] == "p")
        vecs = [s[1] for s in syms if s[0] == "k"]
        vec = zero
        for v in vecs:
            vec = vec_add(spec, vec, v)
        key = (neg, vec, pos)
        prev = out.get(key)
        tot = c if prev is None else prev + c
        if tot.is_zero():
            out.pop(key, None)
        else:
            out[key] = tot
    return out


# ---------------------------------------------------------------------------
# AlgebraElement
# ---------------------------------------------------------------------------

class AlgebraElement:
    """Finite normal-ordered sum with exact Scalar coefficients."""

    __slots__ = ("spec", "terms")

    def __init__(self, spec: CartanSpec, terms: Optional[Dict[TermKey, Scalar]] = None):
        self.spec = spec
        self.terms = {k: v for k, v in (terms or {}).items() if not v.is_zero()}

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero(spec: CartanSpec) -> "AlgebraElement":
        return AlgebraElement(spec, {})

    @staticmethod
    def one(spec: CartanSpec) -> "AlgebraElement":
        return AlgebraElement(spec, {((), zero_vec(spec), ()): ONE})

    @staticmethod
    def generator(spec: CartanSpec, sign: int, alpha: int) -> "AlgebraElement":
        if not 0 <= alpha < spec.n:
            raise SpecMismatch(f"root index {alpha} out of range")
        if sign > 0:
            key = ((), zero_vec(spec), (alpha,))
        else:
            key = ((alpha,), zero_vec(spec), ())
        return AlgebraElement(spec, {key: ONE})

    @staticmethod
    def cartan(spec: CartanSpec, k: CartanExp) -> "AlgebraElement":
        return AlgebraElement(spec, {((), k.vec, ()): ONE})

    @staticmethod
    def scalar(spec: CartanSpec, c: Scalar) -> "AlgebraElement":
        return AlgebraElement(spec, {((), zero_vec(spec), ()): c})

    # -- ring operations ------------------------------------------------------

    def _check(self, other: "AlgebraElement"):
        if self.spec is not other.spec:
            raise SpecMismatch("elements live over different CartanSpecs")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k, ZERO) + v
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return AlgebraElement(self.spec, out)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.spec, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)

    def scale(self, c) -> "AlgebraElement":
        c = c if isinstance(c, Scalar) else scalars.rat(c)
        if c.is_zero():
            return AlgebraElement.zero(self.spec)
        return AlgebraElement(self.spec, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        out: Dict[TermKey, Scalar] = {}
        for k1, c1 in self.terms.items():
            s1 = _term_symbols(k1)
            for k2, c2 in other.terms.items():
                piece = _normal_order(self.spec, s1 + _term_symbols(k2), c1 * c2)
                for k, v in piece.items():
                    s = out.get(k, ZERO) + v
                    if s.is_zero():
                        out.pop(k, None)
                    else:
                        out[k] = s
        return AlgebraElement(self.spec, out)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.spec is other.spec and self.terms == other.terms

    def letters(self) -> int:
        return max((len(k[0]) + len(k[2]) for k in self.terms), default=0)

    def __repr__(self):
        return render_element(self)


def render_element(x: AlgebraElement) -> str:
    if not x.terms:
        return "0"
    bits = []
    for key in sorted(x.terms, key=lambda k: (len(k[0]) + len(k[2]), k)):
        neg, vec, pos = key
        factors = [f"e[-{x.spec.root_names[b]}]" for b in neg]
        if any(vec):
            factors.append(f"K{list(vec)}")
        factors.extend(f"e[{x.spec.root_names[a]}]" for a in pos)
        word = "*".join(factors) if factors else "1"
        bits.append(f"({scalars.render(x.terms[key])})*{word}")
    return " + ".join(bits)


# ---------------------------------------------------------------------------
# public module operations
# ---------------------------------------------------------------------------

def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a * b


def commutator(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a * b - b * a


def rescaled_generator(spec: CartanSpec, sign: int, alpha: int) -> AlgebraElement:
    """f_sigma = K^sigma e_sigma for sign > 0, f_{-rho} = e_{-rho} K_rho else."""
    if sign > 0:
        k = CartanExp.K_upper(spec, alpha)
        return AlgebraElement.cartan(spec, k) * AlgebraElement.generator(spec, +1, alpha)
    k = CartanExp.K_lower(spec, alpha)
    return AlgebraElement.generator(spec, -1, alpha) * AlgebraElement.cartan(spec, k)


def serre_element(spec: CartanSpec, alpha: int, beta: int, data) -> AlgebraElement:
    """sum_m Q^k_m e_alpha^m e_beta e_alpha^(k-m) in the free algebra."""
    ea = AlgebraElement.generator(spec, +1, alpha)
    eb = AlgebraElement.generator(spec, +1, beta)
    total = AlgebraElement.zero(spec)
    k = data.k
    for m, q in enumerate(data.coefficients):
        term = AlgebraElement.one(spec)
        for _ in range(m):
            term = term * ea
        term = term * eb
        for _ in range(k - m):
            term = term * ea
        total = total + term.scale(q)
    return total


def skew_derivative(spec: CartanSpec, word: Word, gamma: int):
    """Left/right q-skew derivatives of a positive word.

    Returns (dR, dL), sums of positive words of length len(word)-1 with
    scalar factors, such that

        [w, e_{-gamma}] = dR * K_gamma - Kt_gamma * dL,

    K_gamma = exp(phi(gamma, .)) placed right, Kt_gamma = exp(-phi(., gamma))
    placed left.
    """
    dR: Dict[TermKey, Scalar] = {}
    dL: Dict[TermKey, Scalar] = {}
    zv = zero_vec(spec)
    for i, a in enumerate(word):
        if a != gamma:
            continue
        rest = word[:i] + word[i + 1:]
        key = ((), zv, rest)
        cR = ONE
        for j in range(i + 1, len(word)):
            cR = cR * spec.kappa[gamma][word[j]]
        cL = ONE
        for j in range(i):
            cL = cL * spec.kappa[word[j]][gamma]
        dR[key] = dR.get(key, ZERO) + cR
        dL[key] = dL.get(key, ZERO) + cL
    return AlgebraElement(spec, dR), AlgebraElement(spec, dL)


# ---------------------------------------------------------------------------
# TensorElement
# ---------------------------------------------------------------------------

TensorKey = Tuple[TermKey, ...]


class TensorElement:
    """2- or 3-fold tensor products of normal-ordered terms."""

    __slots__ = ("spec", "nlegs", "terms")

    def __init__(self, spec: CartanSpec, nlegs: int, terms: Optional[Dict[TensorKey, Scalar]] = None):
        self.spec = spec
        self.nlegs = nlegs
        self.terms = {k: v for k, v in (terms or {}).items() if not v.is_zero()}

    @staticmethod
    def zero(spec: CartanSpec, nlegs: int) -> "TensorElement":
        return TensorElement(spec, nlegs, {})

    @staticmethod
    def one(spec: CartanSpec, nlegs: int) -> "TensorElement":
        unit = ((), zero_vec(spec), ())
        return TensorElement(spec, nlegs, {(unit,) * nlegs: ONE})

    @staticmethod
    def of(legs: Sequence[AlgebraElement]) -> "TensorElement":
        spec = legs[0].spec
        out: Dict[TensorKey, Scalar] = {}
        keys = [list(leg.terms.items()) for leg in legs]

        def rec(i, acc, coeff):
            if i == len(keys):
                k = tuple(acc)
                s = out.get(k, ZERO) + coeff
                if s.is_zero():
                    out.pop(k, None)
                else:
                    out[k] = s
                return
            for key, c in keys[i]:
                rec(i + 1, acc + [key], coeff * c)

        rec(0, [], ONE)
        return TensorElement(spec, len(legs), out)

    # -- linear structure -----------------------------------------------------

    def __add__(self, other: "TensorElement") -> "TensorElement":
        if self.spec is not other.spec or self.nlegs != other.nlegs:
            raise SpecMismatch("tensor mismatch")
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k, ZERO) + v
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return TensorElement(self.spec, self.nlegs, out)

    def __neg__(self) -> "TensorElement":
        return TensorElement(self.spec, self.nlegs, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "TensorElement":
        c = c if isinstance(c, Scalar) else scalars.rat(c)
        if c.is_zero():
            return TensorElement.zero(self.spec, self.nlegs)
        return TensorElement(self.spec, self.nlegs, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other: "TensorElement") -> "TensorElement":
        return self.mul_capped(other, None)

    def mul_capped(self, other: "TensorElement", cap: Optional[int]) -> "TensorElement":
        """Product, optionally dropping outputs with more than `cap` letters.

        Every normal-ordering reduction removes one positive letter from the
        left factor and one negative letter from the right factor in the same
        leg, so a term pair whose letter-count lower bound exceeds the cap
        cannot contribute below it and is skipped.
        """
        if self.spec is not other.spec or self.nlegs != other.nlegs:
            raise SpecMismatch("tensor mismatch")
        spec = self.spec
        out: Dict[TensorKey, Scalar] = {}
        left_terms = []
        for k1, c1 in self.terms.items():
            letters1 = sum(len(t[0]) + len(t[2]) for t in k1)
            pos1 = tuple(len(t[2]) for t in k1)
            left_terms.append((k1, c1, letters1, pos1, [_term_symbols(t) for t in k1]))
        for k1, c1, letters1, pos1, sym1 in left_terms:
            for k2, c2 in other.terms.items():
                if cap is not None:
                    lower = letters1
                    for leg in range(self.nlegs):
                        t = k2[leg]
                        ln, lp = len(t[0]), len(t[2])
                        lower += ln + lp - 2 * min(pos1[leg], ln)
                    if lower > cap:
                        continue
                legs = []
                for leg in range(self.nlegs):
                    legs.append(_normal_order(spec, sym1[leg] + _term_symbols(k2[leg]), ONE))
                items = [list(l.items()) for l in legs]

                def rec(i, acc, coeff):
                    if i == len(items):
                        k = tuple(acc)
                        if cap is not None and sum(
                            len(t[0]) + len(t[2]) for t in k
                        ) > cap:
                            return
                        s = out.get(k, ZERO) + coeff
                        if s.is_zero():
                            out.pop(k, None)
                        else:
                            out[k] = s
                        return
                    for key, c in items[i]:
                        rec(i + 1, acc + [key], coeff * c)

                rec(0, [], c1 * c2)
        return TensorElement(self.spec, self.nlegs, out)

    # -- structure ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def letters(self, key: Optional[TensorKey] = None) -> int:
        if key is not None:
            return sum(len(t[0]) + len(t[2]) for t in key)
        return max((self.letters(k) for k in self.terms), default=0)

    def truncate_letters(self, max_letters: int) -> "TensorElement":
        return TensorElement(
            self.spec, self.nlegs,
            {k: v for k, v in self.terms.items() if self.letters(k) <= max_letters},
        )

    def transpose(self, perm: Optional[Sequence[int]] = None) -> "TensorElement":
        """Permute legs; default swaps the two legs of a 2-tensor."""
        if perm is None:
            perm = (1, 0) if self.nlegs == 2 else tuple(reversed(range(self.nlegs)))
        out = {}
        for k, v in self.terms.items():
            kk = tuple(k[perm[i]] for i in range(self.nlegs))
            out[kk] = out.get(kk, ZERO) + v
        return TensorElement(self.spec, self.nlegs, out)

    def embed(self, nlegs: int, positions: Sequence[int]) -> "TensorElement":
        """Place this tensor's legs at the given positions of a wider tensor."""
        unit = ((), zero_vec(self.spec), ())
        out = {}
        for k, v in self.terms.items():
            legs = [unit] * nlegs
            for src, dst in enumerate(positions):
                legs[dst] = k[src]
            out[tuple(legs)] = v
        return TensorElement(self.spec, nlegs, out)

    def phi_conjugate(self, i: int, j: int, inverse: bool = True) -> "TensorElement":
        """Conjugate by the Cartan prefactor exp(phi^{ab} H_a (x) H_b) in legs (i, j).

        With inverse=True this computes Phi^{-1} X Phi: every letter
        e_{s alpha} in leg i gains exp(-s phi(alpha, .)) in leg j, and every
        letter e_{s beta} in leg j gains exp(-s phi(., beta)) in leg i.
        """
        spec = self.spec
        sgn = -1 if inverse else 1
        out = TensorElement.zero(spec, self.nlegs)
        unit_key = ((), zero_vec(spec), ())
        for key, coeff in self.terms.items():
            acc = TensorElement(spec, self.nlegs, {(unit_key,) * self.nlegs: coeff})
            for leg in range(self.nlegs):
                for s in _term_symbols(key[leg]):
                    legs = [unit_key] * self.nlegs
                    extra: Optional[Tuple[int, Vec]] = None
                    if s[0] == "k":
                        legs[leg] = ((), s[1], ())
                    elif s[0] == "p" or s[0] == "n":
                        sign = 1 if s[0] == "p" else -1
                        alpha = s[1]
                        legs[leg] = (((), zero_vec(spec), (alpha,)) if s[0] == "p"
                                     else ((alpha,), zero_vec(spec), ()))
                        if leg == i:
                            extra = (j, row_vec(spec, alpha, sgn * sign))
                        elif leg == j:
                            extra = (i, col_vec(spec, alpha, sgn * sign))
                    if extra is not None and any(extra[1]):
                        legs[extra[0]] = ((), extra[1], ())
                    acc = acc * TensorElement(spec, self.nlegs, {tuple(legs): ONE})
            out = out + acc
        return out

    def truncate_var(self, var: str, order: int) -> "TensorElement":
        """Drop coefficient monomials of degree > order in the named variable."""
        out = {}
        for k, v in self.terms.items():
            num = {}
            for mono, c in v.num.items():
                deg = dict(mono).get(var, 0)
                if deg <= order:
                    num[mono] = c
            for mono in v.den:
                if dict(mono).get(var, 0) != 0:
                    raise UnsupportedElement(
                        f"cannot truncate: denominator depends on {var}"
                    )
            if num:
                out[k] = Scalar(num, dict(v.den))
        return TensorElement(self.spec, self.nlegs, out)

    def coefficient_of_var_power(self, var: str, power: int) -> "TensorElement":
        out = {}
        inv = Scalar.symbol(var, -power) if power else ONE
        for k, v in self.terms.items():
            num = {}
            for mono, c in v.num.items():
                if dict(mono).get(var, 0) == power:
                    num[mono] = c
            for mono in v.den:
                if dict(mono).get(var, 0) != 0:
                    raise UnsupportedElement(
                        f"cannot extract: denominator depends on {var}"
                    )
            if num:
                out[k] = Scalar(num, dict(v.den)) * inv
        return TensorElement(self.spec, self.nlegs, out)

    def __eq__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        return (self.spec is other.spec and self.nlegs == other.nlegs
                and self.terms == other.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for key in sorted(self.terms, key=lambda k: (self.letters(k), k)):
            legs = []
            for t in key:
                legs.append(render_element(AlgebraElement(self.spec, {t: ONE})).replace("(1)*", ""))
            bits.append(f"({scalars.render(self.terms[key])})*[" + " (x) ".join(legs) + "]")
        return " + ".join(bits)


# ---------------------------------------------------------------------------
# coproduct
# ---------------------------------------------------------------------------

def coproduct(x: AlgebraElement, opposite: bool = False) -> TensorElement:
    """Algebra map with Delta f_sigma = K^sigma (x) f_sigma + f_sigma (x) 1.

    On the generators:
        Delta e_a    = 1 (x) e_a + e_a (x) exp(phi(a, .))
        Delta e_{-a} = e_{-a} (x) 1 + exp(-phi(., a)) (x) e_{-a}
        Delta K      = K (x) K.
    opposite=True returns the flipped coproduct.
    """
    spec = x.spec
    unit = ((), zero_vec(spec), ())
    total = TensorElement.zero(spec, 2)
    for key, coeff in x.terms.items():
        acc = TensorElement(spec, 2, {(unit, unit): coeff})
        for s in _term_symbols(key):
            if s[0] == "k":
                piece = TensorElement(spec, 2, {(((), s[1], ()), ((), s[1], ())): ONE})
            elif s[0] == "p":
                a = s[1]
                ka = ((), row_vec(spec, a), ())
                ea = ((), zero_vec(spec), (a,))
                piece = TensorElement(spec, 2, {(unit, ea): ONE, (ea, ka): ONE})
            else:
                a = s[1]
                kt = ((), col_vec(spec, a, -1), ())
                ea = ((a,), zero_vec(spec), ())
                piece = TensorElement(spec, 2, {(ea, unit): ONE, (kt, ea): ONE})
            acc = acc * piece
        total = total + acc
    return total.transpose() if opposite else total


def tensor_same(x: AlgebraElement, y: AlgebraElement) -> TensorElement:
    return TensorElement.of([x, y])
