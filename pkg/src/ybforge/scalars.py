"""Exact scalar arithmetic: multivariate rational functions over Q.

A Scalar is a ratio of Laurent polynomials in named indeterminates with
rational coefficients, kept in a canonical form so that equality is a
structural test.  Canonical form: the denominator is a true polynomial
(no negative exponents, no monomial content), monic with respect to the
graded-lexicographic monomial order, and shares no polynomial factor with
the numerator.  Laurent (negative) powers are allowed in numerators only.

All values are immutable; every operation returns a fresh Scalar.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

from .errors import (
    DivisionByZero,
    EssentialSingularity,
    MissingAssignment,
    PoleAtPoint,
)

Mono = Tuple[Tuple[str, int], ...]      # sorted ((name, exp), ...), exp != 0
Poly = Dict[Mono, Fraction]             # monomial -> coefficient, coeff != 0

ONE_MONO: Mono = ()


# ---------------------------------------------------------------------------
# monomial helpers
# ---------------------------------------------------------------------------

def mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for name, e in b:
        n = d.get(name, 0) + e
        if n:
            d[name] = n
        else:
            del d[name]
    return tuple(sorted(d.items()))


def mono_pow(a: Mono, k: int) -> Mono:
    if k == 0 or not a:
        return ONE_MONO
    return tuple((name, e * k) for name, e in a)


def mono_deg(a: Mono) -> int:
    return sum(e for _, e in a)


def _mono_lex_greater(a: Mono, b: Mono) -> bool:
    da, db = mono_deg(a), mono_deg(b)
    if da != db:
        return da > db
    ia, ib = dict(a), dict(b)
    for name in sorted(set(ia) | set(ib)):
        ea, eb = ia.get(name, 0), ib.get(name, 0)
        if ea != eb:
            return ea > eb
    return False


def leading_mono(p: Poly) -> Mono:
    best = None
    for m in p:
        if best is None or _mono_lex_greater(m, best):
            best = m
    return best if best is not None else ONE_MONO


# ---------------------------------------------------------------------------
# polynomial helpers (dict based, immutable by convention)
# ---------------------------------------------------------------------------

def poly_zero() -> Poly:
    return {}


def poly_const(c) -> Poly:
    c = Fraction(c)
    return {ONE_MONO: c} if c else {}


def poly_sym(name: str, exp: int = 1) -> Poly:
    if exp == 0:
        return poly_const(1)
    return {((name, exp),): Fraction(1)}


def poly_add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for m, c in b.items():
        n = out.get(m)
        if n is None:
            out[m] = c
        else:
            n = n + c
            if n:
                out[m] = n
            else:
                del out[m]
    return out


def poly_neg(a: Poly) -> Poly:
    return {m: -c for m, c in a.items()}


def poly_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    out: Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = mono_mul(ma, mb)
            c = out.get(m)
            if c is None:
                out[m] = ca * cb
            else:
                c = c + ca * cb
                if c:
                    out[m] = c
                else:
                    del out[m]
    return out


def poly_scale(a: Poly, c: Fraction) -> Poly:
    if not c:
        return {}
    return {m: cc * c for m, cc in a.items()}


def poly_mul_mono(a: Poly, m: Mono, c: Fraction = Fraction(1)) -> Poly:
    return {mono_mul(ma, m): ca * c for ma, ca in a.items()}


def poly_min_exps(a: Poly) -> Mono:
    """Monomial of per-variable minimum exponents appearing in `a`."""
    mins: Dict[str, int] = {}
    seen: Dict[str, bool] = {}
    names = set()
    for m in a:
        names.update(name for name, _ in m)
    for name in names:
        mins[name] = min(dict(m).get(name, 0) for m in a)
    return tuple(sorted((n, e) for n, e in mins.items() if e))


def poly_vars(a: Poly) -> Tuple[str, ...]:
    names = set()
    for m in a:
        names.update(name for name, _ in m)
    return tuple(sorted(names))


def _as_univariate(a: Poly, var: str) -> Dict[int, Poly]:
    """Split `a` as a polynomial in `var` with Poly coefficients."""
    out: Dict[int, Poly] = {}
    for m, c in a.items():
        d = dict(m)
        k = d.pop(var, 0)
        rest = tuple(sorted(d.items()))
        out.setdefault(k, {})[rest] = c
    return out


def _from_univariate(u: Dict[int, Poly], var: str) -> Poly:
    out: Poly = {}
    for k, p in u.items():
        for m, c in p.items():
            mm = mono_mul(m, ((var, k),) if k else ONE_MONO)
            out[mm] = out.get(mm, Fraction(0)) + c
    return {m: c for m, c in out.items() if c}


def poly_div_exact(a: Poly, b: Poly):
    """Return a/b when the division is exact, else None."""
    if not b:
        raise DivisionByZero("polynomial division by zero")
    if not a:
        return {}
    if len(b) == 1:
        (mb, cb), = b.items()
        return {mono_mul(m, mono_pow(mb, -1)): c / cb for m, c in a.items()}
    rem = dict(a)
    quot: Poly = {}
    lb = leading_mono(b)
    cb = b[lb]
    # bounded: every step strictly lowers the leading monomial of rem
    while rem:
        lr = leading_mono(rem)
        factor = mono_mul(lr, mono_pow(lb, -1))
        if any(e < 0 for _, e in factor):
            return None
        c = rem[lr] / cb
        quot[factor] = quot.get(factor, Fraction(0)) + c
        step = poly_mul_mono(b, factor, c)
        rem = poly_add(rem, poly_neg(step))
    return {m: c for m, c in quot.items() if c}


def _poly_content_and_primitive(u: Dict[int, Poly]):
    cont = None
    for k in sorted(u):
        cont = u[k] if cont is None else poly_gcd(cont, u[k])
        if cont == {ONE_MONO: Fraction(1)}:
            break
    if cont is None:
        cont = poly_const(1)
    prim = {k: poly_div_exact(p, cont) for k, p in u.items()}
    return cont, prim


def _pseudo_rem(a: Dict[int, Poly], b: Dict[int, Poly]) -> Dict[int, Poly]:
    da, db = max(a), max(b)
    lb = b[db]
    r = dict(a)
    while r and max(r) >= db:
        dr = max(r)
        lr = r[dr]
        # r <- lb*r - lr*x^(dr-db)*b
        nr: Dict[int, Poly] = {}
        for k, p in r.items():
            nr[k] = poly_mul(p, lb)
        for k, p in b.items():
            kk = k + dr - db
            nr[kk] = poly_add(nr.get(kk, {}), poly_neg(poly_mul(p, lr)))
        r = {k: p for k, p in nr.items() if p}
    return r


def _poly_key(p: Poly):
    return frozenset(p.items())


_GCD_CACHE: Dict[Tuple, Poly] = {}


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """GCD up to a rational unit; result normalized to leading coefficient 1."""
    if not a:
        return _monic(b)
    if not b:
        return _monic(a)
    if len(a) == 1 or len(b) == 1:
        ma = poly_min_exps(a) if len(a) > 1 else next(iter(a))
        mb = poly_min_exps(b) if len(b) > 1 else next(iter(b))
        common = {}
        da, db = dict(ma), dict(mb)
        for name in set(da) & set(db):
            e = min(da[name], db[name])
            if e > 0:
                common[name] = e
        return {tuple(sorted(common.items())): Fraction(1)}
    key = (_poly_key(a), _poly_key(b)) if len(a) <= len(b) else (_poly_key(b), _poly_key(a))
    hit = _GCD_CACHE.get(key)
    if hit is not None:
        return hit
    out = _poly_gcd_uncached(a, b)
    if len(_GCD_CACHE) > 20000:
        _GCD_CACHE.clear()
    _GCD_CACHE[key] = out
    return out


def _poly_gcd_uncached(a: Poly, b: Poly) -> Poly:
    # mutual-division fast paths (very common: powers of a shared factor)
    if len(a) >= len(b):
        if poly_div_exact(a, b) is not None:
            return _monic(b)
    if len(b) >= len(a):
        if poly_div_exact(b, a) is not None:
            return _monic(a)
    va, vb = poly_vars(a), poly_vars(b)
    common_vars = [v for v in va if v in vb]
    if not common_vars:
        return {ONE_MONO: Fraction(1)}
    var = common_vars[-1]
    ua, ub = _as_univariate(a, var), _as_univariate(b, var)
    if max(ua) == 0 or max(ub) == 0:
        ca = _gcd_of_coeffs(ua)
        cb = _gcd_of_coeffs(ub)
        return poly_gcd(ca, cb)
    conta, prima = _poly_content_and_primitive(ua)
    contb, primb = _poly_content_and_primitive(ub)
    contg = poly_gcd(conta, contb)
    f, g = prima, primb
    if max(f) < max(g):
        f, g = g, f
    # subresultant PRS: each pseudo-remainder is divided by a predicted
    # exact factor beta, avoiding content extraction at every step
    delta = max(f) - max(g)
    beta: Poly = poly_const((-1) ** (delta + 1))
    psi: Poly = poly_const(-1)
    while True:
        r = _pseudo_rem(f, g)
        if not r:
            break
        if max(r) == 0:
            g = {0: poly_const(1)}
            break
        rr: Dict[int, Poly] = {}
        for k, p in r.items():
            q = poly_div_exact(p, beta)
            if q is None:
                rr = {}
                break
            rr[k] = q
        if rr:
            r = rr
        else:
            _, r = _poly_content_and_primitive(r)
        lc_g = g[max(g)]
        if delta > 0:
            num = _poly_pow(poly_neg(lc_g), delta)
            psi = poly_div_exact(num, _poly_pow(psi, delta - 1)) if delta > 1 else num
        f, g = g, r
        delta = max(f) - max(g)
        beta = poly_mul(poly_neg(f[max(f)]), _poly_pow(psi, delta))
    _, gprim = _poly_content_and_primitive(g)
    gg = _from_univariate(gprim, var)
    return _monic(poly_mul(contg, gg))


def _poly_pow(p: Poly, k: int) -> Poly:
    out = poly_const(1)
    for _ in range(k):
        out = poly_mul(out, p)
    return out


def _gcd_of_coeffs(u: Dict[int, Poly]) -> Poly:
    out = None
    for k in sorted(u):
        out = u[k] if out is None else poly_gcd(out, u[k])
    return out if out is not None else poly_const(1)


def _monic(p: Poly) -> Poly:
    if not p:
        return p
    lc = p[leading_mono(p)]
    if lc == 1:
        return p
    return {m: c / lc for m, c in p.items()}


# ---------------------------------------------------------------------------
# Scalar
# ---------------------------------------------------------------------------

class Scalar:
    """Canonical multivariate rational function (Laurent numerator)."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly, _canonical: bool = False):
        if _canonical:
            self.num = num
            self.den = den
            return
        if not den:
            raise DivisionByZero("zero denominator")
        if not num:
            self.num = {}
            self.den = {ONE_MONO: Fraction(1)}
            return
        # clear Laurent content of the denominator into the numerator
        shift = poly_min_exps(den)
        if shift:
            inv = mono_pow(shift, -1)
            den = poly_mul_mono(den, inv)
            num = poly_mul_mono(num, inv)
        # cancel the polynomial gcd (numerator split into content * poly part)
        ncont = poly_min_exps(num)
        npoly = poly_mul_mono(num, mono_pow(ncont, -1)) if ncont else num
        if len(npoly) > 1 or len(den) > 1:
            g = poly_gcd(npoly, den)
            if g != {ONE_MONO: Fraction(1)}:
                npoly = poly_div_exact(npoly, g)
                den = poly_div_exact(den, g)
        lc = den[leading_mono(den)]
        if lc != 1:
            den = {m: c / lc for m, c in den.items()}
            npoly = {m: c / lc for m, c in npoly.items()}
        self.num = poly_mul_mono(npoly, ncont) if ncont else npoly
        self.den = den

    # -- constructors -------------------------------------------------------

    @staticmethod
    def from_fraction(c) -> "Scalar":
        return Scalar(poly_const(c), poly_const(1))

    @staticmethod
    def symbol(name: str, exp: int = 1) -> "Scalar":
        return Scalar(poly_sym(name, exp), poly_const(1))

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return self.num == {ONE_MONO: Fraction(1)} and self.den == {ONE_MONO: Fraction(1)}

    def is_rational(self):
        """Return the Fraction value if constant, else None."""
        if not self.num:
            return Fraction(0)
        if self.den == {ONE_MONO: Fraction(1)} and len(self.num) == 1 and ONE_MONO in self.num:
            return self.num[ONE_MONO]
        return None

    def variables(self) -> Tuple[str, ...]:
        return tuple(sorted(set(poly_vars(self.num)) | set(poly_vars(self.den))))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)):
                other = Scalar.from_fraction(other)
            else:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((frozenset(self.num.items()), frozenset(self.den.items())))

    def __bool__(self):
        return bool(self.num)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other) -> "Scalar":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.num:
            return other
        if not other.num:
            return self
        if self.den == other.den:
            return Scalar(poly_add(self.num, other.num), self.den)
        if len(self.den) > 1 and len(other.den) > 1:
            g = poly_gcd(self.den, other.den)
            if len(g) > 1 or g != {ONE_MONO: Fraction(1)}:
                d1 = poly_div_exact(self.den, g)
                d2 = poly_div_exact(other.den, g)
                num = poly_add(poly_mul(self.num, d2), poly_mul(other.num, d1))
                return Scalar(num, poly_mul(self.den, d2))
        num = poly_add(poly_mul(self.num, other.den), poly_mul(other.num, self.den))
        return Scalar(num, poly_mul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar(poly_neg(self.num), self.den, _canonical=True)

    def __sub__(self, other) -> "Scalar":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Scalar":
        return _coerce(other) - self

    def __mul__(self, other) -> "Scalar":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.num or not other.num:
            return ZERO
        return Scalar(poly_mul(self.num, other.num), poly_mul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Scalar":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.num:
            raise DivisionByZero("division by zero scalar")
        if not self.num:
            return ZERO
        return Scalar(poly_mul(self.num, other.den), poly_mul(self.den, other.num))

    def __rtruediv__(self, other) -> "Scalar":
        return _coerce(other) / self

    def inverse(self) -> "Scalar":
        if not self.num:
            raise DivisionByZero("inverse of zero")
        return Scalar(dict(self.den), dict(self.num))

    def __pow__(self, k: int) -> "Scalar":
        if not isinstance(k, int):
            raise TypeError("integral powers only")
        if k == 0:
            return ONE
        base = self if k > 0 else self.inverse()
        out = ONE
        for _ in range(abs(k)):
            out = out * base
        return out

    # -- analysis ------------------------------------------------------------

    def substitute(self, mapping: Mapping[str, "Scalar"]) -> "Scalar":
        num = _poly_substitute(self.num, mapping)
        den = _poly_substitute(self.den, mapping)
        if den.is_zero():
            raise DivisionByZero("substitution sends denominator to zero")
        return num / den

    def derivative(self, var: str) -> "Scalar":
        dn = _poly_derivative(self.num, var)
        dd = _poly_derivative(self.den, var)
        if not dd:
            return Scalar(dn, dict(self.den))
        # cancel the repeated part of the denominator up front:
        # (n/d)' = (n' (d/g) - n (d'/g)) / (d * (d/g)) with g = gcd(d, d')
        g = poly_gcd(self.den, dd)
        dg = poly_div_exact(self.den, g)
        ddg = poly_div_exact(dd, g)
        num = poly_add(poly_mul(dn, dg), poly_neg(poly_mul(self.num, ddg)))
        return Scalar(num, poly_mul(self.den, dg))

    def evaluate(self, assignment: Mapping[str, complex]) -> complex:
        num = _poly_eval(self.num, assignment)
        den = _poly_eval(self.den, assignment)
        if den == 0:
            raise PoleAtPoint("denominator vanishes at the assignment")
        return num / den

    def __repr__(self):
        return f"Scalar({render(self)})"


def _coerce(x):
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction)):
        return Scalar.from_fraction(x)
    return NotImplemented


def _poly_substitute(p: Poly, mapping: Mapping[str, Scalar]) -> Scalar:
    total = ZERO
    for m, c in p.items():
        term = Scalar.from_fraction(c)
        for name, e in m:
            if name in mapping:
                term = term * (mapping[name] ** e)
            else:
                term = term * Scalar.symbol(name, e)
        total = total + term
    return total


def _poly_derivative(p: Poly, var: str) -> Poly:
    out: Poly = {}
    for m, c in p.items():
        d = dict(m)
        e = d.get(var, 0)
        if not e:
            continue
        d[var] = e - 1
        mm = tuple(sorted((n, k) for n, k in d.items() if k))
        out[mm] = out.get(mm, Fraction(0)) + c * e
    return {m: c for m, c in out.items() if c}


def _poly_eval(p: Poly, assignment: Mapping[str, complex]) -> complex:
    total = 0
    for m, c in p.items():
        v = complex(c) if not isinstance(c, Fraction) else c
        term = c
        for name, e in m:
            if name not in assignment:
                raise MissingAssignment(f"no value for indeterminate {name!r}")
            term = term * assignment[name] ** e
        total = total + term
    return total


ZERO = Scalar(poly_zero(), poly_const(1))
ONE = Scalar.from_fraction(1)


# ---------------------------------------------------------------------------
# public operations mirroring the module contract
# ---------------------------------------------------------------------------

def scalar_arith(a: Scalar, b: Scalar, op: str) -> Scalar:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def evaluate_scalar(a: Scalar, assignment: Mapping[str, complex]) -> complex:
    return a.evaluate(assignment)


class TruncatedSeries:
    """Power-series truncation in one named variable with Scalar coefficients."""

    __slots__ = ("var", "order", "coeffs")

    def __init__(self, var: str, order: int, coeffs: Iterable[Scalar]):
        if order < 0:
            raise ValueError("order must be non-negative")
        cs = list(coeffs)
        if len(cs) < order + 1:
            cs += [ZERO] * (order + 1 - len(cs))
        self.var = var
        self.order = order
        self.coeffs = tuple(cs[: order + 1])

    @staticmethod
    def constant(value: Scalar, var: str, order: int) -> "TruncatedSeries":
        return TruncatedSeries(var, order, [value])

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.var, self.order, self.coeffs) == (other.var, other.order, other.coeffs)

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            other = TruncatedSeries.constant(_coerce(other), self.var, self.order)
        if self.var != other.var:
            raise ValueError("series variable mismatch")
        order = min(self.order, other.order)
        return TruncatedSeries(
            self.var, order,
            [self.coeffs[k] + other.coeffs[k] for k in range(order + 1)],
        )

    def __neg__(self):
        return TruncatedSeries(self.var, self.order, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            c = _coerce(other)
            return TruncatedSeries(self.var, self.order, [ck * c for ck in self.coeffs])
        if self.var != other.var:
            raise ValueError("series variable mismatch")
        order = min(self.order, other.order)
        out = [ZERO] * (order + 1)
        for i, a in enumerate(self.coeffs[: order + 1]):
            if a.is_zero():
                continue
            for j in range(order + 1 - i):
                b = other.coeffs[j]
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return TruncatedSeries(self.var, order, out)

    __rmul__ = __mul__

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs)

    def __repr__(self):
        parts = [f"({render(c)})*{self.var}^{k}" for k, c in enumerate(self.coeffs) if not c.is_zero()]
        return "Series[" + (" + ".join(parts) if parts else "0") + f" + O({self.var}^{self.order + 1})]"


def series_truncate(a: Scalar, var: str, order: int) -> TruncatedSeries:
    """Expand `a` at var=0 up to the given order (exact coefficients)."""
    nu = _as_univariate(a.num, var)
    du = _as_univariate(a.den, var)
    if not a.num:
        return TruncatedSeries(var, order, [])
    nmin, dmin = min(nu), min(du)
    if nmin - dmin < 0:
        raise EssentialSingularity(
            f"{render(a)} has a pole at {var}=0; no power-series expansion"
        )
    val = nmin - dmin
    a0 = Scalar(du[dmin], poly_const(1))
    coeffs = [ZERO] * (order + 1)
    s: Dict[int, Scalar] = {}
    for j in range(order + 1 - val):
        b = Scalar(nu.get(nmin + j, {}), poly_const(1))
        acc = b
        for i in range(1, j + 1):
            ai = du.get(dmin + i)
            if ai and (j - i) in s:
                acc = acc - Scalar(ai, poly_const(1)) * s[j - i]
        s[j] = acc / a0
        if val + j <= order:
            coeffs[val + j] = s[j]
    return TruncatedSeries(var, order, coeffs)


def exp_series(c: Scalar, var: str, order: int) -> TruncatedSeries:
    """exp(c*var) truncated at the given order."""
    coeffs = [ONE]
    term = ONE
    fact = 1
    for k in range(1, order + 1):
        fact *= k
        term = term * c
        coeffs.append(term * Fraction(1, fact))
    return TruncatedSeries(var, order, coeffs)


# ---------------------------------------------------------------------------
# rendering and parsing (the scalar-string grammar used in JSON interfaces)
# ---------------------------------------------------------------------------

def _mono_str(m: Mono, c: Fraction) -> str:
    parts = []
    if c == -1 and m:
        head = "-"
    elif c == 1 and m:
        head = ""
    else:
        head = str(c)
        if m:
            head += "*"
    for name, e in m:
        parts.append(name if e == 1 else f"{name}^{e}")
    return head + "*".join(parts)


def _poly_str(p: Poly) -> str:
    if not p:
        return "0"
    import functools

    monos = sorted(
        p,
        key=functools.cmp_to_key(
            lambda a, b: 1 if _mono_lex_greater(a, b) else (-1 if _mono_lex_greater(b, a) else 0)
        ),
        reverse=True,
    )
    out = _mono_str(monos[0], p[monos[0]])
    for m in monos[1:]:
        c = p[m]
        s = _mono_str(m, abs(c))
        out += (" - " if c < 0 else " + ") + s
    return out


def render(a: Scalar) -> str:
    """Deterministic canonical string form of a Scalar."""
    if a.den == {ONE_MONO: Fraction(1)}:
        return _poly_str(a.num)
    return f"({_poly_str(a.num)})/({_poly_str(a.den)})"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise ValueError(f"scalar parse error at {self.pos}: {msg} in {self.text!r}")

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expr(self) -> Scalar:
        value = self.term()
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                value = value + self.term()
            elif ch == "-":
                self.pos += 1
                value = value - self.term()
            else:
                return value

    def term(self) -> Scalar:
        value = self.factor()
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                value = value * self.factor()
            elif ch == "/":
                self.pos += 1
                value = value / self.factor()
            else:
                return value

    def factor(self) -> Scalar:
        ch = self.peek()
        if ch == "-":
            self.pos += 1
            return -self.factor()
        if ch == "+":
            self.pos += 1
            return self.factor()
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            sign = 1
            if self.peek() == "-":
                sign = -1
                self.pos += 1
            n = self._int()
            return base ** (sign * n)
        return base

    def atom(self) -> Scalar:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            value = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return value
        if ch.isdigit():
            return Scalar.from_fraction(self._int())
        if ch.isalpha() or ch == "_":
            return Scalar.symbol(self._name())
        self.error("expected atom")

    def _int(self) -> int:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected integer")
        return int(self.text[start:self.pos])

    def _name(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        return self.text[start:self.pos]


def parse(text: str) -> Scalar:
    """Parse the scalar grammar: integers, names, + - * / ^, parentheses."""
    p = _Parser(text)
    value = p.expr()
    if p.peek():
        p.error("trailing input")
    return value


def sym(name: str) -> Scalar:
    return Scalar.symbol(name)


def rat(num, den=1) -> Scalar:
    return Scalar.from_fraction(Fraction(num, den))
