"""Minimal exact computer-algebra core.

Expressions are immutable trees whose constructors always return a canonical
form: sums of products with exact rational coefficients, factors sorted by a
fixed total order, equal bases merged, and positive integer powers of sums
expanded.  Floating point numbers only enter at evaluation time.

Besides the canonical form, two trigonometric rewrites are built in:
``sin(u)^2 + cos(u)^2 -> 1`` and the angle-sum folds
``cos(u)cos(v) -+ sin(u)sin(v) -> cos(u +- v)`` and
``sin(u)cos(v) +- cos(u)sin(v) -> sin(u +- v)``.  Anything beyond that is left to
:func:`equal_expr`, which falls back to numeric probing.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Union

Number = Union[int, Fraction, float]

VARIABLES = ("t", "x", "y", "psi", "p", "q")
UNARY_FUNCTIONS = ("sin", "cos", "exp", "ln", "arctan")
_MAX_EXPAND_POWER = 16


class ExprError(Exception):
    """Base class for expression engine errors."""


class ExprDomainError(ExprError, ValueError):
    """Evaluation left the real domain (ln of a non-positive number, ...)."""


class UnboundSymbolError(ExprError, KeyError):
    def __str__(self):
        return f"unbound symbol {self.args[0]!r}"


def to_fraction(value: Number) -> Fraction:
    """Exact rational for ``value``; floats go through their shortest repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ExprDomainError(f"non-finite constant {value!r}")
        return Fraction(repr(value))
    try:
        return Fraction(value)
    except TypeError:
        return to_fraction(float(value))


# ---------------------------------------------------------------------------
# Node classes


class Expr:
    __slots__ = ("_key", "_hash", "_free")

    def _init_cache(self, key):
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))
        object.__setattr__(self, "_free", None)

    def sort_key(self):
        return self._key

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Expr):
            return self._hash == other._hash and self._key == other._key
        if isinstance(other, (int, Fraction)):
            return isinstance(self, Const) and self.value == other
        return NotImplemented

    def __lt__(self, other):
        return self._key < other._key

    def __setattr__(self, name, value):
        if hasattr(self, "_key") and name != "_free":
            raise AttributeError("expressions are immutable")
        object.__setattr__(self, name, value)

    # arithmetic sugar
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if isinstance(n, Expr):
            if not isinstance(n, Const):
                raise ExprError("only rational constant exponents are supported")
            n = n.value
        return power(self, to_fraction(n))

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"Expr({to_string(self)!r})"

    def free_symbols(self) -> frozenset:
        if self._free is None:
            object.__setattr__(self, "_free", frozenset(self._compute_free()))
        return self._free

    def _compute_free(self):
        return ()

    @property
    def is_zero(self) -> bool:
        return isinstance(self, Const) and self.value == 0


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Number):
        object.__setattr__(self, "value", to_fraction(value))
        self._init_cache((0, self.value))


class Sym(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        self._init_cache((1, name))

    def _compute_free(self):
        return (self.name,)


class Func(Expr):
    """Unary elementary function node; build through :func:`func`."""

    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arg", arg)
        self._init_cache((2, name, arg._key))

    def _compute_free(self):
        return self.arg.free_symbols()


class Atan2(Expr):
    """``arctan2(num, den)``: the angle whose tangent is num/den, quadrant aware."""

    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr):
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        self._init_cache((3, num._key, den._key))

    def _compute_free(self):
        return self.num.free_symbols() | self.den.free_symbols()


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: Fraction):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", exp)
        self._init_cache((4, base._key, exp))

    def _compute_free(self):
        return self.base.free_symbols()


class Mul(Expr):
    """coeff * prod(base**exp); factors sorted, at least one factor."""

    __slots__ = ("coeff", "factors")

    def __init__(self, coeff: Fraction, factors: tuple):
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "factors", factors)
        self._init_cache((5, tuple((b._key, e) for b, e in factors), coeff))

    def _compute_free(self):
        out = set()
        for b, _ in self.factors:
            out |= b.free_symbols()
        return out


class Add(Expr):
    """const + sum(coeff * monomial); monomials carry unit coefficient."""

    __slots__ = ("const", "terms")

    def __init__(self, const: Fraction, terms: tuple):
        object.__setattr__(self, "const", const)
        object.__setattr__(self, "terms", terms)
        self._init_cache((6, tuple((m._key, c) for m, c in terms), const))

    def _compute_free(self):
        out = set()
        for m, _ in self.terms:
            out |= m.free_symbols()
        return out


ZERO = Const(0)
ONE = Const(1)
HALF = Fraction(1, 2)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        from .parser import parse

        return parse(value)
    return Const(value)


def sym(name: str) -> Sym:
    return Sym(name)


def symbols(names: str):
    return tuple(Sym(n) for n in names.replace(",", " ").split())


# ---------------------------------------------------------------------------
# Canonical constructors


def _as_powers(e: Expr):
    if isinstance(e, Const):
        return e.value, {}
    if isinstance(e, Pow):
        return Fraction(1), {e.base: e.exp}
    if isinstance(e, Mul):
        return e.coeff, dict(e.factors)
    return Fraction(1), {e: Fraction(1)}


def _as_coeff_mono(e: Expr):
    if isinstance(e, Const):
        return e.value, None
    if isinstance(e, Mul):
        if e.coeff == 1:
            return e.coeff, e
        return e.coeff, _from_powers(Fraction(1), dict(e.factors))
    return Fraction(1), e


def _from_powers(coeff: Fraction, powers: Mapping[Expr, Fraction]) -> Expr:
    if coeff == 0:
        return ZERO
    items = sorted(((b, e) for b, e in powers.items() if e != 0), key=lambda be: be[0]._key)
    if not items:
        return Const(coeff)
    if coeff == 1 and len(items) == 1:
        b, e = items[0]
        return b if e == 1 else Pow(b, e)
    return Mul(coeff, tuple(items))


def _leading_coeff(e: Expr) -> Fraction:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Mul):
        return e.coeff
    if isinstance(e, Add):
        return e.terms[0][1]
    return Fraction(1)


def _is_negative(e: Expr) -> bool:
    return _leading_coeff(e) < 0


def neg(e: Expr) -> Expr:
    return mul(Const(-1), e)


def _exact_root(v: Fraction, n: int):
    """Exact positive n-th root of v > 0, or None."""
    out = []
    for part in (v.numerator, v.denominator):
        r = round(part ** (1.0 / n))
        for cand in (r - 1, r, r + 1):
            if cand > 0 and cand**n == part:
                out.append(cand)
                break
        else:
            return None
    return Fraction(out[0], out[1])


def _const_power(v: Fraction, n: Fraction) -> Expr:
    if n.denominator == 1:
        if v == 0 and n < 0:
            raise ExprDomainError("division by zero")
        return Const(v ** int(n))
    if v == 0:
        return ZERO if n > 0 else _raise(ExprDomainError("division by zero"))
    if v == 1:
        return ONE
    if v < 0:
        return Pow(Const(v), n)
    whole = n.numerator // n.denominator
    frac = n - whole
    root = _exact_root(v, frac.denominator)
    if root is not None:
        return Const(v**whole * root**frac.numerator)
    return _from_powers(v**whole, {Const(v): frac})


def _raise(exc):
    raise exc


def power(base: Expr, n) -> Expr:
    n = to_fraction(n)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        return _const_power(base.value, n)
    if isinstance(base, Pow):
        if n.denominator == 1 or abs(base.exp.numerator) == 1:
            return power(base.base, base.exp * n)
        return Pow(base, n)
    if isinstance(base, Mul):
        if n.denominator == 1:
            return mul(Const(base.coeff**int(n)), *[power(b, e * n) for b, e in base.factors])
        return Pow(base, n)
    if isinstance(base, Add):
        if n.denominator == 1 and 0 < n <= _MAX_EXPAND_POWER:
            return mul(*([base] * int(n)))
        lead = base.terms[0][1]
        if lead != 1 and (lead > 0 or n.denominator == 1):
            inner = mul(Const(1 / lead), base)
            return mul(_const_power(lead, n), Pow(inner, n))
        return Pow(base, n)
    if isinstance(base, Func) and base.name == "exp" and n.denominator == 1:
        return func("exp", mul(Const(n), base.arg))
    return Pow(base, n)


def mul(*args: Expr) -> Expr:
    coeff = Fraction(1)
    powers: dict = {}
    for arg in args:
        arg = as_expr(arg)
        c, pw = _as_powers(arg)
        coeff *= c
        if coeff == 0:
            return ZERO
        for b, e in pw.items():
            powers[b] = powers.get(b, 0) + e

    rest: dict = {}
    exp_args = []
    sums = []
    for b, e in powers.items():
        if e == 0:
            continue
        if isinstance(b, Const):
            c2, pw2 = _as_powers(_const_power(b.value, e))
            coeff *= c2
            for b2, e2 in pw2.items():
                rest[b2] = rest.get(b2, 0) + e2
        elif isinstance(b, Func) and b.name == "exp" and e.denominator == 1:
            exp_args.append(mul(Const(e), b.arg))
        elif isinstance(b, Add) and e.denominator == 1 and e > 0:
            sums.append((b, int(e)))
        else:
            rest[b] = e
    if exp_args:
        total = add(*exp_args)
        if not total.is_zero:
            f = func("exp", total)
            if isinstance(f, Func) and f.name == "exp":
                rest[f] = rest.get(f, 0) + 1
            else:
                return mul(_from_powers(coeff, rest), f, *[power(s, k) for s, k in sums])
    head = _from_powers(coeff, rest)
    if not sums:
        return head
    expanded = [head]
    for s, k in sums:
        summands = [Const(s.const)] if s.const != 0 else []
        summands += [_from_powers(c, _as_powers(m)[1]) for m, c in s.terms]
        for _ in range(k):
            expanded = [mul(t, u) for t in expanded for u in summands]
    return add(*expanded)


def add(*args: Expr) -> Expr:
    const = Fraction(0)
    terms: dict = {}
    for arg in args:
        arg = as_expr(arg)
        if isinstance(arg, Add):
            const += arg.const
            for m, c in arg.terms:
                terms[m] = terms.get(m, 0) + c
        else:
            c, m = _as_coeff_mono(arg)
            if m is None:
                const += c
            else:
                terms[m] = terms.get(m, 0) + c
    terms = {m: c for m, c in terms.items() if c != 0}
    if len(terms) > 1:
        const += _fold_trig(terms)
    if not terms:
        return Const(const)
    if const == 0 and len(terms) == 1:
        (m, c), = terms.items()
        return _from_powers(c, _as_powers(m)[1])
    return Add(const, tuple(sorted(terms.items(), key=lambda mc: mc[0]._key)))


def _trig_factors(powers, name):
    return [b for b, e in powers.items() if isinstance(b, Func) and b.name == name and e >= 1 and e.denominator == 1]


def _shift(powers, changes):
    out = dict(powers)
    for b, d in changes:
        out[b] = out.get(b, 0) + d
    return {b: e for b, e in out.items() if e != 0}


def _fold_trig(terms: dict) -> Fraction:
    """Apply the built-in trig rewrites to ``terms`` in place; return constant spill."""
    spill = Fraction(0)
    if len(terms) > 400:
        return spill
    changed = True
    while changed:
        changed = False
        for m, k in sorted(terms.items(), key=lambda mc: mc[0]._key):
            pw = _as_powers(m)[1]
            sines = _trig_factors(pw, "sin")
            cosines = _trig_factors(pw, "cos")
            if not sines and not cosines:
                continue
            for s in sines:
                if pw[s] < 2:
                    continue
                c = func("cos", s.arg)
                partner = _from_powers(Fraction(1), _shift(pw, [(s, -2), (c, 2)]))
                if terms.get(partner) == k:
                    del terms[m], terms[partner]
                    reduced = _from_powers(k, _shift(pw, [(s, -2)]))
                    spill += _merge_term(terms, reduced)
                    changed = True
                    break
            if changed:
                break
            # cos(u)cos(v) with sin(u)sin(v)
            for i, cu in enumerate(cosines):
                for cv in cosines[i + 1:]:
                    su, sv = func("sin", cu.arg), func("sin", cv.arg)
                    partner = _from_powers(Fraction(1), _shift(pw, [(cu, -1), (cv, -1), (su, 1), (sv, 1)]))
                    pk = terms.get(partner)
                    if pk is None or abs(pk) != abs(k):
                        continue
                    angle = add(cu.arg, cv.arg) if pk == -k else add(cu.arg, neg(cv.arg))
                    del terms[m], terms[partner]
                    spill += _merge_term(terms, mul(_from_powers(k, _shift(pw, [(cu, -1), (cv, -1)])), func("cos", angle)))
                    changed = True
                    break
                if changed:
                    break
            if changed:
                break
            # sin(u)cos(v) with cos(u)sin(v)
            for su in sines:
                for cv in cosines:
                    if cv.arg == su.arg:
                        continue
                    cu, sv = func("cos", su.arg), func("sin", cv.arg)
                    partner = _from_powers(Fraction(1), _shift(pw, [(su, -1), (cv, -1), (cu, 1), (sv, 1)]))
                    pk = terms.get(partner)
                    if pk is None or abs(pk) != abs(k) or partner == m:
                        continue
                    angle = add(su.arg, cv.arg) if pk == k else add(su.arg, neg(cv.arg))
                    del terms[m], terms[partner]
                    spill += _merge_term(terms, mul(_from_powers(k, _shift(pw, [(su, -1), (cv, -1)])), func("sin", angle)))
                    changed = True
                    break
                if changed:
                    break
            if changed:
                break
    return spill


def _merge_term(terms: dict, e: Expr) -> Fraction:
    spill = Fraction(0)
    parts = e.terms if isinstance(e, Add) else None
    if parts is not None:
        spill += e.const
        items = parts
    else:
        c, m = _as_coeff_mono(e)
        if m is None:
            return c
        items = ((m, c),)
    for m, c in items:
        v = terms.get(m, 0) + c
        if v == 0:
            terms.pop(m, None)
        else:
            terms[m] = v
    return spill


def func(name: str, arg) -> Expr:
    arg = as_expr(arg)
    if name == "sqrt":
        return power(arg, HALF)
    if name == "log":
        name = "ln"
    if name == "atan":
        name = "arctan"
    if name not in UNARY_FUNCTIONS:
        raise ExprError(f"unknown function {name!r}")
    if name == "sin":
        if arg.is_zero:
            return ZERO
        if _is_negative(arg):
            return neg(Func("sin", neg(arg)))
    elif name == "cos":
        if arg.is_zero:
            return ONE
        if _is_negative(arg):
            return Func("cos", neg(arg))
    elif name == "arctan":
        if arg.is_zero:
            return ZERO
        if _is_negative(arg):
            return neg(Func("arctan", neg(arg)))
    elif name == "exp":
        if arg.is_zero:
            return ONE
    elif name == "ln":
        if arg == ONE:
            return ZERO
        if isinstance(arg, Func) and arg.name == "exp":
            return arg.arg
    return Func(name, arg)


def atan2(num, den) -> Expr:
    num, den = as_expr(num), as_expr(den)
    if num.is_zero and isinstance(den, Const) and den.value > 0:
        return ZERO
    return Atan2(num, den)


def sin(u):
    return func("sin", u)


def cos(u):
    return func("cos", u)


def exp(u):
    return func("exp", u)


def ln(u):
    return func("ln", u)


def sqrt(u):
    return power(as_expr(u), HALF)


def arctan(u):
    return func("arctan", u)


# ---------------------------------------------------------------------------
# Calculus and rebuilding


@lru_cache(maxsize=200_000)
def diff(e: Expr, s: str) -> Expr:
    """Derivative of ``e`` with respect to the symbol named ``s``."""
    if isinstance(s, Sym):
        s = s.name
    if s not in e.free_symbols():
        return ZERO
    if isinstance(e, Sym):
        return ONE
    if isinstance(e, Add):
        return add(*[mul(Const(c), diff(m, s)) for m, c in e.terms])
    if isinstance(e, (Mul, Pow)):
        coeff, pw = _as_powers(e)
        items = list(pw.items())
        out = []
        for i, (b, k) in enumerate(items):
            db = diff(b, s)
            if db.is_zero:
                continue
            others = [power(b2, k2) for j, (b2, k2) in enumerate(items) if j != i]
            out.append(mul(Const(coeff * k), power(b, k - 1), db, *others))
        return add(*out)
    if isinstance(e, Func):
        u = e.arg
        du = diff(u, s)
        if e.name == "sin":
            return mul(func("cos", u), du)
        if e.name == "cos":
            return neg(mul(func("sin", u), du))
        if e.name == "exp":
            return mul(e, du)
        if e.name == "ln":
            return mul(du, power(u, -1))
        if e.name == "arctan":
            return mul(du, power(add(ONE, power(u, 2)), -1))
    if isinstance(e, Atan2):
        n, d = e.num, e.den
        top = add(mul(d, diff(n, s)), neg(mul(n, diff(d, s))))
        return mul(top, power(add(power(n, 2), power(d, 2)), -1))
    raise ExprError(f"cannot differentiate {e!r}")


def subs(e: Expr, mapping: Mapping[str, object]) -> Expr:
    """Simultaneous substitution of symbols by expressions (or numbers)."""
    mapping = {(k.name if isinstance(k, Sym) else k): as_expr(v) for k, v in mapping.items()}
    if not mapping:
        return _rebuild(e, {}, {})
    return _rebuild(e, mapping, {})


def _rebuild(e: Expr, mapping, memo) -> Expr:
    if mapping and not (e.free_symbols() & mapping.keys()):
        if not isinstance(e, (Add, Mul, Pow, Func, Atan2)):
            return e
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = e
    elif isinstance(e, Sym):
        out = mapping.get(e.name, e)
    elif isinstance(e, Add):
        out = add(Const(e.const), *[mul(Const(c), _rebuild(m, mapping, memo)) for m, c in e.terms])
    elif isinstance(e, Mul):
        out = mul(Const(e.coeff), *[power(_rebuild(b, mapping, memo), k) for b, k in e.factors])
    elif isinstance(e, Pow):
        out = power(_rebuild(e.base, mapping, memo), e.exp)
    elif isinstance(e, Func):
        out = func(e.name, _rebuild(e.arg, mapping, memo))
    elif isinstance(e, Atan2):
        out = atan2(_rebuild(e.num, mapping, memo), _rebuild(e.den, mapping, memo))
    else:
        raise ExprError(f"unknown node {e!r}")
    memo[e] = out
    return out


def simplify(e: Expr) -> Expr:
    """Rebuild ``e`` through the canonical constructors."""
    return _rebuild(e, {}, {})


def expand(e: Expr) -> Expr:
    return simplify(e)


# ---------------------------------------------------------------------------
# Printing


_ATOMIC = (Sym, Func, Atan2)


def to_string(e: Expr) -> str:
    if isinstance(e, Const):
        return _const_str(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_string(e.arg)})"
    if isinstance(e, Atan2):
        return f"arctan2({to_string(e.num)}, {to_string(e.den)})"
    if isinstance(e, Pow):
        return _power_str(e.base, e.exp)
    if isinstance(e, Mul):
        return _product_str(e.coeff, e.factors)
    if isinstance(e, Add):
        parts = []
        for m, c in e.terms:
            parts.append((c < 0, _term_str(abs(c), m)))
        if e.const != 0:
            parts.append((e.const < 0, _const_str(abs(e.const))))
        out = ("-" if parts[0][0] else "") + parts[0][1]
        for negative, text in parts[1:]:
            out += (" - " if negative else " + ") + text
        return out
    raise ExprError(f"unknown node {e!r}")


def _const_str(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _base_str(b: Expr) -> str:
    if isinstance(b, _ATOMIC) or (isinstance(b, Const) and b.value.denominator == 1 and b.value > 0):
        return to_string(b)
    return f"({to_string(b)})"


def _power_str(b: Expr, k: Fraction) -> str:
    if k == HALF:
        return f"sqrt({to_string(b)})"
    if k == 1:
        return _base_str(b)
    if k.denominator == 1 and k > 0:
        return f"{_base_str(b)}^{k.numerator}"
    return f"{_base_str(b)}^({_const_str(k)})"


def _product_str(coeff: Fraction, factors) -> str:
    body = "*".join(_power_str(b, k) for b, k in factors)
    if coeff == 1:
        return body
    if coeff == -1:
        return "-" + body
    return f"{_const_str(coeff)}*{body}"


def _term_str(c: Fraction, m: Expr) -> str:
    factors = m.factors if isinstance(m, Mul) else _as_powers(m)[1].items()
    return _product_str(c, tuple(factors))


# ---------------------------------------------------------------------------
# Evaluation


def evaluate(e: Expr, point: Mapping[str, float]) -> float:
    """IEEE double evaluation with strict real-domain checks."""
    missing = e.free_symbols() - point.keys()
    if missing:
        raise UnboundSymbolError(sorted(missing)[0])
    for k in e.free_symbols():
        if not math.isfinite(point[k]):
            raise ExprDomainError(f"non-finite value bound to {k!r}")
    try:
        return _eval(e, point)
    except (ZeroDivisionError, OverflowError) as exc:
        raise ExprDomainError(str(exc)) from exc


def _eval(e: Expr, pt) -> float:
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Sym):
        return float(pt[e.name])
    if isinstance(e, Add):
        return float(e.const) + math.fsum(float(c) * _eval(m, pt) for m, c in e.terms)
    if isinstance(e, Mul):
        out = float(e.coeff)
        for b, k in e.factors:
            out *= _eval_pow(_eval(b, pt), k)
        return out
    if isinstance(e, Pow):
        return _eval_pow(_eval(e.base, pt), e.exp)
    if isinstance(e, Func):
        u = _eval(e.arg, pt)
        if e.name == "ln":
            if u <= 0:
                raise ExprDomainError(f"ln of non-positive value {u}")
            return math.log(u)
        return getattr(math, {"arctan": "atan"}.get(e.name, e.name))(u)
    if isinstance(e, Atan2):
        return math.atan2(_eval(e.num, pt), _eval(e.den, pt))
    raise ExprError(f"unknown node {e!r}")


def _eval_pow(b: float, k: Fraction) -> float:
    if k.denominator == 1:
        if b == 0 and k < 0:
            raise ExprDomainError("division by zero")
        return b ** int(k)
    if b < 0:
        raise ExprDomainError(f"fractional power of negative value {b}")
    if b == 0 and k < 0:
        raise ExprDomainError("division by zero")
    return b ** float(k)


def to_numpy_source(e: Expr) -> str:
    if isinstance(e, Const):
        return repr(float(e.value))
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Add):
        parts = [repr(float(e.const))] if e.const else []
        parts += [f"{float(c)!r}*{to_numpy_source(m)}" for m, c in e.terms]
        return "(" + " + ".join(parts) + ")"
    if isinstance(e, (Mul, Pow)):
        c, pw = _as_powers(e)
        parts = [repr(float(c))] if c != 1 else []
        for b, k in pw.items():
            src = to_numpy_source(b)
            if k == 1:
                parts.append(src)
            elif k.denominator == 1:
                parts.append(f"np.power({src}, {int(k)}.0)" if k < 0 else f"{src}**{int(k)}")
            else:
                parts.append(f"np.power({src}, {float(k)!r})")
        return "(" + "*".join(parts) + ")"
    if isinstance(e, Func):
        fn = {"ln": "log"}.get(e.name, e.name)
        return f"np.{fn}({to_numpy_source(e.arg)})"
    if isinstance(e, Atan2):
        return f"np.arctan2({to_numpy_source(e.num)}, {to_numpy_source(e.den)})"
    raise ExprError(f"unknown node {e!r}")


def lambdify(e: Expr, names: Iterable[str]) -> Callable:
    """Vectorized numpy function of the given symbols (others must be absent)."""
    import numpy as np

    names = list(names)
    missing = e.free_symbols() - set(names)
    if missing:
        raise UnboundSymbolError(sorted(missing)[0])
    src = f"def _f({', '.join(names)}):\n    return {to_numpy_source(e)} + 0*({' + '.join(names) if names else '0'})\n"
    scope = {"np": np}
    exec(src, scope)  # noqa: S102 - generated from a canonical tree
    return scope["_f"]


# ---------------------------------------------------------------------------
# Equality


@dataclass(frozen=True)
class Equality:
    equal: bool
    method: str  # "canonical", "probabilistic" or "undetermined"
    points: int = 0

    def __bool__(self):
        return self.equal


def equal_expr(e1, e2, *, points: int = 50, rtol: float = 1e-10, seed: int = 0,
               ranges: Mapping[str, tuple] | None = None) -> Equality:
    """Canonical comparison with a numeric-probing fallback.

    The fallback samples symbols uniformly in [-2, 2] (override per symbol with
    ``ranges``), skipping points where either side is undefined.
    """
    e1, e2 = as_expr(e1), as_expr(e2)
    d = add(e1, neg(e2))
    if e1 == e2 or d.is_zero:
        return Equality(True, "canonical")
    names = sorted(e1.free_symbols() | e2.free_symbols())
    if not names:
        a, b = _safe_eval(e1, {}), _safe_eval(e2, {})
        ok = a is not None and b is not None and abs(a - b) <= rtol * max(1.0, abs(a), abs(b))
        return Equality(ok, "probabilistic", 1)
    rng = random.Random(seed)
    ranges = dict(ranges or {})
    good = 0
    for _ in range(points * 20):
        pt = {n: rng.uniform(*ranges.get(n, (-2.0, 2.0))) for n in names}
        a, b = _safe_eval(e1, pt), _safe_eval(e2, pt)
        if a is None or b is None:
            continue
        if abs(a - b) > rtol * max(1.0, abs(a), abs(b)):
            return Equality(False, "probabilistic", good + 1)
        good += 1
        if good >= points:
            return Equality(True, "probabilistic", good)
    return Equality(False, "undetermined", good)


def _safe_eval(e, pt):
    try:
        v = evaluate(e, pt)
    except (ExprDomainError, ValueError, OverflowError):
        return None
    return v if math.isfinite(v) else None
