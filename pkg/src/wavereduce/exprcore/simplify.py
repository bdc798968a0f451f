"""Canonicalising simplifier.

The canonical form is a flattened sum of monomials. Each monomial is a
numeric coefficient times a product of powers of non-numeric atoms
(symbols, function applications, powers of sums that are not expanded).
Building it folds constants exactly, collects like terms and like
factors, distributes products over sums, and applies the rewrites

    sin(a)^2 + cos(a)^2 -> 1      log(exp(a)) -> a      exp(log(a)) -> a
    exp(a)*exp(b) -> exp(a+b)     sqrt(a) -> a^(1/2)

Every rule preserves the value wherever the input is defined. Fractional
powers are only merged or distributed when that holds for all real
inputs on the domain of the original expression.
"""
from __future__ import annotations

import math
from fractions import Fraction

from .nodes import (
    MINUS_ONE,
    ONE,
    ZERO,
    Expr,
    _make,
    num,
    sort_key,
)

MAX_PASSES = 8
# cap on terms produced by distributing a product over sums
MAX_EXPANSION_TERMS = 400
MAX_EXPAND_POWER = 12

_HALF = Fraction(1, 2)


def simplify(e: Expr, max_passes: int = MAX_PASSES) -> Expr:
    cur = e
    for _ in range(max_passes):
        nxt = _canon(cur)
        if nxt is cur:
            break
        cur = nxt
    return cur


def _canon(e: Expr) -> Expr:
    done = e._simp
    if done is not None:
        return done
    kind = e.kind
    if kind in ("num", "sym"):
        out = e
    elif kind == "add":
        out = c_add([_canon(a) for a in e.args])
    elif kind == "sub":
        a, b = e.args
        out = c_add([_canon(a), c_mul([MINUS_ONE, _canon(b)])])
    elif kind == "neg":
        out = c_mul([MINUS_ONE, _canon(e.args[0])])
    elif kind == "mul":
        out = c_mul([_canon(a) for a in e.args])
    elif kind == "div":
        a, b = e.args
        out = c_mul([_canon(a), c_pow(_canon(b), Fraction(-1))])
    elif kind == "pow":
        out = c_pow(_canon(e.args[0]), e.value)
    elif kind == "fn":
        out = c_fn(e.value, _canon(e.args[0]))
    else:  # pragma: no cover
        raise AssertionError(kind)
    object.__setattr__(e, "_simp", out)
    return out


# -- numbers ---------------------------------------------------------------


def _num_mul(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return float(a) * float(b)
    return a * b


def _num_add(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return float(a) + float(b)
    return a + b


def _exact_root(x: int, q: int):
    if x < 0:
        return None
    try:
        r = round(x ** (1.0 / q))
    except OverflowError:
        return None
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**q == x:
            return cand
    return None


def _num_pow(base, k: Fraction):
    """Return a numeric value, or None when the power is not a rational number."""
    if isinstance(base, float):
        if k.denominator == 1:
            if base == 0 and k < 0:
                return None
            return base ** int(k)
        if base > 0:
            return base ** float(k)
        return None
    if k.denominator == 1:
        if base == 0 and k < 0:
            return None
        return base ** int(k)
    if base <= 0:
        return None
    q = k.denominator
    rn = _exact_root(base.numerator, q)
    rd = _exact_root(base.denominator, q)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd) ** k.numerator


# -- monomial helpers ------------------------------------------------------


def split_coeff(term: Expr):
    """term -> (numeric coefficient, rest) with rest free of a leading number."""
    if term.kind == "num":
        return term.value, ONE
    if term.kind == "mul" and term.args[0].kind == "num":
        rest = term.args[1:]
        return term.args[0].value, rest[0] if len(rest) == 1 else _make("mul", None, rest)
    return Fraction(1), term


def factors_of(e: Expr) -> tuple:
    if e.is_one:
        return ()
    if e.kind == "mul":
        return e.args
    return (e,)


def _monomial(coeff, rest: Expr) -> Expr:
    if coeff == 0:
        return ZERO
    if rest.is_one:
        return num(coeff)
    if coeff == 1:
        return rest
    return _make("mul", None, (num(coeff),) + factors_of(rest))


# -- sums ------------------------------------------------------------------


def c_add(terms: list) -> Expr:
    flat = []
    for t in terms:
        if t.kind == "add":
            flat.extend(t.args)
        else:
            flat.append(t)
    coeffs: dict = {}
    for t in flat:
        c, rest = split_coeff(t)
        if rest in coeffs:
            coeffs[rest] = _num_add(coeffs[rest], c)
        else:
            coeffs[rest] = c
    _pythagorean(coeffs)
    out = [_monomial(c, r) for r, c in coeffs.items() if c != 0]
    if len(out) > 1:
        merged = _collect_quotients(out)
        if merged is not None:
            return c_add(merged)
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    out.sort(key=lambda t: sort_key(split_coeff(t)[1]))
    return _make("add", None, tuple(out))


def _pythagorean(coeffs: dict) -> None:
    """c1*S*sin(a)^m + c2*S*cos(a)^2*sin(a)^(m-2)  ->  c2*S*sin^(m-2) + (c1-c2)*S*sin^m."""
    for _ in range(64):
        changed = False
        for rest in list(coeffs):
            if rest not in coeffs or coeffs[rest] == 0:
                continue
            facs = factors_of(rest)
            for i, f in enumerate(facs):
                if not (f.kind == "pow" and f.value.denominator == 1 and f.value >= 2):
                    continue
                base = f.args[0]
                if not (base.kind == "fn" and base.value == "sin"):
                    continue
                others = facs[:i] + facs[i + 1:]
                lower = c_pow(base, f.value - 2)
                common = c_mul(list(others) + [lower])
                cos2 = c_pow(_make("fn", "cos", base.args), Fraction(2))
                partner = c_mul([common, cos2])
                pc, prest = split_coeff(partner)
                if prest not in coeffs or coeffs[prest] == 0:
                    continue
                c1 = coeffs[rest]
                c2 = _num_mul(coeffs.pop(prest), pc)
                cc, crest = split_coeff(common)
                coeffs[crest] = _num_add(coeffs.get(crest, 0), _num_mul(c2, cc))
                coeffs[rest] = _num_add(c1, -c2)
                changed = True
                break
            if changed:
                break
        if not changed:
            return


def _collect_quotients(terms: list):
    """Merge terms sharing a factor S^e (S a sum, e < 0) when their numerators
    add up to a multiple of S:  sum_i N_i S^e = c*g*S^(e+1) + rest*g*S^e.

    Returns the rewritten term list, or None when nothing merges.
    """
    groups: dict = {}
    for idx, t in enumerate(terms):
        for f in factors_of(split_coeff(t)[1]):
            if f.kind == "pow" and f.value < 0 and f.args[0].kind == "add":
                groups.setdefault(f, []).append(idx)
    for f, idxs in groups.items():
        if len(idxs) < 2:
            continue
        base, k = f.args[0], f.value
        numer = c_add([_without(terms[i], f) for i in idxs])
        if numer.kind != "add":
            if numer.is_zero:
                return [t for i, t in enumerate(terms) if i not in idxs]
            continue
        g = _common_monomial(numer)
        reduced = c_mul([numer, _reciprocal(g)]) if g is not None else numer
        if reduced.kind != "add":
            continue
        rem = _split_multiple(reduced, base)
        if rem is None:
            continue
        c, rest = rem
        gg = g if g is not None else ONE
        new = [c_mul([num(c), gg, c_pow(base, k + 1)])]
        if not rest.is_zero:
            new.append(c_mul([rest, gg, f]))
        return [t for i, t in enumerate(terms) if i not in idxs] + new
    return None


def _without(t: Expr, f: Expr) -> Expr:
    # drop the exact factor f instead of multiplying by its (expanded) inverse
    c, rest = split_coeff(t)
    return c_mul([num(c)] + [g for g in factors_of(rest) if g != f])


def _common_monomial(s: Expr):
    """Product of atom powers dividing every term of the sum (positive integer exponents)."""
    common = None
    for t in s.args:
        facs = {}
        for f in factors_of(split_coeff(t)[1]):
            if f.kind == "pow":
                if f.value.denominator == 1 and f.value > 0:
                    facs[f.args[0]] = f.value
            elif f.kind != "add":
                facs[f] = Fraction(1)
        if common is None:
            common = facs
        else:
            common = {b: min(k, facs[b]) for b, k in common.items() if b in facs}
        if not common:
            return None
    return c_mul([c_pow(b, k) for b, k in common.items()])


def _common_factor(s: Expr):
    """Like _common_monomial, but negative integer powers count as well
    (x/S + y/S has the common factor 1/S)."""
    common = None
    for t in s.args:
        facs = {}
        for f in factors_of(split_coeff(t)[1]):
            if f.kind == "pow":
                if f.value.denominator == 1:
                    facs[f.args[0]] = f.value
            elif f.kind != "add":
                facs[f] = Fraction(1)
        if common is None:
            common = facs
        else:
            common = {b: (min(k, facs[b]) if k > 0 else max(k, facs[b]))
                      for b, k in common.items() if b in facs and (k > 0) == (facs[b] > 0)}
        if not common:
            return None
    return c_mul([c_pow(b, k) for b, k in common.items()])


def _reciprocal(g: Expr) -> Expr:
    return c_mul([c_pow(f, Fraction(-1)) for f in factors_of(g)]) if not g.is_one else ONE


def _split_multiple(node: Expr, part: Expr):
    """node = c*part + rest when every term of part occurs in node with ratio c."""
    have = {}
    for t in node.args:
        c, m = split_coeff(t)
        have[m] = c
    first_c, first_m = split_coeff(part.args[0])
    if first_m not in have:
        return None
    ratio = have[first_m] / first_c
    for t in part.args:
        c, m = split_coeff(t)
        if m not in have or have[m] != ratio * c:
            return None
        del have[m]
    rest = c_add([_monomial(c, m) for m, c in have.items()]) if have else ZERO
    return ratio, rest


# -- products --------------------------------------------------------------


def c_mul(factors: list) -> Expr:
    coef = Fraction(1)
    powers: dict = {}
    exp_args = []
    stack = list(factors)
    while stack:
        f = stack.pop()
        kind = f.kind
        if kind == "mul":
            stack.extend(f.args)
            continue
        if kind == "num":
            coef = _num_mul(coef, f.value)
            continue
        if kind == "fn" and f.value == "exp":
            exp_args.append(f.args[0])
            continue
        if kind == "pow":
            base, k = f.args[0], f.value
        else:
            base, k = f, Fraction(1)
        powers[base] = powers.get(base, Fraction(0)) + k
    if coef == 0:
        return ZERO

    out = []
    for base, k in powers.items():
        if k == 0:
            continue
        p = c_pow(base, k) if (k != 1 or base.kind == "num") else base
        if p.kind == "num":
            coef = _num_mul(coef, p.value)
        elif p.kind == "mul":
            c, rest = split_coeff(p)
            coef = _num_mul(coef, c)
            out.extend(factors_of(rest))
        else:
            out.append(p)
    if exp_args:
        e = c_fn("exp", c_add(exp_args))
        if e.kind == "num":
            coef = _num_mul(coef, e.value)
        else:
            out.append(e)
    if coef == 0:
        return ZERO

    sums = [f for f in out if f.kind == "add"]
    if sums:
        total = 1
        for s in sums:
            total *= len(s.args)
        if total <= MAX_EXPANSION_TERMS:
            rest = [f for f in out if f.kind != "add"]
            terms = [[num(coef)] + rest]
            for s in sums:
                terms = [t + [a] for t in terms for a in s.args]
            return c_add([c_mul(t) for t in terms])

    if not out:
        return num(coef)
    out.sort(key=sort_key)
    if coef == 1 and len(out) == 1:
        return out[0]
    if coef == 1:
        return _make("mul", None, tuple(out))
    return _make("mul", None, (num(coef),) + tuple(out))


def _distribute(a: Expr, b: Expr) -> Expr:
    """Product of two sums, term by term (never re-collected into a power)."""
    ta = a.args if a.kind == "add" else (a,)
    tb = b.args if b.kind == "add" else (b,)
    return c_add([c_mul([x, y]) for x in ta for y in tb])


# -- powers ----------------------------------------------------------------


def c_pow(base: Expr, k) -> Expr:
    k = Fraction(k)
    if k == 0:
        return ONE
    if k == 1:
        return base
    kind = base.kind
    if kind == "num":
        v = _num_pow(base.value, k)
        if v is not None:
            return num(v)
        bv = base.value
        if isinstance(bv, Fraction) and bv > 0 and k.denominator != 1:
            whole = k.numerator // k.denominator
            frac = k - whole
            if whole != 0:
                return c_mul([num(bv**whole), c_pow(base, frac)])
        return _make("pow", k, (base,))
    if kind == "pow":
        inner = base.value
        if k.denominator == 1 or inner.numerator % 2 == 1:
            return c_pow(base.args[0], inner * k)
        return _make("pow", k, (base,))
    if kind == "mul":
        if k.denominator == 1:
            return c_mul([c_pow(f, k) for f in base.args])
        c, rest = split_coeff(base)
        if isinstance(c, Fraction) and c > 0 and c != 1:
            return c_mul([c_pow(num(c), k), c_pow(rest, k)])
        if isinstance(c, float) and c > 0:
            return c_mul([num(c ** float(k)), c_pow(rest, k)])
        return _make("pow", k, (base,))
    if kind == "fn" and base.value == "exp":
        return c_fn("exp", c_mul([num(k), base.args[0]]))
    if kind == "add" and k.denominator == 1 and 1 < k <= MAX_EXPAND_POWER:
        m = len(base.args)
        if math.comb(m + int(k) - 1, int(k)) <= MAX_EXPANSION_TERMS:
            acc = base
            for _ in range(int(k) - 1):
                acc = _distribute(acc, base)
            return acc
    if kind == "add" and k.denominator == 1 and k < -1:
        # S^-m is stored as (expanded S^m)^-1 so that both routes agree
        full = c_pow(base, -k)
        if full.kind == "add":
            return c_pow(full, Fraction(-1))
    if kind == "add" and k.denominator == 1 and k < 0:
        # 1/(a*x + a*y) = a^-1 (x + y)^-1 for a monomial a common to every term
        g = _common_factor(base)
        if g is not None and not g.is_one:
            inv = [c_pow(f, Fraction(-1)) for f in factors_of(g)]
            rest = c_add([c_mul([t] + inv) for t in base.args])
            return c_mul([c_pow(g, k), c_pow(rest, k)])
    if kind == "add" and (k.denominator != 1 or k < 0):
        # pull the numeric content out of a sum: (4a+4b)^(1/2) = 2(a+b)^(1/2),
        # and for integer powers also a sign: (-a-b)^-1 = -(a+b)^-1
        cs = [split_coeff(t)[0] for t in base.args]
        if all(isinstance(c, Fraction) for c in cs):
            g = _content(cs)
            if k.denominator == 1 and cs[0] < 0:
                g = -g
            if g != 1:
                inner = c_add([c_mul([num(1 / g), t]) for t in base.args])
                return c_mul([c_pow(num(g), k), c_pow(inner, k)])
    return _make("pow", k, (base,))


def _content(cs) -> Fraction:
    nums = [abs(c.numerator) for c in cs]
    dens = [c.denominator for c in cs]
    gn = 0
    for n_ in nums:
        gn = math.gcd(gn, n_)
    ld = 1
    for d in dens:
        ld = ld * d // math.gcd(ld, d)
    return Fraction(gn, ld) if gn else Fraction(1)


# -- functions -------------------------------------------------------------


_FOLD_ZERO = {"exp": ONE, "sin": ZERO, "cos": ONE}


def c_fn(name: str, arg: Expr) -> Expr:
    if name == "sqrt":
        return c_pow(arg, _HALF)
    if arg.kind == "num":
        v = arg.value
        if v == 0 and name in _FOLD_ZERO:
            return _FOLD_ZERO[name]
        if name == "log" and v == 1:
            return ZERO
        if isinstance(v, float):
            try:
                return num(float(getattr(math, name)(v)))
            except (ValueError, OverflowError):
                pass
        return _make("fn", name, (arg,))
    if name == "log" and arg.kind == "fn" and arg.value == "exp":
        return arg.args[0]
    if name == "exp" and arg.kind == "fn" and arg.value == "log":
        return arg.args[0]
    if name in ("sin", "cos"):
        c, rest = split_coeff(arg)
        if c < 0:
            flipped = c_mul([num(-c), rest]) if not rest.is_one else num(-c)
            inner = _make("fn", name, (flipped,))
            return c_mul([MINUS_ONE, inner]) if name == "sin" else inner
    return _make("fn", name, (arg,))
