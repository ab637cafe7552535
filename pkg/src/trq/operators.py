"""Quantum-curve operator expressions and their duality rewrites.

Operators are noncommutative expression trees over the generators
x, y (acting on the main variable) and x0, y0 (acting on the base point),
with exact scalar coefficients that may involve hbar and named parameters.
The duality substitutions are literal: no normal ordering is ever applied
by a rewrite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

from .algebra import RatFun
from .algebra import poly as P


class OperatorError(ValueError):
    pass


# ---------------------------------------------------------------------------
# scalars: Laurent polynomials in hbar and named parameters over Q


@dataclass(frozen=True)
class Sym:
    terms: tuple = ()  # tuple[(monomial, Fraction)], monomial = tuple[(name, int)]

    @staticmethod
    def make(d: dict) -> "Sym":
        clean = {}
        for mono, c in d.items():
            mono = tuple(sorted((n, e) for n, e in mono if e))
            c = Fraction(c)
            if not c:
                continue
            clean[mono] = clean.get(mono, Fraction(0)) + c
        return Sym(tuple(sorted((m, c) for m, c in clean.items() if c)))

    @staticmethod
    def const(v) -> "Sym":
        v = Fraction(v)
        return Sym(((tuple(), v),)) if v else Sym()

    @staticmethod
    def var(name: str, exp: int = 1) -> "Sym":
        return Sym(((((name, exp),), Fraction(1)),)) if exp else Sym.const(1)

    @staticmethod
    def hbar(exp: int = 1) -> "Sym":
        return Sym.var("hbar", exp)

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(not m for m, _ in self.terms)

    def const_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_const():
            raise OperatorError(f"scalar {self} is not a plain rational")
        return self.terms[0][1]

    def __add__(self, o: "Sym") -> "Sym":
        d = {m: c for m, c in self.terms}
        for m, c in o.terms:
            d[m] = d.get(m, Fraction(0)) + c
        return Sym.make(d)

    def __neg__(self) -> "Sym":
        return Sym(tuple((m, -c) for m, c in self.terms))

    def __sub__(self, o: "Sym") -> "Sym":
        return self + (-o)

    def __mul__(self, o: "Sym") -> "Sym":
        d: dict = {}
        for m1, c1 in self.terms:
            e1 = dict(m1)
            for m2, c2 in o.terms:
                e = dict(e1)
                for n, k in m2:
                    e[n] = e.get(n, 0) + k
                key = tuple(sorted((n, k) for n, k in e.items() if k))
                d[key] = d.get(key, Fraction(0)) + c1 * c2
        return Sym.make(d)

    def scale(self, v) -> "Sym":
        v = Fraction(v)
        return Sym.make({m: c * v for m, c in self.terms})

    def pow(self, n: int) -> "Sym":
        if n < 0:
            if len(self.terms) != 1:
                raise OperatorError("negative power of a non-monomial scalar")
            (m, c), = self.terms
            return Sym.make({tuple((nm, e * n) for nm, e in m): Fraction(1) / c ** (-n)})
        out = Sym.const(1)
        for _ in range(n):
            out = out * self
        return out

    def subs(self, values: dict) -> "Sym":
        """Substitute rational values for named parameters (hbar kept)."""
        d: dict = {}
        for m, c in self.terms:
            keep = []
            for n, e in m:
                if n in values:
                    v = Fraction(values[n])
                    if v == 0 and e < 0:
                        raise ZeroDivisionError(f"parameter {n} = 0 raised to {e}")
                    c = c * v**e
                else:
                    keep.append((n, e))
            key = tuple(keep)
            d[key] = d.get(key, Fraction(0)) + c
        return Sym.make(d)

    def hbar_coefficients(self) -> dict:
        """hbar exponent -> Fraction; requires all parameters substituted."""
        out: dict = {}
        for m, c in self.terms:
            names = dict(m)
            h = names.pop("hbar", 0)
            if names:
                raise OperatorError(f"unbound parameters {sorted(names)} in scalar")
            out[h] = out.get(h, Fraction(0)) + c
        return out

    def lead_coeff(self) -> Fraction:
        return self.terms[0][1] if self.terms else Fraction(0)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.terms:
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in m)
            if mono:
                parts.append(f"{c}*{mono}" if c != 1 else mono)
            else:
                parts.append(str(c))
        return " + ".join(parts)


HBAR = Sym.hbar()
ONE = Sym.const(1)


# ---------------------------------------------------------------------------
# expression nodes


@dataclass(frozen=True)
class OpExpr:
    pass


@dataclass(frozen=True)
class Scalar(OpExpr):
    value: Sym


@dataclass(frozen=True)
class Gen(OpExpr):
    kind: str          # "x", "y", "x0", "y0"
    side: str = ""     # "", "dual", "dagger"


@dataclass(frozen=True)
class CoordMul(OpExpr):
    """Multiplication by a rational function of the parametrizing coordinate."""

    var: str           # "z" or "z0"
    fn: RatFun


@dataclass(frozen=True)
class Add(OpExpr):
    children: tuple


@dataclass(frozen=True)
class Mul(OpExpr):
    children: tuple    # composition order: leftmost acts last


@dataclass(frozen=True)
class Inv(OpExpr):
    child: OpExpr


@dataclass(frozen=True)
class Pow(OpExpr):
    child: OpExpr
    exp: int


@dataclass(frozen=True)
class Exp(OpExpr):
    arg: OpExpr        # scalar plus linear combination of generators


@dataclass(frozen=True)
class RatSubst(OpExpr):
    """R(child) for a rational R with exact coefficients."""

    num: tuple         # polynomial, low-to-high Fractions
    den: tuple
    child: OpExpr


def sc(v) -> Scalar:
    return Scalar(v if isinstance(v, Sym) else Sym.const(v))


def add(*cs) -> OpExpr:
    return Add(tuple(cs))


def mul(*cs) -> OpExpr:
    return Mul(tuple(cs))


def sub(a, b) -> OpExpr:
    return Add((a, Mul((sc(-1), b))))


X, Y, X0, Y0 = Gen("x"), Gen("y"), Gen("x0"), Gen("y0")


def hb(exp: int = 1) -> Scalar:
    return Scalar(Sym.hbar(exp))


def ratsubst(num, den, child) -> RatSubst:
    return RatSubst(P.poly(num), P.poly(den), child)


def poly_of(coeffs, child) -> RatSubst:
    return ratsubst(coeffs, (1,), child)


# ---------------------------------------------------------------------------
# canonical text


def op_text(e: OpExpr) -> str:
    if isinstance(e, Scalar):
        return f"(scalar {e.value})"
    if isinstance(e, Gen):
        return f"(gen {e.kind}{' ' + e.side if e.side else ''})"
    if isinstance(e, CoordMul):
        return f"(coordmul {e.var} {e.fn})"
    if isinstance(e, Add):
        return "(add " + " ".join(op_text(c) for c in e.children) + ")"
    if isinstance(e, Mul):
        return "(mul " + " ".join(op_text(c) for c in e.children) + ")"
    if isinstance(e, Inv):
        return f"(inv {op_text(e.child)})"
    if isinstance(e, Pow):
        return f"(pow {op_text(e.child)} {e.exp})"
    if isinstance(e, Exp):
        return f"(exp {op_text(e.arg)})"
    if isinstance(e, RatSubst):
        return f"(ratsubst {P.to_str(e.num, 't')} | {P.to_str(e.den, 't')} {op_text(e.child)})"
    raise TypeError(type(e))


# ---------------------------------------------------------------------------
# simplification


def simplify(e: OpExpr) -> OpExpr:
    prev = None
    cur = e
    for _ in range(30):
        cur = _simp(cur)
        text = op_text(cur)
        if text == prev:
            return cur
        prev = text
    return cur


def _simp(e: OpExpr) -> OpExpr:
    if isinstance(e, (Scalar, Gen, CoordMul)):
        return e
    if isinstance(e, Add):
        return _simp_add(e)
    if isinstance(e, Mul):
        return _simp_mul(e)
    if isinstance(e, Inv):
        return _simp_inv(_simp(e.child))
    if isinstance(e, Pow):
        c = _simp(e.child)
        if e.exp == 0:
            return sc(1)
        if e.exp == 1:
            return c
        if e.exp < 0:
            return Inv(Pow(c, -e.exp))
        if isinstance(c, Scalar):
            return Scalar(c.value.pow(e.exp))
        if isinstance(c, CoordMul):
            return CoordMul(c.var, c.fn**e.exp)
        return Pow(c, e.exp)
    if isinstance(e, Exp):
        a = _simp(e.arg)
        if isinstance(a, Scalar) and a.value.is_zero():
            return sc(1)
        coeff, core = _split_coeff(a)
        if isinstance(core, Add) and not (coeff == ONE):
            a = _simp(Add(tuple(Mul((Scalar(coeff), t)) for t in core.children)))
        return Exp(a)
    if isinstance(e, RatSubst):
        c = _simp(e.child)
        if isinstance(c, Scalar):
            num = _poly_eval_sym(e.num, c.value)
            den = _poly_eval_sym(e.den, c.value)
            if den.is_const():
                return Scalar(num.scale(1 / den.const_value()))
        if isinstance(c, CoordMul):
            return CoordMul(c.var, RatFun.make(e.num, e.den).compose(c.fn))
        # stays atomic here; sums of functions of one base decompose in the
        # Add canonicalization, products merge through adjacency
        return _function_node(RatFun.make(e.num, e.den), c)
    raise TypeError(type(e))


def _poly_eval_sym(p: tuple, v: Sym) -> Sym:
    acc = Sym.const(0)
    for c in reversed(p):
        acc = acc * v + Sym.const(c)
    return acc


def _split_coeff(e: OpExpr) -> tuple[Sym, OpExpr]:
    """Write e as coeff * core with a scalar coefficient pulled out."""
    if isinstance(e, Scalar):
        return e.value, sc(1)
    if isinstance(e, Mul):
        coeff = ONE
        rest = []
        for c in e.children:
            if isinstance(c, Scalar):
                coeff = coeff * c.value
            else:
                rest.append(c)
        if not rest:
            return coeff, sc(1)
        if len(rest) == 1:
            return coeff, rest[0]
        return coeff, Mul(tuple(rest))
    return ONE, e


def _simp_add(e: Add) -> OpExpr:
    work = [(ONE, c) for c in e.children]
    flat = []
    while work:
        outer, c = work.pop()
        c = _simp(c)
        if isinstance(c, Add):
            work.extend((outer, t) for t in c.children)
            continue
        coeff, core = _split_coeff(c)
        coeff = coeff * outer
        if isinstance(core, Add):
            work.extend((coeff, t) for t in core.children)
            continue
        flat.append((coeff, core))
    groups: dict = {}
    order: list = []
    for coeff, core in flat:
        if isinstance(core, Scalar):  # pure scalar term (core == 1)
            coeff = coeff * core.value
            core = sc(1)
        key = op_text(core)
        if key not in groups:
            groups[key] = [coeff, core]
            order.append(key)
        else:
            groups[key][0] = groups[key][0] + coeff
    # canonicalize rational functions of a common base operator: members of
    # a base-group merge additively whenever more than one is present or a
    # RatSubst is involved, with the constant part split off as a scalar
    fgroups: dict = {}
    for key in list(order):
        coeff, core = groups[key]
        if not coeff.is_const() or coeff.is_zero():
            continue
        if isinstance(core, (Gen, Pow, Inv, RatSubst)):
            r, child = _as_function_of(core)
            if isinstance(child, Scalar):
                continue
            fgroups.setdefault(op_text(child), []).append((key, r, child))
    for ckey, members in fgroups.items():
        if len(members) < 2 and not any(isinstance(groups[k][1], RatSubst) for k, _r, _c in members):
            continue
        total = RatFun.const(0)
        child = members[0][2]
        for key, r, _c in members:
            total = total + r * groups[key][0].const_value()
            groups[key][0] = Sym.const(0)
        if total.is_zero():
            continue
        quot, rem = P.divmod_(total.num, total.den)
        pieces = []
        if quot and quot[0]:
            pieces.append(sc(quot[0]))
        poly_rest = P.poly((Fraction(0),) + tuple(quot[1:]))
        if not P.is_zero(poly_rest):
            pieces.append(_function_node(RatFun.make(poly_rest, P.ONE), child))
        if not P.is_zero(rem):
            pieces.append(RatSubst(rem, total.den, child))
        for piece in pieces:
            piece = _simp(piece)
            pcoeff, pcore = _split_coeff(piece)
            if isinstance(pcore, Scalar):
                pcoeff = pcoeff * pcore.value
                pcore = sc(1)
            pkey = op_text(pcore)
            if pkey not in groups:
                groups[pkey] = [pcoeff, pcore]
                order.append(pkey)
            else:
                groups[pkey][0] = groups[pkey][0] + pcoeff
    terms = []
    for key in sorted(order):
        coeff, core = groups[key]
        if coeff.is_zero():
            continue
        if isinstance(core, Scalar):
            terms.append(Scalar(coeff))
        elif coeff == ONE:
            terms.append(core)
        else:
            terms.append(Mul((Scalar(coeff), core)))
    if not terms:
        return sc(0)
    if len(terms) == 1:
        return terms[0]
    # factor a global -1 when the canonically first coefficient is negative
    first = terms[0]
    fc, _ = _split_coeff(first)
    if isinstance(first, Scalar):
        fc = first.value
    if fc.lead_coeff() < 0:
        neg = [_simp(Mul((sc(-1), t))) for t in terms]
        return Mul((sc(-1), Add(tuple(neg))))
    return Add(tuple(terms))


def _ratfun_const_part(r: RatFun) -> Fraction:
    """The constant coefficient of the polynomial part of r."""
    quot, _rem = P.divmod_(r.num, r.den)
    return quot[0] if quot else Fraction(0)


def _as_function_of(e: OpExpr):
    """View e as (R, child): a rational function applied to a base operator."""
    if isinstance(e, RatSubst):
        return RatFun.make(e.num, e.den), e.child
    if isinstance(e, Pow):
        return RatFun.var() ** e.exp, e.child
    if isinstance(e, Inv):
        inner = e.child
        if isinstance(inner, Pow):
            return RatFun.var() ** (-inner.exp), inner.child
        return RatFun.const(1) / RatFun.var(), inner
    return RatFun.var(), e


def _simp_mul(e: Mul) -> OpExpr:
    flat = []
    for c in e.children:
        c = _simp(c)
        if isinstance(c, Mul):
            flat.extend(c.children)
        else:
            flat.append(c)
    coeff = ONE
    rest = []
    for c in flat:
        if isinstance(c, Scalar):
            coeff = coeff * c.value
        else:
            rest.append(c)
    if coeff.is_zero():
        return sc(0)
    # merge adjacent commuting pieces
    merged: list = []
    for c in rest:
        if merged:
            prev = merged[-1]
            if isinstance(prev, CoordMul) and isinstance(c, CoordMul) and prev.var == c.var:
                merged[-1] = CoordMul(prev.var, prev.fn * c.fn)
                continue
            r1, b1 = _as_function_of(prev)
            r2, b2 = _as_function_of(c)
            if op_text(b1) == op_text(b2) and not isinstance(b1, (Scalar,)):
                prod = r1 * r2
                merged[-1] = _function_node(prod, b1)
                continue
        merged.append(c)
    merged = [m for m in merged if not (isinstance(m, Scalar) and m.value == ONE)]
    out = []
    for m in merged:
        if isinstance(m, Scalar):
            coeff = coeff * m.value
        else:
            out.append(m)
    if not out:
        return Scalar(coeff)
    if coeff == ONE and len(out) == 1:
        return out[0]
    if coeff == ONE:
        return Mul(tuple(out))
    return Mul((Scalar(coeff),) + tuple(out))


def _function_node(r: RatFun, base: OpExpr) -> OpExpr:
    if r.is_const():
        return sc(r.const_value())
    if r == RatFun.var():
        return base
    if P.degree(r.den) == 0:
        num = P.scale(r.num, 1 / r.den[0])
        mono = [i for i, v in enumerate(num) if v]
        if len(mono) == 1 and mono[0] >= 1:
            c = num[mono[0]]
            node = base if mono[0] == 1 else Pow(base, mono[0])
            return node if c == 1 else Mul((sc(c), node))
        return RatSubst(num, P.ONE, base)
    if P.degree(r.num) == 0 and r.num:
        mono = [i for i, v in enumerate(r.den) if v]
        if len(mono) == 1:
            k = mono[0]
            c = r.num[0] / r.den[k]
            node = Inv(base) if k == 1 else Inv(Pow(base, k))
            return node if c == 1 else Mul((sc(c), node))
    return RatSubst(r.num, r.den, base)


def _simp_inv(c: OpExpr) -> OpExpr:
    if isinstance(c, Inv):
        return c.child
    if isinstance(c, Scalar):
        if len(c.value.terms) == 1:
            return Scalar(c.value.pow(-1))
        return Inv(c)
    if isinstance(c, CoordMul):
        return CoordMul(c.var, RatFun.const(1) / c.fn)
    if isinstance(c, Mul) and c.children and isinstance(c.children[0], Scalar):
        v = c.children[0].value
        rest = c.children[1:]
        inner = rest[0] if len(rest) == 1 else Mul(rest)
        return _simp(Mul((Scalar(v.pow(-1)), Inv(inner))))
    return Inv(c)


def expand(e: OpExpr) -> OpExpr:
    """Distribute products over sums; canonical additive normal form.

    Rational-function nodes stay atomic; adjacent functions of a common
    base still merge through their exact rational arithmetic.
    """
    return simplify(_expand(simplify(e)))


def _expand(e: OpExpr) -> OpExpr:
    if isinstance(e, Add):
        return Add(tuple(_expand(c) for c in e.children))
    if isinstance(e, Mul):
        factor_lists = [[sc(1)]]
        for c in e.children:
            c = simplify(_expand(c))
            terms = list(c.children) if isinstance(c, Add) else [c]
            factor_lists = [fl + [t] for fl in factor_lists for t in terms]
        return Add(tuple(Mul(tuple(fl)) for fl in factor_lists))
    if isinstance(e, Pow):
        base = simplify(_expand(e.child))
        if isinstance(base, Add) and e.exp >= 1:
            return _expand(Mul(tuple([base] * e.exp)))
        return Pow(base, e.exp)
    if isinstance(e, Inv):
        return Inv(simplify(_expand(e.child)))
    if isinstance(e, Exp):
        return Exp(simplify(_expand(e.arg)))
    if isinstance(e, RatSubst):
        return RatSubst(e.num, e.den, simplify(_expand(e.child)))
    return e


def lower_ratsubst(e: OpExpr) -> OpExpr:
    """Replace R(child) nodes by explicit polynomial-and-inverse trees."""
    if isinstance(e, RatSubst):
        child = lower_ratsubst(e.child)
        num_terms = [Mul((sc(v), Pow(child, i))) for i, v in enumerate(e.num) if v]
        out: OpExpr = Add(tuple(num_terms)) if num_terms else sc(0)
        if P.degree(e.den) == 0:
            return simplify(Mul((sc(Fraction(1) / e.den[0]), out)))
        den_terms = [Mul((sc(v), Pow(child, i))) for i, v in enumerate(e.den) if v]
        return simplify(Mul((out, Inv(Add(tuple(den_terms))))))
    if isinstance(e, Add):
        return Add(tuple(lower_ratsubst(c) for c in e.children))
    if isinstance(e, Mul):
        return Mul(tuple(lower_ratsubst(c) for c in e.children))
    if isinstance(e, Inv):
        return Inv(lower_ratsubst(e.child))
    if isinstance(e, Pow):
        return Pow(lower_ratsubst(e.child), e.exp)
    if isinstance(e, Exp):
        return Exp(lower_ratsubst(e.arg))
    return e


def subst_params(e: OpExpr, values: dict) -> OpExpr:
    """Bind named parameters to rationals everywhere in the tree."""
    if isinstance(e, Scalar):
        return Scalar(e.value.subs(values))
    if isinstance(e, Add):
        return Add(tuple(subst_params(c, values) for c in e.children))
    if isinstance(e, Mul):
        return Mul(tuple(subst_params(c, values) for c in e.children))
    if isinstance(e, Inv):
        return Inv(subst_params(e.child, values))
    if isinstance(e, Pow):
        return Pow(subst_params(e.child, values), e.exp)
    if isinstance(e, Exp):
        return Exp(subst_params(e.arg, values))
    if isinstance(e, RatSubst):
        return RatSubst(e.num, e.den, subst_params(e.child, values))
    return e


# ---------------------------------------------------------------------------
# duality rewrites


def _map_gens(e: OpExpr, table) -> OpExpr:
    if isinstance(e, Gen):
        return table(e)
    if isinstance(e, Add):
        return Add(tuple(_map_gens(c, table) for c in e.children))
    if isinstance(e, Mul):
        return Mul(tuple(_map_gens(c, table) for c in e.children))
    if isinstance(e, Inv):
        return Inv(_map_gens(e.child, table))
    if isinstance(e, Pow):
        return Pow(_map_gens(e.child, table), e.exp)
    if isinstance(e, Exp):
        return Exp(_map_gens(e.arg, table))
    if isinstance(e, RatSubst):
        return RatSubst(e.num, e.den, _map_gens(e.child, table))
    if isinstance(e, CoordMul):
        raise OperatorError("cannot rewrite a coordinate multiplier; eliminate it first")
    return e


_DUAL_SIDE = {"": "dual", "dual": "", "dagger": "dagger-dual", "dagger-dual": "dagger"}


def xy_dual_rewrite(e: OpExpr) -> OpExpr:
    """Literal substitution sending each generator to its x-y dual expression."""

    def table(g: Gen) -> OpExpr:
        s = _DUAL_SIDE[g.side]
        x, y, x0, y0 = Gen("x", s), Gen("y", s), Gen("x0", s), Gen("y0", s)
        dx = Inv(sub(x, x0))
        dy = Inv(sub(y, y0))
        if g.kind == "x":
            return sub(y0, Mul((hb(), dx)))
        if g.kind == "y":
            return sub(x0, Mul((hb(), dy)))
        if g.kind == "x0":
            return sub(y, Mul((hb(), dx)))
        if g.kind == "y0":
            return sub(x, Mul((hb(), dy)))
        raise OperatorError(g.kind)

    return _map_gens(e, table)


def shear_rewrite(e: OpExpr, R: RatFun, side: str | None = None) -> OpExpr:
    """y -> y - R(x), y0 -> y0 - R(x0); literal replacement."""

    def table(g: Gen) -> OpExpr:
        if side is not None and g.side != side:
            return g
        if g.kind == "y":
            return sub(g, RatSubst(R.num, R.den, Gen("x", g.side)))
        if g.kind == "y0":
            return sub(g, RatSubst(R.num, R.den, Gen("x0", g.side)))
        return g

    return _map_gens(e, table)


def sympl_dual_rewrite(e: OpExpr, R: RatFun) -> OpExpr:
    """Transport along (x, y) -> (x + R(y), y): dual, shear, dual."""
    return xy_dual_rewrite(shear_rewrite(xy_dual_rewrite(e), R))


# ---------------------------------------------------------------------------
# singular base-point limits


_INF = object()


def singular_limit(e: OpExpr, x0_value, y0_value) -> OpExpr:
    """Freeze the base point: x0 and y0 become scalars (possibly infinite).

    Infinite values may only survive inside Inv(...) patterns, where they
    send the whole inverse to zero; anything else is an error.
    """

    def conv(v):
        if v is None:
            return None
        if v == "inf":
            return _INF
        return Fraction(v)

    xv, yv = conv(x0_value), conv(y0_value)
    out = _limit(e, xv, yv)
    if out is _INF:
        raise OperatorError("operator does not admit this singular limit")
    return simplify(out)


def _limit(e: OpExpr, xv, yv):
    if isinstance(e, Gen):
        val = {"x0": xv, "y0": yv}.get(e.kind, None)
        if val is None:
            return e
        if val is _INF:
            return _INF
        return sc(val)
    if isinstance(e, (Scalar, CoordMul)):
        return e
    if isinstance(e, Add):
        kids = [_limit(c, xv, yv) for c in e.children]
        if any(k is _INF for k in kids):
            return _INF
        return Add(tuple(kids))
    if isinstance(e, Mul):
        kids = [_limit(c, xv, yv) for c in e.children]
        if any(k is _INF for k in kids):
            return _INF
        return Mul(tuple(kids))
    if isinstance(e, Inv):
        inner = _limit(e.child, xv, yv)
        if inner is _INF:
            return sc(0)
        return Inv(inner)
    if isinstance(e, Pow):
        inner = _limit(e.child, xv, yv)
        if inner is _INF:
            return _INF
        return Pow(inner, e.exp)
    if isinstance(e, Exp):
        inner = _limit(e.arg, xv, yv)
        if inner is _INF:
            return _INF
        return Exp(inner)
    if isinstance(e, RatSubst):
        inner = _limit(e.child, xv, yv)
        if inner is _INF:
            # R(inf): finite iff deg num <= deg den
            dn, dd = P.degree(e.num), P.degree(e.den)
            if dn < dd:
                return sc(0)
            if dn == dd:
                return sc(e.num[-1] / e.den[-1])
            return _INF
        return RatSubst(e.num, e.den, inner)
    raise TypeError(type(e))


# ---------------------------------------------------------------------------
# Weyl identities used by the fixtures


def normal_order_mul_rule(e: OpExpr) -> OpExpr:
    """Rewrite y^k (x - hbar/y) -> y^(k-1) x y inside products.

    Uses y x = x y + hbar, so this preserves the operator exactly.
    """
    e = simplify(e)

    def walk(node):
        if isinstance(node, Mul):
            kids = [walk(c) for c in node.children]
            for i in range(len(kids) - 1):
                a, b = kids[i], kids[i + 1]
                ka = _y_power(a)
                if ka and _is_x_minus_h_over_y(b):
                    yk = ka - 1
                    seq = ([Pow(Gen("y", _side_of(a)), yk)] if yk > 1 else ([Gen("y", _side_of(a))] if yk == 1 else []))
                    repl = seq + [Gen("x", _side_of(a)), Gen("y", _side_of(a))]
                    return walk(simplify(Mul(tuple(kids[:i] + repl + kids[i + 2:]))))
            return Mul(tuple(kids))
        if isinstance(node, Add):
            return Add(tuple(walk(c) for c in node.children))
        if isinstance(node, (Inv,)):
            return Inv(walk(node.child))
        if isinstance(node, Pow):
            return Pow(walk(node.child), node.exp)
        return node

    return simplify(walk(e))


def _side_of(e: OpExpr) -> str:
    if isinstance(e, Gen):
        return e.side
    if isinstance(e, Pow) and isinstance(e.child, Gen):
        return e.child.side
    return ""


def _y_power(e: OpExpr) -> int:
    if isinstance(e, Gen) and e.kind == "y":
        return 1
    if isinstance(e, Pow) and isinstance(e.child, Gen) and e.child.kind == "y":
        return e.exp
    return 0


def _is_x_minus_h_over_y(e: OpExpr) -> bool:
    target_pos = simplify(sub(Gen("x", _gen_side(e)), Mul((hb(), Inv(Gen("y", _gen_side(e)))))))
    return op_text(simplify(e)) == op_text(target_pos)


def _gen_side(e: OpExpr) -> str:
    # first generator side appearing in the expression
    if isinstance(e, Gen):
        return e.side
    if isinstance(e, (Add, Mul)):
        for c in e.children:
            s = _gen_side(c)
            if s is not None:
                return s
    if isinstance(e, (Inv, Exp)):
        return _gen_side(e.child if isinstance(e, Inv) else e.arg)
    if isinstance(e, Pow):
        return _gen_side(e.child)
    return ""


def gaiotto_shift_identity(e: OpExpr) -> OpExpr:
    """Rewrite exp(M - hbar/(y - y0)) as (1/(y-y0)) (y - hbar - y0) exp(M)
    when M is x-like (commutator [M, y - y0] = -hbar).  No-op otherwise."""

    def walk(node):
        if isinstance(node, Exp):
            parts = node.arg.children if isinstance(node.arg, Add) else (node.arg,)
            main = []
            shift_term = None
            for pcs in parts:
                coeff, core = _split_coeff(pcs)
                if isinstance(core, Inv) and coeff == -HBAR and _is_y_minus_base(core.child):
                    shift_term = simplify(core.child)
                    continue
                main.append(pcs)
            if shift_term is not None and _is_x_like(main):
                m = main[0] if len(main) == 1 else Add(tuple(main))
                return simplify(
                    Mul((Inv(shift_term), Add((shift_term, Mul((sc(-1), hb())))), Exp(m)))
                )
            return Exp(walk(node.arg))
        if isinstance(node, Add):
            return Add(tuple(walk(c) for c in node.children))
        if isinstance(node, Mul):
            return Mul(tuple(walk(c) for c in node.children))
        if isinstance(node, Inv):
            return Inv(walk(node.child))
        if isinstance(node, Pow):
            return Pow(walk(node.child), node.exp)
        return node

    return simplify(walk(simplify(e)))


def _is_y_minus_base(e: OpExpr) -> bool:
    """Matches y + (scalar or -y0): the commutator with an x term is -hbar."""
    e = simplify(e)
    parts = e.children if isinstance(e, Add) else (e,)
    ny = 0
    for t in parts:
        coeff, core = _split_coeff(t)
        if isinstance(core, Gen) and core.kind == "y":
            if coeff != ONE:
                return False
            ny += 1
        elif isinstance(core, Gen) and core.kind == "y0":
            if coeff != Sym.const(-1):
                return False
        elif isinstance(core, Scalar):
            continue
        else:
            return False
    return ny == 1


def _is_x_like(parts: list) -> bool:
    """All terms are scalars or x-generators (so [sum, y - y0] = -hbar per x)."""
    total_x = 0
    for t in parts:
        coeff, core = _split_coeff(t)
        if isinstance(core, Scalar):
            continue
        if isinstance(core, Gen) and core.kind == "x":
            if coeff != ONE:
                return False
            total_x += 1
            continue
        return False
    return total_x == 1


# ---------------------------------------------------------------------------
# Weyl-algebra normal-ordered polynomials


@dataclass
class WeylPoly:
    """Normal-ordered polynomial: (a, b) -> Sym coefficient for x^a y^b.

    Multiplication implements y x = x y + hbar.
    """

    terms: dict = field(default_factory=dict)

    @staticmethod
    def monomial(a: int, b: int, coeff=None) -> "WeylPoly":
        return WeylPoly({(a, b): coeff if isinstance(coeff, Sym) else Sym.const(coeff if coeff is not None else 1)})

    @staticmethod
    def zero() -> "WeylPoly":
        return WeylPoly({})

    @staticmethod
    def one() -> "WeylPoly":
        return WeylPoly.monomial(0, 0, 1)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, o: "WeylPoly") -> "WeylPoly":
        out = dict(self.terms)
        for k, v in o.terms.items():
            s = out.get(k, Sym.const(0)) + v
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return WeylPoly(out)

    def __neg__(self) -> "WeylPoly":
        return WeylPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, o: "WeylPoly") -> "WeylPoly":
        return self + (-o)

    def scale_sym(self, s: Sym) -> "WeylPoly":
        if s.is_zero():
            return WeylPoly.zero()
        return WeylPoly({k: v * s for k, v in self.terms.items()})

    def __mul__(self, o: "WeylPoly") -> "WeylPoly":
        out = WeylPoly.zero()
        for (a, b), u in self.terms.items():
            for (c, d), v in o.terms.items():
                # y^b x^c = sum_k C(b,k) C(c,k) k! hbar^k x^(c-k) y^(b-k)
                for k in range(min(b, c) + 1):
                    coeff = Fraction(comb(b, k) * comb(c, k) * factorial(k))
                    sym = (u * v).scale(coeff) * Sym.hbar(k)
                    key = (a + c - k, b + d - k)
                    cur = out.terms.get(key, Sym.const(0)) + sym
                    if cur.is_zero():
                        out.terms.pop(key, None)
                    else:
                        out.terms[key] = cur
        return out

    def q_truncate(self, q_order: int) -> "WeylPoly":
        out = {}
        for k, v in self.terms.items():
            kept = Sym(tuple((m, c) for m, c in v.terms if dict(m).get("q", 0) <= q_order))
            if not kept.is_zero():
                out[k] = kept
        return WeylPoly(out)

    def q_min_degree(self) -> int:
        degs = [dict(m).get("q", 0) for v in self.terms.values() for m, _ in v.terms]
        return min(degs, default=10**9)

    def check_no_negative_hbar(self) -> None:
        for v in self.terms.values():
            for m, _c in v.terms:
                if dict(m).get("hbar", 0) < 0:
                    raise OperatorError("negative hbar power in Weyl coefficient")

    def __eq__(self, o) -> bool:
        return isinstance(o, WeylPoly) and self.terms == o.terms

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (a, b), v in sorted(self.terms.items()):
            parts.append(f"({v})*x^{a}*y^{b}")
        return " + ".join(parts)


def derivation_combine(steps, op: OpExpr, wave, order: int | None = None) -> OpExpr:
    """Scripted operator derivation with certified annihilation at each step.

    Steps are ("left_multiply", A) or ("add_left_multiple", A, Q); every Q
    must itself annihilate the wave data, and the running operator is
    re-checked after each step.  Aborts with the failing step index.
    """
    from .wave import check_annihilation

    n = order if order is not None else wave.trunc
    rep = check_annihilation(op, wave, n)
    if not rep.passed:
        raise OperatorError(f"initial operator does not annihilate: {rep.summary()}")
    cur = op
    for i, step in enumerate(steps):
        if step[0] == "left_multiply":
            _, a = step
            cur = simplify(Mul((a, cur)))
        elif step[0] == "add_left_multiple":
            _, a, q = step
            repq = check_annihilation(q, wave, n)
            if not repq.passed:
                raise OperatorError(f"step {i}: auxiliary operator fails to annihilate")
            cur = simplify(Add((cur, Mul((a, q)))))
        else:
            raise OperatorError(f"unknown step kind {step[0]}")
        rep = check_annihilation(cur, wave, n)
        if not rep.passed:
            raise OperatorError(f"annihilation lost at step {i}: {rep.summary()}")
    return cur


def weyl_expand(exponent: WeylPoly, q_order: int) -> WeylPoly:
    """exp(exponent) as a q-adic series with normal-ordered coefficients.

    Every term of the exponent must carry a positive power of q, and no
    negative powers of hbar may appear.
    """
    exponent.check_no_negative_hbar()
    if exponent.q_min_degree() < 1:
        raise OperatorError("exponent must be at least first order in q")
    out = WeylPoly.one()
    term = WeylPoly.one()
    k = 1
    while True:
        term = (term * exponent).q_truncate(q_order).scale_sym(Sym.const(Fraction(1, k)))
        if term.is_zero():
            break
        out = out + term
        k += 1
    return out
