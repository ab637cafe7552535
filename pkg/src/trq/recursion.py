"""Topological recursion over the pole basis.

Stable differentials are stored as exact sums of products
prod_i dz_i/(z_i - p_i)^{k_i} with k_i >= 2.  The recursion evaluates the
residue at each simple ramification point in the local coordinate, with
the spectator variables carried symbolically through the pole basis.
The logarithmic correction adds principal parts at the vital points of dy
to every omega_{g,1}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .algebra import HSeries, LocalSeries, RatFun, Rf2, series_at
from .algebra import poly as P
from .curve import CurveError, RamPoint, SpectralCurve, find_logvital, find_ramification

_BIG = 10**9


class RecursionError_(CurveError):
    pass


@dataclass
class PoleDifferential:
    """One omega_{g,n} in the pole basis; keys are ordered slot tuples."""

    g: int
    n: int
    terms: dict = field(default_factory=dict)  # tuple[(pole, order), ...] -> Fraction

    def add_term(self, key: tuple, coeff: Fraction) -> None:
        if not coeff:
            return
        cur = self.terms.get(key, Fraction(0)) + coeff
        if cur:
            self.terms[key] = cur
        else:
            self.terms.pop(key, None)

    def is_zero(self) -> bool:
        return not self.terms

    def scale(self, c) -> "PoleDifferential":
        c = Fraction(c)
        return PoleDifferential(
            self.g, self.n, {k: v * c for k, v in self.terms.items()} if c else {}
        )

    def __add__(self, o: "PoleDifferential") -> "PoleDifferential":
        out = PoleDifferential(self.g, self.n, dict(self.terms))
        for k, v in o.terms.items():
            out.add_term(k, v)
        return out

    def __eq__(self, o) -> bool:
        return isinstance(o, PoleDifferential) and (self.g, self.n) == (o.g, o.n) and self.terms == o.terms

    def is_symmetric(self) -> bool:
        """Invariance under every transposition of slots."""
        for key, v in self.terms.items():
            for i in range(self.n):
                for j in range(i + 1, self.n):
                    kk = list(key)
                    kk[i], kk[j] = kk[j], kk[i]
                    if self.terms.get(tuple(kk), Fraction(0)) != v:
                        return False
        return True

    def pole_points(self) -> set:
        return {p for key in self.terms for p, _k in key}

    def min_order(self) -> int:
        return min((k for key in self.terms for _p, k in key), default=_BIG)

    def as_ratfun(self) -> RatFun:
        """n = 1 only: the function f with omega = f dz."""
        if self.n != 1:
            raise ValueError("as_ratfun needs n = 1")
        out = RatFun.const(0)
        for key, v in self.terms.items():
            (p, k), = key
            out = out + RatFun.const(v) / (RatFun.var() - p) ** k
        return out

    def eval_at(self, points: list) -> Fraction:
        """Value of the coefficient function at rational points (one per slot)."""
        out = Fraction(0)
        for key, v in self.terms.items():
            prod = v
            for (p, k), z in zip(key, points):
                prod *= Fraction(1) / (z - p) ** k
            out += prod
        return out


@dataclass
class OmegaStore:
    curve: SpectralCurve
    omegas: dict = field(default_factory=dict)  # (g, n) -> PoleDifferential
    chi_max: int = 0

    def get(self, g: int, n: int) -> PoleDifferential:
        try:
            return self.omegas[(g, n)]
        except KeyError:
            raise RecursionError_(f"omega_({g},{n}) not computed") from None

    def to_json(self) -> str:
        payload = {
            "curve": self.curve.hash_key(),
            "chi_max": self.chi_max,
            "omegas": {
                f"{g},{n}": sorted(
                    [[[str(p), k] for p, k in key], str(v)] for key, v in pd.terms.items()
                )
                for (g, n), pd in sorted(self.omegas.items())
            },
        }
        return json.dumps(payload, indent=1, sort_keys=True)

    @staticmethod
    def from_json(curve: SpectralCurve, text: str) -> "OmegaStore":
        payload = json.loads(text)
        if payload["curve"] != curve.hash_key():
            raise RecursionError_("cache belongs to a different curve")
        store = OmegaStore(curve, chi_max=payload["chi_max"])
        for label, terms in payload["omegas"].items():
            g, n = (int(v) for v in label.split(","))
            pd = PoleDifferential(g, n)
            for key, coeff in terms:
                pd.add_term(tuple((Fraction(p), k) for p, k in key), Fraction(coeff))
            store.omegas[(g, n)] = pd
        return store


# ---------------------------------------------------------------------------
# local series helpers


def _y_diff_series(curve: SpectralCurve, p: Fraction, sigma: LocalSeries, order: int) -> LocalSeries:
    """y(p+t) - y(p+sigma(t)) as an exact Laurent series."""
    ys = series_at(curve.y.rat, p, order)
    out = ys - ys.compose(sigma)
    for c, arg in curve.y.logs:
        a0 = P.evaluate(arg, p)
        if a0 == 0:
            raise RecursionError_(f"log singularity of y at ramification point {p}")
        aser = series_at(RatFun.make(arg), p, order)
        # log(A(t)) - log(A(sigma)) = log(A(t)/A(sigma))
        ratio = (aser * aser.compose(sigma).invert()) - LocalSeries.make(p, {0: 1}, order)
        out = out + _log1p_series(ratio, order).scale(c)
    return out


def _log1p_series(u: LocalSeries, order: int) -> LocalSeries:
    acc = LocalSeries(u.point, {}, order)
    term = LocalSeries(u.point, {0: Fraction(1)}, _BIG)
    for k in range(1, order + 1):
        term = (term * u).truncate(order)
        if term.is_zero():
            break
        acc = acc + term.scale(Fraction((-1) ** (k + 1), k))
    return acc


def _slot_series(entry, p: Fraction, sigma: LocalSeries | None, order: int) -> LocalSeries:
    """Expansion of dz/(z-a)^k at z = p+t (or z = p+sigma(t), with jacobian)."""
    a, k = entry
    if a == p:
        base = LocalSeries.make(p, {-k: 1}, order)
        if sigma is None:
            return base
        return sigma.pow(-k) * sigma.derivative()
    f = RatFun.const(1) / (RatFun.var() - a) ** k
    base = series_at(f, p, order)
    if sigma is None:
        return base
    return base.compose(sigma) * sigma.derivative()


# ---------------------------------------------------------------------------
# the recursion step


def tr_step(curve: SpectralCurve, store: OmegaStore, g: int, n: int) -> PoleDifferential:
    """omega_{g,n} from the residue formula (no logarithmic correction)."""
    if 2 * g + n - 2 < 1:
        raise ValueError("tr_step only computes stable differentials")
    rams = getattr(store, "ram_points", None)
    if rams is None:
        rams = find_ramification(curve)
        store.ram_points = rams  # type: ignore[attr-defined]
    result = PoleDifferential(g, n)
    for ram in rams:
        _tr_step_at(curve, store, g, n, ram, result)
    return result


def _max_pole_guess(store: OmegaStore, g: int, n: int, p: Fraction) -> int:
    best = 2
    for (g1, n1), pd in store.omegas.items():
        for key in pd.terms:
            tot = sum(k for a, k in key if a == p)
            best = max(best, tot + 2)
    return best + 4


def _tr_step_at(
    curve: SpectralCurve,
    store: OmegaStore,
    g: int,
    n: int,
    ram: RamPoint,
    result: PoleDifferential,
) -> None:
    p = ram.location
    T = _max_pole_guess(store, g, n, p) + 4
    sigma = ram.sigma(T + 3)
    sig_d = sigma.derivative()
    xp = series_at(curve.dx, p, T + 2)
    ydiff = _y_diff_series(curve, p, sigma, T + 2)
    D = (ydiff * xp).invert()

    # W(t): spectator-key -> series
    W: dict = {}

    def w_add(key: tuple, s: LocalSeries) -> None:
        W[key] = W.get(key, LocalSeries(p, {}, _BIG)) + s if key in W else s

    spect = n - 1
    # first summand: omega_{g-1, n+1}(q, sigma(q), I)
    if g >= 1:
        if (g - 1, n + 1) == (0, 2):
            tm = LocalSeries.make(p, {1: 1}, T + 2) - sigma
            w_add((), tm.pow(-2) * sig_d)
        else:
            src = store.get(g - 1, n + 1)
            for key, v in src.terms.items():
                s = _slot_series(key[0], p, None, T) * _slot_series(key[1], p, sigma, T)
                w_add(tuple(key[2:]), s.scale(v))

    # second summand: sum over splittings
    for g1 in range(g + 1):
        g2 = g - g1
        for mask in range(1 << spect):
            s1 = tuple(i for i in range(spect) if mask >> i & 1)
            s2 = tuple(i for i in range(spect) if not mask >> i & 1)
            if (g1, len(s1)) == (0, 0) or (g2, len(s2)) == (0, 0):
                continue
            f1 = _factor(curve, store, g1, s1, p, sigma, None, sig_d, T)
            if f1 is None:
                continue
            f2 = _factor(curve, store, g2, s2, p, sigma, sigma, sig_d, T)
            if f2 is None:
                continue
            for k1, ser1 in f1:
                for k2, ser2 in f2:
                    key = [None] * spect
                    for pos, e in zip(s1, k1):
                        key[pos] = e
                    for pos, e in zip(s2, k2):
                        key[pos] = e
                    w_add(tuple(key), ser1 * ser2)

    if not W:
        return

    # E_m(t) = (t^m - sigma^m)/2, D included; residue per basis order
    sig_pows = [LocalSeries(p, {0: Fraction(1)}, _BIG), sigma]
    for key, w in W.items():
        F = D * w
        if F.is_zero():
            continue
        lo = F.order()
        # residue of E_m * F needs m up to -lo + 1
        for m in range(1, max(2, -lo + 2)):
            while len(sig_pows) <= m:
                sig_pows.append(sig_pows[-1] * sigma)
            Em = (LocalSeries.make(p, {m: 1}, T + 1) - sig_pows[m]).scale(Fraction(1, 2))
            res = Fraction(0)
            for j, ev in Em.coeffs.items():
                fj = -1 - j
                if fj >= lo and fj <= F.trunc:
                    res += ev * F.coeffs.get(fj, Fraction(0))
                elif fj > F.trunc and not F.is_zero():
                    raise RecursionError_("window too small; increase guard terms")
            if res:
                result.add_term(((p, m + 1),) + key, res)


def _factor(curve, store, gi, slots, p, sigma, mode_sigma, sig_d, T):
    """Evaluate omega_{gi, len(slots)+1}(slots..., q-or-sigma(q)).

    Returns a list of (key-on-slots, series) or None when the factor is
    absent (unstable zero).
    """
    ni = len(slots) + 1
    if (gi, ni) == (0, 2):
        # B(z_i, q): sum_m (m+1) t^m / (z_i - p)^(m+2)
        out = []
        for m in range(T + 1):
            if mode_sigma is None:
                ser = LocalSeries.make(p, {m: m + 1}, T)
            else:
                ser = sigma.pow(m).scale(m + 1) * sig_d
            out.append(((( p, m + 2),), ser.truncate(T)))
        return out
    if 2 * gi + ni - 2 < 1:
        return None
    src = store.get(gi, ni)
    out = []
    for key, v in src.terms.items():
        ser = _slot_series(key[-1], p, mode_sigma, T).scale(v)
        out.append((tuple(key[:-1]), ser))
    return out


# ---------------------------------------------------------------------------
# logarithmic correction


def s_inverse_coeff(g: int) -> Fraction:
    """[t^{2g}] of 1/S(t) with S(t) = sum t^{2k} / (4^k (2k+1)!)."""
    n = 2 * g
    s = [Fraction(0)] * (n + 1)
    for k in range(0, g + 1):
        s[2 * k] = Fraction(1, 4**k * factorial(2 * k + 1))
    inv = [Fraction(0)] * (n + 1)
    inv[0] = Fraction(1)
    for m in range(1, n + 1):
        acc = Fraction(0)
        for j in range(1, m + 1):
            acc += s[j] * inv[m - j]
        inv[m] = -acc
    return inv[n]


def logtr_term(curve: SpectralCurve, g: int, vital=None) -> PoleDifferential:
    """Principal-part correction to omega_{g,1} at the vital points of dy."""
    if g < 1:
        raise ValueError("the logarithmic correction starts at genus 1")
    out = PoleDifferential(g, 1)
    if vital is None:
        vital = find_logvital(curve)
    if not vital:
        return out
    cg = s_inverse_coeff(g)
    xp = curve.dx
    for a, alpha in vital:
        # d_x^{2g} log(z - a), each d_x = (1/x') d/dz
        f = (RatFun.const(1) / (RatFun.var() - a)) / xp
        for _ in range(2 * g - 1):
            f = f.derivative() / xp
        u = f * xp * cg * alpha ** (2 * g - 1)
        pp = series_at(u, a, -1).principal_part()
        for k, v in pp.items():
            out.add_term(((a, -k),), v)
    if out.terms and min(k for (_p, k), in out.terms) < 2:
        raise RecursionError_("logarithmic correction produced a first-order pole")
    return out


# ---------------------------------------------------------------------------
# the schedule


def run_tr(curve: SpectralCurve, chi_max: int) -> OmegaStore:
    """All stable omegas with 2g+n-2 <= chi_max, with invariant checks."""
    store = OmegaStore(curve, chi_max=chi_max)
    if curve.gen_tr and curve.special_set == ():
        # empty special set: every stable differential vanishes
        for chi in range(1, chi_max + 1):
            for g in range(chi // 2 + 2):
                n = chi + 2 - 2 * g
                if n >= 1:
                    store.omegas[(g, n)] = PoleDifferential(g, n)
        store.ram_points = []  # type: ignore[attr-defined]
        return store
    if curve.gen_tr:
        raise RecursionError_(
            "general special-point sets are unsupported; only the empty set "
            "or the classical choice (ramification plus vital points)"
        )
    rams = find_ramification(curve)
    for r in rams:
        if r.order != 1:
            raise RecursionError_(
                f"ramification of order {r.order + 1} at {r.location} is unsupported"
            )
    vital = find_logvital(curve)
    vital_pts = {a for a, _ in vital}
    ram_pts = {r.location for r in rams}
    if vital_pts & ram_pts:
        raise RecursionError_("vital point coincides with a ramification point")
    store.ram_points = rams  # type: ignore[attr-defined]
    for chi in range(1, chi_max + 1):
        for g in range(chi // 2 + 2):
            n = chi + 2 - 2 * g
            if n < 1:
                continue
            pd = tr_step(curve, store, g, n)
            if n == 1 and g >= 1 and vital:
                pd = pd + logtr_term(curve, g, vital)
            _check_invariants(pd, ram_pts, vital_pts)
            store.omegas[(g, n)] = pd
    return store


def _check_invariants(pd: PoleDifferential, ram_pts: set, vital_pts: set) -> None:
    if pd.min_order() < 2:
        raise RecursionError_(f"omega_({pd.g},{pd.n}) has a residue term")
    allowed = ram_pts | (vital_pts if pd.n == 1 else set())
    bad = pd.pole_points() - allowed
    if bad:
        raise RecursionError_(f"omega_({pd.g},{pd.n}) has poles outside {sorted(allowed)}: {sorted(bad)}")
    if not pd.is_symmetric():
        raise RecursionError_(f"omega_({pd.g},{pd.n}) is not symmetric")
