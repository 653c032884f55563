"""Polynomial primitives with a dual numeric regime.

Univariate polynomials are dense; multivariate ones are sparse maps from
multi-indices to coefficients.  Coefficients constructed from ints or
Fractions stay exact rationals; anything else is coerced to float and every
evaluation then returns a certified forward error bound alongside the value.
Real-root counting is exact (Sturm sequences over the rationals) in the
exact regime and companion-matrix based with per-root radius bounds in the
float regime.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import DEFAULT, Tolerances

EPS = float(np.finfo(float).eps)
_U = EPS / 2.0  # unit roundoff


def _coerce_coeffs(values: Iterable):
    vals = list(values)
    if all(isinstance(v, (int, Fraction)) for v in vals):
        return [Fraction(v) for v in vals], True
    return [float(v) for v in vals], False


def _trim_trailing(coeffs: list) -> list:
    out = list(coeffs)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


# ---------------------------------------------------------------------------
# univariate polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniPoly:
    """Dense univariate real polynomial; coeffs[k] multiplies x**k."""

    coeffs: tuple
    exact: bool

    @classmethod
    def from_coeffs(cls, values: Iterable) -> "UniPoly":
        vals, exact = _coerce_coeffs(values)
        if not vals:
            vals = [Fraction(0)] if exact else [0.0]
        return cls(tuple(_trim_trailing(vals)), exact)

    @classmethod
    def zero(cls, exact: bool = True) -> "UniPoly":
        return cls((Fraction(0),), True) if exact else cls((0.0,), False)

    @classmethod
    def one(cls) -> "UniPoly":
        return cls((Fraction(1),), True)

    @classmethod
    def x(cls) -> "UniPoly":
        return cls((Fraction(0), Fraction(1)), True)

    @classmethod
    def from_roots(cls, roots: Sequence, lead=1) -> "UniPoly":
        p = cls.from_coeffs([lead])
        for r in roots:
            p = p * cls.from_coeffs([-r, type(r)(1) if isinstance(r, Fraction) else 1])
        return p

    # -- basic structure ----------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    @property
    def lead(self):
        return self.coeffs[-1]

    def coeffs_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs], dtype=float)

    def to_float(self) -> "UniPoly":
        if not self.exact:
            return self
        return UniPoly(tuple(float(c) for c in self.coeffs), False)

    # -- evaluation ----------------------------------------------------------

    def __call__(self, x):
        if self.exact and isinstance(x, (int, Fraction)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + (float(c) if self.exact else c)
        return acc

    def eval_with_bound(self, x):
        """Horner evaluation plus a certified forward error bound.

        Exact coefficients at an exact point give a zero bound.  Otherwise
        the bound is gamma_{4n} * sum |a_k||x|^k, which covers complex
        Horner roundoff and the float conversion of exact coefficients.
        """
        if self.exact and isinstance(x, (int, Fraction)):
            return self(x), 0.0
        val = self(x)
        n = len(self.coeffs)
        g = 4 * n * _U / (1 - 4 * n * _U)
        return val, g * self.abs_eval(abs(x))

    def abs_eval(self, r: float) -> float:
        acc = 0.0
        r = float(r)
        for c in reversed(self.coeffs):
            acc = acc * r + abs(float(c))
        return acc

    # -- arithmetic ----------------------------------------------------------

    def _pair(self, other: "UniPoly"):
        if self.exact and other.exact:
            return self.coeffs, other.coeffs, True
        return (
            tuple(float(c) for c in self.coeffs),
            tuple(float(c) for c in other.coeffs),
            False,
        )

    def __add__(self, other: "UniPoly") -> "UniPoly":
        a, b, exact = self._pair(other)
        n = max(len(a), len(b))
        zero = Fraction(0) if exact else 0.0
        out = [zero] * n
        for i, c in enumerate(a):
            out[i] += c
        for i, c in enumerate(b):
            out[i] += c
        return UniPoly(tuple(_trim_trailing(out)), exact)

    def __neg__(self) -> "UniPoly":
        return UniPoly(tuple(-c for c in self.coeffs), self.exact)

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, UniPoly):
            return self.scale(other)
        a, b, exact = self._pair(other)
        if self.is_zero or other.is_zero:
            return UniPoly.zero(exact)
        zero = Fraction(0) if exact else 0.0
        out = [zero] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca == 0:
                continue
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
        return UniPoly(tuple(_trim_trailing(out)), exact)

    __rmul__ = __mul__

    def scale(self, s) -> "UniPoly":
        if self.exact and isinstance(s, (int, Fraction)):
            return UniPoly(tuple(Fraction(s) * c for c in self.coeffs), True)
        return UniPoly(tuple(float(s) * float(c) for c in self.coeffs), False)

    def derivative(self) -> "UniPoly":
        if self.degree == 0:
            return UniPoly.zero(self.exact)
        out = [k * c for k, c in enumerate(self.coeffs)][1:]
        return UniPoly(tuple(_trim_trailing(out)), self.exact)

    def compose_affine(self, a, b) -> "UniPoly":
        """Return p(a*x + b)."""
        lin = UniPoly.from_coeffs([b, a])
        acc = UniPoly.zero(self.exact and lin.exact)
        for c in reversed(self.coeffs):
            acc = acc * lin + UniPoly.from_coeffs([c])
        return acc

    def pow(self, k: int) -> "UniPoly":
        out = UniPoly.one() if self.exact else UniPoly.from_coeffs([1.0])
        for _ in range(k):
            out = out * self
        return out

    # -- serialization --------------------------------------------------------

    def to_json(self) -> list:
        if self.exact:
            return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]
        return [float(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence) -> "UniPoly":
        vals = [Fraction(v) if isinstance(v, str) else v for v in data]
        return cls.from_coeffs(vals)


# ---------------------------------------------------------------------------
# multivariate polynomials (sparse)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiPoly:
    """Sparse multivariate polynomial: tuple of (multi-index, coefficient)."""

    nvars: int
    terms: tuple

    @classmethod
    def from_dict(cls, d: Mapping, nvars: int) -> "MultiPoly":
        clean = {}
        exact = True
        for alpha, c in d.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != nvars:
                raise ValueError(f"multi-index {alpha} has wrong length for nvars={nvars}")
            if any(a < 0 for a in alpha):
                raise ValueError("negative exponent")
            if not isinstance(c, (int, Fraction)):
                exact = False
            if c != 0:
                clean[alpha] = clean.get(alpha, 0) + c
        if exact:
            clean = {a: Fraction(c) for a, c in clean.items() if c != 0}
        else:
            clean = {a: float(c) for a, c in clean.items() if c != 0}
        return cls(nvars, tuple(sorted(clean.items())))

    @classmethod
    def from_uni(cls, p: UniPoly) -> "MultiPoly":
        return cls.from_dict({(k,): c for k, c in enumerate(p.coeffs)}, 1)

    def terms_dict(self) -> dict:
        return dict(self.terms)

    @property
    def exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for _, c in self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        return max((sum(a) for a, _ in self.terms), default=0)

    def max_degree_per_var(self) -> tuple:
        out = [0] * self.nvars
        for a, _ in self.terms:
            for i, e in enumerate(a):
                out[i] = max(out[i], e)
        return tuple(out)

    def is_multi_affine(self) -> bool:
        return all(e <= 1 for a, _ in self.terms for e in a)

    def is_symmetric(self) -> bool:
        """True when coefficients are invariant under variable permutation."""
        groups: dict = {}
        for a, c in self.terms:
            groups.setdefault(tuple(sorted(a)), []).append((a, c))
        for key, members in groups.items():
            perms = set(itertools.permutations(key))
            if len(members) != len(perms):
                return False
            ref = members[0][1]
            if any(c != ref for _, c in members):
                return False
        return True

    # -- evaluation ----------------------------------------------------------

    def __call__(self, point: Sequence):
        val = 0
        for a, c in self.terms:
            term = c
            for x, e in zip(point, a):
                if e:
                    term = term * x**e
            val = val + term
        return val

    def eval_with_bound(self, point: Sequence):
        if len(point) != self.nvars:
            raise ValueError(f"point has length {len(point)}, expected {self.nvars}")
        exact_pt = all(isinstance(x, (int, Fraction)) for x in point)
        if self.exact and exact_pt:
            val = Fraction(0)
            for a, c in self.terms:
                term = Fraction(c)
                for x, e in zip(point, a):
                    term *= Fraction(x) ** e
                val += term
            return val, 0.0
        val = 0.0
        absval = 0.0
        for a, c in self.terms:
            term = complex(c) if any(isinstance(x, complex) for x in point) else float(c)
            aterm = abs(float(c))
            for x, e in zip(point, a):
                if e:
                    term = term * x**e
                    aterm = aterm * abs(x) ** e
            val = val + term
            absval += aterm
        nops = self.total_degree() + len(self.terms) + 2
        g = 4 * nops * _U / (1 - 4 * nops * _U)
        return val, g * absval

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if self.nvars != other.nvars:
            raise ValueError("nvars mismatch")
        d = dict(self.terms)
        for a, c in other.terms:
            d[a] = d.get(a, 0) + c
        return MultiPoly.from_dict(d, self.nvars)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.nvars, tuple((a, -c) for a, c in self.terms))

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        if self.nvars != other.nvars:
            raise ValueError("nvars mismatch")
        d: dict = {}
        for a, ca in self.terms:
            for b, cb in other.terms:
                key = tuple(x + y for x, y in zip(a, b))
                d[key] = d.get(key, 0) + ca * cb
        return MultiPoly.from_dict(d, self.nvars)

    __rmul__ = __mul__

    def scale(self, s) -> "MultiPoly":
        return MultiPoly.from_dict({a: c * s for a, c in self.terms}, self.nvars)

    def pow(self, k: int) -> "MultiPoly":
        out = MultiPoly.from_dict({(0,) * self.nvars: 1}, self.nvars)
        for _ in range(k):
            out = out * self
        return out

    # -- substitution ---------------------------------------------------------

    def substitute_affine(self, i: int, const, lin: Mapping[int, object]) -> "MultiPoly":
        """Substitute x_i <- const + sum_j lin[j]*x_j."""
        base_terms = {(0,) * self.nvars: const} if const != 0 else {}
        for j, c in lin.items():
            if c == 0:
                continue
            key = tuple(1 if k == j else 0 for k in range(self.nvars))
            base_terms[key] = base_terms.get(key, 0) + c
        base = MultiPoly.from_dict(base_terms, self.nvars)
        max_e = max((a[i] for a, _ in self.terms), default=0)
        powers = [MultiPoly.from_dict({(0,) * self.nvars: 1}, self.nvars)]
        for _ in range(max_e):
            powers.append(powers[-1] * base)
        out = MultiPoly.from_dict({}, self.nvars)
        for a, c in self.terms:
            rest = tuple(0 if k == i else e for k, e in enumerate(a))
            mono = MultiPoly.from_dict({rest: c}, self.nvars)
            out = out + mono * powers[a[i]]
        return out

    def compose_affine_all(self, consts: Sequence, mat: Sequence[Sequence]) -> "MultiPoly":
        """Substitute x_i <- consts[i] + sum_j mat[i][j]*x_j for every i."""
        subs = []
        for i in range(self.nvars):
            d = {}
            if consts[i] != 0:
                d[(0,) * self.nvars] = consts[i]
            for j in range(self.nvars):
                if mat[i][j] != 0:
                    key = tuple(1 if k == j else 0 for k in range(self.nvars))
                    d[key] = d.get(key, 0) + mat[i][j]
            subs.append(MultiPoly.from_dict(d, self.nvars))
        maxdeg = self.max_degree_per_var()
        powers = []
        for i in range(self.nvars):
            ps = [MultiPoly.from_dict({(0,) * self.nvars: 1}, self.nvars)]
            for _ in range(maxdeg[i]):
                ps.append(ps[-1] * subs[i])
            powers.append(ps)
        out = MultiPoly.from_dict({}, self.nvars)
        for a, c in self.terms:
            term = MultiPoly.from_dict({(0,) * self.nvars: c}, self.nvars)
            for i, e in enumerate(a):
                if e:
                    term = term * powers[i][e]
            out = out + term
        return out

    def restrict_line(self, a: Sequence, b: Sequence) -> UniPoly:
        """Univariate restriction x -> f(a + x*b)."""
        out = UniPoly.zero(False)
        for alpha, c in self.terms:
            part = UniPoly.from_coeffs([float(c)])
            for ai, bi, e in zip(a, b, alpha):
                if e:
                    part = part * UniPoly.from_coeffs([float(ai), float(bi)]).pow(e)
            out = out + part
        return out

    def diagonal(self) -> UniPoly:
        """Substitute every variable by the same x."""
        maxd = self.total_degree()
        exact = self.exact
        zero = Fraction(0) if exact else 0.0
        out = [zero] * (maxd + 1)
        for a, c in self.terms:
            out[sum(a)] += c
        return UniPoly.from_coeffs(out)

    def to_uni(self) -> UniPoly:
        if self.nvars != 1:
            raise ValueError("not univariate")
        return self.diagonal()

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> list:
        recs = []
        for a, c in self.terms:
            cv = f"{c.numerator}/{c.denominator}" if isinstance(c, Fraction) else float(c)
            recs.append({"alpha": list(a), "c": cv})
        return recs

    @classmethod
    def from_json(cls, data: Sequence, nvars: int) -> "MultiPoly":
        d = {}
        for rec in data:
            c = rec["c"]
            d[tuple(rec["alpha"])] = Fraction(c) if isinstance(c, str) else c
        return cls.from_dict(d, nvars)


def evaluate(p, point):
    """Evaluate a UniPoly or MultiPoly, returning (value, error_bound)."""
    if isinstance(p, UniPoly):
        if isinstance(point, (list, tuple)):
            if len(point) != 1:
                raise ValueError("univariate polynomial expects one coordinate")
            point = point[0]
        return p.eval_with_bound(point)
    return p.eval_with_bound(point)


# ---------------------------------------------------------------------------
# elementary symmetric polynomials and polarization
# ---------------------------------------------------------------------------


def elem_sym_all(values: Sequence) -> list:
    """All elementary symmetric functions e_0..e_m of the given values."""
    exact = all(isinstance(v, (int, Fraction)) for v in values)
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    e = [one] + [zero] * len(values)
    for m, x in enumerate(values, start=1):
        xv = Fraction(x) if exact else float(x)
        for k in range(m, 0, -1):
            e[k] = e[k] + xv * e[k - 1]
    return e


def elem_sym(k: int, values: Sequence):
    if k < 0 or k > len(values):
        raise ValueError(f"k={k} out of range for {len(values)} values")
    return elem_sym_all(values)[k]


def polarize(p: UniPoly, N: int) -> MultiPoly:
    """Multi-affine symmetrization of p into N variables.

    The coefficient a_k of x^k becomes a_k / C(N,k) times the k-th
    elementary symmetric polynomial, so the diagonal restriction recovers p.
    """
    if p.degree > N:
        raise ValueError(f"degree {p.degree} exceeds N={N}")
    d: dict = {}
    for k, a_k in enumerate(p.coeffs):
        if a_k == 0:
            continue
        cnk = math.comb(N, k)
        coeff = Fraction(a_k, cnk) if isinstance(a_k, Fraction) else float(a_k) / cnk
        for combo in itertools.combinations(range(N), k):
            alpha = tuple(1 if i in combo else 0 for i in range(N))
            d[alpha] = d.get(alpha, 0) + coeff
    return MultiPoly.from_dict(d, N)


def polarize_multi(f: MultiPoly, N: int) -> MultiPoly:
    """Polarize every variable of f into a block of N multi-affine variables.

    Variable i maps to variables i*N .. i*N+N-1 of the result.
    """
    if any(d > N for d in f.max_degree_per_var()):
        raise ValueError("per-variable degree exceeds N")
    n = f.nvars
    d: dict = {}
    for alpha, c in f.terms:
        denom = 1
        for e in alpha:
            denom *= math.comb(N, e)
        coeff = Fraction(c, denom) if isinstance(c, Fraction) else float(c) / denom
        block_choices = [itertools.combinations(range(N), e) for e in alpha]
        for picks in itertools.product(*block_choices):
            beta = [0] * (n * N)
            for i, pick in enumerate(picks):
                for j in pick:
                    beta[i * N + j] = 1
            key = tuple(beta)
            d[key] = d.get(key, 0) + coeff
    return MultiPoly.from_dict(d, n * N)


# ---------------------------------------------------------------------------
# exact real-root machinery (Sturm sequences over Q)
# ---------------------------------------------------------------------------


def _fdeg(c: list) -> int:
    return len(c) - 1


def _ftrim(c: list) -> list:
    out = list(c)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _fderiv(c: list) -> list:
    if len(c) == 1:
        return [Fraction(0)]
    return _ftrim([Fraction(k) * v for k, v in enumerate(c)][1:])


def _feval(c: list, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for v in reversed(c):
        acc = acc * x + v
    return acc


def _fdivmod(a: list, b: list):
    if b == [Fraction(0)]:
        raise ZeroDivisionError
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    r = list(a)
    db, lb = _fdeg(b), b[-1]
    while _fdeg(r) >= db and r != [Fraction(0)]:
        shift = _fdeg(r) - db
        factor = r[-1] / lb
        q[shift] += factor
        for i in range(len(b)):
            r[shift + i] -= factor * b[i]
        r = _ftrim(r)
        if _fdeg(r) < db or (len(r) == 1 and r[0] == 0):
            break
    return _ftrim(q), _ftrim(r)


def _fgcd(a: list, b: list) -> list:
    a, b = _ftrim(a), _ftrim(b)
    while b != [Fraction(0)]:
        _, r = _fdivmod(a, b)
        a, b = b, r
    if a[-1] != 0:
        a = [v / a[-1] for v in a]
    return a


def _fsub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    out = [Fraction(0)] * n
    for i, v in enumerate(a):
        out[i] += v
    for i, v in enumerate(b):
        out[i] -= v
    return _ftrim(out)


def _yun_squarefree(c: list):
    """Yun's algorithm: return [(factor, multiplicity)] with p ~ prod f_i^i."""
    dp = _fderiv(c)
    g = _fgcd(c, dp)
    if _fdeg(g) == 0:
        return [(c, 1)]
    w, _ = _fdivmod(c, g)
    y, _ = _fdivmod(dp, g)
    out = []
    i = 1
    while _fdeg(w) > 0:
        z = _fsub(y, _fderiv(w))
        fi = _fgcd(w, z)
        if _fdeg(fi) > 0:
            out.append((fi, i))
        w, _ = _fdivmod(w, fi)
        y, _ = _fdivmod(z, fi)
        i += 1
    return out


def _sturm_chain(c: list) -> list:
    chain = [c, _fderiv(c)]
    while _fdeg(chain[-1]) > 0:
        _, r = _fdivmod(chain[-2], chain[-1])
        if r == [Fraction(0)]:
            break
        chain.append([-v for v in r])
    return chain


def _sign_variations(chain: list, x: Fraction) -> int:
    signs = []
    for c in chain:
        v = _feval(c, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _cauchy_bound(c: list) -> Fraction:
    lead = c[-1]
    m = max((abs(v / lead) for v in c[:-1]), default=Fraction(0))
    return Fraction(1) + m


def _count_in(chain, a: Fraction, b: Fraction) -> int:
    return _sign_variations(chain, a) - _sign_variations(chain, b)


def _isolate_roots(c: list, width: Fraction):
    """Isolating intervals (a, b] of width <= width for a square-free poly."""
    chain = _sturm_chain(c)
    B = _cauchy_bound(c)
    total = _count_in(chain, -B, B)
    out = []

    def recurse(lo, hi, cnt):
        if cnt == 0:
            return
        if cnt == 1 and hi - lo <= width:
            out.append((lo, hi))
            return
        mid = (lo + hi) / 2
        left = _count_in(chain, lo, mid)
        recurse(lo, mid, left)
        recurse(mid, hi, cnt - left)

    recurse(-B, B, total)
    return out


def exact_real_root_count(p: UniPoly) -> int:
    """Number of real roots with multiplicity; requires exact coefficients."""
    if not p.exact:
        raise ValueError("exact_real_root_count needs rational coefficients")
    if p.is_zero:
        raise ValueError("zero polynomial")
    if p.degree == 0:
        return 0
    total = 0
    for fac, mult in _yun_squarefree(list(p.coeffs)):
        chain = _sturm_chain(fac)
        B = _cauchy_bound(fac)
        total += mult * _count_in(chain, -B, B)
    return total


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RootList:
    """All roots (with multiplicity) plus per-root radius bounds.

    In exact mode certified_real_count comes from Sturm sequences and real
    roots carry isolating-interval half-widths as radii.  In float mode the
    radius is the distance-to-nearest-root bound ((|p(z)|+err)/|lead|)^(1/n)
    and certified_real_count counts roots passing the |Im| tolerance policy.
    """

    roots: tuple
    radii: tuple
    certified_real_count: int
    exact_mode: bool


def _newton_polish(coeffs_float: np.ndarray, z: complex, iters: int = 4) -> complex:
    dcoeffs = np.array([k * c for k, c in enumerate(coeffs_float)][1:], dtype=float)
    for _ in range(iters):
        pv = 0.0 + 0.0j
        for c in coeffs_float[::-1]:
            pv = pv * z + c
        dv = 0.0 + 0.0j
        for c in dcoeffs[::-1]:
            dv = dv * z + c
        if dv == 0:
            break
        step = pv / dv
        if not np.isfinite(step.real) or not np.isfinite(step.imag):
            break
        z = z - step
    return z


def _float_companion_roots(coeffs_float: Sequence[float]) -> list:
    c = _trim_trailing([float(v) for v in coeffs_float])
    if len(c) <= 1:
        return []
    return [complex(z) for z in np.roots(np.array(c[::-1], dtype=float))]


def trim_for_roots(coeffs: Sequence[float], trim_rel: float):
    """Drop trailing coefficients below trim_rel * max|c|.

    Returns (trimmed coefficient list, l1 mass of dropped coefficients).
    """
    c = [float(v) for v in coeffs]
    scale = max((abs(v) for v in c), default=0.0)
    if scale == 0.0:
        return [0.0], 0.0
    cut = trim_rel * scale
    dropped = 0.0
    while len(c) > 1 and abs(c[-1]) <= cut:
        dropped += abs(c.pop())
    return c, dropped


def real_roots(p: UniPoly, width: float | None = None, tol: Tolerances = DEFAULT) -> RootList:
    """Locate all roots of p; see RootList for the certification semantics."""
    if p.is_zero:
        raise ValueError("zero polynomial")
    if width is None:
        width = tol.isolation_width
    if p.degree == 0:
        return RootList((), (), 0, p.exact)

    if p.exact:
        roots: list = []
        radii: list = []
        certified = 0
        for fac, mult in _yun_squarefree(list(p.coeffs)):
            intervals = _isolate_roots(fac, Fraction(width).limit_denominator(10**18))
            certified += mult * len(intervals)
            for lo, hi in intervals:
                mid = (lo + hi) / 2
                for _ in range(mult):
                    roots.append(complex(float(mid), 0.0))
                    radii.append(float(hi - lo) / 2 + abs(float(mid)) * EPS)
            ncomplex = _fdeg(fac) - len(intervals)
            if ncomplex > 0:
                froots = _float_companion_roots([float(v) for v in fac])
                froots.sort(key=lambda z: abs(z.imag), reverse=True)
                for z in froots[:ncomplex]:
                    fp = UniPoly.from_coeffs([float(v) for v in fac])
                    val, err = fp.eval_with_bound(z)
                    rad = ((abs(val) + err) / abs(fp.lead)) ** (1.0 / fp.degree)
                    for _ in range(mult):
                        roots.append(z)
                        radii.append(rad)
        return RootList(tuple(roots), tuple(radii), certified, True)

    cs, _ = trim_for_roots(list(p.coeffs), tol.trim_rel)
    fp = UniPoly.from_coeffs(cs)
    zs = _float_companion_roots(cs)
    roots = []
    radii = []
    certified = 0
    dp = fp.derivative()
    for z in zs:
        z = _newton_polish(np.array(cs, dtype=float), z)
        val, err = fp.eval_with_bound(z)
        rad = ((abs(val) + err) / abs(fp.lead)) ** (1.0 / fp.degree)
        roots.append(z)
        radii.append(rad)
        dval, derr = dp.eval_with_bound(z)
        cond = fp.abs_eval(abs(z)) / max(abs(dval), 1e-300)
        thr = max(tol.im_abs_tol, tol.im_rel_tol * max(1.0, abs(z)), cond * _U, rad)
        if abs(z.imag) <= thr:
            certified += 1
    return RootList(tuple(roots), tuple(radii), certified, False)


# ---------------------------------------------------------------------------
# special polynomial families
# ---------------------------------------------------------------------------


def hermite_sum_form(n: int) -> UniPoly:
    """H_n(a) = sum_k (-1)^k n!/(k!(n-2k)!) a^(n-2k).

    This is the physicists' Hermite polynomial evaluated at half argument,
    so it has n distinct real roots at twice the usual locations.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    coeffs = [Fraction(0)] * (n + 1)
    for k in range(n // 2 + 1):
        coeffs[n - 2 * k] += Fraction((-1) ** k * math.factorial(n), math.factorial(k) * math.factorial(n - 2 * k))
    return UniPoly.from_coeffs(coeffs)


def kummer_series_poly(n: int) -> UniPoly:
    """Truncated confluent hypergeometric series 1F1(1-n; 1; y) in y.

    Degree n-1 with exact rational coefficients (1-n)_k / (k!)^2; its
    zeros in y are positive, so the corresponding x = -1/y zeros are
    negative and there are exactly n-1 of them.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    coeffs = []
    poch = Fraction(1)
    for k in range(n):
        coeffs.append(poch / Fraction(math.factorial(k)) ** 2)
        poch *= 1 - n + k
    return UniPoly.from_coeffs(coeffs)


def quadratic_death_cluster_poly(n: int) -> UniPoly:
    """Limit polynomial of the rescaled small roots under death rate k(k-1).

    Starting from n particles, the n-1 nonzero roots of the generating
    function scale like z = x*t where x runs over the negative zeros of
    R(x) = sum_k [n]_k [n-1]_k / k! x^(n-1-k), obtained from the order-t^n
    Taylor expansion of the semigroup applied to z^n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    coeffs = [Fraction(0)] * n
    for k in range(n):
        fall_n = math.factorial(n) // math.factorial(n - k)
        fall_n1 = math.factorial(n - 1) // math.factorial(n - 1 - k)
        coeffs[n - 1 - k] = Fraction(fall_n * fall_n1, math.factorial(k))
    return UniPoly.from_coeffs(coeffs)


def negative_x_zeros_of_series(p: UniPoly) -> list:
    """Zeros in x of p(y) under y = -1/x, for p with positive y-zeros."""
    rl = real_roots(p)
    ys = sorted(z.real for z, r in zip(rl.roots, rl.radii) if abs(z.imag) <= max(r, 1e-9))
    return sorted(-1.0 / y for y in ys if y > 0)


# poly_arith convenience wrappers -------------------------------------------


def poly_add(p: UniPoly, q: UniPoly) -> UniPoly:
    return p + q


def poly_mul(p: UniPoly, q: UniPoly) -> UniPoly:
    return p * q


def poly_derivative(p: UniPoly) -> UniPoly:
    return p.derivative()


def poly_substitute_affine(p: UniPoly, a, b) -> UniPoly:
    """p(a*x + b), exact on rationals."""
    return p.compose_affine(a, b)
