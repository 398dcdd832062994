"""Integer Chow ring of the iterated blow-up of P^3 along the camera centers,
the triple points and the (proper transforms of the) camera-plane lines.

The ring is generated by the hyperplane class ``h`` together with one class
per blown-up center:

* ``Q_i``      camera center q_i          (exceptional divisor is -Q_i)
* ``P_i_j_k``  triple point H_i^H_j^H_k   (exceptional divisor is -P_ijk)
* ``T_i_j``    line L_ij = H_i^H_j        (exceptional divisor is -T_ij)

Relations are kept as oriented rewrite rules.  Every element is stored in
normal form: a sparse ``{monomial: int}`` map whose degree-3 part is a
multiple of ``h^3`` and whose degree-2 part lives on the basis
``h^2, Q_i^2, P_ijk^2, h*T_ij``.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import (
    ExpressionParseError,
    NotTopDegree,
    StuckNormalForm,
    UnknownGenerator,
    UnsupportedN,
)

Gen = Tuple  # ("h",) | ("Q", i) | ("P", i, j, k) | ("T", i, j)
Monomial = Tuple[Tuple[Gen, int], ...]

H: Gen = ("h",)
_KIND_ORDER = {"h": 0, "Q": 1, "P": 2, "T": 3}
_ARITY = {"h": 0, "Q": 1, "P": 3, "T": 2}
TOP_DEGREE = 3
ONE: Monomial = ()


def gen_key(g: Gen):
    return (_KIND_ORDER[g[0]], g[1:])


def make_monomial(exps: Dict[Gen, int]) -> Monomial:
    return tuple(sorted(((g, e) for g, e in exps.items() if e), key=lambda ge: gen_key(ge[0])))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for g, e in b:
        exps[g] = exps.get(g, 0) + e
    return make_monomial(exps)


def _mono_div(m: Monomial, d: Dict[Gen, int]) -> Monomial:
    exps = dict(m)
    for g, e in d.items():
        exps[g] -= e
    return make_monomial(exps)


def _gen_name(g: Gen) -> str:
    if g[0] == "h":
        return "h"
    return g[0] + "".join(f"_{i}" for i in g[1:])


def _meets(a: Gen, b: Gen) -> bool:
    """True if the two (non-h) generators may have a nonzero product."""
    if a == b:
        return True
    if a[0] == "T" and b[0] == "P":
        a, b = b, a
    if a[0] == "P" and b[0] == "T":
        return set(b[1:]) <= set(a[1:])
    return False


@dataclass(frozen=True)
class PoincarePolynomial:
    """Univariate polynomial in the exceptional variable ``T`` with ring
    coefficients; ``coeffs[k]`` multiplies ``T^k``."""

    coeffs: Tuple["RingElement", ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, t: "RingElement") -> "RingElement":
        pres = t.pres
        out = pres.zero()
        power = pres.one()
        for c in self.coeffs:
            out = out + c * power
            power = power * t
        return out

    def __str__(self) -> str:
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if not c.terms:
                continue
            tk = "" if k == 0 else ("T" if k == 1 else f"T^{k}")
            body = str(c) if len(c.terms) == 1 else f"({c})"
            if k and c == c.pres.one():
                parts.append(tk)
            elif k:
                parts.append(f"{body}*{tk}")
            else:
                parts.append(body)
        return " + ".join(parts) or "0"


class RingElement:
    """Sparse integer combination of monomials in a fixed presentation."""

    __slots__ = ("pres", "terms")

    def __init__(self, pres: "ChowPresentation", terms: Optional[Dict[Monomial, int]] = None):
        self.pres = pres
        self.terms = {m: int(c) for m, c in (terms or {}).items() if c}

    def _coerce(self, other) -> "RingElement":
        if isinstance(other, RingElement):
            if other.pres is not self.pres:
                raise ValueError("elements belong to different presentations")
            return other
        if isinstance(other, int):
            return RingElement(self.pres, {ONE: other})
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return RingElement(self.pres, terms)

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.pres, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return RingElement(self.pres, {m: c * other for m, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.pres.multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self * other
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not defined")
        out = self.pres.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            other = RingElement(self.pres, {ONE: other})
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.pres is other.pres and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def homogeneous_part(self, k: int) -> "RingElement":
        return RingElement(self.pres, {m: c for m, c in self.terms.items() if mono_degree(m) == k})

    def degrees(self) -> set:
        return {mono_degree(m) for m in self.terms}

    def __str__(self) -> str:
        return format_element(self)

    def __repr__(self) -> str:
        return f"RingElement({format_element(self)!r}, N={self.pres.N})"


class ChowPresentation:
    """Finitely presented Chow ring A(P~^3) for ``N`` cameras in general position.

    ``truncate`` drops monomials of degree > 3 before any rewriting; disable it
    to check that the relations alone kill everything above the top degree.
    """

    def __init__(self, N: int, *, truncate: bool = True):
        if not isinstance(N, int) or N < 2:
            raise UnsupportedN(f"need N >= 2 cameras, got {N!r}")
        self.N = N
        self.truncate = truncate
        idx = range(1, N + 1)
        self.points_q: List[Gen] = [("Q", i) for i in idx]
        self.points_p: List[Gen] = [("P",) + t for t in itertools.combinations(idx, 3)]
        self.lines: List[Gen] = [("T",) + t for t in itertools.combinations(idx, 2)]
        self.generators: List[Gen] = [H] + self.points_q + self.points_p + self.lines
        self._gen_set = frozenset(self.generators)
        self._memo: Dict[Monomial, Dict[Monomial, int]] = {}
        self._self_rule_cache: Dict[Gen, Tuple[Dict[Gen, int], Dict[Monomial, int]]] = {}

    # -- construction helpers -------------------------------------------------
    def zero(self) -> RingElement:
        return RingElement(self)

    def one(self) -> RingElement:
        return RingElement(self, {ONE: 1})

    def gen(self, kind: str, *indices: int) -> RingElement:
        g = (kind,) + tuple(indices)
        if g not in self._gen_set:
            raise KeyError(f"{_gen_name(g)} is not a generator for N={self.N}")
        return RingElement(self, {((g, 1),): 1})

    @property
    def h(self) -> RingElement:
        return self.gen("h")

    def sum(self, elements: Iterable[RingElement]) -> RingElement:
        terms: Dict[Monomial, int] = {}
        for e in elements:
            for m, c in e.terms.items():
                terms[m] = terms.get(m, 0) + c
        return RingElement(self, terms)

    def element(self, terms: Dict[Monomial, int]) -> RingElement:
        """Raw (possibly non-normal) element; pass through ``normal_form``."""
        return RingElement(self, terms)

    def center_of(self, g: Gen) -> Tuple:
        return {"Q": ("q",), "P": ("p",), "T": ("L",)}[g[0]] + g[1:]

    # -- Poincare polynomials and the rewrite system --------------------------
    def poincare_polynomial(self, center: Tuple) -> PoincarePolynomial:
        """Relation polynomial of a blow-up center: ``("q", i)``,
        ``("p", i, j, k)`` or ``("L", i, j)``."""
        kind = center[0]
        h = self.h
        if kind in ("q", "p"):
            self._check_center(center)
            return PoincarePolynomial((h**3, self.zero(), self.zero(), self.one()))
        if kind == "L":
            self._check_center(center)
            i, j = center[1:]
            psq = self.zero()
            for k in range(1, self.N + 1):
                if k not in (i, j):
                    psq = psq + self.gen("P", *sorted((i, j, k))) ** 2
            return PoincarePolynomial((h**2 + psq, -2 * (self.N - 3) * h, self.one()))
        raise ValueError(f"unknown blow-up center {center!r}")

    def _check_center(self, center):
        kind = {"q": "Q", "p": "P", "L": "T"}[center[0]]
        g = (kind,) + tuple(center[1:])
        if g not in self._gen_set:
            raise ValueError(f"{center!r} is not a blow-up center for N={self.N}")

    def _self_rule(self, g: Gen):
        # g^d -> -(P(g) - g^d), read off the Poincare polynomial of g's center.
        try:
            return self._self_rule_cache[g]
        except KeyError:
            pass
        poly = self.poincare_polynomial(self.center_of(g))
        d = poly.degree
        rhs: Dict[Monomial, int] = {}
        gm = ((g, 1),)
        for k in range(d):
            for m, c in poly.coeffs[k].terms.items():
                mk = m
                for _ in range(k):
                    mk = mono_mul(mk, gm)
                rhs[mk] = rhs.get(mk, 0) - c
        rule = ({g: d}, rhs)
        self._self_rule_cache[g] = rule
        return rule

    def applicable_rules(self, m: Monomial) -> List[Tuple[str, Dict[Gen, int], Dict[Monomial, int]]]:
        """All rewrite rules whose left side divides ``m``, in the canonical order
        (vanishing rules, then self-intersection rules, then kernel rules)."""
        exps = dict(m)
        eh = exps.get(H, 0)
        others = [g for g in exps if g != H]
        rules = []
        if eh >= 4:
            rules.append(("ambient", {H: 4}, {}))
        # R1: generators of disjoint centers multiply to zero
        for a, b in itertools.combinations(others, 2):
            if not _meets(a, b):
                rules.append(("disjoint", {a: 1, b: 1}, {}))
        # R4: Poincare relations
        for g in others:
            lhs, rhs = self._self_rule(g)
            if exps[g] >= lhs[g]:
                rules.append(("poincare", lhs, rhs))
        # R2: restriction of h to a point is zero
        if eh:
            for g in others:
                if g[0] in "QP":
                    rules.append(("point-kernel", {H: 1, g: 1}, {}))
        # R3: h^2 restricts to zero on a line; P_ijk restricts to -[pt] on L_ij
        for g in others:
            if g[0] != "T":
                continue
            if eh >= 2:
                rules.append(("line-kernel", {H: 2, g: 1}, {}))
            for p in others:
                if p[0] == "P" and set(g[1:]) <= set(p[1:]):
                    rules.append(("line-kernel", {g: 1, p: 1}, {((H, 1), (g, 1)): -1}))
        return rules

    # -- reduction -------------------------------------------------------------
    def reduce_monomial(self, m: Monomial, rng: Optional[random.Random] = None) -> Dict[Monomial, int]:
        """Normal form of a single monomial.

        With ``rng`` the applicable rule is picked at random at every step and
        nothing is memoized; otherwise the first rule in canonical order is used
        and results are cached (dict writes are atomic, and every thread would
        write the same value, so concurrent readers are safe).
        """
        if rng is None:
            cached = self._memo.get(m)
            if cached is not None:
                return cached
        if self.truncate and mono_degree(m) > TOP_DEGREE:
            result: Dict[Monomial, int] = {}
        else:
            rules = self.applicable_rules(m)
            if not rules:
                result = {m: 1}
            else:
                _, lhs, rhs = rng.choice(rules) if rng is not None else rules[0]
                quotient = _mono_div(m, lhs)
                result = {}
                for rm, rc in rhs.items():
                    for nm, nc in self.reduce_monomial(mono_mul(rm, quotient), rng).items():
                        result[nm] = result.get(nm, 0) + rc * nc
                result = {k: v for k, v in result.items() if v}
        if rng is None:
            self._memo[m] = result
        return result

    def normal_form(self, a: RingElement, rng: Optional[random.Random] = None) -> RingElement:
        out: Dict[Monomial, int] = {}
        for m, c in a.terms.items():
            for nm, nc in self.reduce_monomial(m, rng).items():
                out[nm] = out.get(nm, 0) + c * nc
        return RingElement(self, out)

    def multiply(self, a: RingElement, b: RingElement, rng: Optional[random.Random] = None) -> RingElement:
        if rng is not None:
            out: Dict[Monomial, int] = {}
            for ma, ca in a.terms.items():
                for mb, cb in b.terms.items():
                    for nm, nc in self.reduce_monomial(mono_mul(ma, mb), rng).items():
                        out[nm] = out.get(nm, 0) + ca * cb * nc
            return RingElement(self, out)
        return self._fast_multiply(a, b)

    def _neighbours(self, g: Gen) -> List[Gen]:
        if g[0] == "T":
            i, j = g[1:]
            return [("P",) + tuple(sorted((i, j, k))) for k in range(1, self.N + 1) if k not in (i, j)]
        if g[0] == "P":
            return [("T",) + pair for pair in itertools.combinations(g[1:], 2)]
        return []

    def _fast_multiply(self, a: RingElement, b: RingElement) -> RingElement:
        # Only pairs whose non-h generators pairwise meet can survive, so each
        # term of ``a`` is matched against a small neighbourhood of ``b``.
        pure: List[Tuple[Monomial, int]] = []
        by_gen: Dict[Gen, List[Tuple[Monomial, int]]] = {}
        for m, c in b.terms.items():
            gens = [g for g, _ in m if g != H]
            if not gens:
                pure.append((m, c))
            for g in gens:
                by_gen.setdefault(g, []).append((m, c))
        out: Dict[Monomial, int] = {}
        trunc = self.truncate
        for ma, ca in a.terms.items():
            ga = [g for g, _ in ma if g != H]
            if not ga:
                candidates: Iterable = b.terms.items()
            else:
                seen = {}
                for m, c in pure:
                    seen[m] = c
                for g in [ga[0]] + self._neighbours(ga[0]):
                    for m, c in by_gen.get(g, ()):
                        seen[m] = c
                candidates = seen.items()
            da = mono_degree(ma)
            for mb, cb in candidates:
                if trunc and da + mono_degree(mb) > TOP_DEGREE:
                    continue
                for nm, nc in self.reduce_monomial(mono_mul(ma, mb)).items():
                    out[nm] = out.get(nm, 0) + ca * cb * nc
        return RingElement(self, out)

    def degree(self, a: RingElement) -> int:
        return degree(self, a)

    def __repr__(self):
        return f"ChowPresentation(N={self.N}, generators={len(self.generators)})"


def build_presentation(N: int, *, truncate: bool = True) -> ChowPresentation:
    return ChowPresentation(N, truncate=truncate)


def multiply(pres: ChowPresentation, a: RingElement, b: RingElement) -> RingElement:
    return pres.multiply(a, b)


def degree(pres: ChowPresentation, a: RingElement) -> int:
    """Integer ``c`` with ``a = c * h^3``; ``a`` must be homogeneous of degree 3."""
    bad = sorted(a.degrees() - {TOP_DEGREE})
    if bad:
        raise NotTopDegree(f"element has components in degree(s) {bad}, expected only {TOP_DEGREE}")
    nf = pres.normal_form(a)
    h3 = ((H, 3),)
    stuck = [m for m in nf.terms if m != h3]
    if stuck:
        raise StuckNormalForm("no rule applies to " + ", ".join(_format_monomial(m) for m in stuck))
    return nf.terms.get(h3, 0)


def poincare_polynomial(pres: ChowPresentation, center: Tuple) -> PoincarePolynomial:
    return pres.poincare_polynomial(center)


def curve_class_E(pres: ChowPresentation, i: int) -> RingElement:
    """Class of the proper transform of a general line through q_i in H_i."""
    h = pres.h
    out = h**2 + pres.gen("Q", i) ** 2
    for j in range(1, pres.N + 1):
        if j != i:
            out = out + h * pres.gen("T", *sorted((i, j)))
    return out


def generator_count(N: int) -> int:
    return 1 + N + comb(N, 3) + comb(N, 2)


# -- text syntax -----------------------------------------------------------------

def _format_monomial(m: Monomial) -> str:
    if not m:
        return "1"
    return "*".join(_gen_name(g) + (f"^{e}" if e > 1 else "") for g, e in m)


def _term_key(m: Monomial):
    return (-mono_degree(m), [(gen_key(g), -e) for g, e in m])


def format_element(a: RingElement) -> str:
    if not a.terms:
        return "0"
    pieces = []
    for n, m in enumerate(sorted(a.terms, key=_term_key)):
        c = a.terms[m]
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if not m:
            body = str(mag)
        elif mag == 1:
            body = _format_monomial(m)
        else:
            body = f"{mag}*{_format_monomial(m)}"
        if n == 0:
            pieces.append(body if c > 0 else "-" + body)
        else:
            pieces.append(f" {sign} {body}")
    return "".join(pieces)


_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<gen>[A-Za-z]\w*)|(?P<op>[-+*^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        mt = _TOKEN.match(text, pos)
        if mt is None:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionParseError(f"unexpected character {text[bad]!r}", bad)
        kind = mt.lastgroup
        tokens.append((kind, mt.group(kind), mt.start(kind)))
        pos = mt.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, pres: ChowPresentation, text: str):
        self.pres = pres
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ExpressionParseError(f"expected {op!r}, found {val or 'end of input'!r}", pos)

    def parse(self) -> RingElement:
        out = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionParseError(f"unexpected {val!r}", pos)
        return out

    def expr(self):
        out = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                out = out + rhs if val == "+" else out - rhs
            else:
                return out

    def term(self):
        out = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            out = out * self.unary()
        return out

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            inner = self.unary()
            return -inner if val == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "int":
                raise ExpressionParseError("exponent must be a nonnegative integer", pos)
            return base ** int(val)
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "int":
            return RingElement(self.pres, {ONE: int(val)})
        if kind == "gen":
            return self.generator(val, pos)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ExpressionParseError(f"unexpected {val or 'end of input'!r}", pos)

    def generator(self, name: str, pos: int) -> RingElement:
        head, *rest = name.split("_")
        if head not in _ARITY or len(rest) != _ARITY[head] or not all(r.isdigit() for r in rest):
            raise UnknownGenerator(f"unknown generator {name!r}", pos)
        idx = tuple(int(r) for r in rest)
        if list(idx) != sorted(set(idx)) or any(not 1 <= k <= self.pres.N for k in idx):
            raise UnknownGenerator(
                f"unknown generator {name!r} for N={self.pres.N} (indices must increase within 1..N)", pos
            )
        return self.pres.gen(head, *idx)


def parse_element(pres: ChowPresentation, text: str) -> RingElement:
    """Parse ``3*h^2*T_1_2 - P_1_2_3^2``-style text into a normal-form element."""
    return _Parser(pres, text).parse()
