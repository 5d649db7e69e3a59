"""Multicurves, Thurston matrices, obstructions, and sphere-tree splittings.

All matrix arithmetic is exact rational; floating point appears only in
the reported Perron root bracket.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .words import (
    Word, EPSILON, SphereGroup, ConjClass, Automorphism,
    winv, wmul, conjugate, cyclic_canonical, is_conjugate,
)
from .folding import SubgroupGraph
from .machine import SphereMachine, multiset_of_lifts
from .mcbiset import MappingClassBiset, twist_fingerprint, _canon_fingerprint


class MulticurveError(ValueError):
    pass


class SplitFailed(MulticurveError):
    """mc_to_gog failure; kind is 'abelianization-inconsistent',
    'bound-exhausted' or 'not-disjoint'."""

    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        super().__init__(f"{kind}: {detail}" if detail else kind)


class PromoteFailed(MulticurveError):
    def __init__(self, step: int, detail: str = ""):
        self.step = step
        super().__init__(f"failed at step {step}" + (f": {detail}" if detail else ""))


class Multicurve:
    """Non-trivial, non-peripheral conjugacy classes up to inversion."""

    def __init__(self, group: SphereGroup, reps):
        self.group = group
        self.curves: list[ConjClass] = []
        seen = set()
        for rep in reps:
            cls = ConjClass(group, rep, sign_insensitive=True)
            if cls.is_trivial():
                raise MulticurveError("trivial curve in multicurve")
            if any(cls.same_curve(p) for p in group.peripheral_classes()):
                raise MulticurveError(
                    f"curve {group.word_str(cls.rep)} is peripheral")
            if cls.canonical in seen:
                raise MulticurveError("repeated curve in multicurve")
            seen.add(cls.canonical)
            self.curves.append(cls)

    def __len__(self):
        return len(self.curves)

    def __iter__(self):
        return iter(self.curves)

    def labels(self):
        return [self.group.word_str(c.rep) for c in self.curves]


def classify_lifts(M: SphereMachine, downstairs: Multicurve,
                   upstairs: Multicurve | None = None):
    """For each curve of the lifted multicurve, tag every lift as isotopic
    to an upstairs curve, peripheral, trivial, or other."""
    if downstairs.group != M.source:
        raise MulticurveError("multicurve lives over the wrong group")
    target_cls = M.target.peripheral_classes()
    report = []
    for curve in downstairs:
        tags = []
        for deg, cls in multiset_of_lifts(M, curve.rep).entries:
            tag = None
            if upstairs is not None:
                for j, delta in enumerate(upstairs):
                    if delta.same_curve(ConjClass(M.target, cls.rep)):
                        tag = ("curve", j)
                        break
            if tag is None and cls.is_trivial():
                tag = ("trivial",)
            if tag is None:
                for i, p in enumerate(target_cls):
                    if cls.same_curve(p):
                        tag = ("peripheral", i + 1)
                        break
            if tag is None:
                tag = ("other", cls)
            tags.append((deg, tag))
        report.append((curve, tags))
    return report


@dataclass
class ThurstonMatrix:
    """Rows indexed by the upstairs curves, columns by the downstairs ones;
    entry = sum of 1/deg over lifts isotopic to the row curve."""

    rows: list[str]
    cols: list[str]
    entries: list[list[Fraction]]

    def __getitem__(self, rc):
        return self.entries[rc[0]][rc[1]]

    @property
    def shape(self):
        return len(self.rows), len(self.cols)

    def is_square(self):
        return len(self.rows) == len(self.cols)

    def is_integral(self):
        return all(x.denominator == 1 for row in self.entries for x in row)

    def as_int_matrix(self):
        if not self.is_integral():
            raise MulticurveError("matrix is not integral")
        return [[int(x) for x in row] for row in self.entries]

    def column_degree_counts(self, M: SphereMachine, downstairs: Multicurve):
        """Total degree of all lifts per column (consistency data)."""
        return [multiset_of_lifts(M, c.rep).total_degree() for c in downstairs]


def thurston_matrix(M: SphereMachine, downstairs: Multicurve,
                    upstairs: Multicurve | None = None) -> ThurstonMatrix:
    if upstairs is None:
        if M.source != M.target:
            raise MulticurveError("upstairs multicurve required for a "
                                  "non-dynamical machine")
        upstairs = Multicurve(M.target, [c.rep for c in downstairs])
    entries = [[Fraction(0)] * len(downstairs) for _ in upstairs]
    for col, (curve, tags) in enumerate(classify_lifts(M, downstairs, upstairs)):
        for deg, tag in tags:
            if tag[0] == "curve":
                entries[tag[1]][col] += Fraction(1, deg)
    return ThurstonMatrix(upstairs.labels(), downstairs.labels(), entries)


# ---------------------------------------------------------------------------
# exact Perron root decision

def charpoly(A: list[list[Fraction]]) -> list[Fraction]:
    """Coefficients of det(xI - A), highest power first (Faddeev-LeVerrier)."""
    n = len(A)
    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        for i in range(n):
            Mk[i][i] += coeffs[-1]
        AM = [[sum(A[i][l] * Mk[l][j] for l in range(n)) for j in range(n)]
              for i in range(n)]
        ck = -Fraction(sum(AM[i][i] for i in range(n)), k)
        coeffs.append(ck)
        Mk = AM
    return coeffs


def _poly_eval(p, x: Fraction) -> Fraction:
    out = Fraction(0)
    for c in p:
        out = out * x + c
    return out


def _poly_deriv(p):
    n = len(p) - 1
    return [c * (n - i) for i, c in enumerate(p[:-1])]


def _poly_mod(a, b):
    a = a[:]
    while len(a) >= len(b) and any(a):
        if a[0] == 0:
            a.pop(0)
            continue
        q = a[0] / b[0]
        for i in range(len(b)):
            a[i] -= q * b[i]
        a.pop(0)
    while a and a[0] == 0:
        a.pop(0)
    return a


def _sturm_chain(p):
    chain = [p, _poly_deriv(p)]
    while chain[-1]:
        nxt = [-c for c in _poly_mod(chain[-2], chain[-1])]
        if not nxt:
            break
        chain.append(nxt)
    return [c for c in chain if c]


def _sign_changes(chain, x: Fraction) -> int:
    signs = []
    for p in chain:
        v = _poly_eval(p, x)
        if v:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(p, lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots in (lo, hi] by Sturm's theorem."""
    chain = _sturm_chain(list(p))
    return _sign_changes(chain, lo) - _sign_changes(chain, hi)


@dataclass
class ObstructionReport:
    obstructed: bool
    perron_low: float
    perron_high: float
    charpoly: list[Fraction]


def is_obstructed(T: ThurstonMatrix, tol: float = 1e-9) -> ObstructionReport:
    """Exact decision whether the spectral radius is >= 1, plus a floating
    bracket for the Perron root.

    For a nonnegative matrix the spectral radius is the largest real root
    of the characteristic polynomial, so the decision is a Sturm count on
    [1, infinity)."""
    if not T.is_square():
        raise MulticurveError("obstruction test needs a square matrix")
    if any(x < 0 for row in T.entries for x in row):
        raise MulticurveError("matrix has negative entries")
    p = charpoly(T.entries)
    bound = max((sum(row) for row in T.entries), default=Fraction(0)) + 1
    obstructed = (_poly_eval(p, Fraction(1)) == 0
                  or count_real_roots(p, Fraction(1), bound) > 0)
    # bracket the largest real root by bisection on the Sturm count
    lo, hi = Fraction(0), bound
    if count_real_roots(p, lo - 1, hi) == 0:
        lo = hi = Fraction(0)  # nilpotent: radius 0
    else:
        while hi - lo > Fraction(tol).limit_denominator(10**12):
            mid = (lo + hi) / 2
            if count_real_roots(p, mid, hi) > 0 or _poly_eval(p, mid) == 0:
                lo = mid
            else:
                hi = mid
    return ObstructionReport(obstructed, float(lo), float(hi), p)


def twist_lift_check(mcb: MappingClassBiset, T: ThurstonMatrix,
                     twist_names: list[str]) -> list[str]:
    """Check that each Dehn twist generator along the multicurve lifts, on
    the base element, to the multitwist given by its Thurston matrix
    column.  Returns a list of mismatch descriptions (empty = pass)."""
    if not T.is_integral():
        raise MulticurveError("twist lift check needs an integral matrix")
    if len(twist_names) != len(T.cols) or len(T.rows) != len(T.cols):
        raise MulticurveError("need one twist generator per curve")
    problems = []
    gens = mcb.gens
    fp_of = {}
    for name in twist_names:
        fp = twist_fingerprint(gens[name])
        if fp is None:
            raise MulticurveError(f"{name} is not peripheral-preserving")
        fp_of[name] = fp
    for col, name in enumerate(twist_names):
        edge = mcb.table[(name, mcb.base)]
        if edge.target != mcb.base:
            problems.append(f"{name}: base element not fixed")
            continue
        want = None
        for row, rname in enumerate(twist_names):
            k = int(T.entries[row][col])
            contrib = [tuple(k * x for x in r) for r in fp_of[rname]]
            want = contrib if want is None else [
                tuple(a + b for a, b in zip(ra, rb))
                for ra, rb in zip(want, contrib)]
        got = twist_fingerprint(edge.knitting_auto)
        if got != _canon_fingerprint(want):
            problems.append(f"{name}: knitting does not match the twist "
                            f"vector {[int(T.entries[r][col]) for r in range(len(T.rows))]}")
    return problems


# ---------------------------------------------------------------------------
# integer linear fixed-point solver

@dataclass(frozen=True)
class LinExpr:
    """Affine integer expression over named unknowns."""

    coeffs: tuple[tuple[str, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @classmethod
    def var(cls, name: str) -> "LinExpr":
        return cls(((name, Fraction(1)),), Fraction(0))

    @classmethod
    def of(cls, value) -> "LinExpr":
        return cls((), Fraction(value))

    def _as_dict(self):
        return dict(self.coeffs)

    def __add__(self, other):
        d = self._as_dict()
        for k, v in other.coeffs:
            d[k] = d.get(k, Fraction(0)) + v
        return LinExpr(tuple(sorted((k, v) for k, v in d.items() if v)),
                       self.const + other.const)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "LinExpr":
        c = Fraction(c)
        return LinExpr(tuple((k, v * c) for k, v in self.coeffs), self.const * c)

    def is_zero(self):
        return not self.coeffs and self.const == 0

    def evaluate(self, values: dict) -> Fraction:
        return sum((Fraction(values[k]) * v for k, v in self.coeffs),
                   self.const)

    def normalized(self) -> "LinExpr":
        """Primitive integer form with positive leading coefficient."""
        items = [v for _, v in self.coeffs] + ([self.const] if self.const else [])
        if not items:
            return self
        from math import gcd
        denom = 1
        for v in items:
            denom = denom * v.denominator // gcd(denom, v.denominator)
        nums = [int(v * denom) for v in items]
        g = 0
        for x in nums:
            g = gcd(g, abs(x))
        g = g or 1
        scale = Fraction(denom, g)
        lead = (self.coeffs[0][1] if self.coeffs else self.const) * scale
        if lead < 0:
            scale = -scale
        return self.scale(scale)

    def __str__(self):
        parts = []
        for k, v in self.coeffs:
            parts.append(f"{'' if v == 1 else ('-' if v == -1 else str(v) + '*')}{k}")
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts).replace("+ -", "- ")


def smith_normal_form(A: list[list[int]]):
    """U, D, V with U*A*V = D diagonal (all unimodular, exact)."""
    m, n = len(A), len(A[0]) if A else 0
    D = [row[:] for row in A]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def row_op(i, j, q):  # row_i -= q*row_j
        D[i] = [a - q * b for a, b in zip(D[i], D[j])]
        U[i] = [a - q * b for a, b in zip(U[i], U[j])]

    def col_op(i, j, q):  # col_i -= q*col_j
        for row in D:
            row[i] -= q * row[j]
        for row in V:
            row[i] -= q * row[j]

    t = 0
    while t < min(m, n):
        # find a nonzero pivot
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j]:
                    if pivot is None or abs(D[i][j]) < abs(D[pivot[0]][pivot[1]]):
                        pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, m):
                if D[i][t]:
                    row_op(i, t, D[i][t] // D[t][t])
                    if D[i][t]:
                        swap_rows(t, i)
                    dirty = True
            for j in range(t + 1, n):
                if D[t][j]:
                    col_op(j, t, D[t][j] // D[t][t])
                    if D[t][j]:
                        swap_cols(t, j)
                    dirty = True
        t += 1
    for i in range(min(m, n)):
        if D[i][i] < 0:
            D[i] = [-x for x in D[i]]
            U[i] = [-x for x in U[i]]
    return U, D, V


@dataclass
class TwistFixedPointProblem:
    matrix: ThurstonMatrix
    theta: list[LinExpr]


@dataclass
class TwistFixedPointSolution:
    constraints: list[LinExpr]          # each must vanish
    congruences: list[tuple[LinExpr, int]]
    solution: list[LinExpr]             # v per curve, over unknowns + free params
    free_rank: int
    free_params: list[str]


def solve_twist_fixed_point(problem: TwistFixedPointProblem) -> TwistFixedPointSolution:
    """Solve v = theta + T v over the integers with symbolic theta: returns
    the linear constraints the unknowns must satisfy and the free lattice
    of solutions in v."""
    T = problem.matrix
    if not T.is_square():
        raise MulticurveError("fixed point problem needs a square matrix")
    A = T.as_int_matrix()
    n = len(A)
    ImT = [[(1 if i == j else 0) - A[i][j] for j in range(n)] for i in range(n)]
    U, D, V = smith_normal_form(ImT)
    # (I-T) v = theta  becomes  D w = U theta  with v = V w
    rhs = []
    for i in range(n):
        e = LinExpr()
        for j in range(n):
            if U[i][j]:
                e = e + problem.theta[j].scale(U[i][j])
        rhs.append(e)
    constraints: list[LinExpr] = []
    congruences: list[tuple[LinExpr, int]] = []
    w: list[LinExpr] = []
    free_params: list[str] = []
    for i in range(n):
        d = D[i][i] if i < len(D) and i < len(D[i]) else 0
        if d == 0:
            if rhs[i].is_zero():
                pass
            else:
                constraints.append(rhs[i].normalized())
            name = f"_w{i + 1}"
            free_params.append(name)
            w.append(LinExpr.var(name))
        else:
            expr = rhs[i].scale(Fraction(1, d))
            if any(v.denominator != 1 for _, v in expr.coeffs) \
                    or expr.const.denominator != 1:
                congruences.append((rhs[i].normalized(), d))
            w.append(expr)
    solution = []
    for i in range(n):
        e = LinExpr()
        for j in range(n):
            if V[i][j]:
                e = e + w[j].scale(V[i][j])
        solution.append(e)
    return TwistFixedPointSolution(
        constraints, congruences, solution, len(free_params), free_params)


def verify_fixed_point(sol: TwistFixedPointSolution,
                       problem: TwistFixedPointProblem, values: dict) -> bool:
    """Substitute numeric values (unknowns and free params) and verify
    v = theta + T v; values must satisfy the constraints."""
    for c in sol.constraints:
        if c.evaluate(values) != 0:
            return False
    v = [e.evaluate(values) for e in sol.solution]
    theta = [e.evaluate(values) for e in problem.theta]
    A = problem.matrix.entries
    n = len(v)
    for i in range(n):
        if v[i] != theta[i] + sum(A[i][j] * v[j] for j in range(n)):
            return False
    return True


# ---------------------------------------------------------------------------
# sphere trees of groups

@dataclass
class SphereVertex:
    name: str
    group: SphereGroup
    tags: list[tuple]        # per peripheral class: ("puncture", i) or
                             # ("curve", cid, sign)
    embeds: list[Word]       # per peripheral class, a word of the big group


@dataclass
class CurveVertex:
    cid: int
    rep: Word                # class representative in the big group
    element: Word            # the chosen exact splitting element


@dataclass
class TreeOfGroups:
    group: SphereGroup
    spheres: list[SphereVertex]
    curves: list[CurveVertex]

    def edges(self):
        """(cid, sphere index, peripheral index, sign) for each attachment."""
        out = []
        for si, v in enumerate(self.spheres):
            for pi, tag in enumerate(v.tags):
                if tag[0] == "curve":
                    out.append((tag[1], si, pi + 1, tag[2]))
        return out

    def to_dot(self) -> str:
        lines = ["graph sphere_tree {"]
        for si, v in enumerate(self.spheres):
            label = ",".join(
                self.group.names[t[1] - 1] if t[0] == "puncture" else f"c{t[1]}"
                for t in v.tags)
            lines.append(f'  s{si} [shape=ellipse, label="{v.name}: {label}"];')
        for c in self.curves:
            lines.append(
                f'  c{c.cid} [shape=box, label="curve {self.group.word_str(c.rep)}"];')
        for cid, si, pi, sign in self.edges():
            lines.append(f'  s{si} -- c{cid} [label="{"+" if sign > 0 else "-"}"];')
        lines.append("}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "spheres": [
                {
                    "name": v.name,
                    "generators": list(v.group.names),
                    "classes": [
                        {"tag": list(t), "embedding": self.group.word_str(w) or ""}
                        for t, w in zip(v.tags, v.embeds)
                    ],
                }
                for v in self.spheres
            ],
            "curves": [
                {"id": c.cid, "word": self.group.word_str(c.rep)}
                for c in self.curves
            ],
        }


@dataclass
class _Piece:
    group: SphereGroup
    tags: list[tuple]
    embeds: list[Word]


def _words_of_length(rank: int, L: int):
    letters = [x for x in range(-rank, rank + 1) if x]
    if L == 0:
        yield EPSILON
        return
    stack = [(x,) for x in letters]
    while stack:
        w = stack.pop()
        if len(w) == L:
            yield w
        else:
            for x in letters:
                if w[-1] != -x:
                    stack.append(w + (x,))


def _iddfs_products(P: SphereGroup, idxs: list[int], target_canon: Word,
                    bound: int):
    """Yield (order, conjugators, product) tuples with
    gen_{i1}^{u1} * ... in the given cyclic class and total conjugator
    length <= bound.  Iterative deepening over the total length; all
    cyclic rotations of the index order are tried."""
    s = len(idxs)
    rank = P.rank
    for total in range(bound + 1):
        for shift in range(s):
            order = idxs[shift:] + idxs[:shift]

            def rec(pos, remaining, conjs, prefix):
                if pos == s:
                    if remaining == 0 and cyclic_canonical(prefix) == target_canon:
                        yield list(conjs), prefix
                    return
                for L in range(remaining + 1):
                    for u in _words_of_length(rank, L):
                        yield from rec(pos + 1, remaining - L, conjs + [u],
                                       wmul(prefix, conjugate(P.gen(order[pos]), u)))

            for conjs, prod in rec(0, total, [], EPSILON):
                yield order, conjs, prod, total


def _iddfs_exact(P: SphereGroup, idxs: list[int], target: Word, bound: int):
    """Like _iddfs_products but requiring the product to equal the target
    word exactly."""
    s = len(idxs)
    rank = P.rank
    for total in range(bound + 1):
        for shift in range(s):
            order = idxs[shift:] + idxs[:shift]

            def rec(pos, remaining, conjs, prefix):
                if pos == s:
                    if remaining == 0 and prefix == target:
                        yield list(conjs)
                    return
                for L in range(remaining + 1):
                    for u in _words_of_length(rank, L):
                        yield from rec(pos + 1, remaining - L, conjs + [u],
                                       wmul(prefix, conjugate(P.gen(order[pos]), u)))

            for conjs in rec(0, total, [], EPSILON):
                yield order, conjs


def mc_to_gog(G: SphereGroup, curves: Multicurve, bound: int = 4) -> TreeOfGroups:
    """Split the sphere group along the multicurve into a sphere tree of
    groups, by abelianization partitions and bounded conjugator search.

    Raises SplitFailed with kind 'abelianization-inconsistent' (definite),
    'not-disjoint' (definite) or 'bound-exhausted' (inconclusive)."""
    if curves.group != G:
        raise MulticurveError("multicurve lives over the wrong group")
    pieces = [_Piece(G, [("puncture", i) for i in range(1, G.n + 1)],
                     [G.gen(i) for i in range(1, G.n + 1)])]
    curve_vertices = []
    for cid, curve in enumerate(curves):
        # locate the unique piece containing the curve
        home = None
        expr_w = None
        for pi, piece in enumerate(pieces):
            graph = SubgroupGraph(piece.embeds)
            expr = graph.express(curve.rep)
            if expr is not None:
                home, expr_w = pi, piece.group.normal_form(expr)
                break
        if home is None:
            raise SplitFailed("not-disjoint",
                              f"curve {G.word_str(curve.rep)} lies in no piece")
        piece = pieces[home]
        P = piece.group
        ab = P.abelianized(expr_w)
        if all(x <= 0 for x in ab):
            expr_w = winv(expr_w)
            ab = P.abelianized(expr_w)
        enclosed = [i + 1 for i, x in enumerate(ab) if x == 1]
        rest = [i + 1 for i, x in enumerate(ab) if x == 0]
        if (any(x not in (0, 1) for x in ab) or len(enclosed) < 2
                or len(rest) < 2):
            raise SplitFailed(
                "abelianization-inconsistent",
                f"curve {G.word_str(curve.rep)} has homology "
                f"{ab} in its piece")
        # realizability: both sides must express a common element within a
        # shared conjugator budget, and the assembled conjugated generators
        # must generate the piece (ruling out homologically-plausible
        # non-splittings)
        accepted = None
        for order_in, conjs_in, q, used in _iddfs_products(
                P, enclosed, cyclic_canonical(expr_w), bound):
            for order_out, conjs_out in _iddfs_exact(
                    P, rest, winv(q), bound - used):
                side_in = [conjugate(P.gen(i), u)
                           for i, u in zip(order_in, conjs_in)]
                side_out = [conjugate(P.gen(i), u)
                            for i, u in zip(order_out, conjs_out)]
                if SubgroupGraph(side_in + side_out).index_in(
                        P.free_gen_indices()) != 1:
                    continue
                accepted = (order_in, conjs_in, order_out, conjs_out, q)
                break
            if accepted:
                break
        if accepted is None:
            raise SplitFailed("bound-exhausted",
                              f"no generating realization of "
                              f"{G.word_str(curve.rep)} with total "
                              f"conjugator length <= {bound}")
        order_in, conjs_in, order_out, conjs_out, q = accepted

        def expand(w: Word) -> Word:
            out = EPSILON
            for x in w:
                e = piece.embeds[x - 1] if x > 0 else winv(piece.embeds[-x - 1])
                out = wmul(out, e)
            return out

        names_a = [P.names[i - 1] for i in order_in] + [f"e{cid + 1}"]
        A = SphereGroup(names_a)
        tags_a = [piece.tags[i - 1] for i in order_in] + [("curve", cid, -1)]
        embeds_a = [expand(conjugate(P.gen(i), u))
                    for i, u in zip(order_in, conjs_in)] + [expand(winv(q))]
        names_b = [f"e{cid + 1}"] + [P.names[i - 1] for i in order_out]
        B = SphereGroup(names_b)
        tags_b = [("curve", cid, +1)] + [piece.tags[i - 1] for i in order_out]
        embeds_b = [expand(q)] + [expand(conjugate(P.gen(i), u))
                                  for i, u in zip(order_out, conjs_out)]
        pieces[home:home + 1] = [_Piece(A, tags_a, embeds_a),
                                 _Piece(B, tags_b, embeds_b)]
        curve_vertices.append(CurveVertex(cid, curve.rep, expand(q)))
    spheres = [SphereVertex(f"S{i}", p.group, p.tags, p.embeds)
               for i, p in enumerate(pieces)]
    return TreeOfGroups(G, spheres, curve_vertices)


# ---------------------------------------------------------------------------
# promotion of class bijections to conjugators

@dataclass
class PromotedConjugator:
    vertex_map: dict[int, int]
    vertex_isos: dict[int, Automorphism]   # stored as generator-image maps
    edge_elements: dict[tuple[int, int], Word]


def _class_bijection_iso(src: SphereGroup, dst: SphereGroup, beta: list[int]):
    """Generator images of an isomorphism src -> dst sending class i of src
    to class beta[i-1] of dst, built from adjacent half-twist moves.

    Invariant: images[k] always lies in the dst class perm[k], and the
    ordered product of the images is trivial; adjacent slots are swapped
    by (a, b) -> (b, b^-1 a b) until perm reaches beta.
    """
    if src.n != dst.n or sorted(beta) != list(range(1, dst.n + 1)):
        return None
    n = src.n
    perm = list(range(1, n + 1))
    images = [dst.gen(i) for i in range(1, n + 1)]
    for slot in range(n):
        j = perm.index(beta[slot], slot)
        while j > slot:
            a, b = images[j - 1], images[j]
            images[j - 1], images[j] = b, conjugate(a, b)
            perm[j - 1], perm[j] = perm[j], perm[j - 1]
            j -= 1
    if perm != list(beta):
        return None
    for k in range(n):
        if is_conjugate(dst.gen(beta[k]), images[k]) is None:
            return None
    return [dst.normal_form(w) for w in images]


def promote_bijection(tree1: TreeOfGroups, tree2: TreeOfGroups,
                      h: dict) -> PromotedConjugator:
    """Decide whether a bijection of distinguished classes promotes to a
    conjugator between the trees; h maps tags of tree1 to tags of tree2
    (("puncture", i) and ("curve", cid) keys)."""
    curves1 = {("curve", c.cid) for c in tree1.curves}
    curves2 = {("curve", c.cid) for c in tree2.curves}
    # step 1: the bijection must restrict to the geometric edge sets
    for tag in curves1:
        if h.get(tag) not in curves2:
            raise PromoteFailed(1, f"{tag} does not map to a curve class")
    if len({h[tag] for tag in curves1}) != len(curves2):
        raise PromoteFailed(1, "curve classes are not matched bijectively")

    def vertex_tagset(v: SphereVertex):
        return frozenset(("curve", t[1]) if t[0] == "curve" else t
                         for t in v.tags)

    # step 2: promote to a graph isomorphism
    vmap: dict[int, int] = {}
    for i, v in enumerate(tree1.spheres):
        want = frozenset(h[t] for t in vertex_tagset(v))
        matches = [j for j, w in enumerate(tree2.spheres)
                   if vertex_tagset(w) == want]
        if len(matches) != 1:
            raise PromoteFailed(2, f"vertex {v.name} has no unique image")
        vmap[i] = matches[0]
    if len(set(vmap.values())) != len(tree2.spheres):
        raise PromoteFailed(2, "vertex map is not a bijection")
    # step 3: peripheral sets match per vertex (classwise, with multiplicity)
    for i, v in enumerate(tree1.spheres):
        w = tree2.spheres[vmap[i]]
        if sorted(map(str, (h[t] for t in vertex_tagset(v)))) != \
                sorted(map(str, vertex_tagset(w))):
            raise PromoteFailed(3, f"peripheral sets differ at {v.name}")
    # step 4: per-vertex isomorphisms compatible with h
    isos: dict[int, Automorphism] = {}
    for i, v in enumerate(tree1.spheres):
        w = tree2.spheres[vmap[i]]
        tgt_pos = {}
        for pi, t in enumerate(w.tags):
            key = ("curve", t[1]) if t[0] == "curve" else t
            tgt_pos[key] = pi + 1
        beta = []
        for t in v.tags:
            key = ("curve", t[1]) if t[0] == "curve" else t
            beta.append(tgt_pos[h[key]])
        images = _class_bijection_iso(v.group, w.group, beta)
        if images is None:
            raise PromoteFailed(4, f"no class-compatible isomorphism at {v.name}")
        isos[i] = Automorphism(w.group, images, check=False)
    # step 5: edge intertwiners by conjugation elements
    edge_elems: dict[tuple[int, int], Word] = {}
    for cid, si, pi, sign in tree1.edges():
        v = tree1.spheres[si]
        w = tree2.spheres[vmap[si]]
        src_word = isos[si].images[pi - 1]
        # the image class index in the target vertex
        key = ("curve", v.tags[pi - 1][1])
        tgt_index = None
        for pj, t in enumerate(w.tags):
            if t[0] == "curve" and ("curve", t[1]) == h[key]:
                tgt_index = pj + 1
        if tgt_index is None:
            raise PromoteFailed(5, "edge image class missing")
        got = is_conjugate(w.group.gen(tgt_index), src_word)
        if got is None:
            raise PromoteFailed(5, f"edge at {v.name} has no intertwiner")
        edge_elems[(cid, si)] = got.rep
    return PromotedConjugator(vmap, isos, edge_elems)
