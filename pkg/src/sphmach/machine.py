"""Sphere machines: wreath recursions presenting bisets of sphere maps.

A machine over a source group G (whose loops are lifted) and a target
group H (where the lifts live) assigns to every generator of G a
d-tuple of H-words and a permutation of the d basis points.  The right
action of g on basis point s is  s * g = h * t  when the wreath image
of g carries entry h at position s and moves s to t.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import perms
from .perms import Perm
from .words import (
    Word, EPSILON, SphereGroup, ConjClass, Automorphism,
    winv, wmul, is_peripheral_preserving,
)


class MachineError(ValueError):
    pass


class NotSphereBiset(MachineError):
    pass


@dataclass(frozen=True)
class WreathElement:
    entries: tuple[Word, ...]
    perm: Perm

    @property
    def degree(self) -> int:
        return len(self.entries)

    def __mul__(self, other: "WreathElement") -> "WreathElement":
        if self.degree != other.degree:
            raise MachineError("degree mismatch in wreath product")
        return WreathElement(
            tuple(wmul(self.entries[i], other.entries[self.perm[i]])
                  for i in range(self.degree)),
            perms.compose(self.perm, other.perm),
        )

    def inv(self) -> "WreathElement":
        pinv = perms.inverse(self.perm)
        return WreathElement(
            tuple(winv(self.entries[pinv[i]]) for i in range(self.degree)),
            pinv,
        )

    def is_identity(self) -> bool:
        return perms.is_identity(self.perm) and all(e == EPSILON for e in self.entries)


class SphereMachine:
    def __init__(self, source: SphereGroup, target: SphereGroup,
                 rows, name: str | None = None):
        source.require_infinite_orders()
        target.require_infinite_orders()
        rows = list(rows)
        if len(rows) != source.n:
            raise MachineError(
                f"need one row per source generator ({source.n}), got {len(rows)}")
        degrees = {r.degree for r in rows} or {1}
        if len(degrees) != 1:
            raise MachineError("rows have inconsistent degrees")
        self.source = source
        self.target = target
        self.degree = degrees.pop()
        self.rows: tuple[WreathElement, ...] = tuple(
            WreathElement(tuple(target.normal_form(e) for e in r.entries), r.perm)
            for r in rows)
        self.name = name

    @classmethod
    def identity(cls, G: SphereGroup) -> "SphereMachine":
        return cls(G, G, [WreathElement((G.gen(i),), (0,))
                          for i in range(1, G.n + 1)])

    def __eq__(self, other):
        return (isinstance(other, SphereMachine)
                and self.source == other.source and self.target == other.target
                and self.rows == other.rows)

    def __hash__(self):
        return hash((self.source, self.target, self.rows))

    def __repr__(self):
        label = self.name or f"{self.source.n}gen/deg{self.degree}"
        return f"SphereMachine({label})"

    def row(self, i: int) -> WreathElement:
        return self.rows[i - 1]

    def evaluate(self, w) -> WreathElement:
        """Multiplicative extension of the rows to any source word."""
        out = WreathElement((EPSILON,) * self.degree, perms.identity(self.degree))
        for x in w:
            if x == 0 or abs(x) > self.source.n:
                raise MachineError(f"letter {x} outside source group")
            out = out * (self.rows[x - 1] if x > 0 else self.rows[-x - 1].inv())
        return out

    def relator_ok(self) -> bool:
        return self.evaluate(self.source.relator_word()).is_identity()

    def monodromy_perms(self) -> list[Perm]:
        return [r.perm for r in self.rows]

    def cycle_product(self, i: int, cycle) -> Word:
        """Product of the entries of row i along a cycle of its permutation."""
        row = self.rows[i - 1]
        out = EPSILON
        for p in cycle:
            out = wmul(out, row.entries[p])
        return out

    def text_rows(self) -> list[str]:
        out = []
        for i, row in enumerate(self.rows):
            entries = ",".join(self.target.word_str(e) for e in row.entries)
            out.append(f"{self.source.names[i]}=<{entries}>"
                       f"{perms.cycle_string(row.perm)}")
        return out


@dataclass
class LiftMultiset:
    """Degrees and target conjugacy classes of the lifts of one class."""

    entries: list[tuple[int, ConjClass]]

    def sorted_key(self):
        return sorted((d, c.canonical) for d, c in self.entries)

    def __eq__(self, other):
        return isinstance(other, LiftMultiset) and self.sorted_key() == other.sorted_key()

    def nontrivial(self):
        return [(d, c) for d, c in self.entries if not c.is_trivial()]

    def total_degree(self) -> int:
        return sum(d for d, _ in self.entries)

    def describe(self, suppress_trivial: bool = False) -> str:
        items = self.nontrivial() if suppress_trivial else self.entries
        return ", ".join(
            f"({d}, {c.group.word_str(c.canonical) or '1'})" for d, c in items)


def multiset_of_lifts(M: SphereMachine, c) -> LiftMultiset:
    """Lifts of a source conjugacy class: orbit degrees of the right action
    of a representative, with the classes of the return words."""
    if isinstance(c, ConjClass):
        rep = c.rep
    else:
        rep = M.source.normal_form(c)
    w = M.evaluate(rep)
    out = []
    for cycle in perms.cycles(w.perm):
        # cycles come in action order starting from their least point
        h = EPSILON
        for p in cycle:
            h = wmul(h, w.entries[p])
        out.append((len(cycle), ConjClass(M.target, h)))
    return LiftMultiset(out)


@dataclass
class ValidationReport:
    relator_ok: bool
    transitive: bool            # SB1 (left-freeness is built into the model)
    riemann_hurwitz: bool       # SB2
    lifts_partition: bool       # SB3
    details: list[str]

    @property
    def is_sphere_biset(self) -> bool:
        return (self.relator_ok and self.transitive
                and self.riemann_hurwitz and self.lifts_partition)


def validate_sphere(M: SphereMachine) -> ValidationReport:
    details = []
    relator_ok = M.relator_ok()
    if not relator_ok:
        details.append("malformed machine: wreath image of the relator "
                       "is not the identity")
    gens = M.monodromy_perms()
    transitive = perms.is_transitive(gens, M.degree)
    if not transitive:
        details.append("monodromy action is not transitive")
    deficit = sum(perms.deficit(p) for p in gens)
    rh = deficit == 2 * M.degree - 2
    if not rh:
        details.append(f"cycle deficit {deficit} != 2d-2 = {2 * M.degree - 2}")
    found: list[ConjClass] = []
    ok3 = True
    for i in range(1, M.source.n + 1):
        for d, cls in multiset_of_lifts(M, ConjClass(M.source, M.source.gen(i))).entries:
            if cls.is_trivial():
                continue
            if cls.peripheral_index() is None:
                ok3 = False
                details.append(
                    f"lift of class {i} hits non-peripheral class {cls!r}")
            else:
                found.append(cls)
    expected = M.target.peripheral_classes()
    if sorted(c.canonical for c in found) != sorted(c.canonical for c in expected):
        ok3 = False
        details.append("peripheral classes of the target are not hit exactly once")
    return ValidationReport(relator_ok, transitive, rh, ok3, details)


@dataclass
class Portrait:
    """Where each target puncture sits over the source punctures."""

    mapping: dict[int, tuple[int, int]]  # target class -> (source class, degree)

    def describe(self, M: SphereMachine) -> list[str]:
        return [
            f"{M.target.names[j - 1]} -> {M.source.names[i - 1]} (deg {d})"
            for j, (i, d) in sorted(self.mapping.items())
        ]


def portrait(M: SphereMachine) -> Portrait:
    report = validate_sphere(M)
    if not report.is_sphere_biset:
        raise NotSphereBiset("; ".join(report.details) or "not a sphere biset")
    mapping: dict[int, tuple[int, int]] = {}
    for i in range(1, M.source.n + 1):
        for d, cls in multiset_of_lifts(M, ConjClass(M.source, M.source.gen(i))).entries:
            j = cls.peripheral_index()
            if j is not None:
                mapping[j] = (i, d)
    return Portrait(mapping)


def tensor(M1: SphereMachine, M2: SphereMachine) -> SphereMachine:
    """Thread the entries of M1 through M2; degrees multiply.

    Basis points are pairs (i, j) flattened as i*d2 + j, so the unit laws
    and associativity hold with literal equality of machines.
    """
    if M1.target != M2.source:
        raise MachineError("tensor: M1.target must equal M2.source")
    d1, d2 = M1.degree, M2.degree
    rows = []
    for i0 in range(1, M1.source.n + 1):
        outer = M1.rows[i0 - 1]
        inner = [M2.evaluate(e) for e in outer.entries]
        entries: list[Word] = [EPSILON] * (d1 * d2)
        img: list[int] = [0] * (d1 * d2)
        for i in range(d1):
            for j in range(d2):
                entries[i * d2 + j] = inner[i].entries[j]
                img[i * d2 + j] = outer.perm[i] * d2 + inner[i].perm[j]
        rows.append(WreathElement(tuple(entries), tuple(img)))
    return SphereMachine(M1.source, M2.target, rows)


@dataclass(frozen=True)
class BasisChange:
    """New basis point i is conjugators[i]^-1 * (old basis point relabel[i]),
    so entries transform as  l_i^-1 * e * l_j.  This matches the tuple
    convention of the usual computer-algebra rebasing commands."""

    conjugators: tuple[Word, ...]
    relabel: Perm

    @classmethod
    def identity(cls, d: int) -> "BasisChange":
        return cls((EPSILON,) * d, perms.identity(d))

    @classmethod
    def conjugation(cls, conjugators) -> "BasisChange":
        conjugators = tuple(tuple(w) for w in conjugators)
        return cls(conjugators, perms.identity(len(conjugators)))

    def inv(self) -> "BasisChange":
        rinv = perms.inverse(self.relabel)
        return BasisChange(
            tuple(winv(self.conjugators[rinv[i]]) for i in range(len(self.conjugators))),
            rinv,
        )


def change_basis(M: SphereMachine, b: BasisChange) -> SphereMachine:
    if len(b.conjugators) != M.degree:
        raise MachineError("basis change length does not match degree")
    rho = b.relabel
    rho_inv = perms.inverse(rho)
    ell = [M.target.normal_form(w) for w in b.conjugators]
    rows = []
    for row in M.rows:
        entries: list[Word] = [EPSILON] * M.degree
        img: list[int] = [0] * M.degree
        for i in range(M.degree):
            j = rho_inv[row.perm[rho[i]]]
            entries[i] = wmul(winv(ell[i]), row.entries[rho[i]], ell[j])
            img[i] = j
        rows.append(WreathElement(tuple(entries), tuple(img)))
    return SphereMachine(M.source, M.target, rows)


def pre_compose(M: SphereMachine, phi: Automorphism) -> SphereMachine:
    """Rows looked up through phi: the recursion of the machine twisted on
    its source side."""
    if phi.group != M.source:
        raise MachineError("pre_compose needs an automorphism of the source group")
    if not is_peripheral_preserving(phi):
        raise MachineError("automorphism does not preserve peripheral classes")
    return SphereMachine(M.source, M.target,
                         [M.evaluate(phi(M.source.gen(i)))
                          for i in range(1, M.source.n + 1)])


def post_compose(M: SphereMachine, psi: Automorphism) -> SphereMachine:
    """psi applied to every entry: the machine twisted on its target side."""
    if psi.group != M.target:
        raise MachineError("post_compose needs an automorphism of the target group")
    if not is_peripheral_preserving(psi):
        raise MachineError("automorphism does not preserve peripheral classes")
    return SphereMachine(M.source, M.target,
                         [WreathElement(tuple(psi(e) for e in row.entries), row.perm)
                          for row in M.rows])


def normalize_basis(M: SphereMachine) -> tuple[SphereMachine, BasisChange]:
    """Conjugate the basis so the entries along a breadth-first spanning
    tree of the action graph become trivial.  Keeps entries short after
    repeated twisting; the result presents the same biset."""
    d = M.degree
    ell: list[Word | None] = [None] * d
    ell[0] = EPSILON
    order = [0]
    k = 0
    while k < len(order):
        p = order[k]
        k += 1
        for row in M.rows:
            q = row.perm[p]
            if ell[q] is None:
                ell[q] = wmul(ell[p], row.entries[p])
                order.append(q)
    if any(e is None for e in ell):
        ell = [e if e is not None else EPSILON for e in ell]
    # new entries are ell_i^-1 * e_i * ell_{pi(i)}, which vanish along tree
    # edges when the conjugators are the inverted accumulated tree words
    b = BasisChange(tuple(winv(e) for e in ell), perms.identity(d))
    return change_basis(M, b), b


@dataclass
class PeripheralLift:
    class_index: int          # peripheral class of the source group
    cycle: tuple[int, ...]    # 1-based basis points of the monodromy cycle
    degree: int
    rep: Word                 # element of the stabilizer, conjugate into
                              # the class_index-th class to the degree-th power


@dataclass
class SubgroupPresentation:
    group: SphereGroup
    basepoint: int
    transversal: tuple[Word, ...]
    generators: tuple[Word, ...]
    peripheral: tuple[PeripheralLift, ...]

    @property
    def index(self) -> int:
        return len(self.transversal)


def stabilizer_subgroup(M: SphereMachine, s: int = 1) -> SubgroupPresentation:
    """Reidemeister-Schreier data for the stabilizer of basis point s under
    the right monodromy action of the source group.

    The transversal is built breadth-first over the free generators in
    declaration order; the Schreier generators of the non-tree edges are
    returned unreduced (their count is d*(n-1) - d + 1)."""
    G = M.source
    d = M.degree
    if not 1 <= s <= d:
        raise MachineError(f"basis point {s} out of range 1..{d}")
    free = G.free_gen_indices()
    action = {i: M.evaluate(G.gen(i)).perm for i in free}
    if not perms.is_transitive(list(action.values()), d):
        raise MachineError("machine is not right-transitive")
    base = s - 1
    trans: list[Word | None] = [None] * d
    trans[base] = EPSILON
    order = [base]
    k = 0
    tree = set()
    while k < len(order):
        p = order[k]
        k += 1
        for i in free:
            q = action[i][p]
            if trans[q] is None:
                trans[q] = wmul(trans[p], G.gen(i))
                tree.add((p, i))
                order.append(q)
    gens = []
    for p in order:
        for i in free:
            if (p, i) in tree:
                continue
            q = action[i][p]
            gens.append(wmul(trans[p], G.gen(i), winv(trans[q])))
    peripheral = []
    for i in range(1, G.n + 1):
        pi = M.evaluate(G.gen(i)).perm
        for cycle in perms.cycles(pi):
            p = cycle[0]
            deg = len(cycle)
            rep = wmul(trans[p], wmul(*([G.gen(i)] * deg)), winv(trans[p]))
            peripheral.append(PeripheralLift(
                i, tuple(a + 1 for a in cycle), deg, rep))
    return SubgroupPresentation(G, s, tuple(trans), tuple(gens), tuple(peripheral))
