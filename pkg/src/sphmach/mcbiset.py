"""Mapping class bisets: distillations, orbit enumeration, twist rewriting.

The right action of mapping classes on a sphere machine is explored by
keying machines on their distillation (permutation tuple up to common
relabeling plus cycle labels), a complete invariant of left orbits.
Table edges record the knitting automorphism and the basis change that
witness  Psi_k * m  =  knitting * Psi_next.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import perms
from .perms import Perm
from .words import (
    Word, EPSILON, SphereGroup, ConjClass, Automorphism,
    winv, wmul, reduce_word, conjugate, cyclic_canonical,
    centralizer_root, power_exponent,
    simultaneous_conjugator, outer_normalize,
    common_generator_conjugator, is_peripheral_preserving,
)
from .folding import expand_expression
from .machine import (
    SphereMachine, BasisChange, change_basis, pre_compose,
    normalize_basis, validate_sphere, MachineError,
)


class ReconstructionError(MachineError):
    """Distillations matched but no knitting automorphism could be built."""


def _label_key(cls: ConjClass):
    if cls.is_trivial():
        return (0,)
    p = cls.peripheral_index()
    if p is not None:
        return (1, p)
    return (2, cls.canonical)


class Distillation:
    """Permutations of a machine together with the conjugacy classes of the
    entry products along each cycle, canonicalized under simultaneous
    relabeling of the basis."""

    def __init__(self, machine: SphereMachine):
        d = machine.degree
        self.degree = d
        self.perm_tuple: tuple[Perm, ...] = tuple(machine.monodromy_perms())
        self.labels: dict[tuple[int, int], ConjClass] = {}
        for i in range(1, machine.source.n + 1):
            for cyc in perms.cycles(self.perm_tuple[i - 1]):
                cls = ConjClass(machine.target, machine.cycle_product(i, cyc))
                self.labels[(i, cyc[0])] = cls
        self.key, self.numberings = self._canonicalize()

    def _bfs_numbering(self, start: int):
        d = self.degree
        num = [-1] * d
        num[start] = 0
        order = [start]
        k = 0
        while k < len(order):
            p = order[k]
            k += 1
            for pi in self.perm_tuple:
                q = pi[p]
                if num[q] < 0:
                    num[q] = len(order)
                    order.append(q)
        if len(order) < d:
            raise MachineError("distillation requires a transitive machine")
        return tuple(num)

    def _encode(self, num):
        inv = perms.inverse(num)
        new_perms = tuple(
            tuple(num[pi[inv[i]]] for i in range(self.degree))
            for pi in self.perm_tuple)
        new_labels = []
        for (i, p), cls in self.labels.items():
            cyc = {num[q] for q in self._cycle_of(i, p)}
            new_labels.append(((i, min(cyc)), _label_key(cls)))
        return (new_perms, tuple(sorted(new_labels)))

    def _cycle_of(self, i, p):
        pi = self.perm_tuple[i - 1]
        cyc = [p]
        q = pi[p]
        while q != p:
            cyc.append(q)
            q = pi[q]
        return cyc

    def _canonicalize(self):
        best = None
        maps = []
        for start in range(self.degree):
            num = self._bfs_numbering(start)
            enc = self._encode(num)
            if best is None or enc < best:
                best, maps = enc, [num]
            elif enc == best:
                maps.append(num)
        return best, maps

    def __eq__(self, other):
        return isinstance(other, Distillation) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


def distill(M: SphereMachine) -> Distillation:
    return Distillation(M)


def _candidate_relabelings(d1: Distillation, d2: Distillation):
    """Relabelings old1 -> old2 carrying the permutation tuple of d1 to d2,
    derived from the canonical numberings."""
    out = []
    for num1 in d1.numberings:
        for num2 in d2.numberings:
            inv2 = perms.inverse(num2)
            sigma = tuple(inv2[num1[p]] for p in range(d1.degree))
            if all(
                tuple(sigma[pa[q]] for q in perms.inverse(sigma)) == pb
                for pa, pb in zip(d1.perm_tuple, d2.perm_tuple)
            ) and sigma not in out:
                out.append(sigma)
    return out


def machine_isomorphism(Ma: SphereMachine, Mb: SphereMachine,
                        da: Distillation | None = None,
                        db: Distillation | None = None) -> BasisChange | None:
    """A BasisChange b with change_basis(Ma, b) == Mb, if one exists."""
    if Ma.source != Mb.source or Ma.target != Mb.target or Ma.degree != Mb.degree:
        return None
    da = da or distill(Ma)
    db = db or distill(Mb)
    if da.key != db.key:
        return None
    d = Ma.degree
    for numa in da.numberings:
        for numb in db.numberings:
            invb = perms.inverse(numb)
            sigma = tuple(invb[numa[p]] for p in range(d))  # Ma point -> Mb point
            rho = perms.inverse(sigma)                      # Mb point -> Ma point
            if any(tuple(sigma[pa[rho[i]]] for i in range(d)) != pb
                   for pa, pb in zip(da.perm_tuple, db.perm_tuple)):
                continue
            b = _solve_conjugators(Ma, Mb, rho)
            if b is not None:
                return b
    return None


def _solve_conjugators(Ma, Mb, rho: Perm) -> BasisChange | None:
    """Conjugators for change_basis(Ma, (l, rho)) == Mb: the entries must
    satisfy  Mb.e_i = l_i^-1 * Ma.e_{rho(i)} * l_j.  The basepoint value is
    a free unknown solved by simultaneous conjugacy over the back edges."""
    d = Ma.degree
    P: list[Word | None] = [None] * d
    Q: list[Word | None] = [None] * d
    P[0] = Q[0] = EPSILON  # l_i = P_i * X * Q_i
    order = [0]
    k = 0
    back: list[tuple[Word, Word]] = []
    while k < len(order):
        i = order[k]
        k += 1
        for r in range(Ma.source.n):
            A = Ma.rows[r].entries[rho[i]]
            B = Mb.rows[r].entries[i]
            j = Mb.rows[r].perm[i]
            if P[j] is None:
                # l_j = A^-1 * l_i * B
                P[j] = wmul(winv(A), P[i])
                Q[j] = wmul(Q[i], B)
                order.append(j)
            else:
                # X^-1 (P_i^-1 A P_j) X = Q_i B Q_j^-1
                back.append((wmul(winv(P[i]), A, P[j]),
                             wmul(Q[i], B, winv(Q[j]))))
    if any(p is None for p in P):
        return None
    X = simultaneous_conjugator([u for u, _ in back], [v for _, v in back])
    if X is None:
        return None
    ell = tuple(wmul(P[i], X, Q[i]) for i in range(d))
    b = BasisChange(ell, rho)
    return b if change_basis(Ma, b) == Mb else None


def same_left_orbit(M1: SphereMachine, M2: SphereMachine):
    """An automorphism m' with M2 isomorphic to m' . M1 (i.e. post_compose
    (M1, m') and M2 differ by a basis change), or None."""
    got = _same_left_orbit_full(M1, M2)
    return got[0] if got else None


class _KnitSolver:
    """Solves  M2 = change_basis(post_compose(M1, psi), b)  for psi and b,
    with the M1-dependent part precomputed so one machine can be matched
    against many candidates cheaply.

    Writing the unknown conjugator at point p as  psi(alpha_p) * beta_p
    along a spanning tree of M1's action graph turns every non-tree edge
    into an exact constraint  psi(X) = Y, where the X depend on M1 alone
    and generate the target group.
    """

    def __init__(self, M1: SphereMachine, d1: Distillation | None = None):
        from .folding import SubgroupGraph

        self.M1 = M1
        self.d1 = d1 or distill(M1)
        d = M1.degree
        alpha: list[Word | None] = [None] * d
        alpha[0] = EPSILON
        order = [0]
        tree: list[tuple[int, int, int]] = []   # (point, row, next)
        back: list[tuple[int, int, int]] = []
        k = 0
        while k < len(order):
            p = order[k]
            k += 1
            for r in range(M1.source.n):
                q = M1.rows[r].perm[p]
                if alpha[q] is None:
                    alpha[q] = wmul(winv(M1.rows[r].entries[p]), alpha[p])
                    tree.append((p, r, q))
                    order.append(q)
                else:
                    back.append((p, r, q))
        self.alpha = alpha
        self.tree = tree
        self.back = back
        self.xs = [wmul(winv(alpha[p]), M1.rows[r].entries[p], alpha[q])
                   for p, r, q in back]
        graph = SubgroupGraph(self.xs)
        self.exprs = []
        for g in M1.target.free_gen_indices():
            expr = graph.express(M1.target.gen(g))
            if expr is None:
                raise ReconstructionError(
                    "loop words of the machine do not generate the target group")
            self.exprs.append(expr)

    def solve(self, M2: SphereMachine, d2: Distillation | None = None):
        M1 = self.M1
        d2 = d2 or distill(M2)
        if self.d1.key != d2.key:
            return None
        d = M1.degree
        for sigma in _candidate_relabelings(self.d1, d2):
            beta: list[Word | None] = [None] * d
            beta[0] = EPSILON
            for p, r, q in self.tree:
                beta[q] = wmul(beta[p], M2.rows[r].entries[sigma[p]])
            ys = [wmul(beta[p], M2.rows[r].entries[sigma[p]], winv(beta[q]))
                  for p, r, q in self.back]
            if any(not x and y for x, y in zip(self.xs, ys)):
                continue
            images = [expand_expression(expr, ys) for expr in self.exprs]
            psi0 = Automorphism.from_images_of_free_gens(M1.target, images)
            # psi is pinned on <xs> = H, so the candidate either solves the
            # whole system exactly or this relabeling is wrong
            if any(psi0(x) != y for x, y in zip(self.xs, ys)):
                continue
            knit, g = outer_normalize(psi0, return_conjugator=True)
            rho = perms.inverse(sigma)
            ginv = winv(g)
            lam = [wmul(knit(self.alpha[p]), ginv, beta[p]) for p in range(d)]
            b = BasisChange(tuple(lam[rho[i]] for i in range(d)), rho)
            return knit, b
        raise ReconstructionError(
            "matching distillations but no knitting automorphism found")


def _same_left_orbit_full(M1, M2, d1=None, d2=None, solver=None):
    if (M1.source != M2.source or M1.target != M2.target
            or M1.degree != M2.degree):
        return None
    solver = solver or _KnitSolver(M1, d1)
    got = solver.solve(M2, d2)
    if got is None:
        return None
    psi, b = got
    assert is_peripheral_preserving(psi)
    return psi, b


# ---------------------------------------------------------------------------
# twist words and the mapping class biset table

TwistWord = tuple[int, ...]  # signed 1-based indices into the twist alphabet


def twist_word_str(alphabet, w: TwistWord) -> str:
    parts = []
    i = 0
    while i < len(w):
        x = w[i]
        j = i
        while j < len(w) and w[j] == x:
            j += 1
        k = j - i
        name = alphabet[abs(x) - 1]
        parts.append(name if (x > 0 and k == 1) else f"{name}^{k if x > 0 else -k}")
        i = j
    return "*".join(parts)


@dataclass
class TableEdge:
    gen: str
    source: int
    target: int
    knitting_auto: Automorphism | None = None
    knitting_word: TwistWord | None = None
    basis_change: BasisChange | None = None


@dataclass
class MappingClassBiset:
    """Basis of machines (or bare basis names) with the right-action table
    Psi_k * m = knitting * Psi_next."""

    alphabet: tuple[str, ...]
    basis_names: tuple[str, ...]
    table: dict[tuple[str, int], TableEdge]
    machines: list[SphereMachine] | None = None
    gens: dict[str, Automorphism] = field(default_factory=dict)
    base: int = 0

    @property
    def size(self) -> int:
        return len(self.basis_names)

    def action_perm(self, gen: str) -> Perm:
        img = [-1] * self.size
        for k in range(self.size):
            edge = self.table.get((gen, k))
            if edge is None:
                raise MachineError(f"table not closed at ({gen}, {k})")
            img[k] = edge.target
        if sorted(img) != list(range(self.size)):
            raise MachineError(f"action of {gen} is not a bijection on the basis")
        return tuple(img)

    def edge_into(self, gen: str, target: int) -> TableEdge:
        for k in range(self.size):
            e = self.table[(gen, k)]
            if e.target == target:
                return e
        raise MachineError(f"no {gen}-edge into basis element {target}")

    def word_knittings(self) -> bool:
        return all(e.knitting_word is not None for e in self.table.values())


def compute_mcbiset(M: SphereMachine, gens) -> MappingClassBiset:
    """Saturate the basis under the right action of the given peripheral-
    preserving automorphisms, keying left orbits by distillation.

    gens: list of (name, Automorphism) pairs or bare Automorphisms.
    """
    named = []
    for k, g in enumerate(gens):
        if isinstance(g, tuple):
            named.append((g[0], g[1]))
        else:
            named.append((f"m{k + 1}", g))
    for name, g in named:
        if not is_peripheral_preserving(g):
            raise MachineError(f"generator {name} is not peripheral-preserving")
    rep = validate_sphere(M)
    if not rep.is_sphere_biset:
        raise MachineError("input machine is not a sphere machine: "
                           + "; ".join(rep.details))
    basis = [M]
    dists = [distill(M)]
    solvers: list[_KnitSolver | None] = [None]
    index = {dists[0].key: 0}
    table: dict[tuple[str, int], TableEdge] = {}
    k = 0
    while k < len(basis):
        for name, g in named:
            N = pre_compose(basis[k], g)
            dN = distill(N)
            hit = index.get(dN.key)
            if hit is None:
                norm, bc = normalize_basis(N)
                basis.append(norm)
                dists.append(distill(norm))
                solvers.append(None)
                hit = len(basis) - 1
                index[dN.key] = hit
                table[(name, k)] = TableEdge(
                    name, k, hit,
                    knitting_auto=Automorphism.identity(M.target),
                    basis_change=bc.inv())
            else:
                if solvers[hit] is None:
                    solvers[hit] = _KnitSolver(basis[hit], dists[hit])
                phi, b = solvers[hit].solve(N, dN)
                table[(name, k)] = TableEdge(
                    name, k, hit, knitting_auto=phi, basis_change=b)
        k += 1
    return MappingClassBiset(
        alphabet=tuple(name for name, _ in named),
        basis_names=tuple(f"b{i}" for i in range(len(basis))),
        table=table,
        machines=basis,
        gens=dict(named),
    )


def full_twist_generators(G: SphereGroup):
    """All twists t_{i,j}, 1 <= i < j <= n, named by relator positions."""
    from .words import dehn_twist

    return [(f"t{i}_{j}", dehn_twist(i, j, G))
            for i in range(1, G.n + 1) for j in range(i + 1, G.n + 1)]


def rewrite(mcb: MappingClassBiset, k: int, m: TwistWord):
    """Push a twist word through the recursion: Psi_k * m = m' * Psi_k'.

    Returns (m', k') with m' a TwistWord when the table carries word
    knittings, otherwise an Automorphism.
    """
    use_words = mcb.word_knittings()
    acc_word: TwistWord = EPSILON
    acc_auto: Automorphism | None = None
    for x in reduce_word(m):
        name = mcb.alphabet[abs(x) - 1]
        if x > 0:
            edge = mcb.table.get((name, k))
            if edge is None:
                raise MachineError(f"table not closed at ({name}, {k})")
            step_word, step_auto, k = edge.knitting_word, edge.knitting_auto, edge.target
        else:
            edge = mcb.edge_into(name, k)
            step_word = winv(edge.knitting_word) if edge.knitting_word is not None else None
            step_auto = edge.knitting_auto.inverse() if edge.knitting_auto is not None else None
            k = edge.source
        if use_words:
            acc_word = wmul(acc_word, step_word)
        else:
            acc_auto = step_auto if acc_auto is None else acc_auto.compose(step_auto)
    if use_words:
        return acc_word, k
    if acc_auto is None:
        if mcb.machines is None:
            raise MachineError("cannot build an identity knitting without machines")
        acc_auto = Automorphism.identity(mcb.machines[0].target)
    return acc_auto, k


@dataclass
class Terminal:
    kind: str                       # "fixed" | "cycle" | "max-steps"
    states: list[tuple[TwistWord, int]]
    steps: int
    trace: list[tuple[TwistWord, int]]


def conjugacy_iterate(mcb: MappingClassBiset, start, max_steps: int = 10_000) -> Terminal:
    """Iterate the conjugation move m*b ~ b*m followed by rewriting until
    the twist word empties or a previously seen state recurs."""
    if not mcb.word_knittings():
        raise MachineError("conjugacy iteration needs twist-word knittings")
    w, k = reduce_word(start[0]), start[1]
    trace = [(w, k)]
    seen = {(w, k): 0}
    for step in range(1, max_steps + 1):
        if not w:
            return Terminal("fixed", [(w, k)], step - 1, trace)
        w, k = rewrite(mcb, k, w)
        state = (w, k)
        if state in seen:
            cyc = trace[seen[state]:]
            return Terminal("cycle", cyc, step, trace + [state])
        seen[state] = len(trace)
        trace.append(state)
    return Terminal("max-steps", [trace[-1]], max_steps, trace)


# ---------------------------------------------------------------------------
# monodromy, quotients, correspondence invariants

@dataclass
class PermGroupReport:
    degree: int
    generators: list[Perm]
    order: int
    transitive: bool


def monodromy(M: SphereMachine) -> PermGroupReport:
    gens = M.monodromy_perms()
    return PermGroupReport(
        degree=M.degree,
        generators=gens,
        order=len(perms.group_closure(gens)),
        transitive=perms.is_transitive(gens, M.degree),
    )


def regular_right_action(gens: list[Perm]):
    """The right-multiplication action of the generators on the sorted
    element list of the group they generate."""
    elems = sorted(perms.group_closure(gens))
    pos = {e: i for i, e in enumerate(elems)}
    action = [tuple(pos[perms.compose(e, g)] for e in elems) for g in gens]
    return elems, action


def left_mult_perms(elems: list[Perm], subgroup: list[Perm]) -> list[Perm]:
    pos = {e: i for i, e in enumerate(elems)}
    return [tuple(pos[perms.compose(v, e)] for e in elems) for v in subgroup]


def quotient_action(action: list[Perm], V: list[Perm]):
    """Induced action on V-orbits; raises if some generator fails to permute
    the orbits consistently."""
    if not action:
        raise MachineError("empty action")
    n = len(action[0])
    orbits = perms.orbit_partition(V, n)
    of = {}
    for k, orb in enumerate(orbits):
        for x in orb:
            of[x] = k
    induced = []
    for g in action:
        img = [-1] * len(orbits)
        for k, orb in enumerate(orbits):
            targets = {of[g[x]] for x in orb}
            if len(targets) != 1:
                raise MachineError("subgroup does not act by symmetries: orbit "
                                   f"{k} is torn apart")
            img[k] = targets.pop()
        if sorted(img) != list(range(len(orbits))):
            raise MachineError("induced map is not a permutation")
        induced.append(tuple(img))
    return orbits, induced


@dataclass
class CorrespondenceInvariants:
    sheets: int
    punctures: int
    euler_characteristic: int  # of the punctured covering surface
    genus: int


def correspondence_invariants(action: list[Perm]) -> CorrespondenceInvariants:
    """Topology of the covering of the thrice-punctured sphere given by
    three permutations with trivial product."""
    if len(action) != 3:
        raise MachineError("expected an action of three permutations")
    n = len(action[0])
    prod = perms.compose(perms.compose(action[0], action[1]), action[2])
    if not perms.is_identity(prod):
        raise MachineError("product of the three permutations is not trivial")
    if not perms.is_transitive(list(action), n):
        raise MachineError("covering surface is not connected")
    punctures = sum(len(perms.cycles(g)) for g in action)
    chi_open = -n
    chi_closed = chi_open + punctures
    if (2 - chi_closed) % 2:
        raise MachineError("inconsistent Euler characteristic")
    return CorrespondenceInvariants(n, punctures, chi_open, (2 - chi_closed) // 2)


# ---------------------------------------------------------------------------
# lift multisets over the acting group

def _canon_fingerprint(rows):
    """Normalize a fingerprint matrix modulo a uniform shift of all cells
    (the ambiguity left by the relator generator's conjugator)."""
    flat = [x for row in rows for x in row]
    if not flat:
        return tuple(rows)
    mu = flat[0]
    return tuple(tuple(x - mu for x in row) for row in rows)


def twist_fingerprint(psi: Automorphism):
    """A conjugation-invariant additive fingerprint of a peripheral-
    preserving automorphism: exponent sums of the per-generator
    conjugators, with the relator generator's row subtracted to kill
    the inner ambiguity.

    psi(g_i) = g_i^{z_i} composes as z_i(pq) = z_i(p) * p(z_i(q)), and
    peripheral-preserving maps fix exponent sums, so each matrix entry
    is a homomorphism to Z; conjugate automorphisms get canonically
    equal fingerprints.  None if psi is not peripheral-preserving.
    """
    from .words import is_conjugate

    G = psi.group
    free = G.free_gen_indices()
    ref = G.relator[-1]
    col = {j: c for c, j in enumerate(free)}
    rows = {}
    for i in range(1, G.n + 1):
        got = is_conjugate(G.gen(i), psi.images[i - 1])
        if got is None:
            return None
        counts = [0] * len(free)
        for x in got.rep:
            j = abs(x)
            if j in col and j != i:
                counts[col[j]] += 1 if x > 0 else -1
        rows[i] = counts
    base = rows[ref]
    fp = [
        tuple(rows[i][col[j]] - base[col[j]] for j in free if j != i)
        for i in range(1, G.n + 1) if i != ref
    ]
    return _canon_fingerprint(fp)


def fingerprint_table(candidates, max_power: int = 12):
    """Map fingerprint -> (name, power) for powers of named automorphisms,
    including the trivial class as ("1", 0)."""
    table = {}
    fp1 = None
    for name, a in candidates:
        fp1 = twist_fingerprint(a)
        if fp1 is None:
            raise MachineError(f"candidate {name} is not peripheral-preserving")
        for k in range(1, max_power + 1):
            fp = _canon_fingerprint([tuple(k * x for x in row) for row in fp1])
            table.setdefault(fp, (name, k))
    if fp1 is not None:
        zero = _canon_fingerprint([tuple(0 for _ in row) for row in fp1])
        table[zero] = ("1", 0)
    return table


def recognize_twist_power(psi: Automorphism):
    """Identify psi as a power of a Dehn twist about a curve enclosing a
    proper subset of the punctures.

    Returns ("identity",), ("twist", enclosed, k, curve_word) with
    enclosed a canonical frozenset of 1-based puncture indices and k > 0
    the twist power, or None when no such form is found.  Linear in the
    image lengths (conjugator systems over single generators are solved
    by coset parsing, never by exponent scans).
    """
    G = psi.group
    psi = outer_normalize(psi)
    if psi.is_identity_map():
        return ("identity",)
    n = G.n
    moved = tuple(i for i in range(1, n + 1) if psi.images[i - 1] != G.gen(i))
    subsets = []
    if 2 <= len(moved) <= n - 2:
        subsets.append(moved)
    for mask in range(1, 1 << n):
        S = tuple(i + 1 for i in range(n) if mask >> i & 1)
        if 2 <= len(S) <= n - 2 and S != moved:
            subsets.append(S)
    subsets.sort(key=lambda S: (len(S), S) if S != moved else (0, S))
    for S in subsets:
        others = [i for i in range(1, n + 1) if i not in S]
        h = common_generator_conjugator(
            G, others, [psi.images[p - 1] for p in others])
        if h is None:
            continue
        hinv = winv(h)
        W = common_generator_conjugator(
            G, S, [conjugate(psi.images[p - 1], hinv) for p in S])
        if W is None or W == EPSILON:
            continue
        root = centralizer_root(W)
        k = power_exponent(W, root)
        if k < 0:
            root, k = winv(root), -k
        comp = tuple(sorted(set(range(1, n + 1)) - set(S)))
        canonical = min(tuple(S), comp, key=lambda T: (len(T), T))
        return ("twist", frozenset(canonical), k, root)
    return None


@dataclass
class McbLiftEntry:
    degree: int
    knitting: object            # TwistWord or Automorphism
    label: tuple[str, int] | None   # (generator name, power) when identified


def lift_multiset_in_mcbiset(mcb: MappingClassBiset, gen: str,
                             candidates=None) -> list[McbLiftEntry]:
    """Degrees and knitting classes of the cycles of one generator's right
    action on the basis, like multiset_of_lifts on the recursion itself.

    Composite knittings are identified up to conjugacy as powers of the
    candidate twists (default: the biset's own generators) by their
    additive fingerprints; unidentified cycles keep label None.
    """
    pi = mcb.action_perm(gen)
    use_words = mcb.word_knittings()
    table = None
    if not use_words:
        if candidates is None:
            candidates = list(mcb.gens.items())
        table = fingerprint_table(candidates)
    out = []
    for cyc in perms.cycles(pi):
        if use_words:
            knit: object = EPSILON
        else:
            knit = None
        p = cyc[0]
        for _ in cyc:
            edge = mcb.table[(gen, p)]
            if use_words:
                knit = wmul(knit, edge.knitting_word)
            else:
                knit = edge.knitting_auto if knit is None \
                    else outer_normalize(knit.compose(edge.knitting_auto))
            p = edge.target
        label = None
        if use_words:
            core = cyclic_canonical(knit)
            label = ("1", 0) if not core else None
        elif knit is not None:
            label = table.get(twist_fingerprint(knit))
        out.append(McbLiftEntry(len(cyc), knit, label))
    return out
