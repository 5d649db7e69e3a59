"""Constructive membership in finitely generated subgroups of free groups.

Stallings folding of the petal graph, with every edge decorated by a
word over abstract generator symbols.  Decorations are kept coherent
through folds by gauge corrections at the merged vertex, so that the
decoration product along any loop at the basepoint evaluates (symbols
substituted by the given generators) to the loop's label word.  Tracing
a word therefore decides membership and yields an expression at once,
with no assumption that the generators are a free basis.
"""

from __future__ import annotations

from .words import Word, EPSILON, winv, wmul, reduce_word


class SubgroupGraph:
    """Folded core graph of <gens> with expression decorations."""

    def __init__(self, gens):
        self.gens = [tuple(w) for w in gens]
        self._parent: list[int] = [0]
        nonzero = [(i, w) for i, w in enumerate(self.gens) if w]
        self._symbol_of = [i for i, _ in nonzero]
        edges: list[list] = []  # [u, letter>0, v, decoration] (alive entries)
        for k, (_, w) in enumerate(nonzero):
            u = 0
            for pos, x in enumerate(w):
                v = 0 if pos == len(w) - 1 else self._new_state()
                dec = (k + 1,) if pos == len(w) - 1 else EPSILON
                if x > 0:
                    edges.append([u, x, v, dec])
                else:
                    edges.append([v, -x, u, winv(dec)])
                u = v
        self._edges = self._fold(edges)
        self._trans: dict[tuple[int, int], tuple[int, Word]] = {}
        for u, x, v, dec in self._edges:
            self._trans[(u, x)] = (v, dec)
            self._trans[(v, -x)] = (u, winv(dec))

    def _new_state(self) -> int:
        self._parent.append(len(self._parent))
        return len(self._parent) - 1

    def _find(self, v: int) -> int:
        while self._parent[v] != v:
            self._parent[v] = self._parent[self._parent[v]]
            v = self._parent[v]
        return v

    def _fold(self, edges):
        while True:
            for e in edges:
                e[0] = self._find(e[0])
                e[2] = self._find(e[2])
            buckets: dict[tuple[int, int, int], list] = {}
            dup = None
            for e in edges:
                u, x, v, _ = e
                for key in ((0, u, x), (1, v, x)):
                    if key in buckets:
                        dup = (buckets[key], e, key[0])
                        break
                    buckets[key] = e
                if dup:
                    break
            if not dup:
                return edges
            e1, e2, side = dup
            if side == 0:  # same source and letter: merge targets
                t1, t2, d1, d2 = e1[2], e2[2], e1[3], e2[3]
            else:  # same target and letter: merge sources
                t1, t2, d1, d2 = e1[0], e2[0], winv(e1[3]), winv(e2[3])
            if t1 == t2:
                edges.remove(e2)  # parallel edge; expressions differ by a
                continue           # relation among the generators
            # gauge the non-base vertex so both decorations agree, then union
            if t2 != 0:
                t, c = t2, wmul(winv(d2), d1)
            else:
                t, c = t1, wmul(winv(d1), d2)
            for e in edges:
                into = self._find(e[2]) == t
                outof = self._find(e[0]) == t
                if into:
                    e[3] = wmul(e[3], c)
                if outof:
                    e[3] = wmul(winv(c), e[3])
            self._parent[t] = t1 if t == t2 else t2
            edges.remove(e2)

    def trace(self, w: Word):
        """(end state, decoration product) after reading w from the base,
        or None if w leaves the graph."""
        v, dec = 0, EPSILON
        for x in w:
            step = self._trans.get((v, x))
            if step is None:
                return None
            v, d = step
            dec = wmul(dec, d)
        return v, dec

    def contains(self, w) -> bool:
        got = self.trace(tuple(w))
        return got is not None and got[0] == 0

    def states(self) -> set[int]:
        out = {0}
        for (v, _), (w, _) in self._trans.items():
            out.add(v)
            out.add(w)
        return out

    def index_in(self, letters):
        """Subgroup index in the free group on the given positive letters:
        the number of core graph states when the graph is complete over
        them, None when the index is infinite."""
        if isinstance(letters, int):
            letters = range(1, letters + 1)
        letters = list(letters)
        sts = self.states()
        for v in sts:
            for x in letters:
                if (v, x) not in self._trans or (v, -x) not in self._trans:
                    return None
        return len(sts)

    def express(self, w) -> Word | None:
        """w as a word over 1-based positions into gens, or None."""
        got = self.trace(tuple(w))
        if got is None or got[0] != 0:
            return None
        return reduce_word(
            self._symbol_of[abs(x) - 1] + 1 if x > 0
            else -(self._symbol_of[abs(x) - 1] + 1)
            for x in got[1]
        )


def express_in_subgroup(gens, target) -> Word | None:
    """target as a word over the given generators (signed 1-based positions),
    or None when target is not in <gens>.

    Substituting gens[i-1] for symbol i and freely reducing recovers target.
    """
    target = tuple(target)
    if not any(gens):
        return EPSILON if not target else None
    return SubgroupGraph(gens).express(target)


def expand_expression(expr: Word, gens) -> Word:
    """Substitute gens into an expression word and freely reduce."""
    gens = [tuple(w) for w in gens]
    out: Word = EPSILON
    for x in expr:
        out = wmul(out, gens[x - 1] if x > 0 else winv(gens[-x - 1]))
    return out


def subgroup_contains(gens, target) -> bool:
    if not any(gens):
        return not tuple(target)
    return SubgroupGraph(gens).contains(target)
