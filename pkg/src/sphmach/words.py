"""Exact word arithmetic in sphere groups.

A sphere group on n generators g1..gn (n = 0 or n >= 2) is the free
group of rank n-1 with the relator g1*g2*...*gn; the class of each gi
is a peripheral conjugacy class.  Elements are kept in *normal form*:
freely reduced words over g1..g_{n-1} only, the last generator having
been eliminated through gn = (g1*...*g_{n-1})^-1.

Words are tuples of signed 1-based generator indices (-i is the
inverse of i), always freely reduced.
"""

from __future__ import annotations

from dataclasses import dataclass


Word = tuple[int, ...]

EPSILON: Word = ()


class FiniteOrderUnsupported(ValueError):
    """Raised when an operation meets a generator of finite order."""


def reduce_word(letters) -> Word:
    """Freely reduce a sequence of signed generator indices."""
    out: list[int] = []
    for x in letters:
        if x == 0:
            raise ValueError("generator index 0 is not allowed")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def wmul(*words: Word) -> Word:
    out: list[int] = []
    for w in words:
        for x in w:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
    return tuple(out)


def winv(w: Word) -> Word:
    return tuple(-x for x in reversed(w))


def wpow(w: Word, k: int) -> Word:
    """w^k via the cyclic decomposition w = c * core * c^-1; the repeated
    core never cancels internally or against the wings."""
    if k == 0 or not w:
        return EPSILON
    core, c = cyclic_reduce(w)
    body = core * k if k > 0 else winv(core) * (-k)
    return c + body + winv(c)


def conjugate(w: Word, by: Word) -> Word:
    """w^by = by^-1 * w * by."""
    return wmul(winv(by), w, by)


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Return (core, c) with w = c * core * c^-1 and core cyclically reduced."""
    c: list[int] = []
    w = list(w)
    while len(w) >= 2 and w[0] == -w[-1]:
        c.append(w[0])
        w = w[1:-1]
    return tuple(w), tuple(c)


def rotations(w: Word):
    for k in range(max(1, len(w))):
        yield w[k:] + w[:k]


def cyclic_canonical(w: Word, up_to_inversion: bool = False) -> Word:
    """Least rotation of the cyclically reduced core (optionally over w^-1 too)."""
    core, _ = cyclic_reduce(w)
    best = min(rotations(core))
    if up_to_inversion:
        best = min(best, min(rotations(winv(core))))
    return best


def cyclic_eq(u: Word, v: Word, up_to_inversion: bool = False) -> bool:
    return cyclic_canonical(u, up_to_inversion) == cyclic_canonical(v, up_to_inversion)


class SphereGroup:
    """A sphere group: n named generators with relator g1*...*gn.

    ``orders`` may record finite generator orders for data-model
    completeness, but every operation refuses to work with them
    (orbisphere groups are not supported).
    """

    def __init__(self, names, orders=None, relator=None):
        names = list(names)
        if len(names) == 1:
            raise ValueError("sphere groups have n = 0 or n >= 2 generators")
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        self.names: tuple[str, ...] = tuple(names)
        self.n = len(names)
        self.orders: tuple[object, ...] = tuple(
            (orders or {}).get(nm, None) for nm in names
        )
        self._index = {nm: i + 1 for i, nm in enumerate(names)}
        if relator is None:
            self.relator: tuple[int, ...] = tuple(range(1, self.n + 1))
        else:
            rel = tuple(self._index[x] if isinstance(x, str) else int(x)
                        for x in relator)
            if sorted(rel) != list(range(1, self.n + 1)):
                raise ValueError("relator must use every generator exactly once")
            self.relator = rel
        self._eliminated = self.relator[-1] if self.n else None

    def __repr__(self):
        return f"SphereGroup({','.join(self.names)})"

    def __eq__(self, other):
        return isinstance(other, SphereGroup) and self.names == other.names \
            and self.orders == other.orders and self.relator == other.relator

    def __hash__(self):
        return hash((self.names, self.orders, self.relator))

    @property
    def rank(self) -> int:
        return max(self.n - 1, 0)

    def free_gen_indices(self) -> list[int]:
        """Indices of the n-1 generators kept in the normal form."""
        return [i for i in range(1, self.n + 1) if i != self._eliminated]

    def relator_word(self) -> Word:
        return tuple(self.relator)

    def require_infinite_orders(self):
        if any(o is not None for o in self.orders):
            raise FiniteOrderUnsupported(
                "finite generator orders are parsed but not supported")

    def gen(self, i: int) -> Word:
        """Generator number i (1-based) in normal form."""
        if not 1 <= i <= self.n:
            raise IndexError(f"generator index {i} out of range 1..{self.n}")
        if i == self._eliminated:
            return winv(tuple(self.relator[:-1]))
        return (i,)

    def gen_by_name(self, name: str) -> Word:
        if name not in self._index:
            raise KeyError(f"unknown generator {name!r}")
        return self.gen(self._index[name])

    def index_of(self, name: str) -> int:
        if name not in self._index:
            raise KeyError(f"unknown generator {name!r}")
        return self._index[name]

    def normal_form(self, w) -> Word:
        """Rewrite w over the free generators by eliminating the last
        relator generator, then freely reduce."""
        self.require_infinite_orders()
        out: list[int] = []

        def push(x):
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)

        gone = self._eliminated
        body = self.relator[:-1]
        for x in w:
            if x == 0 or abs(x) > self.n:
                raise IndexError(f"letter {x} out of range for {self!r}")
            if abs(x) != gone:
                push(x)
            elif x > 0:
                for i in reversed(body):
                    push(-i)
            else:
                for i in body:
                    push(i)
        return tuple(out)

    def word_from_names(self, items) -> Word:
        """items: iterable of (name, exponent); result in normal form."""
        letters: list[int] = []
        for name, exp in items:
            i = self._index.get(name)
            if i is None:
                raise KeyError(f"unknown generator {name!r}")
            letters.extend([i if exp > 0 else -i] * abs(exp))
        return self.normal_form(letters)

    def word_str(self, w: Word) -> str:
        """Print a word in the machine text syntax (empty word prints '')."""
        parts = []
        i = 0
        while i < len(w):
            x = w[i]
            j = i
            while j < len(w) and w[j] == x:
                j += 1
            k = j - i
            name = self.names[abs(x) - 1]
            if x > 0 and k == 1:
                parts.append(name)
            else:
                parts.append(f"{name}^{k if x > 0 else -k}")
            i = j
        return "*".join(parts)

    def peripheral_classes(self) -> list["ConjClass"]:
        return [ConjClass(self, self.gen(i)) for i in range(1, self.n + 1)]

    def abelianized(self, w: Word):
        """Image of w in Z^n / (1,..,1), as an n-vector with last entry 0.

        Words in normal form never use gn, so the chosen section sets
        the gn-coordinate to zero.
        """
        v = [0] * self.n
        for x in self.normal_form(w):
            v[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(v)


def normal_form(w, G: SphereGroup) -> Word:
    return G.normal_form(w)


class ConjClass:
    """A conjugacy class, canonicalized as the least cyclic rotation.

    With ``sign_insensitive`` set, the inverse class is folded in as
    well (classes of unoriented curves, g^{+-G}).
    """

    __slots__ = ("group", "rep", "canonical", "sign_insensitive")

    def __init__(self, group: SphereGroup, rep, sign_insensitive: bool = False):
        self.group = group
        self.rep: Word = group.normal_form(rep)
        self.sign_insensitive = bool(sign_insensitive)
        self.canonical = cyclic_canonical(self.rep, self.sign_insensitive)

    def __eq__(self, other):
        return (
            isinstance(other, ConjClass)
            and self.group.names == other.group.names
            and self.sign_insensitive == other.sign_insensitive
            and self.canonical == other.canonical
        )

    def __hash__(self):
        return hash((self.group.names, self.sign_insensitive, self.canonical))

    def __repr__(self):
        flag = "+-" if self.sign_insensitive else ""
        return f"ConjClass({self.group.word_str(self.canonical) or '1'}{flag})"

    def is_trivial(self) -> bool:
        return not self.canonical

    def same_curve(self, other: "ConjClass") -> bool:
        """Equality as unoriented curves (inversion always allowed)."""
        return cyclic_canonical(self.rep, True) == cyclic_canonical(other.rep, True)

    def peripheral_index(self):
        """1-based index i if this is the class of gi (sign folded in when
        sign_insensitive); None otherwise."""
        for i in range(1, self.group.n + 1):
            if self.canonical == cyclic_canonical(self.group.gen(i), self.sign_insensitive):
                return i
        return None


@dataclass(frozen=True)
class ConjugatorCoset:
    """Solution set {w : u^w = v}, as rep * <root>.

    root None means the singleton {rep}; whole_group means every word
    is a solution (u = v = identity).
    """

    rep: Word
    root: Word | None
    whole_group: bool = False

    def __iter__(self):
        raise TypeError("ConjugatorCoset is not iterable; use .rep/.root")


def centralizer_root(w: Word) -> Word:
    """The primitive r with w = r^k, k >= 1 maximal.  w must be non-trivial."""
    if not w:
        raise ValueError("identity has no primitive root")
    core, c = cyclic_reduce(w)
    m = len(core)
    for p in range(1, m + 1):
        if m % p:
            continue
        if core == core[:p] * (m // p):
            return wmul(c, core[:p], winv(c))
    raise AssertionError("unreachable")


def power_exponent(x: Word, r: Word):
    """k with x = r^k, or None.  r must be non-trivial."""
    if not r:
        raise ValueError("r must be non-trivial")
    if not x:
        return 0
    core, c = cyclic_reduce(r)
    k, rem = divmod(len(x) - 2 * len(c), len(core))
    if rem or k <= 0:
        k = None
    if k is not None and wpow(r, k) == x:
        return k
    if k is not None and wpow(r, -k) == x:
        return -k
    return None


def is_conjugate(u, v, G: SphereGroup | None = None):
    """Conjugator coset {w : u^w = v} in a free group, or None.

    When G is given, u and v are first brought to normal form.
    """
    if G is not None:
        u, v = G.normal_form(u), G.normal_form(v)
    else:
        u, v = tuple(u), tuple(v)
    ucore, c = cyclic_reduce(u)
    vcore, e = cyclic_reduce(v)
    if len(ucore) != len(vcore):
        return None
    if not ucore:
        return ConjugatorCoset(EPSILON, None, whole_group=True)
    for k in range(len(ucore)):
        if ucore[k:] + ucore[:k] == vcore:
            # u^(c * ucore[:k] * e^-1) = v
            w0 = wmul(c, ucore[:k], winv(e))
            return ConjugatorCoset(w0, centralizer_root(v))
    return None


def _coset_intersect(a: Word, r: Word | None, b: Word, s: Word | None):
    """Intersect a<r> with b<s> (None root = singleton).  Returns (rep, root)
    or None."""
    if r is None and s is None:
        return (a, None) if a == b else None
    if r is None:
        a, r, b, s = b, s, a, None
    if s is None:
        # solutions a*r^k == b
        k = power_exponent(wmul(winv(a), b), r)
        return (b, None) if k is not None else None
    rcore, _ = cyclic_reduce(r)
    bound = 4 + (2 * (len(a) + len(b)) + 4 * max(len(r), len(s))) // max(1, len(rcore))
    sols = []
    for k in range(-bound, bound + 1):
        if power_exponent(wmul(winv(b), a, wpow(r, k)), s) is not None:
            sols.append(k)
            if len(sols) == 2:
                break
    if not sols:
        return None
    k0 = sols[0]
    if len(sols) == 1:
        return (wmul(a, wpow(r, k0)), None)
    return (wmul(a, wpow(r, k0)), wpow(r, sols[1] - k0))


def simultaneous_conjugator(us, vs, G: SphereGroup | None = None):
    """A single w with u_i^w = v_i for all i, or None."""
    if len(us) != len(vs):
        raise ValueError("lists must have equal length")
    if G is not None:
        us = [G.normal_form(u) for u in us]
        vs = [G.normal_form(v) for v in vs]
    state = None  # None = unconstrained; else (rep, root-or-None)
    for u, v in zip(us, vs):
        coset = is_conjugate(u, v)
        if coset is None:
            return None
        if coset.whole_group:
            continue
        if state is None:
            state = (coset.rep, coset.root)
        else:
            state = _coset_intersect(state[0], state[1], coset.rep, coset.root)
            if state is None:
                return None
    if state is None:
        return EPSILON
    w = state[0]
    assert all(conjugate(u, w) == v for u, v in zip(us, vs))
    return w


class Automorphism:
    """An automorphism of a sphere group, given by generator images.

    Images are stored in normal form for all n generators; the product
    of the images along the relator must reduce to the identity.
    """

    def __init__(self, group: SphereGroup, images, check: bool = True):
        group.require_infinite_orders()
        self.group = group
        self.images: tuple[Word, ...] = tuple(group.normal_form(w) for w in images)
        if len(self.images) != group.n:
            raise ValueError(f"expected {group.n} images, got {len(self.images)}")
        if check and wmul(*[self.images[r - 1] for r in group.relator]) != EPSILON:
            raise ValueError("generator images do not satisfy the relator")
        self._inverse: Automorphism | None = None
        self._ppres: bool | None = None

    @classmethod
    def identity(cls, group: SphereGroup) -> "Automorphism":
        return cls(group, [group.gen(i) for i in range(1, group.n + 1)], check=False)

    @classmethod
    def inner(cls, group: SphereGroup, g) -> "Automorphism":
        g = group.normal_form(g)
        return cls(group, [conjugate(group.gen(i), g) for i in range(1, group.n + 1)],
                   check=False)

    @classmethod
    def from_images_of_free_gens(cls, group: SphereGroup, images_nf) -> "Automorphism":
        """Build from images of the free generators (declaration order,
        eliminated one skipped); the remaining image is forced by the relator."""
        free = group.free_gen_indices()
        if len(images_nf) != len(free):
            raise ValueError("need one image per free generator")
        by_index = {i: group.normal_form(w) for i, w in zip(free, images_nf)}
        by_index[group.relator[-1]] = winv(
            wmul(*[by_index[r] for r in group.relator[:-1]]))
        return cls(group, [by_index[i] for i in range(1, group.n + 1)], check=False)

    def __call__(self, w) -> Word:
        out: list[int] = []
        for x in self.group.normal_form(w):
            img = self.images[x - 1] if x > 0 else winv(self.images[-x - 1])
            for y in img:
                if out and out[-1] == -y:
                    out.pop()
                else:
                    out.append(y)
        return tuple(out)

    def __eq__(self, other):
        return (isinstance(other, Automorphism)
                and self.group == other.group and self.images == other.images)

    def __hash__(self):
        return hash((self.group.names, self.images))

    def __repr__(self):
        ims = ", ".join(
            f"{nm}->{self.group.word_str(w) or '1'}"
            for nm, w in zip(self.group.names, self.images))
        return f"Automorphism({ims})"

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self after other: (self.compose(other))(w) = self(other(w))."""
        if self.group != other.group:
            raise ValueError("automorphisms over different groups")
        return Automorphism(self.group, [self(w) for w in other.images], check=False)

    def is_identity_map(self) -> bool:
        return all(self.images[i - 1] == self.group.gen(i)
                   for i in range(1, self.group.n + 1))

    def inverse(self) -> "Automorphism":
        if self._inverse is None:
            from .folding import express_in_subgroup

            G = self.group
            free = G.free_gen_indices()
            gens = [self.images[i - 1] for i in free]
            inv_imgs = []
            for i in free:
                expr = express_in_subgroup(gens, G.gen(i))
                if expr is None:
                    raise ValueError("map is not invertible (images do not "
                                     "generate the group)")
                # symbol j of the expression stands for the image of the j-th
                # free generator, so the same letters read back as generators
                # give the preimage
                inv_imgs.append(G.normal_form(
                    free[x - 1] if x > 0 else -free[-x - 1] for x in expr))
            self._inverse = Automorphism.from_images_of_free_gens(G, inv_imgs)
            self._inverse._inverse = self
        return self._inverse


def _signed_prefix_run(D: Word, core: Word) -> int:
    """Maximal signed k with D starting as core^k (k may be negative)."""
    if not core:
        return 0
    k = 0
    if D[:len(core)] == core:
        while D[k * len(core):(k + 1) * len(core)] == core:
            k += 1
        return k
    anti = winv(core)
    if D[:len(anti)] == anti:
        while D[k * len(anti):(k + 1) * len(anti)] == anti:
            k += 1
        return -k
    return 0


def _coset_pair_solve(g1: Word, w1: Word, g2: Word, w2: Word):
    """One element of <g1>w1 intersect <g2>w2, or None.

    Requires g1, g2 cyclically reduced with distinct axes; then
    g2^a * g1^b = w2 * w1^-1 has at most one solution (a, b), found by
    reading the g2-run at the front with a small slack for boundary
    cancellation.  Linear in the word lengths.
    """
    D = wmul(w2, winv(w1))
    run = _signed_prefix_run(D, g2)
    slack = len(g1) // max(1, len(g2)) + 2
    cands = set()
    for t in range(slack + 1):
        # boundary cancellation only eats into the visible run
        cands.add(run + t if run >= 0 else run - t)
    for t in range(-slack - 1, slack + 2):
        cands.add(t)
    for a in sorted(cands, key=abs):
        rest = wmul(wpow(g2, -a), D)
        b = power_exponent(rest, g1) if rest else 0
        if b is not None:
            return wmul(wpow(g1, b), w1)
    return None


def common_generator_conjugator(G: SphereGroup, idxs, targets):
    """A single w with gen_i^w = target_i for every pair, or None.

    Exact and linear-time: each constraint confines w to a coset
    <gen_i> * w0_i, and two such cosets with distinct generators meet in
    at most one element.
    """
    cosets = []
    for i, v in zip(idxs, targets):
        got = is_conjugate(G.gen(i), v)
        if got is None:
            return None
        cosets.append((G.gen(i), got.rep))
    W = None
    pending = None
    for g, w in cosets:
        if W is not None:
            if power_exponent(wmul(W, winv(w)), g) is None:
                return None
        elif pending is None:
            pending = (g, w)
        else:
            W = _coset_pair_solve(pending[0], pending[1], g, w)
            if W is None:
                return None
    if W is None:
        W = pending[1] if pending else EPSILON
    for (g, w), i, v in zip(cosets, idxs, targets):
        if conjugate(G.gen(i), W) != G.normal_form(v):
            return None
    return W


def outer_normalize(phi: Automorphism, return_conjugator: bool = False):
    """Inner-adjust an automorphism to greedily shrink the total image
    length, stripping accumulated conjugation bloat.  Linear-time deque
    walk; conjugating by a letter x turns w into x^-1*w*x, which changes
    each image length by -2, 0 or +2 read off the end letters alone.

    With return_conjugator, also return the word g with
    result(w) = phi(w)^g for every w.
    """
    from collections import deque

    imgs = [deque(w) for w in phi.images]
    g: list[int] = []
    while True:
        deltas: dict[int, int] = {}
        for dq in imgs:
            if dq:
                for x in (dq[0], -dq[-1]):
                    deltas[x] = 0
        if not deltas:
            break
        for x in deltas:
            d = 0
            for dq in imgs:
                if not dq:
                    continue
                d += -1 if dq[0] == x else 1
                d += -1 if dq[-1] == -x else 1
            deltas[x] = d
        x = min(deltas, key=lambda k: (deltas[k], k))
        if deltas[x] >= 0:
            break
        g.append(x)
        for dq in imgs:
            if not dq:
                continue
            if dq[0] == x:
                dq.popleft()
            else:
                dq.appendleft(-x)
            if dq and dq[-1] == -x:
                dq.pop()
            else:
                dq.append(x)
    out = Automorphism(phi.group, [tuple(dq) for dq in imgs], check=False)
    if return_conjugator:
        return out, reduce_word(g)
    return out


def outer_equal(phi: Automorphism, psi: Automorphism, G: SphereGroup | None = None) -> bool:
    """Do phi and psi agree as outer automorphisms?"""
    G = G or phi.group
    if phi.group != psi.group:
        raise ValueError("automorphisms over different groups")
    free = G.free_gen_indices()
    us = [phi.images[i - 1] for i in free]
    vs = [psi.images[i - 1] for i in free]
    return simultaneous_conjugator(us, vs) is not None


def dehn_twist(i: int, j: int, G: SphereGroup) -> Automorphism:
    """The twist g_k -> g_k^(g_i...g_j) for k in i..j, fixing the rest.

    Positions i..j refer to the relator order (which is the declaration
    order unless a relator override reordered it).
    """
    G.require_infinite_orders()
    if not 1 <= i <= j <= G.n:
        raise IndexError(f"bad twist indices ({i},{j}) for n={G.n}")
    segment = [G.relator[k - 1] for k in range(i, j + 1)]
    w = wmul(*[G.gen(k) for k in segment])
    images = [conjugate(G.gen(k), w) if k in segment else G.gen(k)
              for k in range(1, G.n + 1)]
    return Automorphism(G, images, check=False)


def twist_about(G: SphereGroup, curve) -> Automorphism:
    """Twist about an explicit curve word w: conjugates by w every generator
    whose abelianized coefficient in w is +1, fixing the rest.

    Only meaningful for standard-position curves (products of distinct
    conjugated generators); the peripheral-preservation of the result
    is the caller's check.
    """
    w = G.normal_form(curve)
    ab = G.abelianized(w)
    images = []
    for k in range(1, G.n + 1):
        if ab[k - 1] == 1:
            images.append(conjugate(G.gen(k), w))
        else:
            images.append(G.gen(k))
    return Automorphism(G, images, check=False)


def is_peripheral_preserving(phi: Automorphism, G: SphereGroup | None = None) -> bool:
    G = G or phi.group
    cached = getattr(phi, "_ppres", None)
    if cached is None:
        cached = all(
            is_conjugate(G.gen(i), phi.images[i - 1]) is not None
            for i in range(1, G.n + 1)
        )
        phi._ppres = cached
    return cached
