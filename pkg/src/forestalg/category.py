"""Finite forest categories, diagrams, and division by flat algebras.

A forest category has a commutative monoid of objects, a commutative monoid
of half-arrows with an end map onto the objects, and arrows between objects
with composition, a faithful action on half-arrows, and an insertion
operation pairing an arrow with a half-arrow.  A category with one object is
exactly a forest algebra.

Diagrams are forests whose leaves are half-arrows and whose internal nodes
are arrows, the start of each node matching the sum of its children's ends;
they evaluate to half-arrows.  Removing one leaf exposes an object and gives
a context diagram, which evaluates to an arrow.

Everything is table-driven and immutable after validation; checks are
exhaustive and report the first witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import BudgetError, FlatMaskAlgebra, ForestAlgebra

__all__ = [
    "CategoryLawError",
    "DiagramError",
    "ForestCategory",
    "validate_category",
    "one_object_category",
    "category_to_json",
    "category_from_json",
    "hleaf",
    "dnode",
    "oleaf",
    "eval_forest_diagram",
    "eval_forest_diagram_alt",
    "eval_context_diagram",
    "diagram_support",
    "diagram_rootsum",
    "render_diagram",
    "IdentityReport",
    "check_identities",
    "DerivedIdentityReport",
    "check_derived_identities",
    "brute_force_global_ic",
    "Covering",
    "canonical_flat_cover",
    "verify_covering",
    "CoverReport",
]


class CategoryLawError(ValueError):
    def __init__(self, law, where, message):
        super().__init__("%s: %s (witness %r)" % (law, message, where))
        self.law = law
        self.where = where


class DiagramError(ValueError):
    pass


@dataclass(frozen=True)
class ForestCategory:
    obj_size: int
    obj_add: tuple
    obj_zero: int
    harr_size: int
    harr_add: tuple
    harr_one: int
    harr_end: tuple
    arr_size: int
    arr_start: tuple
    arr_end: tuple
    identity: tuple  # per object: its identity arrow
    comp: dict  # (u, v) -> w, defined iff arr_end[u] == arr_start[v]
    act: dict  # (c, u) -> d, defined iff harr_end[c] == arr_start[u]
    ins: dict  # (u, c) -> w, total

    def obj_sum(self, x, y):
        return self.obj_add[x][y]

    def hsum(self, c, d):
        return self.harr_add[c][d]

    def compose(self, u, v):
        try:
            return self.comp[(u, v)]
        except KeyError:
            raise DiagramError("arrows %d and %d do not compose" % (u, v)) from None

    def act_on(self, c, u):
        try:
            return self.act[(c, u)]
        except KeyError:
            raise DiagramError("half-arrow %d does not meet arrow %d" % (c, u)) from None

    def insert(self, u, c):
        return self.ins[(u, c)]

    def arrows_from(self, x):
        return [u for u in range(self.arr_size) if self.arr_start[u] == x]

    def harrs_to(self, x):
        return [c for c in range(self.harr_size) if self.harr_end[c] == x]

    def objects_idempotent(self):
        return all(self.obj_add[x][x] == x for x in range(self.obj_size))


def _check_comm_monoid(size, table, unit, name):
    if len(table) != size or any(len(r) != size for r in table):
        raise CategoryLawError(name + "-shape", (), "not %d x %d" % (size, size))
    for x in range(size):
        if table[unit][x] != x or table[x][unit] != x:
            raise CategoryLawError(name + "-identity", (x,), "unit law fails")
        for y in range(size):
            if table[x][y] != table[y][x]:
                raise CategoryLawError(name + "-commutativity", (x, y), "xy != yx")
            for z in range(size):
                if table[table[x][y]][z] != table[x][table[y][z]]:
                    raise CategoryLawError(name + "-associativity", (x, y, z), "not associative")


def validate_category(cat: ForestCategory) -> ForestCategory:
    """Exhaustively check the forest category axioms, reporting the first
    violation with the element ids that instantiate it."""
    _check_comm_monoid(cat.obj_size, cat.obj_add, cat.obj_zero, "objects")
    _check_comm_monoid(cat.harr_size, cat.harr_add, cat.harr_one, "halfarrows")
    # end is a monoid homomorphism onto the objects
    if len(cat.harr_end) != cat.harr_size:
        raise CategoryLawError("end-shape", (), "end array has wrong length")
    if cat.harr_end[cat.harr_one] != cat.obj_zero:
        raise CategoryLawError("end-homomorphism", (cat.harr_one,), "end(identity) != 0")
    for c in range(cat.harr_size):
        for d in range(cat.harr_size):
            if cat.harr_end[cat.harr_add[c][d]] != cat.obj_add[cat.harr_end[c]][cat.harr_end[d]]:
                raise CategoryLawError("end-homomorphism", (c, d), "end(c+d) != end(c)+end(d)")
    covered = set(cat.harr_end)
    for x in range(cat.obj_size):
        if x not in covered:
            raise CategoryLawError("end-onto", (x,), "object has no half-arrow")
    # arrows: endpoints, composition domain, associativity, identities
    for u in range(cat.arr_size):
        if not (0 <= cat.arr_start[u] < cat.obj_size and 0 <= cat.arr_end[u] < cat.obj_size):
            raise CategoryLawError("arrow-endpoints", (u,), "endpoint out of range")
    for u in range(cat.arr_size):
        for v in range(cat.arr_size):
            defined = (u, v) in cat.comp
            matches = cat.arr_end[u] == cat.arr_start[v]
            if defined != matches:
                raise CategoryLawError("composition-domain", (u, v), "domain mismatch")
            if defined:
                w = cat.comp[(u, v)]
                if cat.arr_start[w] != cat.arr_start[u] or cat.arr_end[w] != cat.arr_end[v]:
                    raise CategoryLawError("composition-endpoints", (u, v), "bad endpoints")
    for u in range(cat.arr_size):
        for v in cat.arrows_from(cat.arr_end[u]):
            for w in cat.arrows_from(cat.arr_end[v]):
                if cat.comp[(cat.comp[(u, v)], w)] != cat.comp[(u, cat.comp[(v, w)])]:
                    raise CategoryLawError("composition-associativity", (u, v, w), "not associative")
    if len(cat.identity) != cat.obj_size:
        raise CategoryLawError("identity-shape", (), "one identity arrow per object")
    for x in range(cat.obj_size):
        e = cat.identity[x]
        if cat.arr_start[e] != x or cat.arr_end[e] != x:
            raise CategoryLawError("identity-endpoints", (x,), "identity not an endo-arrow")
        for u in range(cat.arr_size):
            if cat.arr_end[u] == x and cat.comp[(u, e)] != u:
                raise CategoryLawError("identity-right", (u, x), "u . id != u")
            if cat.arr_start[u] == x and cat.comp[(e, u)] != u:
                raise CategoryLawError("identity-left", (u, x), "id . u != u")
    # action on half-arrows
    for c in range(cat.harr_size):
        for u in range(cat.arr_size):
            defined = (c, u) in cat.act
            matches = cat.harr_end[c] == cat.arr_start[u]
            if defined != matches:
                raise CategoryLawError("action-domain", (c, u), "domain mismatch")
            if defined and cat.harr_end[cat.act[(c, u)]] != cat.arr_end[u]:
                raise CategoryLawError("action-endpoints", (c, u), "bad end")
    for c in range(cat.harr_size):
        x = cat.harr_end[c]
        if cat.act[(c, cat.identity[x])] != c:
            raise CategoryLawError("action-identity", (c,), "c . id != c")
        for u in cat.arrows_from(x):
            for w in cat.arrows_from(cat.arr_end[u]):
                if cat.act[(cat.act[(c, u)], w)] != cat.act[(c, cat.comp[(u, w)])]:
                    raise CategoryLawError("action-associativity", (c, u, w), "not associative")
    # faithfulness: coterminal arrows acting identically must be equal
    for u in range(cat.arr_size):
        for v in range(u + 1, cat.arr_size):
            if cat.arr_start[u] == cat.arr_start[v] and cat.arr_end[u] == cat.arr_end[v]:
                incoming = cat.harrs_to(cat.arr_start[u])
                if all(cat.act[(c, u)] == cat.act[(c, v)] for c in incoming):
                    raise CategoryLawError("action-faithfulness", (u, v), "arrows indistinguishable")
    # insertion: totality, endpoints, pre-composition and nesting laws
    for u in range(cat.arr_size):
        for c in range(cat.harr_size):
            if (u, c) not in cat.ins:
                raise CategoryLawError("insertion-total", (u, c), "missing insertion")
            w = cat.ins[(u, c)]
            if cat.arr_start[w] != cat.arr_start[u] or cat.arr_end[w] != cat.obj_add[
                cat.arr_end[u]
            ][cat.harr_end[c]]:
                raise CategoryLawError("insertion-endpoints", (u, c), "bad endpoints")
    for u in range(cat.arr_size):
        for c in range(cat.harr_size):
            w = cat.ins[(u, c)]
            for f in range(cat.arr_size):
                if cat.arr_end[f] == cat.arr_start[u]:
                    if cat.comp[(f, w)] != cat.ins[(cat.comp[(f, u)], c)]:
                        raise CategoryLawError(
                            "insertion-precomposition", (f, u, c), "f.ins(u,c) != ins(f.u,c)"
                        )
            for d in range(cat.harr_size):
                if cat.ins[(w, d)] != cat.ins[(u, cat.harr_add[c][d])]:
                    raise CategoryLawError(
                        "insertion-nesting", (u, c, d), "ins(ins(u,c),d) != ins(u,c+d)"
                    )
    return cat


def one_object_category(alg: ForestAlgebra) -> ForestCategory:
    """A forest category with one object is a forest algebra; this is that
    correspondence, pointed the other way."""
    comp = {(u, v): alg.mul[u][v] for u in range(alg.v_size) for v in range(alg.v_size)}
    act = {(c, u): alg.act[c][u] for c in range(alg.h_size) for u in range(alg.v_size)}
    ins = {(u, c): alg.ins[u][c] for u in range(alg.v_size) for c in range(alg.h_size)}
    return validate_category(
        ForestCategory(
            obj_size=1,
            obj_add=((0,),),
            obj_zero=0,
            harr_size=alg.h_size,
            harr_add=alg.add,
            harr_one=alg.zero,
            harr_end=tuple(0 for _ in range(alg.h_size)),
            arr_size=alg.v_size,
            arr_start=tuple(0 for _ in range(alg.v_size)),
            arr_end=tuple(0 for _ in range(alg.v_size)),
            identity=(alg.one,),
            comp=comp,
            act=act,
            ins=ins,
        )
    )


def category_to_json(cat):
    return {
        "objects": {"size": cat.obj_size, "add": [list(r) for r in cat.obj_add], "zero": cat.obj_zero},
        "halfarrows": {
            "size": cat.harr_size,
            "add": [list(r) for r in cat.harr_add],
            "one": cat.harr_one,
            "end": list(cat.harr_end),
        },
        "arrows": [
            {"start": cat.arr_start[u], "end": cat.arr_end[u]} for u in range(cat.arr_size)
        ],
        "identity": list(cat.identity),
        "comp": {"%d,%d" % k: v for k, v in sorted(cat.comp.items())},
        "act": {"%d,%d" % k: v for k, v in sorted(cat.act.items())},
        "ins": {"%d,%d" % k: v for k, v in sorted(cat.ins.items())},
    }


def category_from_json(data):
    def unkey(d):
        out = {}
        for k, v in d.items():
            i, j = k.split(",")
            out[(int(i), int(j))] = v
        return out

    o, h = data["objects"], data["halfarrows"]
    arrows = data["arrows"]
    cat = ForestCategory(
        obj_size=o["size"],
        obj_add=tuple(tuple(r) for r in o["add"]),
        obj_zero=o["zero"],
        harr_size=h["size"],
        harr_add=tuple(tuple(r) for r in h["add"]),
        harr_one=h["one"],
        harr_end=tuple(h["end"]),
        arr_size=len(arrows),
        arr_start=tuple(a["start"] for a in arrows),
        arr_end=tuple(a["end"] for a in arrows),
        identity=tuple(data["identity"]),
        comp=unkey(data["comp"]),
        act=unkey(data["act"]),
        ins=unkey(data["ins"]),
    )
    return validate_category(cat)


# ---------------------------------------------------------------------------
# Diagrams.  A forest diagram is a tuple of trees; a tree is ("h", c) for a
# half-arrow leaf, ("o", x) for an exposed object (context diagrams only),
# or ("n", u, children) with children a forest diagram.


def hleaf(c):
    return ("h", c)


def oleaf(x):
    return ("o", x)


def dnode(u, children):
    return ("n", u, tuple(children))


def _tree_end(cat, tree):
    kind = tree[0]
    if kind == "h":
        return cat.harr_end[tree[1]]
    if kind == "o":
        return tree[1]
    if kind == "s":  # indexed slot of a multicontext: ("s", slot, end)
        return tree[2]
    return cat.arr_end[tree[1]]


def diagram_rootsum(cat, diagram):
    x = cat.obj_zero
    for t in diagram:
        x = cat.obj_sum(x, _tree_end(cat, t))
    return x


def diagram_support(cat, diagram):
    """The set of half-arrows and arrows occurring, as ('h', id) / ('a', id)."""
    out = set()

    def walk(tree):
        if tree[0] == "h":
            out.add(("h", tree[1]))
        elif tree[0] == "n":
            out.add(("a", tree[1]))
            for t in tree[2]:
                walk(t)

    for t in diagram:
        walk(t)
    return frozenset(out)


def _eval_tree(cat, tree):
    if tree[0] == "h":
        return tree[1]
    if tree[0] == "o":
        raise DiagramError("exposed object in a forest diagram")
    _, u, children = tree
    c = eval_forest_diagram(cat, children)
    if cat.harr_end[c] != cat.arr_start[u]:
        raise DiagramError("children of arrow %d end at the wrong object" % u)
    return cat.act[(c, u)]


def eval_forest_diagram(cat, diagram):
    """Canonical evaluation: children are summed in the half-arrow monoid,
    then acted on by the node's arrow."""
    c = cat.harr_one
    for t in diagram:
        c = cat.hsum(c, _eval_tree(cat, t))
    return c


def eval_forest_diagram_alt(cat, diagram):
    """Alternative parse: when the first tree is an arrow over children, its
    siblings are absorbed into that arrow by insertion instead of being summed
    afterwards, and sums fold to the right.  Agreement with the canonical
    evaluation is a tested property of a category, not an assumption."""
    if not diagram:
        return cat.harr_one
    first, rest = diagram[0], diagram[1:]
    if rest:
        rest_vals = [eval_forest_diagram_alt(cat, (t,)) for t in rest]
        rest_val = rest_vals[-1]
        for v in reversed(rest_vals[:-1]):
            rest_val = cat.hsum(v, rest_val)
    else:
        rest_val = None
    if first[0] == "n":
        _, u, kids = first
        inner = eval_forest_diagram_alt(cat, kids)
        w = u if rest_val is None else cat.ins[(u, rest_val)]
        return cat.act_on(inner, w)
    v = first[1] if first[0] == "h" else None
    if v is None:
        raise DiagramError("exposed object in a forest diagram")
    return v if rest_val is None else cat.hsum(v, rest_val)


def eval_context_diagram(cat, diagram):
    """Evaluate a diagram with exactly one exposed object to an arrow; returns
    (arrow id, exposed object)."""
    holes = [i for i, t in enumerate(diagram) if _contains_hole(t)]
    if len(holes) != 1:
        raise DiagramError("context diagram needs exactly one exposed object")
    i = holes[0]
    rest = diagram[:i] + diagram[i + 1 :]
    arrow, start = _eval_ctx_tree(cat, diagram[i])
    if rest:
        c = eval_forest_diagram(cat, rest)
        arrow = cat.ins[(arrow, c)]
    return arrow, start


def _contains_hole(tree):
    if tree[0] == "o":
        return True
    if tree[0] == "n":
        return any(_contains_hole(t) for t in tree[2])
    return False


def _eval_ctx_tree(cat, tree):
    if tree[0] == "o":
        x = tree[1]
        return cat.identity[x], x
    if tree[0] != "n":
        raise DiagramError("hole path runs through a leaf")
    _, u, children = tree
    arrow, start = eval_context_diagram(cat, children)
    if cat.arr_end[arrow] != cat.arr_start[u]:
        raise DiagramError("context children end at the wrong object")
    return cat.comp[(arrow, u)], start


def render_diagram(diagram):
    def tree(t):
        if t[0] == "h":
            return "h%d" % t[1]
        if t[0] == "o":
            return "<%d>" % t[1]
        if t[0] == "s":
            return "<slot%d:%d>" % (t[1], t[2])
        _, u, kids = t
        if not kids:
            return "a%d()" % u
        return "a%d(%s)" % (u, render_diagram(kids))

    return "+".join(tree(t) for t in diagram) if diagram else "()"


# ---------------------------------------------------------------------------
# Bounded diagram enumeration (sibling order canonicalized by construction:
# forests pick trees with nondecreasing generation index)


class _Enumerator:
    def __init__(self, cat, extra_leaves=()):
        self.cat = cat
        # a leaf is ("h", c) or an extra like ("o", x); each gets an index bit
        self.extra = tuple(extra_leaves)
        self._trees = {}  # size -> list of (tree, end, slots_mask)
        self._tree_list = []  # size-major global list
        self._tree_offsets = {0: 0}
        self._forests = {}

    def trees_upto(self, n):
        top = max(self._tree_offsets)
        for size in range(top + 1, n + 1):
            level = []
            if size == 1:
                for c in range(self.cat.harr_size):
                    level.append((("h", c), self.cat.harr_end[c], 0))
                for i, end in enumerate(self.extra):
                    level.append((("s", i, end), end, 1 << i))
            else:
                for u in range(self.cat.arr_size):
                    for forest, rootsum, slots in self.forests_exact(size - 1):
                        if rootsum == self.cat.arr_start[u]:
                            level.append((("n", u, forest), self.cat.arr_end[u], slots))
            self._tree_list.extend(level)
            self._tree_offsets[size] = len(self._tree_list)
        return self._tree_list[: self._tree_offsets[n]]

    def forests_exact(self, n):
        key = n
        if key in self._forests:
            return self._forests[key]
        if n == 0:
            out = [((), self.cat.obj_zero, 0)]
        else:
            trees = self.trees_upto(n)
            out = []

            def build(remaining, min_idx, acc, rootsum, slots):
                if remaining == 0:
                    out.append((tuple(acc), rootsum, slots))
                    return
                for idx in range(min_idx, len(trees)):
                    tree, end, tslots = trees[idx]
                    size = _tree_size(tree)
                    if size > remaining:
                        continue
                    if tslots & slots:
                        continue  # each exposed slot used at most once
                    acc.append(tree)
                    build(
                        remaining - size,
                        idx,
                        acc,
                        self.cat.obj_sum(rootsum, end),
                        slots | tslots,
                    )
                    acc.pop()

            build(n, 0, [], self.cat.obj_zero, 0)
        self._forests[key] = out
        return out


def _tree_size(tree):
    if tree[0] != "n":
        return 1
    return 1 + sum(_tree_size(t) for t in tree[2])


def brute_force_global_ic(cat, max_nodes):
    """Enumerate all forest diagrams with at most max_nodes nodes, bucket by
    (support, rootsum), and report the first bucket holding two different
    values.  A witness conclusively refutes the support condition; absence up
    to the bound is evidence only.

    Returns None or (diagram1, diagram2, support, rootsum, value1, value2).
    """
    enum = _Enumerator(cat)
    buckets = {}
    for n in range(0, max_nodes + 1):
        for forest, rootsum, _ in enum.forests_exact(n):
            value = eval_forest_diagram(cat, forest)
            key = (diagram_support(cat, forest), rootsum)
            prev = buckets.get(key)
            if prev is None:
                buckets[key] = (value, forest)
            elif prev[0] != value:
                return (prev[1], forest, key[0], key[1], prev[0], value)
    return None


# ---------------------------------------------------------------------------
# The three identities equivalent to global idempotent-commutativity (for
# idempotent commutative objects), and their derived consequences


@dataclass
class IdentityReport:
    objects_ic: bool
    loop_removal: tuple | None = None
    horizontal_absorption: tuple | None = None
    horizontal_idempotence: tuple | None = None

    def all_hold(self):
        return (
            self.objects_ic
            and self.loop_removal is None
            and self.horizontal_absorption is None
            and self.horizontal_idempotence is None
        )


def check_identities(cat) -> IdentityReport:
    """Exhaustively check loop removal, horizontal absorption and horizontal
    idempotence; each failure carries the instantiating ids.  The identities
    characterize global idempotent-commutativity only when the object monoid
    is idempotent and commutative, which is reported as a precondition."""
    rep = IdentityReport(objects_ic=cat.objects_idempotent())
    # horizontal idempotence
    for r in range(cat.harr_size):
        if cat.hsum(r, r) != r:
            rep.horizontal_idempotence = (r,)
            break
    # loop removal
    done = False
    for r in range(cat.harr_size):
        if done:
            break
        y = cat.harr_end[r]
        loops = [s for s in cat.arrows_from(y) if cat.arr_end[s] == y]
        outs = cat.arrows_from(y)
        for s in loops:
            rs = cat.act[(r, s)]
            for t1 in outs:
                left1 = cat.act[(rs, t1)]
                right1 = cat.act[(r, t1)]
                for t2 in outs:
                    tail = cat.act[(rs, t2)]
                    if cat.hsum(left1, tail) != cat.hsum(right1, tail):
                        rep.loop_removal = (r, s, t1, t2)
                        done = True
                        break
                if done:
                    break
            if done:
                break
    # horizontal absorption
    done = False
    for r in range(cat.harr_size):
        if done:
            break
        x = cat.harr_end[r]
        for s in range(cat.harr_size):
            xs = cat.harr_end[s]
            if cat.obj_sum(x, xs) != xs:
                continue  # end(s) must absorb end(r)
            rs = cat.hsum(r, s)
            for t in cat.arrows_from(xs):
                left_t = cat.act[(rs, t)]
                right_t = cat.act[(s, t)]
                if left_t == right_t:
                    continue
                for u in cat.arrows_from(x):
                    ru = cat.act[(r, u)]
                    if cat.hsum(left_t, ru) != cat.hsum(right_t, ru):
                        rep.horizontal_absorption = (r, s, t, u)
                        done = True
                        break
                if done:
                    break
            if done:
                break
    return rep


@dataclass
class DerivedIdentityReport:
    vertical_idempotence: tuple | None = None
    horizontal_swap: tuple | None = None
    nested_insertion_variant: tuple | None = None
    horizontal_transfer: tuple | None = None

    def all_hold(self):
        return all(
            v is None
            for v in (
                self.vertical_idempotence,
                self.horizontal_swap,
                self.nested_insertion_variant,
                self.horizontal_transfer,
            )
        )


def check_derived_identities(cat, transfer_bound=4) -> DerivedIdentityReport:
    """Check the four consequences of the three identities: whenever
    check_identities passes on idempotent-commutative objects these must also
    pass.  There is no precondition; the report is informational."""
    rep = DerivedIdentityReport()
    # vertical idempotence: endo-arrows are idempotent
    for u in range(cat.arr_size):
        if cat.arr_start[u] == cat.arr_end[u] and cat.comp[(u, u)] != u:
            rep.vertical_idempotence = (u,)
            break
    # horizontal swap: rt + su = st + ru for r,s ending at the same object
    done = False
    for r in range(cat.harr_size):
        if done:
            break
        x = cat.harr_end[r]
        for s in cat.harrs_to(x):
            for t in cat.arrows_from(x):
                rt, st = cat.act[(r, t)], cat.act[(s, t)]
                for u in cat.arrows_from(x):
                    ru, su = cat.act[(r, u)], cat.act[(s, u)]
                    if cat.hsum(rt, su) != cat.hsum(st, ru):
                        rep.horizontal_swap = (r, s, t, u)
                        done = True
                        break
                if done:
                    break
            if done:
                break
    # (r+t)s + ru = (ru+t)s + ru, for u: x -> x+y with y = end(t)
    done = False
    for r in range(cat.harr_size):
        if done:
            break
        x = cat.harr_end[r]
        for t in range(cat.harr_size):
            y = cat.harr_end[t]
            xy = cat.obj_sum(x, y)
            for u in cat.arrows_from(x):
                if cat.arr_end[u] != xy:
                    continue
                ru = cat.act[(r, u)]
                lhs_head = cat.hsum(r, t)
                rhs_head = cat.hsum(ru, t)
                if cat.harr_end[rhs_head] != xy:
                    continue  # without idempotent objects this may not typecheck
                for sarr in cat.arrows_from(xy):
                    lhs = cat.hsum(cat.act[(lhs_head, sarr)], ru)
                    rhs = cat.hsum(cat.act[(rhs_head, sarr)], ru)
                    if lhs != rhs:
                        rep.nested_insertion_variant = (r, t, u, sarr)
                        done = True
                        break
                if done:
                    break
            if done:
                break
    rep.horizontal_transfer = _check_horizontal_transfer(cat, transfer_bound)
    return rep


def _check_horizontal_transfer(cat, bound):
    """Multicontext identity D(v+w, v, u) = D(u+w, v, u) where end(v)=x,
    end(w)=y, end(u)=x+y and the three slots expose x+y, x, x+y; checked over
    all multicontext diagrams with at most `bound` nodes."""
    combos = {}
    for v in range(cat.harr_size):
        x = cat.harr_end[v]
        for w in range(cat.harr_size):
            y = cat.harr_end[w]
            xy = cat.obj_sum(x, y)
            for u in cat.harrs_to(xy):
                vw = cat.hsum(v, w)
                uw = cat.hsum(u, w)
                if cat.harr_end[vw] != xy or cat.harr_end[uw] != xy:
                    continue
                combos.setdefault((x, xy), []).append((v, w, u, vw, uw))
    full = (1 << 3) - 1
    for (x, xy), triples in sorted(combos.items()):
        enum = _Enumerator(cat, extra_leaves=(xy, x, xy))
        for n in range(3, bound + 1):
            for forest, _, slots in enum.forests_exact(n):
                if slots != full:
                    continue
                for (v, w, u, vw, uw) in triples:
                    lhs = eval_forest_diagram(cat, _fill(forest, (vw, v, u)))
                    rhs = eval_forest_diagram(cat, _fill(forest, (uw, v, u)))
                    if lhs != rhs:
                        return (v, w, u, render_diagram(forest))
    return None


def _fill(diagram, values):
    """Substitute half-arrows for the indexed slots of a multicontext."""

    def tree(t):
        if t[0] == "s":
            return ("h", values[t[1]])
        if t[0] == "n":
            return ("n", t[1], tuple(tree(k) for k in t[2]))
        return t

    return tuple(tree(t) for t in diagram)


# ---------------------------------------------------------------------------
# The canonical flat cover and covering verification


@dataclass
class Covering:
    """A candidate division of a category by a forest algebra: a nonempty set
    of H elements per half-arrow and of V elements per arrow."""

    algebra: ForestAlgebra
    half_cover: tuple  # per half-arrow: frozenset of H indices
    arrow_cover: tuple  # per arrow: frozenset of V indices


@dataclass
class CoverReport:
    ok: bool
    violations: list = field(default_factory=list)

    def fail(self, clause, where):
        self.ok = False
        if len(self.violations) < 50:
            self.violations.append((clause, where))


def verify_covering(cat, alg, cov: Covering) -> CoverReport:
    """Exhaustive check of the division clauses: closure of the covers under
    the four operations, and disjointness on coterminal elements.

    The algebra only needs the elementwise protocol; cover members are its
    elements (indices for table algebras, masks for FlatMaskAlgebra).  When
    the algebra is a FlatMaskAlgebra the closure clauses are checked by the
    equivalent vectorized union-convolution; the element-by-element path is
    the same quantifier spelled out.
    """
    rep = CoverReport(True)
    for c in range(cat.harr_size):
        if not cov.half_cover[c]:
            rep.fail("half-cover-nonempty", (c,))
    for u in range(cat.arr_size):
        if not cov.arrow_cover[u]:
            rep.fail("arrow-cover-nonempty", (u,))
    if not rep.ok:
        return rep
    if isinstance(alg, FlatMaskAlgebra):
        _verify_cover_closure_masks(cat, alg, cov, rep)
    else:
        _verify_cover_closure_generic(cat, alg, cov, rep)
    # (b) injectivity on coterminal elements
    for u in range(cat.arr_size):
        for v in range(u + 1, cat.arr_size):
            if (
                cat.arr_start[u] == cat.arr_start[v]
                and cat.arr_end[u] == cat.arr_end[v]
                and cov.arrow_cover[u] & cov.arrow_cover[v]
            ):
                rep.fail("injectivity-arrows", (u, v))
    for c in range(cat.harr_size):
        for d in range(c + 1, cat.harr_size):
            if cat.harr_end[c] == cat.harr_end[d] and cov.half_cover[c] & cov.half_cover[d]:
                rep.fail("injectivity-halfarrows", (c, d))
    return rep


def _verify_cover_closure_generic(cat, alg, cov, rep):
    # (i) composition
    for u in range(cat.arr_size):
        for v in cat.arrows_from(cat.arr_end[u]):
            target = cov.arrow_cover[cat.comp[(u, v)]]
            for p in cov.arrow_cover[u]:
                for q in cov.arrow_cover[v]:
                    if alg.v_mul(p, q) not in target:
                        rep.fail("preserve-composition", (u, v, p, q))
    # (ii) action
    for c in range(cat.harr_size):
        for u in cat.arrows_from(cat.harr_end[c]):
            target = cov.half_cover[cat.act[(c, u)]]
            for h in cov.half_cover[c]:
                for q in cov.arrow_cover[u]:
                    if alg.act_(h, q) not in target:
                        rep.fail("preserve-action", (c, u, h, q))
    # (iii) half-arrow addition
    for c in range(cat.harr_size):
        for d in range(cat.harr_size):
            target = cov.half_cover[cat.harr_add[c][d]]
            for h in cov.half_cover[c]:
                for g in cov.half_cover[d]:
                    if alg.h_add(h, g) not in target:
                        rep.fail("preserve-addition", (c, d, h, g))
    # (iv) insertion
    for u in range(cat.arr_size):
        for c in range(cat.harr_size):
            target = cov.arrow_cover[cat.ins[(u, c)]]
            for q in cov.arrow_cover[u]:
                for h in cov.half_cover[c]:
                    if alg.ins_(q, h) not in target:
                        rep.fail("preserve-insertion", (u, c, q, h))


def _verify_cover_closure_masks(cat, alg, cov, rep):
    import numpy as np

    n = alg.n_symbols
    size = 1 << n

    def arr(masks):
        a = np.zeros(size, dtype=bool)
        a[list(masks)] = True
        return a

    half = [arr(s) for s in cov.half_cover]
    arrow = [arr(s) for s in cov.arrow_cover]

    def check(clause, where, left, right, target):
        got = _or_convolve(left, right, n)
        if (got & ~target).any():
            rep.fail(clause, where)

    for u in range(cat.arr_size):
        for v in cat.arrows_from(cat.arr_end[u]):
            check("preserve-composition", (u, v), arrow[u], arrow[v], arrow[cat.comp[(u, v)]])
    for c in range(cat.harr_size):
        for u in cat.arrows_from(cat.harr_end[c]):
            check("preserve-action", (c, u), half[c], arrow[u], half[cat.act[(c, u)]])
    for c in range(cat.harr_size):
        for d in range(cat.harr_size):
            check("preserve-addition", (c, d), half[c], half[d], half[cat.harr_add[c][d]])
    for u in range(cat.arr_size):
        for c in range(cat.harr_size):
            check("preserve-insertion", (u, c), arrow[u], half[c], arrow[cat.ins[(u, c)]])


def _zeta_int(a, n):
    v = a.copy()
    for b in range(n):
        v = v.reshape(-1, 2, 1 << b)
        v[:, 1, :] += v[:, 0, :]
        v = v.reshape(-1)
    return v


def _mobius_int(a, n):
    v = a.copy()
    for b in range(n):
        v = v.reshape(-1, 2, 1 << b)
        v[:, 1, :] -= v[:, 0, :]
        v = v.reshape(-1)
    return v


def _or_convolve(f, g, n):
    """Indicator of {X | Y : f[X], g[Y]} via subset-sum transforms."""
    import numpy as np

    zf = _zeta_int(f.astype(np.int64), n)
    zg = _zeta_int(g.astype(np.int64), n)
    return _mobius_int(zf * zg, n) > 0


def _or_with_bit(f, bit_index, n):
    """Indicator of {X | bit : f[X]}."""
    import numpy as np

    out = np.zeros_like(f)
    lo = 1 << bit_index
    v = f.reshape(-1, 2, lo)
    o = out.reshape(-1, 2, lo)
    o[:, 1, :] = v[:, 1, :] | v[:, 0, :]
    return out


def canonical_flat_cover(cat, max_symbols=18):
    """The canonical candidate division by a flat idempotent-commutative
    algebra: the supports of diagrams cover their values, inside the full
    subset monoid of the half-arrows and arrows.

    Computed as the complete fixpoint of the reachable (value, support) pairs
    of forest and context diagrams over value-indexed support indicators, so
    the covers are the stabilized ones; a size-bounded diagram enumeration
    would spuriously break the closure clauses whenever supports keep growing
    past the bound.  The subset monoid has 2^(half-arrows + arrows) elements,
    so the symbol count is capped.

    Returns (Covering over a FlatMaskAlgebra, stats).
    """
    import numpy as np

    nh = cat.harr_size
    nsym = nh + cat.arr_size
    if nsym > max_symbols:
        raise BudgetError(
            "canonical cover needs 2^%d supports (cap 2^%d)" % (nsym, max_symbols),
            {"symbols": nsym, "cap": max_symbols},
        )
    size = 1 << nsym
    fp = [np.zeros(size, dtype=bool) for _ in range(nh)]
    cp = [np.zeros(size, dtype=bool) for _ in range(cat.arr_size)]
    fp[cat.harr_one][0] = True
    for c in range(nh):
        fp[c][1 << c] = True
    for x in range(cat.obj_size):
        cp[cat.identity[x]][0] = True

    arrows_from = [cat.arrows_from(x) for x in range(cat.obj_size)]

    changed = True
    while changed:
        changed = False
        # sums of two forest diagrams
        for c1 in range(nh):
            if not fp[c1].any():
                continue
            for c2 in range(c1, nh):
                if not fp[c2].any():
                    continue
                tgt = cat.harr_add[c1][c2]
                got = _or_convolve(fp[c1], fp[c2], nsym)
                new = got & ~fp[tgt]
                if new.any():
                    fp[tgt] |= new
                    changed = True
        # capping a forest diagram with an arrow
        for c in range(nh):
            if not fp[c].any():
                continue
            for u in arrows_from[cat.harr_end[c]]:
                got = _or_with_bit(fp[c], nh + u, nsym)
                tgt = cat.act[(c, u)]
                new = got & ~fp[tgt]
                if new.any():
                    fp[tgt] |= new
                    changed = True
        # extending a context diagram by an arrow or by sibling forests
        for v in range(cat.arr_size):
            if not cp[v].any():
                continue
            for u in arrows_from[cat.arr_end[v]]:
                got = _or_with_bit(cp[v], nh + u, nsym)
                tgt = cat.comp[(v, u)]
                new = got & ~cp[tgt]
                if new.any():
                    cp[tgt] |= new
                    changed = True
            for c in range(nh):
                if not fp[c].any():
                    continue
                got = _or_convolve(cp[v], fp[c], nsym)
                tgt = cat.ins[(v, c)]
                new = got & ~cp[tgt]
                if new.any():
                    cp[tgt] |= new
                    changed = True

    alg = FlatMaskAlgebra(nsym)
    half_cover = tuple(frozenset(int(m) for m in np.nonzero(fp[c])[0]) for c in range(nh))
    arrow_cover = tuple(
        frozenset(int(m) for m in np.nonzero(cp[v])[0]) for v in range(cat.arr_size)
    )
    cov = Covering(alg, half_cover, arrow_cover)
    stats = {
        "forest_pairs": sum(len(s) for s in half_cover),
        "context_pairs": sum(len(s) for s in arrow_cover),
        "symbols": nsym,
    }
    return cov, stats
