"""The derived forest category of a pair of morphisms out of the free algebra.

Given morphisms alpha and beta from the free forest algebra onto two finite
forest algebras, the derived category has the reachable beta-values as
objects, the realizable value pairs (alpha(s), beta(s)) as half-arrows, and
as arrows the contexts up to equal action: two contexts represent the same
arrow at object h when they send every realizable alpha-value compatible
with h to the same place.  That equivalence is finitely presented by the
action vector, which is the key used here.

The pair algebra is the reachable image of alpha x beta with a derivation
record per element, so every element can be replayed into a concrete forest
or context witness.

The two theorems connecting the derived category to wreath products are
implemented constructively: a division of the category by an algebra (H, V)
turns into a tm-division of the alpha side into (H, V) o (inner factor), and
a factorization of alpha through such a wreath product turns into a covering
of the derived category by (H, V).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import terms
from .algebra import (
    BudgetError,
    ForestAlgebra,
    Morphism,
    Recognizer,
    TmDivisionWitness,
    WreathOps,
    verify_tm_division,
)
from .category import Covering, ForestCategory, validate_category, verify_covering

__all__ = [
    "PairAlgebra",
    "pair_closure",
    "witness_forest",
    "witness_context",
    "DerivedCategory",
    "derived_category",
    "check_derived_well_defined",
    "WreathMorphism",
    "dct_forward",
    "dct_backward",
    "FactorizationError",
]


class FactorizationError(ValueError):
    """The wreath factorization hypothesis fails; carries a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass
class PairAlgebra:
    alpha: Morphism
    beta: Morphism
    h_pairs: tuple  # (alpha H index, beta H index)
    v_pairs: tuple
    h_index: dict
    v_index: dict
    h_derivs: tuple  # ("zero",) | ("add", i, j) | ("act", i, j)
    v_derivs: tuple  # ("one",) | ("letter", i, label) | ("ins", i, j)


def _as_morphism(m):
    return m.morphism if isinstance(m, Recognizer) else m


def pair_closure(alpha, beta, budget=100000) -> PairAlgebra:
    """Least fixpoint of the realizable value pairs of two morphisms over a
    shared alphabet, with breadth-first derivations for witness replay."""
    alpha = _as_morphism(alpha)
    beta = _as_morphism(beta)
    if alpha.alphabet != beta.alphabet:
        raise ValueError("the two morphisms must share an alphabet")
    a1, a2 = alpha.algebra, beta.algebra
    letters = sorted(alpha.alphabet)

    h_pairs, h_derivs = [(a1.zero, a2.zero)], [("zero",)]
    v_pairs, v_derivs = [(a1.one, a2.one)], [("one",)]
    h_index = {h_pairs[0]: 0}
    v_index = {v_pairs[0]: 0}

    changed = True
    while changed:
        changed = False
        for i in range(len(v_pairs)):  # grows while iterating; fixpoint rounds below
            v1, v2 = v_pairs[i]
            for a in letters:
                cand = (a1.mul[v1][alpha.letters[a]], a2.mul[v2][beta.letters[a]])
                if cand not in v_index:
                    v_index[cand] = len(v_pairs)
                    v_pairs.append(cand)
                    v_derivs.append(("letter", i, a))
                    changed = True
            for j in range(len(h_pairs)):
                h1, h2 = h_pairs[j]
                cand = (a1.ins[v1][h1], a2.ins[v2][h2])
                if cand not in v_index:
                    v_index[cand] = len(v_pairs)
                    v_pairs.append(cand)
                    v_derivs.append(("ins", i, j))
                    changed = True
        for i in range(len(h_pairs)):
            h1, h2 = h_pairs[i]
            for j in range(len(v_pairs)):
                v1, v2 = v_pairs[j]
                cand = (a1.act[h1][v1], a2.act[h2][v2])
                if cand not in h_index:
                    h_index[cand] = len(h_pairs)
                    h_pairs.append(cand)
                    h_derivs.append(("act", i, j))
                    changed = True
            for j in range(len(h_pairs)):
                g1, g2 = h_pairs[j]
                cand = (a1.add[h1][g1], a2.add[h2][g2])
                if cand not in h_index:
                    h_index[cand] = len(h_pairs)
                    h_pairs.append(cand)
                    h_derivs.append(("add", i, j))
                    changed = True
        if len(h_pairs) + len(v_pairs) > budget:
            raise BudgetError(
                "pair closure exceeded budget",
                {"h_pairs": len(h_pairs), "v_pairs": len(v_pairs), "budget": budget},
            )
    return PairAlgebra(
        alpha,
        beta,
        tuple(h_pairs),
        tuple(v_pairs),
        h_index,
        v_index,
        tuple(h_derivs),
        tuple(v_derivs),
    )


def witness_forest(pa: PairAlgebra, i) -> terms.Forest:
    """Replay the derivation of horizontal pair i into a forest that
    evaluates to exactly that pair under (alpha, beta)."""
    d = pa.h_derivs[i]
    if d[0] == "zero":
        return terms.EMPTY
    if d[0] == "add":
        return witness_forest(pa, d[1]) + witness_forest(pa, d[2])
    return terms.apply_context(witness_forest(pa, d[1]), witness_context(pa, d[2]))


def witness_context(pa: PairAlgebra, j) -> terms.Context:
    d = pa.v_derivs[j]
    if d[0] == "one":
        return terms.HOLE
    if d[0] == "letter":
        return terms.compose(
            witness_context(pa, d[1]), terms.Context(terms.EMPTY, (d[2], terms.HOLE))
        )
    return terms.compose(
        witness_context(pa, d[1]), terms.Context(witness_forest(pa, d[2]), None)
    )


# ---------------------------------------------------------------------------
# The derived category


@dataclass
class DerivedCategory:
    category: ForestCategory
    pa: PairAlgebra
    objects: tuple  # object index -> beta H value
    obj_index: dict
    r_sets: tuple  # per object: sorted alpha H values pairing with it
    arrow_keys: tuple  # arrow id -> (start obj, end obj, action vector)
    arrow_rep: tuple  # arrow id -> representative vpair index
    arrow_of: dict  # (vpair index, object index) -> arrow id

    def harr_of_pair(self, pair):
        return self.pa.h_index[pair]


def derived_category(pa: PairAlgebra) -> DerivedCategory:
    """Materialize the derived category from a complete pair closure; the
    result passes the full category validation."""
    a1, a2 = pa.alpha.algebra, pa.beta.algebra
    objects = tuple(sorted({h2 for (_, h2) in pa.h_pairs}))
    obj_index = {x: i for i, x in enumerate(objects)}
    obj_add = []
    for x in objects:
        row = []
        for y in objects:
            z = a2.add[x][y]
            if z not in obj_index:
                raise ValueError("reachable objects are not closed under addition")
            row.append(obj_index[z])
        obj_add.append(tuple(row))

    nh = len(pa.h_pairs)
    harr_add = []
    for (h1, h2) in pa.h_pairs:
        row = []
        for (g1, g2) in pa.h_pairs:
            row.append(pa.h_index[(a1.add[h1][g1], a2.add[h2][g2])])
        harr_add.append(tuple(row))
    harr_end = tuple(obj_index[h2] for (_, h2) in pa.h_pairs)
    harr_one = pa.h_index[(a1.zero, a2.zero)]

    r_sets = tuple(
        tuple(sorted(h1 for (h1, h2) in pa.h_pairs if h2 == x)) for x in objects
    )

    def key_of(vp_idx, oi):
        v1, v2 = pa.v_pairs[vp_idx]
        x = objects[oi]
        end = obj_index[a2.act[x][v2]]
        vector = tuple(a1.act[h1][v1] for h1 in r_sets[oi])
        return (oi, end, vector)

    arrow_keys = []
    key_index = {}
    arrow_rep = []
    arrow_of = {}
    for vp_idx in range(len(pa.v_pairs)):
        for oi in range(len(objects)):
            key = key_of(vp_idx, oi)
            aid = key_index.get(key)
            if aid is None:
                aid = len(arrow_keys)
                key_index[key] = aid
                arrow_keys.append(key)
                arrow_rep.append(vp_idx)
            arrow_of[(vp_idx, oi)] = aid

    arr_size = len(arrow_keys)
    arr_start = tuple(k[0] for k in arrow_keys)
    arr_end = tuple(k[1] for k in arrow_keys)
    one_idx = pa.v_index[(a1.one, a2.one)]
    identity = tuple(arrow_of[(one_idx, oi)] for oi in range(len(objects)))

    comp = {}
    for u in range(arr_size):
        vu = pa.v_pairs[arrow_rep[u]]
        for w in range(arr_size):
            if arr_start[w] != arr_end[u]:
                continue
            vw = pa.v_pairs[arrow_rep[w]]
            prod = (a1.mul[vu[0]][vw[0]], a2.mul[vu[1]][vw[1]])
            comp[(u, w)] = arrow_of[(pa.v_index[prod], arr_start[u])]

    act = {}
    for ci, (h1, h2) in enumerate(pa.h_pairs):
        oi = harr_end[ci]
        for u in range(arr_size):
            if arr_start[u] != oi:
                continue
            v1, v2 = pa.v_pairs[arrow_rep[u]]
            act[(ci, u)] = pa.h_index[(a1.act[h1][v1], a2.act[h2][v2])]

    ins = {}
    for u in range(arr_size):
        v1, v2 = pa.v_pairs[arrow_rep[u]]
        for ci, (h1, h2) in enumerate(pa.h_pairs):
            cand = (a1.ins[v1][h1], a2.ins[v2][h2])
            ins[(u, ci)] = arrow_of[(pa.v_index[cand], arr_start[u])]

    cat = validate_category(
        ForestCategory(
            obj_size=len(objects),
            obj_add=tuple(obj_add),
            obj_zero=obj_index[a2.zero],
            harr_size=nh,
            harr_add=tuple(harr_add),
            harr_one=harr_one,
            harr_end=harr_end,
            arr_size=arr_size,
            arr_start=arr_start,
            arr_end=arr_end,
            identity=identity,
            comp=comp,
            act=act,
            ins=ins,
        )
    )
    return DerivedCategory(
        cat,
        pa,
        objects,
        obj_index,
        r_sets,
        tuple(arrow_keys),
        tuple(arrow_rep),
        arrow_of,
    )


def check_derived_well_defined(dc: DerivedCategory) -> bool:
    """Re-verify empirically that composition and insertion do not depend on
    the representative context of an arrow class: any vpair with the same
    action key must induce the same table entries."""
    pa = dc.pa
    a1, a2 = pa.alpha.algebra, pa.beta.algebra
    for vp_idx in range(len(pa.v_pairs)):
        v1, v2 = pa.v_pairs[vp_idx]
        for oi in range(len(dc.objects)):
            u = dc.arrow_of[(vp_idx, oi)]
            # composition with every continuation arrow
            for w in range(len(dc.arrow_keys)):
                if dc.category.arr_start[w] != dc.category.arr_end[u]:
                    continue
                w1, w2 = pa.v_pairs[dc.arrow_rep[w]]
                prod = (a1.mul[v1][w1], a2.mul[v2][w2])
                if dc.arrow_of[(pa.v_index[prod], oi)] != dc.category.comp[(u, w)]:
                    return False
            # insertion with every half-arrow
            for ci, (h1, h2) in enumerate(pa.h_pairs):
                cand = (a1.ins[v1][h1], a2.ins[v2][h2])
                if dc.arrow_of[(pa.v_index[cand], oi)] != dc.category.ins[(u, ci)]:
                    return False
    return True


# ---------------------------------------------------------------------------
# The wreath product correspondence, both directions


@dataclass
class WreathMorphism:
    """A morphism from the free algebra into outer o inner, given letterwise;
    vertical images are (function table over inner H, inner V) pairs."""

    outer: ForestAlgebra
    inner: ForestAlgebra
    alphabet: frozenset
    letters: dict  # label -> (f tuple, inner V index)

    def ops(self):
        return WreathOps(self.outer, self.inner)

    def eval_forest(self, s):
        ops = self.ops()
        h = ops.h_zero
        for t in s.trees:
            u = self.letters[t.label]
            h = ops.h_add(h, ops.act_(self.eval_forest(t.children), u))
        return h

    def eval_context(self, p):
        ops = self.ops()
        if p.spine is None:
            v = ops.v_one
        else:
            label, inner = p.spine
            v = ops.v_mul(self.eval_context(inner), self.letters[label])
        if not p.rest.is_empty:
            v = ops.v_mul(v, ops.ins_(ops.v_one, self.eval_forest(p.rest)))
        return v


def dct_forward(dc: DerivedCategory, cov: Covering, budget=100000):
    """From a verified covering of the derived category by (H, V), build a
    tm-division witness of the alpha algebra into (H, V) o (beta algebra).

    A covered pair (cover element, object value) names the alpha value of the
    covered half-arrow; hat(v) picks a realizing context for v and covers its
    arrow at each object by the smallest covering element.  K is generated:
    one smallest cover element per half-arrow, closed under addition and the
    hat actions, so the witness stays small.  Returns (witness, WreathOps
    ambient); the witness passes verify_tm_division.
    """
    pa = dc.pa
    rep = verify_covering(dc.category, cov.algebra, cov)
    if not rep.ok:
        raise ValueError("covering does not verify: %r" % rep.violations[:3])
    a1, a2 = pa.alpha.algebra, pa.beta.algebra
    ops = WreathOps(cov.algebra, a2)

    # psi on all covered pairs, for consistency checks during the closure
    covered = {}
    for ci, (h1, h2) in enumerate(pa.h_pairs):
        for x in cov.half_cover[ci]:
            key = (x, h2)
            if covered.setdefault(key, h1) != h1:
                raise ValueError("covering is not injective on half-arrows")

    hat = {}
    for v1 in range(a1.v_size):
        vp_idx = next((j for j, (w1, _) in enumerate(pa.v_pairs) if w1 == v1), None)
        if vp_idx is None:
            raise ValueError(
                "vertical element %d is not realized; pass a reachable (e.g. syntactic) alpha"
                % v1
            )
        v2 = pa.v_pairs[vp_idx][1]
        f = []
        for h2 in range(a2.h_size):
            oi = dc.obj_index.get(h2)
            if oi is None:
                f.append(cov.algebra.v_one)  # unreachable object, never touched from K
                continue
            arrow = dc.arrow_of[(vp_idx, oi)]
            f.append(min(cov.arrow_cover[arrow]))
        hat[v1] = (tuple(f), v2)

    # generate K from one covered element per half-arrow
    psi = {ops.h_zero: a1.zero}
    work = [ops.h_zero]
    for ci, (h1, h2) in enumerate(pa.h_pairs):
        key = (min(cov.half_cover[ci]), h2)
        if key not in psi:
            psi[key] = h1
            work.append(key)

    def admit(key, value):
        prev = psi.get(key)
        if prev is None:
            if covered.get(key, value) != value:
                raise ValueError("covering violates psi-consistency at %r" % (key,))
            psi[key] = value
            work.append(key)
            if len(psi) > budget:
                raise BudgetError("generated witness exceeded budget", {"k": len(psi)})
        elif prev != value:
            raise ValueError("covering is not functional at %r" % (key,))

    while work:
        k = work.pop()
        kv = psi[k]
        for other in list(psi):
            admit(ops.h_add(k, other), a1.add[kv][psi[other]])
        for v1, vhat in hat.items():
            admit(ops.act_(k, vhat), a1.act[kv][v1])

    k_elements = tuple(sorted(psi))
    return TmDivisionWitness(k_elements, dict(psi), hat), ops


def dct_backward(dc: DerivedCategory, delta: WreathMorphism, budget=200000) -> Covering:
    """From a factorization of alpha through outer o (beta algebra), with the
    inner projection of delta equal to beta letterwise, build the covering of
    the derived category by the outer algebra.

    Half-arrow covers collect the outer coordinates of delta on realizing
    forests; arrow covers collect f_q(h) over realizing contexts q.  The
    construction checks the factorization hypotheses and the result passes
    verify_covering.
    """
    pa = dc.pa
    alpha, beta = pa.alpha, pa.beta
    if delta.alphabet != alpha.alphabet:
        raise FactorizationError("delta is over a different alphabet")
    if delta.inner is not beta.algebra and delta.inner != beta.algebra:
        raise FactorizationError("the inner factor of delta must be the beta algebra")
    for a in sorted(alpha.alphabet):
        if delta.letters[a][1] != beta.letters[a]:
            raise FactorizationError(
                "projection of delta disagrees with beta on a letter", witness=a
            )

    ops = delta.ops()
    a1 = alpha.algebra
    letters = sorted(alpha.alphabet)

    # joint closure of (delta, alpha) values, with derivations for witnesses
    h_elems = [(ops.h_zero, a1.zero)]
    v_elems = [(ops.v_one, a1.one)]
    h_idx = {h_elems[0]: 0}
    v_idx = {v_elems[0]: 0}
    h_derivs = [("zero",)]
    v_derivs = [("one",)]
    changed = True
    while changed:
        changed = False
        for i in range(len(v_elems)):
            dv, av = v_elems[i]
            for a in letters:
                cand = (ops.v_mul(dv, delta.letters[a]), a1.mul[av][alpha.letters[a]])
                if cand not in v_idx:
                    v_idx[cand] = len(v_elems)
                    v_elems.append(cand)
                    v_derivs.append(("letter", i, a))
                    changed = True
            for j in range(len(h_elems)):
                dh, ah = h_elems[j]
                cand = (ops.ins_(dv, dh), a1.ins[av][ah])
                if cand not in v_idx:
                    v_idx[cand] = len(v_elems)
                    v_elems.append(cand)
                    v_derivs.append(("ins", i, j))
                    changed = True
        for i in range(len(h_elems)):
            dh, ah = h_elems[i]
            for j in range(len(v_elems)):
                dv, av = v_elems[j]
                cand = (ops.act_(dh, dv), a1.act[ah][av])
                if cand not in h_idx:
                    h_idx[cand] = len(h_elems)
                    h_elems.append(cand)
                    h_derivs.append(("act", i, j))
                    changed = True
            for j in range(len(h_elems)):
                dh2, ah2 = h_elems[j]
                cand = (ops.h_add(dh, dh2), a1.add[ah][ah2])
                if cand not in h_idx:
                    h_idx[cand] = len(h_elems)
                    h_elems.append(cand)
                    h_derivs.append(("add", i, j))
                    changed = True
        if len(h_elems) + len(v_elems) > budget:
            raise BudgetError("factorization closure exceeded budget")

    # gamma must exist: delta values determine alpha values
    seen = {}
    for i, (dh, ah) in enumerate(h_elems):
        j = seen.setdefault(dh, i)
        if h_elems[j][1] != ah:
            pa2 = PairAlgebra(alpha, beta, (), (), {}, {}, tuple(h_derivs), tuple(v_derivs))
            raise FactorizationError(
                "delta does not determine alpha on a forest",
                witness=(witness_forest(pa2, j), witness_forest(pa2, i)),
            )
    seen_v = {}
    for i, (dv, av) in enumerate(v_elems):
        j = seen_v.setdefault(dv, i)
        if v_elems[j][1] != av:
            pa2 = PairAlgebra(alpha, beta, (), (), {}, {}, tuple(h_derivs), tuple(v_derivs))
            raise FactorizationError(
                "delta does not determine alpha on a context",
                witness=(witness_context(pa2, j), witness_context(pa2, i)),
            )

    half_cover = [set() for _ in range(len(pa.h_pairs))]
    for (dh, ah) in h_elems:
        ho, hi = dh
        ci = pa.h_index.get((ah, hi))
        if ci is None:
            raise FactorizationError("delta inner coordinate strays off the pair closure")
        half_cover[ci].add(ho)

    arrow_cover = [set() for _ in range(len(dc.arrow_keys))]
    for (dv, av) in v_elems:
        f, vi = dv
        vp_idx = pa.v_index.get((av, vi))
        if vp_idx is None:
            raise FactorizationError("delta vertical coordinate strays off the pair closure")
        for oi, h2 in enumerate(dc.objects):
            arrow = dc.arrow_of[(vp_idx, oi)]
            arrow_cover[arrow].add(f[h2])

    cov = Covering(
        delta.outer,
        tuple(frozenset(s) for s in half_cover),
        tuple(frozenset(s) for s in arrow_cover),
    )
    rep = verify_covering(dc.category, delta.outer, cov)
    if not rep.ok:
        raise FactorizationError("constructed covering does not verify: %r" % rep.violations[:3])
    return cov
