"""Finite forest algebras given by explicit tables.

A finite forest algebra is a pair of monoids (H, V): H commutative, written
additively with identity `zero`; V written multiplicatively with identity
`one`.  V acts on H on the right, the action is faithful, and for every
v in V and h in H there is an insertion element ins(v, h) in V with
g . ins(v, h) = g.v + h for all g.

Tables are 0-based and row-major with the row as the left operand.  All
objects here are immutable after validation; operations are pure.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from . import terms
from .terms import Context, Forest, apply_context

__all__ = [
    "AlgebraLawError",
    "BudgetError",
    "ForestAlgebra",
    "FlatMaskAlgebra",
    "Morphism",
    "Recognizer",
    "validate_algebra",
    "flat_algebra",
    "direct_product",
    "algebra_to_json",
    "algebra_from_json",
    "recognizer_to_json",
    "recognizer_from_json",
    "SyntacticResult",
    "syntactic_algebra",
    "WreathProduct",
    "wreath",
    "WreathOps",
    "wreath_generated",
    "generated_subalgebra",
    "DivisionWitness",
    "TmDivisionWitness",
    "verify_division",
    "verify_tm_division",
    "division_to_tm",
    "tm_to_division",
    "search_division",
]


class AlgebraLawError(ValueError):
    """A forest-algebra law fails; carries the law name and witness indices."""

    def __init__(self, law, where, message):
        super().__init__("%s: %s (witness %r)" % (law, message, where))
        self.law = law
        self.where = where


class BudgetError(RuntimeError):
    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = dict(stats or {})


def _freeze(table):
    return tuple(tuple(row) for row in table)


@dataclass(frozen=True)
class ForestAlgebra:
    h_size: int
    add: tuple
    zero: int
    v_size: int
    mul: tuple
    one: int
    act: tuple  # act[h][v] -> h
    ins: tuple  # ins[v][h] -> v

    # elementwise ops; the same protocol is offered by WreathOps
    def h_add(self, x, y):
        return self.add[x][y]

    @property
    def h_zero(self):
        return self.zero

    def v_mul(self, u, w):
        return self.mul[u][w]

    @property
    def v_one(self):
        return self.one

    def act_(self, h, v):
        return self.act[h][v]

    def ins_(self, v, h):
        return self.ins[v][h]

    def h_elements(self):
        return range(self.h_size)

    def v_elements(self):
        return range(self.v_size)

    def h_idempotent(self):
        return all(self.add[h][h] == h for h in range(self.h_size))

    def h_nonidempotent_witness(self):
        for h in range(self.h_size):
            if self.add[h][h] != h:
                return h
        return None


def _check_monoid(size, table, unit, name, commutative):
    if len(table) != size or any(len(row) != size for row in table):
        raise AlgebraLawError(name + "-shape", (), "table is not %d x %d" % (size, size))
    for row in table:
        for x in row:
            if not (0 <= x < size):
                raise AlgebraLawError(name + "-shape", (x,), "entry out of range")
    for x in range(size):
        if table[unit][x] != x or table[x][unit] != x:
            raise AlgebraLawError(name + "-identity", (x,), "unit law fails")
    for x in range(size):
        for y in range(size):
            if commutative and table[x][y] != table[y][x]:
                raise AlgebraLawError(name + "-commutativity", (x, y), "xy != yx")
            for z in range(size):
                if table[table[x][y]][z] != table[x][table[y][z]]:
                    raise AlgebraLawError(name + "-associativity", (x, y, z), "(xy)z != x(yz)")


def _derive_ins(h_size, add, v_size, act):
    """ins(v, h) is the unique v' with g.v' = g.v + h for all g."""
    ins = []
    for v in range(v_size):
        row = []
        for h in range(h_size):
            target = [add[act[g][v]][h] for g in range(h_size)]
            found = None
            for w in range(v_size):
                if all(act[g][w] == target[g] for g in range(h_size)):
                    if found is not None:
                        raise AlgebraLawError(
                            "insertion", (v, h, found, w), "two candidates act identically"
                        )
                    found = w
            if found is None:
                raise AlgebraLawError("insertion-missing", (v, h), "no element realizes g.v + h")
            row.append(found)
        ins.append(row)
    return ins


def validate_algebra(h_add, zero, v_mul, one, act, ins=None):
    """Check every forest-algebra law; return the algebra or raise the first
    violation as an AlgebraLawError with concrete indices."""
    h_size = len(h_add)
    v_size = len(v_mul)
    _check_monoid(h_size, h_add, zero, "h", commutative=True)
    _check_monoid(v_size, v_mul, one, "v", commutative=False)
    if len(act) != h_size or any(len(row) != v_size for row in act):
        raise AlgebraLawError("action-shape", (), "act is not %d x %d" % (h_size, v_size))
    for row in act:
        for x in row:
            if not (0 <= x < h_size):
                raise AlgebraLawError("action-shape", (x,), "entry out of range")
    for h in range(h_size):
        if act[h][one] != h:
            raise AlgebraLawError("action-identity", (h,), "h.1 != h")
        for v1 in range(v_size):
            for v2 in range(v_size):
                if act[act[h][v1]][v2] != act[h][v_mul[v1][v2]]:
                    raise AlgebraLawError("action-composition", (h, v1, v2), "(hv1)v2 != h(v1v2)")
    for v1 in range(v_size):
        for v2 in range(v1 + 1, v_size):
            if all(act[h][v1] == act[h][v2] for h in range(h_size)):
                raise AlgebraLawError("faithfulness", (v1, v2), "distinct v act identically")
    if ins is None:
        ins = _derive_ins(h_size, h_add, v_size, act)
    else:
        if len(ins) != v_size or any(len(row) != h_size for row in ins):
            raise AlgebraLawError("insertion-shape", (), "ins is not %d x %d" % (v_size, h_size))
        for v in range(v_size):
            for h in range(h_size):
                w = ins[v][h]
                if not (0 <= w < v_size):
                    raise AlgebraLawError("insertion-shape", (v, h), "entry out of range")
                for g in range(h_size):
                    if act[g][w] != h_add[act[g][v]][h]:
                        raise AlgebraLawError("insertion", (v, h, g), "g.ins(v,h) != g.v + h")
    return ForestAlgebra(
        h_size=h_size,
        add=_freeze(h_add),
        zero=zero,
        v_size=v_size,
        mul=_freeze(v_mul),
        one=one,
        act=_freeze(act),
        ins=_freeze(ins),
    )


def flat_algebra(add_table, zero):
    """The flat algebra (H, H) of a commutative monoid acting on itself by
    addition; idempotent H gives the flat idempotent-commutative case."""
    n = len(add_table)
    return validate_algebra(add_table, zero, add_table, zero, add_table, add_table)


class FlatMaskAlgebra:
    """The flat idempotent-commutative algebra of all subsets of an n-element
    set under union, with elements represented as bitmasks and no tables.

    Offers the same elementwise protocol as ForestAlgebra, so coverings and
    division witnesses can live over it without materializing 2^n tables.
    """

    def __init__(self, n_symbols):
        self.n_symbols = n_symbols

    @property
    def h_zero(self):
        return 0

    @property
    def v_one(self):
        return 0

    def h_add(self, x, y):
        return x | y

    def v_mul(self, u, w):
        return u | w

    def act_(self, h, v):
        return h | v

    def ins_(self, v, h):
        return v | h

    def __eq__(self, other):
        return isinstance(other, FlatMaskAlgebra) and other.n_symbols == self.n_symbols


def direct_product(a, b):
    """Componentwise product algebra, with index = i_a * b_size + i_b."""

    def hx(i, j):
        return i * b.h_size + j

    def vx(i, j):
        return i * b.v_size + j

    hs = [(i, j) for i in range(a.h_size) for j in range(b.h_size)]
    vs = [(i, j) for i in range(a.v_size) for j in range(b.v_size)]
    add = [[hx(a.add[x1][y1], b.add[x2][y2]) for (y1, y2) in hs] for (x1, x2) in hs]
    mul = [[vx(a.mul[x1][y1], b.mul[x2][y2]) for (y1, y2) in vs] for (x1, x2) in vs]
    act = [[hx(a.act[h1][v1], b.act[h2][v2]) for (v1, v2) in vs] for (h1, h2) in hs]
    ins = [[vx(a.ins[v1][h1], b.ins[v2][h2]) for (h1, h2) in hs] for (v1, v2) in vs]
    alg = validate_algebra(add, hx(a.zero, b.zero), mul, vx(a.one, b.one), act, ins)
    return alg, hs, vs


# ---------------------------------------------------------------------------
# Morphisms and recognizers


@dataclass(frozen=True)
class Morphism:
    """The unique extension of a letter-to-V map to the free forest algebra."""

    algebra: ForestAlgebra
    alphabet: frozenset
    letters: dict  # label -> V index

    def __post_init__(self):
        for a in self.alphabet:
            if a not in self.letters:
                raise ValueError("letter map not total: missing %r" % a)

    def letter(self, a):
        try:
            return self.letters[a]
        except KeyError:
            raise terms.UnknownLabelError(a, 0) from None

    def eval_forest(self, s: Forest) -> int:
        alg = self.algebra
        h = alg.zero
        for t in s.trees:
            h = alg.add[h][alg.act[self.eval_forest(t.children)][self.letter(t.label)]]
        return h

    def eval_context(self, p: Context) -> int:
        alg = self.algebra
        if p.spine is None:
            v = alg.one
        else:
            label, inner = p.spine
            v = alg.mul[self.eval_context(inner)][self.letter(label)]
        if not p.rest.is_empty:
            v = alg.mul[v][alg.ins[alg.one][self.eval_forest(p.rest)]]
        return v


@dataclass(frozen=True)
class Recognizer:
    morphism: Morphism
    accept: frozenset  # subset of H indices

    def __post_init__(self):
        for h in self.accept:
            if not (0 <= h < self.morphism.algebra.h_size):
                raise ValueError("accept state %r out of range" % (h,))

    @property
    def algebra(self):
        return self.morphism.algebra

    @property
    def alphabet(self):
        return self.morphism.alphabet

    def accepts(self, s: Forest) -> bool:
        return self.morphism.eval_forest(s) in self.accept


# ---------------------------------------------------------------------------
# JSON file formats


def algebra_to_json(alg):
    return {
        "h": {"size": alg.h_size, "add": [list(r) for r in alg.add], "zero": alg.zero},
        "v": {"size": alg.v_size, "mul": [list(r) for r in alg.mul], "one": alg.one},
        "act": [list(r) for r in alg.act],
        "ins": [list(r) for r in alg.ins],
    }


def algebra_from_json(data):
    h = data["h"]
    v = data["v"]
    return validate_algebra(h["add"], h["zero"], v["mul"], v["one"], data["act"], data.get("ins"))


def recognizer_to_json(rec):
    out = algebra_to_json(rec.algebra)
    out["alphabet"] = sorted(rec.alphabet)
    out["letters"] = {a: rec.morphism.letters[a] for a in sorted(rec.alphabet)}
    out["accept"] = sorted(rec.accept)
    return out


def recognizer_from_json(data):
    alg = algebra_from_json(data)
    alphabet = terms.make_alphabet(data["alphabet"])
    letters = dict(data["letters"])
    for a, v in letters.items():
        if a not in alphabet:
            raise ValueError("letter %r not in alphabet" % a)
        if not (0 <= v < alg.v_size):
            raise ValueError("letter %r maps outside V" % a)
    m = Morphism(alg, alphabet, letters)
    return Recognizer(m, frozenset(data["accept"]))


def load_recognizer(path):
    with open(path, "r", encoding="utf-8") as fh:
        return recognizer_from_json(json.load(fh))


def transformation_algebra(h_add, zero, letter_maps, budget=100000):
    """Forest algebra of a deterministic bottom-up forest automaton.

    Takes a commutative state monoid (h_add, zero) and one transition map per
    letter; the vertical monoid is the transformation monoid on the states
    generated by the letter maps and the add-with-state maps, closed under
    composition.  Faithfulness is automatic.  Returns the algebra, the letter
    map into V, and a derivation log per V element for witness replay:
    ("one",), ("letter", a), ("addh", g), or ("mul", i, j) meaning element i
    acting first, then element j.
    """
    n = len(h_add)
    _check_monoid(n, h_add, zero, "h", commutative=True)
    ident = tuple(range(n))
    gens = [(ident, ("one",))]
    letter_of = {}
    for a in sorted(letter_maps):
        tau = tuple(letter_maps[a])
        if len(tau) != n or any(not (0 <= x < n) for x in tau):
            raise ValueError("letter map for %r is not a transformation of the states" % a)
        letter_of[a] = tau
        gens.append((tau, ("letter", a)))
    for g in range(n):
        gens.append((tuple(h_add[h][g] for h in range(n)), ("addh", g)))
    v_index = {}
    v_elems = []
    v_derivs = []

    def admit(tau, deriv):
        if tau not in v_index:
            v_index[tau] = len(v_elems)
            v_elems.append(tau)
            v_derivs.append(deriv)
            return True
        return False

    queue = []
    for tau, deriv in gens:
        if admit(tau, deriv):
            queue.append(tau)
    while queue:
        tau = queue.pop(0)
        ti = v_index[tau]
        for sigma in list(v_elems):
            si = v_index[sigma]
            # tau then sigma, and sigma then tau
            for comp, deriv in (
                (tuple(sigma[tau[h]] for h in range(n)), ("mul", ti, si)),
                (tuple(tau[sigma[h]] for h in range(n)), ("mul", si, ti)),
            ):
                if admit(comp, deriv):
                    queue.append(comp)
                    if len(v_elems) > budget:
                        raise BudgetError(
                            "transformation monoid exceeded budget",
                            {"v": len(v_elems), "budget": budget},
                        )
    mul = [[v_index[tuple(w[u[h]] for h in range(n))] for w in v_elems] for u in v_elems]
    act = [[u[h] for u in v_elems] for h in range(n)]
    ins = [
        [v_index[tuple(h_add[u[h]][g] for h in range(n))] for g in range(n)]
        for u in v_elems
    ]
    alg = validate_algebra(h_add, zero, mul, v_index[ident], act, ins)
    letters = {a: v_index[tau] for a, tau in letter_of.items()}
    return alg, letters, tuple(v_derivs)


# ---------------------------------------------------------------------------
# Reachable part and syntactic algebra


def _reachable_part(morphism):
    """Indices of H and V reachable as values of forests and contexts, with a
    derivation log for replaying witness terms."""
    alg = morphism.algebra
    letters = sorted(morphism.alphabet)
    h_seen = {alg.zero: ("zero",)}
    v_seen = {alg.one: ("one",)}
    changed = True
    while changed:
        changed = False
        for v in list(v_seen):
            for a in letters:
                w = alg.mul[v][morphism.letters[a]]
                if w not in v_seen:
                    v_seen[w] = ("letter", v, a)
                    changed = True
            for h in list(h_seen):
                w = alg.ins[v][h]
                if w not in v_seen:
                    v_seen[w] = ("ins", v, h)
                    changed = True
        for h in list(h_seen):
            for v in list(v_seen):
                g = alg.act[h][v]
                if g not in h_seen:
                    h_seen[g] = ("act", h, v)
                    changed = True
            for g in list(h_seen):
                w = alg.add[h][g]
                if w not in h_seen:
                    h_seen[w] = ("add", h, g)
                    changed = True
    return h_seen, v_seen


def _replay_forest(h, h_log, v_log):
    kind = h_log[h]
    if kind[0] == "zero":
        return terms.EMPTY
    if kind[0] == "act":
        _, h0, v0 = kind
        return apply_context(_replay_forest(h0, h_log, v_log), _replay_context(v0, h_log, v_log))
    _, h0, h1 = kind
    return _replay_forest(h0, h_log, v_log) + _replay_forest(h1, h_log, v_log)


def _replay_context(v, h_log, v_log):
    kind = v_log[v]
    if kind[0] == "one":
        return terms.HOLE
    if kind[0] == "letter":
        _, v0, a = kind
        return terms.compose(_replay_context(v0, h_log, v_log), Context(terms.EMPTY, (a, terms.HOLE)))
    _, v0, h0 = kind
    return terms.compose(
        _replay_context(v0, h_log, v_log), Context(_replay_forest(h0, h_log, v_log), None)
    )


@dataclass
class SyntacticResult:
    algebra: ForestAlgebra
    h_map: dict  # reachable input H index -> syntactic H index
    v_map: dict  # reachable input V index -> syntactic V index
    recognizer: Recognizer
    h_terms: tuple  # representative Forest per syntactic H element
    v_terms: tuple  # representative Context per syntactic V element


def syntactic_algebra(rec: Recognizer) -> SyntacticResult:
    """Minimal algebra recognizing the same language: restrict to the part
    reachable from the letters, then refine by acceptance experiments.

    Contexts alone are experiment-complete because 1 + g = ins(one, g) lies
    in V, so additive experiments are subsumed.
    """
    alg = rec.algebra
    h_log, v_log = _reachable_part(rec.morphism)
    hs = sorted(h_log)
    vs = sorted(v_log)
    accept = set(rec.accept)

    # initial partition of H by all context experiments
    def h_sig0(h):
        return tuple(alg.act[h][v] in accept for v in vs)

    h_class = {}
    sigs = {}
    for h in hs:
        sig = h_sig0(h)
        h_class[h] = sigs.setdefault(sig, len(sigs))

    # refine to a congruence (stable under act and add); the experiment
    # partition is already stable, the loop guards the claim
    while True:
        new_sigs = {}
        new_class = {}
        for h in hs:
            sig = (
                h_class[h],
                tuple(h_class[alg.act[h][v]] for v in vs),
                tuple(h_class[alg.add[h][g]] for g in hs),
            )
            new_class[h] = new_sigs.setdefault(sig, len(new_sigs))
        if len(new_sigs) == len(set(h_class.values())):
            break
        h_class = new_class

    # collapse V by action on H classes
    v_class = {}
    v_sigs = {}
    for v in vs:
        sig = tuple(h_class[alg.act[h][v]] for h in hs)
        v_class[v] = v_sigs.setdefault(sig, len(v_sigs))

    n_h = len(set(h_class.values()))
    n_v = len(set(v_class.values()))
    h_rep = {}
    for h in hs:
        h_rep.setdefault(h_class[h], h)
    v_rep = {}
    for v in vs:
        v_rep.setdefault(v_class[v], v)

    add = [[h_class[alg.add[h_rep[i]][h_rep[j]]] for j in range(n_h)] for i in range(n_h)]
    mul = [[v_class[alg.mul[v_rep[i]][v_rep[j]]] for j in range(n_v)] for i in range(n_v)]
    act = [[h_class[alg.act[h_rep[i]][v_rep[j]]] for j in range(n_v)] for i in range(n_h)]
    ins = [[v_class[alg.ins[v_rep[i]][h_rep[j]]] for j in range(n_h)] for i in range(n_v)]
    syn = validate_algebra(add, h_class[alg.zero], mul, v_class[alg.one], act, ins)

    letters = {a: v_class[rec.morphism.letters[a]] for a in rec.alphabet}
    morphism = Morphism(syn, rec.alphabet, letters)
    new_accept = frozenset(h_class[h] for h in hs if h in accept)
    out_rec = Recognizer(morphism, new_accept)

    h_terms = tuple(_replay_forest(h_rep[i], h_log, v_log) for i in range(n_h))
    v_terms = tuple(_replay_context(v_rep[i], h_log, v_log) for i in range(n_v))
    return SyntacticResult(syn, dict(h_class), dict(v_class), out_rec, h_terms, v_terms)


# ---------------------------------------------------------------------------
# Wreath products


class WreathOps:
    """Elementwise arithmetic in outer o inner without materializing tables.

    Horizontal elements are pairs (h_outer, h_inner); vertical elements are
    pairs (f, v_inner) with f a tuple over inner H of outer V elements.
    Action: (h, k)(f, v) = (h . f(k), k . v).  The inner factor must carry
    tables; the outer factor only needs the elementwise protocol, so a
    FlatMaskAlgebra works there.
    """

    def __init__(self, outer, inner):
        self.outer = outer
        self.inner = inner

    @property
    def h_zero(self):
        return (self.outer.h_zero, self.inner.zero)

    @property
    def v_one(self):
        return (tuple(self.outer.v_one for _ in range(self.inner.h_size)), self.inner.one)

    def h_add(self, x, y):
        return (self.outer.h_add(x[0], y[0]), self.inner.add[x[1]][y[1]])

    def v_mul(self, u, w):
        f1, v1 = u
        f2, v2 = w
        inner = self.inner
        f = tuple(
            self.outer.v_mul(f1[k], f2[inner.act[k][v1]]) for k in range(inner.h_size)
        )
        return (f, inner.mul[v1][v2])

    def act_(self, x, u):
        f, v = u
        return (self.outer.act_(x[0], f[x[1]]), self.inner.act[x[1]][v])

    def ins_(self, u, x):
        f, v = u
        g = tuple(self.outer.ins_(f[k], x[0]) for k in range(self.inner.h_size))
        return (g, self.inner.ins[v][x[1]])


@dataclass
class WreathProduct:
    algebra: ForestAlgebra
    outer: ForestAlgebra
    inner: ForestAlgebra
    h_pairs: tuple  # wreath H index -> (h_outer, h_inner)
    v_pairs: tuple  # wreath V index -> (f tuple, v_inner)
    h_index: dict
    v_index: dict
    pi_h: tuple  # projection onto the inner coordinate
    pi_v: tuple

    def pi_check(self):
        """Exhaustively verify that the inner-coordinate projection is a
        forest algebra homomorphism onto the inner factor."""
        alg, inner = self.algebra, self.inner
        ph, pv = self.pi_h, self.pi_v
        if ph[alg.zero] != inner.zero or pv[alg.one] != inner.one:
            return False
        for i in range(alg.h_size):
            for j in range(alg.h_size):
                if ph[alg.add[i][j]] != inner.add[ph[i]][ph[j]]:
                    return False
            for u in range(alg.v_size):
                if ph[alg.act[i][u]] != inner.act[ph[i]][pv[u]]:
                    return False
        for u in range(alg.v_size):
            for w in range(alg.v_size):
                if pv[alg.mul[u][w]] != inner.mul[pv[u]][pv[w]]:
                    return False
            for i in range(alg.h_size):
                if pv[alg.ins[u][i]] != inner.ins[pv[u]][ph[i]]:
                    return False
        return True


def _wreath_tables(ops, h_elems, v_elems):
    h_index = {x: i for i, x in enumerate(h_elems)}
    v_index = {u: i for i, u in enumerate(v_elems)}
    add = [[h_index[ops.h_add(x, y)] for y in h_elems] for x in h_elems]
    mul = [[v_index[ops.v_mul(u, w)] for w in v_elems] for u in v_elems]
    act = [[h_index[ops.act_(x, u)] for u in v_elems] for x in h_elems]
    ins = [[v_index[ops.ins_(u, x)] for x in h_elems] for u in v_elems]
    return h_index, v_index, add, mul, act, ins


def _check_no_vertical_collapse(act_table, v_count):
    seen = {}
    for v in range(v_count):
        column = tuple(row[v] for row in act_table)
        if column in seen:
            raise AlgebraLawError(
                "wreath-collapse", (seen[column], v), "distinct vertical pairs act identically"
            )
        seen[column] = v


def wreath(outer, inner, budget=100000):
    """Full wreath product outer o inner with explicit tables.

    Horizontal part is the direct product; vertical elements are pairs of a
    function table inner-H -> outer-V and an inner V element.
    """
    v_count = outer.v_size ** inner.h_size * inner.v_size
    if v_count > budget:
        raise BudgetError(
            "wreath vertical monoid needs %d elements (budget %d)" % (v_count, budget),
            {"required": v_count, "budget": budget},
        )
    ops = WreathOps(outer, inner)
    h_elems = [(x, y) for x in range(outer.h_size) for y in range(inner.h_size)]
    v_elems = [
        (f, v)
        for f in itertools.product(range(outer.v_size), repeat=inner.h_size)
        for v in range(inner.v_size)
    ]
    h_index, v_index, add, mul, act, ins = _wreath_tables(ops, h_elems, v_elems)
    # faithfulness holds because both factors are faithful; the check guards
    # the tables anyway and errors on collapse
    _check_no_vertical_collapse(act, len(v_elems))
    alg = validate_algebra(
        add, h_index[ops.h_zero], mul, v_index[ops.v_one], act, ins
    )
    pi_h = tuple(p[1] for p in h_elems)
    pi_v = tuple(p[1] for p in v_elems)
    return WreathProduct(
        alg, outer, inner, tuple(h_elems), tuple(v_elems), h_index, v_index, pi_h, pi_v
    )


def wreath_generated(outer, inner, v_gens, h_gens=(), budget=20000):
    """The subalgebra of outer o inner generated by the given vertical pairs
    (and optional horizontal pairs), materialized as tables.

    Raises on collapse: two generated vertical pairs acting identically on the
    generated horizontal part would make the tables unfaithful.
    """
    ops = WreathOps(outer, inner)
    h_set = {ops.h_zero}
    h_set.update(h_gens)
    v_set = {ops.v_one}
    v_set.update(tuple((tuple(f), v) for f, v in v_gens))
    while True:
        new_h = set()
        new_v = set()
        for x in h_set:
            for y in h_set:
                z = ops.h_add(x, y)
                if z not in h_set:
                    new_h.add(z)
            for u in v_set:
                z = ops.act_(x, u)
                if z not in h_set:
                    new_h.add(z)
        for u in v_set:
            for w in v_set:
                z = ops.v_mul(u, w)
                if z not in v_set:
                    new_v.add(z)
            for x in h_set:
                z = ops.ins_(u, x)
                if z not in v_set:
                    new_v.add(z)
        if not new_h and not new_v:
            break
        h_set |= new_h
        v_set |= new_v
        if len(h_set) + len(v_set) > budget:
            raise BudgetError(
                "generated wreath exceeded budget",
                {"h": len(h_set), "v": len(v_set), "budget": budget},
            )
    h_elems = sorted(h_set)
    v_elems = sorted(v_set)
    h_index, v_index, add, mul, act, ins = _wreath_tables(ops, h_elems, v_elems)
    _check_no_vertical_collapse(act, len(v_elems))
    alg = validate_algebra(add, h_index[ops.h_zero], mul, v_index[ops.v_one], act, ins)
    pi_h = tuple(p[1] for p in h_elems)
    pi_v = tuple(p[1] for p in v_elems)
    return WreathProduct(
        alg, outer, inner, tuple(h_elems), tuple(v_elems), h_index, v_index, pi_h, pi_v
    )


def generated_subalgebra(alg, h_gens=(), v_gens=()):
    """Smallest index sets closed under add, mul, act and ins containing the
    generators plus zero and one, with the restricted tables.

    The restriction can lose faithfulness; validate separately if needed.
    """
    h_set = {alg.zero} | set(h_gens)
    v_set = {alg.one} | set(v_gens)
    changed = True
    while changed:
        changed = False
        for x in list(h_set):
            for y in list(h_set):
                if alg.add[x][y] not in h_set:
                    h_set.add(alg.add[x][y])
                    changed = True
            for u in list(v_set):
                if alg.act[x][u] not in h_set:
                    h_set.add(alg.act[x][u])
                    changed = True
        for u in list(v_set):
            for w in list(v_set):
                if alg.mul[u][w] not in v_set:
                    v_set.add(alg.mul[u][w])
                    changed = True
            for x in list(h_set):
                if alg.ins[u][x] not in v_set:
                    v_set.add(alg.ins[u][x])
                    changed = True
    h_embed = tuple(sorted(h_set))
    v_embed = tuple(sorted(v_set))
    h_index = {h: i for i, h in enumerate(h_embed)}
    v_index = {v: i for i, v in enumerate(v_embed)}
    add = [[h_index[alg.add[x][y]] for y in h_embed] for x in h_embed]
    mul = [[v_index[alg.mul[u][w]] for w in v_embed] for u in v_embed]
    act = [[h_index[alg.act[x][u]] for u in v_embed] for x in h_embed]
    ins = [[v_index[alg.ins[u][x]] for x in h_embed] for u in v_embed]
    sub = ForestAlgebra(
        h_size=len(h_embed),
        add=_freeze(add),
        zero=h_index[alg.zero],
        v_size=len(v_embed),
        mul=_freeze(mul),
        one=v_index[alg.one],
        act=_freeze(act),
        ins=_freeze(ins),
    )
    return sub, h_embed, v_embed


# ---------------------------------------------------------------------------
# Division and tm-division


@dataclass
class DivisionWitness:
    """target divides ambient: a subalgebra of the ambient (carriers) and a
    surjective pair of maps onto the target compatible with all operations."""

    h_carrier: tuple  # ambient H elements
    v_carrier: tuple  # ambient V elements
    h_map: dict  # ambient H element -> target H index
    v_map: dict  # ambient V element -> target V index


@dataclass
class TmDivisionWitness:
    """Transformation-monoid style division: a submonoid K of the ambient H,
    a surjective homomorphism psi onto the target H, and a chosen ambient
    vertical element hat(v) per target v with K.hat(v) in K and
    psi(k.hat(v)) = psi(k).v."""

    k_elements: tuple
    psi: dict
    hat: dict


@dataclass
class CheckReport:
    ok: bool
    violations: list = field(default_factory=list)

    def fail(self, clause, where):
        self.ok = False
        self.violations.append((clause, where))


def verify_division(target, ambient, w: DivisionWitness) -> CheckReport:
    rep = CheckReport(True)
    hc = list(w.h_carrier)
    vc = list(w.v_carrier)
    hset, vset = set(hc), set(vc)
    if ambient.h_zero not in hset:
        rep.fail("h-carrier-zero", ())
    if ambient.v_one not in vset:
        rep.fail("v-carrier-one", ())
    for x in hc:
        for y in hc:
            if ambient.h_add(x, y) not in hset:
                rep.fail("h-carrier-add-closed", (x, y))
        for u in vc:
            if ambient.act_(x, u) not in hset:
                rep.fail("h-carrier-act-closed", (x, u))
    for u in vc:
        for v in vc:
            if ambient.v_mul(u, v) not in vset:
                rep.fail("v-carrier-mul-closed", (u, v))
        for x in hc:
            if ambient.ins_(u, x) not in vset:
                rep.fail("v-carrier-ins-closed", (u, x))
    if not rep.ok:
        return rep
    hm, vm = w.h_map, w.v_map
    if set(hm) != hset or set(vm) != vset:
        rep.fail("map-domain", ())
        return rep
    if set(hm.values()) != set(range(target.h_size)):
        rep.fail("h-map-surjective", ())
    if set(vm.values()) != set(range(target.v_size)):
        rep.fail("v-map-surjective", ())
    if hm[ambient.h_zero] != target.zero:
        rep.fail("h-map-zero", ())
    if vm[ambient.v_one] != target.one:
        rep.fail("v-map-one", ())
    for x in hc:
        for y in hc:
            if hm[ambient.h_add(x, y)] != target.add[hm[x]][hm[y]]:
                rep.fail("h-map-add", (x, y))
        for u in vc:
            if hm[ambient.act_(x, u)] != target.act[hm[x]][vm[u]]:
                rep.fail("map-act", (x, u))
    for u in vc:
        for v in vc:
            if vm[ambient.v_mul(u, v)] != target.mul[vm[u]][vm[v]]:
                rep.fail("v-map-mul", (u, v))
        for x in hc:
            if vm[ambient.ins_(u, x)] != target.ins[vm[u]][hm[x]]:
                rep.fail("map-ins", (u, x))
    return rep


def verify_tm_division(target, ambient, w: TmDivisionWitness) -> CheckReport:
    """ambient may be a ForestAlgebra or a WreathOps (lazy wreath)."""
    rep = CheckReport(True)
    ks = list(w.k_elements)
    kset = set(ks)
    if ambient.h_zero not in kset:
        rep.fail("k-zero", ())
    for x in ks:
        for y in ks:
            if ambient.h_add(x, y) not in kset:
                rep.fail("k-add-closed", (x, y))
    if set(w.psi) != kset:
        rep.fail("psi-domain", ())
        return rep
    if set(w.psi.values()) != set(range(target.h_size)):
        rep.fail("psi-surjective", ())
    if not rep.ok:
        return rep
    if w.psi[ambient.h_zero] != target.zero:
        rep.fail("psi-zero", ())
    for x in ks:
        for y in ks:
            if w.psi[ambient.h_add(x, y)] != target.add[w.psi[x]][w.psi[y]]:
                rep.fail("psi-homomorphism", (x, y))
    if set(w.hat) != set(range(target.v_size)):
        rep.fail("hat-domain", ())
        return rep
    for v, vhat in w.hat.items():
        for k in ks:
            img = ambient.act_(k, vhat)
            if img not in kset:
                rep.fail("k-hat-closed", (k, v))
            elif w.psi[img] != target.act[w.psi[k]][v]:
                rep.fail("psi-equivariance", (k, v))
    return rep


def division_to_tm(target, ambient, w: DivisionWitness) -> TmDivisionWitness:
    """Forward direction of the equivalence of the two division notions:
    K is the horizontal carrier, psi the horizontal map, and hat(v) any
    carrier element mapping to v (smallest, for reproducibility)."""
    rep = verify_division(target, ambient, w)
    if not rep.ok:
        raise ValueError("invalid division witness: %r" % rep.violations[:3])
    hat = {}
    for u in sorted(w.v_carrier):
        v = w.v_map[u]
        hat.setdefault(v, u)
    return TmDivisionWitness(tuple(w.h_carrier), dict(w.h_map), hat)


def tm_to_division(target, ambient, w: TmDivisionWitness, budget=200000) -> DivisionWitness:
    """Backward direction, via the free algebra over one letter per target V
    element: delta sends the letter for v to hat(v), gamma sends it to v, and
    the joint reachable image of (delta, gamma) gives the carrier and maps."""
    rep = verify_tm_division(target, ambient, w)
    if not rep.ok:
        raise ValueError("invalid tm-division witness: %r" % rep.violations[:3])
    # joint closure of (delta, gamma) values over the synthetic alphabet
    h_pairs = {(ambient.h_zero, target.zero)}
    v_pairs = {(ambient.v_one, target.one)}
    gens = [(w.hat[v], v) for v in sorted(w.hat)]
    changed = True
    steps = 0
    while changed:
        changed = False
        for u, gu in list(v_pairs):
            for du, gv in gens:
                z = (ambient.v_mul(u, du), target.mul[gu][gv])
                if z not in v_pairs:
                    v_pairs.add(z)
                    changed = True
            for x, gx in list(h_pairs):
                z = (ambient.ins_(u, x), target.ins[gu][gx])
                if z not in v_pairs:
                    v_pairs.add(z)
                    changed = True
        for x, gx in list(h_pairs):
            for u, gu in list(v_pairs):
                z = (ambient.act_(x, u), target.act[gx][gu])
                if z not in h_pairs:
                    h_pairs.add(z)
                    changed = True
            for y, gy in list(h_pairs):
                z = (ambient.h_add(x, y), target.add[gx][gy])
                if z not in h_pairs:
                    h_pairs.add(z)
                    changed = True
        steps += 1
        if len(h_pairs) + len(v_pairs) > budget:
            raise BudgetError("tm_to_division closure exceeded budget")
    h_map, v_map = {}, {}
    for x, gx in h_pairs:
        if h_map.setdefault(x, gx) != gx:
            raise ValueError("delta image does not determine the target value at %r" % (x,))
    for u, gu in v_pairs:
        if v_map.setdefault(u, gu) != gu:
            raise ValueError("delta image does not determine the target value at %r" % (u,))
    return DivisionWitness(
        tuple(sorted(h_map)), tuple(sorted(v_map)), h_map, v_map
    )


def search_division(target, ambient, h_cap=8, v_cap=12, max_gens=3):
    """Exhaustive search for a division witness of target into ambient.

    Enumerates vertical generator subsets of the ambient (by size, then
    lexicographically) and all assignments of target V elements to the
    generators; images of all other elements are forced by the closure
    derivations.  Returns the first verified witness or None.
    """
    if ambient.h_size > h_cap or ambient.v_size > v_cap:
        raise BudgetError(
            "ambient too large for search (|H|=%d cap %d, |V|=%d cap %d)"
            % (ambient.h_size, h_cap, ambient.v_size, v_cap)
        )
    v_all = list(range(ambient.v_size))
    for size in range(0, min(max_gens, ambient.v_size) + 1):
        for gens in itertools.combinations(v_all, size):
            sub, h_embed, v_embed = generated_subalgebra(ambient, (), gens)
            # derivations: rebuild closure order to force images
            for assign in itertools.product(range(target.v_size), repeat=len(gens)):
                w = _try_assignment(target, ambient, gens, assign, h_embed, v_embed)
                if w is not None:
                    rep = verify_division(target, ambient, w)
                    if rep.ok:
                        return w
    return None


def _try_assignment(target, ambient, gens, assign, h_embed, v_embed):
    v_map = {ambient.one: target.one}
    for g, tv in zip(gens, assign):
        if v_map.setdefault(g, tv) != tv:
            return None
    h_map = {ambient.zero: target.zero}

    conflict = False

    def put(m, key, val):
        nonlocal conflict
        prev = m.get(key)
        if prev is None:
            m[key] = val
            return True
        if prev != val:
            conflict = True
        return False

    # propagate forced images until stable; a conflict means the generator
    # assignment does not extend to a morphism of the subalgebra
    changed = True
    while changed and not conflict:
        changed = False
        for x in list(h_map):
            for y in list(h_map):
                changed |= put(h_map, ambient.add[x][y], target.add[h_map[x]][h_map[y]])
            for u in list(v_map):
                changed |= put(h_map, ambient.act[x][u], target.act[h_map[x]][v_map[u]])
                changed |= put(v_map, ambient.ins[u][x], target.ins[v_map[u]][h_map[x]])
        for u in list(v_map):
            for v in list(v_map):
                changed |= put(v_map, ambient.mul[u][v], target.mul[v_map[u]][v_map[v]])
    if conflict:
        return None
    if set(h_map) != set(h_embed) or set(v_map) != set(v_embed):
        return None
    if set(h_map.values()) != set(range(target.h_size)):
        return None
    if set(v_map.values()) != set(range(target.v_size)):
        return None
    return DivisionWitness(tuple(h_embed), tuple(v_embed), h_map, v_map)
