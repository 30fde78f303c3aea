"""Depth-k node types of forests and the derived finite machinery.

The depth-k type of a node is the atom for k = 0, and otherwise the pair of
its label and the set of depth-(k-1) types of its children.  Two forests are
root-equivalent at depth k when their root type sets agree; that relation is
a forest algebra congruence, and the quotient is materialized here as tables
over the reachable root-type sets.  k-local testability is phrased over the
finer relation that also compares the type sets of all nodes.

Types are hash-consed in an append-only interner; ids are stable within a
session, and the canonical text rendering is what goes into transcripts.
Beware the growth rate: the number of depth-k types over an alphabet A obeys
N_k = |A| * 2^(N_{k-1}), so materialized quotients are only feasible for very
small k; the builders take budgets and fail loudly.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from . import terms
from .algebra import (
    BudgetError,
    Morphism,
    Recognizer,
    transformation_algebra,
)
from .terms import Context, Forest, enumerate_forests

__all__ = [
    "ATOM",
    "type_render",
    "type_depth",
    "type_label",
    "type_children",
    "truncate",
    "node_types",
    "root_types",
    "same_root_types",
    "klt_equivalent",
    "klt_signature",
    "KTypeAlgebra",
    "ktype_algebra",
    "LtMachine",
    "lt_recognizer",
    "classes_predicate",
    "lt_oracle",
]


class _Universe:
    """Append-only interner for depth-k types; concurrent reads are safe and
    interning is serialized through a lock."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries = [(0, None, frozenset())]  # id 0 is the depth-0 atom
        self._by_key = {(0, None, frozenset()): 0}
        self._trunc = {}
        self._render = {0: "*"}

    def intern(self, depth, label, child_ids):
        key = (depth, label, child_ids)
        tid = self._by_key.get(key)
        if tid is not None:
            return tid
        with self._lock:
            tid = self._by_key.get(key)
            if tid is None:
                tid = len(self._entries)
                self._entries.append(key)
                self._by_key[key] = tid
            return tid

    def entry(self, tid):
        return self._entries[tid]

    def truncate(self, tid, j):
        depth, label, children = self._entries[tid]
        if j > depth:
            raise ValueError("cannot truncate a depth-%d type to depth %d" % (depth, j))
        if j == depth:
            return tid
        if j == 0:
            return ATOM
        cached = self._trunc.get((tid, j))
        if cached is None:
            cached = self.intern(j, label, frozenset(self.truncate(c, j - 1) for c in children))
            self._trunc[(tid, j)] = cached
        return cached

    def render(self, tid):
        out = self._render.get(tid)
        if out is None:
            depth, label, children = self._entries[tid]
            inner = ",".join(sorted(self.render(c) for c in children))
            out = "%s{%s}" % (label, inner)
            self._render[tid] = out
        return out


_UNIVERSE = _Universe()
ATOM = 0


def type_render(tid):
    return _UNIVERSE.render(tid)


def type_depth(tid):
    return _UNIVERSE.entry(tid)[0]


def type_label(tid):
    return _UNIVERSE.entry(tid)[1]


def type_children(tid):
    """Ids of the child types one level down (empty for the atom)."""
    return _UNIVERSE.entry(tid)[2]


def truncate(tid, j):
    """Forget structure below depth j; idempotent, commutes with formation."""
    return _UNIVERSE.truncate(tid, j)


def _tree_type(tree, k, memo):
    if k == 0:
        return ATOM
    key = (tree, k)
    tid = memo.get(key)
    if tid is None:
        kids = frozenset(_tree_type(c, k - 1, memo) for c in tree.children.trees)
        tid = _UNIVERSE.intern(k, tree.label, kids)
        memo[key] = tid
    return tid


def root_types(s: Forest, k: int) -> frozenset:
    """The set of depth-k types of the root nodes of s."""
    memo = {}
    return frozenset(_tree_type(t, k, memo) for t in s.trees)


def node_types(s: Forest, k: int) -> frozenset:
    """The set of depth-k types over all nodes of s."""
    memo = {}
    out = set()

    def walk(forest):
        for t in forest.trees:
            out.add(_tree_type(t, k, memo))
            walk(t.children)

    walk(s)
    return frozenset(out)


def same_root_types(s, t, k):
    """Equality of root type sets at depth k (a congruence)."""
    return root_types(s, k) == root_types(t, k)


def klt_signature(s, k):
    """The invariant deciding membership in k-locally-testable languages:
    the node type set at depth k plus the root type set at depth k-1."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return (node_types(s, k), root_types(s, k - 1))


def klt_equivalent(s, t, k):
    return klt_signature(s, k) == klt_signature(t, k)


# ---------------------------------------------------------------------------
# Materialized quotient algebras


def _elem_order_key(x):
    # node-set members are type ids by default, arbitrary view keys otherwise
    if isinstance(x, int):
        return _UNIVERSE.render(x)
    return str(x)


def _state_order_key(state):
    if isinstance(state, frozenset):
        return (len(state), tuple(sorted(_elem_order_key(t) for t in state)))
    n, r = state
    return (_state_order_key(n), _state_order_key(r))


def _discover(initial, letter_step, alphabet, budget):
    """Close a set of states under pairwise addition and letter application;
    returns states in a deterministic order plus derivations."""
    states = {initial: ("empty",)}
    order = [initial]
    work = [initial]
    letters = sorted(alphabet)

    def admit(st, deriv):
        if st not in states:
            states[st] = deriv
            order.append(st)
            work.append(st)
            if len(states) > budget:
                raise BudgetError(
                    "state closure exceeded budget",
                    {"states": len(states), "budget": budget},
                )

    while work:
        st = work.pop()
        for a in letters:
            admit(letter_step(a, st), ("letter", a, st))
        # pairing each popped state against everything known so far covers
        # all pairs: later states pair with st when they are popped
        for other in list(order):
            admit(_state_add(st, other), ("union", st, other))
    ordered = sorted(states, key=_state_order_key)
    return ordered, states


def _state_add(x, y):
    if isinstance(x, frozenset):
        return x | y
    return (x[0] | y[0], x[1] | y[1])


@dataclass
class KTypeAlgebra:
    """The quotient algebra of root-type equivalence at depth k, with the
    projection morphism; H elements are reachable root-type sets and V
    elements are concrete transformation tables on them."""

    alphabet: frozenset
    k: int
    algebra: object
    morphism: Morphism
    states: tuple  # H index -> frozenset of type ids
    h_derivations: dict
    v_derivations: tuple

    def value_of(self, s: Forest) -> int:
        return self.morphism.eval_forest(s)

    def state_render(self, i):
        return "{%s}" % ",".join(sorted(_UNIVERSE.render(t) for t in self.states[i]))

    def realize_forest(self, i) -> Forest:
        """Replay the derivation of H element i into a concrete forest."""
        st = self.states[i]
        d = self.h_derivations[st]
        if d[0] == "empty":
            return terms.EMPTY
        if d[0] == "letter":
            _, a, prev = d
            return self.realize_forest(self.states.index(prev)).adjoin(a)
        _, x, y = d
        return self.realize_forest(self.states.index(x)) + self.realize_forest(
            self.states.index(y)
        )

    def realize_context(self, j) -> Context:
        d = self.v_derivations[j]
        if d[0] == "one":
            return terms.HOLE
        if d[0] == "letter":
            return Context(terms.EMPTY, (d[1], terms.HOLE))
        if d[0] == "addh":
            return Context(self.realize_forest(d[1]), None)
        _, i1, i2 = d
        return terms.compose(self.realize_context(i1), self.realize_context(i2))


def _apply_letter_root(a, state, k):
    if k == 0:
        return frozenset({ATOM})
    kids = frozenset(truncate(t, k - 1) for t in state)
    return frozenset({_UNIVERSE.intern(k, a, kids)})


def ktype_algebra(alphabet, k, budget=20000) -> KTypeAlgebra:
    """Materialize the depth-k root-type quotient as a forest algebra.

    H is the closure of the empty set under union and letter application;
    V is the transformation monoid generated by the letter maps and the
    union-with-state maps.  Budgets guard both closures.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    alphabet = terms.make_alphabet(alphabet)
    ordered, derivs = _discover(
        frozenset(), lambda a, st: _apply_letter_root(a, st, k), alphabet, budget
    )
    index = {st: i for i, st in enumerate(ordered)}
    n = len(ordered)
    add = [[index[x | y] for y in ordered] for x in ordered]
    letter_maps = {
        a: [index[_apply_letter_root(a, st, k)] for st in ordered] for a in sorted(alphabet)
    }
    alg, letters, v_derivs = transformation_algebra(add, index[frozenset()], letter_maps, budget)
    morphism = Morphism(alg, alphabet, letters)
    return KTypeAlgebra(alphabet, k, alg, morphism, tuple(ordered), dict(derivs), v_derivs)


@dataclass
class LtMachine:
    """Recognizer over the reachable k-local signatures (node type set plus
    root type set one level down); its languages are exactly the unions of
    signature classes selected by the predicate."""

    alphabet: frozenset
    k: int
    recognizer: Recognizer
    states: tuple  # H index -> (node type ids, root type ids at k-1)

    def signature_index(self, s: Forest) -> int:
        return self.recognizer.morphism.eval_forest(s)


def _apply_letter_sig(a, state, k, view=None):
    nodes, roots = state
    new_type = _UNIVERSE.intern(k, a, roots)
    new_roots = frozenset({truncate(new_type, k - 1)})
    key = new_type if view is None else view(new_type)
    if key is None:
        return (nodes, new_roots)
    return (nodes | frozenset({key}), new_roots)


def classes_predicate(representatives, k):
    """Accept exactly the k-local classes of the given representative forests."""
    sigs = {klt_signature(s, k) for s in representatives}

    def pred(nodes, roots):
        return (nodes, roots) in sigs

    return pred


def lt_recognizer(alphabet, k, accept, budget=4000, node_view=None) -> LtMachine:
    """Build a recognizer for a union of k-local classes.

    `accept` is either a predicate over (node type set, root type set at
    depth k-1) or an iterable of representative forests whose classes are
    accepted.

    The full signature closure explodes for k >= 2 over more than one letter
    (its states enumerate the reachable k-local classes themselves) and then
    this raises a BudgetError.  When the predicate factors through a coarser
    view of the node types, pass `node_view`: a function mapping a type id to
    a key, or to None to drop it; states then track the set of keys instead
    of the raw node set.  That machine is an exact quotient of the signature
    machine, so the recognized language is still a union of k-local classes,
    unchanged, provided `accept` reads the key set.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    alphabet = terms.make_alphabet(alphabet)
    if not callable(accept):
        reps = list(accept)
        if node_view is not None:
            raise ValueError("representative acceptSpec requires the default node view")
        accept = classes_predicate(reps, k)
    initial = (frozenset(), frozenset())
    step = lambda a, st: _apply_letter_sig(a, st, k, node_view)
    ordered, _ = _discover(initial, step, alphabet, budget)
    index = {st: i for i, st in enumerate(ordered)}
    add = [[index[_state_add(x, y)] for y in ordered] for x in ordered]
    letter_maps = {a: [index[step(a, st)] for st in ordered] for a in sorted(alphabet)}
    alg, letters, _ = transformation_algebra(add, index[initial], letter_maps, budget)
    morphism = Morphism(alg, alphabet, letters)
    accepted = frozenset(i for i, st in enumerate(ordered) if accept(st[0], st[1]))
    return LtMachine(alphabet, k, Recognizer(morphism, accepted), tuple(ordered))


def lt_oracle(rec: Recognizer, k: int, max_nodes: int):
    """Search enumerated forests for two k-locally-equivalent forests with
    different acceptance.  A witness refutes k-local testability of the
    recognized language conclusively; absence up to the bound is evidence
    only.  Returns (s, t) or None.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    groups = {}
    for s in enumerate_forests(rec.alphabet, max_nodes):
        sig = klt_signature(s, k)
        verdict = rec.accepts(s)
        prev = groups.get(sig)
        if prev is None:
            groups[sig] = (s, verdict)
        elif prev[1] != verdict:
            return (prev[0], s) if prev[1] else (s, prev[0])
    return None
