import pytest
from hypothesis import given, settings, strategies as st

from forestalg import terms
from forestalg.terms import (
    EMPTY,
    HOLE,
    Context,
    Forest,
    ParseError,
    Tree,
    UnknownLabelError,
    apply_context,
    compose,
    enumerate_contexts,
    enumerate_forests,
    make_alphabet,
    parse_context,
    parse_forest,
)

AB = make_alphabet("ab")
A = make_alphabet("a")


def f(text, alphabet=AB):
    return parse_forest(text, alphabet)


def c(text, alphabet=AB):
    return parse_context(text, alphabet)


# --- parsing ---------------------------------------------------------------


def test_parse_empty_forest():
    assert f("0") is EMPTY or f("0") == EMPTY
    assert f("0").is_empty


def test_parse_two_tree_forest_with_seven_nodes():
    s = f("a(b(a)+a+b)+a(b)")
    assert len(s.trees) == 2
    assert s.size == 7


def test_parse_syntax_error_position():
    with pytest.raises(ParseError):
        f("a(")
    with pytest.raises(ParseError):
        f("a+")
    with pytest.raises(ParseError):
        f("(a)")
    with pytest.raises(ParseError):
        f("a)b")


def test_parse_unknown_label():
    with pytest.raises(UnknownLabelError):
        f("a+c")


def test_zero_literal_restrictions():
    with pytest.raises(ParseError):
        f("0+a")
    with pytest.raises(ParseError):
        f("a+0")
    with pytest.raises(ParseError):
        f("0(a)")
    assert f("a(0)") == f("a")


def test_whitespace_insensitive():
    assert f(" a ( b ( a ) + a + b ) + a ( b ) ") == f("a(b(a)+a+b)+a(b)")


def test_parse_context_identity():
    assert c("[]").is_hole


def test_parse_context_example():
    p = c("a(b(a)+a+b)+a([])")
    assert p.size == 6
    assert apply_context(EMPTY, p) == f("a(b(a)+a+b)+a")


def test_parse_context_errors():
    with pytest.raises(ParseError):
        c("a+b")  # no hole
    with pytest.raises(ParseError):
        c("[]+[]")
    with pytest.raises(ParseError):
        c("a([]+[])")
    with pytest.raises(ParseError):
        f("a([])")  # hole not allowed in forests


def test_alphabet_validation():
    with pytest.raises(ValueError):
        make_alphabet(["0"])
    with pytest.raises(ValueError):
        make_alphabet(["a b"])
    with pytest.raises(ValueError):
        make_alphabet([])


# --- canonical forms --------------------------------------------------------


def test_canonical_quotients_sibling_order():
    # the two renderings of the running 7-node example
    assert f("a(b(a)+a+b)+a(b)") == f("a(b)+a(a+b(a)+b)")


def test_canonical_commutativity():
    assert f("b+a") == f("a+b")


def test_add_keeps_multiplicities():
    s = f("a") + f("a")
    assert s == f("a+a")
    assert s != f("a")


def test_add_unit_and_commutativity():
    s = f("a(b)")
    assert EMPTY + s == s
    assert f("a(b)") + f("b") == f("b") + f("a(b)")


def test_adjoin():
    assert EMPTY.adjoin("a") == f("a")
    assert f("b").adjoin("a") == f("a(b)")
    assert f("a+b").adjoin("b") == f("b(a+b)")


def test_apply_context_examples():
    assert apply_context(f("b"), c("a([])")) == f("a(b)")
    assert apply_context(f("b+b"), c("a([]+c)+d", make_alphabet("abcd"))) == f(
        "a(b+b+c)+d", make_alphabet("abcd")
    )
    s = f("a(b)+a")
    assert apply_context(s, HOLE) == s


def test_compose_examples():
    p = c("a([])+b")
    assert compose(p, HOLE) == p
    assert compose(HOLE, c("a([]+c)", make_alphabet("ac"))) == c(
        "a([]+c)", make_alphabet("ac")
    )
    # p goes into q
    assert compose(c("a([])"), c("b([])")) == c("b(a([]))")


def test_render_round_trip_examples():
    for text in ["0", "a", "a+a", "a(a)", "a(b(a)+a+b)+a(b)"]:
        s = f(text)
        assert parse_forest(s.render(), AB) == s
    for text in ["[]", "a([])", "a(b(a)+a+b)+a([])", "a([]+b)+b(a)"]:
        p = c(text)
        assert parse_context(p.render(), AB) == p


# --- enumeration ------------------------------------------------------------


def test_enumerate_forests_single_letter():
    got = [s.render() for s in enumerate_forests(A, 2)]
    assert got == ["0", "a", "a+a", "a(a)"]


def test_enumerate_forests_two_letters_one_node():
    got = [s.render() for s in enumerate_forests(AB, 1)]
    assert got == ["0", "a", "b"]


def test_enumerate_forests_zero_bound():
    assert list(enumerate_forests(A, 0)) == [EMPTY]


def test_enumerate_no_duplicates_and_complete():
    seen = list(enumerate_forests(AB, 4))
    assert len(seen) == len(set(seen))
    # independent count: forests of size n over k labels satisfy the
    # multiset-of-trees recurrence; check small values computed by hand
    by_size = {}
    for s in seen:
        by_size[s.size] = by_size.get(s.size, 0) + 1
    assert by_size[0] == 1
    assert by_size[1] == 2
    # size 2: a+a, a+b, b+b, a(a), a(b), b(a), b(b)
    assert by_size[2] == 7


def test_enumerate_contexts_counts():
    got = list(enumerate_contexts(A, 1))
    assert [p.render() for p in got] == ["[]", "[]+a", "a([])"]
    got2 = list(enumerate_contexts(AB, 2))
    assert len(got2) == len(set(got2))
    assert HOLE in got2


def test_enumerate_contexts_complete_small():
    # every context of size <= 3 obtained by punching one leaf slot out of
    # an enumerated forest must occur
    found = set(enumerate_contexts(A, 3))

    def punch(forest):
        # the hole occupies a whole forest slot: either at this level, or
        # inside the child slot of one of the trees
        out = {Context(forest, None)}
        for i, t in enumerate(forest.trees):
            rest = Forest(forest.trees[:i] + forest.trees[i + 1 :])
            for q in punch(t.children):
                out.add(Context(rest, (t.label, q)))
        return out

    for s in enumerate_forests(A, 3):
        for p in punch(s):
            if p.size <= 3:
                assert p in found


# --- algebraic laws on enumerated terms -------------------------------------

F3 = None
C3 = None


def setup_module():
    global F3, C3
    F3 = list(enumerate_forests(AB, 3))
    C3 = list(enumerate_contexts(AB, 2))


def test_add_commutative_associative_enumerated():
    for s in F3:
        for t in F3:
            assert s + t == t + s
    small = [x for x in F3 if x.size <= 2]
    for s in small:
        for t in small:
            for u in small:
                assert (s + t) + u == s + (t + u)


def test_action_laws_enumerated():
    for s in F3:
        assert apply_context(s, HOLE) == s
    for p in C3:
        for q in C3:
            pq = compose(p, q)
            for s in F3:
                assert apply_context(s, pq) == apply_context(apply_context(s, p), q)


def test_compose_associative_enumerated():
    for p in C3:
        for q in C3:
            for r in C3:
                assert compose(compose(p, q), r) == compose(p, compose(q, r))


def test_parser_round_trip_enumerated():
    for s in F3:
        assert parse_forest(s.render(), AB) == s
    for p in enumerate_contexts(AB, 3):
        assert parse_context(p.render(), AB) == p


def test_canonical_idempotent_and_permutation_invariant():
    import random

    rng = random.Random(0)
    for s in F3:
        perm = list(s.trees)
        rng.shuffle(perm)
        assert Forest(perm) == s
        # rebuild each tree bottom-up with shuffled children
        def rebuild(t):
            kids = [rebuild(k) for k in t.children.trees]
            rng.shuffle(kids)
            return Tree(t.label, Forest(kids))

        assert Forest(rebuild(t) for t in perm) == s


# --- hypothesis: random terms round-trip ------------------------------------


@st.composite
def forests(draw, depth=3):
    if depth == 0:
        n = 0
    else:
        n = draw(st.integers(min_value=0, max_value=3))
    trees = []
    for _ in range(n):
        label = draw(st.sampled_from("ab"))
        children = draw(forests(depth=depth - 1)) if depth > 0 else EMPTY
        trees.append(Tree(label, children))
    return Forest(trees)


@settings(max_examples=150, deadline=None)
@given(forests())
def test_hypothesis_render_parse_round_trip(s):
    assert parse_forest(s.render(), AB) == s


@settings(max_examples=150, deadline=None)
@given(forests(), forests())
def test_hypothesis_add_commutes(s, t):
    assert s + t == t + s
