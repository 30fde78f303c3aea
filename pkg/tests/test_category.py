import pytest

from forestalg import samples
from forestalg.category import (
    CategoryLawError,
    DiagramError,
    _Enumerator,
    brute_force_global_ic,
    canonical_flat_cover,
    category_from_json,
    category_to_json,
    check_derived_identities,
    check_identities,
    diagram_rootsum,
    diagram_support,
    dnode,
    eval_context_diagram,
    eval_forest_diagram,
    eval_forest_diagram_alt,
    hleaf,
    oleaf,
    one_object_category,
    validate_category,
    verify_covering,
)


def or_cat():
    return one_object_category(samples.flat_or())


def z2_cat():
    return one_object_category(samples.flat_z2())


# --- validation ---------------------------------------------------------------


def test_one_object_category_from_flat_or_is_valid():
    cat = or_cat()
    assert cat.obj_size == 1
    assert cat.harr_size == 2 and cat.arr_size == 2


def test_one_object_category_matches_algebra_tables():
    alg = samples.flat_trunc3()
    cat = one_object_category(alg)
    for h in range(alg.h_size):
        for v in range(alg.v_size):
            assert cat.act[(h, v)] == alg.act[h][v]
            assert cat.ins[(v, h)] == alg.ins[v][h]


def test_hand_built_categories_validate():
    samples.interval_category()
    samples.z2_fiber_category()


def test_broken_composition_rejected():
    cat = samples.interval_category()
    bad = dict(cat.comp)
    bad[(0, 2)] = 0  # id0 . u = id0 breaks endpoints
    with pytest.raises(CategoryLawError):
        validate_category(
            type(cat)(
                **{
                    **cat.__dict__,
                    "comp": bad,
                }
            )
        )


def test_json_round_trip():
    for cat in [or_cat(), samples.interval_category(), samples.z2_fiber_category()]:
        again = category_from_json(category_to_json(cat))
        assert again == cat


# --- diagram evaluation ---------------------------------------------------------


def test_single_leaf_evaluates_to_itself():
    cat = or_cat()
    for c in range(cat.harr_size):
        assert eval_forest_diagram(cat, (hleaf(c),)) == c


def test_empty_diagram_evaluates_to_identity():
    cat = or_cat()
    assert eval_forest_diagram(cat, ()) == cat.harr_one


def test_support_and_rootsum():
    cat = samples.interval_category()
    d = (dnode(2, (hleaf(0),)), hleaf(1))  # u over e0, plus e1
    assert diagram_support(cat, d) == frozenset({("a", 2), ("h", 0), ("h", 1)})
    assert diagram_rootsum(cat, d) == 1
    assert eval_forest_diagram(cat, d) == 1


def test_endpoint_mismatch_raises():
    cat = samples.interval_category()
    with pytest.raises(DiagramError):
        eval_forest_diagram(cat, (dnode(1, (hleaf(0),)),))  # id1 over e0


def test_figure_shaped_diagram_two_parses_agree():
    # a two-tree diagram with nested structure, one tree carrying siblings
    cat = or_cat()
    d = (
        dnode(1, (hleaf(1), dnode(1, (hleaf(0), hleaf(1))))),
        hleaf(0),
    )
    assert eval_forest_diagram(cat, d) == eval_forest_diagram_alt(cat, d)


def test_parse_invariance_enumerated():
    for cat in [or_cat(), samples.interval_category(), one_object_category(samples.flat_max3())]:
        enum = _Enumerator(cat)
        for n in range(0, 5):
            for forest, _, _ in enum.forests_exact(n):
                assert eval_forest_diagram(cat, forest) == eval_forest_diagram_alt(cat, forest)


def test_context_diagram_evaluation():
    cat = samples.interval_category()
    # hole of object 0 capped by u, beside e1: arrow 0 -> 1
    d = (dnode(2, (oleaf(0),)), hleaf(1))
    arrow, start = eval_context_diagram(cat, d)
    assert start == 0
    assert cat.arr_start[arrow] == 0 and cat.arr_end[arrow] == 1
    # plugging e0 into the hole must equal evaluating the plugged diagram
    plugged = (dnode(2, (hleaf(0),)), hleaf(1))
    assert cat.act[(0, arrow)] == eval_forest_diagram(cat, plugged)


def test_context_diagram_identity():
    cat = or_cat()
    arrow, start = eval_context_diagram(cat, (oleaf(0),))
    assert arrow == cat.identity[0] and start == 0


# --- identities -------------------------------------------------------------------


def test_identities_flat_or():
    rep = check_identities(or_cat())
    assert rep.objects_ic and rep.all_hold()


def test_identities_flat_z2_idempotence_fails():
    rep = check_identities(z2_cat())
    assert rep.objects_ic
    assert rep.horizontal_idempotence == (1,)
    assert not rep.all_hold()


def test_identities_interval_category():
    assert check_identities(samples.interval_category()).all_hold()


def test_identities_z2_fiber_fails():
    rep = check_identities(samples.z2_fiber_category())
    assert rep.objects_ic
    assert rep.horizontal_idempotence is not None


def test_derived_identities_flat_or():
    assert check_derived_identities(or_cat()).all_hold()


def test_derived_identities_no_precondition():
    # a category failing the three identities may still be probed
    rep = check_derived_identities(z2_cat())
    assert rep is not None


def test_derived_identities_transfer_on_two_object_category():
    rep = check_derived_identities(samples.interval_category(), transfer_bound=4)
    assert rep.horizontal_transfer is None
    rep2 = check_derived_identities(samples.z2_fiber_category(), transfer_bound=4)
    # the fiber category fails global ic; some derived identity must fail too
    assert not rep2.all_hold()


# --- brute force -------------------------------------------------------------------


def test_brute_force_flat_or_none():
    assert brute_force_global_ic(or_cat(), 4) is None


def test_brute_force_flat_z2_witness():
    got = brute_force_global_ic(z2_cat(), 4)
    assert got is not None
    d1, d2, supp, rootsum, v1, v2 = got
    assert v1 != v2
    cat = z2_cat()
    assert diagram_support(cat, d1) == diagram_support(cat, d2) == supp
    assert diagram_rootsum(cat, d1) == diagram_rootsum(cat, d2) == rootsum
    assert eval_forest_diagram(cat, d1) == v1
    assert eval_forest_diagram(cat, d2) == v2


def test_brute_force_bound_one_none():
    for cat in [or_cat(), z2_cat(), samples.z2_fiber_category()]:
        assert brute_force_global_ic(cat, 1) is None


def test_brute_force_z2_fiber_witness():
    assert brute_force_global_ic(samples.z2_fiber_category(), 4) is not None


# --- canonical cover ----------------------------------------------------------------


def test_canonical_cover_flat_or_verifies():
    cat = or_cat()
    cov, stats = canonical_flat_cover(cat)
    assert stats["forest_pairs"] > 0
    rep = verify_covering(cat, cov.algebra, cov)
    assert rep.ok, rep.violations[:5]


def test_canonical_cover_flat_z2_injectivity_fails():
    cat = z2_cat()
    cov, _ = canonical_flat_cover(cat)
    rep = verify_covering(cat, cov.algebra, cov)
    assert not rep.ok
    assert any(clause.startswith("injectivity") for clause, _ in rep.violations)


def test_canonical_cover_interval_verifies():
    cat = samples.interval_category()
    cov, _ = canonical_flat_cover(cat)
    assert verify_covering(cat, cov.algebra, cov).ok


def test_canonical_cover_fiber_fails():
    cat = samples.z2_fiber_category()
    cov, _ = canonical_flat_cover(cat)
    rep = verify_covering(cat, cov.algebra, cov)
    assert not rep.ok
    assert any(clause.startswith("injectivity") for clause, _ in rep.violations)


def test_empty_cover_rejected():
    from forestalg.category import Covering

    cat = or_cat()
    cov, _ = canonical_flat_cover(cat)
    broken = Covering(cov.algebra, (frozenset(),) * cat.harr_size, cov.arrow_cover)
    rep = verify_covering(cat, cov.algebra, broken)
    assert not rep.ok
    assert rep.violations[0][0] == "half-cover-nonempty"


# --- the soundness chain on a small suite ----------------------------------------------


def test_soundness_chain_small():
    suite = [
        or_cat(),
        z2_cat(),
        one_object_category(samples.flat_max3()),
        one_object_category(samples.flat_trunc3()),
        samples.interval_category(),
        samples.z2_fiber_category(),
    ]
    for cat in suite:
        idr = check_identities(cat)
        witness = brute_force_global_ic(cat, 5)
        if idr.all_hold():
            assert check_derived_identities(cat).all_hold()
            assert witness is None
        else:
            assert brute_force_global_ic(cat, 6) is not None
