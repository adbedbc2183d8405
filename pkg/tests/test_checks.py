from fractions import Fraction

import pytest

import helpers
from pgclkit import (
    ProbeFamily,
    VariantError,
    VariantSpec,
    WpConfig,
    check_equal,
    check_refines,
    check_variant,
    dyadic_grid,
    parse_expression,
    space_of,
)

F = Fraction


def test_dyadic_grid_contents():
    assert dyadic_grid() == helpers.EIGHTHS
    assert dyadic_grid(2) == (F(0), F(1, 2), F(1))


def test_default_probes_cover_states_and_guards():
    s = helpers.coin_space()
    p = helpers.prog("IF c1 = H THEN c2 := H ELSE c2 := T", s)
    fam = ProbeFamily.default(s, (p,))
    values = {probe.values for probe in fam}
    for i in range(s.size):
        point = tuple(F(int(j == i)) for j in range(s.size))
        assert point in values
    guard = tuple(F(int(st["c1"] == "H")) for st in s.states())
    assert guard in values
    assert len(fam) > s.size + 1


def test_over_vars_probes_ignore_scratch_variables():
    s = helpers.coin_space()
    fam = ProbeFamily.over_vars(s, ("c1",))
    for probe in fam:
        for st in s.states():
            twin = st.assign("c2", "H" if st["c2"] == "T" else "T")
            assert probe[st] == probe[twin]


def test_equal_is_reflexive_on_corpus():
    for p, space in helpers.corpus():
        fam = ProbeFamily.over_vars(space, space.names[:1], extra=2)
        assert check_equal(p, p, fam, space).holds


def test_split_then_coin_equals_bias_spec_per_grid_point():
    # scratch variables differ, so probes range over x only
    s = space_of(("x", (0, 1)), ("q", helpers.EIGHTHS), ("r", helpers.EIGHTHS))
    fam = ProbeFamily.over_vars(s, ("x",))
    for pv in dyadic_grid():
        left = helpers.prog(helpers.BIAS_SPEC, s, p=pv)
        right = helpers.prog(helpers.SPLIT_THEN_COIN, s, p=pv)
        v = check_equal(left, right, fam, s)
        assert v.holds
        assert v.residual == 0


def test_halving_loop_equals_bias_spec_exactly_on_dyadic_space():
    s = helpers.pqr_space()
    fam = ProbeFamily.over_vars(s, ("x",))
    left = helpers.prog(helpers.BIAS_SPEC, s)
    right = helpers.prog(helpers.HALVING_LOOP, s)
    v = check_equal(left, right, fam, s)
    assert v.status == "holds"
    assert v.residual == 0


def test_halving_loop_on_thirds_agrees_within_residual_only():
    # 1/3 never reaches an endpoint by doubling, so the fixpoint is a limit:
    # agreement is reported, but only up to the stopping residual
    s = helpers.pqr_space(grid=helpers.THIRDS)
    fam = ProbeFamily.over_vars(s, ("x",))
    left = helpers.prog(helpers.BIAS_SPEC, s)
    right = helpers.prog(helpers.HALVING_LOOP, s)
    v = check_equal(left, right, fam, s)
    assert v.status == "inconclusive"
    assert v.counterexample is None
    assert 0 < v.residual <= 2 * F(1, 2**40)
    assert "within loop residual" in v.detail


def test_unequal_biases_are_refuted():
    s = helpers.bit_space()
    left = helpers.prog("x :in 1 <1/4> 0", s)
    right = helpers.prog("x :in 1 <1/2> 0", s)
    v = check_equal(left, right, ProbeFamily.default(s))
    assert v.status == "fails"
    assert v.counterexample is not None
    assert v.counterexample.lhs != v.counterexample.rhs


def test_endpoint_bias_equals_plain_assignment_behind_assert():
    grid = helpers.EIGHTHS
    s = space_of(("x", (0, 1)), ("p", grid))
    gate = "{p = 0 | p = 1}; "
    left = helpers.prog(gate + "x :in 1 <p> 0", s)
    right = helpers.prog(gate + "x := p", s)
    assert check_equal(left, right, ProbeFamily.default(s, (left, right)), s).holds


def test_constrained_split_refines_free_split():
    s = space_of(
        ("p", (0, F(1, 2), 1)), ("q", (0, F(1, 2), 1)), ("r", (0, F(1, 2), 1))
    )
    spec = helpers.prog("q,r :suchthat (q+r)/2 = p", s)
    impl = helpers.prog("q,r :suchthat (q+r)/2 = p & (q = 0 | r = 1)", s)
    fam = ProbeFamily.default(s, (spec, impl))
    assert check_refines(spec, impl, fam, s).holds
    # the converse direction fails: the free split can do strictly worse
    v = check_refines(impl, spec, fam, s)
    assert v.status == "fails"


def test_refinement_of_choice_to_branch():
    s = helpers.bit_space()
    spec = helpers.prog("x :in {0, 1}", s)
    impl = helpers.prog("x := 0", s)
    assert check_refines(spec, impl, ProbeFamily.default(s), s).holds
    v = check_refines(impl, helpers.prog("x := 1", s), ProbeFamily.default(s), s)
    assert v.status == "fails"


def test_loop_budget_turns_into_inconclusive():
    s = space_of(("c", ("H", "T")))
    loop = helpers.prog("WHILE c = H DO c :in H <1/2> T OD", s)
    v = check_equal(loop, helpers.prog("c := T", s), ProbeFamily.default(s),
                    s, cfg=WpConfig(max_iters=5))
    assert v.status == "inconclusive"
    assert "loop budget exhausted" in v.detail


def variant(space, text, bound, eps):
    return VariantSpec(parse_expression(text, space), bound, F(eps))


def test_coin_loop_variant_holds():
    s = space_of(("c", ("H", "T")))
    loop = helpers.prog("WHILE c = H DO c :in H <1/2> T OD", s)
    v = check_variant(loop, variant(s, "[c = H]", 1, "1/2"), s)
    assert v.holds


def test_halving_loop_variant_holds():
    s = helpers.pqr_space()
    loop = helpers.prog(f"WHILE 0 < p & p < 1 DO {helpers.HALVING_BODY} OD", s)
    v = check_variant(loop, variant(s, "[0 < p & p < 1]", 1, "1/2"), s)
    assert v.holds


def test_while_true_skip_variant_fails():
    s = space_of(("c", ("H", "T")))
    loop = helpers.prog("WHILE true DO SKIP OD", s)
    v = check_variant(loop, variant(s, "1", 1, "1/2"), s)
    assert v.status == "fails"
    assert "decrease" in v.detail


def test_variant_must_be_natural_and_bounded():
    s = space_of(("x", (0, 1, 2, 3)), ("p", helpers.EIGHTHS))
    loop = helpers.prog("WHILE x > 0 DO x := x - 1 OD", s)
    with pytest.raises(VariantError):
        check_variant(loop, variant(s, "p", 3, "1/2"), s)
    v = check_variant(loop, variant(s, "x", 1, "1/2"), s)
    assert v.status == "fails"
    assert "bound" in v.detail
    assert check_variant(loop, variant(s, "x", 3, "1/2"), s).holds


def test_variant_requires_boolean_loop():
    s = space_of(("c", ("H", "T")), ("p", (0, F(1, 2), 1)))
    with pytest.raises(VariantError):
        check_variant(helpers.prog("SKIP", s), variant(s, "1", 1, "1/2"), s)
    loop = helpers.prog("WHILE p DO SKIP OD", s)
    with pytest.raises(VariantError):
        check_variant(loop, variant(s, "1", 1, "1/2"), s)


def test_vacuous_guard_holds():
    s = space_of(("c", ("H", "T")))
    loop = helpers.prog("WHILE c != c DO SKIP OD", s)
    v = check_variant(loop, variant(s, "1", 1, "1/2"), s)
    assert v.holds
    assert "nowhere satisfied" in v.detail


def test_epsilon_sharpness():
    # the coin loop makes progress with probability exactly 1/2
    s = space_of(("c", ("H", "T")))
    loop = helpers.prog("WHILE c = H DO c :in H <3/8> T OD", s)
    assert check_variant(loop, variant(s, "[c = H]", 1, "5/8"), s).holds
    v = check_variant(loop, variant(s, "[c = H]", 1, "3/4"), s)
    assert v.status == "fails"
