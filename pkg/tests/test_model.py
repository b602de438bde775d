import itertools
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qsha.benchmarks import NAMES, load_benchmark
from qsha.expr import Const, QuantizedVar, Var, parse_expression, unmark_quantized
from qsha.model import (
    And,
    Atom,
    Edge,
    GuardSyntaxError,
    ModelError,
    Or,
    atoms,
    compile_guard,
    eval_guard,
    format_guard,
    guard_to_dnf,
    level_crossing_matrix,
    parse_guard,
    quantize,
    validate,
)

ROBOT_GUARD = "((y >= 0.8) | (x >= 3.2)) | ((y <= -0.4) & (x <= 2.8))"


@pytest.fixture(scope="module")
def robot():
    return load_benchmark("robot")


class TestGuards:
    def test_parse_robot_guard(self):
        g = parse_guard(ROBOT_GUARD)
        assert g == Or(
            Or(Atom("y", ">=", Fraction("0.8")), Atom("x", ">=", Fraction("3.2"))),
            And(Atom("y", "<=", Fraction("-0.4")), Atom("x", "<=", Fraction("2.8"))),
        )

    def test_constants_are_exact(self):
        assert parse_guard("x >= 0.1").constant == Fraction(1, 10)

    def test_equality_is_a_closed_band(self):
        assert parse_guard("x == 550") == And(Atom("x", ">=", Fraction(550)), Atom("x", "<=", Fraction(550)))

    def test_flipped_comparison_and_named_constant(self):
        assert parse_guard("hot <= x", {"hot": 550.0}) == Atom("x", ">=", Fraction(550))

    def test_and_binds_tighter(self):
        g = parse_guard("a >= 1 | b >= 2 & c >= 3")
        assert isinstance(g, Or) and isinstance(g.right, And)

    @pytest.mark.parametrize("text", ["x >=", "x ! 1", "(x >= 1", "x >= 1 &", "1 >= 2", "x >= y", ""])
    def test_syntax_errors(self, text):
        with pytest.raises(GuardSyntaxError):
            parse_guard(text)

    def test_unknown_comparator(self):
        with pytest.raises(ModelError):
            Atom("x", "!=", Fraction(1))

    def test_negation_by_reversal(self):
        a = Atom("x", ">=", Fraction(1))
        assert a.negated() == Atom("x", "<", Fraction(1))

    def test_eval_examples(self):
        g = parse_guard(ROBOT_GUARD)
        assert eval_guard(g, {"x": 3.3, "y": 0.0, "theta": 0.0, "phi": 1.0})
        assert not eval_guard(g, {"x": 0.0, "y": 0.0, "theta": 0.0, "phi": 1.0})
        assert not eval_guard(parse_guard("x > 0"), {"x": 0.0})

    def test_eval_missing_variable(self):
        with pytest.raises(ModelError):
            eval_guard(parse_guard("x > 0"), {})

    def test_tolerant_and_closed_evaluation(self):
        assert eval_guard(parse_guard("x >= 1"), {"x": 1 - 1e-12}, tol=1e-9)
        assert not eval_guard(parse_guard("x > 1"), {"x": 1 + 1e-12}, tol=1e-9)
        assert eval_guard(parse_guard("x > 1"), {"x": 1.0}, tol=1e-9, closed=True)

    def test_dnf_examples(self):
        terms = guard_to_dnf(parse_guard(ROBOT_GUARD))
        assert [[(a.var, a.op, float(a.constant)) for a in t] for t in terms] == [
            [("y", ">=", 0.8)],
            [("x", ">=", 3.2)],
            [("y", "<=", -0.4), ("x", "<=", 2.8)],
        ]
        assert len(guard_to_dnf(parse_guard("x >= 3.2"))) == 1
        ab = "a >= 1 & b >= 1"
        assert len(guard_to_dnf(parse_guard(f"({ab}) | ({ab})"))) == 2

    def test_format_round_trip(self):
        for text in (ROBOT_GUARD, "x == 550 & c1 < 10", "a >= 1 & (b <= 2 | c > 3)", "a >= 1 | (b >= 2 | c >= 3)"):
            g = parse_guard(text)
            assert parse_guard(format_guard(g)) == g

    def test_compiled_guard(self):
        g = parse_guard(ROBOT_GUARD)
        pred = compile_guard(g, ["x", "y"])
        assert pred([3.3, 0.0]) and not pred([0.0, 0.0]) and pred([2.0, -0.5])


# random guards of depth <= 4 over three variables
_atom = st.builds(
    Atom,
    st.sampled_from(["x", "y", "z"]),
    st.sampled_from([">=", "<=", ">", "<"]),
    st.integers(-20, 20).map(lambda k: Fraction(k, 4)),
)
guards = st.recursive(_atom, lambda g: st.one_of(st.builds(And, g, g), st.builds(Or, g, g)), max_leaves=16)
valuations = st.fixed_dictionaries({v: st.integers(-24, 24).map(lambda k: k / 4) for v in "xyz"})


@given(guards, valuations)
@settings(max_examples=300, deadline=None)
def test_dnf_is_equivalent(g, v):
    via_dnf = any(all(eval_guard(a, v) for a in term) for term in guard_to_dnf(g))
    assert via_dnf == eval_guard(g, v)


@given(guards)
@settings(max_examples=200, deadline=None)
def test_guard_text_round_trip(g):
    assert parse_guard(format_guard(g)) == g


@given(g=guards)
@settings(max_examples=200, deadline=None)
def test_level_sets_are_atom_constants(robot, g):
    ha = replace(
        robot,
        variables=("x", "y", "z"),
        edges=(Edge("T1", "T2", g),),
    )
    lc = level_crossing_matrix(ha, "T1", 0)
    for v in "xyz":
        assert lc.per_variable_levels[v] == {float(a.constant) for a in atoms(g) if a.var == v}
        column = {level for row in lc.rows for level in row[v]}
        assert column == lc.per_variable_levels[v]


def test_dnf_truth_table_robot():
    # sample points realizing every truth assignment of the four atoms
    g = parse_guard(ROBOT_GUARD)
    for ys, xs in itertools.product([0.9, 0.0, -0.5], [3.3, 3.0, 2.0]):
        v = {"x": xs, "y": ys}
        assert any(all(eval_guard(a, v) for a in t) for t in guard_to_dnf(g)) == eval_guard(g, v)


class TestLevelCrossingMatrix:
    def test_robot_columns(self, robot):
        lc = level_crossing_matrix(robot, "T1", 0)
        assert lc.per_variable_levels == {
            "x": {3.2, 2.8},
            "y": {0.8, -0.4},
            "theta": frozenset(),
            "phi": frozenset(),
        }
        assert len(lc.rows) == 3

    def test_single_atom(self, robot):
        ha = replace(robot, edges=(Edge("T1", "T2", parse_guard("x >= 5")),))
        lc = level_crossing_matrix(ha, "T1", 0)
        assert lc.rows == ({"x": (5.0,), "y": (), "theta": (), "phi": ()},)

    def test_closed_band(self, robot):
        ha = replace(robot, edges=(Edge("T1", "T2", parse_guard("x >= 1 & x <= 2")),))
        lc = level_crossing_matrix(ha, "T1", 0)
        assert len(lc.rows) == 1 and lc.per_variable_levels["x"] == {1.0, 2.0}

    def test_wrong_source(self, robot):
        with pytest.raises(ModelError):
            level_crossing_matrix(robot, "T2", 0)


class TestValidate:
    def test_bundled_models_are_valid(self):
        for name in NAMES:
            report = validate(load_benchmark(name))
            assert report.ok, (name, report.errors)

    def test_robot_shape(self, robot):
        assert set(robot.locations) == {"T1", "T2"}
        assert robot.variables == ("x", "y", "theta", "phi")

    def broken_variants(self, robot):
        flows_without_y = {"T1": {k: v for k, v in robot.flows["T1"].items() if k != "y"}, "T2": robot.flows["T2"]}
        g = robot.edges[0].guard
        return {
            "edge-endpoint": replace(robot, edges=robot.edges + (Edge("T1", "T9", g),)),
            "missing-flow": replace(robot, flows=flows_without_y),
            "initial-location": replace(robot, initial_location="T7"),
            "initial-valuation": replace(robot, initial_valuation={"x": 0.0, "y": 0.0, "theta": 0.0}),
            "non-finite": replace(robot, initial_valuation={**robot.initial_valuation, "x": float("inf")}),
            "undeclared-in-guard": replace(robot, edges=(Edge("T1", "T2", parse_guard("z >= 1")),)),
            "undeclared-in-flow": replace(
                robot, flows={**robot.flows, "T2": {**robot.flows["T2"], "x": parse_expression("w + 1")}}
            ),
            "reset-target": replace(robot, edges=(Edge("T1", "T2", g, {"w": Const(0.0)}),)),
            "duplicate-location": replace(robot, locations=("T1", "T2", "T1")),
            "unknown-location-invariant": replace(robot, invariants={"T5": g}),
        }

    def test_broken_variants_rejected(self, robot):
        variants = self.broken_variants(robot)
        assert len(variants) == 10
        for name, ha in variants.items():
            assert not validate(ha).ok, name

    def test_exactly_one_error_examples(self, robot):
        variants = self.broken_variants(robot)
        assert len(validate(variants["edge-endpoint"]).errors) == 1
        assert len(validate(variants["missing-flow"]).errors) == 1

    def test_warnings(self, robot):
        ha = replace(robot, edges=robot.edges[:1])
        report = validate(ha)
        assert report.ok and any("no outgoing" in w for w in report.well_formedness_warnings)


class TestQuantize:
    def test_robot_flow(self, robot):
        q = quantize(robot)
        assert q.quantized_flows["T1"]["x"] == parse_expression("cos(q(theta))*30.0")
        assert len(q.quantized_variables) == len(robot.variables)
        assert q.base is robot

    def test_constant_flow_unchanged(self, robot):
        q = quantize(robot)
        assert q.quantized_flows["T1"]["phi"] == Const(-10.0)

    def test_all_reads_marked(self, robot):
        ha = replace(robot, flows={**robot.flows, "T1": {**robot.flows["T1"], "x": parse_expression("x + y")}})
        assert quantize(ha).quantized_flows["T1"]["x"] == parse_expression("q(x) + q(y)")

    def test_structure_preserving(self):
        for name in NAMES:
            ha = load_benchmark(name)
            q = quantize(ha)
            for loc in ha.locations:
                for v in ha.variables:
                    assert unmark_quantized(q.quantized_flows[loc][v]) == ha.flows[loc][v]

    def test_rejects_invalid(self, robot):
        with pytest.raises(ModelError):
            quantize(replace(robot, initial_location="nowhere"))

    def test_no_plain_reads_left(self, robot):
        from qsha.expr import walk

        q = quantize(robot)
        for flow in q.quantized_flows.values():
            for e in flow.values():
                assert not any(isinstance(n, Var) for n in walk(e))
                assert all(n.name in robot.variables for n in walk(e) if isinstance(n, QuantizedVar))
