from fractions import Fraction

import pytest

from cmvm.cse import solve, solve_stage2
from cmvm.fxp import QInterval, qint_add
from cmvm.graph import (
    AddNode,
    AdderGraph,
    DomainError,
    GraphBuilder,
    InputNode,
    OutputRef,
    evaluate,
    stats,
    validate,
)
from conftest import H264_M, qint_bits


def identity_graph():
    b = GraphBuilder()
    i0 = b.add_input(0, qint_bits(8))
    i1 = b.add_input(1, qint_bits(8))
    return AdderGraph(tuple(b.nodes), (OutputRef(i0, 0, 1), OutputRef(i1, 0, 1)))


class TestEvaluate:
    def test_identity(self):
        g = identity_graph()
        assert evaluate(g, (5, -3)) == [5, -3]

    def test_h264_ones(self):
        sol = solve_stage2(H264_M, [qint_bits(8)] * 4, [0] * 4, -1, weighted=False)
        assert evaluate(sol.graph, (1, 1, 1, 1)) == [4, 0, 0, 0]

    def test_zero_vector(self):
        sol = solve(H264_M, [qint_bits(8)] * 4, [0] * 4, -1)
        assert evaluate(sol.graph, (0, 0, 0, 0)) == [0, 0, 0, 0]

    def test_domain_error(self):
        g = identity_graph()
        with pytest.raises(DomainError):
            evaluate(g, (500, 0))
        with pytest.raises(DomainError):
            evaluate(g, (Fraction(1, 2), 0))  # off-grid

    def test_output_shift_and_sign(self):
        b = GraphBuilder()
        i0 = b.add_input(0, qint_bits(4))
        g = AdderGraph(tuple(b.nodes), (OutputRef(i0, 3, -1),))
        assert evaluate(g, (5,)) == [-40]

    def test_constant_zero_output(self):
        b = GraphBuilder()
        b.add_input(0, qint_bits(4))
        g = AdderGraph(tuple(b.nodes), (OutputRef(None, 0, 1),))
        assert evaluate(g, (3,)) == [0]


class TestStats:
    def test_h264_optimized(self):
        sol = solve_stage2(H264_M, [qint_bits(8)] * 4, [0] * 4, -1, weighted=False)
        s = stats(sol.graph)
        assert s.adders == 8
        assert s.depth == 2
        assert s.cost == sol.stats.cost > 0

    def test_empty_graph(self):
        g = AdderGraph((), ())
        assert stats(g) == type(stats(g))(0, 0, 0, 0)

    def test_depth_relative_to_inputs(self):
        b = GraphBuilder()
        i0 = b.add_input(0, qint_bits(4), depth=2)
        i1 = b.add_input(1, qint_bits(4), depth=2)
        n = b.add(i0, i1, 1, 0)
        g = AdderGraph(tuple(b.nodes), (OutputRef(n, 0, 1),))
        assert stats(g).depth == 1

    def test_negated_output_costs_extra(self):
        b = GraphBuilder()
        i0 = b.add_input(0, qint_bits(4))
        plain = AdderGraph(tuple(b.nodes), (OutputRef(i0, 0, 1),))
        neg = AdderGraph(tuple(b.nodes), (OutputRef(i0, 0, -1),))
        assert stats(neg).cost > stats(plain).cost
        assert stats(neg).adders == stats(plain).adders == 0

    def test_registers_estimate(self):
        sol = solve_stage2(H264_M, [qint_bits(8)] * 4, [0] * 4, -1, weighted=False)
        assert stats(sol.graph, pipeline_every=0).registers_estimate == 0
        assert stats(sol.graph, pipeline_every=1).registers_estimate > 0


class TestValidate:
    def test_well_formed(self):
        sol = solve(H264_M, [qint_bits(8)] * 4, [0] * 4, -1)
        assert validate(sol.graph) == []

    def test_forward_reference(self):
        b = GraphBuilder()
        i0 = b.add_input(0, qint_bits(4))
        n = b.add(i0, i0, 1, 1)
        node = b.nodes[n]
        bad = AddNode(2, i0, node.sign, node.shift, node.qint, node.depth, node.cost)
        g = AdderGraph((b.nodes[0], bad), (OutputRef(1, 0, 1),))
        assert any(v.startswith("operand-after-use") for v in validate(g))

    def test_stale_qint(self):
        b = GraphBuilder()
        i0 = b.add_input(0, qint_bits(4))
        n = b.add(i0, i0, 1, 1)
        node = b.nodes[n]
        bad = AddNode(node.a, node.b, node.sign, node.shift,
                      QInterval(0, 3, 0), node.depth, node.cost)
        g = AdderGraph((b.nodes[0], bad), (OutputRef(1, 0, 1),))
        assert any(v.startswith("qint-mismatch") for v in validate(g))

    def test_dead_node(self):
        b = GraphBuilder()
        i0 = b.add_input(0, qint_bits(4))
        b.add(i0, i0, 1, 1)  # never referenced by an output
        g = AdderGraph(tuple(b.nodes), (OutputRef(i0, 0, 1),))
        assert any(v.startswith("dead-node") for v in validate(g))

    def test_missing_input_index(self):
        b = GraphBuilder()
        b.add_input(1, qint_bits(4))
        g = AdderGraph(tuple(b.nodes), (OutputRef(0, 0, 1),))
        assert "missing-input" in validate(g)


def test_builder_derives_qint_depth_cost():
    b = GraphBuilder()
    i0 = b.add_input(0, qint_bits(8))
    i1 = b.add_input(1, qint_bits(8))
    n = b.add(i0, i1, -1, 2)
    node = b.nodes[n]
    assert node.qint == qint_add(qint_bits(8), qint_bits(8), -1, 2)
    assert node.depth == 1
    assert node.cost > 0
