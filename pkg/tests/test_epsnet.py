import math

from polyguard.arrangement import build_complex
from polyguard.epsnet import extract_net, greedy_size_bound, net_is_valid
from polyguard.geom import RAT, PolygonWithHoles
from polyguard.harness import verify
from polyguard.solver import FractionalSolution, SolveParams, solve

P = lambda x, y: (RAT(x), RAT(y))
HALF = RAT(1, 2)

SQUARE = PolygonWithHoles([P(0, 0), P(4, 0), P(4, 4), P(0, 4)])
LSHAPE = PolygonWithHoles([P(0, 0), P(2, 0), P(2, 1), P(1, 1), P(1, 2), P(0, 2)])


class TestShortCircuit:
    def test_ten_copies_single_point(self):
        frac = FractionalSolution([P(2, 2)] * 10, 10)
        assert frac.total_measure() == 1
        net = extract_net(SQUARE, frac)
        assert net == [P(2, 2)]

    def test_empty_support(self):
        assert extract_net(SQUARE, FractionalSolution([], 5)) == []


class TestGreedyHitting:
    def test_disjoint_labels_force_both(self):
        a, b = (RAT(1, 4), RAT(7, 4)), (RAT(7, 4), RAT(1, 4))
        frac = FractionalSolution([a, b], 1)
        net = extract_net(LSHAPE, frac)
        # two heavy cells carry disjoint single-point labels
        assert set(net) == {a, b}
        assert net_is_valid(LSHAPE, frac, net)

    def test_solver_output_hits_everything(self):
        params = SolveParams(HALF, RAT(1, 10), HALF)
        frac, _ = solve(LSHAPE, params, opt_ub=1)
        net = extract_net(LSHAPE, frac)
        assert net_is_valid(LSHAPE, frac, net)
        c = build_complex(LSHAPE, frac.support)
        heavy = sum(1 for lab in c.labels if len(lab) >= frac.T)
        assert len(net) <= greedy_size_bound(frac, heavy) + 1e-9

    def test_coverage_transfer(self):
        params = SolveParams(HALF, RAT(1, 10), HALF)
        frac, _ = solve(LSHAPE, params, opt_ub=1)
        net = extract_net(LSHAPE, frac)
        assert verify(LSHAPE, net) >= 1 - params.delta
