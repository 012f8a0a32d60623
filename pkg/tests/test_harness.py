import json
import subprocess
import sys

import pytest

from polyguard.cli import main as cli_main
from polyguard.errors import InvalidInputError
from polyguard.geom import RAT, PolygonWithHoles, is_convex_ring, ring_area
from polyguard.harness import (
    InstanceFile,
    SolveReport,
    gen_comb,
    gen_convex,
    gen_lshape,
    gen_orthogonal,
    generate,
    opt_bracket,
    verify,
)
from polyguard.render import render

P = lambda x, y: (RAT(x), RAT(y))
LSHAPE = gen_lshape().poly


class TestGenerators:
    def test_convex4_is_square(self):
        inst = gen_convex(4)
        assert ring_area(inst.poly.outer) == 16

    @pytest.mark.parametrize("m", [3, 5, 7, 8, 12])
    def test_convex_counts_and_convexity(self, m):
        inst = gen_convex(m)
        assert inst.poly.n == m
        assert is_convex_ring(inst.poly.outer)

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
    def test_comb_structure(self, k):
        inst = gen_comb(k)
        poly = inst.poly
        assert poly.n == 4 * k
        # corridor + k teeth of area 2 each
        assert poly.area() == (2 * k - 1) + 2 * k

    def test_comb_opt_is_k(self):
        for k in (3, 4, 5):
            br = opt_bracket(gen_comb(k).poly)
            assert (br.lower, br.upper) == (k, k)

    def test_lshape_and_convex_bracket(self):
        assert (opt_bracket(LSHAPE).lower, opt_bracket(LSHAPE).upper) == (1, 1)
        sq = gen_convex(4).poly
        assert (opt_bracket(sq).lower, opt_bracket(sq).upper) == (1, 1)

    def test_orthogonal_reproducible(self):
        a = gen_orthogonal(12, 1, seed=7)
        b = gen_orthogonal(12, 1, seed=7)
        assert a.poly == b.poly
        assert a.poly.n <= 12 and a.poly.h == 1

    def test_orthogonal_seed_variation(self):
        a = gen_orthogonal(16, 0, seed=1)
        b = gen_orthogonal(16, 0, seed=2)
        assert a.poly.n <= 16 and b.poly.n <= 16

    def test_generate_rejects_bad_sizes(self):
        with pytest.raises(InvalidInputError):
            generate("convex", m=2)
        with pytest.raises(InvalidInputError):
            generate("comb", k=0)
        with pytest.raises(InvalidInputError):
            generate("unknown")


class TestInstanceRoundTrip:
    def test_roundtrip_identity(self):
        for inst in (gen_convex(7), gen_comb(3), gen_orthogonal(14, 1, seed=3)):
            again = InstanceFile.loads(inst.dumps())
            assert again.poly == inst.poly
            assert again.name == inst.name
            assert InstanceFile.loads(again.dumps()).dumps() == again.dumps()

    def test_rational_string_coordinates(self):
        text = json.dumps(
            {"name": "t", "outer": [["0", "0"], ["7/2", "0"], ["7/2", "1/3"], ["0", "1/3"]]}
        )
        inst = InstanceFile.loads(text)
        assert inst.poly.area() == RAT(7, 2) * RAT(1, 3)

    def test_malformed_rejected(self):
        with pytest.raises(InvalidInputError):
            InstanceFile.loads("{not json")
        with pytest.raises(InvalidInputError):
            InstanceFile.loads(json.dumps({"name": "x"}))


class TestVerify:
    def test_convex_full(self):
        sq = gen_convex(4).poly
        assert verify(sq, [P(1, 1)]) == 1

    def test_lshape_partial(self):
        cov = verify(LSHAPE, [(RAT(1, 4), RAT(7, 4))])
        assert cov == 1 - (RAT(1, 2)) / 3

    def test_empty_guard_list(self):
        assert verify(LSHAPE, []) == 0

    def test_guard_outside_rejected(self):
        with pytest.raises(InvalidInputError):
            verify(LSHAPE, [P(5, 5)])


class TestRender:
    def test_deterministic(self):
        g = [(RAT(1, 4), RAT(7, 4))]
        assert render(LSHAPE, g) == render(LSHAPE, g)

    def test_contains_hatch_for_uncovered(self):
        svg = render(LSHAPE, [(RAT(1, 4), RAT(7, 4))])
        assert "hatch" in svg and "<circle" in svg
        full = render(LSHAPE, [(RAT(1, 2), RAT(1, 2))])
        assert "url(#hatch)" not in full.replace("<defs>", "", 1).split("</defs>")[1]


class TestCLI:
    def run_cli(self, *argv):
        return cli_main(list(argv))

    def test_gen_solve_verify_render(self, tmp_path):
        inst = tmp_path / "inst.json"
        rep = tmp_path / "rep.json"
        trace = tmp_path / "trace.jsonl"
        svg = tmp_path / "fig.svg"
        assert self.run_cli("gen", "--kind", "lshape", "--out", str(inst)) == 0
        assert (
            self.run_cli(
                "solve", "--in", str(inst), "--eps", "0.5", "--delta", "0.1",
                "--nu", "1/2", "--opt-ub", "1", "--trace", str(trace),
                "--out", str(rep),
            )
            == 0
        )
        report = SolveReport.loads(rep.read_text())
        assert report.algorithm == "mwu"
        assert RAT(report.coverage) >= RAT(9, 10)
        lines = [json.loads(l) for l in trace.read_text().splitlines()]
        assert len(lines) == report.iterations
        assert self.run_cli("verify", "--in", str(inst), "--report", str(rep), "--out", "-") == 0
        assert self.run_cli("render", "--in", str(inst), "--report", str(rep), "--out", str(svg)) == 0
        assert svg.read_text().startswith("<svg")

    def test_greedy_and_opt(self, tmp_path):
        inst = tmp_path / "inst.json"
        out = tmp_path / "g.json"
        assert self.run_cli("gen", "--kind", "comb", "--k", "3", "--out", str(inst)) == 0
        assert self.run_cli("opt", "--in", str(inst), "--out", str(out)) == 0
        d = json.loads(out.read_text())
        assert d["lower"] == 3 and d["upper"] == 3
        assert (
            self.run_cli("greedy", "--in", str(inst), "--delta", "1/50", "--nu", "1/2",
                         "--opt-ub", "3", "--out", str(out))
            == 0
        )
        rep = SolveReport.loads(out.read_text())
        assert RAT(rep.coverage) >= 1 - RAT(1, 50)

    def test_sample_command(self, tmp_path):
        inst = tmp_path / "inst.json"
        out = tmp_path / "s.json"
        assert self.run_cli("gen", "--kind", "lshape", "--out", str(inst)) == 0
        assert (
            self.run_cli("sample", "--in", str(inst), "--delta", "1/5", "--sigma", "1/5",
                         "--seed", "42", "--k", "1", "--out", str(out))
            == 0
        )
        rep = SolveReport.loads(out.read_text())
        assert rep.algorithm == "sample" and rep.guards

    def test_invalid_input_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        assert self.run_cli("solve", "--in", str(bad)) == 2
        missing = self.run_cli("verify", "--in", str(bad), "--report", str(bad))
        assert missing == 2

    def test_module_entrypoint(self, tmp_path):
        res = subprocess.run(
            [sys.executable, "-m", "polyguard.cli", "gen", "--kind", "convex", "--m", "5"],
            capture_output=True,
            text=True,
            cwd="/root/pkg",
        )
        assert res.returncode == 0
        assert json.loads(res.stdout)["name"] == "convex5"
