import json
import math
import subprocess
import sys

import pytest

from flowdesign import Instance, Solution, parse_instance, read_solution, write_instance, write_solution
from flowdesign.cli import main
from flowdesign.pathdesign import solve_variable_cost_only, to_solution


def write_file(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def diamond_unbounded(tmp_path):
    inst = Instance(
        n=3, arcs=((0, 1), (1, 2), (0, 2)), s=0, t=2, r=1.0,
        c=(1.0, 2.0, 5.0), gamma=(0.0, 0.0, 0.0), ybar=(math.inf,) * 3, B=1.0,
    )
    return inst, write_file(tmp_path, "inst.json", write_instance(inst))


def bounded_series(tmp_path, B):
    inst = Instance(
        n=3, arcs=((0, 1), (1, 2)), s=0, t=2, r=1.0,
        c=(1.0, 1.0), gamma=(0.5, 0.5), ybar=(1.0, 1.0), B=B,
    )
    return inst, write_file(tmp_path, "inst.json", write_instance(inst))


class TestSolve:
    def test_auto_mode_on_free_install_costs(self, tmp_path, capsys):
        inst, path = diamond_unbounded(tmp_path)
        assert main(["solve", "--in", path]) == 0
        cap = capsys.readouterr()
        assert "mode=path-exact" in cap.err
        got = read_solution(cap.out)
        want = to_solution(inst, solve_variable_cost_only(inst))
        assert got.cost == pytest.approx(want.cost, rel=1e-12)
        assert got.x == want.x

    def test_auto_mode_on_bounded_sp(self, tmp_path, capsys):
        _, path = bounded_series(tmp_path, B=3.0)
        assert main(["solve", "--in", path, "--eps", "0.5"]) == 0
        cap = capsys.readouterr()
        assert "mode=sp-fptas" in cap.err
        assert read_solution(cap.out).cost > 0.0

    def test_eps_out_of_range(self, tmp_path, capsys):
        _, path = diamond_unbounded(tmp_path)
        assert main(["solve", "--in", path, "--mode", "path-fptas", "--eps", "1.5"]) == 1
        assert "--eps" in capsys.readouterr().err

    def test_infeasible_exits_2(self, tmp_path, capsys):
        _, path = bounded_series(tmp_path, B=1.9)
        assert main(["solve", "--in", path]) == 2
        assert "infeasible" in capsys.readouterr().err

    def test_non_sp_bounded_exits_3(self, tmp_path, capsys):
        arcs = tuple((i, j) for i in range(4) for j in range(i + 1, 4))
        inst = Instance(
            n=4, arcs=arcs, s=0, t=3, r=1.0,
            c=(1.0,) * 6, gamma=(0.0,) * 6, ybar=(2.0,) * 6, B=1.0,
        )
        path = write_file(tmp_path, "k4.json", write_instance(inst))
        assert main(["solve", "--in", path]) == 3
        assert "unsupported" in capsys.readouterr().err

    def test_sp_exact_solves_knapsack_encoding(self, tmp_path, capsys):
        inst = Instance(
            n=2, arcs=((0, 1), (0, 1)), s=0, t=1, r=1.0,
            c=(0.0, 0.0), gamma=(1.0, 2.0), ybar=(3.0, 4.0), B=0.25,
        )
        path = write_file(tmp_path, "ks.json", write_instance(inst))
        assert main(["solve", "--in", path, "--mode", "sp-exact"]) == 0
        assert read_solution(capsys.readouterr().out).cost == 2.0

    def test_brute_mode_on_partition_instance(self, tmp_path, capsys):
        assert main(["gen", "--family", "partition", "--numbers", "1,1,2",
                     "--out", str(tmp_path / "p.json")]) == 0
        capsys.readouterr()
        assert main(["solve", "--in", str(tmp_path / "p.json"), "--mode", "brute"]) == 0
        assert read_solution(capsys.readouterr().out).cost == pytest.approx(23.0, rel=1e-9)

    def test_reads_stdin(self, tmp_path, capsys, monkeypatch):
        inst, _ = diamond_unbounded(tmp_path)
        import io

        monkeypatch.setattr(sys, "stdin", io.StringIO(write_instance(inst)))
        assert main(["solve", "--in", "-"]) == 0
        assert read_solution(capsys.readouterr().out).cost > 0.0


class TestVerify:
    def build(self, tmp_path, capsys):
        inst, path = diamond_unbounded(tmp_path)
        assert main(["solve", "--in", path, "--out", str(tmp_path / "sol.json")]) == 0
        capsys.readouterr()
        return inst, path, str(tmp_path / "sol.json")

    def test_roundtrip_feasible(self, tmp_path, capsys):
        _, path, sol_path = self.build(tmp_path, capsys)
        assert main(["verify", "--in", path, "--sol", sol_path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["feasible"] is True
        assert doc["reasons"] == []

    def test_tampered_solution_exits_2(self, tmp_path, capsys):
        _, path, sol_path = self.build(tmp_path, capsys)
        sol = read_solution((tmp_path / "sol.json").read_text())
        shrunk = Solution(
            x=sol.x,
            y=tuple(v * 0.5 for v in sol.y),
            cost=sol.cost,
            achievedR=sol.achievedR,
        )
        bad_path = write_file(tmp_path, "bad.json", write_solution(shrunk))
        assert main(["verify", "--in", path, "--sol", bad_path]) == 2
        doc = json.loads(capsys.readouterr().out)
        assert doc["feasible"] is False
        # halving every conductance doubles the resistance past B = 1
        assert doc["achievedR"] > 1.0

    def test_arc_count_mismatch_is_usage_error(self, tmp_path, capsys):
        _, path, _ = self.build(tmp_path, capsys)
        lone = write_file(
            tmp_path, "lone.json",
            write_solution(Solution(x=(1,), y=(1.0,), cost=1.0, achievedR=1.0)),
        )
        assert main(["verify", "--in", path, "--sol", lone]) == 1


class TestResistance:
    def test_at_bounds(self, tmp_path, capsys):
        _, path = bounded_series(tmp_path, B=3.0)
        assert main(["resistance", "--in", path]) == 0
        assert json.loads(capsys.readouterr().out)["R"] == pytest.approx(2.0)

    def test_at_solution(self, tmp_path, capsys):
        inst, path = diamond_unbounded(tmp_path)
        sol = write_file(
            tmp_path, "sol.json",
            write_solution(Solution(x=(1, 1, 0), y=(2.0, 2.0, 0.0), cost=6.0, achievedR=1.0)),
        )
        assert main(["resistance", "--in", path, "--sol", sol]) == 0
        assert json.loads(capsys.readouterr().out)["R"] == pytest.approx(1.0)


class TestGen:
    def test_partition_sidecar(self, tmp_path):
        out = str(tmp_path / "p.json")
        assert main(["gen", "--family", "partition", "--numbers", "1 1 2", "--out", out]) == 0
        inst = parse_instance((tmp_path / "p.json").read_text())
        assert inst.m == 6
        meta = json.loads((tmp_path / "p.json.meta.json").read_text())
        assert meta["threshold"] == 24.0
        assert meta["numbers"] == [1, 1, 2]

    def test_partition_needs_numbers(self, capsys):
        assert main(["gen", "--family", "partition"]) == 1
        assert "--numbers" in capsys.readouterr().err

    def test_knapsack_rejects_zero_demand(self, capsys):
        assert main(["gen", "--family", "knapsack", "--numbers", "3,4;1,2;0"]) == 1
        capsys.readouterr()

    def test_knapsack_instance_roundtrips(self, tmp_path, capsys):
        out = str(tmp_path / "k.json")
        assert main(["gen", "--family", "knapsack", "--numbers", "3,4;1,2;4", "--out", out]) == 0
        capsys.readouterr()
        inst = parse_instance((tmp_path / "k.json").read_text())
        assert inst.B == pytest.approx(0.25)
        assert main(["solve", "--in", out, "--mode", "sp-exact"]) == 0
        assert read_solution(capsys.readouterr().out).cost == 2.0

    def test_steiner_meta(self, tmp_path):
        out = str(tmp_path / "st.json")
        assert main(["gen", "--family", "steiner", "--seed", "7", "--size", "5", "--out", out]) == 0
        inst = parse_instance((tmp_path / "st.json").read_text())
        meta = json.loads((tmp_path / "st.json.meta.json").read_text())
        assert inst.n == meta["n"] + 1
        assert len(meta["terminals"]) >= 2

    def test_random_sp_meta_on_stderr(self, capsys):
        assert main(["gen", "--family", "random-sp", "--seed", "3", "--size", "5"]) == 0
        cap = capsys.readouterr()
        parse_instance(cap.out)
        assert json.loads(cap.err)["seed"] == 3


class TestDeterminism:
    def test_identical_runs_identical_bytes(self, tmp_path, capsys):
        out = str(tmp_path / "g.json")
        assert main(["gen", "--family", "random-sp", "--seed", "11", "--size", "6", "--out", out]) == 0
        capsys.readouterr()
        outs = []
        for _ in range(2):
            assert main(["solve", "--in", out, "--eps", "0.25"]) == 0
            outs.append(capsys.readouterr().out)
        assert outs[0] == outs[1]


class TestArgparseEdges:
    def test_no_command_is_usage_error(self, capsys):
        assert main([]) == 1
        capsys.readouterr()

    def test_help_exits_zero(self, capsys):
        assert main(["-h"]) == 0
        capsys.readouterr()

    def test_missing_file_is_usage_error(self, capsys):
        assert main(["solve", "--in", "/nonexistent/inst.json"]) == 1
        assert "error" in capsys.readouterr().err


def test_console_script_installed(tmp_path):
    proc = subprocess.run(
        ["flowdesign", "gen", "--family", "partition", "--numbers", "1,1,2"],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    parse_instance(proc.stdout)
    assert json.loads(proc.stderr)["threshold"] == 24.0
