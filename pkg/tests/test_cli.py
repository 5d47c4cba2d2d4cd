import json

import pytest

from hyperperc.cli import main
from hyperperc.clusters import SiteConfig, SpinBoundary
from hyperperc.experiments import read_records
from hyperperc.planar_map import CombinatorialMap


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


@pytest.fixture
def ball44(tmp_path):
    path = str(tmp_path / "b44r1.map")
    assert main(["tiling-build", "--p", "4", "--q", "4", "--radius", "1",
                 "--out", path]) == 0
    return path


class TestTiling:
    def test_build_round_trips(self, tmp_path, capsys):
        path = str(tmp_path / "ball.map")
        assert main(["tiling-build", "--p", "4", "--q", "4",
                     "--radius", "1", "--out", path]) == 0
        with open(path, encoding="utf-8") as fh:
            m = CombinatorialMap.from_text(fh.read())
        m.validate()
        out = capsys.readouterr().out
        assert f"{m.n_vertices} vertices" in out
        assert f"{m.n_edges} edges" in out

    @pytest.mark.parametrize("degrees,word", [
        ("4,4,4,4", "Euclidean (gap 0)"),
        ("3,3,3,3,3,3", "Euclidean (gap 0)"),
        ("7,7,7", "Hyperbolic"),
        ("3,3,3,3,3,3,3", "Hyperbolic"),
        ("3,3,3,3,3", "Spherical"),
    ])
    def test_classify(self, degrees, word, capsys):
        assert main(["tiling-classify", "--degrees", degrees]) == 0
        assert word in capsys.readouterr().out

    def test_missing_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2


class TestSample:
    def test_deterministic_bytes(self, ball44, tmp_path):
        outs = []
        for name in ("a.txt", "b.txt"):
            path = str(tmp_path / name)
            assert main(["sample", "--model", "ising", "--map", ball44,
                         "--J", "0.6", "--boundary", "plus", "--seed", "11",
                         "--sweeps", "12", "--out", path]) == 0
            outs.append(read_bytes(path))
        assert outs[0] == outs[1]

    def test_reports_are_valid_json(self, ball44, tmp_path, capsys):
        assert main(["sample", "--model", "bernoulli", "--map", ball44,
                     "--p", "0.45", "--seed", "3"]) == 0
        text = capsys.readouterr().out
        payload = json.loads(text.splitlines()[-1])
        assert set(payload) == {"clusters", "phi_contours", "eta_contours"}

    def test_fk_and_xor_run(self, ball44, tmp_path):
        assert main(["sample", "--model", "fk", "--map", ball44,
                     "--p", "0.5", "--boundary", "wired", "--seed", "2",
                     "--out", str(tmp_path / "fk.txt")]) == 0
        assert main(["sample", "--model", "xor", "--map", ball44,
                     "--J", "0.4", "--seed", "2",
                     "--out", str(tmp_path / "x.txt")]) == 0

    @pytest.mark.parametrize("argv", [
        ["sample", "--model", "bernoulli", "--map", "MAP", "--seed", "1"],
        ["sample", "--model", "ising", "--map", "MAP", "--J", "0.3",
         "--boundary", "wired"],
        ["sample", "--model", "bernoulli", "--map", "MAP", "--p", "0.4",
         "--boundary", "plus"],
        ["sample", "--model", "fk", "--map", "MAP", "--p", "0.4",
         "--boundary", "minus"],
    ])
    def test_config_errors_exit_2(self, argv, ball44):
        argv = [ball44 if a == "MAP" else a for a in argv]
        assert main(argv) == 2

    def test_missing_map_file_exits_1(self, tmp_path):
        assert main(["sample", "--model", "bernoulli",
                     "--map", str(tmp_path / "nope.map"), "--p", "0.5"]) == 1


CONFIG = """
tiling = 3 7
radii = 1 2
model = Ising
grid = 0.2 0.8
boundary = plus
chains = 2
sweeps = 4
burn_in = 1
seed = 5
"""


class TestSweep:
    def test_byte_identical_reruns(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(CONFIG, encoding="utf-8")
        blobs = []
        for name in ("r1.jsonl", "r2.jsonl"):
            out = str(tmp_path / name)
            assert main(["sweep", "--config", str(cfg), "--out", out]) == 0
            blobs.append(read_bytes(out))
        assert blobs[0] == blobs[1]
        recs = read_records(str(tmp_path / "r1.jsonl"))
        assert len(recs) == 2 * 2 * 5
        assert capsys.readouterr().out.count("wrote 20 records") == 2

    def test_bad_config_exits_2(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("model = Ising\n", encoding="utf-8")
        assert main(["sweep", "--config", str(cfg),
                     "--out", str(tmp_path / "x.jsonl")]) == 2

    def test_missing_config_exits_1(self, tmp_path):
        assert main(["sweep", "--config", str(tmp_path / "none.cfg"),
                     "--out", str(tmp_path / "x.jsonl")]) == 1

    def test_budget_exits_3(self, tmp_path, monkeypatch):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(CONFIG, encoding="utf-8")
        monkeypatch.setenv("HYPERPERC_BUDGET", "1")
        assert main(["sweep", "--config", str(cfg),
                     "--out", str(tmp_path / "x.jsonl")]) == 3


class TestOracle:
    def test_k2_passes(self, capsys):
        assert main(["oracle", "--check", "coupling", "--graph", "k2",
                     "--p", "0.4"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "coupling" in out

    def test_wired_triangle_passes(self, capsys):
        assert main(["oracle", "--check", "coupling", "--graph", "triangle",
                     "--p", "0.7", "--boundary", "wired"]) == 0
        assert "PASS" in capsys.readouterr().out


class TestThresholds:
    def test_documented_values(self, capsys):
        assert main(["thresholds", "--pc", "0.2", "--d", "7"]) == 0
        out = capsys.readouterr().out
        assert "h_ising = 0.693147" in out
        assert "J_max = 0.099021" in out

    def test_wired_bound_and_window(self, capsys):
        assert main(["thresholds", "--pc", "0.5", "--d", "5",
                     "--pcw", "0.5"]) == 0
        out = capsys.readouterr().out
        assert "wired_lower_bound = 0.000000" in out
        assert "ising_window = (0.500000, 0.500000)" in out

    def test_no_pcw_prints_na(self, capsys):
        assert main(["thresholds", "--pc", "0.3", "--d", "4"]) == 0
        assert "wired_lower_bound = n/a" in capsys.readouterr().out


class TestRender:
    def test_svg_output_deterministic(self, ball44, tmp_path, capsys):
        with open(ball44, encoding="utf-8") as fh:
            m = CombinatorialMap.from_text(fh.read())
        states = bytearray(b"0" * m.n_vertices)
        states[0:1] = b"1"
        cfg_path = tmp_path / "omega.txt"
        cfg_path.write_text(
            f"sites {m.n_vertices} free\n{states.decode()}\n",
            encoding="utf-8")
        svgs = []
        for name in ("one.svg", "two.svg"):
            out = str(tmp_path / name)
            assert main(["render", "--map", ball44, "--config",
                         str(cfg_path), "--out", out]) == 0
            svgs.append(read_bytes(out))
        assert svgs[0] == svgs[1]
        assert svgs[0].lstrip().startswith(b"<svg")
        assert b"</svg>" in svgs[0]

    def test_single_layer_subset(self, ball44, tmp_path):
        with open(ball44, encoding="utf-8") as fh:
            m = CombinatorialMap.from_text(fh.read())
        cfg_path = tmp_path / "omega.txt"
        cfg_path.write_text(f"sites {m.n_vertices} free\n"
                            f"{'1' * m.n_vertices}\n", encoding="utf-8")
        out = str(tmp_path / "sites.svg")
        assert main(["render", "--map", ball44, "--config", str(cfg_path),
                     "--out", out, "--layers", "sites"]) == 0
        full = str(tmp_path / "full.svg")
        assert main(["render", "--map", ball44, "--config", str(cfg_path),
                     "--out", full]) == 0
        assert len(read_bytes(out)) < len(read_bytes(full))

    def test_config_map_mismatch_exits_1(self, ball44, tmp_path):
        cfg_path = tmp_path / "omega.txt"
        cfg_path.write_text("sites 2 free\n01\n", encoding="utf-8")
        assert main(["render", "--map", ball44, "--config", str(cfg_path),
                     "--out", str(tmp_path / "x.svg")]) == 1
