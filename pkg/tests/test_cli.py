import json
import os

import numpy as np
import pytest

from oamsim.cli import main, parse_modes, reference_values, replay
from oamsim.measurement_sim import CoincidenceTable
from oamsim.oam_optics import read_pgm
from oamsim.tomography import TomoDataset


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("OAMSIM_SEED", raising=False)
    return tmp_path


def write_config(path, **fields):
    doc = {"mode_min": -2, "mode_max": 2, "pair_rate": 1000.0, "acquisition_seconds": 10.0}
    doc.update(fields)
    path.write_text(json.dumps(doc))
    return str(path)


def test_parse_modes():
    assert parse_modes("2,1,0,-1") == [2, 1, 0, -1]
    assert parse_modes("-2:2") == [-2, -1, 0, 1, 2]


def test_reference_values_ship_with_package():
    ref = reference_values()
    assert ref["witness"]["W_before_storage"] == [123.9, 0.8]


class TestSimulate:
    def test_correlation(self, workdir):
        cfg = write_config(workdir / "c.json")
        assert main(["simulate", "--config", cfg, "--out", "c.csv", "--seed", "1"]) == 0
        table = CoincidenceTable.from_csv((workdir / "c.csv").read_text())
        assert len(table) == 25
        manifest = json.loads((workdir / "c.csv.manifest.json").read_text())
        assert manifest["seed"] == 1 and manifest["command"] == "simulate"
        assert set(manifest["outputs"]) == {"c.csv"}

    def test_default_config_is_diagonal(self, workdir):
        (workdir / "d.json").write_text("{}")
        assert main(["simulate", "--config", "d.json", "--out", "d.csv", "--seed", "42"]) == 0
        m = CoincidenceTable.from_csv((workdir / "d.csv").read_text()).matrix(range(-7, 8))
        assert m.shape == (15, 15)
        assert m.trace() > 0 and m.sum() == m.trace()

    def test_white_noise_table_is_uniform(self, workdir):
        # epsilon = 1: every cell has the same mean; a chi-square test on the counts accepts uniformity
        from scipy import stats

        cfg = write_config(workdir / "c.json", epsilon=1.0)
        assert main(["simulate", "--config", cfg, "--out", "u.csv", "--seed", "2"]) == 0
        counts = CoincidenceTable.from_csv((workdir / "u.csv").read_text()).counts
        assert stats.chisquare(counts).pvalue > 1e-3

    def test_seed_from_env_and_flag(self, workdir, monkeypatch):
        cfg = write_config(workdir / "c.json")
        monkeypatch.setenv("OAMSIM_SEED", "5")
        main(["simulate", "--config", cfg, "--out", "a.csv"])
        main(["simulate", "--config", cfg, "--out", "b.csv", "--seed", "5"])
        main(["simulate", "--config", cfg, "--out", "c.csv", "--seed", "6"])
        assert (workdir / "a.csv").read_bytes() == (workdir / "b.csv").read_bytes()
        assert (workdir / "a.csv").read_bytes() != (workdir / "c.csv").read_bytes()

    def test_config_seed(self, workdir):
        cfg = write_config(workdir / "c.json", seed=9)
        main(["simulate", "--config", cfg, "--out", "a.csv"])
        assert json.loads((workdir / "a.csv.manifest.json").read_text())["seed"] == 9

    def test_errors(self, workdir):
        assert main(["simulate", "--config", "missing.json", "--out", "x.csv"]) == 3
        bad = write_config(workdir / "bad.json", epsilon=3)
        assert main(["simulate", "--config", bad, "--out", "x.csv"]) == 2
        assert main(["simulate", "--out", "x.csv"]) == 2
        assert main(["nonsense"]) == 2


class TestPipelines:
    def test_tomo(self, workdir):
        cfg = write_config(workdir / "t.json", mode_min=-1, mode_max=1, storage_lorentzian=None,
                           source_lorentzian={"y0": 1, "xc": 0, "w": 1, "A": 0}, pair_rate=1e5)
        assert main(["simulate", "--config", cfg, "--kind", "tomo", "--out", "t.csv", "--seed", "3"]) == 0
        assert main(["tomo", "t.csv", "--mc", "5", "--out", "t.json.out", "--compare", "t.csv"]) == 0
        doc = json.loads((workdir / "t.json.out").read_text())
        assert doc["fidelity_to_ideal"]["value"] > 0.99
        assert doc["schmidt_rank_threshold"]["passed"]
        assert doc["fidelity_between"]["value"] == pytest.approx(1.0, abs=1e-9)
        assert "std" in doc["fidelity_to_ideal"]

    def test_tomo_bad_input(self, workdir):
        (workdir / "bad.csv").write_text("j,k,counts\n1,1,5\n")
        assert main(["tomo", "bad.csv", "--out", "o.json"]) == 2

    def test_witness(self, workdir):
        cfg = write_config(workdir / "w.json", storage_lorentzian=None, pair_rate=1e5)
        assert main(["simulate", "--config", cfg, "--kind", "witness", "--modes=-1:1", "--out", "w.csv",
                     "--seed", "1"]) == 0
        assert main(["witness", "w.csv", "--modes=-1:1", "--mc", "50", "--annotate", "--out", "w.out.json"]) == 0
        doc = json.loads((workdir / "w.out.json").read_text())
        assert doc["D"] == 3 and doc["certified_dimension_M"] == 3
        text = (workdir / "w.out.txt").read_text()
        assert "at least three-dimensional" in text and "reference" in text

    @pytest.mark.parametrize(
        "modes, state, expected_d, expected_dm",
        [("-5:5", "ideal", 10, 11), ("0:3", "ideal", 3, 4), ("0:3", "product", 1, 1)],
    )
    def test_witness_examples(self, workdir, modes, state, expected_d, expected_dm):
        lo, hi = parse_modes(modes)[0], parse_modes(modes)[-1]
        fields = {"mode_min": lo, "mode_max": hi, "storage_lorentzian": None, "pair_rate": 1e5,
                  "source_lorentzian": {"y0": 1, "xc": 0, "w": 1, "A": 0}}
        if state == "product":
            # all weight on one mode gives |m>|m>, a product state
            fields["source_lorentzian"] = {"y0": 0, "xc": lo, "w": 1e-6, "A": 1}
        cfg = write_config(workdir / "w.json", **fields)
        assert main(["simulate", "--config", cfg, "--kind", "witness", "--out", "w.csv", "--seed", "1"]) == 0
        assert main(["witness", "w.csv", f"--modes={modes}", "--mc", "50", "--out", "w.out.json"]) == 0
        doc = json.loads((workdir / "w.out.json").read_text())
        assert doc["certified_dimension"] == expected_d
        assert doc["certified_dimension_M"] == expected_dm
        if modes == "0:3" and state == "ideal":
            assert doc["M"] == pytest.approx(12.0)
            assert "at least four-dimensional" in (workdir / "w.out.txt").read_text()

    def test_tomo_noisy_fidelity(self, workdir):
        cfg = write_config(workdir / "t.json", mode_min=-1, mode_max=1, storage_lorentzian=None, epsilon=0.3,
                           source_lorentzian={"y0": 1, "xc": 0, "w": 1, "A": 0}, pair_rate=1e6)
        main(["simulate", "--config", cfg, "--kind", "tomo", "--out", "t.csv", "--seed", "3"])
        assert main(["tomo", "t.csv", "--mc", "20", "--out", "t.out"]) == 0
        fid = json.loads((workdir / "t.out").read_text())["fidelity_to_ideal"]
        assert fid["value"] == pytest.approx(1 - 0.3 * 8 / 9, abs=max(3 * fid["std"], 2e-3))

    def test_witness_missing_pair(self, workdir):
        cfg = write_config(workdir / "w.json")
        main(["simulate", "--config", cfg, "--kind", "witness", "--modes", "0,1", "--out", "w.csv"])
        assert main(["witness", "w.csv", "--modes", "0,1,2", "--mc", "0", "--out", "o.json"]) == 2

    def test_fit(self, workdir):
        xs = np.arange(-7, 8)
        ys = 2 * 2030 / np.pi * 7.7 / (4 * xs**2 + 7.7**2)
        (workdir / "f.csv").write_text("x,y\n" + "".join(f"{x},{float(y)!r}\n" for x, y in zip(xs, ys)))
        assert main(["fit", "f.csv", "--out", "f.json"]) == 0
        assert json.loads((workdir / "f.json").read_text())["params"]["w"] == pytest.approx(7.7)
        (workdir / "flat.csv").write_text("x,y\n" + "".join(f"{x},1\n" for x in range(8)))
        assert main(["fit", "flat.csv", "--out", "g.json"]) == 2

    def test_mask(self, workdir):
        assert main(["mask", "--m1", "0", "--m2", "0", "--theta", "1.0", "--size", "32", "--out", "m"]) == 0
        phase = read_pgm(workdir / "m_phase.pgm")
        assert phase.shape == (32, 32) and len(np.unique(phase)) == 1
        assert phase[0, 0] == int(0.5 / (2 * np.pi) * 256)
        assert main(["mask", "--m1", "2", "--m2", "-2", "--basis", "y", "--outcome", "-", "--size", "16",
                     "--out", "y"]) == 0
        assert (workdir / "y_intensity.pgm").exists()
        assert main(["mask", "--m1", "5", "--m2", "-1", "--out", "big"]) == 0
        assert read_pgm(workdir / "big_phase.pgm").shape == (512, 512)
        assert read_pgm(workdir / "big_intensity.pgm").shape == (512, 512)

    def test_replay(self, workdir):
        cfg = write_config(workdir / "c.json")
        main(["simulate", "--config", cfg, "--out", "r.csv", "--seed", "4"])
        first = (workdir / "r.csv").read_bytes()
        os.remove(workdir / "r.csv")
        assert replay(workdir / "r.csv.manifest.json") == 0
        assert (workdir / "r.csv").read_bytes() == first
