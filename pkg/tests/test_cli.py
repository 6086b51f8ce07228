import json
import math
import subprocess
import sys

import numpy as np
import pytest

from cavarray import ModelParams, ScatterOptions, transmission_linear, transmission_roots
from cavarray.cli import main
from cavarray.output import report_from_json, strip_comments
from cavarray.stability import StabilityReport, root_stability
from cavarray.sweep import read_sweep_csv

SPECTRUM = {"params": {"omega": 2, "xi": 1, "g": 0, "Omega": 3, "J": 1, "N": 6}}


@pytest.fixture
def write_config(tmp_path):
    def _write(cfg, name="cfg.json"):
        path = tmp_path / name
        path.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
        return str(path)
    return _write


def first_meta(text):
    assert text.startswith("#")
    return json.loads(text.splitlines()[0][1:])


class TestSpectrum:
    def test_default_k_grid(self, write_config, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["spectrum", "--config", write_config(SPECTRUM), "--out", str(out)]) == 0
        text = out.read_text()
        meta = first_meta(text)
        assert meta["config"]["params"]["J"] == 1
        _, rows = read_sweep_csv(text)
        assert len(rows) == 500
        p = ModelParams(**SPECTRUM["params"])
        for r in rows:
            assert r["valid"] == "1"
            assert float(r["s2"]) == pytest.approx(
                transmission_linear(p, float(r["k"])).s2, abs=1e-12)

    def test_free_chain(self, write_config, tmp_path):
        out = tmp_path / "s.csv"
        cfg = {"params": {**SPECTRUM["params"], "J": 0}}
        assert main(["spectrum", "--config", write_config(cfg), "--out", str(out)]) == 0
        _, rows = read_sweep_csv(out.read_text())
        assert all(float(r["s2"]) == pytest.approx(1.0, abs=1e-12) for r in rows)

    def test_mode_and_sign_flags(self, write_config, tmp_path):
        out = tmp_path / "s.csv"
        cfg = {"params": {**SPECTRUM["params"], "g": 0.5}, "axes": [
            {"name": "k", "start": 0.2, "stop": 2.9, "steps": 7}]}
        assert main(["spectrum", "--config", write_config(cfg), "--out", str(out),
                     "--mode", "self-consistent", "--sign", "eq8"]) == 0
        meta, rows = read_sweep_csv(out.read_text())
        opts = ScatterOptions(dispersion_mode="self_consistent", sign_convention="eq8")
        p = ModelParams(**cfg["params"])
        got = [complex(float(r["re_s"]), float(r["im_s"])) for r in rows]
        want = [rt.s for k in np.linspace(0.2, 2.9, 7) for rt in transmission_roots(p, k, opts)]
        assert got == want
        assert meta["config"]["scatter"]["sign_convention"] == "eq8"

    def test_flags_override_config(self, write_config):
        cfg = {**SPECTRUM, "scatter": {"I0": 0.5}}
        from cavarray.cli import build_parser, resolve_config
        args = build_parser().parse_args(["spectrum", "--config", write_config(cfg),
                                          "--i0", "2.0", "--set", "params.g=0.25"])
        rc = resolve_config(args)
        assert rc.scatter.I0 == 2.0 and rc.params.g == 0.25

    def test_malformed_value_names_key(self, write_config, capsys):
        cfg = {"params": {"omega": 2, "xi": "one"}}
        assert main(["spectrum", "--config", write_config(cfg)]) == 2
        assert "xi" in capsys.readouterr().err

    def test_malformed_json(self, write_config, capsys):
        assert main(["spectrum", "--config", write_config('{"params": {"g": }')]) == 2
        assert "malformed JSON" in capsys.readouterr().err

    def test_unknown_key(self, write_config, capsys):
        assert main(["spectrum", "--config", write_config({"params": {"gamma": 1}})]) == 2
        assert "gamma" in capsys.readouterr().err

    def test_unwritable_output(self, write_config, tmp_path):
        bad = tmp_path / "missing" / "out.csv"
        assert main(["spectrum", "--config", write_config(SPECTRUM), "--out", str(bad)]) == 3

    def test_json_format(self, write_config, tmp_path):
        out = tmp_path / "s.json"
        assert main(["spectrum", "--config", write_config(SPECTRUM), "--out", str(out),
                     "--format", "json", "--axis", "k:0.5:1.5:3"]) == 0
        d = json.loads(out.read_text())
        assert len(d["cells"]) == 3 and d["metadata"]["command"] == "spectrum"


class TestSweep2d:
    def test_decoupled_atom_g_symmetry(self, write_config, tmp_path):
        out = tmp_path / "g.csv"
        cfg = {"params": {**SPECTRUM["params"], "J": 0}}
        assert main(["sweep2d", "--config", write_config(cfg), "--out", str(out),
                     "--axis", "k:0.05:3.09:9", "--axis", "g:-3:3:13"]) == 0
        _, rows = read_sweep_csv(out.read_text())
        by = {}
        for r in rows:
            by.setdefault((r["k"], float(r["g"])), []).append(float(r["s2"]))
        for (k, g), s2 in by.items():
            assert sorted(s2) == pytest.approx(sorted(by[(k, -g if g else 0.0)]), abs=1e-9)

    def test_degenerate_axis_rejected(self, write_config):
        assert main(["sweep2d", "--config", write_config(SPECTRUM),
                     "--axis", "k:0.5:0.5:1", "--axis", "g:0:1:2"]) == 2

    def test_needs_two_axes(self, write_config):
        assert main(["sweep2d", "--config", write_config(SPECTRUM), "--axis", "k:0.1:1:3"]) == 2

    def test_large_g_suppression(self, write_config, tmp_path):
        out = tmp_path / "g.csv"
        assert main(["sweep2d", "--config", write_config(SPECTRUM), "--out", str(out),
                     "--axis", "k:0.3:2.8:6", "--axis", "g:-10:10:21"]) == 0
        _, rows = read_sweep_csv(out.read_text())
        cell = {}
        for r in rows:
            if r["reason"] == "ok":
                key = (r["k"], float(r["g"]))
                cell[key] = min(cell.get(key, 2.0), float(r["s2"]))
        for k in {k for k, _ in cell}:
            assert cell[(k, 10.0)] < cell[(k, 0.0)]
            assert cell[(k, -10.0)] < cell[(k, 0.0)]


class TestDynamics:
    def cfg(self, **dyn):
        return {"params": {"omega": 2, "xi": 1, "g": 2, "Omega": 2, "J": 15, "N": 20},
                "M": 15, "dynamics": {"t_end": 2.0, "sample_every": 100, **dyn}}

    def test_trajectory_layout(self, write_config, tmp_path):
        out = tmp_path / "d.csv"
        assert main(["dynamics", "--config", write_config(self.cfg()), "--out", str(out)]) == 0
        metas, body = strip_comments(out.read_text())
        header = body.splitlines()[0].split(",")
        assert header[0] == "t" and header[1] == "n_-20" and header[-5:] == [
            "sz", "re_sm", "im_sm", "Q", "L"]
        data = np.loadtxt(body.splitlines()[1:], delimiter=",")
        assert data[0, header.index("n_-1")] == 15
        assert np.max(np.abs(data[:, -2] - data[0, -2])) <= 1e-6
        assert metas[0]["trajectory"]["Q_drift"] <= 1e-6

    def test_vacuum_override(self, write_config, tmp_path):
        out = tmp_path / "d.csv"
        cfg = {**self.cfg(), "initial": {"kind": "vacuum", "atom": "ground"}}
        assert main(["dynamics", "--config", write_config(cfg), "--out", str(out)]) == 0
        _, body = strip_comments(out.read_text())
        data = np.loadtxt(body.splitlines()[1:], delimiter=",")
        assert np.all(data[:, 1:-5] == 0)
        assert np.all(data == data[0:1, :] * (np.arange(data.shape[1]) > 0) + data[:, :1]
                      * (np.arange(data.shape[1]) == 0))

    def test_blowup_exit_code(self, write_config, tmp_path):
        out = tmp_path / "d.csv"
        cfg = {"params": {"omega": 2, "xi": 1, "g": 1e300, "J": 0, "N": 2},
               "initial": {"kind": "site", "site": 0}, "dynamics": {"t_end": 1.0}}
        assert main(["dynamics", "--config", write_config(cfg), "--out", str(out)]) == 4
        _, body = strip_comments(out.read_text())
        assert len(body.splitlines()) >= 2

    def test_bad_site(self, write_config):
        cfg = {**self.cfg(), "initial": {"kind": "site", "site": 99}}
        assert main(["dynamics", "--config", write_config(cfg)]) == 2

    def test_verbatim_flag(self, write_config, tmp_path):
        out = tmp_path / "d.csv"
        cfg = self.cfg(t_end=1.0)
        assert main(["dynamics", "--config", write_config(cfg), "--out", str(out),
                     "--convention", "verbatim"]) == 0
        assert first_meta(out.read_text())["config"]["dynamics"]["convention"] == "verbatim_eq4"


class TestStability:
    def test_linear_stable_and_roundtrip(self, write_config, tmp_path):
        out = tmp_path / "r.json"
        cfg = {"params": {**SPECTRUM["params"], "J0": 0.0}}
        assert main(["stability", "--config", write_config(cfg), "--out", str(out),
                     "--k", "1.2", "--branch", "0"]) == 0
        text = out.read_text()
        rep = report_from_json(text)
        assert rep.stable
        _, body = strip_comments(text)
        assert StabilityReport.from_json(rep.to_json()) == rep
        assert json.loads(body) == rep.to_dict()
        p = ModelParams(**cfg["params"])
        direct = root_stability(p, 1.2, transmission_roots(p, 1.2)[0])
        assert direct == rep

    def test_missing_branch(self, write_config):
        cfg = {"params": {**SPECTRUM["params"], "g": 1}}
        assert main(["stability", "--config", write_config(cfg), "--k", "0.1",
                     "--branch", "2"]) == 0
        assert main(["stability", "--config", write_config(cfg), "--k", "0.1",
                     "--branch", "7"]) == 5

    def test_needs_k(self, write_config):
        assert main(["stability", "--config", write_config(SPECTRUM)]) == 2


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(SPECTRUM))
    proc = subprocess.run([sys.executable, "-m", "cavarray", "spectrum", "--config", str(cfg),
                           "--axis", "k:0.5:1.0:2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("# {")
