import csv
import io
import json
from importlib import resources

import numpy as np
import pytest

from vortex_induct import cli
from vortex_induct.config import load_config, parse_config
from vortex_induct.errors import ConfigError

BUNDLED = json.loads(resources.files("vortex_induct.data").joinpath("fig2.json").read_text())


def write_config(tmp_path, mutate=None, name="cfg.json"):
    doc = json.loads(json.dumps(BUNDLED))
    if mutate:
        mutate(doc)
    path = tmp_path / name
    path.write_text(json.dumps(doc, indent=2))
    return str(path)


def run(args, capsys=None):
    code = cli.main(args)
    out = capsys.readouterr() if capsys else None
    return code, out


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_bundled_config_values():
    cfg = load_config("fig2.json")
    assert cfg == load_config()
    assert cfg.electron.energy_ev == 1.0e5
    t = cfg.tube
    assert (t.radius_m, t.thickness_m, t.length_m) == (1.0e-5, 1.0e-6, 2.0e-5)
    assert t.conductivity_s_per_m == 9.43e6 and t.rel_permeability == 1.0
    assert cfg.sampling.n_samples % 2 == 1
    assert 0.0 in cfg.z_samples()


def test_repo_config_matches_bundled():
    import pathlib
    repo = pathlib.Path(__file__).resolve().parents[1] / "configs" / "fig2.json"
    assert load_config(repo) == load_config()


def test_missing_key_is_named(tmp_path):
    path = write_config(tmp_path, lambda d: d["tube"].pop("radius_m"))
    with pytest.raises(ConfigError, match="tube.radius_m"):
        load_config(path)


def test_negative_waist_rejected(tmp_path):
    path = write_config(tmp_path, lambda d: d["electron"].update(waist_m=-1e-9))
    with pytest.raises(ConfigError, match="waist_m"):
        load_config(path)


def test_unknown_key_reports_line():
    text = '{\n "electron": {"energy_ev": 1e5, "oam": 1, "waist_m": 1e-9,\n  "wiast_m": 2}\n}'
    with pytest.raises(ConfigError, match=r":3: unknown key 'electron.wiast_m'"):
        parse_config(text)


@pytest.mark.parametrize("mutate", [
    lambda d: d["sampling"].update(n_samples=800),
    lambda d: d["sampling"].update(z_max_m=-1.0),
    lambda d: d["quadrature"].update(max_depth=2.5),
    lambda d: d["electron"].update(oam=True),
    lambda d: d.update(extra={}),
    lambda d: d.pop("circuit"),
])
def test_invalid_configs(tmp_path, mutate):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, mutate))


def test_bad_json_and_missing_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{\n  \"electron\": ,\n}")
    with pytest.raises(ConfigError, match="bad.json:2"):
        load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")


def test_current_ratios(tmp_path):
    out = tmp_path / "cur.csv"
    assert cli.main(["current", "--oam-list", "1,5,10", "--output", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["z_m", "current_A_l1", "current_A_l5", "current_A_l10"]
    peaks = np.max(np.abs(data[:, 1:]), axis=0)
    assert np.allclose(peaks / peaks[0], [1, 5, 10], rtol=1e-12)
    assert out.read_bytes().count(b"\r") == 0


def test_current_zero_oam(tmp_path):
    out = tmp_path / "zero.csv"
    cfg = write_config(tmp_path, lambda d: d["electron"].update(oam=0))
    assert cli.main(["current", "--config", cfg, "--output", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["z_m", "current_A"]
    assert np.all(data[:, 1] == 0)


def test_autocorr_ratios(tmp_path):
    out = tmp_path / "ac.csv"
    assert cli.main(["autocorr", "--oam-list", "1,5,10", "--output", str(out)]) == 0
    header, data = read_csv(out)
    zero = np.argmin(np.abs(data[:, 0]))
    assert data[zero, 0] == 0.0
    assert np.allclose(data[zero, 1:], [1, 25, 100], rtol=1e-9)


def test_csv_precision_and_human_columns(tmp_path, capsys):
    assert cli.main(["energy-loss", "--config", write_config(
        tmp_path, lambda d: d["quadrature"].update(rel_tol=1e-6)), "--oam-list", "2"]) == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0] == "oam,delta_e_ev"
    value = text.splitlines()[1].split(",")[1]
    assert len(value.replace("-", "").replace(".", "").split("e")[0]) >= 12
    out = tmp_path / "h.csv"
    assert cli.main(["circuit", "--human", "--inductance-list", "0,0.1", "--output", str(out)]) == 0
    header, _ = read_csv(out)
    assert header == ["t_s", "emf_v", "current_A_0pH", "current_A_0.1pH",
                      "t_ps", "current_pA_0pH", "current_pA_0.1pH"]


def test_offset_and_visibility(tmp_path):
    out = tmp_path / "off.csv"
    assert cli.main(["offset", "--oam-list", "1,5", "--output", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["offset_m", "oam", "peak_current_A", "ratio_to_l1"]
    assert data.shape == (22, 4)
    assert np.allclose(data[data[:, 1] == 5, 3], 5, rtol=1e-12)
    out = tmp_path / "vis.csv"
    assert cli.main(["visibility", "--output", str(out)]) == 0
    header, data = read_csv(out)
    assert data[0, 2] == pytest.approx(1.0)
    assert np.all(np.diff(data[:, 2]) < 0)


def test_field_map_small_grid(tmp_path):
    cfg = write_config(tmp_path, lambda d: d.update(field_map={"n_r": 21, "n_z": 31}))
    out = tmp_path / "fm.csv"
    assert cli.main(["field-map", "--config", cfg, "--electron-z=-1e-5", "--output", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["r_m", "z_m", "energy_density_j_per_m3"]
    assert data.shape == (21 * 31, 3) and np.all(data[:, 2] >= 0)


def test_exit_code_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path, lambda d: d["tube"].pop("radius_m"))
    out = tmp_path / "never.csv"
    assert cli.main(["current", "--config", cfg, "--output", str(out)]) == 2
    assert "radius_m" in capsys.readouterr().err
    assert not out.exists()
    assert cli.main(["offset", "--offset-max", "1e-4"]) == 2


def test_exit_code_non_convergence(tmp_path, capsys):
    cfg = write_config(tmp_path, lambda d: d["quadrature"].update(rel_tol=1e-16, abs_tol=1e-300,
                                                                   max_depth=2))
    assert cli.main(["current", "--config", cfg]) == 3
    assert "non-convergence" in capsys.readouterr().err


def test_exit_code_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["current", "--no-such-flag"])
    assert exc.value.code == 64
    assert "usage" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 64


def test_output_is_deterministic(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, lambda d: d.update(field_map={"n_r": 25, "n_z": 25}))
    blobs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("VORTEX_INDUCT_THREADS", threads)
        for cmd in ("field-map", "current"):
            out = tmp_path / f"{cmd}{threads}.csv"
            assert cli.main([cmd, "--config", cfg, "--output", str(out)]) == 0
            blobs.append(out.read_bytes())
    assert blobs[0] == blobs[2] and blobs[1] == blobs[3]


def test_write_csv_format():
    buf = io.StringIO()
    cli.write_csv(buf, ["a", "b"], [(1, 0.1), (np.int64(2), 1e-300)])
    assert buf.getvalue() == "a,b\n1,0.10000000000000001\n2,1e-300\n"
