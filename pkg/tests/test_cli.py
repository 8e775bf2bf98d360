import csv
import json

import numpy as np
import pytest

from dynsamp.cli import main


@pytest.fixture
def config(tmp_path, binomial_pair):
    a, x = binomial_pair
    d = {"filter": a.to_dict(), "state": x.to_dict(), "m": 5, "N": 20, "xi": [0.13, 0.3]}
    p = tmp_path / "c.json"
    p.write_text(json.dumps(d))
    return p, d


def write_config(tmp_path, d, name="x.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return str(p)


def test_estimate_writes_csv(tmp_path, config, binomial_pair):
    out = tmp_path / "nodes.csv"
    assert main(["estimate", "--config", str(config[0]), "--algorithm", "pencil", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 10 and {r["algorithm"] for r in rows} == {"pencil"}
    a = binomial_pair[0]
    for r in rows:
        assert float(r["node_re"]) == pytest.approx(a.response(float(r["eta"])), abs=1e-8)


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["estimate", "--config", str(p)]) == 2
    assert "malformed" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["estimate", "--config", str(tmp_path / "none.json")]) == 2


def test_schema_violation(tmp_path, config):
    d = dict(config[1], m=4)
    assert main(["estimate", "--config", write_config(tmp_path, d)]) == 2


def test_degenerate_xi_exit_code(tmp_path, config, capsys):
    d = dict(config[1], xi=[0.5])
    path = write_config(tmp_path, d)
    assert main(["estimate", "--config", path]) == 3
    assert "xi=0.5" in capsys.readouterr().err
    assert main(["estimate", "--config", path, "--degenerate"]) == 0


def test_recover_json(tmp_path, config, binomial_pair):
    out = tmp_path / "rep.json"
    assert main(["recover", "--config", str(config[0]), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    np.testing.assert_allclose(rep["filter"]["coeffs"], [0, 0.25, 0.5, 0.25, 0], atol=1e-7)


def test_synthesize_stdout(config, capsys):
    assert main(["synthesize", "--config", str(config[0])]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["m"] == 5 and len(d["sequences"]) == 20


def test_bounds_requires_square(tmp_path, config, capsys):
    assert main(["bounds", "--config", str(config[0])]) == 2
    d = dict(config[1], N=10)
    out = tmp_path / "b.csv"
    assert main(["bounds", "--config", write_config(tmp_path, d), "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [float(r["xi"]) for r in rows] == [0.13, 0.3]
    assert all(float(r["lower"]) <= float(r["value"]) for r in rows)


def test_noise_and_seed_overrides_are_deterministic(tmp_path, config):
    outs = []
    for k in range(2):
        out = tmp_path / f"n{k}.csv"
        main(["estimate", "--config", str(config[0]), "--noise", "1e-6", "--seed", "3", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    out = tmp_path / "n2.csv"
    main(["estimate", "--config", str(config[0]), "--noise", "1e-6", "--seed", "4", "--out", str(out)])
    assert out.read_bytes() != outs[0]


def test_figure2_writes_two_files(tmp_path):
    out = tmp_path / "fig.csv"
    assert main(["figure2", "--out", str(out)]) == 0
    assert (tmp_path / "fig_growth.csv").exists()


def test_table1_small(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["table1", "--trials", "2", "--out", str(out)]) == 0
    data = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert len(data) == 15


def test_help_per_subcommand(capsys):
    for cmd in ("synthesize", "estimate", "recover", "bounds", "figure2", "table1"):
        with pytest.raises(SystemExit) as e:
            main([cmd, "--help"])
        assert e.value.code == 0
    assert "--config" in capsys.readouterr().out
