import csv
import json

import numpy as np
import pytest

from contactlab.cli import load_config, main
from contactlab.library import list_library


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(tmp_path, cfg, *extra):
    return main(["run", cfg, "--out", str(tmp_path / "out"), *extra])


def report(tmp_path, name):
    return json.loads((tmp_path / "out" / f"{name}.json").read_text())


def test_calibrate_reeb_passes(tmp_path, capsys):
    cfg = write(tmp_path, "cal.yaml", "scenario: calibrate-reeb\nseed: 0\nparams: {t: 0.7}\n")
    assert run(tmp_path, cfg) == 0
    rep = report(tmp_path, "cal")
    assert rep["status"] == "PASS"
    assert abs(rep["results"]["tau"]["lower"] - 0.7) <= 1e-6
    sp = rep["results"]["spectral_point"]
    assert abs(sp["value"] - 0.7) <= 2 * sp["cell_tol"]
    assert {"delta", "eta", "quadrature", "grid_scale"} <= set(rep["tolerance_ledger"])
    assert "PASS" in capsys.readouterr().out


def test_loop_s3_lower_bound(tmp_path):
    cfg = write(tmp_path, "loop.yaml", "scenario: loop-s3\nseed: 1\nparams: {k: 2}\n")
    assert run(tmp_path, cfg) == 0
    assert report(tmp_path, "loop")["results"]["tau"]["lower"] >= 4 * np.pi - 1e-9


def test_malformed_config_reports_lines(tmp_path, capsys):
    cfg = write(tmp_path, "bad.yaml",
                "scenario: calibrate-reeb\nseed: 0\nmodel: {kind: T3, colour: red}\n"
                "params: {t: 0.7}\ntolerances: {delta: 0}\n")
    assert run(tmp_path, cfg) == 2
    err = capsys.readouterr().err
    assert "line 3: unknown key 'colour'" in err
    assert "line 5" in err and "tolerances/delta" in err
    assert not (tmp_path / "out").exists()


def test_yaml_syntax_error(tmp_path, capsys):
    cfg = write(tmp_path, "syn.yaml", "scenario: zap\nparams: [1, 2\n")
    assert run(tmp_path, cfg) == 2
    assert "YAML syntax error" in capsys.readouterr().err


def test_unknown_top_level_key_and_scenario(tmp_path):
    assert run(tmp_path, write(tmp_path, "a.yaml", "scenario: zap\nextra: 1\n")) == 2
    assert run(tmp_path, write(tmp_path, "b.yaml", "scenario: bogus\n")) == 2
    assert run(tmp_path, write(tmp_path, "c.yaml", "- 1\n- 2\n")) == 2


def test_seed_mandatory_for_optimizer_scenarios(tmp_path, capsys):
    cfg = write(tmp_path, "noseed.yaml", "scenario: loop-s3\nparams: {k: 1}\n")
    assert run(tmp_path, cfg) == 2
    assert "'seed' is a required property" in capsys.readouterr().err
    assert run(tmp_path, cfg, "--seed", "7") == 0
    assert report(tmp_path, "noseed")["seed"] == 7


def test_scenario_params_are_validated(tmp_path):
    cfg = write(tmp_path, "p.yaml", "scenario: loop-s3\nseed: 0\nparams: {k: 2, t: 1}\n")
    assert run(tmp_path, cfg) == 2
    cfg = write(tmp_path, "q.yaml", "scenario: loop-s3\nseed: 0\nparams: {k: 0}\n")
    assert run(tmp_path, cfg) == 2


def test_unknown_library_reference(tmp_path, capsys):
    cfg = write(tmp_path, "lib.yaml", "scenario: zap\nfamily: {library: nope}\n")
    assert run(tmp_path, cfg) == 2
    assert "nope" in capsys.readouterr().err


def test_reports_are_byte_identical(tmp_path):
    cfg = write(tmp_path, "sky.yaml",
                "scenario: spacetime-sky\nparams: {event: [1.0, 0.5, 0.2], target: [2.0, 1.1, 0.2]}\n")
    assert main(["run", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["run", cfg, "--out", str(tmp_path / "b")]) == 0
    a, b = (tmp_path / d / "sky.json" for d in "ab")
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a" / "sky.meta.json").exists()
    assert "started" in json.loads((tmp_path / "a" / "sky.meta.json").read_text())
    with open(tmp_path / "a" / "sky_sky.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y", "theta"]
    assert all("," not in c and float(c) == float(c) for c in rows[1])


def test_invariant_failure_exits_one(tmp_path, capsys):
    cfg = write(tmp_path, "sc.yaml",
                "scenario: spacetime-scaling\nparams: {event: [0, 0], max_ratio: 0.5}\n")
    assert run(tmp_path, cfg) == 1
    assert "upper_le_ratio_delta" in capsys.readouterr().err
    assert report(tmp_path, "sc")["status"] == "FAIL"


def test_library_errors_become_failed_checks(tmp_path, capsys):
    cfg = write(tmp_path, "t3loop.yaml",
                "scenario: loop-s3\nseed: 0\nmodel: {kind: T3}\nparams: {k: 1}\n")
    assert run(tmp_path, cfg) == 1
    assert "RefusalError" in capsys.readouterr().err


def test_grid_scale_validation(tmp_path):
    cfg = write(tmp_path, "g.yaml", "scenario: spacetime-scaling\nparams: {event: [0, 0]}\n")
    assert run(tmp_path, cfg, "--grid-scale", "0") == 2
    assert run(tmp_path, cfg, "--grid-scale", "0.5") == 0
    assert report(tmp_path, "g")["tolerance_ledger"]["n"] == 128


def test_list_default_and_filters(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for ident in ("reeb", "t3-translation", "fishtail-m1", "flat-cylinder-T2"):
        assert ident in out
    assert main(["list", "--json", "--filter", "model=J1S1"]) == 0
    entries = json.loads(capsys.readouterr().out)
    assert entries and {e["category"] for e in entries} == {"genfun"}
    assert main(["list", "--filter", "colour=red"]) == 2
    assert main(["list", "--filter", "noequals"]) == 2


def test_library_entries_build():
    for e in list_library():
        assert e.build() is not None


def test_bad_arguments_exit_two():
    assert main(["frobnicate"]) == 2
    assert main(["list", "--seed", "-1"]) == 2


def test_load_config_sets_name(tmp_path):
    cfg = load_config(write(tmp_path, "named.yaml", "scenario: zap\n"))
    assert cfg["name"] == "named"
