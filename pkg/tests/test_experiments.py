import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heomdpt import cli
from heomdpt.errors import ConfigError
from heomdpt.experiments import (ExperimentConfig, Sweep, dump_config,
                                 format_csv, parse_config, run_experiment,
                                 run_task)

BASE = """
[experiment]
name = t
preset = lmg_collective_decay
N = 3
gamma = 1
kappa = 1
omega = 1
V = 0.3
k_max = 2
tasks = steady
"""




finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(V=finite, gamma=st.floats(1e-3, 10), start=finite, stop=finite,
       steps=st.integers(1, 50), k=st.one_of(st.integers(0, 9),
                                             st.sampled_from(["default", "auto"])))
def test_config_round_trip(V, gamma, start, stop, steps, k):
    cfg = ExperimentConfig(name="rt", preset="lmg_collective_decay",
                           params={"N": 4, "V": V, "gamma": gamma,
                                   "kappa": 1.0, "omega": 2.0},
                           tasks=("steady", "gap"), k_max=k,
                           sweeps=(Sweep("V", start, stop, steps),),
                           task_options={"converge": {"k_min": "2"}},
                           out_dir=".", threads=2, tol=1e-4)
    back = parse_config(dump_config(cfg))
    assert back == cfg


def test_config_errors():
    with pytest.raises(ConfigError, match="preset"):
        parse_config(BASE.replace("lmg_collective_decay", "bogus"))
    with pytest.raises(ConfigError, match="kappa"):
        parse_config(BASE.replace("kappa = 1\n", ""))
    with pytest.raises(ConfigError):
        parse_config(BASE.replace("tasks = steady", "tasks = dance"))
    with pytest.raises(ConfigError):
        parse_config(BASE + "\n[sweep:V]\nstart = 0\nstop = 1\n")
    with pytest.raises(ConfigError):
        parse_config(BASE.replace("k_max = 2", "k_max = lots"))
    with pytest.raises(ConfigError):
        parse_config(BASE.replace("preset = lmg_collective_decay",
                                  "preset = lindblad_eq7")
                     .replace("tasks = steady", "tasks = converge"))


def test_forty_point_sweep_csv():
    cfg = parse_config(BASE + "\n[sweep:V]\nstart = 0\nstop = 1\nsteps = 40\n")
    rows = run_task(cfg, "steady")
    text = format_csv(["V", "sz_norm"], rows)
    lines = text.split("\n")
    assert text.endswith("\n") and "\r" not in text
    assert len(lines) - 1 == 41
    parsed = list(csv.reader(io.StringIO(text)))
    assert [float(r[0]) for r in parsed[1:]] == pytest.approx(np.linspace(0, 1, 40))
    # 12 significant digits in scientific notation
    mantissa = parsed[2][1].split("e")[0].lstrip("-")
    assert len(mantissa.replace(".", "")) == 12


def test_outputs_independent_of_threads(tmp_path):
    text = (BASE.replace("tasks = steady", "tasks = steady, gap, meanfield")
            + "\n[sweep:V]\nstart = 0\nstop = 0.8\nsteps = 6\n")
    a = run_experiment(parse_config(text), out_dir=tmp_path / "a", threads=1)
    b = run_experiment(parse_config(text), out_dir=tmp_path / "b", threads=4)
    for task in a:
        assert open(a[task][0], "rb").read() == open(b[task][0], "rb").read()
        meta = json.load(open(b[task][1]))
        assert meta["task"] == task and len(meta["rows"]) == 6
        assert "[experiment]" in meta["config"]


def test_failed_rows_carry_error(tmp_path):
    text = BASE + "\n[sweep:N]\nstart = 0\nstop = 2\nsteps = 3\n"
    paths = run_experiment(parse_config(text), out_dir=tmp_path)
    rows = list(csv.DictReader(open(paths["steady"][0])))
    assert len(rows) == 3
    assert rows[0]["error"] != ""
    assert rows[1]["error"] == "" and rows[2]["error"] == ""


def test_cli_commands(tmp_path, capsys):
    path = tmp_path / "c.ini"
    path.write_text(BASE)
    assert cli.main(["validate", "--config", str(path)]) == 0
    assert "ok" in capsys.readouterr().out
    assert cli.main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "lmg_sx" in out and "lindblad_sx" in out
    assert "alias" in out
    assert cli.main(["run", "--config", str(path), "--out-dir",
                     str(tmp_path / "o"), "--threads", "2", "--tol", "1e-4"]) == 0
    assert (tmp_path / "o" / "t_steady.csv").exists()
    bad = tmp_path / "bad.ini"
    bad.write_text(BASE.replace("kappa = 1\n", ""))
    assert cli.main(["validate", "--config", str(bad)]) == 2
    assert cli.main(["validate", "--config", str(tmp_path / "none.ini")]) == 1
