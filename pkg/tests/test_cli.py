import io
import json
import subprocess
import sys

import pytest

from oscillab import cli
from oscillab.delta import CSV_COLUMNS
from oscillab.cli import UsageError


@pytest.fixture
def cache(tmp_path, monkeypatch):
    monkeypatch.delenv("OSCILLAB_CACHE", raising=False)
    return tmp_path / "cache"


def invoke(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_dyadic_default():
    cmd, cfg = cli.parse_config(["report", "--app", "divisor", "--tmin", "1024"], env={})
    assert cmd == "report" and cfg.t_max == 2048 and cfg.windows() == [1024]


def test_twisted_theta_default():
    _, cfg = cli.parse_config(["delta", "--app", "twisted", "--tmin", "10"], env={})
    assert cfg.theta == 1.0


@pytest.mark.parametrize(
    "argv",
    [
        ["delta", "--app", "divisor", "--tmin", "10", "--nmax", "5"],
        ["delta", "--app", "divisor", "--tmin", "ten"],
        ["delta", "--app", "divisor", "--tmin", "10", "--bogus"],
        ["frobnicate", "--app", "divisor", "--tmin", "10"],
        ["delta", "--app", "nosuch", "--tmin", "10"],
        ["report", "--app", "divisor", "--tmin", "1000", "--tmax", "3000"],
        ["measure", "--app", "divisor", "--tmin", "10", "--lambda", "-1"],
    ],
)
def test_usage_errors(argv, cache, capsys):
    with pytest.raises(UsageError):
        cli.parse_config(argv, env={})
    code, _, err = invoke(argv + ["--cache-dir", str(cache)], capsys)
    assert code == 2 and "usage error" in err


def test_free_range_allows_non_dyadic():
    _, cfg = cli.parse_config(
        ["report", "--app", "divisor", "--tmin", "1000", "--tmax", "3000", "--free-range"], env={}
    )
    assert cfg.windows() == [1000, 2000]


def test_cache_dir_precedence(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"app": "divisor", "t_min": 10, "cache_dir": "from-file"}))
    base = ["delta", "--config", str(conf)]
    assert cli.parse_config(base, env={})[1].cache_dir == "from-file"
    assert cli.parse_config(base, env={"OSCILLAB_CACHE": "from-env"})[1].cache_dir == "from-env"
    flagged = base + ["--cache-dir", "from-flag"]
    assert cli.parse_config(flagged, env={"OSCILLAB_CACHE": "from-env"})[1].cache_dir == "from-flag"


def test_config_file_values_and_overrides(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"app": "twisted", "theta": 2.5, "t_min": 100, "lam": 0.3}))
    _, cfg = cli.parse_config(["measure", "--config", str(conf), "--lambda", "0.7"], env={})
    assert (cfg.app, cfg.theta, cfg.t_min, cfg.lam) == ("twisted", 2.5, 100, 0.7)
    conf.write_text(json.dumps({"app": "divisor", "t_min": 10, "nonsense": 1}))
    with pytest.raises(UsageError):
        cli.parse_config(["delta", "--config", str(conf)], env={})


def test_missing_cache_exits_3(cache, capsys):
    code, out, err = invoke(["delta", "--app", "divisor", "--tmin", "10", "--cache-dir", str(cache)], capsys)
    assert code == 3 and out == "" and "--build" in err


def test_corrupt_cache_exits_3(cache, capsys):
    argv = ["delta", "--app", "divisor", "--tmin", "10", "--cache-dir", str(cache)]
    _, cfg = cli.parse_config(argv, env={})
    path = cli.cache_path(cfg, cli.application("divisor").kind)
    path.parent.mkdir(parents=True)
    path.write_bytes(b"junk")
    assert invoke(argv, capsys)[0] == 3


def test_numeric_error_exits_4(cache, capsys):
    code, _, err = invoke(
        ["mellin", "--app", "divisor", "--s", "0.5", "--build", "--cache-dir", str(cache)], capsys
    )
    assert code == 4 and "sigma2" in err


def test_sieve_then_delta(cache, capsys):
    code, out, _ = invoke(["sieve", "--app", "divisor", "--cache-dir", str(cache)], capsys)
    assert code == 0 and out.startswith("kind,theta,n_max,sum,path\n")
    code, out, _ = invoke(
        ["delta", "--app", "divisor", "--tmin", "100", "--tmax", "100", "--points", "1", "--cache-dir", str(cache)],
        capsys,
    )
    assert code == 0
    assert float(out.splitlines()[1].split(",")[1]) == pytest.approx(1.5398, abs=1e-4)


def test_report_rows(cache, capsys):
    argv = ["report", "--app", "divisor", "--tmin", "1024", "--tmax", "131072", "--lambda", "0.1",
            "--alpha", "0.25", "--build", "--cache-dir", str(cache)]
    code, out, err = invoke(argv, capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 9
    assert "report on" in err and "report on" not in out


def test_mellin_squarefree_within_bounds(cache, capsys):
    code, out, _ = invoke(["mellin", "--app", "squarefree", "--s", "2.0", "--build", "--cache-dir", str(cache)], capsys)
    data = json.loads(out)
    assert code == 0 and data["within_bounds"]
    assert set(data) >= {"direct", "contour", "bounds"}


def test_signs_divisor(cache, capsys):
    code, out, _ = invoke(
        ["signs", "--app", "divisor", "--tmin", "100", "--tmax", "200", "--build", "--cache-dir", str(cache)], capsys
    )
    xs = [float(v) for v in out.split()]
    assert code == 0 and xs and all(100 <= x <= 200 for x in xs)


def test_moments_and_measure_json(cache, capsys):
    base = ["--app", "divisor", "--tmin", "1000", "--output", "json", "--build", "--cache-dir", str(cache)]
    code, out, _ = invoke(["moments", *base, "--smoothing-y", "-1"], capsys)
    rows = json.loads(out)
    assert code == 0 and rows[0]["moment2"] > 0 and rows[0]["smoothed2"] > 0
    code, out, _ = invoke(["measure", *base], capsys)
    assert code == 0 and json.loads(out)


def test_output_file_and_stamp(cache, tmp_path, capsys):
    target = tmp_path / "out.csv"
    argv = ["report", "--app", "divisor", "--tmin", "1024", "--build", "--cache-dir", str(cache)]
    assert invoke([*argv, "--out", str(target)], capsys)[1] == ""
    plain = target.read_text()
    invoke([*argv, "--out", str(target), "--stamp"], capsys)
    stamped = target.read_text().splitlines(keepends=True)
    assert stamped[0].startswith("# generated") and "".join(stamped[1:]) == plain


def test_byte_determinism_across_threads(cache, capsys):
    argv = ["report", "--app", "twisted", "--tmin", "1024", "--tmax", "4096", "--build", "--cache-dir"]
    outs = []
    for threads, sub in (("1", "a"), ("8", "b"), ("1", "a")):
        code, out, _ = invoke([*argv, str(cache / sub), "--threads", threads], capsys)
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]


def test_module_entry_point_usage_exit(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "oscillab", "report", "--app", "divisor", "--tmin", "10", "--nmax", "5"],
        capture_output=True, text=True, cwd=tmp_path,
    )
    assert proc.returncode == 2 and proc.stdout == ""


def test_run_writes_to_given_streams(cache):
    _, cfg = cli.parse_config(["delta", "--app", "divisor", "--tmin", "10", "--build", "--cache-dir", str(cache)], env={})
    out, err = io.StringIO(), io.StringIO()
    assert cli.run(cfg, "delta", out, err) == 0
    assert out.getvalue().startswith("x,delta\n") and "sieving" in err.getvalue()
