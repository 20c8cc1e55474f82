import csv
import json
import math

import numpy as np
import pytest

from qbottleneck.cli import (
    CLASSICAL_HEADER,
    CURVE_HEADER,
    UsageError,
    fmt,
    main,
    parse_beta_grid,
    parse_grid,
    render_svg,
    resolve_seed,
)
from qbottleneck.presets import classical_state
from qbottleneck.qib import build_instance, evaluate
from qbottleneck.qstate import KrausChannel, encode_matrix, kraus_to_choi, load_channel, save_channel, validate_cptp

QUICK = ["--iterations", "60", "--restarts", "2"]


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_parse_grid():
    assert parse_grid("0.05:0.95:19")[5] == 0.3
    assert parse_grid("0.5:0.5:1") == [0.5]
    for bad in ("0.5:0.1:3", "0:0.5:3", "0.1:1.2:3", "0.1:0.5", "a:b:c", "0.1:0.5:0"):
        with pytest.raises(UsageError):
            parse_grid(bad)


def test_parse_beta_grid():
    g = parse_beta_grid("0.5:8:5")
    assert g == pytest.approx([0.5, 1, 2, 4, 8])
    assert parse_beta_grid("0.5,2,8") == [0.5, 2.0, 8.0]
    with pytest.raises(UsageError):
        parse_beta_grid("-1,2")


def test_resolve_seed(monkeypatch):
    monkeypatch.delenv("QIB_SEED", raising=False)
    assert resolve_seed(None) == 0
    monkeypatch.setenv("QIB_SEED", "17")
    assert resolve_seed(None) == 17
    assert resolve_seed(3) == 3
    monkeypatch.setenv("QIB_SEED", "x")
    with pytest.raises(UsageError):
        resolve_seed(None)


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, 1e-300, 0.49833610837351763):
        assert float(fmt(x)) == x
    assert fmt(True) == "1" and fmt(np.bool_(False)) == "0" and fmt(7) == "7" and fmt(math.nan) == "nan"


def test_svg_content():
    svg = render_svg([0.1, 0.5, 0.9], [0.05, math.nan, 0.5], title="t")
    assert 'viewBox="0 0 800 600"' in svg
    assert 'class="rate"' in svg and 'stroke="red"' in svg
    assert svg.count('stroke="blue"') == 2
    assert svg.count("<circle") == 2


def test_rate_curve_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["rate-curve", "--preset", "classical", "--params", "0.1,0.2,0.3,0.4", "--grid", "0.3:0.9:3",
                 "--seed", "5", "--threads", "1", "--out", str(out), "--svg"] + QUICK)
    assert code == 0
    rows = read_csv(out / "curve.csv")
    assert rows[0] == CURVE_HEADER and len(rows) == 4
    inst = build_instance(classical_state([0.1, 0.2, 0.3, 0.4]))
    for row in rows[1:]:
        ch = load_channel(out / row[6])
        assert validate_cptp(kraus_to_choi(ch)).passed
        ev = evaluate(inst, ch)
        assert ev.R_norm == pytest.approx(float(row[1]), abs=1e-9)
        assert ev.I_xt_y == pytest.approx(float(row[2]), abs=1e-9)
        assert ev.J_norm >= float(row[0]) - 1e-12 and row[4] == "1"
    assert [r[6] for r in rows[1:]] == ["channel_J0.3000.json", "channel_J0.6000.json", "channel_J0.9000.json"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 5 and manifest["config"]["iterations"] == 60
    assert manifest["command"] == "rate-curve" and len(manifest["input_sha256"]) == 64
    assert set(manifest["outputs"]) >= {str(out / "curve.csv"), str(out / "curve.svg")}
    assert "convexity" in capsys.readouterr().out


def test_rate_curve_svg_does_not_change_csv(tmp_path):
    args = ["rate-curve", "--preset", "bell_mix", "--grid", "0.4:0.8:2", "--threads", "1"] + QUICK
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b"), "--svg"])
    assert (tmp_path / "a" / "curve.csv").read_bytes() == (tmp_path / "b" / "curve.csv").read_bytes()


def test_rate_curve_thread_count_does_not_change_csv(tmp_path):
    args = ["rate-curve", "--preset", "vw_mix", "--params", "0.4,0.6", "--grid", "0.2:0.8:3", "--seed", "11"] + QUICK
    main(args + ["--out", str(tmp_path / "a"), "--threads", "1"])
    main(args + ["--out", str(tmp_path / "b"), "--threads", "3"])
    assert (tmp_path / "a" / "curve.csv").read_bytes() == (tmp_path / "b" / "curve.csv").read_bytes()


def test_rate_curve_seed_from_env(tmp_path, monkeypatch):
    args = ["rate-curve", "--preset", "bell_mix", "--grid", "0.5:0.5:1", "--threads", "1"] + QUICK
    monkeypatch.setenv("QIB_SEED", "9")
    main(args + ["--out", str(tmp_path / "env")])
    main(args + ["--out", str(tmp_path / "flag"), "--seed", "9"])
    assert (tmp_path / "env" / "curve.csv").read_bytes() == (tmp_path / "flag" / "curve.csv").read_bytes()
    assert json.loads((tmp_path / "env" / "manifest.json").read_text())["seed"] == 9


def test_rate_curve_fixed_point(tmp_path):
    out = tmp_path / "fp"
    code = main(["rate-curve", "--preset", "bell_mix", "--optimizer", "fixed-point", "--beta-grid", "0.5,2,8,32",
                 "--grid", "0.2:0.8:3", "--out", str(out)])
    assert code == 0
    rows = read_csv(out / "curve.csv")[1:]
    assert all(r[4] == "1" for r in rows)
    assert isinstance(load_channel(out / rows[0][6]), type(kraus_to_choi(KrausChannel.identity(2))))


def test_rate_curve_errors(tmp_path):
    base = ["rate-curve", "--out", str(tmp_path)]
    assert main(base + ["--preset", "bell_mix", "--grid", "0.5:0.1:3"]) == 2
    assert main(base + ["--preset", "classical", "--params", "0.1,0.2"]) == 2
    assert main(base + ["--preset", "classical", "--params", "0.25,0.25,0.25,0.25"] + QUICK) == 3
    assert main(base) == 2
    with pytest.raises(SystemExit) as err:
        main(["rate-curve", "--preset", "nope"])
    assert err.value.code == 2


def test_rate_curve_infeasible_exit(tmp_path):
    # a one-operator, two-generation search cannot reach J = 1 on this state
    code = main(["rate-curve", "--preset", "vw_mix", "--params", "0.4,0.6", "--grid", "1:1:1", "--out", str(tmp_path),
                 "--iterations", "2", "--restarts", "1", "--kraus-rank", "4", "--population", "8", "--survivors", "2",
                 "--seed", "1", "--threads", "1"])
    rows = read_csv(tmp_path / "curve.csv")
    assert code in (0, 4)
    assert (code == 4) == (rows[1][4] == "0")


def test_state_file(tmp_path):
    rho = classical_state([0.1, 0.2, 0.3, 0.4])
    spec = {"dims": {"x": 2, "y": 2}, "matrix": encode_matrix(rho)}
    (tmp_path / "s.json").write_text(json.dumps(spec))
    code = main(["rate-curve", "--state", str(tmp_path / "s.json"), "--grid", "0.5:0.5:1", "--out", str(tmp_path),
                 "--threads", "1"] + QUICK)
    assert code == 0
    (tmp_path / "p.json").write_text(json.dumps({"preset": {"name": "bell_mix"}}))
    assert main(["rate-curve", "--state", str(tmp_path / "p.json"), "--grid", "0.5:0.5:1", "--out", str(tmp_path)] + QUICK) == 0
    (tmp_path / "bad.json").write_text(json.dumps({"dims": {"x": 2, "y": 2}, "matrix": encode_matrix(2 * rho)}))
    assert main(["rate-curve", "--state", str(tmp_path / "bad.json"), "--out", str(tmp_path)]) == 2
    assert main(["rate-curve", "--state", str(tmp_path / "s.json"), "--preset", "bell_mix", "--out", str(tmp_path)]) == 2


def test_classical_command(tmp_path):
    out = tmp_path / "c"
    code = main(["classical", "--preset", "classical", "--params", "0.1,0.2,0.3,0.4", "--grid", "0.1:0.9:5",
                 "--out", str(out), "--trace", "--svg"])
    assert code == 0
    rows = read_csv(out / "curve.csv")
    assert rows[0] == CLASSICAL_HEADER
    for row in rows[1:]:
        q = np.array(json.loads(row[6]))
        assert np.allclose(q.sum(axis=0), 1.0)
        assert 0 < float(row[1]) <= 0.5
    trace = read_csv(out / "beta_trace.csv")
    assert trace[0][:3] == ["beta", "I_xxt_nats", "I_xty_nats"] and len(trace) > 30
    assert (out / "curve.svg").exists()


def test_classical_joint_and_errors(tmp_path):
    (tmp_path / "j.json").write_text(json.dumps({"px_y": [[0.1, 0.3], [0.2, 0.4]]}))
    assert main(["classical", "--joint", str(tmp_path / "j.json"), "--grid", "0.5:0.5:1", "--out", str(tmp_path),
                 "--normalization", "nats"]) == 0
    (tmp_path / "u.json").write_text(json.dumps({"px_y": [[0.25, 0.25], [0.25, 0.25]]}))
    assert main(["classical", "--joint", str(tmp_path / "u.json"), "--out", str(tmp_path)]) == 3
    (tmp_path / "bad.json").write_text(json.dumps({"px_y": [[0.5, 0.6]]}))
    assert main(["classical", "--joint", str(tmp_path / "bad.json"), "--out", str(tmp_path)]) == 2
    assert main(["classical", "--preset", "bell_mix", "--out", str(tmp_path)]) == 2


def test_verify(capsys):
    assert main(["verify", "--seed", "7"]) == 0
    first = capsys.readouterr().out
    assert main(["verify", "--seed", "7"]) == 0
    assert capsys.readouterr().out == first
    assert "FAIL" not in first and first.count("PASS") == 7
    assert main(["verify", "--grad-tol", "1e-12"]) == 1
    assert "FAIL  gradient" in capsys.readouterr().out


def test_channel_info(tmp_path, capsys):
    save_channel(tmp_path / "id.json", KrausChannel.identity(2))
    assert main(["channel-info", str(tmp_path / "id.json")]) == 0
    out = capsys.readouterr().out
    assert "CPTP: pass" in out
    assert "Choi eigenvalues: 2.000000, 0.000000, 0.000000, 0.000000" in out
    save_channel(tmp_path / "deph.json", KrausChannel.dephasing())
    assert main(["channel-info", str(tmp_path / "deph.json"), "--preset", "classical", "--params", "0.1,0.2,0.3,0.4"]) == 0
    assert "J_norm = 1.000000, R_norm = 0.500000" in capsys.readouterr().out
    save_channel(tmp_path / "choi.json", kraus_to_choi(KrausChannel.dephasing()))
    assert main(["channel-info", str(tmp_path / "choi.json")]) == 0
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["channel-info", str(tmp_path / "bad.json")]) == 2
    assert main(["channel-info", str(tmp_path / "missing.json")]) == 2


def test_bits_flag_is_display_only(tmp_path, capsys):
    args = ["rate-curve", "--preset", "bell_mix", "--grid", "0.5:0.5:1", "--threads", "1"] + QUICK
    main(args + ["--out", str(tmp_path / "n")])
    nats = capsys.readouterr().out
    main(args + ["--out", str(tmp_path / "b"), "--bits"])
    bits = capsys.readouterr().out
    assert (tmp_path / "n" / "curve.csv").read_bytes() == (tmp_path / "b" / "curve.csv").read_bytes()
    n_val = float(nats.splitlines()[1].split()[2])
    b_val = float(bits.splitlines()[1].split()[2])
    assert b_val == pytest.approx(n_val / math.log(2), abs=2e-6)


def test_version(capsys):
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0
    assert "0.1.0" in capsys.readouterr().out
