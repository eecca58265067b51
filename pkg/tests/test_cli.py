import csv
import io
import json
import math

import pytest

from aqlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_antisym_d3(capsys):
    code, out, _ = run(capsys, "antisym", "--d", "3")
    rep = json.loads(out)
    assert code == 0 and rep["schema"] == 1
    assert len(rep["correlation_table"]) == 6
    assert all(v == pytest.approx(1 / 6) for v in rep["correlation_table"].values())
    assert all(p["pass"] for p in rep["properties"].values())


def test_antisym_d2_index(capsys):
    _, out, _ = run(capsys, "antisym", "--d", "2")
    rep = json.loads(out)
    assert rep["index_of_correlation"] == pytest.approx(2 * math.log(2), abs=1e-9)
    ic = rep["properties"]["index_of_correlation"]
    assert ic["bits"] == pytest.approx(2.0, abs=1e-9)


def test_antisym_check_all(capsys):
    code, out, _ = run(capsys, "antisym", "--d", "3", "--check-all", "--rounds", "200")
    assert code == 0
    assert json.loads(out)["properties"]["rotated_basis_correlations"]["pass"]


def test_antisym_cap(capsys):
    code, out, err = run(capsys, "antisym", "--d", "7")
    assert code != 0 and out == "" and "6" in err


def test_keyshare_none(capsys):
    code, out, _ = run(capsys, "keyshare", "--rounds", "10000", "--seed", "0")
    rep = json.loads(out)
    assert code == 0 and rep["violations"] == 0
    assert abs(rep["sift_rate"] - 0.25) < 3 * math.sqrt(0.25 * 0.75 / 10_000)
    for key in ("rounds_total", "rounds_valid", "sift_rate", "violations",
                "violation_rate", "key_digits"):
        assert key in rep


def test_keyshare_kernel(capsys):
    code, out, _ = run(capsys, "keyshare", "--rounds", "2000", "--attack", "kernel")
    rep = json.loads(out)
    assert code == 0 and rep["violations"] == 0
    assert rep["eavesdropper"]["mutual_information_bound"] == pytest.approx(0, abs=1e-9)


def test_keyshare_cut_resend(capsys):
    code, out, _ = run(capsys, "keyshare", "--rounds", "2000", "--attack", "cut-resend")
    assert code == 0 and json.loads(out)["violation_rate"] > 0


def test_keyshare_bad_attack(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["keyshare", "--attack", "nope"])
    assert exc.value.code != 0


def test_seed_precedence(capsys, monkeypatch):
    monkeypatch.setenv("AQLAB_SEED", "5")
    _, out, _ = run(capsys, "keyshare", "--rounds", "50")
    assert json.loads(out)["seed"] == 5
    _, out, _ = run(capsys, "keyshare", "--rounds", "50", "--seed", "6")
    assert json.loads(out)["seed"] == 6
    monkeypatch.delenv("AQLAB_SEED")
    _, out, _ = run(capsys, "keyshare", "--rounds", "50")
    assert json.loads(out)["seed"] == 0


def test_byte_identical_output(capsys):
    a = run(capsys, "keyshare", "--rounds", "300", "--seed", "2")[1]
    b = run(capsys, "keyshare", "--rounds", "300", "--seed", "2")[1]
    assert a == b
    a = run(capsys, "compare", "--sweep", "--trials", "2000", "--seed", "2")[1]
    b = run(capsys, "compare", "--sweep", "--trials", "2000", "--seed", "2")[1]
    assert a == b


def test_stateshare_reports_fidelity(capsys):
    code, out, _ = run(capsys, "stateshare", "--trials", "100", "--no-transcripts")
    rep = json.loads(out)
    # the recovery maps are rank-deficient, so the exactness check fails
    assert rep["min_fidelity"] < 1 - 1e-9
    assert code == 1


def test_stateshare_chi_normalized(capsys):
    _, out, _ = run(capsys, "stateshare", "--trials", "2", "--chi", "2,0,0")
    rep = json.loads(out)
    assert rep["transcripts"][0]["chi_amplitudes"][0] == [1.0, 0.0]
    assert set(rep["transcripts"][0]) == {"chi_amplitudes", "l", "rho", "k", "fidelity"}


@pytest.mark.parametrize("chi", ["1,2", "a,b,c", "0,0,0"])
def test_stateshare_bad_chi(capsys, chi):
    code, out, err = run(capsys, "stateshare", "--chi", chi)
    assert code != 0 and out == "" and err


def test_compare_twostep_row(capsys):
    code, out, _ = run(capsys, "compare", "--theta", "0.5236", "--strategy", "two-step",
                       "--trials", "100000")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1
    assert float(rows[0]["rate"]) == pytest.approx(0.5, abs=0.01)


def test_compare_sweep_csv(capsys):
    code, out, _ = run(capsys, "compare", "--sweep", "--trials", "20000")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 6
    for r in rows:
        assert float(r["P_inc_twostep_analytic"]) <= float(r["P_inc_onestep_analytic"]) + 1e-12


def test_compare_bad_theta(capsys):
    code, _, err = run(capsys, "compare", "--theta", "2.0", "--strategy", "min-error")
    assert code != 0 and "theta" in err


def test_eavesdrop_solve(capsys):
    code, out, _ = run(capsys, "eavesdrop-solve")
    rep = json.loads(out)
    assert code == 0 and rep["kernel_dim"] == 1
    assert rep["sign_pattern"] == [1, -1, -1, 1, 1, -1]


def test_number_formatting(capsys):
    _, out, _ = run(capsys, "antisym", "--d", "3")
    val = json.loads(out)["index_of_correlation"]
    assert len(repr(val).replace(".", "").lstrip("0")) <= 12
