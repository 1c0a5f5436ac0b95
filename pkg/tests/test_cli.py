import json
import math
import subprocess
import sys

import pytest

from qimages.cli import main, parse_complex
from qimages.ensemble import THREADS_ENV
from qimages.exceptions import ValidationError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


@pytest.fixture(autouse=True)
def _no_thread_cap(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)


# -- literal parsing -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "text,value",
    [
        ("0.6+0.0i", 0.6 + 0j),
        ("-0.5-0.5i", -0.5 - 0.5j),
        ("0.8", 0.8 + 0j),
        ("1e-3+2E-1i", 1e-3 + 0.2j),
        (" .5 - i", 0.5 - 1j),
    ],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "abc", "0.6+", "0.6+0.0j", "1..2", "0.6++0.1i", "i"])
def test_parse_complex_rejects(text):
    with pytest.raises(ValidationError):
        parse_complex(text)


# -- commands ----------------------------------------------------------------------------------


def test_oracle_command(capsys):
    data = run_json(capsys, "oracle", "--counts", "5,3,2")
    assert data["M"] == 10
    for got, want in zip(data["absorption"], [0.5, 0.3, 0.2]):
        assert got == pytest.approx(want, abs=1e-9)


def test_oracle_total_mismatch(capsys):
    code, _, err = run(capsys, "oracle", "--counts", "5,3,2", "--m", "11")
    assert code == 2 and "error" in err


def test_oracle_malformed_counts(capsys):
    assert run(capsys, "oracle", "--counts", "5,x")[0] == 2


def test_collapse_eigenstate(capsys):
    data = run_json(capsys, "collapse", "--amps", "0,1", "--seed", "3")
    assert data == {"vertex": 1, "steps": 0, "reductions": [[0, 0]]}


def test_collapse_reproducible(capsys):
    argv = ("collapse", "--amps", "0.6+0.0i,0.8+0.0i", "--m", "20", "--seed", "7")
    a = run(capsys, *argv)
    b = run(capsys, *argv)
    assert a == b and a[0] == 0


def test_collapse_runaway_is_runtime_error(capsys):
    code, _, err = run(capsys, "collapse", "--amps", "0.6,0.8", "--seed", "1", "--max-steps", "1")
    assert code == 1 and "error" in err


def test_unnormalized_rejected_unless_asked(capsys):
    code, _, err = run(capsys, "witness", "--amps-a", "1,1", "--amps-b", "1,0")
    assert code == 2 and "--normalize" in err
    data = run_json(capsys, "witness", "--amps-a", "1,1", "--amps-b", "1,0", "--normalize")
    assert data["witness"] == pytest.approx(math.sqrt(0.5) - 0.5, abs=1e-12)
    # overlap one half maximizes the witness
    data = run_json(capsys, "witness", "--amps-a", "1,1.7320508075688772", "--amps-b", "1,0", "--normalize")
    assert data["witness"] == pytest.approx(0.25, abs=1e-12)


def test_malformed_amplitude_literal(capsys):
    code, _, err = run(capsys, "image", "--amps", "0.6+0.8j,0")
    assert code == 2 and "malformed" in err


def test_witness_values(capsys):
    assert run_json(capsys, "witness", "--amps-a", "1,0", "--amps-b", "0,1")["witness"] == 0.0
    assert run_json(capsys, "witness", "--amps-a", "1,0", "--amps-b", "1,0")["witness"] == pytest.approx(0.0, abs=1e-15)


def test_image_command(capsys):
    data = run_json(capsys, "image", "--amps", "0.6+0.0i,0.0+0.8i")
    assert data["image"] == [[0.6, -0.0], [0.0, -0.8]]
    assert data["labels"] == ["0*", "1*"]
    assert data["weights"] == pytest.approx([0.36, 0.64], abs=1e-12)
    assert data["born"] == pytest.approx([0.36, 0.64], abs=1e-12)
    assert data["residual"] < 1e-12


def test_symmetrize_bose(capsys):
    data = run_json(capsys, "symmetrize", "--n", "4", "--i", "1", "--stats", "bose")
    re, im = data["exchange_coefficient"]
    assert re == pytest.approx((1 - math.sqrt(2)) / 2, abs=1e-12) and im == 0.0
    assert data["residual"] < 1e-12
    assert data["norm"] == pytest.approx(1.0, abs=1e-12)


def test_symmetrize_fermi(capsys):
    data = run_json(capsys, "symmetrize", "--n", "8", "--i", "0", "--stats", "fermi")
    assert data["proportionality"] == pytest.approx(math.sqrt(14), abs=1e-12)
    assert data["residual"] < 1e-12
    assert data["self_pairing_amplitude"] == 0.0


def test_symmetrize_bad_index(capsys):
    assert run(capsys, "symmetrize", "--n", "4", "--i", "4", "--stats", "bose")[0] == 2


def test_missing_seed_is_usage_error(capsys):
    assert run(capsys, "collapse", "--amps", "0.6,0.8")[0] == 2


def test_unknown_command(capsys):
    assert run(capsys, "dance")[0] == 2


def test_output_file_json(capsys, tmp_path):
    path = tmp_path / "w.json"
    data = run_json(capsys, "oracle", "--counts", "1,1", "-o", str(path))
    assert json.loads(path.read_text()) == data


def test_output_file_bad_suffix(capsys, tmp_path):
    assert run(capsys, "oracle", "--counts", "1,1", "-o", str(tmp_path / "w.txt"))[0] == 2


def test_output_unwritable(capsys, tmp_path):
    code, _, err = run(capsys, "oracle", "--counts", "1,1", "-o", str(tmp_path / "no" / "w.json"))
    assert code == 1 and "cannot write" in err


def test_ensemble_csv(capsys, tmp_path):
    path = tmp_path / "e.csv"
    data = run_json(
        capsys, "ensemble", "--amps", "0.6,0.8", "--m", "10", "--seed", "2", "--runs", "100", "-o", str(path)
    )
    lines = path.read_text().splitlines()
    assert lines[0] == "vertex,count,frequency,expected" and len(lines) == 3
    assert json.loads((tmp_path / "e.manifest.json").read_text()) == data["manifest"]


def test_ensemble_output_independent_of_workers(capsys, tmp_path, monkeypatch):
    base = ("ensemble", "--amps", "0.6,0.8", "--m", "12", "--seed", "4", "--runs", "400")
    blobs = []
    for w in ("1", "3"):
        path = tmp_path / f"w{w}.json"
        run_json(capsys, *base, "--workers", w, "-o", str(path))
        blobs.append(path.read_bytes())
    monkeypatch.setenv(THREADS_ENV, "2")
    path = tmp_path / "env.json"
    run_json(capsys, *base, "-o", str(path))
    blobs.append(path.read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qimages", "oracle", "--counts", "2,2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["absorption"] == pytest.approx([0.5, 0.5], abs=1e-12)
