import csv
import io
import struct

import numpy as np
import pytest

from fsht import CoeffMatrix, Kind, load_coeffs, save_coeffs
from fsht.cli import CSV_HEADER, TIMING_COLUMNS, main


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    return code, capsys.readouterr()


def test_plan_writes_header(tmp_path, capsys):
    out = tmp_path / "p.fsht"
    code, cap = run(capsys, "plan", "--n", "255", "--mode", "dense", "--out", str(out))
    assert code == 0 and "bytes=" in cap.out
    magic, version, n, tol, mode, stride = struct.unpack_from("<4sIQdII", out.read_bytes())
    assert (magic, version, n, tol, mode, stride) == (b"FSHT", 1, 255, 2.0**-52, 0, 64)


def test_plan_thin_records_stride(tmp_path, capsys):
    out = tmp_path / "p.fsht"
    code, _ = run(capsys, "plan", "--n", "200", "--mode", "thin", "--stride", "64", "--out", str(out))
    assert code == 0
    assert struct.unpack_from("<4sIQdII", out.read_bytes())[4:] == (1, 64)


@pytest.mark.parametrize("argv", [
    ["plan", "--n", "-1"],
    ["plan", "--n", "5", "--tol", "2"],
    ["plan", "--n", "5", "--stride", "3"],
    ["plan", "--n", "5", "--mode", "fast"],
    ["bench", "--n-list", "4,x"],
    ["--threads", "0", "plan", "--n", "3"],
    [],
])
def test_invalid_flags_exit_2(argv, capsys):
    assert run(capsys, *argv)[0] == 2


def test_overflow_exit_3(capsys):
    assert run(capsys, "plan", "--n", "100000000")[0] == 3


def test_convert_roundtrip_and_mismatch(tmp_path, capsys, rng):
    plan_path = tmp_path / "p.fsht"
    run(capsys, "plan", "--n", "40", "--out", str(plan_path))
    F = CoeffMatrix.random(40, rng)
    save_coeffs(tmp_path / "f", F)
    args = ["convert", "--plan", str(plan_path)]
    assert run(capsys, *args, "--in", str(tmp_path / "f"), "--direction", "sph2fourier",
               "--out", str(tmp_path / "g"))[0] == 0
    assert load_coeffs(tmp_path / "g").kind == Kind.FOURIER
    assert run(capsys, *args, "--in", str(tmp_path / "g"), "--direction", "fourier2sph",
               "--out", str(tmp_path / "h"))[0] == 0
    H = load_coeffs(tmp_path / "h")
    assert H.kind == Kind.SPHERICAL_HARMONIC
    assert np.linalg.norm(H.data - F.data, axis=0).max() <= 100 * np.sqrt(40) * 2.22e-16
    # wrong kind, then wrong bandlimit
    assert run(capsys, *args, "--in", str(tmp_path / "g"), "--direction", "sph2fourier",
               "--out", str(tmp_path / "x"))[0] == 4
    save_coeffs(tmp_path / "small", CoeffMatrix.random(7, rng))
    assert run(capsys, *args, "--in", str(tmp_path / "small"), "--direction", "sph2fourier",
               "--out", str(tmp_path / "x"))[0] == 4
    assert run(capsys, *args, "--in", str(tmp_path / "missing"), "--direction", "sph2fourier",
               "--out", str(tmp_path / "x"))[0] == 2


def test_convert_empty_bandlimit(tmp_path, capsys):
    run(capsys, "plan", "--n", "0", "--out", str(tmp_path / "p"))
    F = CoeffMatrix.zeros(0)
    F.data[0, 0] = 2.0
    save_coeffs(tmp_path / "f", F)
    code, _ = run(capsys, "convert", "--plan", str(tmp_path / "p"), "--in", str(tmp_path / "f"),
                  "--direction", "sph2fourier", "--out", str(tmp_path / "g"))
    assert code == 0
    assert load_coeffs(tmp_path / "g").data[0, 0] == pytest.approx(np.sqrt(2))


def _bench(capsys, *extra):
    code, cap = run(capsys, "bench", "--n-list", "15,31", "--seed", "7", *extra)
    assert code == 0
    return list(csv.DictReader(io.StringIO(cap.out))), cap.out


def test_bench_schema_and_determinism(capsys):
    rows, text = _bench(capsys)
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert [r["n"] for r in rows] == ["15", "31"]
    for r in rows:
        assert float(r["max_col_err"]) <= 100 * np.sqrt(int(r["n"])) * 2.22e-16
        assert all(float(r[c]) >= 0 for c in CSV_HEADER if c not in ("n", "mode"))
    again, _ = _bench(capsys)
    strip = lambda rs: [{k: v for k, v in r.items() if k not in TIMING_COLUMNS} for r in rs]  # noqa: E731
    assert strip(rows) == strip(again)


def test_bench_thin_reports_ranks(capsys):
    code, cap = run(capsys, "bench", "--n-list", "300", "--mode", "thin", "--stride", "64",
                    "--trials", "1")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(cap.out)))
    assert row["mode"] == "thin" and float(row["rank_avg"]) > 0


def test_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("FSHT_THREADS", "1")
    assert run(capsys, "plan", "--n", "3")[0] == 0
    monkeypatch.setenv("FSHT_THREADS", "many")
    assert run(capsys, "plan", "--n", "3")[0] == 2
