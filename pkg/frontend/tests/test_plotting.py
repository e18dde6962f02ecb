import json
import subprocess
import sys

import pytest

from sweepfigs.plotting import SchemaError, main, read_sweep, infer_gap


@pytest.fixture(scope="session")
def sweep_csv(tmp_path_factory):
    """Reference sweep produced through the bhdirac command line."""
    tmp = tmp_path_factory.mktemp("sweep")
    cfg = {
        "background": {"M": 1.0},
        "mode": {"m": 0.5, "k": [0.5], "n": [1, 2]},
        "omega_grid": {"min": -1.2, "max": 1.2, "count": 7, "spacing": "linear"},
        "tolerances": {"ode": 1e-9, "extract": 1e-5},
        "output": {"path": str(tmp / "sweep.csv"), "format": "csv"},
    }
    cfg_path = tmp / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    proc = subprocess.run(
        [sys.executable, "-m", "bhdirac.cli", "sweep", "--config", str(cfg_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return tmp / "sweep.csv"


def test_read_and_gap_inference(sweep_csv):
    data = read_sweep(sweep_csv)
    assert len(data["omega"]) == 14  # 7 frequencies x 2 modes
    gap = infer_gap(data)
    assert gap is not None
    assert 0 < gap < 0.5


def test_spectrum_figure(sweep_csv, tmp_path):
    out = tmp_path / "spectrum.png"
    assert main(["--in", str(sweep_csv), "--kind", "spectrum", "--out", str(out)]) == 0
    assert out.exists() and out.stat().st_size > 1000


def test_fnorm_figure(sweep_csv, tmp_path):
    out = tmp_path / "fnorm.png"
    assert (
        main(["--in", str(sweep_csv), "--kind", "fnorm-vs-lambda", "--out", str(out)])
        == 0
    )
    assert out.exists() and out.stat().st_size > 1000


def test_input_left_unchanged(sweep_csv, tmp_path):
    before = sweep_csv.read_bytes()
    main(["--in", str(sweep_csv), "--kind", "spectrum", "--out", str(tmp_path / "x.png")])
    assert sweep_csv.read_bytes() == before


def test_truncated_csv_names_missing_column(sweep_csv, tmp_path, capsys):
    lines = sweep_csv.read_text().strip().split("\n")
    cols = lines[0].split(",")
    drop = cols.index("nu_plus")
    truncated = tmp_path / "truncated.csv"
    truncated.write_text(
        "\n".join(",".join(v for i, v in enumerate(ln.split(",")) if i != drop)
                  for ln in lines)
    )
    rc = main(["--in", str(truncated), "--kind", "spectrum",
               "--out", str(tmp_path / "y.png")])
    assert rc == 1
    assert "nu_plus" in capsys.readouterr().err


def test_schema_error_type(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError):
        read_sweep(bad)


def test_missing_file(tmp_path):
    rc = main(["--in", str(tmp_path / "none.csv"), "--kind", "spectrum",
               "--out", str(tmp_path / "z.png")])
    assert rc == 1
