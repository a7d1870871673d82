import json
import subprocess
import sys
from pathlib import Path

import pytest

FIGURES = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(FIGURES))

from render import FigureError, render  # noqa: E402

ARTIFACTS = FIGURES.parent / "artifacts" / "acceptance"


def write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def spec_file(tmp_path, **spec) -> Path:
    path = tmp_path / f"{spec['kind']}.json"
    path.write_text(json.dumps(spec))
    return path


SYNTH = {
    "error_vs_rank": (
        "error_vs_rank.csv",
        "method,r,error,failed\n"
        "tdb_cur,2,0.25,0\ntdb_cur,4,0.0625,0\ntdb_cur,8,0.0039,0\n"
        "svd_optimal,2,0.25,0\nsvd_optimal,4,0.0625,0\nsvd_optimal,8,0.0039,0\n",
    ),
    "error_vs_dt": (
        "error_vs_dt.csv",
        "method,r,dt,error,failed\n"
        "tdb_cur,32,0.125,5.4e-3,0\ntdb_cur,32,0.0625,3.6e-4,0\ntdb_cur,32,0.03125,2.3e-5,0\n",
    ),
    "error_vs_time": (
        "error_vs_time.csv",
        "t,r,error\n0.1,6,1e-3\n0.2,6,9e-4\n0.3,6,8.5e-4\n",
    ),
    "rank_vs_time": (
        "trajectory_rank.csv",
        "t,r\n0.1,18\n0.2,18\n0.3,19\n0.4,20\n",
    ),
    "singular_values_vs_time": (
        "trajectory_svals.csv",
        "t,sigma_1,sigma_2\n0.1,1.0,0.1\n0.2,1.1,0.12\n0.3,1.2,\n",
    ),
    "cpu_scaling": (
        "scaling.csv",
        "method,n,s,median_step_ms,steps_timed,skipped\n"
        "fom,201,201,1.1,50,0\nfom,401,401,3.6,50,0\nfom,801,801,24.0,50,0\n"
        "tdb_cur,201,201,1.3,50,0\ntdb_cur,401,401,1.7,50,0\ntdb_cur,801,801,2.7,50,0\n",
    ),
}


@pytest.mark.parametrize("kind", sorted(SYNTH))
def test_renders_each_kind_from_synthesized_csv(tmp_path, kind):
    name, text = SYNTH[kind]
    write(tmp_path / name, text)
    spec = spec_file(tmp_path, kind=kind, input=name, output=f"out/{kind}")
    written = render(spec)
    assert [p.suffix for p in written] == [".svg", ".png"]
    for p in written:
        assert p.exists() and p.stat().st_size > 0


def test_multi_input_series(tmp_path):
    write(tmp_path / "a.csv", "t,r,error\n0.1,6,1e-3\n0.2,6,9e-4\n")
    write(tmp_path / "b.csv", "t,r,error\n0.1,9,5e-4\n0.2,9,4e-4\n")
    spec = spec_file(
        tmp_path,
        kind="error_vs_time",
        inputs=[{"path": "a.csv", "label": "r=6"}, {"path": "b.csv", "label": "r=9"}],
        output="out/multi",
    )
    assert all(p.exists() for p in render(spec))


def test_missing_column_names_column_and_file(tmp_path):
    write(tmp_path / "bad.csv", "method,r\ntdb_cur,2\n")
    spec = spec_file(tmp_path, kind="error_vs_rank", input="bad.csv", output="out/x")
    with pytest.raises(FigureError, match="error.*bad.csv"):
        render(spec)
    assert not (tmp_path / "out" / "x.svg").exists()


def test_empty_series_is_an_error_and_no_file(tmp_path):
    write(tmp_path / "empty.csv", "method,r,error,failed\ntdb_cur,2,,1\n")
    spec = spec_file(tmp_path, kind="error_vs_rank", input="empty.csv", output="out/y")
    with pytest.raises(FigureError):
        render(spec)
    assert not (tmp_path / "out" / "y.svg").exists()


def test_rerender_is_byte_identical(tmp_path):
    name, text = SYNTH["error_vs_rank"]
    write(tmp_path / name, text)
    spec = spec_file(tmp_path, kind="error_vs_rank", input=name, output="out/z")
    first = render(spec)[0].read_bytes()
    second = render(spec)[0].read_bytes()
    assert first == second


def test_cli_exit_codes(tmp_path):
    name, text = SYNTH["cpu_scaling"]
    write(tmp_path / name, text)
    spec = spec_file(tmp_path, kind="cpu_scaling", input=name, output="out/cli")
    ok = subprocess.run(
        [sys.executable, str(FIGURES / "render.py"), "--spec", str(spec)],
        capture_output=True,
        text=True,
    )
    assert ok.returncode == 0, ok.stderr
    bad = subprocess.run(
        [sys.executable, str(FIGURES / "render.py"), "--spec", str(tmp_path / "nope.json")],
        capture_output=True,
        text=True,
    )
    assert bad.returncode == 1


ACCEPTANCE_SPECS = [
    ("error_vs_rank", "a1_toy_rank_sweep/error_vs_rank.csv"),
    ("error_vs_dt", "a4_toy_dt_sweep/error_vs_dt.csv"),
    ("error_vs_time", "a1_toy_error_vs_time/error_vs_time.csv"),
    ("rank_vs_time", "a7_burgers_adaptive/trajectory.csv"),
    ("singular_values_vs_time", "a7_burgers_adaptive/trajectory.csv"),
    ("cpu_scaling", "a8_burgers_scaling/scaling.csv"),
]


@pytest.mark.parametrize("kind,rel", ACCEPTANCE_SPECS)
def test_renders_acceptance_artifacts(tmp_path, kind, rel):
    """The six paper-style figures from the real benchmark artifacts."""
    source = ARTIFACTS / rel
    if not source.exists():
        pytest.skip(f"acceptance artifact {rel} not present; run the solver acceptance suite")
    spec = spec_file(tmp_path, kind=kind, input=str(source), output=f"rendered/{kind}")
    written = render(spec)
    assert all(p.exists() and p.stat().st_size > 0 for p in written)
