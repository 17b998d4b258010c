import pytest

from sfmkl.cli import build_parser, main
from test_config import BASE


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "tiny.yaml"
    p.write_text(BASE.replace("[300, 500]", "[300]").replace("[uniform, l1, l2]", "[uniform, l2]"))
    return p


def test_kernel_check(capsys):
    assert main(["kernel-check", "--cases", "10"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 4 and all(line.startswith("[PASS]") for line in out)


def test_run_writes_report(tmp_path, cfg_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(cfg_path), "--out", str(out), "--seed-list", "3", "--threads", "2"]) == 0
    lines = (out / "report.csv").read_text().splitlines()
    assert len(lines) == 3
    assert all(",3," in line for line in lines[1:])
    assert "wrote" in capsys.readouterr().out


def test_run_json(tmp_path, cfg_path):
    out = tmp_path / "out"
    assert main(["run", str(cfg_path), "--out", str(out), "--format", "json", "--freq", "400"]) == 0
    assert (out / "report.json").exists()
    assert (out / "gamma_400_l2_0.csv").exists()


def test_slice(tmp_path, cfg_path, capsys):
    out = tmp_path / "sl"
    assert main(["slice", str(cfg_path), "--plane", "z=0", "--freq", "300", "--method", "l2",
                 "--spacing", "0.1", "--out", str(out)]) == 0
    files = list(out.glob("slice_z0_300_l2_0.csv"))
    assert len(files) == 1
    assert files[0].read_text().splitlines()[0].startswith("x,y,true_re")


def test_bad_config_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text(BASE.replace("[uniform, l1, l2]", "[]"))
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "methods" in capsys.readouterr().err


def test_missing_config_exit_code(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.yaml")]) == 2
    assert "sfmkl: error" in capsys.readouterr().err


def test_bad_plane_exit_code(cfg_path, tmp_path):
    assert main(["slice", str(cfg_path), "--plane", "w=1", "--freq", "300", "--out", str(tmp_path)]) == 2


def test_seed_list_parsing():
    args = build_parser().parse_args(["run", "cfg", "--seed-list", "0,2,5"])
    assert args.seed_list == (0, 2, 5)
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "cfg", "--seed-list", "a,b"])
