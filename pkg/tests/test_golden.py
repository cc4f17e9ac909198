import pytest

from diffko.cli import GOLDEN_CASES, main, render_case

from conftest import GOLDEN


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden_file_regenerates(name):
    assert (GOLDEN / name).read_text() == render_case(GOLDEN_CASES[name])


def test_verify_golden_against_env_dir(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("DIFFKO_GOLDEN_DIR", str(GOLDEN))
    assert main(["verify", "--golden"]) == 0
    monkeypatch.setenv("DIFFKO_GOLDEN_DIR", str(tmp_path))
    assert main(["verify", "--golden"]) == 1
