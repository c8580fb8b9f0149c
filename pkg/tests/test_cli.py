import csv
import io
import json

import pytest

from artifact.characters import from_conrey, teichmuller_char
from artifact.cli import UsageError, main, parse_char


def test_parse_char():
    assert parse_char("1").is_trivial()
    chi = from_conrey(7, 3)
    assert parse_char("conrey:7.3").table == chi.table
    assert parse_char(json.dumps(chi.to_json())).table == chi.table
    assert parse_char("5:[2/4]").table == teichmuller_char(5, 2).table
    assert parse_char("5:2/4").table == teichmuller_char(5, 2).table
    for bad in ("x", "5:1/3", "conrey:6.2"):
        with pytest.raises(UsageError):
            parse_char(bad)


def _run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


def test_formats(capsys):
    code, out = _run(capsys, ["cusps", "list", "--level", "11", "--group", "g0"])
    assert code == 0
    rep = json.loads(out)
    assert len(rep["rows"]) == 2 and rep["manifest"]["versions"]["artifact"] == "0.1.0"
    code, out = _run(capsys, ["cusps", "list", "--level", "5", "--format", "csv"])
    assert code == 0 and len(list(csv.DictReader(io.StringIO(out)))) == 4
    code, out = _run(capsys, ["cusps", "list", "--level", "5", "--format", "markdown"])
    assert code == 0 and out.startswith("| ") and len(out.strip().splitlines()) == 6


def test_exit_codes(capsys, tmp_path):
    dest = tmp_path / "q.json"
    assert main(["eis", "qexp", "--chi1", "conrey:4.3", "--weight", "3", "--out", str(dest)]) == 0
    assert json.loads(dest.read_text())["manifest"]["outputs"] == [str(dest)]
    # parity mismatch is a precondition failure
    assert main(["eis", "qexp", "--chi1", "conrey:4.3", "--weight", "2"]) == 2
    assert main(["eis", "qexp", "--chi1", "nonsense", "--weight", "2"]) == 2
    assert main(["run", "nosuch"]) == 2
    assert main(["eis", "hecke", "--chi1", "conrey:5.2", "--chi2", "conrey:4.3", "--weight", "2",
                 "--ell", "3"]) == 0
    assert main(["lambda", "congmod", "--partner", "f11"]) == 0
    capsys.readouterr()


def test_env_out_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("ARTIFACT_OUT_DIR", str(tmp_path))
    assert main(["cusps", "ordinary", "--level", "2", "--p", "3"]) == 0
    rep = json.loads((tmp_path / "cusps-ordinary.json").read_text())
    assert rep["idempotent"] and rep["level"] == 6
