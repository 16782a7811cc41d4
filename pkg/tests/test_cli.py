import json

import pytest

from asymstab.cli import BadMatrix, ParseError, UnknownName, main, parse_jobspec, run
from asymstab.modules import BadRing


def run_main(capsys, text, *flags, tmp_path=None):
    path = tmp_path / "job.txt"
    path.write_text(text)
    code = main(["--job", str(path), *flags])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_examples():
    job = parse_jobspec("ring Z; module A rel [[5]]; cmd stabilize A Z")
    assert job.command == "stabilize" and job.module("A").describe() == "Z/5"
    job = parse_jobspec("ring Z/4; module A rel [[2]]; cmd asymptotic A A n=0")
    assert job.params == {"n": 0} and job.ring.modulus == 4
    with pytest.raises(BadRing):
        parse_jobspec("ring Z/1; cmd verify-cubes")


def test_multiline_with_comments_and_maps():
    job = parse_jobspec("""
        ring Z/4   # the ring
        module S gens 1 rel [[2]]
        module M gens 1
        map f S M [[2]]
        map g M S [[1]]
        ses E f g
        cmd omega S E n=1
    """)
    assert set(job.maps) == {"f", "g"} and "E" in job.sequences


def test_parse_error_positions():
    with pytest.raises(ParseError) as e:
        parse_jobspec("ring Z/4\nmodule A rel [[2]\ncmd stabilize A A")
    assert e.value.line == 2 and e.value.column > 1
    with pytest.raises(ParseError) as e:
        parse_jobspec("ring Z; frobnicate")
    assert (e.value.line, e.value.column) == (1, 9)
    with pytest.raises(ParseError):
        parse_jobspec("module A rel [[2]]; ring Z")
    with pytest.raises(ParseError):
        parse_jobspec("ring Q")


def test_unknown_names_and_bad_matrices():
    with pytest.raises(UnknownName):
        parse_jobspec("ring Z; cmd stabilize A Z")
    with pytest.raises(UnknownName):
        parse_jobspec("ring Z/4; module A rel [[2]]; cmd omega A E")
    with pytest.raises(BadMatrix):
        parse_jobspec("ring Z; module A gens 2 rel [[1, 2], [3]]; cmd stabilize A Z")
    with pytest.raises(BadMatrix):
        parse_jobspec("ring Z/4; module A rel [[2]]; map f A A [[1, 1]]; cmd stabilize A A")
    with pytest.raises(BadMatrix):
        parse_jobspec("ring Z/4; module A rel [[2]]; module B gens 1; map f A B [[1]]; cmd stabilize A A")


def test_spec_reports():
    assert run(parse_jobspec("ring Z; module A rel [[5]]; cmd stabilize A Z")).data["result"] == "Z/5"
    rep = run(parse_jobspec("ring Z; module A rel [[3]]; cmd asymptotic A Z n=0"))
    assert rep.data["result"] == "0, StabilizedAt(1)" and rep.ok
    rep = run(parse_jobspec("ring Z/4; cmd verify-cubes seed=1 count=25"))
    assert rep.data["result"] == "25/25 anticommutation OK" and rep.ok


@pytest.mark.parametrize("cmd", ["tower A A n=1", "intertwine A A n=0", "satellite A A n=-1",
                                 "vogel-roundtrip A A n=0", "tor A A n=2", "omega A E n=1"])
def test_reports_embed_certificate_and_truncation(cmd):
    job = parse_jobspec(f"ring Z/4; module A rel [[2]]; module M gens 1; map f A M [[2]]; map g M A [[1]]; "
                        f"ses E f g; cmd {cmd}")
    rep = run(job)
    assert rep.ok and "certificate" in rep.data and "truncation" in rep.data


def test_machine_output_is_deterministic(capsys, tmp_path):
    text = "ring Z/9; module A rel [[3]]; cmd vogel-roundtrip A A n=0"
    outs = [run_main(capsys, text, "--emit", "machine", "--seed", "7", tmp_path=tmp_path) for _ in range(2)]
    assert outs[0][0] == 0 and outs[0][1] == outs[1][1]
    data = json.loads(outs[0][1])
    assert data["result"] == "round trip exact" and "time" not in outs[0][1]


def test_text_output_and_exit_codes(capsys, tmp_path):
    code, out, _ = run_main(capsys, "ring Z; module A rel [[5]]; cmd stabilize A Z", tmp_path=tmp_path)
    assert code == 0 and "result: Z/5" in out and "truncation: 5^3" in out
    code, _, err = run_main(capsys, "ring Z; cmd stabilize Q Z", tmp_path=tmp_path)
    assert code == 2 and "UnknownName" in err
    code, _, err = run_main(capsys, "ring Z/4; module A rel [[2]]; module M gens 1; map f A M [[2]]; "
                            "map g M A [[0]]; ses E f g; cmd omega A E", tmp_path=tmp_path)
    assert code == 2 and "not short exact" in err
    assert main(["--job", str(tmp_path / "missing.txt")]) == 2


def test_failed_verification_exits_one(capsys, tmp_path, monkeypatch):
    import asymstab.cli as cli

    monkeypatch.setattr(cli, "run", lambda job, *a: cli.Report({"result": "x"}, False))
    code, out, _ = run_main(capsys, "ring Z/4; cmd verify-cubes", tmp_path=tmp_path)
    assert code == 1 and "status: FAILED" in out
