import json

from hypothesis import given, settings, strategies as st

from wavereduce.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, main, parse_job_text, run


def write_job(tmp_path, text, name="job.txt"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_reduce_radial_job(tmp_path, capsys):
    job = write_job(tmp_path, "job: reduce\ny: x0\nz: sqrt(x1^2+x2^2)\nn: 2\n")
    assert main(["reduce", "--job", job]) == EXIT_PASS
    out = capsys.readouterr().out
    assert "case: hyperbolic (rs-q^2 < 0)" in out
    assert "closed: true" in out
    assert "phi_z: -1/z" in out and "phi_zz: -1" in out and "phi_yy: 1" in out


def test_compat_parabolic_job(tmp_path, capsys):
    job = write_job(tmp_path, 'kind: parabolic\nn: 3\nlambda: 1\nf: ["0", "1"]\n')
    assert main(["compat", "--job", job]) == EXIT_PASS
    out = capsys.readouterr().out
    assert out.startswith("COMPATIBLE case=parabolic n=3")
    assert "V = 1/v" in out and "W = 0" in out


def test_compat_incompatible_has_witness(capsys):
    code = main(["compat", "--n", "3", "--set", "kind=parabolic", "--set", "lambda=1",
                 "--set", "f=0;0;0;0;1"])
    assert code == EXIT_FAIL
    assert "witness" in capsys.readouterr().out


def test_parse_error_reports_position(capsys):
    assert main(["reduce", "--y", "x0 +", "--z", "x1", "--n", "2"]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "parse error" in err and "offset 4" in err


def test_not_closed_is_math_failure(capsys):
    assert main(["reduce", "--y", "x0", "--z", "x1*x2", "--n", "2"]) == EXIT_FAIL
    assert "closed: false" in capsys.readouterr().out


def test_usage_errors(tmp_path, capsys):
    assert main(["reduce", "--job", str(tmp_path / "missing.txt")]) == EXIT_USAGE
    assert main(["reduce", "--y", "x0", "--n", "2"]) == EXIT_USAGE
    assert main(["reduce", "--y", "x0", "--z", "x1", "--n", "2", "--set", "bogus=1"]) == EXIT_USAGE
    assert main(["nosuch"]) == EXIT_USAGE
    bad = write_job(tmp_path, "y x0\n")
    assert main(["reduce", "--job", bad]) == EXIT_USAGE
    wrong = write_job(tmp_path, "job: compat\ny: x0\nz: x1\nn: 2\n", "w.txt")
    assert main(["reduce", "--job", wrong]) == EXIT_USAGE
    capsys.readouterr()


def test_verify_pass_line(capsys):
    code = main(["verify", "--n", "2", "--set", "v=x0+x1", "--set", "w=x0-x1",
                 "--set", "phi=v*w", "--F", "4"])
    assert code == EXIT_PASS
    first = capsys.readouterr().out.splitlines()[0]
    assert first.startswith("PASS max=")


def test_verify_fail(capsys):
    code = main(["verify", "--n", "2", "--set", "v=x0+x1", "--set", "w=x0-x1",
                 "--set", "phi=v*w", "--F", "0"])
    assert code == EXIT_FAIL
    assert capsys.readouterr().out.startswith("FAIL max=")


def test_q_check_and_single_ansatz(capsys):
    assert main(["q-check", "--set", "A=1;1;0", "--set", "C=1;0;1"]) == EXIT_PASS
    assert "flip_tau2" in capsys.readouterr().out
    assert main(["single-ansatz", "--set", "lambda=1", "--F", "3/u"]) == EXIT_PASS
    out = capsys.readouterr().out
    assert "reading=implemented" in out and "note:" in out


def test_family_job(tmp_path, capsys):
    job = write_job(tmp_path, "rank: 1\nA: 1; cos(p); sin(p)\nC: 1; -cos(s); -sin(s)\npoints: 20\n")
    assert main(["family", "--job", job]) == EXIT_PASS
    assert capsys.readouterr().out.startswith("PASS family rank=1")


def test_out_and_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["classify", "--y", "x0", "--z", "x1", "--n", "2", "--json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["report"]["case"] == "hyperbolic (rs-q^2 < 0)"
    assert capsys.readouterr().out == ""


def test_deterministic_bytes(tmp_path):
    job = write_job(tmp_path, "y: x0\nz: sqrt(x1^2+x2^2)\nn: 2\nseed: 7\n")
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(["reduce", "--job", job, "--out", str(a)]) == 0
    assert main(["reduce", "--job", job, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_job_text_parsing():
    assert parse_job_text("# c\nn: 2  # two\ny: x0\n") == {"n": "2", "y": "x0"}


VALID = [
    ("reduce", {"y": "x0", "z": "x1", "n": "2"}, EXIT_PASS),
    ("reduce", {"y": "x0", "z": "x1*x2", "n": "2"}, EXIT_FAIL),
    ("classify", {"y": "x0+x1", "z": "x0-x1", "n": "2"}, EXIT_PASS),
    ("compat", {"kind": "hyperbolic", "n": "3", "R": "v*w", "f": "1;1", "g": "1"}, EXIT_PASS),
    ("compat", {"kind": "parabolic", "n": "2", "lambda": "1", "f": "0;0;0;1"}, EXIT_FAIL),
    ("single-ansatz", {"lambda": "1", "F": "0"}, EXIT_PASS),
]
INVALID = [
    ("reduce", {"y": "x0 +", "z": "x1", "n": "2"}),
    ("reduce", {"y": "x0", "z": "x1"}),
    ("reduce", {"y": "x0", "z": "x1", "n": "two"}),
    ("compat", {"kind": "sideways", "n": "3"}),
    ("reduce", {"y": "foo(x0)", "z": "x1", "n": "2"}),
    ("verify", {"n": "2", "phi": "v"}),
]


@settings(max_examples=20)
@given(st.sampled_from(VALID + [(k, f, EXIT_USAGE) for k, f in INVALID]))
def test_exit_code_contract(case):
    kind, fields, expected = case
    code, text = run(kind, dict(fields))
    assert code == expected
    assert text.startswith("error:") == (expected == EXIT_USAGE)
