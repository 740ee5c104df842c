"""Tests for the expression grammar, problem documents, and command runner."""

import json

import pytest

from fsgroupoid.cli import (
    DEFAULT_ORDER, DEMOS, InfeasibleError, ParseError, demo_document,
    load_problem, main, parse_expression, parser_roundtrip, poly_to_json,
    run, series_to_json,
)
from fsgroupoid.series_core import (
    BasePolynomial, FibreSeries, PreconditionError, Scalar,
)

NAMES = ["x1", "x2"]


def flat_doc(**overrides):
    doc = {"dim": 2, "coordinates": ["x1", "x2"], "field": "rational",
           "poisson": [["0", "1"], ["-1", "0"]],
           "connection": {"type": "explicit",
                          "gamma": [[["0", "0"], ["0", "0"]],
                                    [["0", "0"], ["0", "0"]]]},
           "pq": {"type": "half"}, "order": 4,
           "functions": {"f": "x1", "g": "x2"}}
    doc.update(overrides)
    return doc


def broken_jacobi_doc():
    zero3 = [[["0", "0", "0"] for _ in range(3)] for _ in range(3)]
    return {"dim": 3, "coordinates": ["x1", "x2", "x3"], "field": "rational",
            "poisson": [["0", "x1", "0"], ["-x1", "0", "x2"],
                        ["0", "-x2", "0"]],
            "connection": {"type": "explicit", "gamma": zero3},
            "order": 3}


# -- expression grammar ----------------------------------------------------------


def test_parse_basic_forms():
    p = parse_expression("x1*x2 + 1", NAMES)
    one = BasePolynomial.const(2, 1)
    x1 = BasePolynomial.var(2, 0)
    x2 = BasePolynomial.var(2, 1)
    assert p == x1 * x2 + one
    q = parse_expression("(1 + z*zb)^2", ["z", "zb"])
    z = BasePolynomial.var(2, 0)
    zb = BasePolynomial.var(2, 1)
    assert q == (one + z * zb) * (one + z * zb)
    r = parse_expression("1/2*x1 - I*x2", NAMES)
    assert r == x1 * Scalar(1, 0) * (1 / Scalar(2)) - x2 * Scalar(0, 1)


def test_parse_precedence_and_signs():
    x1 = BasePolynomial.var(2, 0)
    assert parse_expression("-x1^2", NAMES) == -(x1 * x1)
    assert parse_expression("2 - -3", NAMES) == BasePolynomial.const(2, 5)
    assert parse_expression("2^3", NAMES) == BasePolynomial.const(2, 8)
    assert parse_expression("x1/2", NAMES) == x1 * (1 / Scalar(2))
    assert parse_expression("  x1 \t+\n x1 ", NAMES) == x1 + x1


def test_parse_division_errors():
    with pytest.raises(ParseError, match="division by non-unit"):
        parse_expression("x1/x2", NAMES)
    with pytest.raises(ParseError, match="division by non-unit"):
        parse_expression("1/0", NAMES)
    with pytest.raises(ParseError, match="division by non-unit"):
        parse_expression("x1/(x2 - x2)", NAMES)


def test_parse_identifier_and_syntax_errors():
    with pytest.raises(ParseError, match="unknown identifier"):
        parse_expression("x9 + 1", NAMES)
    with pytest.raises(ParseError) as exc:
        parse_expression("x1 +", NAMES)
    assert exc.value.position == 4
    with pytest.raises(ParseError, match="closing parenthesis"):
        parse_expression("(x1 + x2", NAMES)
    with pytest.raises(ParseError, match="exponent"):
        parse_expression("x1^x2", NAMES)
    with pytest.raises(ParseError, match="unexpected character"):
        parse_expression("x1 $ x2", NAMES)


def test_roundtrip_rational_and_gaussian():
    report = parser_roundtrip(NAMES, gaussian=False)
    assert report["passed"] and report["count"] == 100
    report = parser_roundtrip(["z", "zb"], gaussian=True)
    assert report["passed"]
    assert report["seed"] == 20260822


# -- serialization ---------------------------------------------------------------


def test_series_serialization_is_canonical():
    s = (FibreSeries.xi_var(2, 1) * BasePolynomial.const(2, Scalar(1, 0) / Scalar(2))
         + FibreSeries.from_poly(BasePolynomial.var(2, 0)))
    doc = series_to_json(s)
    assert doc["order"] is None
    assert doc["terms"] == [
        {"xi_multi_index": [0, 0], "x_multi_index": [1, 0], "coeff": "1"},
        {"xi_multi_index": [0, 1], "x_multi_index": [0, 0], "coeff": "1/2"},
    ]
    p = BasePolynomial.var(2, 0) * Scalar(0, 1) + BasePolynomial.const(2, 3)
    assert poly_to_json(p) == [
        {"x_multi_index": [0, 0], "coeff": "3"},
        {"x_multi_index": [1, 0], "coeff": "I"},
    ]


# -- problem documents -----------------------------------------------------------


def test_load_explicit_document():
    spec = load_problem(flat_doc())
    assert spec.dim == 2
    assert spec.coordinates == ("x1", "x2")
    assert spec.order == 4
    assert spec.pq_type == "half"
    assert spec.kahler is None
    assert [nm for nm, _ in spec.functions] == ["f", "g"]
    assert spec.poisson.entry(0, 1) == BasePolynomial.const(2, 1)
    assert spec.connection_dag is spec.connection


def test_load_kahler_document():
    doc = {"dim": 2, "coordinates": ["z", "zb"], "field": "gaussian",
           "connection": {"type": "kahler", "metric": [["1 + z*zb"]]},
           "pq": {"type": "kahler"}, "order": 3, "functions": {}}
    spec = load_problem(doc)
    assert spec.kahler is not None
    g = BasePolynomial.const(2, 1) + BasePolynomial.var(2, 0) * BasePolynomial.var(2, 1)
    assert spec.poisson.entry(1, 0) == g
    assert spec.poisson.entry(0, 1) == -g
    doc["poisson"] = [["0", "1"], ["-1", "0"]]
    with pytest.raises(ParseError, match="does not match"):
        load_problem(doc)
    with pytest.raises(ParseError, match="even dimension"):
        load_problem({"dim": 3, "coordinates": ["a", "b", "c"],
                      "connection": {"type": "kahler", "metric": [["1"]]}})


def test_load_lie_poisson_documents():
    # [e1, e2] = e2 is feasible
    c = [[[0, 0], [0, 1]], [[0, -1], [0, 0]]]
    doc = {"dim": 2, "coordinates": ["x1", "x2"], "field": "rational",
           "connection": {"type": "lie_poisson", "structure_constants": c},
           "order": 3}
    spec = load_problem(doc)
    assert spec.poisson.entry(0, 1) == BasePolynomial.var(2, 1)
    assert demo_document("su2-obstruction")["connection"]["type"] == "lie_poisson"
    with pytest.raises(InfeasibleError) as exc:
        load_problem(demo_document("su2-obstruction"))
    assert exc.value.certificate and not exc.value.certificate["feasible"]
    bad = dict(doc)
    bad["connection"] = {"type": "lie_poisson",
                         "structure_constants": [[[0, 0], [0, 1]],
                                                 [[0, 1], [0, 0]]]}
    with pytest.raises(PreconditionError, match="antisymmetric"):
        load_problem(bad)


def test_load_rejects_malformed_documents():
    with pytest.raises(ParseError, match="missing 'dim'"):
        load_problem({"coordinates": ["x1"]})
    with pytest.raises(ParseError, match="distinct"):
        load_problem(flat_doc(coordinates=["x1", "x1"]))
    with pytest.raises(ParseError, match="coordinate name"):
        load_problem(flat_doc(coordinates=["x1", "I"]))
    with pytest.raises(ParseError, match="coordinate name"):
        load_problem(flat_doc(coordinates=["x1", "2x"]))
    with pytest.raises(ParseError, match="field"):
        load_problem(flat_doc(field="real"))
    with pytest.raises(ParseError, match="order"):
        load_problem(flat_doc(order=0))
    with pytest.raises(ParseError, match="order"):
        load_problem(flat_doc(order="six"))
    with pytest.raises(ParseError, match="pq type"):
        load_problem(flat_doc(pq={"type": "thirds"}))
    with pytest.raises(ParseError, match="functions"):
        load_problem(flat_doc(functions=["x1"]))
    with pytest.raises(ParseError, match="matrix"):
        load_problem(flat_doc(poisson=[["0", "1"]]))
    with pytest.raises(ParseError, match="connection type"):
        load_problem(flat_doc(connection={"type": "levi-civita"}))


def test_load_rational_field_rejects_imaginary_geometry():
    doc = flat_doc(poisson=[["0", "I"], ["-I", "0"]])
    with pytest.raises(ParseError, match="imaginary"):
        load_problem(doc)
    # the same matrix is fine over the gaussian field
    doc["field"] = "gaussian"
    assert load_problem(doc).field == "gaussian"


def test_order_resolution_precedence():
    doc = flat_doc()
    del doc["order"]
    assert load_problem(doc).order == DEFAULT_ORDER
    assert load_problem(doc, default_order=3).order == 3
    doc["order"] = 5
    assert load_problem(doc, default_order=3).order == 5
    assert load_problem(doc, order=2, default_order=3).order == 2


# -- the command runner ----------------------------------------------------------


def test_run_validate_pass_and_fail():
    report, code = run("validate", flat_doc())
    assert code == 0 and report["exit_code"] == 0
    assert all(c["passed"] for c in report["checks"])
    report, code = run("validate", broken_jacobi_doc())
    assert code == 1
    jacobi = [c for c in report["checks"] if c["name"] == "poisson-jacobi"][0]
    assert not jacobi["passed"]
    assert jacobi["residuals"] == {
        "(0, 1, 2)": [{"x_multi_index": [1, 0, 0], "coeff": "1"}]}


def test_run_check_stops_after_failed_validation():
    report, code = run("check", broken_jacobi_doc())
    assert code == 1
    assert "solution" not in report and "groupoid" not in report


def test_run_solve_report():
    report, code = run("solve", demo_document("aff1"))
    assert code == 0
    assert report["solution"]["u"][0]["terms"] == [
        {"xi_multi_index": [0, 1], "x_multi_index": [0, 1], "coeff": "-1"}]
    assert report["solution"]["u"][1]["terms"] == [
        {"xi_multi_index": [1, 0], "x_multi_index": [0, 1], "coeff": "1"}]
    names = [c["name"] for c in report["checks"]]
    for wanted in ("solution-normalization", "solution-compatibility",
                   "solution-potential-relation",
                   "fundamental-equation-residual", "curvature-flatness"):
        assert wanted in names
    assert all(c["passed"] for c in report["checks"])
    steps = [entry["step"] for entry in report["solution"]["audit"]]
    assert steps == sorted(steps)


def test_run_lift_report():
    report, code = run("lift", flat_doc(), functions=["f"])
    assert code == 0
    assert list(report["lift"]) == ["f"]
    assert report["lift"]["f"]["value"]["terms"] == [
        {"xi_multi_index": [0, 0], "x_multi_index": [1, 0], "coeff": "1"},
        {"xi_multi_index": [0, 1], "x_multi_index": [0, 0], "coeff": "-1"}]
    with pytest.raises(ParseError, match="unknown function"):
        run("lift", flat_doc(), functions=["nope"])


def test_run_groupoid_report():
    report, code = run("groupoid", flat_doc())
    assert code == 0
    section = report["groupoid"]
    assert section["identity_change_of_variables"]
    assert section["images"]["f"]["source"]["value"]["terms"] == [
        {"xi_multi_index": [0, 0], "x_multi_index": [1, 0], "coeff": "1"},
        {"xi_multi_index": [0, 1], "x_multi_index": [0, 0], "coeff": "1/2"}]
    assert section["images"]["f"]["target"]["value"]["terms"] == [
        {"xi_multi_index": [0, 0], "x_multi_index": [1, 0], "coeff": "1"},
        {"xi_multi_index": [0, 1], "x_multi_index": [0, 0], "coeff": "-1/2"}]


def test_run_check_full_suite():
    report, code = run("check", flat_doc())
    assert code == 0
    names = [c["name"] for c in report["checks"]]
    assert "groupoid-morphisms" in names
    assert "parser-roundtrip" in names
    morph = [c for c in report["checks"] if c["name"] == "groupoid-morphisms"][0]
    assert morph["passed"] and morph["pairs"]
    kinds = {entry["kind"] for entry in morph["pairs"]}
    assert kinds == {"source", "target", "commute"}


def test_run_rejects_bad_commands():
    with pytest.raises(ParseError):
        run("frobnicate", flat_doc())
    with pytest.raises(ParseError):
        run("demo", flat_doc())


# -- the process entry point -----------------------------------------------------


def test_main_demo_flat(capsys):
    code = main(["demo", "flat-symplectic"])
    captured = capsys.readouterr()
    assert code == 0
    report = json.loads(captured.out)
    assert report["demo"] == "flat-symplectic"
    assert report["command"] == "demo"
    assert report["order"] == 8
    sx1 = report["groupoid"]["images"]["f"]["source"]["value"]["terms"]
    assert {"xi_multi_index": [0, 1], "x_multi_index": [0, 0],
            "coeff": "1/2"} in sx1
    assert "# elapsed" in captured.err


def test_main_demo_su2_obstruction(capsys):
    code = main(["demo", "su2-obstruction"])
    captured = capsys.readouterr()
    assert code == 3
    report = json.loads(captured.out)
    assert report["status"] == "INFEASIBLE"
    assert report["certificate"]["feasible"] is False
    assert report["certificate"]["combination"]


def test_main_exit_code_two_paths(capsys, tmp_path):
    assert main(["demo", "not-a-demo"]) == 2
    assert main(["validate", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert main(["validate", str(bad)]) == 2
    assert main(["solve"]) == 2  # no document given
    doc = tmp_path / "division.json"
    doc.write_text(json.dumps(flat_doc(functions={"f": "x1/x2"})))
    assert main(["lift", str(doc)]) == 2
    capsys.readouterr()


def test_main_validate_broken_jacobi(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(broken_jacobi_doc()))
    assert main(["validate", str(path)]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["exit_code"] == 1


def test_main_byte_identical_reports(capsys):
    assert main(["demo", "aff1"]) == 0
    first = capsys.readouterr().out
    assert main(["demo", "aff1"]) == 0
    second = capsys.readouterr().out
    assert first and first == second


def test_main_output_file_and_quiet(capsys, tmp_path):
    out = tmp_path / "report.json"
    code = main(["demo", "abelian", "--output", str(out), "--quiet"])
    captured = capsys.readouterr()
    assert code == 0
    assert captured.out == "" and captured.err == ""
    on_disk = out.read_text()
    assert json.loads(on_disk)["demo"] == "abelian"
    assert main(["demo", "abelian"]) == 0
    assert capsys.readouterr().out == on_disk


def test_main_order_flag_and_env(capsys, tmp_path, monkeypatch):
    path = tmp_path / "flat.json"
    doc = flat_doc()
    del doc["order"]
    path.write_text(json.dumps(doc))
    monkeypatch.setenv("FSGROUPOID_ORDER", "3")
    assert main(["solve", str(path), "--quiet"]) == 0
    assert main(["solve", str(path), "--order", "2", "--output",
                 str(tmp_path / "o.json"), "--quiet"]) == 0
    assert json.loads((tmp_path / "o.json").read_text())["order"] == 2
    monkeypatch.setenv("FSGROUPOID_ORDER", "zero")
    assert main(["solve", str(path), "--quiet"]) == 2
    capsys.readouterr()


def test_main_env_order_applies_when_document_is_silent(capsys, tmp_path, monkeypatch):
    path = tmp_path / "flat.json"
    doc = flat_doc()
    del doc["order"]
    path.write_text(json.dumps(doc))
    monkeypatch.setenv("FSGROUPOID_ORDER", "3")
    assert main(["solve", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["order"] == 3


def test_main_function_flag(capsys, tmp_path):
    path = tmp_path / "flat.json"
    path.write_text(json.dumps(flat_doc()))
    assert main(["lift", str(path), "--function", "g"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert list(report["lift"]) == ["g"]


def test_main_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["conjure"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_demo_documents_are_copied():
    doc = demo_document("flat-symplectic")
    doc["order"] = 99
    assert DEMOS["flat-symplectic"]["order"] == 8
    assert demo_document("flat-symplectic")["order"] == 8
