"""Problem documents, the expression grammar, and canonical JSON reports.

A problem document is a single JSON object naming coordinates, the Poisson
matrix, a connection (explicit Christoffel strings, a Kahler metric, or Lie
algebra structure constants), a projector pair, a truncation order, and named
base functions.  Expressions use identifiers, integer and p/q rational
literals, the imaginary unit I, and + - * / ^ with parentheses; division is
only by nonzero constants, which keeps everything polynomial and exact.

Commands: validate (geometry reports), solve (solution dump plus recomputed
certificates), lift (per-function theta series), groupoid (change of
variables and source/target images), check (the full property suite), and
demo (a bundled document end to end).  Reports are emitted as canonical JSON
(sorted keys, canonical term order, lowest-terms rationals) so repeated runs
are byte-identical; wall-clock timing goes to stderr only.  Exit codes:
0 success, 1 a validation or check failure, 2 unreadable input, 3 a proved
infeasibility.
"""

import argparse
import json
import os
import random
import sys
import time
from fractions import Fraction

from .fedosov_solver import fundamental_residual, lift, solve_fundamental
from .groupoid_builder import (
    PQTensors, build_change_of_variables, canonical_bracket, groupoid_checks,
    separation_check, source_target, validate_pq,
)
from .nonlinear_connections import nc_curvature
from .poisson_geometry import (
    Connection, KahlerData, LieAlgebraData, PoissonStructure, conn_analyze,
    kahler_connection, lie_poisson_connection_solve, validate_poisson,
)
from .series_core import (
    BasePolynomial, FibreSeries, PreconditionError, Scalar,
)

DEFAULT_ORDER = 6
ROUNDTRIP_SEED = 20260822
ROUNDTRIP_COUNT = 100
COMMANDS = ("validate", "solve", "lift", "groupoid", "check", "demo")


class ParseError(ValueError):
    """Rejected document or expression; the process exits with code 2."""

    def __init__(self, message, position=None):
        if position is not None:
            message = "%s (at position %d)" % (message, position)
        ValueError.__init__(self, message)
        self.position = position


class InfeasibleError(Exception):
    """A solve step proved infeasible; the process exits with code 3."""

    def __init__(self, message, certificate=None):
        Exception.__init__(self, message)
        self.certificate = certificate


# ---------------------------------------------------------------------------
# expression grammar


def _tokenize(text):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ParseError("unexpected character %r" % ch, i)
    tokens.append(("end", "", len(text)))
    return tokens


class _ExprParser:
    """Precedence climbing over + - (sum), * / (product), ^ (power)."""

    def __init__(self, text, names):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.dim = len(names)
        self.index = {nm: i for i, nm in enumerate(names)}

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self):
        p = self.sum()
        kind, _, at = self.peek()
        if kind != "end":
            raise ParseError("syntax error", at)
        return p

    def sum(self):
        p = self.product()
        while True:
            kind = self.peek()[0]
            if kind == "+":
                self.take()
                p = p + self.product()
            elif kind == "-":
                self.take()
                p = p - self.product()
            else:
                return p

    def product(self):
        p = self.signed()
        while True:
            kind, _, at = self.peek()
            if kind == "*":
                self.take()
                p = p * self.signed()
            elif kind == "/":
                self.take()
                q = self.signed()
                if not q.is_constant() or q.is_zero():
                    raise ParseError("division by non-unit", at)
                p = p * (1 / q.constant_part())
            else:
                return p

    def signed(self):
        kind = self.peek()[0]
        if kind == "-":
            self.take()
            return -self.signed()
        if kind == "+":
            self.take()
            return self.signed()
        return self.power()

    def power(self):
        p = self.atom()
        if self.peek()[0] == "^":
            self.take()
            kind, val, at = self.take()
            if kind != "int":
                raise ParseError("exponent must be a nonnegative integer", at)
            p = p ** int(val)
        return p

    def atom(self):
        kind, val, at = self.take()
        if kind == "int":
            return BasePolynomial.const(self.dim, int(val))
        if kind == "name":
            if val == "I":
                return BasePolynomial.const(self.dim, Scalar(0, 1))
            if val not in self.index:
                raise ParseError("unknown identifier %r" % val, at)
            return BasePolynomial.var(self.dim, self.index[val])
        if kind == "(":
            p = self.sum()
            kind2, _, at2 = self.take()
            if kind2 != ")":
                raise ParseError("expected closing parenthesis", at2)
            return p
        raise ParseError("syntax error", at)


def parse_expression(text, names):
    """Exact polynomial from an expression string over named coordinates."""
    if not isinstance(text, str):
        raise ParseError("expression must be a string, got %r" % (text,))
    return _ExprParser(text, names).parse()


def random_polynomial(rng, dim, gaussian):
    terms = {}
    for _ in range(rng.randint(1, 6)):
        mono = tuple(rng.randint(0, 2) for _ in range(dim))
        re = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        im = Fraction(0)
        if gaussian and rng.random() < 1 / 2:
            im = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        c = Scalar(re, im)
        if not c.is_zero():
            terms[mono] = terms.get(mono, Scalar(0)) + c
    terms = {m: c for m, c in terms.items() if not c.is_zero()}
    return BasePolynomial(dim, terms)


def parser_roundtrip(names, gaussian, seed=ROUNDTRIP_SEED, count=ROUNDTRIP_COUNT):
    """parse(print(p)) = p on seeded random polynomials; seed is reported."""
    rng = random.Random(seed)
    failures = []
    for k in range(count):
        p = random_polynomial(rng, len(names), gaussian)
        if parse_expression(p.to_string(list(names)), names) != p:
            failures.append(k)
    return {"name": "parser-roundtrip", "seed": seed, "count": count,
            "failures": failures, "passed": not failures}


# ---------------------------------------------------------------------------
# canonical serialization


def poly_to_json(p):
    return [{"x_multi_index": list(mono), "coeff": c.to_string()}
            for mono, c in p.sorted_terms()]


def series_to_json(s):
    terms = []
    for xi_mono, poly in s.sorted_terms():
        for x_mono, c in poly.sorted_terms():
            terms.append({"xi_multi_index": list(xi_mono),
                          "x_multi_index": list(x_mono),
                          "coeff": c.to_string()})
    return {"order": s.order, "terms": terms}


def _json_safe(v):
    if isinstance(v, Scalar):
        return v.to_string()
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, FibreSeries):
        return series_to_json(v)
    if isinstance(v, BasePolynomial):
        return poly_to_json(v)
    if isinstance(v, dict):
        return {(k if isinstance(k, str) else repr(k)): _json_safe(x)
                for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    return str(v)


# ---------------------------------------------------------------------------
# problem documents


class ProblemSpec:
    __slots__ = ("dim", "coordinates", "field", "poisson", "connection",
                 "connection_dag", "pq", "pq_type", "kahler", "order",
                 "functions")

    def __init__(self, **kw):
        for name in self.__slots__:
            setattr(self, name, kw[name])


def _require(doc, key, kind, where="document"):
    if key not in doc:
        raise ParseError("%s is missing %r" % (where, key))
    value = doc[key]
    if not isinstance(value, kind):
        raise ParseError("%s field %r has the wrong type" % (where, key))
    return value


def _expr_matrix(rows, names, shape, where):
    if len(rows) != shape[0] or any(not isinstance(r, list) or len(r) != shape[1]
                                    for r in rows):
        raise ParseError("%s must be a %dx%d matrix of expressions"
                         % (where, shape[0], shape[1]))
    return [[parse_expression(e, names) for e in row] for row in rows]


def _rational(v, where):
    if isinstance(v, bool) or isinstance(v, float):
        raise ParseError("%s must be an integer or 'p/q' string" % where)
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            raise ParseError("%s is not a rational literal: %r" % (where, v))
    raise ParseError("%s must be an integer or 'p/q' string" % where)


def _resolve_order(doc, override, default_order):
    raw = override if override is not None else doc.get("order")
    if raw is None:
        raw = default_order if default_order is not None else DEFAULT_ORDER
    if not isinstance(raw, int) or isinstance(raw, bool) or raw < 1:
        raise ParseError("order must be an integer >= 1, got %r" % (raw,))
    return raw


def load_problem(doc, order=None, default_order=None):
    """Assemble geometry objects from a problem document."""
    if not isinstance(doc, dict):
        raise ParseError("problem document must be a JSON object")
    dim = _require(doc, "dim", int)
    if dim < 1:
        raise ParseError("dim must be positive")
    names = _require(doc, "coordinates", list)
    if len(names) != dim or len(set(names)) != dim:
        raise ParseError("coordinates must list %d distinct names" % dim)
    for nm in names:
        if not isinstance(nm, str) or not nm[:1].isalpha() \
                or not all(c.isalnum() or c == "_" for c in nm) or nm == "I":
            raise ParseError("invalid coordinate name %r" % (nm,))
    field = doc.get("field", "rational")
    if field not in ("rational", "gaussian"):
        raise ParseError("field must be 'rational' or 'gaussian'")

    conn_doc = _require(doc, "connection", dict)
    ctype = _require(conn_doc, "type", str, "connection")
    kdata = None
    if ctype == "explicit":
        pi = PoissonStructure(_expr_matrix(_require(doc, "poisson", list),
                                           names, (dim, dim), "poisson"))
        gamma_doc = _require(conn_doc, "gamma", list, "connection")
        if len(gamma_doc) != dim:
            raise ParseError("gamma must be a %d^3 array of expressions" % dim)
        gamma = [_expr_matrix(plane, names, (dim, dim), "gamma")
                 for plane in gamma_doc]
        connection = Connection(pi, gamma)
        if "gamma_dag" in conn_doc:
            gdag = [_expr_matrix(plane, names, (dim, dim), "gamma_dag")
                    for plane in _require(conn_doc, "gamma_dag", list, "connection")]
            connection_dag = Connection(pi, gdag)
        else:
            # a torsion-free Poisson connection is associated with itself
            connection_dag = connection
    elif ctype == "kahler":
        if dim % 2:
            raise ParseError("kahler problems need an even dimension")
        m = conn_doc.get("complex_dim", dim // 2)
        if m * 2 != dim:
            raise ParseError("complex_dim must be dim/2")
        metric = _expr_matrix(_require(conn_doc, "metric", list, "connection"),
                              names, (m, m), "metric")
        kdata = KahlerData(m, metric)
        pi, connection = kahler_connection(kdata)
        connection_dag = connection
        if "poisson" in doc:
            given = _expr_matrix(doc["poisson"], names, (dim, dim), "poisson")
            if any(given[i][j] != pi.entry(i, j)
                   for i in range(dim) for j in range(dim)):
                raise ParseError("poisson matrix does not match the kahler metric")
    elif ctype == "lie_poisson":
        sc = _require(conn_doc, "structure_constants", list, "connection")
        if len(sc) != dim or any(len(p) != dim or any(len(r) != dim for r in p)
                                 for p in sc):
            raise ParseError("structure_constants must be a %d^3 array" % dim)
        c = [[[_rational(sc[i][j][k], "structure constant")
               for k in range(dim)] for j in range(dim)] for i in range(dim)]
        try:
            ldata = LieAlgebraData(c)
        except ValueError as exc:
            raise PreconditionError(str(exc), {"structure_constants": c})
        result = lie_poisson_connection_solve(ldata)
        if not result.feasible:
            raise InfeasibleError(
                "no torsion-free Poisson contravariant connection exists for "
                "these structure constants", result.certificate)
        connection = result.connection
        connection_dag = connection
        pi = connection.poisson
        if "poisson" in doc:
            given = _expr_matrix(doc["poisson"], names, (dim, dim), "poisson")
            if any(given[i][j] != pi.entry(i, j)
                   for i in range(dim) for j in range(dim)):
                raise ParseError("poisson matrix does not match the "
                                 "structure constants")
    else:
        raise ParseError("connection type must be explicit, kahler, or "
                         "lie_poisson, got %r" % ctype)

    if field == "rational":
        values = [p for row in pi.entries for p in row]
        for plane in connection.gamma:
            for row in plane:
                values.extend(row)
        for p in values:
            if any(c.im for c in p.terms.values()):
                raise ParseError("field 'rational' forbids imaginary "
                                 "coefficients in the geometry")

    pq_doc = doc.get("pq", {"type": "half"})
    pq_type = _require(pq_doc, "type", str, "pq")
    if pq_type == "half":
        pq = PQTensors.half(dim)
    elif pq_type == "kahler":
        if dim % 2:
            raise ParseError("kahler projectors need an even dimension")
        pq = PQTensors.kahler(dim // 2)
    elif pq_type == "explicit":
        pq = PQTensors(_expr_matrix(_require(pq_doc, "P", list, "pq"),
                                    names, (dim, dim), "P"),
                       _expr_matrix(_require(pq_doc, "Q", list, "pq"),
                                    names, (dim, dim), "Q"))
    else:
        raise ParseError("pq type must be half, kahler, or explicit")

    fdoc = doc.get("functions", {})
    if not isinstance(fdoc, dict):
        raise ParseError("functions must map names to expression strings")
    functions = [(nm, parse_expression(expr, names))
                 for nm, expr in fdoc.items()]

    return ProblemSpec(dim=dim, coordinates=tuple(names), field=field,
                       poisson=pi, connection=connection,
                       connection_dag=connection_dag, pq=pq, pq_type=pq_type,
                       kahler=kdata,
                       order=_resolve_order(doc, order, default_order),
                       functions=functions)


def _select_functions(spec, wanted):
    if wanted is None:
        return list(spec.functions)
    have = dict(spec.functions)
    missing = [nm for nm in wanted if nm not in have]
    if missing:
        raise ParseError("unknown function name(s): %s" % ", ".join(missing))
    return [(nm, have[nm]) for nm in wanted]


# ---------------------------------------------------------------------------
# command pipeline


def _validate_checks(spec):
    checks = []
    vp = validate_poisson(spec.poisson)
    checks.append({"name": "poisson-antisymmetric", "passed": vp["antisymmetric"]})
    checks.append({"name": "poisson-jacobi",
                   "passed": not vp["jacobi_residuals"],
                   "residuals": _json_safe(vp["jacobi_residuals"])})
    ca = conn_analyze(spec.connection, spec.connection_dag)
    for key, label in (("torsion_free", "connection-torsion-free"),
                       ("dagger_torsion_free", "dagger-torsion-free"),
                       ("respects_poisson", "connection-respects-poisson"),
                       ("associated", "pair-associated")):
        entry = {"name": label, "passed": ca[key]}
        if not ca[key]:
            residual_key = {"torsion_free": "torsion",
                            "dagger_torsion_free": "torsion",
                            "respects_poisson": "poisson_residual",
                            "associated": "association_residual"}[key]
            entry["residual"] = _json_safe(ca[residual_key])
        checks.append(entry)
    pqrep = validate_pq(spec.connection, spec.pq)
    checks.append({"name": "pq-sum-identity", "passed": pqrep["sum_ok"]})
    entry = {"name": "pq-poisson-compatible", "passed": pqrep["pi_ok"]}
    if not pqrep["pi_ok"]:
        entry["residual"] = _json_safe(pqrep["pi_residual"])
    checks.append(entry)
    checks.append({"name": "pq-covariant-constant", "passed": pqrep["nabla_ok"]})
    return checks


def _solution_certificates(spec, sol):
    n = spec.dim
    pi = spec.poisson
    checks = []
    norm = FibreSeries.zero(n)
    for i in range(n):
        norm = norm + sol.u[i] * FibreSeries.xi_var(n, i)
    checks.append({"name": "solution-normalization", "passed": norm.is_zero()})
    compat = True
    for i in range(n):
        acc = FibreSeries.zero(n)
        for k in range(n):
            ent = pi.entry(i, k)
            if not ent.is_zero():
                acc = acc + sol.u_low[k] * ent
        compat = compat and acc == sol.u[i]
    checks.append({"name": "solution-compatibility", "passed": compat})
    potential = True
    for j in range(n):
        for i in range(n):
            acc = FibreSeries.zero(n)
            for s in range(n):
                ent = pi.entry(i, s)
                if not ent.is_zero():
                    acc = acc + sol.v[j][s] * ent
            potential = potential and acc == sol.u[j].diff_xi(i)
    checks.append({"name": "solution-potential-relation", "passed": potential})
    residual = fundamental_residual(sol)
    flat = nc_curvature(sol.d_connection())["flatness_residual"]
    res_ok = all(r.is_zero() for row in residual for r in row)
    flat_ok = all(r.is_zero() for plane in flat for row in plane for r in row)
    entry = {"name": "fundamental-equation-residual", "passed": res_ok}
    if not res_ok:
        entry["residual"] = _json_safe(residual)
    checks.append(entry)
    checks.append({"name": "curvature-flatness", "passed": flat_ok})
    return checks


def _solution_json(sol):
    return {"order": sol.order,
            "u": [series_to_json(s) for s in sol.u],
            "u_low": [series_to_json(s) for s in sol.u_low],
            "v": [[series_to_json(s) for s in row] for row in sol.v],
            "audit": _json_safe(sol.audit)}


def _element_json(el):
    return {"value": series_to_json(el.value),
            "potential": [series_to_json(a) for a in el.potential]}


def _groupoid_section(spec, sol, maps, fns):
    images = {}
    for name, f in fns:
        s, t = source_target(sol, maps, spec.pq, f)
        images[name] = {"source": _element_json(s), "target": _element_json(t)}
    return {"identity_change_of_variables": maps.xizeta.is_identity(),
            "xizeta": [series_to_json(c) for c in maps.xizeta.components],
            "zetaxi": [series_to_json(c) for c in maps.zetaxi.components],
            "amat": [[series_to_json(s) for s in row] for row in maps.amat],
            "images": images}


def _groupoid_residual_checks(spec, sol, maps, fns):
    report = groupoid_checks(sol, maps, spec.pq, [f for _, f in fns])
    names = [nm for nm, _ in fns]
    entries = []
    for kind in ("source", "target", "commute"):
        for (a, b), residual in sorted(report[kind].items()):
            entries.append({"kind": kind, "pair": [names[a], names[b]],
                            "passed": residual.is_zero(),
                            "residual": series_to_json(residual)})
    return {"name": "groupoid-morphisms", "passed": report["passed"],
            "pairs": entries}


def run(command, doc, order=None, functions=None, force_fallback=False,
        default_order=None):
    """Execute one command against a problem document; returns (report, code)."""
    if command not in COMMANDS or command == "demo":
        raise ParseError("unknown command %r" % (command,))
    spec = load_problem(doc, order, default_order)
    fns = _select_functions(spec, functions)
    report = {"command": command,
              "dim": spec.dim,
              "coordinates": list(spec.coordinates),
              "fibre_coordinates": ["xi_" + c for c in spec.coordinates],
              "field": spec.field,
              "order": spec.order}
    checks = _validate_checks(spec)
    geometry_ok = all(c["passed"] for c in checks)
    if command == "validate":
        report["checks"] = checks
        code = 0 if geometry_ok else 1
        report["exit_code"] = code
        return report, code
    if not geometry_ok:
        report["checks"] = checks
        report["exit_code"] = 1
        return report, 1

    sol = solve_fundamental(spec.connection, spec.connection_dag,
                            order=spec.order, force_fallback=force_fallback)
    if command == "solve":
        report["solution"] = _solution_json(sol)
        report["checks"] = checks + _solution_certificates(spec, sol)
        code = 0 if all(c["passed"] for c in report["checks"]) else 1
        report["exit_code"] = code
        return report, code

    if command == "lift":
        report["lift"] = {nm: _element_json(lift(sol, f, spec.order))
                          for nm, f in fns}
        report["exit_code"] = 0
        return report, 0

    maps = build_change_of_variables(sol, spec.pq)
    if command == "groupoid":
        report["groupoid"] = _groupoid_section(spec, sol, maps, fns)
        report["exit_code"] = 0
        return report, 0

    # check: the full property suite
    checks = checks + _solution_certificates(spec, sol)
    checks.append(_groupoid_residual_checks(spec, sol, maps, fns))
    if spec.kahler is not None and spec.pq_type == "kahler":
        sep = separation_check(sol, maps, spec.kahler)
        checks.append({"name": "separation-of-variables",
                       "passed": sep["passed"],
                       "source_residuals": _json_safe(sep["source_residuals"]),
                       "target_residuals": _json_safe(sep["target_residuals"]),
                       "theta_hol_in_antihol_ideal": sep["theta_hol_in_antihol_ideal"],
                       "theta_antihol_in_hol_ideal": sep["theta_antihol_in_hol_ideal"],
                       "u_correction_in_product_ideal": sep["u_correction_in_product_ideal"]})
    checks.append(parser_roundtrip(list(spec.coordinates),
                                   spec.field == "gaussian"))
    report["checks"] = checks
    report["lift"] = {nm: _element_json(lift(sol, f, spec.order))
                      for nm, f in fns}
    report["groupoid"] = _groupoid_section(spec, sol, maps, fns)
    code = 0 if all(c["passed"] for c in checks) else 1
    report["exit_code"] = code
    return report, code


# ---------------------------------------------------------------------------
# bundled demos


def _zero_gamma(dim):
    return [[["0"] * dim for _ in range(dim)] for _ in range(dim)]


def _su2_constants():
    c = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i][j][k] = 1
        c[j][i][k] = -1
    return c


_AFF1_GAMMA = _zero_gamma(2)
_AFF1_GAMMA[0][1][1] = "-1"

DEMOS = {
    "flat-symplectic": {
        "dim": 2, "coordinates": ["x1", "x2"], "field": "rational",
        "poisson": [["0", "1"], ["-1", "0"]],
        "connection": {"type": "explicit", "gamma": _zero_gamma(2)},
        "pq": {"type": "half"}, "order": 8,
        "functions": {"f": "x1", "g": "x2"},
    },
    "abelian": {
        "dim": 2, "coordinates": ["x1", "x2"], "field": "rational",
        "poisson": [["0", "0"], ["0", "0"]],
        "connection": {"type": "explicit", "gamma": _zero_gamma(2)},
        "pq": {"type": "half"}, "order": 6,
        "functions": {"f": "x1*x2 + x1", "g": "x2"},
    },
    "aff1": {
        "dim": 2, "coordinates": ["x1", "x2"], "field": "rational",
        "poisson": [["0", "x2"], ["-x2", "0"]],
        "connection": {"type": "explicit", "gamma": _AFF1_GAMMA},
        "pq": {"type": "half"}, "order": 6,
        "functions": {"f": "x1", "g": "x2"},
    },
    "su2-obstruction": {
        "dim": 3, "coordinates": ["x1", "x2", "x3"], "field": "rational",
        "connection": {"type": "lie_poisson",
                       "structure_constants": _su2_constants()},
        "pq": {"type": "half"}, "order": 4,
        "functions": {"f": "x1", "g": "x2"},
    },
    "kahler-flat": {
        "dim": 2, "coordinates": ["z", "zb"], "field": "gaussian",
        "connection": {"type": "kahler", "metric": [["1"]]},
        "pq": {"type": "kahler"}, "order": 6,
        "functions": {"a": "z", "b": "zb"},
    },
    "kahler-fubini-like": {
        "dim": 2, "coordinates": ["z", "zb"], "field": "gaussian",
        "connection": {"type": "kahler", "metric": [["1 + z*zb"]]},
        "pq": {"type": "kahler"}, "order": 6,
        "functions": {"a": "z", "b": "zb", "ab": "z*zb"},
    },
    "kahler-quadratic": {
        "dim": 2, "coordinates": ["z", "zb"], "field": "gaussian",
        "connection": {"type": "kahler", "metric": [["(1 + z*zb)^2"]]},
        "pq": {"type": "kahler"}, "order": 6,
        "functions": {"a": "z", "b": "zb"},
    },
}


def demo_document(name):
    if name not in DEMOS:
        raise ParseError("unknown demo %r (available: %s)"
                         % (name, ", ".join(sorted(DEMOS))))
    return json.loads(json.dumps(DEMOS[name]))


# ---------------------------------------------------------------------------
# entry point


def _env_order():
    raw = os.environ.get("FSGROUPOID_ORDER")
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ParseError("FSGROUPOID_ORDER must be an integer, got %r" % raw)
    if value < 1:
        raise ParseError("FSGROUPOID_ORDER must be at least 1")
    return value


def build_arg_parser():
    ap = argparse.ArgumentParser(
        prog="fsgroupoid",
        description="Exact formal symplectic groupoid engine over polynomial "
                    "Poisson structures.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("spec", nargs="?",
                    help="problem document path, or a demo name for 'demo'")
    ap.add_argument("--order", type=int, help="truncation order override")
    ap.add_argument("--function", action="append", dest="functions",
                    metavar="NAME", help="restrict to a named function")
    ap.add_argument("--output", help="also write the report to this file")
    ap.add_argument("--quiet", action="store_true",
                    help="suppress stdout and stderr chatter")
    return ap


def _emit(report, args):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    if not args.quiet:
        sys.stdout.write(text)


def main(argv=None):
    args = build_arg_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        if args.command == "demo":
            if not args.spec:
                raise ParseError("demo requires a demo name")
            doc = demo_document(args.spec)
            report, code = run("check", doc, order=args.order,
                               functions=args.functions,
                               default_order=_env_order())
            report["command"] = "demo"
            report["demo"] = args.spec
        else:
            if not args.spec:
                raise ParseError("command %r requires a problem document path"
                                 % args.command)
            try:
                with open(args.spec) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ParseError("cannot read %s: %s" % (args.spec, exc))
            try:
                doc = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ParseError("invalid JSON in %s: %s" % (args.spec, exc))
            report, code = run(args.command, doc, order=args.order,
                               functions=args.functions,
                               default_order=_env_order())
    except ParseError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2
    except InfeasibleError as exc:
        report = {"command": args.command, "status": "INFEASIBLE",
                  "message": str(exc),
                  "certificate": _json_safe(exc.certificate),
                  "exit_code": 3}
        if args.command == "demo":
            report["demo"] = args.spec
        _emit(report, args)
        return 3
    except PreconditionError as exc:
        report = {"command": args.command, "status": "failed",
                  "message": str(exc), "exit_code": 1}
        _emit(report, args)
        return 1
    except ArithmeticError as exc:
        report = {"command": args.command, "status": "INFEASIBLE",
                  "message": str(exc), "exit_code": 3}
        _emit(report, args)
        return 3
    _emit(report, args)
    if not args.quiet:
        sys.stderr.write("# elapsed %.3fs\n" % (time.perf_counter() - started))
    return code
