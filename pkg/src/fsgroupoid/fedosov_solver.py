"""Graded solver for the fundamental equation on the formal neighborhood.

The unknown is a vertical 1-form with components u^i together with its
potentials u_k and v^i_k.  A solve at truncation order N stores all three
families exactly through fibre degree N+1, which certifies the equation
residual and the flatness of the assembled nonlinear connection through
order N.

Index conventions match the rest of the package: pi[i][j] = pi^{ij} and
gamma[i][j][k] = Gamma_k^{ij} (first upper index is the direction).  The
step-s unknowns are produced in the fixed order

    alpha^{ij}_s -> u^{i(s)} -> A^j_{s;k} -> u_k^{(s)} -> B^{il}_{s;k}
    -> v^{i(s-1)},

and at every step the contractions pi^{ik} A^j_{s;k} and pi^{jk} B^{il}_{s;k}
are compared with alpha^{ij}_s and its fibre derivative.  On a mismatch (or
on request) the step is redone by exact per-graded-component linear
elimination subject to the compatibility and potential-relation constraints;
free coefficients are pinned to zero.
"""

from fractions import Fraction
from itertools import product

from .nonlinear_connections import (
    NonlinearConnection, induce_bar, nc_apply, nc_curvature, omega_bracket,
    potential_from_kernel,
)
from .poisson_geometry import conn_analyze, poisson_bracket, validate_poisson
from .series_core import (
    SC_ZERO, BasePolynomial, FibreSeries, PreconditionError, as_scalar,
    solve_exact_linear,
)


def _inv(m):
    return as_scalar(Fraction(1, m))


def _require_pair(conn, conn_dag):
    report = conn_analyze(conn, conn_dag)
    if not (report["associated"] and report["dagger_torsion_free"]):
        raise PreconditionError(
            "need an associated connection pair with torsion-free dagger part",
            report)
    return report


def _assert_homogeneous(series, deg, what):
    for mono in series.terms:
        if sum(mono) != deg:
            raise ArithmeticError("%s lost fibre homogeneity (expected degree %d)"
                                  % (what, deg))


def bar_curvature(conn):
    """Curvature coefficients of the induced fibre connection, linear in xi."""
    pi, gamma = conn.poisson, conn.gamma
    n = pi.dim
    out = []
    for i in range(n):
        plane = []
        for j in range(n):
            row = []
            for k in range(n):
                acc = FibreSeries.zero(n)
                for p in range(n):
                    c = BasePolynomial.zero(n)
                    for s in range(n):
                        c = c + pi.entry(i, s) * gamma[j][p][k].diff(s)
                        c = c - pi.entry(j, s) * gamma[i][p][k].diff(s)
                        c = c - pi.entry(i, j).diff(s) * gamma[s][p][k]
                    for q in range(n):
                        c = c - gamma[i][q][k] * gamma[j][p][q]
                        c = c + gamma[j][q][k] * gamma[i][p][q]
                    if not c.is_zero():
                        acc = acc + FibreSeries.xi_var(n, p) * c
                row.append(acc)
            plane.append(row)
        out.append(plane)
    return out


def _assemble_bar_q(conn, rbar):
    # Qbar^{ij} = (1/2) xi_t pi^{tk} Rbar^{ij}_k, checked to be a fibrewise
    # Hamiltonian with potential family Rbar
    pi = conn.poisson
    n = pi.dim
    half = _inv(2)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = FibreSeries.zero(n)
            contracted = []
            for t in range(n):
                lhs = FibreSeries.zero(n)
                for k in range(n):
                    ent = pi.entry(t, k)
                    if not ent.is_zero():
                        lhs = lhs + rbar[i][j][k] * ent
                contracted.append(lhs)
                acc = acc + FibreSeries.xi_var(n, t) * lhs
            acc = acc * half
            for t in range(n):
                if contracted[t] != acc.diff_xi(t):
                    raise PreconditionError(
                        "curvature is not fibrewise Hamiltonian; the pair "
                        "is not associated with torsion-free dagger part",
                        {"indices": (i, j, t)})
            row.append(acc)
        out.append(row)
    return out


def bar_q(conn, conn_dag):
    """The xi-quadratic Hamiltonian of the induced curvature."""
    _require_pair(conn, conn_dag)
    return _assemble_bar_q(conn, bar_curvature(conn))


class FundamentalSolution:
    """Immutable solve output: u^i, the potentials u_k and v^i_k, audit trail."""

    __slots__ = ("order", "u", "u_low", "v", "connection", "connection_dag",
                 "audit")

    def __init__(self, order, u, u_low, v, connection, connection_dag,
                 audit=()):
        self.order = order
        self.u = tuple(u)
        self.u_low = tuple(u_low)
        self.v = tuple(tuple(row) for row in v)
        self.connection = connection
        self.connection_dag = connection_dag
        self.audit = tuple(audit)

    def d_connection(self):
        """The solved nonlinear connection, A^i_s = v^i_s - Gamma^{ij}_s xi_j."""
        pi = self.connection.poisson
        gamma = self.connection.gamma
        n = pi.dim
        A = []
        for i in range(n):
            row = []
            for s in range(n):
                a = self.v[i][s]
                for j in range(n):
                    if not gamma[i][j][s].is_zero():
                        a = a - FibreSeries.xi_var(n, j) * gamma[i][j][s]
                row.append(a)
            A.append(row)
        return NonlinearConnection(pi, A)

    def dagger_d_connection(self):
        """The dagger partner, K^i_s = du_s/dxi_i - daggerGamma^{ij}_s xi_j."""
        pi = self.connection.poisson
        dgamma = self.connection_dag.gamma
        n = pi.dim
        K = []
        for i in range(n):
            row = []
            for s in range(n):
                k = self.u_low[s].diff_xi(i)
                for j in range(n):
                    if not dgamma[i][j][s].is_zero():
                        k = k - FibreSeries.xi_var(n, j) * dgamma[i][j][s]
                row.append(k)
            K.append(row)
        return NonlinearConnection(pi, K)


def _monomials_of_degree(n, deg):
    return [m for m in product(range(deg + 1), repeat=n) if sum(m) == deg]


def _monomials_up_to(n, bound):
    return [m for m in product(range(bound + 1), repeat=n) if sum(m) <= bound]


def _eliminate_linear_family(pi, rhs, deg, label):
    """Solve sum_k pi^{ik} w_k = rhs^i for w homogeneous of fibre degree deg.

    Works coefficient by coefficient over (fibre monomial, base monomial)
    pairs; free coefficients are pinned to zero.  Raises when the system is
    inconsistent within the generous base-degree support.
    """
    n = pi.dim
    xbound = 2
    for r in rhs:
        for poly in r.terms.values():
            xbound = max(xbound, poly.degree() + 2)
    ximonos = _monomials_of_degree(n, deg)
    xmonos = _monomials_up_to(n, xbound)
    eqs = {}

    def row(key):
        return eqs.setdefault(key, {"coeffs": {}, "rhs": SC_ZERO})

    for i in range(n):
        for k in range(n):
            ent = pi.entry(i, k)
            for nu1, c in ent.terms.items():
                for sig in ximonos:
                    for nu2 in xmonos:
                        key = (i, sig, tuple(a + b for a, b in zip(nu1, nu2)))
                        var = (k, sig, nu2)
                        r = row(key)
                        prev = r["coeffs"].get(var, SC_ZERO)
                        r["coeffs"][var] = prev + c
        for sig, poly in rhs[i].terms.items():
            for nu, c in poly.terms.items():
                row((i, sig, nu))["rhs"] = row((i, sig, nu))["rhs"] + c

    keys = sorted(eqs)
    solution, certificate = solve_exact_linear(
        [(eqs[k]["coeffs"], eqs[k]["rhs"]) for k in keys])
    if solution is None:
        raise ArithmeticError(
            "fallback elimination for %s is inconsistent (residual %s)"
            % (label, certificate["residual"].to_string()))
    out = []
    for k in range(n):
        terms = {}
        for (kk, sig, nu), val in solution.items():
            if kk != k or val.is_zero():
                continue
            poly = terms.get(sig, BasePolynomial.zero(n))
            terms[sig] = poly + BasePolynomial.monomial(n, nu, val)
        terms = {sig: p for sig, p in terms.items() if not p.is_zero()}
        out.append(FibreSeries(n, terms))
    return out


def solve_fundamental(conn, conn_dag, order=6, force_fallback=False):
    """Solve the fundamental equation at the given truncation order."""
    pi = conn.poisson
    n = pi.dim
    report = validate_poisson(pi)
    if not report["passed"]:
        raise PreconditionError("Poisson validation failed", report)
    _require_pair(conn, conn_dag)
    if order < 1:
        raise ValueError("truncation order must be at least 1")
    gamma = conn.gamma
    dgamma = conn_dag.gamma
    xi = [FibreSeries.xi_var(n, p) for p in range(n)]
    lift_poly = FibreSeries.from_poly
    dbar = induce_bar(conn)

    rbar = bar_curvature(conn)
    qbar = _assemble_bar_q(conn, rbar)

    # fibre-quadratic potential matrix of qbar:
    # Abar^j_k = (1/2) xi_p xi_q pi^{jm} (d_k dGamma_m^{pq} - d_m dGamma_k^{pq})
    #            - xi_p xi_q dGamma^{lp}_k Gamma^{jq}_l
    half = _inv(2)
    abar = []
    for j in range(n):
        row = []
        for k in range(n):
            acc = FibreSeries.zero(n)
            for p in range(n):
                for q in range(n):
                    c = BasePolynomial.zero(n)
                    for m in range(n):
                        diff = dgamma[p][q][m].diff(k) - dgamma[p][q][k].diff(m)
                        if not diff.is_zero():
                            c = c + pi.entry(j, m) * diff * half
                    for l in range(n):
                        c = c - dgamma[l][p][k] * gamma[j][q][l]
                    if not c.is_zero():
                        acc = acc + (xi[p] * xi[q]) * c
            row.append(acc)
        abar.append(row)
    for i in range(n):
        for j in range(n):
            recon = FibreSeries.zero(n)
            for k in range(n):
                ent = pi.entry(i, k)
                if not ent.is_zero():
                    recon = recon + abar[j][k] * ent
            if recon != qbar[i][j]:
                raise ArithmeticError(
                    "curvature potential matrix fails to reproduce its Hamiltonian")

    top = order + 2
    zero = FibreSeries.zero(n)
    u_comp = [[zero] * n for _ in range(top + 1)]
    ul_comp = [[zero] * n for _ in range(top + 1)]
    v_comp = [[[zero] * n for _ in range(n)] for _ in range(top)]
    for i in range(n):
        acc = zero
        for j in range(n):
            ent = pi.entry(i, j)
            if not ent.is_zero():
                acc = acc - xi[j] * ent
        u_comp[1][i] = acc
        ul_comp[1][i] = -xi[i]
        v_comp[0][i][i] = FibreSeries.const(n, 1)

    audit = []
    for s in range(2, top + 1):
        sm1 = s - 1
        scale = _inv(s + 1)
        nab = [nc_apply(dbar, u_comp[sm1][j]) for j in range(n)]

        alpha = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                a = qbar[i][j].xi_component(sm1)
                a = a - nab[j][i] + nab[i][j]
                for k in range(n):
                    d = pi.entry(i, j).diff(k)
                    if not d.is_zero():
                        a = a + u_comp[sm1][k] * d
                for t in range(1, s - 1):
                    for l in range(n):
                        a = a + v_comp[t][i][l] * u_comp[s - t][j].diff_xi(l)
                _assert_homogeneous(a, sm1, "alpha at step %d" % s)
                alpha[i][j] = a
        for i in range(n):
            if not alpha[i][i].is_zero():
                raise ArithmeticError("alpha lost antisymmetry at step %d" % s)
            for j in range(i):
                if alpha[i][j] != -alpha[j][i]:
                    raise ArithmeticError("alpha lost antisymmetry at step %d" % s)

        for i in range(n):
            acc = zero
            for j in range(n):
                acc = acc + alpha[i][j] * xi[j]
            u_comp[s][i] = acc * scale

        amat = [[None] * n for _ in range(n)]
        for j in range(n):
            for k in range(n):
                a = abar[j][k].xi_component(sm1)
                a = a - u_comp[sm1][j].diff_x(k)
                for m in range(n):
                    for l in range(n):
                        if not dgamma[m][l][k].is_zero():
                            a = a + (xi[l] * dgamma[m][l][k]) * v_comp[s - 2][j][m]
                for l in range(n):
                    ent = pi.entry(j, l)
                    if not ent.is_zero():
                        a = a + ul_comp[sm1][k].diff_x(l) * ent
                    d = ent.diff(k)
                    if not d.is_zero():
                        a = a + ul_comp[sm1][l] * d
                for m in range(n):
                    for l in range(n):
                        if not gamma[j][m][l].is_zero():
                            a = a + ul_comp[sm1][k].fibre_shift(m, l) * gamma[j][m][l]
                for t in range(1, s - 1):
                    for l in range(n):
                        a = a - ul_comp[t + 1][k].diff_xi(l) * v_comp[s - t - 1][j][l]
                _assert_homogeneous(a, sm1, "A at step %d" % s)
                amat[j][k] = a

        ok_u = True
        for i in range(n):
            for j in range(n):
                recon = zero
                for k in range(n):
                    ent = pi.entry(i, k)
                    if not ent.is_zero():
                        recon = recon + amat[j][k] * ent
                if recon != alpha[i][j]:
                    ok_u = False
        if ok_u and not force_fallback:
            for k in range(n):
                acc = zero
                for j in range(n):
                    acc = acc + amat[j][k] * xi[j]
                ul_comp[s][k] = acc * scale
            u_fallback = False
        else:
            ul_comp[s] = _eliminate_linear_family(
                pi, u_comp[s], s, "u_k at step %d" % s)
            u_fallback = True

        bmat = [[[None] * n for _ in range(n)] for _ in range(n)]
        vprev = v_comp[s - 2]
        for i in range(n):
            for l in range(n):
                for k in range(n):
                    b = rbar[i][l][k].xi_component(s - 2)
                    for m in range(n):
                        ent = pi.entry(i, m)
                        if not ent.is_zero():
                            b = b - vprev[l][k].diff_x(m) * ent
                        ent = pi.entry(l, m)
                        if not ent.is_zero():
                            b = b + vprev[i][k].diff_x(m) * ent
                        d = pi.entry(i, l).diff(m)
                        if not d.is_zero():
                            b = b + vprev[m][k] * d
                        if not gamma[i][m][k].is_zero():
                            b = b + vprev[l][m] * gamma[i][m][k]
                        if not gamma[l][m][k].is_zero():
                            b = b - vprev[i][m] * gamma[l][m][k]
                        for nn in range(n):
                            if not gamma[i][m][nn].is_zero():
                                b = b - vprev[l][k].fibre_shift(m, nn) * gamma[i][m][nn]
                            if not gamma[l][m][nn].is_zero():
                                b = b + vprev[i][k].fibre_shift(m, nn) * gamma[l][m][nn]
                    for t in range(1, s - 1):
                        for m in range(n):
                            b = b + v_comp[t][i][m] * v_comp[s - t - 1][l][k].diff_xi(m)
                            b = b - v_comp[t][i][k].diff_xi(m) * v_comp[s - t - 1][l][m]
                    _assert_homogeneous(b, s - 2, "B at step %d" % s)
                    bmat[i][l][k] = b

        ok_v = True
        for i in range(n):
            for l in range(n):
                for j in range(n):
                    recon = zero
                    for k in range(n):
                        ent = pi.entry(j, k)
                        if not ent.is_zero():
                            recon = recon + bmat[i][l][k] * ent
                    if recon != alpha[i][l].diff_xi(j):
                        ok_v = False
        if ok_v and not force_fallback:
            for i in range(n):
                for k in range(n):
                    acc = -amat[i][k]
                    for l in range(n):
                        acc = acc + bmat[i][l][k] * xi[l]
                    v_comp[s - 1][i][k] = acc * scale
            v_fallback = False
        else:
            for j in range(n):
                v_comp[s - 1][j] = _eliminate_linear_family(
                    pi, [u_comp[s][j].diff_xi(i) for i in range(n)], s - 1,
                    "v^%d_k at step %d" % (j, s))
            v_fallback = True

        audit.append({"step": s,
                      "u_identity": ok_u, "v_identity": ok_v,
                      "u_fallback": u_fallback, "v_fallback": v_fallback})

    def assemble(comps):
        acc = zero
        for c in comps:
            acc = acc + c
        return acc.truncate(order + 1)

    u = [assemble(u_comp[s][i] for s in range(1, top + 1)) for i in range(n)]
    u_low = [assemble(ul_comp[s][k] for s in range(1, top + 1)) for k in range(n)]
    v = [[assemble(v_comp[t][i][k] for t in range(top))
          for k in range(n)] for i in range(n)]
    sol = FundamentalSolution(order, u, u_low, v, conn, conn_dag, audit)

    _check_solution_invariants(sol)
    res = fundamental_residual(sol)
    for i in range(n):
        for j in range(n):
            if not res[i][j].is_zero():
                raise ArithmeticError(
                    "fundamental equation residual nonzero at (%d,%d)" % (i, j))
    flat = nc_curvature(sol.d_connection())["flatness_residual"]
    for plane in flat:
        for r in plane:
            for entry in r:
                if not entry.is_zero():
                    raise ArithmeticError("solved connection is not flat on "
                                          "the presymplectic kernel")
    return sol


def _check_solution_invariants(sol):
    pi = sol.connection.poisson
    n = pi.dim
    xi = [FibreSeries.xi_var(n, p) for p in range(n)]
    norm = FibreSeries.zero(n)
    for i in range(n):
        norm = norm + sol.u[i] * xi[i]
    if not norm.is_zero():
        raise ArithmeticError("normalization u^i xi_i = 0 violated")
    for i in range(n):
        compat = FibreSeries.zero(n)
        for k in range(n):
            ent = pi.entry(i, k)
            if not ent.is_zero():
                compat = compat + sol.u_low[k] * ent
        if compat != sol.u[i]:
            raise ArithmeticError("compatibility u^i = pi^{ik} u_k violated")
    for j in range(n):
        for i in range(n):
            rel = FibreSeries.zero(n)
            for s in range(n):
                ent = pi.entry(i, s)
                if not ent.is_zero():
                    rel = rel + sol.v[j][s] * ent
            if rel != sol.u[j].diff_xi(i):
                raise ArithmeticError("potential relation of u and v violated")
    for k in range(n):
        if sol.u_low[k].xi_component(1) != -xi[k]:
            raise ArithmeticError("leading term of u_k must be -xi_k")
        if not sol.u_low[k].xi_component(0).is_zero():
            raise ArithmeticError("u_k must vanish on the zero section")
        for i in range(n):
            want = FibreSeries.const(n, 1 if i == k else 0)
            if sol.v[i][k].xi_component(0) != want:
                raise ArithmeticError("leading term of v^i_k must be delta")


def fundamental_residual(sol):
    """Left minus right side of the local fundamental equation, order N."""
    conn = sol.connection
    pi = conn.poisson
    n = pi.dim
    dbar = induce_bar(conn)
    qbar = _assemble_bar_q(conn, bar_curvature(conn))
    nab = [nc_apply(dbar, sol.u[j]) for j in range(n)]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            r = FibreSeries.from_poly(pi.entry(i, j)) - qbar[i][j]
            r = r + nab[j][i] - nab[i][j]
            for k in range(n):
                d = pi.entry(i, j).diff(k)
                if not d.is_zero():
                    r = r - sol.u[k] * d
            for l in range(n):
                r = r - sol.v[i][l] * sol.u[j].diff_xi(l)
            row.append(r)
        out.append(row)
    return out


def lift(sol, f, order=None):
    """Extend a base polynomial to the kernel of the solved connection.

    Returns a HamiltonianElement whose value restricts to f on the zero
    section; the potential comes from the kernel construction against the
    dagger connection.
    """
    n = sol.connection.poisson.dim
    N = sol.order if order is None else order
    if N > sol.order:
        raise PreconditionError(
            "solution order %d is too low for a lift at order %d"
            % (sol.order, N))
    dbar = induce_bar(sol.connection)
    xi = [FibreSeries.xi_var(n, p) for p in range(n)]
    vgrade = [[[sol.v[i][l].xi_component(t) for l in range(n)]
               for i in range(n)] for t in range(max(N, 1))]
    comps = [FibreSeries.from_poly(f)]
    for s in range(1, N + 1):
        nab = nc_apply(dbar, comps[s - 1])
        acc = FibreSeries.zero(n)
        for i in range(n):
            beta = nab[i]
            for t in range(1, s):
                for l in range(n):
                    beta = beta - vgrade[t][i][l] * comps[s - t].diff_xi(l)
            _assert_homogeneous(beta, s - 1, "lift source at degree %d" % s)
            acc = acc + beta * xi[i]
        comps.append(acc * _inv(s))
    total = FibreSeries.zero(n)
    for c in comps:
        total = total + c
    total = total.with_order(N)
    if total.zero_section() != f:
        raise ArithmeticError("lift does not restrict to the input function")
    return potential_from_kernel(
        (sol.d_connection(), sol.dagger_d_connection()), total, order=N)


def poisson_morphism_residual(sol, f, g, order=None):
    """theta({f,g}) minus the fibrewise bracket of the lifts."""
    pi = sol.connection.poisson
    tf = lift(sol, f, order)
    tg = lift(sol, g, order)
    th = lift(sol, poisson_bracket(pi, f, g), order)
    return th.value - omega_bracket(pi, tf, tg)
