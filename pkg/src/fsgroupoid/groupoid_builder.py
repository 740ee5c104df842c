"""Source and target maps of the formal symplectic groupoid.

Given a solved fundamental equation and a projector pair (P, Q) with
P + Q = id and pi^{ik} P^j_k = Q^i_k pi^{kj}, the fibre change of variables

    xi_p = u_p(x, -zeta_j P^j_.) - u_p(x, zeta_j Q^j_.)

is invertible (its linear part is the identity), and source and target
images of a base function f are the lift theta(f) evaluated at the two
half-arguments and re-expressed in xi.  Their fibre potentials follow the
matrix construction a_l = -B^s_l Q^t_s b_t(x, -zeta P) for the source and
a_l = +B^s_l P^t_s b_t(x, zeta Q) for the target, where B inverts

    A^i_k = Q^s_k v^i_s(x, -zeta P) + P^s_k v^i_s(x, zeta Q).

The check suites verify the morphism identities {Sf,Sg} = S{f,g},
{Tf,Tg} = -T{f,g}, {Sf,Tg} = 0 under the canonical cotangent bracket, and
the separation of variables over Kahler data.
"""

from .fedosov_solver import lift
from .nonlinear_connections import HamiltonianElement
from .poisson_geometry import poisson_bracket
from .series_core import (
    BasePolynomial, FibreMap, FibreSeries, PreconditionError,
    invert_series_matrix,
)


def _square(m, what):
    n = len(m)
    for row in m:
        if len(row) != n:
            raise ValueError("%s matrix must be square" % what)
    return n


class PQTensors:
    """Projector pair splitting the fibre argument of the lift."""

    __slots__ = ("dim", "P", "Q")

    def __init__(self, P, Q):
        n = _square(P, "P")
        if _square(Q, "Q") != n:
            raise ValueError("P and Q must have the same dimension")
        for row in P + Q:
            for entry in row:
                if entry.dim != n:
                    raise ValueError("projector entries must live in dimension %d" % n)
        self.dim = n
        self.P = tuple(tuple(row) for row in P)
        self.Q = tuple(tuple(row) for row in Q)

    @classmethod
    def half(cls, dim):
        from fractions import Fraction
        h = BasePolynomial.const(dim, Fraction(1, 2))
        z = BasePolynomial.zero(dim)
        P = [[h if i == j else z for j in range(dim)] for i in range(dim)]
        return cls(P, P)

    @classmethod
    def kahler(cls, complex_dim):
        # P projects onto the holomorphic block, Q onto the antiholomorphic
        n = 2 * complex_dim
        one = BasePolynomial.const(n, 1)
        z = BasePolynomial.zero(n)
        P = [[one if (i == j and i < complex_dim) else z for j in range(n)]
             for i in range(n)]
        Q = [[one if (i == j and i >= complex_dim) else z for j in range(n)]
             for i in range(n)]
        return cls(P, Q)


def validate_pq(conn, pq):
    """Check P + Q = id, the pi-compatibility, and that the connection
    respects both projectors."""
    pi = conn.poisson
    gamma = conn.gamma
    n = pi.dim
    if pq.dim != n:
        raise ValueError("projector dimension %d does not match %d" % (pq.dim, n))
    delta = [[BasePolynomial.const(n, 1 if i == j else 0) for j in range(n)]
             for i in range(n)]
    sum_res = [[pq.P[i][j] + pq.Q[i][j] - delta[i][j] for j in range(n)]
               for i in range(n)]
    pi_res = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = BasePolynomial.zero(n)
            for k in range(n):
                acc = acc + pi.entry(i, k) * pq.P[j][k] - pq.Q[i][k] * pi.entry(k, j)
            row.append(acc)
        pi_res.append(row)

    def nabla(T):
        # nabla^{dx^i} T^j_k = pi^{is} d_s T^j_k + Gamma^{ij}_s T^s_k
        #                      - Gamma^{is}_k T^j_s
        out = []
        for i in range(n):
            plane = []
            for j in range(n):
                row = []
                for k in range(n):
                    acc = BasePolynomial.zero(n)
                    for s in range(n):
                        acc = acc + pi.entry(i, s) * T[j][k].diff(s)
                        acc = acc + gamma[i][j][s] * T[s][k]
                        acc = acc - gamma[i][s][k] * T[j][s]
                    row.append(acc)
                plane.append(row)
            out.append(plane)
        return out

    np_res = nabla(pq.P)
    nq_res = nabla(pq.Q)
    flatten = lambda t: [x for y in t for x in (flatten(y) if isinstance(y, list) else [y])]
    report = {
        "sum_residual": sum_res,
        "sum_ok": all(p.is_zero() for p in flatten(sum_res)),
        "pi_residual": pi_res,
        "pi_ok": all(p.is_zero() for p in flatten(pi_res)),
        "nabla_p_residual": np_res,
        "nabla_q_residual": nq_res,
        "nabla_ok": all(p.is_zero() for p in flatten(np_res) + flatten(nq_res)),
    }
    report["passed"] = report["sum_ok"] and report["pi_ok"] and report["nabla_ok"]
    return report


class GroupoidMaps:
    """Change of fibre variables and the potential matrix of one groupoid."""

    __slots__ = ("xizeta", "zetaxi", "amat", "order", "_bmat")

    def __init__(self, xizeta, zetaxi, amat, order):
        self.xizeta = xizeta
        self.zetaxi = zetaxi
        self.amat = tuple(tuple(row) for row in amat)
        self.order = order
        self._bmat = None

    def bmat(self):
        if self._bmat is None:
            self._bmat = invert_series_matrix(
                [list(row) for row in self.amat], self.order + 1)
        return self._bmat


def _half_arguments(pq):
    n = pq.dim
    minus_p = []
    plus_q = []
    for t in range(n):
        mp = FibreSeries.zero(n)
        pq_ = FibreSeries.zero(n)
        for j in range(n):
            if not pq.P[j][t].is_zero():
                mp = mp - FibreSeries.xi_var(n, j) * pq.P[j][t]
            if not pq.Q[j][t].is_zero():
                pq_ = pq_ + FibreSeries.xi_var(n, j) * pq.Q[j][t]
        minus_p.append(mp)
        plus_q.append(pq_)
    return minus_p, plus_q


def build_change_of_variables(sol, pq):
    """Assemble the xi/zeta substitution and its potential matrix."""
    conn = sol.connection
    pi = conn.poisson
    n = pi.dim
    report = validate_pq(conn, pq)
    if not report["passed"]:
        raise PreconditionError("projector pair fails validation", report)
    minus_p, plus_q = _half_arguments(pq)
    components = [sol.u_low[p].substitute(minus_p) - sol.u_low[p].substitute(plus_q)
                  for p in range(n)]
    xizeta = FibreMap(components)
    ident = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if not (xizeta.linear_part[i][j] == ident[i][j]):
                raise ArithmeticError("change of variables is not the identity "
                                      "modulo quadratic fibre terms")
    zetaxi = xizeta.invert()
    amat = []
    for i in range(n):
        row = []
        for k in range(n):
            acc = FibreSeries.zero(n)
            for s in range(n):
                vp = sol.v[i][s].substitute(minus_p)
                vq = sol.v[i][s].substitute(plus_q)
                if not pq.Q[s][k].is_zero():
                    acc = acc + vp * pq.Q[s][k]
                if not pq.P[s][k].is_zero():
                    acc = acc + vq * pq.P[s][k]
            row.append(acc)
        amat.append(row)
    # the defining property of amat against the substitution
    for i in range(n):
        for l in range(n):
            lhs = FibreSeries.zero(n)
            rhs = FibreSeries.zero(n)
            for k in range(n):
                ent = pi.entry(i, k)
                if not ent.is_zero():
                    lhs = lhs + components[k].diff_xi(l) * ent
                ent = pi.entry(k, l)
                if not ent.is_zero():
                    rhs = rhs + amat[i][k] * ent
            if lhs != rhs:
                raise ArithmeticError("potential matrix identity failed for "
                                      "the change of variables")
    return GroupoidMaps(xizeta, zetaxi, amat, sol.order)


def source_target(sol, maps, pq, f, order=None):
    """Source and target images of a base polynomial, with potentials."""
    pi = sol.connection.poisson
    n = pi.dim
    if order is None:
        order = maps.order
    elif order > maps.order:
        raise PreconditionError("requested order %d exceeds the groupoid order %d"
                                % (order, maps.order))
    theta = lift(sol, f, order)
    minus_p, plus_q = _half_arguments(pq)
    bmat = maps.bmat()

    def image(argument, projector, sign):
        value = maps.zetaxi.apply(theta.value.substitute(argument))
        bsub = [b.substitute(argument) for b in theta.potential]
        potential = []
        for l in range(n):
            acc = FibreSeries.zero(n)
            for s in range(n):
                for t in range(n):
                    if not projector[t][s].is_zero():
                        acc = acc + bmat[s][l] * bsub[t] * projector[t][s]
            potential.append(maps.zetaxi.apply(acc * sign))
        return HamiltonianElement(pi, value, potential)

    source = image(minus_p, pq.Q, -1)
    target = image(plus_q, pq.P, 1)
    if source.value.zero_section() != f or target.value.zero_section() != f:
        raise ArithmeticError("groupoid images must restrict to the base function")
    return source, target


def canonical_bracket(F, G):
    """The cotangent bracket dF/dxi_k dG/dx^k - dG/dxi_k dF/dx^k."""
    n = F.dim
    acc = FibreSeries.zero(n)
    for k in range(n):
        acc = acc + F.diff_xi(k) * G.diff_x(k) - G.diff_xi(k) * F.diff_x(k)
    return acc


def groupoid_checks(sol, maps, pq, fns, order=None):
    """Morphism and commutation residuals for every function pair."""
    pi = sol.connection.poisson
    images = [source_target(sol, maps, pq, f, order) for f in fns]
    source = {}
    target = {}
    commute = {}
    for a, f in enumerate(fns):
        for b, g in enumerate(fns):
            sf, tf = images[a]
            sg, tg = images[b]
            commute[(a, b)] = canonical_bracket(sf.value, tg.value)
            if a >= b:
                continue
            sbr, tbr = source_target(sol, maps, pq, poisson_bracket(pi, f, g), order)
            source[(a, b)] = canonical_bracket(sf.value, sg.value) - sbr.value
            target[(a, b)] = canonical_bracket(tf.value, tg.value) + tbr.value
    passed = all(r.is_zero() for group in (source, target, commute)
                 for r in group.values())
    return {"source": source, "target": target, "commute": commute,
            "passed": passed}


def in_fibre_ideal(series, fibre_indices):
    """True when every term carries at least one of the given fibre variables."""
    indices = tuple(fibre_indices)
    return all(sum(mono[i] for i in indices) >= 1 for mono in series.terms)


def separation_check(sol, maps, kdata, order=None):
    """Separation of variables over Kahler data with the block projectors."""
    m = kdata.complex_dim
    n = 2 * m
    pi = sol.connection.poisson
    if pi.dim != n:
        raise ValueError("solution dimension does not match the Kahler data")
    if order is None:
        order = maps.order
    pq = PQTensors.kahler(m)
    hol = range(m)
    antihol = range(m, n)
    source_residuals = []
    target_residuals = []
    theta_hol = []
    theta_antihol = []
    for k in hol:
        f = BasePolynomial.var(n, k)
        s, _ = source_target(sol, maps, pq, f, order)
        source_residuals.append(s.value - f)
        theta_hol.append(in_fibre_ideal(lift(sol, f, order).value - f, antihol))
    for l in antihol:
        f = BasePolynomial.var(n, l)
        _, t = source_target(sol, maps, pq, f, order)
        target_residuals.append(t.value - f)
        theta_antihol.append(in_fibre_ideal(lift(sol, f, order).value - f, hol))
    u_correction = []
    for k in range(n):
        corr = sol.u_low[k] + FibreSeries.xi_var(n, k)
        u_correction.append(in_fibre_ideal(corr, hol) and in_fibre_ideal(corr, antihol))
    passed = (all(r.is_zero() for r in source_residuals + target_residuals)
              and all(theta_hol) and all(theta_antihol) and all(u_correction))
    return {"source_residuals": source_residuals,
            "target_residuals": target_residuals,
            "theta_hol_in_antihol_ideal": theta_hol,
            "theta_antihol_in_hol_ideal": theta_antihol,
            "u_correction_in_product_ideal": u_correction,
            "passed": passed}
