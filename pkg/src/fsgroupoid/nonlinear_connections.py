"""Nonlinear contravariant connections on the formal neighborhood of the
zero section of T*M, and the fibrewise presymplectic bracket.

A nonlinear connection is kept in the normal form
    D^{dx^i} = pi^{is} d/dx^s - A^i_s d/dxi_s
with A^i_s a FibreSeries.  The fibrewise presymplectic form
Omega = (1/2) pi^{ij} dxi_i ^ dxi_j turns the functions F admitting a
potential a with dF/dxi_i = pi^{ij} a_j into a Poisson algebra under
{F,G}_Omega = pi^{ij} a_i b_j.
"""

from .series_core import (
    FibreSeries, PreconditionError, invert_scalar_matrix,
    invert_series_matrix,
)


class NonlinearConnection:
    __slots__ = ("poisson", "dim", "A")

    def __init__(self, poisson, A):
        n = poisson.dim
        if len(A) != n or any(len(row) != n for row in A):
            raise ValueError("component array must be dim x dim")
        for row in A:
            for a in row:
                if a.dim != n:
                    raise ValueError("component dimension mismatch")
        self.poisson = poisson
        self.dim = n
        self.A = tuple(tuple(row) for row in A)

    def psi_matrix(self):
        """The constant matrix housing the degree -1 part, or None when the
        xi-degree-0 part of A is not constant in x."""
        psi = []
        for row in self.A:
            out = []
            for a in row:
                p = a.zero_section()
                if not p.is_constant():
                    return None
                out.append(p.constant_part())
            psi.append(out)
        return psi

    def is_invertible(self):
        psi = self.psi_matrix()
        if psi is None:
            return False
        try:
            invert_scalar_matrix(psi)
        except ArithmeticError:
            return False
        return True


def induce_bar(conn):
    """The connection induced on the formal neighborhood by a linear one:
    A^i_s = -Gamma^{ij}_s xi_j."""
    n = conn.poisson.dim
    A = []
    for i in range(n):
        row = []
        for s in range(n):
            acc = FibreSeries.zero(n)
            for j in range(n):
                g = conn.gamma[i][j][s]
                if not g.is_zero():
                    acc = acc - FibreSeries.from_poly(g) * FibreSeries.xi_var(n, j)
            row.append(acc)
        A.append(row)
    return NonlinearConnection(conn.poisson, A)


def nc_apply(D, F):
    """All components D^{dx^i} F.  The A-part loses one guaranteed fibre
    degree; when a row of A vanishes identically the x-part keeps its full
    order."""
    pi = D.poisson
    n = D.dim
    out = []
    for i in range(n):
        xpart = FibreSeries.zero(n, order=None)
        for s in range(n):
            p = pi.entry(i, s)
            if not p.is_zero():
                xpart = xpart + F.diff_x(s) * p
        if all(a.is_zero() and a.order is None for a in D.A[i]):
            out.append(xpart)
            continue
        vpart = FibreSeries.zero(n, order=None)
        for s in range(n):
            vpart = vpart + D.A[i][s] * F.diff_xi(s)
        out.append(xpart - vpart)
    return tuple(out)


def _lift(p, order=None):
    return FibreSeries.from_poly(p, order=order)


def nc_analyze(D, Ddag=None):
    """Torsion, Poisson, association and invertibility reports.  The dagger
    argument defaults to the connection itself."""
    if Ddag is None:
        Ddag = D
    if Ddag.poisson is not D.poisson and Ddag.poisson.entries != D.poisson.entries:
        raise ValueError("the pair must share one Poisson structure")
    pi = D.poisson
    n = D.dim
    torsion = []
    for i in range(n):
        plane = []
        for j in range(n):
            row = []
            for s in range(n):
                r = D.A[i][s].diff_xi(j) - D.A[j][s].diff_xi(i)
                r = r - _lift(pi.entry(i, j).diff(s))
                row.append(r)
            plane.append(row)
        torsion.append(plane)
    presp = []
    for m in range(n):
        plane = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = FibreSeries.zero(n, order=None)
                for s in range(n):
                    acc = acc + _lift(pi.entry(m, s) * pi.entry(i, j).diff(s))
                    acc = acc - D.A[m][s].diff_xi(i) * pi.entry(s, j)
                    acc = acc - D.A[m][s].diff_xi(j) * pi.entry(i, s)
                row.append(acc)
            plane.append(row)
        presp.append(plane)
    assoc = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = FibreSeries.zero(n, order=None)
            for s in range(n):
                acc = acc + D.A[j][s] * pi.entry(i, s)
                acc = acc - Ddag.A[i][s] * pi.entry(j, s)
            row.append(acc)
        assoc.append(row)
    flat = lambda t: all(flat(u) for u in t) if isinstance(t, list) else t.is_zero()
    return {
        "torsion_residual": torsion,
        "torsion_free": flat(torsion),
        "poisson_residual": presp,
        "poisson": flat(presp),
        "association_residual": assoc,
        "associated": flat(assoc),
        "invertible": D.is_invertible(),
        "dagger_invertible": Ddag.is_invertible(),
    }


def nc_curvature(D):
    """R^{ij}_k = -D^{dx^i}(A^j_k) + D^{dx^j}(A^i_k) + (d pi^{ij}/dx^s) A^s_k
    and the contraction R^{kl}_q pi^{qs} whose vanishing makes the kernel of
    D well-behaved on the presymplectic form."""
    pi = D.poisson
    n = D.dim
    applied = [[nc_apply(D, D.A[j][k]) for k in range(n)] for j in range(n)]
    R = []
    for i in range(n):
        plane = []
        for j in range(n):
            row = []
            for k in range(n):
                acc = -applied[j][k][i] + applied[i][k][j]
                for s in range(n):
                    d = pi.entry(i, j).diff(s)
                    if not d.is_zero():
                        acc = acc + D.A[s][k] * d
                row.append(acc)
            plane.append(row)
        R.append(plane)
    flatness = []
    for k in range(n):
        plane = []
        for l in range(n):
            row = []
            for s in range(n):
                acc = FibreSeries.zero(n, order=None)
                for q in range(n):
                    acc = acc + R[k][l][q] * pi.entry(q, s)
                row.append(acc)
            plane.append(row)
        flatness.append(plane)
    return {"R": R, "flatness_residual": flatness}


class HamiltonianElement:
    """A function F with a chosen vertical potential a, dF/dxi_i = pi^{ij} a_j."""

    __slots__ = ("poisson", "value", "potential")

    def __init__(self, poisson, value, potential):
        n = poisson.dim
        if value.dim != n or len(potential) != n:
            raise ValueError("dimension mismatch")
        bad = {}
        for i in range(n):
            rhs = FibreSeries.zero(n, order=None)
            for j in range(n):
                p = poisson.entry(i, j)
                if not p.is_zero():
                    rhs = rhs + potential[j] * p
            res = value.diff_xi(i) - rhs
            if not res.is_zero():
                bad[i] = res
        if bad:
            raise PreconditionError("potential does not generate the fibre "
                                    "differential of the value", bad)
        self.poisson = poisson
        self.value = value
        self.potential = tuple(potential)


def omega_bracket(pi, F, G):
    """{F,G}_Omega = pi^{ij} a_i b_j; the evaluations a_i dG/dxi_i and
    -b_i dF/dxi_i must agree with it and are asserted."""
    n = pi.dim
    a, b = F.potential, G.potential
    e1 = FibreSeries.zero(n, order=None)
    for i in range(n):
        for j in range(n):
            p = pi.entry(i, j)
            if not p.is_zero():
                e1 = e1 + a[i] * b[j] * p
    e2 = FibreSeries.zero(n, order=None)
    e3 = FibreSeries.zero(n, order=None)
    for i in range(n):
        e2 = e2 + a[i] * G.value.diff_xi(i)
        e3 = e3 - b[i] * F.value.diff_xi(i)
    if not (e1 == e2 and e1 == e3):
        raise ArithmeticError("the three bracket evaluations disagree")
    return e1


def potential_from_kernel(Dpair, F, order=None):
    """Potential of a kernel element: a_t = -L^s_t dF/dx^s with L the series
    inverse of the dagger component matrix K."""
    D, Ddag = Dpair
    pi = D.poisson
    n = D.dim
    applied = nc_apply(D, F)
    bad = {i: r for i, r in enumerate(applied) if not r.is_zero()}
    if bad:
        raise PreconditionError("function is not annihilated by the connection", bad)
    if not Ddag.is_invertible():
        raise PreconditionError("dagger connection is not invertible", None)
    if order is None:
        order = F.order if F.order is not None else F.xi_degree() + 1
    m = [[Ddag.A[t][s] for t in range(n)] for s in range(n)]
    minv = invert_series_matrix(m, order)
    a = []
    for t in range(n):
        acc = FibreSeries.zero(n, order=None)
        for s in range(n):
            acc = acc - minv[t][s] * F.diff_x(s)
        a.append(acc)
    return HamiltonianElement(pi, F, a)


def potential_generic(pi, F):
    """Direct potential solve, available only over a constant invertible
    Poisson matrix; everywhere else potentials must be carried structurally."""
    n = pi.dim
    if not pi.is_constant():
        raise PreconditionError("unsupported: generic potential solving needs "
                                "a constant Poisson matrix", None)
    mat = [[pi.entry(i, j).constant_part() for j in range(n)] for i in range(n)]
    try:
        inv = invert_scalar_matrix(mat)
    except ArithmeticError:
        raise PreconditionError("unsupported: generic potential solving needs "
                                "an invertible Poisson matrix", None)
    a = []
    for j in range(n):
        acc = FibreSeries.zero(n, order=None)
        for i in range(n):
            if not inv[j][i].is_zero():
                acc = acc + F.diff_xi(i) * inv[j][i]
        a.append(acc)
    return HamiltonianElement(pi, F, a)
