"""Contravariant-connection calculus for polynomial Poisson structures.

Index conventions, used verbatim everywhere in the package:

  - pi[i][j] is the Poisson tensor pi^{ij} = {x^i, x^j}; the bracket of
    functions is {f,g} = d_i f pi^{ij} d_j g and the sharp map sends a
    1-form alpha to the vector field (#alpha)^j = alpha_i pi^{ij}.
  - gamma[i][j][k] is the Christoffel symbol Gamma_k^{ij} of a
    contravariant connection: nabla^{dx^i} dx^j = -Gamma_k^{ij} dx^k.
    The first upper index is the direction covector, the second is the
    covector being differentiated, the lower index is the component.
  - the Koszul bracket of 1-forms is
    [alpha,beta]_k = alpha_i pi^{is} d_s beta_k - beta_i pi^{is} d_s alpha_k
                     + alpha_i beta_j d_k pi^{ij},
    so that [df,dg] = d{f,g}.
  - torsion(i,j,k) = -Gamma_k^{ij} + Gamma_k^{ji} - d_k pi^{ij} is the
    dx^k-component of T(dx^i,dx^j).
  - a pair (nabla, dagger-nabla) is associated when
    pi^{ik} Gamma_k^{jl} = pi^{jk} daggerGamma_k^{il}; a single connection
    is called self-associated when this holds with itself.
  - nabla respects pi when
    pi^{mk} d_k pi^{ij} + Gamma_k^{mi} pi^{kj} + Gamma_k^{mj} pi^{ik} = 0.

Kahler-Poisson data uses coordinates ordered holomorphic block first:
indices 0..m-1 are z^1..z^m and indices m..2m-1 are their conjugates, and
the only nonzero Poisson entries are pi[m+l][k] = g^{lbar k} = -pi[k][m+l].
"""

from .series_core import (
    BasePolynomial, PreconditionError, SC_ONE, SC_ZERO, Scalar, as_scalar,
    solve_exact_linear,
)


def _zero(dim):
    return BasePolynomial.zero(dim)


def _check_square(entries):
    n = len(entries)
    for row in entries:
        if len(row) != n:
            raise ValueError("expected a square matrix of polynomials")
    return n


class PoissonStructure:
    __slots__ = ("dim", "entries")

    def __init__(self, entries):
        self.dim = _check_square(entries)
        self.entries = tuple(tuple(row) for row in entries)
        for row in self.entries:
            for p in row:
                if p.dim != self.dim:
                    raise ValueError("Poisson entry dimension mismatch")

    def entry(self, i, j):
        return self.entries[i][j]

    def is_constant(self):
        return all(p.is_constant() for row in self.entries for p in row)


class OneForm:
    __slots__ = ("dim", "components")

    def __init__(self, components):
        self.components = tuple(components)
        self.dim = len(self.components)

    @classmethod
    def zero(cls, dim):
        return cls([_zero(dim)] * dim)

    @classmethod
    def basis(cls, dim, i):
        return cls([BasePolynomial.const(dim, 1) if k == i else _zero(dim)
                    for k in range(dim)])

    @classmethod
    def differential(cls, f):
        return cls([f.diff(i) for i in range(f.dim)])

    def __add__(self, other):
        return OneForm([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return OneForm([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return OneForm([-a for a in self.components])

    def __mul__(self, f):
        return OneForm([a * f for a in self.components])

    __rmul__ = __mul__

    def is_zero(self):
        return all(a.is_zero() for a in self.components)

    def __eq__(self, other):
        return isinstance(other, OneForm) and self.components == other.components

    __hash__ = None

    def __repr__(self):
        return "OneForm(%r)" % (list(self.components),)


class PolyVectorField:
    __slots__ = ("dim", "components")

    def __init__(self, components):
        self.components = tuple(components)
        self.dim = len(self.components)

    def is_zero(self):
        return all(a.is_zero() for a in self.components)

    def __sub__(self, other):
        return PolyVectorField([a - b for a, b in zip(self.components, other.components)])

    def __eq__(self, other):
        return isinstance(other, PolyVectorField) and self.components == other.components

    __hash__ = None

    def apply(self, f):
        """Directional derivative of a function along the field."""
        out = _zero(f.dim)
        for i, v in enumerate(self.components):
            out = out + v * f.diff(i)
        return out

    def __repr__(self):
        return "PolyVectorField(%r)" % (list(self.components),)


class Connection:
    """Christoffel data gamma[i][j][k] = Gamma_k^{ij} over a Poisson structure."""

    __slots__ = ("poisson", "gamma")

    def __init__(self, poisson, gamma):
        n = poisson.dim
        if len(gamma) != n or any(len(g) != n or any(len(h) != n for h in g) for g in gamma):
            raise ValueError("Christoffel array must be dim x dim x dim")
        self.poisson = poisson
        self.gamma = tuple(tuple(tuple(row) for row in plane) for plane in gamma)

    @classmethod
    def flat(cls, poisson):
        n = poisson.dim
        z = _zero(n)
        return cls(poisson, [[[z] * n for _ in range(n)] for _ in range(n)])

    def christoffel(self, i, j, k):
        return self.gamma[i][j][k]


class LieAlgebraData:
    """Structure constants c[i][j][k] = c_k^{ij} of a finite Lie algebra.

    Antisymmetry and the Jacobi identity are enforced at construction.
    """

    __slots__ = ("dim", "c")

    def __init__(self, c):
        n = len(c)
        self.dim = n
        self.c = tuple(tuple(tuple(as_scalar(v) for v in row) for row in plane)
                       for plane in c)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if self.c[i][j][k] != -self.c[j][i][k]:
                        raise ValueError("structure constants are not antisymmetric")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for t in range(n):
                        acc = SC_ZERO
                        for s in range(n):
                            acc = acc + self.c[i][j][s] * self.c[s][k][t]
                            acc = acc + self.c[j][k][s] * self.c[s][i][t]
                            acc = acc + self.c[k][i][s] * self.c[s][j][t]
                        if not acc.is_zero():
                            raise ValueError("structure constants fail the Jacobi identity")

    def poisson_structure(self):
        """The linear Poisson structure pi^{ij} = c_k^{ij} x^k on the dual."""
        n = self.dim
        entries = []
        for i in range(n):
            row = []
            for j in range(n):
                p = _zero(n)
                for k in range(n):
                    if not self.c[i][j][k].is_zero():
                        p = p + BasePolynomial.var(n, k) * self.c[i][j][k]
                row.append(p)
            entries.append(row)
        return PoissonStructure(entries)


class KahlerData:
    """A type-(1,1) Poisson tensor g^{lbar k} on complex dimension m.

    g[l][k] = g^{lbar k} is a polynomial in the 2m real slots (z-block
    first, conjugate block second).
    """

    __slots__ = ("complex_dim", "g")

    def __init__(self, complex_dim, g):
        m = complex_dim
        if len(g) != m or any(len(row) != m for row in g):
            raise ValueError("metric tensor must be m x m")
        for row in g:
            for p in row:
                if p.dim != 2 * m:
                    raise ValueError("metric entries must live in 2m coordinates")
        self.complex_dim = m
        self.g = tuple(tuple(row) for row in g)

    def jacobi_residuals(self):
        """Residuals of the two Jacobi identities of a (1,1) Poisson tensor:
        g^{tbar s} d g^{lbar k}/d z^s - g^{lbar s} d g^{tbar k}/d z^s and
        g^{tbar s} d g^{lbar k}/d zbar^t - g^{tbar k} d g^{lbar s}/d zbar^t."""
        m = self.complex_dim
        out = []
        for t in range(m):
            for l in range(m):
                for k in range(m):
                    acc = _zero(2 * m)
                    for s in range(m):
                        acc = acc + self.g[t][s] * self.g[l][k].diff(s)
                        acc = acc - self.g[l][s] * self.g[t][k].diff(s)
                    if not acc.is_zero():
                        out.append((("holomorphic", t, l, k), acc))
        for l in range(m):
            for k in range(m):
                for s in range(m):
                    acc = _zero(2 * m)
                    for t in range(m):
                        acc = acc + self.g[t][s] * self.g[l][k].diff(m + t)
                        acc = acc - self.g[t][k] * self.g[l][s].diff(m + t)
                    if not acc.is_zero():
                        out.append((("antiholomorphic", l, k, s), acc))
        return out


# ---------------------------------------------------------------------------


def validate_poisson(pi):
    """Check antisymmetry and the Jacobi identity, reporting every residual."""
    n = pi.dim
    antisymmetric = all(pi.entry(i, j) == -pi.entry(j, i)
                        for i in range(n) for j in range(n))
    residuals = {}
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                acc = _zero(n)
                for s in range(n):
                    acc = acc + pi.entry(i, s) * pi.entry(j, k).diff(s)
                    acc = acc + pi.entry(j, s) * pi.entry(k, i).diff(s)
                    acc = acc + pi.entry(k, s) * pi.entry(i, j).diff(s)
                if not acc.is_zero():
                    residuals[(i, j, k)] = acc
    return {"antisymmetric": antisymmetric,
            "jacobi_residuals": residuals,
            "passed": antisymmetric and not residuals}


def sharp(pi, alpha):
    n = pi.dim
    comps = []
    for j in range(n):
        acc = _zero(n)
        for i in range(n):
            acc = acc + alpha.components[i] * pi.entry(i, j)
        comps.append(acc)
    return PolyVectorField(comps)


def poisson_bracket(pi, f, g):
    n = pi.dim
    acc = _zero(n)
    for i in range(n):
        for j in range(n):
            acc = acc + f.diff(i) * pi.entry(i, j) * g.diff(j)
    return acc


def koszul_bracket(pi, alpha, beta):
    n = pi.dim
    comps = []
    for k in range(n):
        acc = _zero(n)
        for i in range(n):
            for s in range(n):
                if not pi.entry(i, s).is_zero():
                    acc = acc + alpha.components[i] * pi.entry(i, s) * beta.components[k].diff(s)
                    acc = acc - beta.components[i] * pi.entry(i, s) * alpha.components[k].diff(s)
        for i in range(n):
            for j in range(n):
                d = pi.entry(i, j).diff(k)
                if not d.is_zero():
                    acc = acc + alpha.components[i] * beta.components[j] * d
        comps.append(acc)
    return OneForm(comps)


def conn_apply(conn, alpha, beta):
    pi = conn.poisson
    n = pi.dim
    comps = []
    for k in range(n):
        acc = _zero(n)
        for i in range(n):
            inner = _zero(n)
            for s in range(n):
                inner = inner + pi.entry(i, s) * beta.components[k].diff(s)
                inner = inner - conn.gamma[i][s][k] * beta.components[s]
            acc = acc + alpha.components[i] * inner
        comps.append(acc)
    return OneForm(comps)


def torsion_tensor(conn):
    pi = conn.poisson
    n = pi.dim
    return [[[-conn.gamma[i][j][k] + conn.gamma[j][i][k] - pi.entry(i, j).diff(k)
              for k in range(n)] for j in range(n)] for i in range(n)]


def conn_tensors(conn):
    """Torsion components and the curvature evaluated operationally on basis
    covectors: curvature[i][j][p][k] is the dx^k-component of
    R(dx^i,dx^j)dx^p = nabla^i nabla^j dx^p - nabla^j nabla^i dx^p
    - nabla^{[dx^i,dx^j]} dx^p."""
    pi = conn.poisson
    n = pi.dim
    basis = [OneForm.basis(n, i) for i in range(n)]
    curvature = []
    for i in range(n):
        plane = []
        for j in range(n):
            bracket = koszul_bracket(pi, basis[i], basis[j])
            row = []
            for p in range(n):
                term = conn_apply(conn, basis[i], conn_apply(conn, basis[j], basis[p]))
                term = term - conn_apply(conn, basis[j], conn_apply(conn, basis[i], basis[p]))
                term = term - conn_apply(conn, bracket, basis[p])
                row.append(list(term.components))
            plane.append(row)
        curvature.append(plane)
    return {"torsion": torsion_tensor(conn), "curvature": curvature}


def transpose_connection(conn):
    """tGamma_k^{ij} = Gamma_k^{ji} - d_k pi^{ij}, from tnabla^a b = nabla^b a + [a,b]."""
    pi = conn.poisson
    n = pi.dim
    gamma = [[[conn.gamma[j][i][k] - pi.entry(i, j).diff(k)
               for k in range(n)] for j in range(n)] for i in range(n)]
    return Connection(pi, gamma)


def poisson_residual(conn):
    """nabla^{dx^m} pi^{ij} for every (m,i,j)."""
    pi = conn.poisson
    n = pi.dim
    out = []
    for m in range(n):
        plane = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = _zero(n)
                for k in range(n):
                    acc = acc + pi.entry(m, k) * pi.entry(i, j).diff(k)
                    acc = acc + conn.gamma[m][i][k] * pi.entry(k, j)
                    acc = acc + conn.gamma[m][j][k] * pi.entry(i, k)
                row.append(acc)
            plane.append(row)
        out.append(plane)
    return out


def association_residual(conn, conn_dag):
    """pi^{ik} Gamma_k^{jl} - pi^{jk} daggerGamma_k^{il} for every (i,j,l)."""
    pi = conn.poisson
    n = pi.dim
    out = []
    for i in range(n):
        plane = []
        for j in range(n):
            row = []
            for l in range(n):
                acc = _zero(n)
                for k in range(n):
                    acc = acc + pi.entry(i, k) * conn.gamma[j][l][k]
                    acc = acc - pi.entry(j, k) * conn_dag.gamma[i][l][k]
                row.append(acc)
            plane.append(row)
        out.append(plane)
    return out


def _all_zero(tensor):
    if isinstance(tensor, BasePolynomial):
        return tensor.is_zero()
    return all(_all_zero(t) for t in tensor)


def conn_analyze(conn, conn_dag=None):
    """Predicates of a connection (pair): torsion-free, respects the Poisson
    tensor, associated; the dagger argument defaults to the connection itself."""
    if conn_dag is None:
        conn_dag = conn
    torsion = torsion_tensor(conn)
    dag_torsion = torsion_tensor(conn_dag)
    presp = poisson_residual(conn)
    assoc = association_residual(conn, conn_dag)
    return {
        "torsion": torsion,
        "torsion_free": _all_zero(torsion),
        "dagger_torsion_free": _all_zero(dag_torsion),
        "poisson_residual": presp,
        "respects_poisson": _all_zero(presp),
        "association_residual": assoc,
        "associated": _all_zero(assoc),
        "transpose": transpose_connection(conn),
    }


def conn_symmetrize(conn, conn_dag):
    """(nabla + tnabla + daggernabla)/3 for an associated pair with
    torsion-free dagger; the result is torsion-free and Poisson."""
    report = conn_analyze(conn, conn_dag)
    if not (report["associated"] and report["dagger_torsion_free"]):
        raise PreconditionError("symmetrization needs an associated pair with "
                                "torsion-free dagger connection", report)
    pi = conn.poisson
    n = pi.dim
    third = Scalar(1) / Scalar(3)
    gamma = [[[(conn.gamma[i][j][k] + conn.gamma[j][i][k]
                + pi.entry(j, i).diff(k) + conn_dag.gamma[i][j][k]) * third
               for k in range(n)] for j in range(n)] for i in range(n)]
    out = Connection(pi, gamma)
    post = conn_analyze(out)
    if not (post["torsion_free"] and post["respects_poisson"]):
        raise ArithmeticError("symmetrized connection failed its own checks")
    return out


def kahler_connection(kdata):
    """Assemble the Poisson structure and canonical connection of a
    Kahler-Poisson tensor: Gamma_m^{lbar k} = -d g^{lbar k}/d z^m and
    Gamma_{nbar}^{k lbar} = d g^{lbar k}/d zbar^n, all other types zero."""
    bad = kdata.jacobi_residuals()
    if bad:
        raise PreconditionError("metric tensor fails the Jacobi identity",
                                {"jacobi_residuals": bad})
    m = kdata.complex_dim
    n = 2 * m
    z = _zero(n)
    entries = [[z] * n for _ in range(n)]
    for l in range(m):
        for k in range(m):
            entries[m + l][k] = kdata.g[l][k]
            entries[k][m + l] = -kdata.g[l][k]
    pi = PoissonStructure(entries)
    gamma = [[[z] * n for _ in range(n)] for _ in range(n)]
    for l in range(m):
        for k in range(m):
            for mm in range(m):
                # direction dzbar^l, differentiated dz^k, component dz^m
                gamma[m + l][k][mm] = -kdata.g[l][k].diff(mm)
            for nn in range(m):
                # direction dz^k, differentiated dzbar^l, component dzbar^n
                gamma[k][m + l][m + nn] = kdata.g[l][k].diff(m + nn)
    conn = Connection(pi, gamma)
    report = conn_analyze(conn)
    if not (report["torsion_free"] and report["respects_poisson"]):
        raise ArithmeticError("Kahler connection failed its own checks")
    return pi, conn


class LiePoissonResult:
    __slots__ = ("feasible", "connection", "certificate")

    def __init__(self, feasible, connection, certificate):
        self.feasible = feasible
        self.connection = connection
        self.certificate = certificate


def lie_poisson_connection_solve(ldata):
    """Decide whether the dual of the Lie algebra carries a torsion-free
    Poisson contravariant connection with constant Christoffel symbols.

    The unknowns Gamma_k^{ij}(0) satisfy
        -Gamma_k^{ij}(0) + Gamma_k^{ji}(0) - c_k^{ij} = 0
    and c_s^{ik} Gamma_k^{jl}(0) = c_s^{jk} Gamma_k^{il}(0).
    Because the Poisson structure is linear in x, a constant solution
    satisfies both conditions everywhere; the returned connection is
    re-verified rather than trusted.  Infeasibility comes back with the
    eliminated system's pivot trail and the inconsistent combination.
    """
    n = ldata.dim
    c = ldata.c
    equations = []
    labels = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                coeffs = {("G", i, j, k): Scalar(-1), ("G", j, i, k): SC_ONE}
                equations.append((coeffs, c[i][j][k]))
                labels.append(("torsion", i, j, k))
    for s in range(n):
        for i in range(n):
            for j in range(i + 1, n):
                for l in range(n):
                    coeffs = {}
                    for k in range(n):
                        if not c[i][k][s].is_zero():
                            key = ("G", j, l, k)
                            coeffs[key] = coeffs.get(key, SC_ZERO) + c[i][k][s]
                        if not c[j][k][s].is_zero():
                            key = ("G", i, l, k)
                            coeffs[key] = coeffs.get(key, SC_ZERO) - c[j][k][s]
                    coeffs = {k: v for k, v in coeffs.items() if not v.is_zero()}
                    if coeffs:
                        equations.append((coeffs, SC_ZERO))
                        labels.append(("association", s, i, j, l))
    solution, certificate = solve_exact_linear(equations)
    certificate = dict(certificate)
    certificate["equations"] = labels
    if solution is None:
        certificate["combination"] = {labels[idx]: v
                                      for idx, v in certificate["combination"].items()}
        return LiePoissonResult(False, None, certificate)
    pi = ldata.poisson_structure()
    gamma = [[[BasePolynomial.const(n, solution.get(("G", i, j, k), SC_ZERO))
               for k in range(n)] for j in range(n)] for i in range(n)]
    conn = Connection(pi, gamma)
    report = conn_analyze(conn)
    if not (report["torsion_free"] and report["respects_poisson"]):
        raise ArithmeticError("origin solution did not extend to a global connection")
    return LiePoissonResult(True, conn, certificate)
