"""Exact truncated fibre-series algebra over the Gaussian rationals.

Values live on the formal neighborhood of the zero section of a cotangent
bundle over a single coordinate chart: polynomials in the base coordinates
x^1..x^n, truncated formal power series in the fibre coordinates xi_1..xi_n.
All arithmetic is exact (coefficients in Q(i)); truncation orders are
tracked explicitly and never overstated.

Conventions used across the package:
  - multi-indices are tuples of nonnegative ints of length dim
  - all indices are 0-based in code
  - a FibreSeries with order=None holds exact polynomial data (nothing was
    ever discarded, so it is valid at every order); a finite order N means
    the fibre-degree <= N part is exactly right and nothing is known beyond
  - binary operations report the weakest order of their inputs
"""

from fractions import Fraction


class PreconditionError(ValueError):
    """A documented operation precondition failed; carries a residual report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


def _frac(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError("expected int or Fraction, got %r" % (v,))


class Scalar:
    """A Gaussian rational re + im*I, the coefficient field everywhere.

    Real inputs simply carry im = 0.  Fractions keep themselves in lowest
    terms with positive denominator, which makes equality structural.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    def is_zero(self):
        return not self.re and not self.im

    def conjugate(self):
        return Scalar(self.re, -self.im)

    def __bool__(self):
        return not self.is_zero()

    def __add__(self, other):
        other = as_scalar(other)
        return Scalar(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_scalar(other)
        return Scalar(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_scalar(other) - self

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __mul__(self, other):
        other = as_scalar(other)
        return Scalar(self.re * other.re - self.im * other.im,
                      self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_scalar(other)
        n = other.re * other.re + other.im * other.im
        if not n:
            raise ZeroDivisionError("division by zero Scalar")
        return Scalar((self.re * other.re + self.im * other.im) / n,
                      (self.im * other.re - self.re * other.im) / n)

    def __rtruediv__(self, other):
        return as_scalar(other) / self

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("Scalar powers must be nonnegative ints")
        out = SC_ONE
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            other = as_scalar(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return "Scalar(%s)" % self.to_string()

    def to_string(self):
        # canonical text form: "a/b", "a/b*I", or "a/b+c/d*I" (sign folded in)
        if not self.im:
            return str(self.re)
        if self.im == 1:
            im = "I"
        elif self.im == -1:
            im = "-I"
        else:
            im = "%s*I" % self.im
        if not self.re:
            return im
        if self.im > 0:
            return "%s+%s" % (self.re, im)
        return "%s%s" % (self.re, im)


SC_ZERO = Scalar(0)
SC_ONE = Scalar(1)
SC_I = Scalar(0, 1)


def as_scalar(v):
    if isinstance(v, Scalar):
        return v
    if isinstance(v, (int, Fraction)):
        return Scalar(v)
    raise TypeError("cannot coerce %r to Scalar" % (v,))


def grlex_key(mono):
    # graded-lexicographic: total degree first, then the tuple itself
    return (sum(mono), mono)


def _mono_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


class BasePolynomial:
    """Sparse exact polynomial in the base coordinates.

    terms maps x-multi-index -> nonzero Scalar; zero coefficients are never
    stored, so equality is plain dict equality.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim, terms=None):
        self.dim = dim
        clean = {}
        if terms:
            for mono, c in terms.items():
                c = as_scalar(c)
                if len(mono) != dim:
                    raise ValueError("multi-index length %d != dim %d" % (len(mono), dim))
                if not c.is_zero():
                    clean[tuple(mono)] = c
        self.terms = clean

    @classmethod
    def zero(cls, dim):
        return cls(dim)

    @classmethod
    def const(cls, dim, c):
        return cls(dim, {(0,) * dim: as_scalar(c)})

    @classmethod
    def var(cls, dim, i):
        if not 0 <= i < dim:
            raise IndexError("variable index %d out of range for dim %d" % (i, dim))
        mono = tuple(1 if k == i else 0 for k in range(dim))
        return cls(dim, {mono: SC_ONE})

    @classmethod
    def monomial(cls, dim, mono, c=SC_ONE):
        return cls(dim, {tuple(mono): as_scalar(c)})

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(sum(m) == 0 for m in self.terms)

    def constant_part(self):
        return self.terms.get((0,) * self.dim, SC_ZERO)

    def degree(self):
        # degree of the zero polynomial is reported as -1
        return max((sum(m) for m in self.terms), default=-1)

    def _check(self, other):
        if self.dim != other.dim:
            raise ValueError("dimension mismatch: %d vs %d" % (self.dim, other.dim))

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            other = BasePolynomial.const(self.dim, other)
        self._check(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            s = terms.get(mono, SC_ZERO) + c
            if s.is_zero():
                terms.pop(mono, None)
            else:
                terms[mono] = s
        return BasePolynomial(self.dim, terms)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return BasePolynomial(self.dim, {m: -c for m, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            c = as_scalar(other)
            return BasePolynomial(self.dim, {m: v * c for m, v in self.terms.items()})
        self._check(other)
        terms = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = _mono_add(ma, mb)
                s = terms.get(m, SC_ZERO) + ca * cb
                if s.is_zero():
                    terms.pop(m, None)
                else:
                    terms[m] = s
        return BasePolynomial(self.dim, terms)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be nonnegative ints")
        out = BasePolynomial.const(self.dim, 1)
        for _ in range(k):
            out = out * self
        return out

    def diff(self, i):
        if not 0 <= i < self.dim:
            raise IndexError("derivative index %d out of range for dim %d" % (i, self.dim))
        terms = {}
        for mono, c in self.terms.items():
            e = mono[i]
            if e:
                m = list(mono)
                m[i] = e - 1
                terms[tuple(m)] = c * e
        return BasePolynomial(self.dim, terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            other = BasePolynomial.const(self.dim, other)
        if not isinstance(other, BasePolynomial):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    __hash__ = None

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def to_string(self, names=None):
        if not self.terms:
            return "0"
        if names is None:
            names = ["x%d" % (i + 1) for i in range(self.dim)]
        parts = []
        for mono, c in self.sorted_terms():
            factors = []
            for i, e in enumerate(mono):
                if e == 1:
                    factors.append(names[i])
                elif e > 1:
                    factors.append("%s^%d" % (names[i], e))
            cs = c.to_string()
            if factors and ("+" in cs[1:] or "-" in cs[1:]):
                cs = "(%s)" % cs
            if not factors:
                parts.append(cs)
            elif cs == "1":
                parts.append("*".join(factors))
            elif cs == "-1":
                parts.append("-" + "*".join(factors))
            else:
                parts.append(cs + "*" + "*".join(factors))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return "BasePolynomial(%s)" % self.to_string()


def _min_order(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class FibreSeries:
    """Truncated formal function on the formal neighborhood.

    terms maps xi-multi-index -> nonzero BasePolynomial.  The order is the
    guaranteed truncation bound; construction eagerly drops terms beyond it.
    """

    __slots__ = ("dim", "order", "terms")

    def __init__(self, dim, terms=None, order=None):
        if order is not None and order < -1:
            order = -1
        self.dim = dim
        self.order = order
        clean = {}
        if terms:
            for mono, p in terms.items():
                mono = tuple(mono)
                if len(mono) != dim:
                    raise ValueError("fibre multi-index length %d != dim %d" % (len(mono), dim))
                if order is not None and sum(mono) > order:
                    continue
                if not p.is_zero():
                    clean[mono] = p
        self.terms = clean

    @classmethod
    def zero(cls, dim, order=None):
        return cls(dim, order=order)

    @classmethod
    def from_poly(cls, p, order=None):
        return cls(p.dim, {(0,) * p.dim: p}, order=order)

    @classmethod
    def const(cls, dim, c, order=None):
        return cls.from_poly(BasePolynomial.const(dim, c), order=order)

    @classmethod
    def xi_var(cls, dim, i, order=None):
        if not 0 <= i < dim:
            raise IndexError("fibre index %d out of range for dim %d" % (i, dim))
        mono = tuple(1 if k == i else 0 for k in range(dim))
        return cls(dim, {mono: BasePolynomial.const(dim, 1)}, order=order)

    def is_zero(self):
        return not self.terms

    def xi_degree(self):
        # top fibre degree actually present (-1 for the zero series)
        return max((sum(m) for m in self.terms), default=-1)

    def zero_section(self):
        """The ordinary polynomial obtained by setting all xi to zero."""
        return self.terms.get((0,) * self.dim, BasePolynomial.zero(self.dim))

    def truncate(self, order):
        return FibreSeries(self.dim, self.terms, order=_min_order(self.order, order))

    def with_order(self, order):
        """Re-certify exact data at the given order; caller asserts exactness."""
        return FibreSeries(self.dim, self.terms, order=order)

    def _check(self, other):
        if self.dim != other.dim:
            raise ValueError("dimension mismatch: %d vs %d" % (self.dim, other.dim))

    def _coerce(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            return FibreSeries.const(self.dim, other)
        if isinstance(other, BasePolynomial):
            return FibreSeries.from_poly(other)
        return other

    def __add__(self, other):
        other = self._coerce(other)
        self._check(other)
        order = _min_order(self.order, other.order)
        terms = dict(self.terms)
        for mono, p in other.terms.items():
            s = terms.get(mono, BasePolynomial.zero(self.dim)) + p
            if s.is_zero():
                terms.pop(mono, None)
            else:
                terms[mono] = s
        return FibreSeries(self.dim, terms, order=order)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return FibreSeries(self.dim, {m: -p for m, p in self.terms.items()}, order=self.order)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            c = as_scalar(other)
            if c.is_zero():
                return FibreSeries.zero(self.dim, order=self.order)
            return FibreSeries(self.dim, {m: p * c for m, p in self.terms.items()},
                               order=self.order)
        if isinstance(other, BasePolynomial):
            self._check(other)
            return FibreSeries(self.dim, {m: p * other for m, p in self.terms.items()},
                               order=self.order)
        self._check(other)
        order = _min_order(self.order, other.order)
        terms = {}
        for ma, pa in self.terms.items():
            da = sum(ma)
            for mb, pb in other.terms.items():
                if order is not None and da + sum(mb) > order:
                    continue
                m = _mono_add(ma, mb)
                s = terms.get(m, BasePolynomial.zero(self.dim)) + pa * pb
                if s.is_zero():
                    terms.pop(m, None)
                else:
                    terms[m] = s
        return FibreSeries(self.dim, terms, order=order)

    __rmul__ = __mul__

    def diff_x(self, i):
        terms = {}
        for mono, p in self.terms.items():
            d = p.diff(i)
            if not d.is_zero():
                terms[mono] = d
        return FibreSeries(self.dim, terms, order=self.order)

    def diff_xi(self, i):
        if not 0 <= i < self.dim:
            raise IndexError("fibre index %d out of range for dim %d" % (i, self.dim))
        terms = {}
        for mono, p in self.terms.items():
            e = mono[i]
            if e:
                m = list(mono)
                m[i] = e - 1
                terms[tuple(m)] = p * e
        order = None if self.order is None else self.order - 1
        return FibreSeries(self.dim, terms, order=order)

    def fibre_shift(self, p, l):
        """xi_p * d/dxi_l, computed in one move.

        The composite preserves fibre degree, so unlike diff_xi followed by a
        product it loses no truncation order.
        """
        if not 0 <= p < self.dim or not 0 <= l < self.dim:
            raise IndexError("fibre index out of range for dim %d" % self.dim)
        terms = {}
        for mono, poly in self.terms.items():
            e = mono[l]
            if e:
                m = list(mono)
                m[l] = e - 1
                m[p] += 1
                m = tuple(m)
                s = terms.get(m, BasePolynomial.zero(self.dim)) + poly * e
                if s.is_zero():
                    terms.pop(m, None)
                else:
                    terms[m] = s
        return FibreSeries(self.dim, terms, order=self.order)

    def xi_component(self, s):
        if s < 0:
            raise ValueError("fibre degree must be nonnegative")
        if self.order is not None and s > self.order:
            raise ValueError("degree %d exceeds guaranteed order %d" % (s, self.order))
        terms = {m: p for m, p in self.terms.items() if sum(m) == s}
        # a homogeneous component of a certified series is exact data
        return FibreSeries(self.dim, terms, order=None)

    def substitute(self, components, order=None):
        """Evaluate at xi_p = components[p](x, zeta).

        Every component must have zero fibre-degree-0 part; the components
        need not be jointly invertible.  Exact on polynomial data up to the
        resulting order.
        """
        if len(components) != self.dim:
            raise ValueError("need %d substitution components, got %d"
                             % (self.dim, len(components)))
        target = self.order
        for c in components:
            self._check(c)
            if not c.zero_section().is_zero():
                raise ValueError("substitution component has nonzero part on the zero section")
            target = _min_order(target, c.order)
        target = _min_order(target, order)
        out = FibreSeries.zero(self.dim, order=target)
        powers = [{0: FibreSeries.const(self.dim, 1, order=target)} for _ in range(self.dim)]

        def power(p, e):
            cache = powers[p]
            if e not in cache:
                cache[e] = (power(p, e - 1) * components[p]).truncate(target)
            return cache[e]

        for mono, poly in self.terms.items():
            if target is not None and sum(mono) > target:
                continue
            term = FibreSeries.const(self.dim, 1, order=target)
            for p, e in enumerate(mono):
                if e:
                    term = term * power(p, e)
            out = out + term * poly
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if not isinstance(other, FibreSeries):
            return NotImplemented
        if self.dim != other.dim:
            return False
        order = _min_order(self.order, other.order)
        return self.truncate(order).terms == other.truncate(order).terms

    __hash__ = None

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def to_string(self, names=None, fibre_names=None):
        if not self.terms:
            return "0"
        if names is None:
            names = ["x%d" % (i + 1) for i in range(self.dim)]
        if fibre_names is None:
            fibre_names = ["xi_" + n for n in names]
        parts = []
        for mono, poly in self.sorted_terms():
            factors = []
            for i, e in enumerate(mono):
                if e == 1:
                    factors.append(fibre_names[i])
                elif e > 1:
                    factors.append("%s^%d" % (fibre_names[i], e))
            ps = poly.to_string(names)
            if not factors:
                parts.append(ps)
                continue
            if ps == "1":
                parts.append("*".join(factors))
            elif ps == "-1":
                parts.append("-" + "*".join(factors))
            elif len(poly.terms) == 1 and " " not in ps:
                parts.append(ps + "*" + "*".join(factors))
            else:
                parts.append("(%s)*%s" % (ps, "*".join(factors)))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        tag = "" if self.order is None else ", order=%d" % self.order
        return "FibreSeries(%s%s)" % (self.to_string(), tag)


class FibreMap:
    """A fibre substitution xi_p <- phi_p(x, zeta) with invertible linear part.

    The linear part must be a constant (x-free) invertible Scalar matrix;
    that is what makes the map invertible order by order.
    """

    __slots__ = ("dim", "order", "components", "linear_part")

    def __init__(self, components, order=None):
        components = tuple(components)
        dim = len(components)
        ord_ = order
        lin = [[SC_ZERO] * dim for _ in range(dim)]
        for p, comp in enumerate(components):
            if comp.dim != dim:
                raise ValueError("component dimension mismatch")
            if not comp.zero_section().is_zero():
                raise ValueError("fibre map component %d has nonzero zero-section part" % p)
            ord_ = _min_order(ord_, comp.order)
            for mono, poly in comp.terms.items():
                if sum(mono) != 1:
                    continue
                if not poly.is_constant():
                    raise ValueError("fibre map linear part must be constant in x")
                j = mono.index(1)
                lin[p][j] = poly.constant_part()
        self.dim = dim
        self.order = ord_
        self.components = tuple(c.truncate(ord_) for c in components)
        self.linear_part = lin
        invert_scalar_matrix(lin)  # raises if singular

    @classmethod
    def identity(cls, dim, order=None):
        return cls(tuple(FibreSeries.xi_var(dim, i, order=order) for i in range(dim)),
                   order=order)

    def is_identity(self):
        return all(self.components[i] == FibreSeries.xi_var(self.dim, i)
                   for i in range(self.dim))

    def apply(self, series):
        return series.substitute(self.components)

    def compose(self, other):
        """self after other: xi = self(other(zeta))."""
        return FibreMap(tuple(c.substitute(other.components) for c in self.components))

    def invert(self, order=None):
        order = _min_order(self.order, order)
        if order is None:
            raise ValueError("fibre map inversion needs a finite truncation order")
        linv = invert_scalar_matrix(self.linear_part)

        def lin_apply(vec):
            out = []
            for p in range(self.dim):
                acc = FibreSeries.zero(self.dim, order=order)
                for j in range(self.dim):
                    if not linv[p][j].is_zero():
                        acc = acc + vec[j] * linv[p][j]
                out.append(acc)
            return out

        xi = tuple(FibreSeries.xi_var(self.dim, i, order=order) for i in range(self.dim))
        higher = tuple((self.components[p] - sum_linear(self.linear_part, xi, p)).truncate(order)
                       for p in range(self.dim))
        psi = lin_apply(xi)
        for _ in range(max(order - 1, 0)):
            fed = [h.substitute(psi) for h in higher]
            psi = lin_apply([xi[j] - fed[j] for j in range(self.dim)])
        inv = FibreMap(psi, order=order)
        check = self.compose(inv)
        ident = FibreMap.identity(self.dim, order=order)
        for p in range(self.dim):
            if check.components[p] != ident.components[p]:
                raise ArithmeticError("fibre map inversion failed to reach the identity")
        return inv


def sum_linear(matrix, xi, p):
    acc = FibreSeries.zero(xi[0].dim, order=xi[0].order)
    for j in range(len(xi)):
        if not matrix[p][j].is_zero():
            acc = acc + xi[j] * matrix[p][j]
    return acc


# ---------------------------------------------------------------------------
# the operation names used by the rest of the package


def poly_mul(a, b):
    """Exact truncated product of two fibre series."""
    return a * b


def partial(a, kind, index):
    """Formal partial derivative, kind 'base' (d/dx) or 'fibre' (d/dxi)."""
    if kind == "base":
        return a.diff_x(index)
    if kind == "fibre":
        return a.diff_xi(index)
    raise ValueError("kind must be 'base' or 'fibre', got %r" % (kind,))


def xi_component(a, s):
    """Homogeneous fibre-degree-s component of a series."""
    return a.xi_component(s)


def substitute_fibre(F, phi):
    """F(x, phi(x, zeta)); phi is a FibreMap or a plain component tuple."""
    if isinstance(phi, FibreMap):
        return phi.apply(F)
    return F.substitute(tuple(phi))


def invert_fibre_map(phi, order=None):
    return phi.invert(order=order)


# ---------------------------------------------------------------------------
# exact linear algebra helpers shared by the solvers


def invert_scalar_matrix(m):
    """Exact inverse of a square Scalar matrix via Gauss-Jordan."""
    n = len(m)
    a = [[as_scalar(m[i][j]) for j in range(n)] for i in range(n)]
    inv = [[SC_ONE if i == j else SC_ZERO for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
        if piv is None:
            raise ArithmeticError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        d = a[col][col]
        a[col] = [v / d for v in a[col]]
        inv[col] = [v / d for v in inv[col]]
        for r in range(n):
            if r != col and not a[r][col].is_zero():
                f = a[r][col]
                a[r] = [a[r][j] - f * a[col][j] for j in range(n)]
                inv[r] = [inv[r][j] - f * inv[col][j] for j in range(n)]
    return inv


def invert_series_matrix(m, order):
    """Inverse of a square FibreSeries matrix whose fibre-degree-0 part is a
    constant invertible Scalar matrix, as a geometric series to the given order."""
    n = len(m)
    dim = m[0][0].dim
    m0 = [[SC_ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            z = m[i][j].zero_section()
            if not z.is_constant():
                raise ArithmeticError("matrix zero-order part is not constant in x")
            m0[i][j] = z.constant_part()
    m0inv = invert_scalar_matrix(m0)

    def scal_left(sc, mat):
        return [[sum((mat[k][j] * sc[i][k] for k in range(n)),
                     FibreSeries.zero(dim, order=order)) for j in range(n)]
                for i in range(n)]

    def scal_right(mat, sc):
        return [[sum((mat[i][k] * sc[k][j] for k in range(n)),
                     FibreSeries.zero(dim, order=order)) for j in range(n)]
                for i in range(n)]

    delta = [[(m[i][j] - FibreSeries.const(dim, m0[i][j])).truncate(order)
              for j in range(n)] for i in range(n)]
    nmat = scal_left(m0inv, delta)  # valuation >= 1
    # m = m0 (1 + nmat), so the inverse is sum_k (-nmat)^k times m0^{-1}
    acc = [[FibreSeries.const(dim, SC_ONE if i == j else SC_ZERO, order=order)
            for j in range(n)] for i in range(n)]
    power = [row[:] for row in acc]
    for _ in range(order):
        power = [[sum((power[i][k] * (-1) * nmat[k][j] for k in range(n)),
                      FibreSeries.zero(dim, order=order)) for j in range(n)]
                 for i in range(n)]
        if all(power[i][j].is_zero() for i in range(n) for j in range(n)):
            break
        acc = [[acc[i][j] + power[i][j] for j in range(n)] for i in range(n)]
    return scal_right(acc, m0inv)


def solve_exact_linear(equations, nvars=None):
    """Exact Gaussian elimination over Scalar with a pivot trail.

    equations: list of (coeffs, rhs) where coeffs maps a hashable variable
    key to a Scalar.  Returns (solution, certificate): on success solution
    maps every pivot variable to its value (free variables are zero) and the
    certificate records the pivot trail; on inconsistency solution is None
    and the certificate carries the combination of input equations that
    reduced to 0 = nonzero.
    """
    rows = []
    for idx, (coeffs, rhs) in enumerate(equations):
        row = {k: as_scalar(v) for k, v in coeffs.items() if not as_scalar(v).is_zero()}
        rows.append({"coeffs": row, "rhs": as_scalar(rhs), "combo": {idx: SC_ONE}})
    pivots = []  # (variable key, eliminating combo snapshot)
    var_order = sorted({k for r in rows for k in r["coeffs"]})
    reduced = []
    for var in var_order:
        piv = next((r for r in rows if var in r["coeffs"]), None)
        if piv is None:
            continue
        rows.remove(piv)
        d = piv["coeffs"][var]
        piv = {"coeffs": {k: v / d for k, v in piv["coeffs"].items()},
               "rhs": piv["rhs"] / d,
               "combo": {k: v / d for k, v in piv["combo"].items()}}
        for r in rows + reduced:
            f = r["coeffs"].get(var)
            if f is None:
                continue
            for k, v in piv["coeffs"].items():
                nv = r["coeffs"].get(k, SC_ZERO) - f * v
                if nv.is_zero():
                    r["coeffs"].pop(k, None)
                else:
                    r["coeffs"][k] = nv
            r["rhs"] = r["rhs"] - f * piv["rhs"]
            for k, v in piv["combo"].items():
                nv = r["combo"].get(k, SC_ZERO) - f * v
                if nv.is_zero():
                    r["combo"].pop(k, None)
                else:
                    r["combo"][k] = nv
        reduced.append(piv)
        pivots.append(var)
    for r in rows:
        if not r["coeffs"] and not r["rhs"].is_zero():
            certificate = {"feasible": False,
                           "pivots": pivots,
                           "combination": r["combo"],
                           "residual": r["rhs"]}
            return None, certificate
    # after Jordan elimination each reduced row holds its pivot plus free
    # variables only; free variables are pinned to zero
    solution = {var: row["rhs"] for var, row in zip(pivots, reduced)}
    certificate = {"feasible": True, "pivots": pivots}
    return solution, certificate
