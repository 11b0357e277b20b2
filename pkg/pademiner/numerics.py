"""
Arbitrary precision scalars, dense polynomial algebra, root finding and
numerical null spaces.

Every object built here remembers the `PrecisionContext` it was created in;
mixing contexts inside one computation is not supported.
"""
import math
import numbers
from fractions import Fraction
from collections import namedtuple

import numpy as np
import mpmath

from . import constants as pmc
from .tools.utils import InputError, ConvergenceError, EvaluationError


class PrecisionContext(object):
    """
    Working precision shared by every scalar, polynomial and model built from it.

    Parameters
    ----------
    significand_bits : int, optional
        Binary precision of all scalars, at least 64. DEFAULTS to 512.

    zero_tolerance : float or str, optional
        Relative threshold for "is zero" decisions. DEFAULTS to 2**(-significand_bits/2).
    """
    def __init__(self, significand_bits=pmc.DEFAULT_PRECISION_BITS, zero_tolerance=None):
        if isinstance(significand_bits, bool) or not isinstance(significand_bits, numbers.Integral):
            raise InputError(significand_bits, 'significand_bits must be an integer')
        if significand_bits < pmc.MIN_PRECISION_BITS:
            raise InputError(significand_bits, 'significand_bits must be >= %d'%pmc.MIN_PRECISION_BITS)
        self._bits = int(significand_bits)
        self._mp = mpmath.MPContext()
        self._mp.prec = self._bits
        if zero_tolerance is None:
            tol = self._mp.ldexp(1, -(self._bits//2))
        else:
            tol = self.parse_real(zero_tolerance)
        if not 0 < tol < 1:
            raise InputError(zero_tolerance, 'zero_tolerance must lie in (0, 1)')
        self._tol = tol

    @property
    def significand_bits(self):
        return self._bits

    @property
    def zero_tolerance(self):
        return self._tol

    @property
    def mp(self):
        return self._mp

    @property
    def eps(self):
        return self._mp.ldexp(1, -self._bits)

    @property
    def inf(self):
        return self._mp.inf

    @property
    def digits(self):
        """Decimal digits that round-trip every value at this precision."""
        return int(math.ceil(self._bits*math.log10(2))) + 2

    def describe(self):
        return {'significand_bits': self._bits, 'zero_tolerance': self.to_str(self._tol)}

    def __eq__(self, other):
        return (isinstance(other, PrecisionContext) and self._bits == other._bits
                and self._tol == other._tol)

    def __hash__(self):
        return hash((self._bits, str(self._tol)))

    def __reduce__(self):
        return (PrecisionContext, (self._bits, self.to_str(self._tol)))

    def __repr__(self):
        return 'PrecisionContext(significand_bits=%d)'%self._bits

    #**********
    #CONVERSION
    #**********
    def parse_real(self, value):
        """Convert numbers, Fractions and strings ('0.5', '1/3', 'inf') to an mpf."""
        mp = self._mp
        if isinstance(value, str):
            text = value.strip()
            if text.lower() in ('inf', '+inf', 'infinity'):
                return mp.inf
            if '/' in text:
                num, den = text.split('/', 1)
                return mp.mpf(num.strip())/mp.mpf(den.strip())
            return mp.mpf(text)
        if isinstance(value, Fraction):
            return mp.mpf(value.numerator)/value.denominator
        if hasattr(value, '_mpf_'):
            return mp.mpf(value)
        if isinstance(value, numbers.Integral):
            return mp.mpf(int(value))
        if isinstance(value, numbers.Real):
            return mp.mpf(float(value))
        raise InputError(value, 'cannot be read as a real number')

    def parse_complex(self, value):
        """Convert [re, im] pairs, {'re', 'im'} dicts, complex numbers and reals to an mpc."""
        mp = self._mp
        if hasattr(value, '_mpc_'):
            return mp.mpc(value)
        if isinstance(value, dict):
            return mp.mpc(self.parse_real(value.get('re', 0)), self.parse_real(value.get('im', 0)))
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise InputError(value, 'complex values are [re, im] pairs')
            return mp.mpc(self.parse_real(value[0]), self.parse_real(value[1]))
        if isinstance(value, numbers.Complex) and not isinstance(value, numbers.Real):
            return mp.mpc(value.real, value.imag)
        return mp.mpc(self.parse_real(value))

    def mpc(self, value):
        if isinstance(value, self._mp.mpc):
            return value
        return self.parse_complex(value)

    def to_str(self, x):
        if self._mp.isinf(x):
            return 'inf' if x > 0 else '-inf'
        return self._mp.nstr(x, self.digits)

    def to_pair(self, z):
        z = self._mp.mpc(z)
        return [self.to_str(z.real), self.to_str(z.imag)]

    def raw(self, z):
        """Picklable image of a scalar."""
        return self._mp.mpc(z)._mpc_

    def from_raw(self, raw):
        return self._mp.make_mpc(raw)

    def circle_points(self, radius, samples):
        mp = self._mp
        return [radius*mp.expjpi(mp.mpf(2*k)/samples) for k in range(samples)]


def _trim(coeffs, context):
    mp = context.mp
    scale = max([mp.fabs(c) for c in coeffs], default=0)
    if scale == 0:
        return []
    threshold = context.zero_tolerance*scale
    end = len(coeffs)
    while end > 0 and mp.fabs(coeffs[end-1]) <= threshold:
        end -= 1
    return coeffs[:end]


def _rebuild_polynomial(raw, context):
    return Polynomial([context.from_raw(c) for c in raw], context, trim=False)


class Polynomial(object):
    """
    Dense complex polynomial, coefficients in ascending degree order.

    Trailing coefficients at or below zero_tolerance times the largest
    coefficient modulus are dropped on construction; the zero polynomial
    has no coefficients.
    """
    __slots__ = ('_coeffs', '_context')

    def __init__(self, coefficients, context, trim=True):
        coeffs = [context.mpc(c) for c in coefficients]
        if trim:
            coeffs = _trim(coeffs, context)
        self._coeffs = tuple(coeffs)
        self._context = context

    @classmethod
    def zero(cls, context):
        return cls([], context)

    @classmethod
    def one(cls, context):
        return cls([1], context)

    @classmethod
    def monomial(cls, k, context, coefficient=1):
        return cls([0]*k + [coefficient], context)

    @classmethod
    def from_roots(cls, roots, context):
        """Monic polynomial with the given zeros; `Root` items expand to their multiplicity."""
        mp = context.mp
        coeffs = [mp.mpc(1)]
        for r in _expand_roots(roots):
            r = context.mpc(r)
            new = [mp.mpc(0)]*(len(coeffs)+1)
            for i, c in enumerate(coeffs):
                new[i+1] += c
                new[i] -= r*c
            coeffs = new
        return cls(coeffs, context, trim=False)

    @property
    def coefficients(self):
        return self._coeffs

    @property
    def context(self):
        return self._context

    @property
    def degree(self):
        return len(self._coeffs) - 1

    @property
    def is_zero(self):
        return len(self._coeffs) == 0

    @property
    def leading(self):
        if self.is_zero:
            return self._context.mp.mpc(0)
        return self._coeffs[-1]

    def coefficient(self, k):
        if 0 <= k < len(self._coeffs):
            return self._coeffs[k]
        return self._context.mp.mpc(0)

    def __call__(self, z):
        mp = self._context.mp
        acc = mp.mpc(0)
        for c in reversed(self._coeffs):
            acc = acc*z + c
        return acc

    def derivative(self, order=1):
        coeffs = list(self._coeffs)
        for _ in range(order):
            coeffs = [i*coeffs[i] for i in range(1, len(coeffs))]
        return Polynomial(coeffs, self._context, trim=False)

    def _other(self, other):
        if isinstance(other, Polynomial):
            return other
        return Polynomial([other], self._context)

    def __add__(self, other):
        other = self._other(other)
        size = max(len(self._coeffs), len(other._coeffs))
        return Polynomial([self.coefficient(i) + other.coefficient(i) for i in range(size)], self._context)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self._coeffs], self._context, trim=False)

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = self._context.mpc(other)
            return Polynomial([c*a for a in self._coeffs], self._context)
        mp = self._context.mp
        if self.is_zero or other.is_zero:
            return Polynomial.zero(self._context)
        out = [mp.mpc(0)]*(len(self._coeffs) + len(other._coeffs) - 1)
        for i, a in enumerate(self._coeffs):
            for j, b in enumerate(other._coeffs):
                out[i+j] += a*b
        return Polynomial(out, self._context)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        c = self._context.mpc(scalar)
        if c == 0:
            raise InputError(scalar, 'division of a polynomial by zero')
        return Polynomial([a/c for a in self._coeffs], self._context, trim=False)

    def shift(self, k):
        """Multiply by z**k."""
        if self.is_zero:
            return self
        return Polynomial([0]*k + list(self._coeffs), self._context, trim=False)

    def truncate(self, degree):
        """Keep the terms of degree <= degree."""
        return Polynomial(self._coeffs[:max(degree+1, 0)], self._context)

    def strip_origin(self, k):
        """Divide by z**k; the k lowest coefficients are discarded."""
        return Polynomial(self._coeffs[k:], self._context, trim=False)

    def monic(self):
        if self.is_zero:
            raise InputError('monic', 'the zero polynomial has no leading coefficient')
        lead = self._coeffs[-1]
        coeffs = [c/lead for c in self._coeffs[:-1]] + [self._context.mp.mpc(1)]
        return Polynomial(coeffs, self._context, trim=False)

    def abs_bound(self, z):
        """Sum of |c_k| |z|**k, the scale of rounding errors in Horner evaluation."""
        mp = self._context.mp
        r = mp.fabs(z)
        acc = mp.mpf(0)
        for c in reversed(self._coeffs):
            acc = acc*r + mp.fabs(c)
        return acc

    def distance(self, other, kind='inf'):
        return coefficient_norm(self - other, kind=kind)

    def to_pairs(self):
        return [self._context.to_pair(c) for c in self._coeffs]

    def __reduce__(self):
        return (_rebuild_polynomial, (tuple(self._context.raw(c) for c in self._coeffs), self._context))

    def __repr__(self):
        return 'Polynomial(degree=%d)'%self.degree


Root = namedtuple('Root', ['value', 'multiplicity'])
Root.__doc__ = 'Zero of a polynomial with its estimated multiplicity.'

NullSpace = namedtuple('NullSpace', ['vector', 'dimension', 'basis', 'singular_values'])
NullSpace.__doc__ = 'Smallest singular direction, numerical nullity, null basis and sorted singular values.'


def _expand_roots(roots):
    for r in roots:
        if isinstance(r, Root):
            # Root lists from `roots` already repeat each value
            yield r.value
        else:
            yield r


def coefficient_norm(p, kind='inf'):
    """
    Norm of the coefficient vector of p.

    Parameters
    ----------
    p : `Polynomial`

    kind : {'inf', '1', '2'}, optional
        Max modulus, sum of moduli or Euclidean length. DEFAULTS to 'inf'.
    """
    mp = p.context.mp
    mods = [mp.fabs(c) for c in p.coefficients]
    if kind == 'inf':
        return max(mods, default=mp.mpf(0))
    elif kind == '1':
        return mp.fsum(mods)
    elif kind == '2':
        return mp.sqrt(mp.fsum([m**2 for m in mods]))
    else:
        raise InputError(kind, "kind must be 'inf', '1' or '2'")


def sup_norm_on_circle(evaluator, radius, samples=pmc.DEFAULT_SAMPLES, context=None):
    """
    Max modulus of evaluator over `samples` equispaced points of |z| = radius.

    This is a lower approximation of the true sup norm on the circle.
    """
    if context is None:
        context = getattr(evaluator, 'context', None)
    if context is None:
        raise InputError('context', 'a PrecisionContext is needed for a plain callable')
    if samples < pmc.MIN_SAMPLES:
        raise InputError(samples, 'at least %d samples are required'%pmc.MIN_SAMPLES)
    mp = context.mp
    r = context.parse_real(radius)
    if not r > 0 or mp.isinf(r):
        raise InputError(radius, 'radius must be a positive finite number')
    best = mp.mpf(0)
    for z in context.circle_points(r, samples):
        try:
            value = evaluator(z)
        except ZeroDivisionError:
            raise EvaluationError(context.to_pair(z), 'division by zero on the sampling circle')
        size = mp.fabs(value)
        if not mp.isfinite(size):
            raise EvaluationError(context.to_pair(z), 'non-finite value on the sampling circle')
        if size > best:
            best = size
    return best


def valuation_at_zero(p):
    """Order of z = 0 as a zero of p."""
    if p.is_zero:
        raise InputError('valuation', 'the zero polynomial has no finite valuation')
    mp = p.context.mp
    threshold = p.context.zero_tolerance*coefficient_norm(p)
    for k, c in enumerate(p.coefficients):
        if mp.fabs(c) > threshold:
            return k
    return p.degree


def _float_seeds(coeffs, context):
    mp = context.mp
    deg = len(coeffs) - 1
    try:
        values = np.array([complex(c) for c in reversed(coeffs)], dtype=complex)
        if np.all(np.isfinite(values)):
            seeds = np.roots(values)
            if len(seeds) == deg and np.all(np.isfinite(seeds)):
                return [mp.mpc(complex(s)) for s in seeds]
    except (OverflowError, ValueError, np.linalg.LinAlgError):
        pass
    # Cauchy bound circle with a phase offset
    bound = 1 + max([mp.fabs(c) for c in coeffs[:-1]], default=mp.mpf(0))
    return [bound*mp.expjpi(mp.mpf(2*k + 0.5)/deg) for k in range(deg)]


def _separate(seeds, context):
    mp = context.mp
    out = []
    for i, s in enumerate(seeds):
        while any(s == t for t in out):
            s = s + pmc.ROOT_SEED_SPLIT*max(1, mp.fabs(s))*mp.expjpi(mp.mpf(2*i + 1)/(2*len(seeds)))
        out.append(s)
    return out


def _aberth(coeffs, context, max_steps):
    mp = context.mp
    deg = len(coeffs) - 1
    p = Polynomial(coeffs, context, trim=False)
    dp = p.derivative()
    z = _separate(_float_seeds(coeffs, context), context)
    factor = pmc.ROOT_RESIDUAL_FACTOR*(deg + 1)*context.eps
    done = [False]*deg
    for step in range(max_steps):
        for i in range(deg):
            if done[i]:
                continue
            zi = z[i]
            value = p(zi)
            if mp.fabs(value) <= factor*p.abs_bound(zi):
                done[i] = True
                continue
            slope = dp(zi)
            if slope == 0:
                z[i] = zi + pmc.ROOT_SEED_SPLIT*max(1, mp.fabs(zi))
                continue
            ratio = value/slope
            pull = mp.mpc(0)
            for j in range(deg):
                if j != i and z[j] != zi:
                    pull += 1/(zi - z[j])
            denom = 1 - ratio*pull
            step_ = ratio if denom == 0 else ratio/denom
            z[i] = zi - step_
            if mp.fabs(step_) <= 4*context.eps*max(1, mp.fabs(zi)):
                done[i] = True
        if all(done):
            return z
    raise ConvergenceError('roots', 'no convergence after %d sweeps (degree %d)'%(max_steps, deg))


def _cluster(values, context):
    mp = context.mp
    deg = len(values)
    radius = context.zero_tolerance**(mp.mpf(1)/deg)
    label = list(range(deg))

    def find(i):
        while label[i] != i:
            label[i] = label[label[i]]
            i = label[i]
        return i

    for i in range(deg):
        for j in range(i+1, deg):
            if mp.fabs(values[i] - values[j]) <= radius*max(1, mp.fabs(values[i])):
                label[find(j)] = find(i)
    groups = {}
    for i in range(deg):
        groups.setdefault(find(i), []).append(values[i])
    out = []
    for members in groups.values():
        # the centroid of a cluster is well conditioned even when its members are not
        center = mp.fsum(members)/len(members)
        out.extend([Root(center, len(members))]*len(members))
    return out


def roots(p, max_steps=pmc.ROOT_MAX_STEPS):
    """
    All zeros of p, repeated according to multiplicity.

    Simultaneous (Aberth) iteration seeded by double precision companion
    eigenvalues. Each returned value satisfies |p(z)| <= 8 (deg+1) 2**-bits
    sum |a_k| |z|**k for the monic coefficients a_k, or stopped moving at
    working precision. Zeros closer than zero_tolerance**(1/deg) (relative)
    are merged into one cluster whose value is the cluster centroid.

    Returns
    -------
    list of `Root`, sorted by modulus then argument.
    """
    if p.degree < 1:
        raise InputError(p.degree, 'roots need a polynomial of degree >= 1')
    context = p.context
    mp = context.mp
    monic = p.monic()
    v = valuation_at_zero(monic)
    found = [mp.mpc(0)]*v
    rest = list(monic.coefficients[v:])
    if len(rest) > 1:
        found.extend(_aberth(rest, context, max_steps))
    out = _cluster(found, context)
    out.sort(key=lambda r: (float(mp.fabs(r.value)), float(mp.arg(r.value)) if r.value != 0 else 0.0))
    return out


def distinct_roots(root_list):
    """One `Root` per cluster, keeping the order of `roots` output."""
    out = []
    for r in root_list:
        if not out or not (out[-1].value == r.value and out[-1].multiplicity == r.multiplicity):
            out.append(r)
    return out


def _as_rows(matrix, context):
    rows = [[context.mpc(x) for x in row] for row in matrix]
    if not rows or not rows[0]:
        raise InputError('matrix', 'empty matrix')
    ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise InputError('matrix', 'rows of different length')
    return rows


def null_space(matrix, context):
    """
    Numerical null space of a dense complex matrix given as a list of rows.

    The dimension counts singular values at or below zero_tolerance times the
    largest one (all of them when the matrix vanishes), plus the columns in
    excess of the rows. Basis vectors are the conjugated right singular
    directions, smallest singular value last.
    """
    mp = context.mp
    rows = _as_rows(matrix, context)
    nrows, ncols = len(rows), len(rows[0])
    size = max(nrows, ncols)
    A = mp.matrix(size, ncols)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            A[i, j] = x
    U, S, V = mp.svd_c(A)
    svals = [mp.mpf(S[i]) for i in range(min(size, ncols))]
    order = sorted(range(len(svals)), key=lambda i: -svals[i])
    svals = [svals[i] for i in order]
    directions = [[mp.conj(V[i, j]) for j in range(ncols)] for i in order]
    top = svals[0] if svals else mp.mpf(0)
    threshold = context.zero_tolerance*top
    null_idx = [i for i, s in enumerate(svals) if s <= threshold]
    basis = [directions[i] for i in null_idx]
    return NullSpace(directions[-1], len(null_idx), basis, svals)


def null_space_vector(matrix, context):
    """
    Unit vector along the smallest singular direction and the numerical nullity.

    Requires rows <= columns.
    """
    rows = _as_rows(matrix, context)
    if len(rows) > len(rows[0]):
        raise InputError('matrix', 'more rows than columns')
    ns = null_space(rows, context)
    return ns.vector, ns.dimension
