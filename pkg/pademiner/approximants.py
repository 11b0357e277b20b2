"""
Hermite-Pade, Pade and incomplete Pade approximants along a row.

Every solve goes through the same two steps: `solve_denominator` finds the
raw null vector of the homogeneous interpolation system together with its
numerical nullity and conditioning, and `assemble_record` reduces the raw
polynomials (common zero at the origin, normalization, common roots) and
computes the defect indices lambda_n, m_n and tau_n. Sweeps ship only the
raw step between processes.
"""
import json
import warnings
from dataclasses import dataclass

from .numerics import (Polynomial, Root, null_space, roots, distinct_roots,
                       valuation_at_zero, coefficient_norm)
from .series import SystemModel, MeromorphicModel, CoefficientSeries
from .tools.utils import InputError, DegenerateSolutionError

HERMITE_PADE = 'hermite_pade'
PADE = 'pade'
INCOMPLETE_PADE = 'incomplete_pade'
MINIMAL_NORM = 'minimal_norm'
NORMALIZATIONS = ('monic', 'l1')

CSV_COLUMNS = ('n', 'deg_Q', 'lambda_n', 'm_n', 'tau_n', 'null_dimension', 'Q_coefficients')


@dataclass(frozen=True)
class ApproximantRecord:
    """
    One approximant of a row.

    Q and P are the polynomials after the common zero z**lambda_n has been
    divided out, normalized as requested (monic by default). m_star holds
    the number of interpolation conditions per component: m for Hermite-Pade
    records, (m_star,) for incomplete ones. zeros are all zeros of Q,
    reduced_zeros those not shared by every nonzero P_k.
    """
    n: int
    m: tuple
    Q: Polynomial
    P: tuple
    null_dimension: int
    lambda_n: int
    m_n: int
    tau_n: int
    m_star: tuple
    kind: str = HERMITE_PADE
    zeros: tuple = ()
    reduced_zeros: tuple = ()
    conditioning: object = None
    normalization: str = 'monic'

    @property
    def unique(self):
        return self.null_dimension == 1

    @property
    def total(self):
        """Number of free denominator coefficients minus one."""
        return sum(self.m)

    @property
    def context(self):
        return self.Q.context


@dataclass(frozen=True)
class NormalizedDenominator:
    """Coefficients of z**lambda_n Q scaled to unit l1 norm, leading coefficient real positive."""
    lambda_coeffs: tuple
    leading: object
    total: int


@dataclass(frozen=True)
class ZeroSetDiagnostics:
    """
    Zero sets of the reduced denominators along a row and the quantities
    read from them. S and G are None when no record has a zero. The
    `*_from` fields give the smallest n from which a condition holds up to
    the last record, None when it fails at the end.
    """
    zero_sets: dict
    S: object
    G: object
    indices: tuple
    m: int
    m_star: int
    lambda_steps_from: object
    total_steps_from: object
    sufficient_condition_from: object
    positive_radius_hypotheses: bool
    finite_radius_hypotheses: bool


@dataclass(frozen=True)
class FromHermitePade:
    """Selection policy: take (P_k, Q) of the Hermite-Pade approximant of `system`."""
    component: int
    system: SystemModel


#*****************
#EQUATION ASSEMBLY
#*****************
def _getter(source):
    if isinstance(source, MeromorphicModel):
        return source.taylor_coefficient
    if isinstance(source, CoefficientSeries):
        # structural coefficients when the stream was built from a model
        if source.model is not None:
            return source.model.taylor_coefficient
        return source.coefficient
    raise InputError(type(source).__name__, 'expected a MeromorphicModel or a CoefficientSeries')


def resolve_sources(system, m=None):
    """Coefficient getters, multi-index and context of a system or of a list of series."""
    if isinstance(system, SystemModel):
        if m is not None and tuple(m) != system.m:
            raise InputError(m, 'multi-index differs from the one of the system %s'%(system.m,))
        return [f.taylor_coefficient for f in system.components], system.m, system.context
    if isinstance(system, (MeromorphicModel, CoefficientSeries)):
        system = [system]
    sources = list(system)
    if not sources:
        raise InputError('system', 'no components given')
    if m is None:
        raise InputError('m', 'a multi-index is required for a list of series')
    if isinstance(m, int):
        m = (m,)
    m = tuple(m)
    if len(m) != len(sources):
        raise InputError(m, 'multi-index length does not match %d components'%len(sources))
    for k, mk in enumerate(m):
        if isinstance(mk, bool) or int(mk) != mk or mk < 0:
            raise InputError('m[%d]'%k, 'multi-index entries must be nonnegative integers')
    context = sources[0].context
    return [_getter(s) for s in sources], tuple(int(mk) for mk in m), context


def coefficient_tables(getters, up_to):
    """phi_{0..up_to,k} for every component."""
    return [[g(i) for i in range(up_to+1)] for g in getters]


def solve_denominator(tables, n, m_star, ncols, context):
    """
    Raw null vector of the interpolation system.

    For each component k the rows ask the coefficients of z**(n-m_star[k]+1)
    .. z**n of Q f_k to vanish; Q has ncols coefficients. Rows are scaled
    to unit max modulus and identically zero rows are dropped.

    Returns
    -------
    (q, null_dimension, conditioning) with q a list of scalars, and
    conditioning the ratio of the largest singular value to the last
    non-null one.
    """
    mp = context.mp
    zero = mp.mpc(0)
    rows = []
    for table, ms in zip(tables, m_star):
        for i in range(n-ms+1, n+1):
            row = [table[i-j] if i-j >= 0 else zero for j in range(ncols)]
            scale = max(mp.fabs(x) for x in row)
            if scale > 0:
                rows.append([x/scale for x in row])
    if not rows:
        return [mp.mpc(1)] + [zero]*(ncols-1), ncols, mp.mpf(1)
    ns = null_space(rows, context)
    dim = max(ns.dimension, 1)
    svals = ns.singular_values
    last = len(svals) - dim - 1
    if last >= 0 and svals[last] > 0:
        conditioning = svals[0]/svals[last]
    else:
        conditioning = mp.mpf(1)
    return list(ns.vector), dim, conditioning


def numerator_vectors(q, tables, n, m_star):
    """Coefficients 0..n-m_star[k] of Q f_k."""
    out = []
    for table, ms in zip(tables, m_star):
        p = []
        for i in range(n-ms+1):
            acc = 0
            for j in range(min(i+1, len(q))):
                acc += q[j]*table[i-j]
            p.append(acc)
        out.append(p)
    return out


#**********
#REDUCTION
#**********
def _zero_order(p, zeta, limit, radius):
    """Multiplicity (capped at limit) of zeta as a zero of p, by Newton distance."""
    if p.is_zero:
        return limit
    mp = p.context.mp
    scale = radius*max(1, mp.fabs(zeta))
    order, d = 0, p
    while order < limit:
        value = d(zeta)
        d1 = d.derivative()
        if value == 0 or mp.fabs(value) <= scale*mp.fabs(d1(zeta)):
            order += 1
            d = d1
        else:
            break
    return order


def assemble_record(kind, n, m, m_star, q, p_vectors, null_dimension, conditioning,
                    context, normalization='monic', match_radius=None):
    """
    Reduce raw (Q, P_1..P_d) to an `ApproximantRecord`.

    The common zero at the origin is divided out (lambda_n). Zeros of Q
    shared, within match_radius (relative Newton distance), by every
    nonzero P_k lower the reduced degree m_n; they are not divided out.
    """
    if normalization not in NORMALIZATIONS:
        raise InputError(normalization, 'normalization must be one of %s'%(NORMALIZATIONS,))
    mp = context.mp
    if match_radius is None:
        match_radius = mp.sqrt(context.zero_tolerance)
    Q = Polynomial(q, context)
    if Q.is_zero:
        raise DegenerateSolutionError('n=%d'%n, 'the denominator is numerically zero')
    P = [Polynomial(p, context) for p in p_vectors]
    lam = min([valuation_at_zero(Q)] + [valuation_at_zero(p) for p in P if not p.is_zero])
    Q = Q.strip_origin(lam)
    P = [p.strip_origin(lam) for p in P]
    lead = Q.leading
    if normalization == 'l1':
        lead = coefficient_norm(Q, '1')*lead/mp.fabs(lead)
    Q = Q/lead
    P = [p/lead for p in P]

    zeros = roots(Q) if Q.degree >= 1 else []
    live = [p for p in P if not p.is_zero]
    common = 0
    reduced = []
    for r in distinct_roots(zeros):
        shared = min([_zero_order(p, r.value, r.multiplicity, match_radius) for p in live],
                     default=r.multiplicity)
        common += shared
        left = r.multiplicity - shared
        reduced.extend([Root(r.value, left)]*left)
    m_n = Q.degree - common
    total = sum(m)
    # deg p reduced = deg P - common, so n - m*_k - lambda - deg p = n - m*_k - deg P + common - lambda
    tau = total - lam - m_n
    for p, ms in zip(P, m_star):
        if not p.is_zero:
            tau = min(tau, n - ms - lam - (p.degree - common))
    return ApproximantRecord(n=n, m=tuple(m), Q=Q, P=tuple(P), null_dimension=null_dimension,
                             lambda_n=lam, m_n=m_n, tau_n=tau, m_star=tuple(m_star), kind=kind,
                             zeros=tuple(zeros), reduced_zeros=tuple(reduced),
                             conditioning=conditioning, normalization=normalization)


def _warn_non_unique(record):
    if not record.unique:
        warnings.warn('n=%d: solution space of dimension %d, the record is not unique'%(record.n, record.null_dimension))


#**********
#SOLVERS
#**********
def hermite_pade(system, n, m=None, normalization='monic', match_radius=None, kind=HERMITE_PADE):
    """
    (n, m) Hermite-Pade approximant.

    Parameters
    ----------
    system : `~pademiner.series.SystemModel` or list of series/models
        Coefficients come from the structural models when available.

    n : int
        Row index, n >= max m_k.

    m : tuple of int, optional
        Multi-index, required for lists of series.

    Returns
    -------
    `ApproximantRecord`; null_dimension > 1 flags a non-unique solution.
    """
    getters, m, context = resolve_sources(system, m)
    if isinstance(n, bool) or int(n) != n or n < max(m):
        raise InputError(n, 'n must be an integer >= max m_k = %d'%max(m))
    tables = coefficient_tables(getters, n)
    q, dim, cond = solve_denominator(tables, n, m, sum(m)+1, context)
    p = numerator_vectors(q, tables, n, m)
    record = assemble_record(kind, n, m, m, q, p, dim, cond, context,
                             normalization=normalization, match_radius=match_radius)
    _warn_non_unique(record)
    return record


def pade(series, n, m, normalization='monic', match_radius=None):
    """Pade approximant [n-m/m] of one series; m = 0 gives Q = 1 and the Taylor section."""
    if isinstance(series, (list, tuple)):
        if len(series) != 1:
            raise InputError('series', 'pade takes exactly one series')
        series = series[0]
    return hermite_pade([series], n, (m,), normalization=normalization,
                        match_radius=match_radius, kind=PADE)


def incomplete_pade(series, n, m, m_star, selection=MINIMAL_NORM, normalization='monic', match_radius=None):
    """
    Incomplete Pade approximant of type (n, m, m_star).

    q has degree <= m, p degree <= n - m_star and q f - p vanishes to order
    n + 1, which leaves m + 1 - m_star degrees of freedom. selection is
    'minimal_norm' (smallest singular direction of the m_star equations)
    or `FromHermitePade`, which reuses (P_k, Q) of a system whose |m| and
    m_k equal m and m_star.
    """
    for name, value in (('n', n), ('m', m), ('m_star', m_star)):
        if isinstance(value, bool) or int(value) != value:
            raise InputError(value, '%s must be an integer'%name)
    if not n >= m >= m_star >= 1:
        raise InputError((n, m, m_star), 'need n >= m >= m_star >= 1')
    if isinstance(selection, FromHermitePade):
        system = selection.system
        k = selection.component
        if not 0 <= k < system.d:
            raise InputError(k, 'component index out of range')
        if system.total != m or system.m[k] != m_star:
            raise InputError((m, m_star), 'type must be (n, |m|, m_k) = (n, %d, %d)'%(system.total, system.m[k]))
        if isinstance(series, MeromorphicModel) and series is not system.components[k]:
            raise InputError('series', 'series is not component %d of the system'%k)
        getters, mm, context = resolve_sources(system)
        if n < max(mm):
            raise InputError(n, 'n must be >= max m_k = %d'%max(mm))
        tables = coefficient_tables(getters, n)
        q, dim, cond = solve_denominator(tables, n, mm, m+1, context)
        p = numerator_vectors(q, tables[k:k+1], n, (m_star,))
    elif selection == MINIMAL_NORM:
        getters, mm, context = resolve_sources([series], (m,))
        tables = coefficient_tables(getters, n)
        q, dim, cond = solve_denominator(tables, n, (m_star,), m+1, context)
        p = numerator_vectors(q, tables, n, (m_star,))
    else:
        raise InputError(selection, "selection must be 'minimal_norm' or FromHermitePade")
    record = assemble_record(INCOMPLETE_PADE, n, (m,), (m_star,), q, p, dim, cond, context,
                             normalization=normalization, match_radius=match_radius)
    if selection == MINIMAL_NORM and m == m_star:
        _warn_non_unique(record)
    return record


def normalize_l1(record):
    """
    Coefficients of the denominator scaled so that their moduli sum to 1.

    Accepts a record (z**lambda_n Q is used) or a polynomial; the phase is
    fixed by making the leading coefficient real and positive, so any
    nonzero rescaling of the input gives the same output.
    """
    if isinstance(record, ApproximantRecord):
        Q = record.Q.shift(record.lambda_n)
        total = record.total
    else:
        Q = record
        total = Q.degree
    if Q.is_zero:
        raise InputError('Q', 'the zero polynomial cannot be normalized')
    mp = Q.context.mp
    lead = Q.leading
    c = coefficient_norm(Q, '1')*lead/mp.fabs(lead)
    coeffs = tuple(x/c for x in Q.coefficients)
    leading = coeffs[total] if total < len(coeffs) else mp.mpc(0)
    return NormalizedDenominator(coeffs, leading, total)


#************
#DIAGNOSTICS
#************
def _first_of_tail(ns, ok):
    """Smallest n such that ok holds for every later entry, None when the last fails."""
    start = None
    for n, good in zip(reversed(ns), reversed(ok)):
        if not good:
            break
        start = n
    return start


def defect_diagnostics(records, min_tail=None):
    """
    Zero sets, S and G of a row of records with consecutive n.

    S (resp. G) is the largest infimum (smallest supremum) of the zero
    moduli over the trailing suffixes holding at least min_tail records
    (DEFAULTS to half of them); records with m_n = 0 contribute no zeros.
    For Hermite-Pade records m is |m| and m_star is min m_k.
    """
    if not records:
        raise InputError('records', 'empty record list')
    records = sorted(records, key=lambda r: r.n)
    first = records[0]
    for r in records[1:]:
        if r.m != first.m or r.m_star != first.m_star or r.kind != first.kind:
            raise InputError('n=%d'%r.n, 'records mix different (m, m_star)')
    ns = [r.n for r in records]
    if ns != list(range(ns[0], ns[0]+len(ns))):
        raise InputError('records', 'n values must be consecutive')
    mp = first.context.mp
    m = first.total
    m_star = min(first.m_star)
    if min_tail is None:
        min_tail = max(1, len(records)//2)
    min_tail = max(1, min(min_tail, len(records)))

    S = G = None
    for start in range(0, len(records)-min_tail+1):
        mods = [mp.fabs(z.value) for r in records[start:] if r.m_n >= 1 for z in r.reduced_zeros]
        if not mods:
            continue
        low, high = min(mods), max(mods)
        S = low if S is None or low > S else S
        G = high if G is None or high < G else G

    pairs = list(zip(records[:-1], records[1:]))
    pair_ns = [b.n for a, b in pairs]
    lam_ok = [abs(b.lambda_n - a.lambda_n) <= m_star - 1 for a, b in pairs]
    tot_ok = [abs((b.m_n + b.lambda_n + b.tau_n) - (a.m_n + a.lambda_n + a.tau_n)) <= m_star - 1 for a, b in pairs]
    suf_ok = [min(a.m_n + a.tau_n, b.m_n + b.tau_n) >= m - m_star + 1 for a, b in pairs]
    if not pairs:
        lam_from = tot_ok_from = ns[0]
        suf_from = ns[0] if first.m_n + first.tau_n >= m - m_star + 1 else None
    else:
        lam_from = _first_of_tail(pair_ns, lam_ok)
        tot_ok_from = _first_of_tail(pair_ns, tot_ok)
        suf_from = _first_of_tail(pair_ns, suf_ok)
    if suf_from is not None:
        # the sufficient condition implies both step conditions
        lam_from = suf_from if lam_from is None else min(lam_from, suf_from)
        tot_ok_from = suf_from if tot_ok_from is None else min(tot_ok_from, suf_from)
    has_degree = any(r.m_n >= 1 for r in records[len(records)-min_tail:])
    positive = lam_from is not None and S is not None and S > 0
    finite = tot_ok_from is not None and G is not None and not mp.isinf(G) and has_degree
    return ZeroSetDiagnostics(
        zero_sets={r.n: list(r.reduced_zeros) for r in records}, S=S, G=G,
        indices=tuple((r.n, r.lambda_n, r.m_n, r.tau_n) for r in records),
        m=m, m_star=m_star, lambda_steps_from=lam_from, total_steps_from=tot_ok_from,
        sufficient_condition_from=suf_from, positive_radius_hypotheses=positive,
        finite_radius_hypotheses=finite)


#*************
#SERIALIZATION
#*************
def _roots_json(context, zeros):
    return [{'re': context.to_str(z.value.real), 'im': context.to_str(z.value.imag),
             'multiplicity': z.multiplicity} for z in distinct_roots(list(zeros))]


def record_to_json(record):
    context = record.context
    return {
        'kind': record.kind,
        'n': record.n,
        'm': list(record.m),
        'm_star': list(record.m_star),
        'normalization': record.normalization,
        'Q': record.Q.to_pairs(),
        'P': [p.to_pairs() for p in record.P],
        'null_dimension': record.null_dimension,
        'unique': record.unique,
        'lambda_n': record.lambda_n,
        'm_n': record.m_n,
        'tau_n': record.tau_n,
        'zeros': _roots_json(context, record.zeros),
        'reduced_zeros': _roots_json(context, record.reduced_zeros),
        'conditioning': context.to_str(record.conditioning),
    }


def record_to_csv_row(record):
    """Row matching CSV_COLUMNS; Q coefficients as a JSON list of [re, im] strings."""
    return [record.n, record.Q.degree, record.lambda_n, record.m_n, record.tau_n,
            record.null_dimension, json.dumps(record.Q.to_pairs())]


def diagnostics_to_json(diag, context):
    def opt(x):
        return None if x is None else context.to_str(x)
    return {
        'S': opt(diag.S),
        'G': opt(diag.G),
        'm': diag.m,
        'm_star': diag.m_star,
        'indices': [{'n': n, 'lambda_n': lam, 'm_n': mn, 'tau_n': tau} for n, lam, mn, tau in diag.indices],
        'lambda_steps_from': diag.lambda_steps_from,
        'total_steps_from': diag.total_steps_from,
        'sufficient_condition_from': diag.sufficient_condition_from,
        'positive_radius_hypotheses': diag.positive_radius_hypotheses,
        'finite_radius_hypotheses': diag.finite_radius_hypotheses,
    }
