"""
Row sweeps and what is read from them: geometric rates of denominators,
derivatives and approximation errors, zero clusters, and the empirical
checks of the direct and inverse statements.
"""
import json
import warnings
from collections import namedtuple
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np
import mpmath
from scipy.optimize import linear_sum_assignment
from sklearn.cluster import AgglomerativeClustering

from . import constants as pmc
from .numerics import PrecisionContext, Polynomial, coefficient_norm, roots
from .series import (SystemModel, radius_R0, disk_radii_Rm, gonchar_condition,
                     poles_in_disk, radius_after_division)
from .approximants import (HERMITE_PADE, PADE, resolve_sources, coefficient_tables,
                           solve_denominator, numerator_vectors, assemble_record,
                           defect_diagnostics, diagnostics_to_json, normalize_l1,
                           record_to_csv_row, CSV_COLUMNS)
from .system_poles import enumerate_system_poles, star_radii
from .tools.fit_rate import log_values, fit_loglinear, nth_root_max
from .tools.utils import (FrontendUtils, InputError, ComputationError, EvaluationError,
                          NoiseFloorError, annotate)

_progress_bar = FrontendUtils._progress_bar

SWEEP_CSV_COLUMNS = CSV_COLUMNS[:-1] + ('norm', 'noise_floor', 'zeros')
REFERENCES = ('system_poles', 'final')

DerivativeRates = namedtuple('DerivativeRates', ['rate', 'per_order'])
DichotomyCheck = namedtuple('DichotomyCheck', ['k', 'exact_poles', 'R0_after_division', 'R_m', 'holds'])


@dataclass(frozen=True)
class SweepResult:
    """
    Records for n = n_min..n_max with the distances to a reference
    denominator and the requested derivative values.

    derivatives maps (point index, j) to the tuple of Q_n^(j)(points[i]).
    """
    records: tuple
    m: tuple
    context: PrecisionContext
    floors: tuple
    norms: tuple = None
    reference: Polynomial = None
    reference_source: str = None
    norm_kind: str = 'inf'
    points: tuple = ()
    derivatives: dict = field(default_factory=dict)
    system: object = None

    @property
    def ns(self):
        return [r.n for r in self.records]


@dataclass(frozen=True)
class RateEstimate:
    """
    fitted_rate is exp of the regression slope of log|value| against n,
    limsup the window maximum of |value|**(1/n). excluded lists the n
    censored at the noise floor.
    """
    fitted_rate: float
    window: tuple
    residual: float
    method: str
    limsup: float = 0.0
    stderr: float = 0.0
    used: tuple = ()
    excluded: tuple = ()
    predicted: float = None


@dataclass(frozen=True)
class PoleEstimateCluster:
    center: object
    multiplicity: int
    members: dict
    drift: object


@dataclass(frozen=True)
class InverseReport:
    diagnostics: object
    diagnosis: str
    R0_truth: object = None
    consistent: bool = None
    branch: str = None
    containment: bool = None
    limit_degree_ok: bool = None
    limit_nonzero_at_origin: bool = None


#******
#SWEEP
#******
def noise_floor(bits, n, conditioning=1):
    """2**-bits * NOISE_GUARD * n * max(conditioning, 1): smallest value a fit trusts."""
    return mpmath.ldexp(1, -bits)*pmc.NOISE_GUARD*max(n, 1)*max(mpmath.mpf(conditioning), 1)


def _solve_payload(payload):
    bits, tol, raw_tables, n, m_star, ncols = payload
    context = PrecisionContext(bits, tol)
    try:
        tables = [[context.from_raw(x) for x in t] for t in raw_tables]
        q, dim, cond = solve_denominator(tables, n, m_star, ncols, context)
        p = numerator_vectors(q, tables, n, m_star)
    except (InputError, ComputationError) as err:
        raise annotate(err, n)
    return ([context.raw(x) for x in q], [[context.raw(x) for x in pk] for pk in p],
            dim, context.raw(cond))


def _full_denominator(record):
    return record.Q.shift(record.lambda_n)


def _distance(record, reference, kind):
    Q = _full_denominator(record)
    if record.normalization == 'l1':
        a = Polynomial(normalize_l1(Q).lambda_coeffs, Q.context)
        b = Polynomial(normalize_l1(reference).lambda_coeffs, Q.context)
        return a.distance(b, kind)
    return reference.distance(Q, kind)


def sweep(system, n_min, n_max, m=None, normalization='monic', reference='system_poles',
          derivative_points=(), derivative_orders=0, norm='inf', jobs=1, verbose=False,
          match_radius=None):
    """
    Hermite-Pade records along the row n = n_min..n_max.

    Parameters
    ----------
    reference : {'system_poles', 'final'} or `~pademiner.numerics.Polynomial` or None
        Limit the norms are measured against: Q_limit of the enumerated
        system poles, the (z**lambda_n) Q of the last record, or a given
        polynomial. None skips the norms.

    derivative_points, derivative_orders :
        Q_n^(j)(xi) is stored for every point xi and j <= derivative_orders.

    jobs : int
        Worker processes for the solves; the reductions run here.
    """
    getters, m, context = resolve_sources(system, m)
    for name, value in (('n_min', n_min), ('n_max', n_max), ('jobs', jobs)):
        if isinstance(value, bool) or int(value) != value:
            raise InputError(value, '%s must be an integer'%name)
    if n_min < max(m):
        raise InputError(n_min, 'n_min must be >= max m_k = %d'%max(m))
    if n_max < n_min:
        raise InputError((n_min, n_max), 'empty n range')
    if jobs < 1:
        raise InputError(jobs, 'jobs must be >= 1')
    ns = list(range(n_min, n_max+1))
    kind = HERMITE_PADE if len(m) > 1 else PADE
    ncols = sum(m) + 1
    tables = coefficient_tables(getters, n_max)

    if verbose:
        print('Computing %d approximants of type m=%s, n=%d..%d ...'%(len(ns), m, n_min, n_max))
    raw = []
    if jobs > 1:
        bits, tol = context.significand_bits, context.to_str(context.zero_tolerance)
        payloads = [(bits, tol, [[context.raw(x) for x in t[:n+1]] for t in tables], n, m, ncols) for n in ns]
        with Pool(processes=jobs) as pool:
            for i, out in enumerate(pool.imap(_solve_payload, payloads)):
                q, p, dim, cond = out
                raw.append(([context.from_raw(x) for x in q],
                            [[context.from_raw(x) for x in pk] for pk in p],
                            dim, context.from_raw(cond).real))
                if verbose:
                    _progress_bar(int(100*(i+1)/len(ns)))
    else:
        for i, n in enumerate(ns):
            try:
                q, dim, cond = solve_denominator(tables, n, m, ncols, context)
                p = numerator_vectors(q, tables, n, m)
            except (InputError, ComputationError) as err:
                raise annotate(err, n)
            raw.append((q, p, dim, cond))
            if verbose:
                _progress_bar(int(100*(i+1)/len(ns)))
    if verbose:
        print()

    records = []
    for n, (q, p, dim, cond) in zip(ns, raw):
        try:
            records.append(assemble_record(kind, n, m, m, q, p, dim, cond, context,
                                           normalization=normalization, match_radius=match_radius))
        except (InputError, ComputationError) as err:
            raise annotate(err, n)
    non_unique = [r.n for r in records if not r.unique]
    if non_unique:
        warnings.warn('%d of %d records are not unique (first n=%d)'%(len(non_unique), len(records), non_unique[0]))

    source = None
    if isinstance(reference, Polynomial):
        ref, source = reference.monic(), 'user'
    elif reference == 'system_poles':
        ref = None
        if isinstance(system, SystemModel):
            pole_set = enumerate_system_poles(system)
            if pole_set.complete:
                ref, source = pole_set.Q_limit, 'system_poles'
            else:
                warnings.warn('system pole set is incomplete, no reference denominator')
        else:
            warnings.warn('system poles need a SystemModel, no reference denominator')
    elif reference == 'final':
        ref, source = _full_denominator(records[-1]), 'final'
    elif reference is None:
        ref = None
    else:
        raise InputError(reference, "reference must be 'system_poles', 'final', a Polynomial or None")

    norms = tuple(_distance(r, ref, norm) for r in records) if ref is not None else None
    floors = tuple(noise_floor(context.significand_bits, r.n, r.conditioning) for r in records)
    points = tuple(context.mpc(x) for x in derivative_points)
    derivatives = {}
    for i, xi in enumerate(points):
        for j in range(derivative_orders+1):
            derivatives[(i, j)] = tuple(_full_denominator(r).derivative(j)(xi) for r in records)
    return SweepResult(tuple(records), m, context, floors, norms, ref, source, norm,
                       points, derivatives, system)


#*****
#RATES
#*****
def fit_geometric_rate(ns, values, window=None, noise_floor=None, min_points=pmc.MIN_FIT_POINTS,
                       allow_floor=False, predicted=None):
    """
    Geometric rate of a sequence of positive values.

    Parameters
    ----------
    ns, values : sequences
        Indices and values; None or zero values are censored.

    window : (n_lo, n_hi), optional
        Closed range of n used. DEFAULTS to the whole sequence.

    noise_floor : real or sequence, optional
        Values at or below it (per n when a sequence) are censored.

    allow_floor : bool
        Return a 'noise_floor' estimate of rate 0 instead of raising when
        censoring leaves fewer than min_points values.
    """
    ns = list(ns)
    values = list(values)
    if len(ns) != len(values):
        raise InputError('values', 'ns and values differ in length')
    if not ns:
        raise InputError('values', 'empty sequence')
    lo, hi = window if window is not None else (min(ns), max(ns))
    if lo > hi or lo < min(ns) or hi > max(ns):
        raise InputError(window, 'window must lie within n = %d..%d'%(min(ns), max(ns)))
    if noise_floor is None:
        floors = [0]*len(ns)
    elif isinstance(noise_floor, (list, tuple, np.ndarray)):
        floors = list(noise_floor)
    else:
        floors = [noise_floor]*len(ns)

    used, kept, excluded = [], [], []
    for n, v, fl in zip(ns, values, floors):
        if not lo <= n <= hi:
            continue
        if v is None or abs(v) == 0 or abs(v) <= fl:
            excluded.append(n)
        else:
            used.append(n)
            kept.append(abs(v))
    if len(used) < min_points:
        if excluded and allow_floor:
            return RateEstimate(0.0, (lo, hi), 0.0, 'noise_floor', used=tuple(used),
                                excluded=tuple(excluded), predicted=predicted)
        if excluded:
            raise NoiseFloorError('window %d..%d'%(lo, hi), '%d of %d values at the noise floor, %d usable (need %d)'
                                  %(len(excluded), len(excluded)+len(used), len(used), min_points))
        raise InputError('window %d..%d'%(lo, hi), 'need at least %d values, got %d'%(min_points, len(used)))
    logs = log_values(kept)
    rate, stderr, residual = fit_loglinear(used, logs)
    return RateEstimate(rate, (lo, hi), residual, 'regression', limsup=nth_root_max(used, logs),
                        stderr=stderr, used=tuple(used), excluded=tuple(excluded), predicted=predicted)


def denominator_rate(result, window=None, min_points=pmc.MIN_FIT_POINTS, allow_floor=False, predicted=None):
    """Rate of the norms ||Q_limit - Q_n|| of a sweep."""
    if result.norms is None:
        raise InputError('sweep', 'the sweep has no reference denominator')
    scale = max(1, coefficient_norm(result.reference))
    floors = [f*scale for f in result.floors]
    return fit_geometric_rate(result.ns, result.norms, window=window, noise_floor=floors,
                              min_points=min_points, allow_floor=allow_floor, predicted=predicted)


def derivative_rates(result, xi, up_to_order=0, window=None, min_points=pmc.MIN_FIT_POINTS,
                     allow_floor=False, predicted=None):
    """
    Rates of |Q_n^(j)(xi)| for j = 0..up_to_order and their maximum.

    Q_n is the monic Hermite-Pade denominator z**lambda_n Q of each record.
    """
    context = result.context
    xi = context.mpc(xi)
    if xi == 0:
        raise InputError(xi, 'xi must be nonzero')
    if isinstance(up_to_order, bool) or int(up_to_order) != up_to_order or up_to_order < 0:
        raise InputError(up_to_order, 'up_to_order must be a nonnegative integer')
    per = []
    for j in range(up_to_order+1):
        values, floors = [], []
        for r, fl in zip(result.records, result.floors):
            d = _full_denominator(r).derivative(j)
            values.append(d(xi))
            floors.append(fl*max(1, d.abs_bound(xi)))
        per.append(fit_geometric_rate(result.ns, values, window=window, noise_floor=floors,
                                      min_points=min_points, allow_floor=allow_floor, predicted=predicted))
    return DerivativeRates(max(est.fitted_rate for est in per), per)


def convergence_on_circle(result, system, k, radius, samples=pmc.DEFAULT_SAMPLES, window=None,
                          margin=pmc.CIRCLE_MARGIN, pole_set=None, min_points=pmc.MIN_FIT_POINTS,
                          allow_floor=False, verbose=False):
    """
    Rate of sup |f_k - P_k/Q| over samples points of |z| = radius.

    The circle must stay margin away from the system poles and the poles
    of f_k, and inside the disk of radius R*_{|m|,k}; the prediction
    radius/R*_{|m|,k} is attached to the estimate. Only records inside
    window are evaluated.
    """
    context = system.context
    mp = context.mp
    r = context.parse_real(radius)
    if not r > 0:
        raise InputError(radius, 'radius must be positive')
    if samples < pmc.MIN_SAMPLES:
        raise InputError(samples, 'at least %d samples are required'%pmc.MIN_SAMPLES)
    if not 0 <= k < system.d:
        raise InputError(k, 'component index out of range')
    if pole_set is None:
        pole_set = enumerate_system_poles(system)
    f = system.components[k]
    for xi in [rep.xi for rep in pole_set.reports] + [loc for loc, order in f.poles()]:
        if mp.fabs(mp.fabs(xi) - r) <= margin:
            raise InputError(radius, 'the circle passes within %g of the pole %s'%(margin, context.to_pair(xi)))
    R, R_star = star_radii(system, pole_set, k)
    if not r < R_star:
        raise InputError(radius, 'radius must be below R* = %s'%context.to_str(R_star))
    predicted = 0.0 if mp.isinf(R_star) else float(r/R_star)

    lo, hi = window if window is not None else (result.ns[0], result.ns[-1])
    points = context.circle_points(r, samples)
    f_values = [f.evaluate(z) for z in points]
    f_scale = max(mp.fabs(v) for v in f_values)
    ns, values, floors = [], [], []
    chosen = [(rec, fl) for rec, fl in zip(result.records, result.floors) if lo <= rec.n <= hi]
    for i, (rec, fl) in enumerate(chosen):
        Q, P = rec.Q, rec.P[k if len(rec.P) > 1 else 0]
        worst = mp.mpf(0)
        for z, fz in zip(points, f_values):
            qz = Q(z)
            if qz == 0:
                raise EvaluationError(context.to_pair(z), 'n=%d: denominator vanishes on the circle'%rec.n)
            worst = max(worst, mp.fabs(fz - P(z)/qz))
        ns.append(rec.n)
        values.append(worst)
        floors.append(fl*max(1, f_scale))
        if verbose:
            _progress_bar(int(100*(i+1)/len(chosen)))
    if verbose:
        print()
    if not ns:
        raise InputError(window, 'no record inside the window')
    return fit_geometric_rate(ns, values, window=(ns[0], ns[-1]), noise_floor=floors,
                              min_points=min_points, allow_floor=allow_floor, predicted=predicted)


#********
#CLUSTERS
#********
def _to_xy(values):
    return np.array([[float(v.real), float(v.imag)] for v in values], dtype=float)


def cluster_zeros(result, trailing_window=pmc.TRAILING_WINDOW, merge_radius=pmc.MERGE_RADIUS):
    """
    Stable zeros of the denominators over the last trailing_window records.

    Zeros of consecutive records are matched by a minimal total distance
    assignment into tracks; track centers closer than merge_radius
    (relative) form one cluster whose multiplicity is its number of
    tracks. Records whose degree differs from the final one are skipped.
    """
    context = result.context
    mp = context.mp
    window = list(result.records[-trailing_window:])
    if not window:
        return []
    degree = len(window[-1].zeros)
    window = [r for r in window if len(r.zeros) == degree]
    if degree == 0 or not window:
        return []

    tracks = [[(window[0].n, z.value)] for z in window[0].zeros]
    for rec in window[1:]:
        last = _to_xy([t[-1][1] for t in tracks])
        new = _to_xy([z.value for z in rec.zeros])
        cost = np.linalg.norm(last[:, None, :] - new[None, :, :], axis=-1)
        rows, cols = linear_sum_assignment(cost)
        for i, j in zip(rows, cols):
            tracks[i].append((rec.n, rec.zeros[j].value))

    centers, drifts = [], []
    for t in tracks:
        c = mp.fsum([v for n, v in t])/len(t)
        centers.append(c)
        drifts.append(max(mp.fabs(v - c) for n, v in t))

    if len(tracks) == 1:
        labels = [0]
    else:
        scale = max(1.0, max(float(mp.fabs(c)) for c in centers))
        model = AgglomerativeClustering(n_clusters=None, distance_threshold=merge_radius*scale,
                                        linkage='single')
        labels = list(model.fit_predict(_to_xy(centers)))

    clusters = []
    for label in sorted(set(labels)):
        idx = [i for i, l in enumerate(labels) if l == label]
        center = mp.fsum([centers[i] for i in idx])/len(idx)
        members = {}
        for i in idx:
            for n, v in tracks[i]:
                members.setdefault(n, []).append(v)
        drift = max(max(drifts[i], mp.fabs(centers[i] - center)) for i in idx)
        clusters.append(PoleEstimateCluster(center, len(idx), {n: tuple(v) for n, v in members.items()}, drift))
    clusters.sort(key=lambda c: (float(mp.fabs(c.center)), float(mp.arg(c.center)) if c.center != 0 else 0.0))
    return clusters


#***************
#INVERSE CHECKS
#***************
def component_dichotomy(system, limit, match_radius=pmc.LIMIT_MATCH_RADIUS):
    """
    For each k: f_k has exactly m_k poles in D_{m_k}(f_k), or
    R_0(limit f_k) > R_{m_k}(f_k).
    """
    zeros = roots(limit) if limit.degree >= 1 else []
    out = []
    for k, (f, mk) in enumerate(zip(system.components, system.m)):
        exact = gonchar_condition(f, mk)
        after = radius_after_division(f, zeros, match_radius)
        R_m = disk_radii_Rm(f, mk)
        out.append(DichotomyCheck(k, exact, after, R_m, exact or after > R_m))
    return out


def _contains_poles(limit, model, m_star, match_radius):
    """Zeros of limit contain the poles of model in D_{m_star}, with multiplicity."""
    context = model.context
    mp = context.mp
    zeros = roots(limit) if limit.degree >= 1 else []
    for loc, order in poles_in_disk(model, disk_radii_Rm(model, m_star)):
        hits = sum(1 for z in zeros if mp.fabs(z.value - loc) <= match_radius*max(1, mp.fabs(loc)))
        if hits < order:
            return False
    return True


def inverse_diagnosis(source, model=None, limit=None, theta=None, min_tail=None,
                      match_radius=pmc.LIMIT_MATCH_RADIUS):
    """
    What the zeros of a row say about the radius of convergence, checked
    against the structural model when one is given.

    Parameters
    ----------
    source : `SweepResult` or list of `~pademiner.approximants.ApproximantRecord`

    model : `~pademiner.series.MeromorphicModel`, optional
        Ground truth for the scalar series.

    limit : `~pademiner.numerics.Polynomial`, optional
        Limit denominator; with theta < 1 the dichotomy (exactly m* poles
        in D_{m*}(f) that are zeros of the limit, or R_0(limit f) >
        R_{m*}(f)) is checked on model.
    """
    records = list(source.records) if isinstance(source, SweepResult) else list(source)
    diag = defect_diagnostics(records, min_tail=min_tail)
    lower, upper = diag.positive_radius_hypotheses, diag.finite_radius_hypotheses
    if lower and upper:
        diagnosis = '0 < R_0(f) < inf'
    elif lower:
        diagnosis = 'R_0(f) > 0'
    elif upper:
        diagnosis = 'R_0(f) < inf'
    else:
        diagnosis = 'no evidence'

    report = dict(diagnostics=diag, diagnosis=diagnosis)
    if model is None:
        return InverseReport(**report)
    context = model.context
    mp = context.mp
    R0 = radius_R0(model)
    consistent = (not lower or R0 > 0) and (not upper or not mp.isinf(R0))
    report.update(R0_truth=R0, consistent=consistent)
    if limit is not None:
        m, m_star = diag.m, diag.m_star
        report['limit_degree_ok'] = limit.degree >= m - m_star + 1
        report['limit_nonzero_at_origin'] = mp.fabs(limit(0)) > context.zero_tolerance*coefficient_norm(limit)
        report['containment'] = _contains_poles(limit, model, m_star, match_radius)
        if theta is not None and theta < 1:
            zeros = roots(limit) if limit.degree >= 1 else []
            if gonchar_condition(model, m_star) and report['containment']:
                report['branch'] = 'exact_poles'
            elif radius_after_division(model, zeros, match_radius) > disk_radii_Rm(model, m_star):
                report['branch'] = 'extended_radius'
            else:
                report['branch'] = 'inconsistent'
    return InverseReport(**report)


#*************
#SERIALIZATION
#*************
def rate_to_str(x, context):
    """Decimal string of a double precision rate (17 digits); None passes through."""
    if x is None:
        return None
    x = context.mp.mpf(x)
    if context.mp.isinf(x) or context.mp.isnan(x):
        return context.to_str(x)
    return context.mp.nstr(x, 17)


def rate_to_json(est, context):
    return {
        'fitted_rate': rate_to_str(est.fitted_rate, context),
        'limsup': rate_to_str(est.limsup, context),
        'window': list(est.window),
        'residual': rate_to_str(est.residual, context),
        'stderr': rate_to_str(est.stderr, context),
        'method': est.method,
        'used': list(est.used),
        'excluded': list(est.excluded),
        'predicted': rate_to_str(est.predicted, context),
    }


def cluster_to_json(cluster, context):
    return {
        're': context.to_str(cluster.center.real),
        'im': context.to_str(cluster.center.imag),
        'multiplicity': cluster.multiplicity,
        'drift': context.to_str(cluster.drift),
        'n': sorted(cluster.members),
    }


def inverse_to_json(report, context):
    out = {'diagnosis': report.diagnosis, 'diagnostics': diagnostics_to_json(report.diagnostics, context)}
    if report.R0_truth is not None:
        out.update({'R0_truth': context.to_str(report.R0_truth), 'consistent': report.consistent,
                    'branch': report.branch, 'containment': report.containment,
                    'limit_degree_ok': report.limit_degree_ok,
                    'limit_nonzero_at_origin': report.limit_nonzero_at_origin})
    return out


def sweep_to_csv_rows(result):
    """Header and one row per n: record columns, norm, noise floor, zeros and derivative moduli."""
    context = result.context
    mp = context.mp
    header = list(SWEEP_CSV_COLUMNS)
    keys = sorted(result.derivatives)
    header += ['abs_dQ%d_at_%d'%(j, i) for i, j in keys]
    rows = [header]
    for idx, rec in enumerate(result.records):
        row = record_to_csv_row(rec)[:-1]
        row.append(context.to_str(result.norms[idx]) if result.norms is not None else '')
        row.append(mpmath.nstr(result.floors[idx], 8))
        row.append(json.dumps([context.to_pair(z.value) for z in rec.zeros]))
        row += [context.to_str(mp.fabs(result.derivatives[key][idx])) for key in keys]
        rows.append(row)
    return rows
