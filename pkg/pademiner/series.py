"""
Formal power series as black-box coefficient streams and as structural
meromorphic models.

A structural model is a finite sum of principal parts c_j/(z - xi)**j, a
polynomial, and polynomial multiples of atomic non-rational tails. The
class is closed under the operations the approximation code needs
(multiplication by z**j and linear combination), so every combination
sum p_k f_k is again a model whose poles and radii are exact.
"""
import json
import threading
from dataclasses import dataclass

from . import constants as pmc
from .numerics import Polynomial, Root
from .tools.utils import InputError, EvaluationError

LACUNARY = 'lacunary_factorial'
POWER_SERIES = 'power_series_with_radius'
POLYNOMIAL = 'polynomial'
COMPOSITE = 'composite'
TAIL_KINDS = (POLYNOMIAL, POWER_SERIES, LACUNARY)


def _is_factorial(n):
    if n < 1:
        return False
    k, f = 1, 1
    while f < n:
        k += 1
        f *= k
    return f == n


def same_point(a, b, context):
    mp = context.mp
    return mp.fabs(a - b) <= context.zero_tolerance*max(1, mp.fabs(a))


def same_modulus(r, s, context):
    """Moduli comparison at zero_tolerance; infinities only match each other."""
    mp = context.mp
    if mp.isinf(r) or mp.isinf(s):
        return mp.isinf(r) and mp.isinf(s)
    return mp.fabs(r - s) <= context.zero_tolerance*max(1, r, s)


#**************
#COEFFICIENTS
#**************
class CoefficientSeries(object):
    """
    Lazy stream of Taylor coefficients phi_0, phi_1, ...

    Parameters
    ----------
    producer : callable
        Deterministic map n -> phi_n.

    context : `~pademiner.numerics.PrecisionContext`

    available : int, optional
        Largest index the producer can serve. DEFAULTS to unbounded.

    model : `MeromorphicModel`, optional
        Structural source of the coefficients, when there is one.
    """
    def __init__(self, producer, context, available=None, model=None, label=None):
        self._producer = producer
        self._context = context
        self._available = available
        self._cache = []
        self._lock = threading.Lock()
        self.model = model
        self.label = label

    @classmethod
    def from_values(cls, values, context, label=None):
        coeffs = [context.mpc(v) for v in values]
        return cls(lambda n: coeffs[n], context, available=len(coeffs)-1, label=label)

    @property
    def context(self):
        return self._context

    @property
    def available(self):
        return self._available

    def coefficient(self, n):
        if n < 0:
            return self._context.mp.mpc(0)
        cache = self._cache
        if n < len(cache):
            return cache[n]
        if self._available is not None and n > self._available:
            raise InputError('series %s'%(self.label or ''), 'insufficient coefficients: phi_%d requested, %d available'%(n, self._available+1))
        with self._lock:
            while len(cache) <= n:
                cache.append(self._context.mpc(self._producer(len(cache))))
        return cache[n]

    def coefficients(self, up_to):
        """phi_0 .. phi_up_to."""
        self.coefficient(up_to)
        return list(self._cache[:up_to+1])


#*************
#MODEL PIECES
#*************
@dataclass(frozen=True)
class PrincipalPart:
    """sum_j coefficients[j-1]/(z - location)**j."""
    location: object
    coefficients: tuple

    @property
    def order(self):
        return len(self.coefficients)

    def taylor_coefficient(self, n, context):
        # c/(z - xi)**j = c (-1)**j binom(n+j-1, j-1) xi**(-n-j) z**n + ...
        mp = context.mp
        xi = self.location
        acc = mp.mpc(0)
        inv = 1/xi
        for j, c in enumerate(self.coefficients, start=1):
            if c == 0:
                continue
            sign = -1 if j % 2 else 1
            acc += sign*c*mp.binomial(n+j-1, j-1)*inv**(n+j)
        return acc

    def evaluate(self, z, context):
        mp = context.mp
        d = z - self.location
        if d == 0:
            raise EvaluationError(context.to_pair(z), 'evaluation at a pole')
        acc = mp.mpc(0)
        for c in reversed(self.coefficients):
            acc = (acc + c)/d
        return acc


@dataclass(frozen=True)
class TailAtom:
    """
    Non-rational entire-in-its-disk building block.

    lacunary_factorial has coefficient 1 at every index k! (k >= 1, index
    1 counted once) and radius 1; power_series_with_radius has
    coefficients radius**-n/(n+1)**exponent.
    """
    kind: str
    radius: object
    exponent: int = 0

    def key(self):
        return (self.kind, str(self.radius), self.exponent)

    def coefficient(self, n, context):
        mp = context.mp
        if n < 0:
            return mp.mpf(0)
        if self.kind == LACUNARY:
            return mp.mpf(1) if _is_factorial(n) else mp.mpf(0)
        return self.radius**(-n)/mp.mpf(n+1)**self.exponent

    def evaluate(self, z, context):
        mp = context.mp
        r = mp.fabs(z)
        if r >= self.radius:
            raise EvaluationError(context.to_pair(z), '%s evaluated outside its disk of radius %s'%(self.kind, mp.nstr(self.radius, 8)))
        eps = context.eps
        acc = mp.mpc(0)
        if self.kind == LACUNARY:
            k, f = 1, 1
            while True:
                term = z**f
                acc += term
                if mp.fabs(term) < eps:
                    return acc
                k += 1
                f *= k
        ratio = z/self.radius
        term = mp.mpc(1)
        n = 0
        while True:
            piece = term/mp.mpf(n+1)**self.exponent
            acc += piece
            if mp.fabs(piece) < eps*max(1, mp.fabs(acc)) and n > 0:
                return acc
            term *= ratio
            n += 1


def lacunary_atom(context):
    return TailAtom(LACUNARY, context.mp.mpf(1), 0)


def power_series_atom(radius, context, exponent=2):
    r = context.parse_real(radius)
    if not r > 0 or context.mp.isinf(r):
        raise InputError(radius, 'power_series_with_radius needs a positive finite radius')
    if int(exponent) != exponent or exponent < 1:
        raise InputError(exponent, 'exponent must be a positive integer')
    return TailAtom(POWER_SERIES, r, int(exponent))


@dataclass(frozen=True)
class EntireTail:
    """
    Part of a model without poles: a polynomial plus polynomial multiples
    of atomic tails. `terms` holds (atom, multiplier coefficients) pairs.
    """
    polynomial: tuple = ()
    terms: tuple = ()

    @property
    def kind(self):
        kinds = sorted(set(atom.kind for atom, mult in self.terms))
        if not kinds:
            return POLYNOMIAL
        if len(kinds) == 1:
            return kinds[0]
        return COMPOSITE

    def analyticity_radius(self, context):
        radii = [atom.radius for atom, mult in self.terms]
        return min(radii) if radii else context.inf

    def coefficient(self, n, context):
        mp = context.mp
        acc = self.polynomial[n] if n < len(self.polynomial) else mp.mpc(0)
        for atom, mult in self.terms:
            for i, p in enumerate(mult):
                if i > n:
                    break
                a = atom.coefficient(n-i, context)
                if a != 0:
                    acc += p*a
        return acc

    def evaluate(self, z, context):
        mp = context.mp
        acc = mp.mpc(0)
        for c in reversed(self.polynomial):
            acc = acc*z + c
        for atom, mult in self.terms:
            m = mp.mpc(0)
            for c in reversed(mult):
                m = m*z + c
            if m != 0:
                acc += m*atom.evaluate(z, context)
        return acc


class _Accumulator(object):
    """Sums with the running scale of their terms, for cancellation decisions."""
    def __init__(self, context):
        self.context = context
        self.value = context.mp.mpc(0)
        self.scale = context.mp.mpf(0)

    def add(self, x):
        self.value += x
        self.scale += self.context.mp.fabs(x)

    def result(self):
        mp = self.context.mp
        if mp.fabs(self.value) <= self.context.zero_tolerance*self.scale:
            return mp.mpc(0)
        return self.value


def _vector(accs):
    out = [a.result() for a in accs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


class MeromorphicModel(object):
    """
    Structural description of one function f_k.

    Parameters
    ----------
    principal_parts : list of `PrincipalPart`

    tail : `EntireTail`, optional

    context : `~pademiner.numerics.PrecisionContext`

    allow_zero : bool, optional
        Accept the identically zero function (combinations may cancel completely).
    """
    def __init__(self, principal_parts, tail=None, context=None, allow_zero=False):
        if context is None:
            raise InputError('context', 'models need a PrecisionContext')
        mp = context.mp
        parts = []
        for idx, part in enumerate(principal_parts):
            loc = context.mpc(part.location)
            coeffs = tuple(context.mpc(c) for c in part.coefficients)
            if loc == 0 or mp.fabs(loc) <= context.zero_tolerance:
                raise InputError('poles[%d]'%idx, 'pole at the origin')
            if not coeffs:
                raise InputError('poles[%d]'%idx, 'a principal part needs at least one coefficient')
            scale = max(mp.fabs(c) for c in coeffs)
            if mp.fabs(coeffs[-1]) <= context.zero_tolerance*scale or scale == 0:
                raise InputError('poles[%d]'%idx, 'leading principal coefficient vanishes')
            for other in parts:
                if same_point(other.location, loc, context):
                    raise InputError('poles[%d]'%idx, 'pole locations must be distinct')
            parts.append(PrincipalPart(loc, coeffs))
        tail = tail if tail is not None else EntireTail()
        self._parts = tuple(sorted(parts, key=lambda p: (float(mp.fabs(p.location)), float(mp.arg(p.location)))))
        self._tail = tail
        self._context = context
        if not allow_zero and self.is_zero:
            raise InputError('model', 'the model is identically zero')

    @property
    def principal_parts(self):
        return self._parts

    @property
    def tail(self):
        return self._tail

    @property
    def context(self):
        return self._context

    @property
    def is_zero(self):
        return not self._parts and not self._tail.polynomial and not self._tail.terms

    @property
    def is_rational(self):
        return not self._tail.terms

    @property
    def analyticity_radius(self):
        """Radius of the largest disk where the model is meromorphic."""
        return self._tail.analyticity_radius(self._context)

    def poles(self):
        return [(p.location, p.order) for p in self._parts]

    def principal_at(self, location):
        for p in self._parts:
            if same_point(p.location, location, self._context):
                return p
        return None

    def pole_layers(self):
        """(modulus, total order, locations) for each distinct pole modulus, ascending."""
        mp = self._context.mp
        layers = []
        for p in self._parts:
            r = mp.fabs(p.location)
            if layers and same_modulus(layers[-1][0], r, self._context):
                layers[-1][1] += p.order
                layers[-1][2].append(p.location)
            else:
                layers.append([r, p.order, [p.location]])
        return [tuple(l) for l in layers]

    def taylor_coefficient(self, n):
        acc = self._tail.coefficient(n, self._context)
        for p in self._parts:
            acc += p.taylor_coefficient(n, self._context)
        return acc

    def evaluate(self, z):
        z = self._context.mpc(z)
        acc = self._tail.evaluate(z, self._context)
        for p in self._parts:
            acc += p.evaluate(z, self._context)
        return acc

    __call__ = evaluate

    def multiply_by_monomial(self, j):
        """Exact model of z**j times self."""
        return linear_combination([self], [Polynomial.monomial(j, self._context)], self._context)

    def __repr__(self):
        return 'MeromorphicModel(poles=%d, tail=%s)'%(len(self._parts), self._tail.kind)


def linear_combination(models, weights, context, allow_zero=True):
    """
    Exact model of sum_k weights[k]*models[k].

    Weights are scalars or `~pademiner.numerics.Polynomial`. Output
    coefficients whose modulus falls to zero_tolerance times the scale of
    their contributions are set to zero, so cancelled poles and tails
    disappear from the result.
    """
    mp = context.mp
    poles = []       # [(location, [accumulators by order])]
    poly = []
    atoms = {}       # key -> (atom, [accumulators])

    def grow(accs, size):
        while len(accs) < size:
            accs.append(_Accumulator(context))

    def pole_slot(location):
        for loc, accs in poles:
            if same_point(loc, location, context):
                return accs
        accs = []
        poles.append((location, accs))
        return accs

    for model, weight in zip(models, weights):
        if not isinstance(weight, Polynomial):
            weight = Polynomial([weight], context)
        for i, w in enumerate(weight.coefficients):
            if w == 0:
                continue
            # z**i c_l/(z - xi)**l = sum_r binom(i, r) xi**(i-r) c_l (z - xi)**(r-l)
            for part in model.principal_parts:
                xi = part.location
                accs = pole_slot(xi)
                for l, c in enumerate(part.coefficients, start=1):
                    if c == 0:
                        continue
                    for r in range(i+1):
                        factor = w*c*mp.binomial(i, r)*xi**(i-r)
                        if r < l:
                            grow(accs, l-r)
                            accs[l-r-1].add(factor)
                        else:
                            e = r - l
                            grow(poly, e+1)
                            for t in range(e+1):
                                poly[t].add(factor*mp.binomial(e, t)*(-xi)**(e-t))
            grow(poly, len(model.tail.polynomial) + i)
            for t, c in enumerate(model.tail.polynomial):
                poly[t+i].add(w*c)
            for atom, mult in model.tail.terms:
                slot = atoms.setdefault(atom.key(), (atom, []))[1]
                grow(slot, len(mult) + i)
                for t, c in enumerate(mult):
                    slot[t+i].add(w*c)

    parts = []
    for loc, accs in poles:
        coeffs = _vector(accs)
        if coeffs:
            parts.append(PrincipalPart(loc, coeffs))
    terms = []
    for key in sorted(atoms):
        atom, accs = atoms[key]
        mult = _vector(accs)
        if mult:
            terms.append((atom, mult))
    tail = EntireTail(_vector(poly), tuple(terms))
    return MeromorphicModel(parts, tail, context, allow_zero=allow_zero)


def rational_model(poles, context, polynomial=()):
    """Model from a list of (location, [c_1, ..., c_tau]) pairs and an optional polynomial."""
    parts = [PrincipalPart(context.mpc(loc), tuple(context.mpc(c) for c in coeffs)) for loc, coeffs in poles]
    tail = EntireTail(tuple(context.mpc(c) for c in polynomial), ())
    return MeromorphicModel(parts, tail, context)


class SystemModel(object):
    """
    System f = (f_1, ..., f_d) with multi-index m = (m_1, ..., m_d).

    `origin` records, for each component, the (k, j) pair it was built from
    as z**j f_k; it is the identity for systems that are not associated systems.
    """
    def __init__(self, components, m, origin=None):
        components = tuple(components)
        if len(components) < 1:
            raise InputError('components', 'a system needs at least one component')
        m = tuple(m)
        if len(m) != len(components):
            raise InputError('m', 'multi-index length %d does not match %d components'%(len(m), len(components)))
        for k, mk in enumerate(m):
            if isinstance(mk, bool) or int(mk) != mk or mk < 1:
                raise InputError('m[%d]'%k, 'multi-index entries must be positive integers')
        context = components[0].context
        for f in components:
            if f.context != context:
                raise InputError('components', 'all components must share one PrecisionContext')
        self._components = components
        self._m = tuple(int(mk) for mk in m)
        self._origin = tuple(origin) if origin is not None else tuple((k, 0) for k in range(len(components)))

    @property
    def components(self):
        return self._components

    @property
    def m(self):
        return self._m

    @property
    def d(self):
        return len(self._components)

    @property
    def total(self):
        """|m|."""
        return sum(self._m)

    @property
    def origin(self):
        return self._origin

    @property
    def context(self):
        return self._components[0].context

    def series(self):
        return [taylor_coefficients(f, 0) for f in self._components]

    def __repr__(self):
        return 'SystemModel(d=%d, m=%s)'%(self.d, self._m)


#***********
#OPERATIONS
#***********
def taylor_coefficients(model, up_to):
    """CoefficientSeries of model with phi_0..phi_up_to already computed."""
    series = CoefficientSeries(model.taylor_coefficient, model.context, model=model)
    if up_to >= 0:
        series.coefficients(up_to)
    return series


def radius_R0(source, window=pmc.DEFAULT_WINDOW, horizon=None):
    """
    Radius of convergence.

    Exact for a `MeromorphicModel` (smallest pole modulus against the tail
    radius), also for a `CoefficientSeries` backed by a model. Otherwise
    1/max |phi_n|**(1/n) over the `window` indices ending at `horizon`
    (DEFAULTS to the last available index, or 4*window for unbounded streams).
    """
    if isinstance(source, MeromorphicModel):
        context = source.context
        radius = source.analyticity_radius
        layers = source.pole_layers()
        if layers and layers[0][0] < radius:
            return layers[0][0]
        return radius
    if getattr(source, 'model', None) is not None:
        return radius_R0(source.model)
    context = source.context
    mp = context.mp
    if window < 8:
        raise InputError(window, 'window must hold at least 8 coefficients')
    if horizon is None:
        horizon = source.available if source.available is not None else 4*window
    if horizon < window:
        raise InputError(horizon, 'at least %d coefficients are needed'%window)
    best = mp.mpf(0)
    for n in range(max(1, horizon-window+1), horizon+1):
        size = mp.fabs(source.coefficient(n))
        if size > 0:
            best = max(best, size**(mp.mpf(1)/n))
    if best == 0:
        raise InputError('series', 'all sampled coefficients are zero')
    return 1/best


def disk_radii_Rm(model, m):
    """Radius of the largest disk centered at 0 where model is meromorphic with at most m poles."""
    if int(m) != m or m < 0:
        raise InputError(m, 'm must be a nonnegative integer')
    context = model.context
    radius = model.analyticity_radius
    count = 0
    for r, order, locs in model.pole_layers():
        if r > radius or same_modulus(r, radius, context):
            break
        count += order
        if count > m:
            return r
    return radius


def poles_in_disk(model, radius):
    """(location, order) of the poles with modulus strictly below radius."""
    context = model.context
    mp = context.mp
    out = []
    for loc, order in model.poles():
        r = mp.fabs(loc)
        if r < radius and not same_modulus(r, radius, context):
            out.append((loc, order))
    return out


def count_poles_in_Dm(model, m):
    return sum(order for loc, order in poles_in_disk(model, disk_radii_Rm(model, m)))


def gonchar_condition(model, m):
    """True when the model has exactly m poles, with multiplicity, in D_m(f)."""
    return count_poles_in_Dm(model, m) == m


def radius_after_division(model, zeros, match_radius=pmc.LIMIT_MATCH_RADIUS):
    """
    R_0(q f) for a polynomial q given by its zeros.

    zeros is a list of (value, multiplicity) pairs (`~pademiner.numerics.Root`
    lists with repetition are accepted). Each pole loses as much order as
    the zeros within match_radius (relative) supply.
    """
    context = model.context
    mp = context.mp
    pairs = []
    for z in zeros:
        # roots() output repeats each value multiplicity times
        count = 1 if isinstance(z, Root) else int(z[1])
        pairs.append((context.mpc(z[0]), count))
    best = model.analyticity_radius
    for loc, order in model.poles():
        left = order
        for value, count in pairs:
            if mp.fabs(value - loc) <= match_radius*max(1, mp.fabs(loc)):
                left -= count
        if left > 0 and mp.fabs(loc) < best:
            best = mp.fabs(loc)
    return best


def associated_system(system):
    """
    (f_1, z f_1, ..., z**(m_1-1) f_1, ..., f_d, ..., z**(m_d-1) f_d) with all-ones multi-index.
    """
    components = []
    origin = []
    for k, (f, mk) in enumerate(zip(system.components, system.m)):
        for j in range(mk):
            components.append(f if j == 0 else f.multiply_by_monomial(j))
            origin.append((system.origin[k][0], system.origin[k][1] + j))
    return SystemModel(components, [1]*len(components), origin=origin)


#****
#JSON
#****
def _complex_list(values, context, where):
    if not isinstance(values, list):
        raise InputError(where, 'expected a list of [re, im] pairs')
    try:
        return tuple(context.parse_complex(v) for v in values)
    except (ValueError, TypeError) as err:
        raise InputError(where, str(err))


def _parse_tail(spec, context, where):
    if not isinstance(spec, dict) or 'kind' not in spec:
        raise InputError(where, "tail entries are objects with a 'kind' key")
    kind = spec['kind']
    if kind == POLYNOMIAL:
        return _complex_list(spec.get('coefficients', []), context, where+'.coefficients'), None
    mult = _complex_list(spec.get('multiplier', [[1, 0]]), context, where+'.multiplier')
    if kind == LACUNARY:
        return (), (lacunary_atom(context), mult)
    if kind == POWER_SERIES:
        if 'radius' not in spec:
            raise InputError(where, 'power_series_with_radius needs a radius')
        return (), (power_series_atom(spec['radius'], context, spec.get('exponent', 2)), mult)
    raise InputError(where+'.kind', 'unsupported tail kind %r, use one of %s'%(kind, ', '.join(TAIL_KINDS)))


def parse_model(spec, context, where='component'):
    if not isinstance(spec, dict):
        raise InputError(where, 'components are JSON objects')
    parts = []
    for i, pole in enumerate(spec.get('poles', [])):
        here = '%s.poles[%d]'%(where, i)
        if not isinstance(pole, dict) or 'principal' not in pole:
            raise InputError(here, "poles need 're', 'im' and 'principal'")
        try:
            loc = context.parse_complex({'re': pole.get('re', 0), 'im': pole.get('im', 0)})
        except (ValueError, TypeError) as err:
            raise InputError(here, str(err))
        parts.append(PrincipalPart(loc, _complex_list(pole['principal'], context, here+'.principal')))
    polynomial = list(_complex_list(spec.get('polynomial', []), context, where+'.polynomial'))
    tails = spec.get('tails', [])
    if spec.get('tail') is not None:
        tails = [spec['tail']] + list(tails)
    terms = []
    for i, t in enumerate(tails):
        poly, term = _parse_tail(t, context, '%s.tails[%d]'%(where, i))
        for j, c in enumerate(poly):
            if j < len(polynomial):
                polynomial[j] += c
            else:
                polynomial.append(c)
        if term is not None:
            terms.append(term)
    model = MeromorphicModel(parts, EntireTail(tuple(polynomial), tuple(terms)), context)
    # route through the combination code so equal atoms merge and zeros trim
    return linear_combination([model], [1], context, allow_zero=False)


def parse_system(spec, context):
    """SystemModel from the JSON schema documented in README.md."""
    if not isinstance(spec, dict):
        raise InputError('system', 'expected a JSON object')
    if 'components' not in spec or 'm' not in spec:
        raise InputError('system', "keys 'components' and 'm' are required")
    if not isinstance(spec['components'], list) or not isinstance(spec['m'], list):
        raise InputError('system', "'components' and 'm' must be lists")
    comps = [parse_model(c, context, 'components[%d]'%k) for k, c in enumerate(spec['components'])]
    return SystemModel(comps, spec['m'])


def load_system(path, context):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            spec = json.load(f)
    except json.JSONDecodeError as err:
        raise InputError(path, 'malformed JSON: %s'%err)
    except OSError as err:
        raise InputError(path, 'cannot read input: %s'%err)
    return parse_system(spec, context)


def model_to_json(model):
    context = model.context
    out = {'poles': [], 'polynomial': [context.to_pair(c) for c in model.tail.polynomial], 'tails': []}
    for p in model.principal_parts:
        re, im = context.to_pair(p.location)
        out['poles'].append({'re': re, 'im': im, 'principal': [context.to_pair(c) for c in p.coefficients]})
    for atom, mult in model.tail.terms:
        entry = {'kind': atom.kind, 'multiplier': [context.to_pair(c) for c in mult]}
        if atom.kind == POWER_SERIES:
            entry['radius'] = context.to_str(atom.radius)
            entry['exponent'] = atom.exponent
        out['tails'].append(entry)
    return out


def system_to_json(system):
    return {'components': [model_to_json(f) for f in system.components], 'm': list(system.m)}
