"""
System poles of structural systems.

Everything is computed on the associated system (z**j f_k, j < m_k) whose
combinations have constant coefficients c in C**|m|. The singular part of
a combination is a linear image of c: one functional per (pole location,
order) reading a principal coefficient, and one per (tail atom, power)
reading a multiplier coefficient. Requiring a combination to be analytic
somewhere is then a kernel computation, and asking for a pole of exact
order s at xi pins the order-s coefficient at xi to 1.
"""
import warnings
from collections import namedtuple
from dataclasses import dataclass

from . import constants as pmc
from .numerics import Polynomial, null_space
from .series import associated_system, linear_combination, same_point, same_modulus
from .tools.utils import InputError, EvaluationError, NotSystemPoleError

EXACT = 'exact'
QUADRATURE = 'quadrature'

Independence = namedtuple('Independence', ['independent', 'witness', 'polynomials'])
Independence.__doc__ = 'Outcome of the algebraic independence test; witness is None for independent systems.'


@dataclass(frozen=True)
class CombinationSpace:
    """
    Constant coefficient vectors c over the associated system.

    basis spans the combinations meeting every kill constraint. With a
    pinned (xi, s), witness is the minimum norm member whose order-s
    principal coefficient at xi equals 1, None when there is none.
    """
    basis: tuple
    system: object
    constraints: tuple = ()
    keep: object = None
    witness: object = None

    @property
    def dimension(self):
        return len(self.basis)

    @property
    def feasible(self):
        if self.keep is not None:
            return self.witness is not None
        return self.dimension > 0

    def polynomials(self, vector=None):
        """(p_1, ..., p_d) with deg p_k < m_k for the coefficient vector (DEFAULTS to the witness)."""
        vector = self._vector(vector)
        context = self.system.context
        coeffs = [[0]*mk for mk in self.system.m]
        slots = [(k, j) for k, mk in enumerate(self.system.m) for j in range(mk)]
        for c, (k, j) in zip(vector, slots):
            coeffs[k][j] = c
        return [Polynomial(cs, context) for cs in coeffs]

    def combination(self, vector=None):
        """sum p_k f_k as a `~pademiner.series.MeromorphicModel`."""
        return linear_combination(self.system.components, self.polynomials(vector), self.system.context)

    def _vector(self, vector):
        if vector is None:
            if self.witness is None:
                raise InputError('vector', 'the space has no pinned witness, pass a coefficient vector')
            return self.witness
        if len(vector) != self.system.total:
            raise InputError(vector, 'expected %d coefficients'%self.system.total)
        return [self.system.context.mpc(x) for x in vector]


@dataclass(frozen=True)
class SystemPoleReport:
    xi: object
    tau: int
    r: tuple
    R_cum: tuple
    R_xi: object
    theta_contribution: object


@dataclass(frozen=True)
class SystemPoleSet:
    reports: tuple
    Q_limit: Polynomial
    complete: bool
    total: int

    def report_at(self, xi):
        context = self.Q_limit.context
        for rep in self.reports:
            if same_point(rep.xi, context.mpc(xi), context):
                return rep
        return None


#************
#FUNCTIONALS
#************
def principal_coefficients_by_quadrature(model, location, max_order, points=pmc.QUADRATURE_POINTS, radius=None):
    """
    Principal coefficients c_1..c_max_order of model at location by the
    trapezoid rule on |w - location| = radius.

    radius DEFAULTS to QUADRATURE_SHRINK times the distance to the closest
    other singularity (other poles and the boundary of the tail disk).
    """
    context = model.context
    mp = context.mp
    a = context.mpc(location)
    if points < pmc.MIN_SAMPLES:
        raise InputError(points, 'at least %d quadrature points are required'%pmc.MIN_SAMPLES)
    if radius is None:
        dists = [mp.fabs(p.location - a) for p in model.principal_parts if not same_point(p.location, a, context)]
        R = model.analyticity_radius
        if not mp.isinf(R):
            dists.append(R - mp.fabs(a))
        nearest = min(dists) if dists else max(1, mp.fabs(a))
        if nearest <= 0:
            raise EvaluationError(context.to_pair(a), 'location lies outside the disk where the model is meromorphic')
        radius = pmc.QUADRATURE_SHRINK*nearest
    offsets = context.circle_points(context.parse_real(radius), points)
    values = [model.evaluate(a + w) for w in offsets]
    out = []
    for t in range(1, max_order+1):
        out.append(mp.fsum([w**t*v for w, v in zip(offsets, values)])/points)
    return out


class _Functionals(object):
    """Singular functionals of the associated system of `system`."""

    def __init__(self, system, method=EXACT, points=pmc.QUADRATURE_POINTS):
        if method not in (EXACT, QUADRATURE):
            raise InputError(method, "method must be 'exact' or 'quadrature'")
        context = system.context
        mp = context.mp
        self.system = system
        self.context = context
        self.assoc = associated_system(system)
        comps = self.assoc.components
        self.size = len(comps)

        locs = []
        for g in comps:
            for part in g.principal_parts:
                for item in locs:
                    if same_point(item[0], part.location, context):
                        item[1] = max(item[1], part.order)
                        break
                else:
                    locs.append([part.location, part.order])
        locs.sort(key=lambda item: (float(mp.fabs(item[0])), float(mp.arg(item[0]))))
        self.locations = [item[0] for item in locs]
        self.orders = [item[1] for item in locs]

        atoms = {}
        for g in comps:
            for atom, mult in g.tail.terms:
                entry = atoms.setdefault(atom.key(), [atom, 0])
                entry[1] = max(entry[1], len(mult))
        self.atoms = sorted(atoms.values(), key=lambda item: (item[0].radius, item[0].key()))

        self._principal = []
        for loc, order in zip(self.locations, self.orders):
            table = []
            for g in comps:
                if method == QUADRATURE:
                    table.append(principal_coefficients_by_quadrature(g, loc, order, points))
                else:
                    part = g.principal_at(loc)
                    coeffs = list(part.coefficients) if part is not None else []
                    table.append(coeffs + [mp.mpc(0)]*(order - len(coeffs)))
            self._principal.append(table)

    def locate(self, xi):
        for idx, loc in enumerate(self.locations):
            if same_point(loc, xi, self.context):
                return idx
        return None

    def pole_row(self, idx, t):
        return [table[t-1] for table in self._principal[idx]]

    def pole_rows(self, idx, orders=None):
        orders = orders if orders is not None else range(1, self.orders[idx]+1)
        return [self.pole_row(idx, t) for t in orders]

    def atom_rows(self, a):
        atom, length = self.atoms[a]
        zero = self.context.mp.mpc(0)
        rows = []
        for t in range(length):
            row = []
            for g in self.assoc.components:
                mult = dict((x.key(), m) for x, m in g.tail.terms).get(atom.key(), ())
                row.append(mult[t] if t < len(mult) else zero)
            rows.append(row)
        return rows

    def singularities(self):
        """(modulus, 'pole' or 'atom', index), ascending in modulus."""
        mp = self.context.mp
        out = [(mp.fabs(loc), 'pole', i) for i, loc in enumerate(self.locations)]
        out += [(atom.radius, 'atom', a) for a, (atom, length) in enumerate(self.atoms)]
        out.sort(key=lambda item: item[0])
        return out

    def rows_of(self, item):
        modulus, kind, idx = item
        return self.pole_rows(idx) if kind == 'pole' else self.atom_rows(idx)

    def rows_within(self, radius, skip=None):
        """Rows of every singularity with modulus <= radius (tolerance included), except pole index skip."""
        rows = []
        for item in self.singularities():
            modulus, kind, idx = item
            if modulus < radius or same_modulus(modulus, radius, self.context):
                if kind == 'pole' and idx == skip:
                    continue
                rows.extend(self.rows_of(item))
        return rows


#**************
#LINEAR ALGEBRA
#**************
def _apply(row, basis):
    return [sum(l*b for l, b in zip(row, vec)) for vec in basis]


def _is_active(row, basis, context):
    mp = context.mp
    scale = max([mp.fabs(x) for x in row], default=0)
    if scale == 0 or not basis:
        return False
    return max(mp.fabs(x) for x in _apply(row, basis)) > context.zero_tolerance*scale


def _kernel(rows, basis, context):
    """Basis of {v in span(basis): row . v = 0 for every row}."""
    mp = context.mp
    if not basis:
        return []
    restricted = []
    for row in rows:
        if _is_active(row, basis, context):
            scale = max(mp.fabs(x) for x in row)
            restricted.append([x/scale for x in _apply(row, basis)])
    if not restricted:
        return list(basis)
    ns = null_space(restricted, context)
    out = []
    for y in ns.basis:
        out.append([sum(yj*vec[i] for yj, vec in zip(y, basis)) for i in range(len(basis[0]))])
    return out


def _pinned_witness(row, basis, context):
    """Minimum norm v in span(basis) with row . v = 1, None when row vanishes there."""
    mp = context.mp
    if not _is_active(row, basis, context):
        return None
    values = _apply(row, basis)
    norm2 = mp.fsum([mp.fabs(x)**2 for x in values])
    y = [mp.conj(x)/norm2 for x in values]
    return [sum(yj*vec[i] for yj, vec in zip(y, basis)) for i in range(len(basis[0]))]


def _identity(size, context):
    mp = context.mp
    return [[mp.mpc(1) if i == j else mp.mpc(0) for i in range(size)] for j in range(size)]


#**********
#OPERATIONS
#**********
def cancellation_system(system, targets, keep=None, method=EXACT, kill_tails_within=None):
    """
    Combinations whose principal parts vanish at every target up to the
    stated order.

    Parameters
    ----------
    targets : list of (location, max_order_to_kill)

    keep : (xi, s), optional
        Require a pole of exact order s at xi: orders above s are killed
        and the order-s coefficient is pinned to 1.

    kill_tails_within : real, optional
        Also cancel every tail atom whose radius is at most this value.

    Returns
    -------
    `CombinationSpace`; an infeasible request gives an empty basis or a None witness.
    """
    context = system.context
    F = _Functionals(system, method)
    rows, described = [], []
    for item in targets:
        try:
            loc, order = item
        except (TypeError, ValueError):
            raise InputError(item, 'targets are (location, max_order) pairs')
        loc = context.mpc(loc)
        if loc == 0 or int(order) != order or order < 1:
            raise InputError(item, 'targets need a nonzero location and a positive order')
        idx = F.locate(loc)
        described.append(('kill', context.to_pair(loc), int(order)))
        if idx is not None:
            rows.extend(F.pole_rows(idx, range(1, min(int(order), F.orders[idx])+1)))
    if kill_tails_within is not None:
        radius = context.parse_real(kill_tails_within)
        for a, (atom, length) in enumerate(F.atoms):
            if atom.radius < radius or same_modulus(atom.radius, radius, context):
                rows.extend(F.atom_rows(a))
                described.append(('kill_tail', atom.kind, context.to_str(atom.radius)))
    pin = None
    if keep is not None:
        xi, s = keep
        xi = context.mpc(xi)
        if xi == 0 or int(s) != s or s < 1:
            raise InputError(keep, 'keep needs a nonzero location and a positive order')
        idx = F.locate(xi)
        described.append(('keep', context.to_pair(xi), int(s)))
        if idx is not None and s <= F.orders[idx]:
            rows.extend(F.pole_rows(idx, range(int(s)+1, F.orders[idx]+1)))
            pin = F.pole_row(idx, int(s))
    basis = _kernel(rows, _identity(F.size, context), context)
    witness = None
    if keep is not None and pin is not None:
        witness = _pinned_witness(pin, basis, context)
    return CombinationSpace(tuple(tuple(b) for b in basis), system, tuple(described),
                            keep, tuple(witness) if witness is not None else None)


def _r_xi_s(F, xi, s):
    context = F.context
    mp = context.mp
    idx = F.locate(xi)
    if idx is None or s > F.orders[idx]:
        raise NotSystemPoleError(context.to_pair(xi), 'not a system pole at order %d'%s)
    loc = F.locations[idx]
    radius = mp.fabs(loc)
    rows = F.rows_within(radius, skip=idx) + F.pole_rows(idx, range(s+1, F.orders[idx]+1))
    pin = F.pole_row(idx, s)
    basis = _kernel(rows, _identity(F.size, context), context)
    if _pinned_witness(pin, basis, context) is None:
        raise NotSystemPoleError(context.to_pair(xi), 'not a system pole at order %d'%s)
    # R_s(g) only changes at singularity moduli
    breakpoints = []
    for modulus, kind, j in F.singularities():
        if modulus > radius and not same_modulus(modulus, radius, context):
            if not breakpoints or not same_modulus(breakpoints[-1][0], modulus, context):
                breakpoints.append([modulus, []])
            breakpoints[-1][1].extend(F.rows_of((modulus, kind, j)))
    for modulus, extra in breakpoints:
        basis = _kernel(extra, basis, context)
        if _pinned_witness(pin, basis, context) is None:
            return modulus
    return context.inf


def r_xi_s(system, xi, s, method=EXACT):
    """
    Largest R_s(g) over combinations g analytic on a neighborhood of
    |z| <= |xi| except for a pole of exact order s at xi.

    Raises
    ------
    `~pademiner.tools.utils.NotSystemPoleError` when no such combination exists.
    """
    if isinstance(s, bool) or int(s) != s or s < 1:
        raise InputError(s, 's must be a positive integer')
    F = _Functionals(system, method)
    return _r_xi_s(F, system.context.mpc(xi), int(s))


def algebraically_independent(system):
    """
    Whether sum p_k f_k (deg p_k < m_k) is a polynomial only for p = 0.

    Every principal coefficient and every atom multiplier coefficient of
    the combination must vanish for it to be a polynomial. Distinct atoms
    are taken as linearly independent over rational functions. A
    dependent system returns a witness normalized so that its first
    nonzero entry is 1.
    """
    context = system.context
    mp = context.mp
    F = _Functionals(system)
    rows = []
    for idx in range(len(F.locations)):
        rows.extend(F.pole_rows(idx))
    for a in range(len(F.atoms)):
        rows.extend(F.atom_rows(a))
    basis = _kernel(rows, _identity(F.size, context), context)
    if not basis:
        return Independence(True, None, None)
    vec = basis[0]
    scale = max(mp.fabs(x) for x in vec)
    lead = next(x for x in vec if mp.fabs(x) > context.zero_tolerance*scale)
    witness = tuple(x/lead for x in vec)
    space = CombinationSpace(tuple(tuple(b) for b in basis), system)
    return Independence(False, witness, space.polynomials(witness))


def enumerate_system_poles(system, method=EXACT):
    """
    All system poles of (f, m) with their orders and radii.

    Layer by layer: the singularities of the current combination space
    with the smallest modulus are the candidates; each candidate is tested
    for s = 1, 2, ... (stopping at the first failure and never exceeding
    |m| in total), then the whole layer is cancelled and the next one is
    examined. Stops once |m| orders are found, the space is exhausted or
    no singularity is left.
    """
    context = system.context
    mp = context.mp
    if not algebraically_independent(system).independent:
        warnings.warn('the system is not algebraically independent, the pole set may be incomplete')
    F = _Functionals(system, method)
    total = system.total
    basis = _identity(F.size, context)
    found = []
    count = 0
    while count < total and basis:
        active = [item for item in F.singularities()
                  if any(_is_active(row, basis, context) for row in F.rows_of(item))]
        if not active:
            break
        level = active[0][0]
        layer = [item for item in active if same_modulus(item[0], level, context)]
        for item in layer:
            modulus, kind, idx = item
            if kind != 'pole':
                continue
            others = []
            for other in layer:
                if other is not item:
                    others.extend(F.rows_of(other))
            tau = 0
            for s in range(1, F.orders[idx]+1):
                if count + s > total:
                    break
                rows = others + F.pole_rows(idx, range(s+1, F.orders[idx]+1))
                sub = _kernel(rows, basis, context)
                if _pinned_witness(F.pole_row(idx, s), sub, context) is None:
                    break
                tau = s
            if tau:
                found.append((F.locations[idx], tau))
                count += tau
        layer_rows = []
        for item in layer:
            layer_rows.extend(F.rows_of(item))
        basis = _kernel(layer_rows, basis, context)

    reports = []
    for xi, tau in found:
        r = tuple(_r_xi_s(F, xi, s) for s in range(1, tau+1))
        R_cum = tuple(min(r[:s]) for s in range(1, tau+1))
        R_xi = R_cum[-1]
        theta = mp.mpf(0) if mp.isinf(R_xi) else mp.fabs(xi)/R_xi
        reports.append(SystemPoleReport(xi, tau, r, R_cum, R_xi, theta))
    roots_ = [xi for xi, tau in found for _ in range(tau)]
    Q_limit = Polynomial.from_roots(roots_, context)
    return SystemPoleSet(tuple(reports), Q_limit, count == total, total)


def predicted_theta(pole_set):
    """max |xi|/R_xi over the system poles, 0 for infinite radii."""
    if not pole_set.complete:
        raise InputError('pole_set', 'the pole set is incomplete, theta is undefined')
    return max(rep.theta_contribution for rep in pole_set.reports)


def star_radii(system, pole_set, k):
    """
    (R_{|m|,k}, R*_{|m|,k}) for component k.

    R is the first modulus where f_k has a singularity that is not a
    system pole of at least its order, or the radius of its tail. R* also
    caps by R_{xi,tau} of every pole xi of f_k inside, tau its order in f_k.
    """
    if not pole_set.complete:
        raise InputError('pole_set', 'the pole set is incomplete')
    if not 0 <= k < system.d:
        raise InputError(k, 'component index out of range')
    context = system.context
    mp = context.mp
    f = system.components[k]
    R = f.analyticity_radius
    for loc, order in f.poles():
        rep = pole_set.report_at(loc)
        if rep is None or order > rep.tau:
            R = min(R, mp.fabs(loc))
    R_star = R
    for loc, order in f.poles():
        if mp.fabs(loc) < R and not same_modulus(mp.fabs(loc), R, context):
            R_star = min(R_star, pole_set.report_at(loc).R_cum[order-1])
    return R, R_star


def pole_set_to_json(pole_set, context):
    def rad(x):
        return context.to_str(x)
    out = {
        'complete': pole_set.complete,
        'total': pole_set.total,
        'poles': [{'re': context.to_str(rep.xi.real), 'im': context.to_str(rep.xi.imag),
                   'order': rep.tau, 'r': [rad(x) for x in rep.r], 'R_cum': [rad(x) for x in rep.R_cum],
                   'R_xi': rad(rep.R_xi), 'theta_contribution': rad(rep.theta_contribution)}
                  for rep in pole_set.reports],
        'Q_limit': pole_set.Q_limit.to_pairs(),
    }
    out['theta'] = rad(predicted_theta(pole_set)) if pole_set.complete else None
    return out
