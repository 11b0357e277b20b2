import json

import pytest

from pademiner.series import associated_system, linear_combination, rational_model, disk_radii_Rm, SystemModel
from pademiner.system_poles import (cancellation_system, r_xi_s, algebraically_independent,
                                    enumerate_system_poles, predicted_theta, star_radii, pole_set_to_json,
                                    principal_coefficients_by_quadrature, EXACT, QUADRATURE)
from pademiner.tools.utils import InputError, EvaluationError, NotSystemPoleError

from conftest import truth

COMPLETE = ['E1', 'E2', 'E3', 'E4', 'E6']


def same_radius(context, value, expected):
    mp = context.mp
    if mp.isinf(expected):
        return mp.isinf(value)
    return abs(value - expected) <= 1e-60*max(1, expected)


def poles_of(context, ex):
    return [(context.parse_complex(p['xi']), p) for p in ex.ground_truth['poles']]


def in_span(space, vector):
    context = space.system.context
    mp = context.mp
    rest = [context.mpc(x) for x in vector]
    size = max(mp.fabs(x) for x in rest)
    for b in space.basis:
        proj = sum(mp.conj(bi)*ri for bi, ri in zip(b, rest))
        rest = [ri - proj*bi for bi, ri in zip(b, rest)]
    return max(mp.fabs(x) for x in rest) <= context.zero_tolerance*max(size, 1)


class TestEnumeration:

    @pytest.mark.parametrize('name', COMPLETE)
    def test_poles_and_radii(self, context, catalog, name):
        ex = catalog[name]
        pole_set = enumerate_system_poles(ex.system)
        assert pole_set.complete
        assert pole_set.total == ex.system.total
        assert len(pole_set.reports) == len(ex.ground_truth['poles'])
        for xi, expected in poles_of(context, ex):
            rep = pole_set.report_at(xi)
            assert rep is not None, expected['xi']
            assert rep.tau == expected['tau']
            assert len(rep.r) == len(expected['r'])
            for got, want in zip(rep.r, expected['r']):
                assert same_radius(context, got, truth(context, want))
            for got, want in zip(rep.R_cum, expected['R_cum']):
                assert same_radius(context, got, truth(context, want))
            assert same_radius(context, rep.R_xi, truth(context, expected['R_xi']))

    @pytest.mark.parametrize('name', COMPLETE + ['E5'])
    def test_limit_denominator(self, context, catalog, name, quiet_warnings):
        ex = catalog[name]
        Q = enumerate_system_poles(ex.system).Q_limit
        expected = ex.ground_truth['Q_limit']
        assert Q.degree == len(expected) - 1
        for c, want in zip(Q.coefficients, expected):
            assert abs(c - truth(context, want)) <= 1e-100

    @pytest.mark.parametrize('name', COMPLETE)
    def test_theta(self, context, catalog, name):
        ex = catalog[name]
        theta = predicted_theta(enumerate_system_poles(ex.system))
        assert abs(theta - truth(context, ex.ground_truth['theta'])) <= 1e-100

    def test_excluded_pole(self, context, catalog):
        ex = catalog['E2']
        pole_set = enumerate_system_poles(ex.system)
        for xi in ex.ground_truth['excluded']:
            assert pole_set.report_at(context.parse_complex(xi)) is None

    def test_dependent_system(self, context, catalog):
        ex = catalog['E5']
        with pytest.warns(UserWarning, match='not algebraically independent'):
            pole_set = enumerate_system_poles(ex.system)
        assert not pole_set.complete
        assert len(pole_set.reports) == 1
        with pytest.raises(InputError, match='incomplete'):
            predicted_theta(pole_set)
        with pytest.raises(InputError):
            star_radii(ex.system, pole_set, 0)

    def test_associated_system_has_the_same_poles(self, context, catalog):
        system = catalog['E6'].system
        direct = enumerate_system_poles(system)
        assoc = enumerate_system_poles(associated_system(system))
        assert len(direct.reports) == len(assoc.reports)
        for rep in direct.reports:
            other = assoc.report_at(rep.xi)
            assert other is not None and other.tau == rep.tau
            assert same_radius(context, other.R_xi, rep.R_xi)

    def test_double_pole(self, context):
        f = rational_model([(2, [0, 1])], context)
        pole_set = enumerate_system_poles(SystemModel([f], (2,)))
        assert pole_set.complete
        (rep,) = pole_set.reports
        assert rep.tau == 2
        assert all(context.mp.isinf(r) for r in rep.r)

    def test_pole_count_is_capped(self, context):
        # three poles, |m| = 2: the outer layer is never reached
        f = rational_model([(1, [1]), (2, [1]), (3, [1])], context)
        pole_set = enumerate_system_poles(SystemModel([f], (2,)))
        assert [float(rep.xi.real) for rep in pole_set.reports] == [1.0, 2.0]
        assert same_radius(context, pole_set.reports[0].R_xi, 3)

    def test_dependent_associated_system(self, context, quiet_warnings):
        f = rational_model([(2, [1])], context)
        parent = SystemModel([f], (2,))
        direct = enumerate_system_poles(parent)
        assoc = enumerate_system_poles(associated_system(parent))
        assert not direct.complete and not assoc.complete
        assert [(float(rep.xi.real), rep.tau) for rep in assoc.reports] == [(2.0, 1)]
        assert [(float(rep.xi.real), rep.tau) for rep in direct.reports] == [(2.0, 1)]

    @pytest.mark.parametrize('name', ['E2', 'E4', 'E6'])
    def test_scaling_a_component(self, context, catalog, name):
        system = catalog[name].system
        c = context.mpc(complex(3, -2))
        first = linear_combination([system.components[0]], [c], context)
        scaled = SystemModel([first] + list(system.components[1:]), system.m)
        a = enumerate_system_poles(system)
        b = enumerate_system_poles(scaled)
        assert len(a.reports) == len(b.reports)
        for rep in a.reports:
            other = b.report_at(rep.xi)
            assert other is not None and other.tau == rep.tau
            assert same_radius(context, other.R_xi, rep.R_xi)
            for x, y in zip(rep.r, other.r):
                assert same_radius(context, y, x)

    @pytest.mark.parametrize('name', ['E3', 'E6'])
    def test_scalar_radius_is_the_hadamard_radius(self, context, catalog, name):
        system = catalog[name].system
        f, = system.components
        R_m = disk_radii_Rm(f, system.m[0])
        for rep in enumerate_system_poles(system).reports:
            assert same_radius(context, rep.R_xi, R_m)

    def test_scalar_rational_radius(self, context):
        f = rational_model([(1, [1]), (2, [1]), (3, [1])], context)
        for rep in enumerate_system_poles(SystemModel([f], (2,))).reports:
            assert same_radius(context, rep.R_xi, disk_radii_Rm(f, 2))


class TestStarRadii:

    @pytest.mark.parametrize('name', COMPLETE)
    def test_matches_ground_truth(self, context, catalog, name):
        ex = catalog[name]
        pole_set = enumerate_system_poles(ex.system)
        for k, (R, R_star) in enumerate(ex.ground_truth['star_radii']):
            got, got_star = star_radii(ex.system, pole_set, k)
            assert same_radius(context, got, truth(context, R))
            assert same_radius(context, got_star, truth(context, R_star))

    def test_component_range(self, catalog):
        ex = catalog['E2']
        with pytest.raises(InputError):
            star_radii(ex.system, enumerate_system_poles(ex.system), 2)


class TestRadiusOfAPole:

    def test_cut_at_the_tied_pole(self, context, catalog):
        system = catalog['E2'].system
        assert r_xi_s(system, 1, 1) == 2
        assert context.mp.isinf(r_xi_s(system, 3, 1))

    def test_not_a_system_pole(self, catalog):
        system = catalog['E2'].system
        with pytest.raises(NotSystemPoleError):
            r_xi_s(system, 2, 1)
        with pytest.raises(NotSystemPoleError):
            r_xi_s(system, 1, 2)
        with pytest.raises(NotSystemPoleError):
            r_xi_s(system, 5, 1)

    @pytest.mark.parametrize('s', [0, -1, 1.5, True])
    def test_rejects_bad_order(self, catalog, s):
        with pytest.raises(InputError):
            r_xi_s(catalog['E2'].system, 1, s)

    def test_beyond_the_natural_boundary(self, context, catalog):
        system = catalog['E1'].system
        assert r_xi_s(system, '1/2', 1) == 1
        assert context.mp.isinf(r_xi_s(system, 2, 1))


class TestCancellation:

    def test_kill_the_shared_pole(self, context, catalog):
        system = catalog['E1'].system
        space = cancellation_system(system, [('1/2', 1)])
        assert space.dimension == 1
        assert space.feasible
        assert in_span(space, [2, -2])
        assert not in_span(space, [1, 0])

    def test_keep_a_pole(self, context, catalog):
        system = catalog['E1'].system
        space = cancellation_system(system, [('1/2', 1)], keep=(2, 1))
        w = space.witness
        assert abs(w[0] - 1) <= 1e-100 and abs(w[1] + 1) <= 1e-100
        g = space.combination()
        assert g.is_rational
        (loc, order), = g.poles()
        assert abs(loc - 2) <= 1e-100 and order == 1
        p1, p2 = space.polynomials()
        assert p1.degree == 0 and p2.degree == 0

    def test_keep_is_infeasible(self, context, catalog):
        system = catalog['E2'].system
        space = cancellation_system(system, [(1, 1)], keep=(2, 1))
        assert space.witness is None
        assert not space.feasible
        with pytest.raises(InputError):
            space.combination()

    def test_kill_tails(self, context, catalog):
        system = catalog['E1'].system
        space = cancellation_system(system, [], kill_tails_within=1)
        assert space.dimension == 1
        g = space.combination([1, -1])
        assert g.is_rational

    @pytest.mark.parametrize('targets', [[(0, 1)], [(1, 0)], [1]])
    def test_rejects_bad_targets(self, catalog, targets):
        with pytest.raises(InputError):
            cancellation_system(catalog['E2'].system, targets)

    def test_rejects_bad_method(self, catalog):
        with pytest.raises(InputError):
            cancellation_system(catalog['E2'].system, [(1, 1)], method='residue')

    def test_vector_length(self, catalog):
        space = cancellation_system(catalog['E2'].system, [(1, 1)])
        with pytest.raises(InputError):
            space.polynomials([1, 2, 3])


class TestIndependence:

    @pytest.mark.parametrize('name', ['E1', 'E2', 'E3', 'E4', 'E6'])
    def test_independent(self, catalog, name):
        assert algebraically_independent(catalog[name].system).independent

    def test_witness(self, context, catalog):
        ex = catalog['E5']
        result = algebraically_independent(ex.system)
        assert not result.independent
        for got, want in zip(result.witness, ex.ground_truth['witness']):
            assert abs(got - truth(context, want)) <= 1e-100
        assert [p.degree for p in result.polynomials] == [0, 0]

    def test_polynomial_combination(self, context):
        # f and z f with m = (2, 1): z*f - (z f) = 0
        f = rational_model([(2, [1])], context)
        system = SystemModel([f, f.multiply_by_monomial(1)], (2, 1))
        result = algebraically_independent(system)
        assert not result.independent
        g = linear_combination(system.components, result.polynomials, context)
        assert g.poles() == [] and g.is_rational

    def test_associated_system_of_a_dependent_system(self, context):
        f = rational_model([(2, [1])], context)
        parent = SystemModel([f], (2,))
        assoc = associated_system(parent)
        a = algebraically_independent(parent)
        b = algebraically_independent(assoc)
        assert not a.independent and not b.independent
        # (1 - z/2)/(z - 2) = -1/2
        for x, y in zip(a.witness, b.witness):
            assert abs(x - y) <= 1e-100
        assert abs(b.witness[1] + context.mpc('0.5')) <= 1e-100
        assert [p.degree for p in b.polynomials] == [0, 0]
        g = linear_combination(assoc.components, b.polynomials, context)
        assert g.poles() == []


class TestQuadrature:

    @pytest.mark.parametrize('name', ['E2', 'E4'])
    def test_matches_exact(self, context, catalog, name):
        system = catalog[name].system
        exact = enumerate_system_poles(system, method=EXACT)
        quad = enumerate_system_poles(system, method=QUADRATURE)
        assert len(exact.reports) == len(quad.reports)
        for a, b in zip(exact.reports, quad.reports):
            assert abs(a.xi - b.xi) <= 1e-100
            assert a.tau == b.tau
            assert same_radius(context, b.R_xi, a.R_xi)

    def test_principal_coefficients(self, context):
        f = rational_model([(2, [3, 5])], context)
        c1, c2 = principal_coefficients_by_quadrature(f, 2, 2)
        assert abs(c1 - 3) <= 1e-50 and abs(c2 - 5) <= 1e-50

    def test_outside_the_tail_disk(self, catalog):
        system = catalog['E1'].system
        with pytest.raises(EvaluationError):
            principal_coefficients_by_quadrature(system.components[0], 2, 1)
        with pytest.raises(EvaluationError):
            r_xi_s(system, 2, 1, method=QUADRATURE)

    def test_needs_points(self, context):
        f = rational_model([(2, [1])], context)
        with pytest.raises(InputError):
            principal_coefficients_by_quadrature(f, 2, 1, points=8)


class TestSerialization:

    def test_pole_set_json(self, context, catalog):
        pole_set = enumerate_system_poles(catalog['E2'].system)
        out = json.loads(json.dumps(pole_set_to_json(pole_set, context)))
        assert out['complete'] is True and out['total'] == 2
        assert [float(p['re']) for p in out['poles']] == [1.0, 3.0]
        assert out['poles'][0]['R_xi'] == '2.0'
        assert out['poles'][1]['r'] == ['inf']
        assert abs(float(out['theta']) - 0.5) < 1e-12
