import json

import mpmath
import pytest

from pademiner.approximants import pade
from pademiner.numerics import Polynomial
from pademiner.series import SystemModel, rational_model
from pademiner.row_analysis import (sweep, noise_floor, fit_geometric_rate, denominator_rate, derivative_rates,
                                    convergence_on_circle, cluster_zeros, component_dichotomy,
                                    inverse_diagnosis, rate_to_json, rate_to_str, cluster_to_json, inverse_to_json,
                                    sweep_to_csv_rows, SWEEP_CSV_COLUMNS)
from pademiner.system_poles import enumerate_system_poles
from pademiner.tools.utils import InputError, NoiseFloorError


@pytest.fixture(scope='module')
def e2_sweep(catalog):
    return sweep(catalog['E2'].system, 2, 40, derivative_points=[1], derivative_orders=1)


@pytest.fixture(scope='module')
def e3_records(catalog):
    f = catalog['E3'].system.components[0]
    return [pade(f, n, 1) for n in range(2, 41)]


class TestRateFit:

    def test_plain_geometric_sequence(self):
        ns = list(range(1, 21))
        est = fit_geometric_rate(ns, [3*0.5**n for n in ns])
        assert est.method == 'regression'
        assert est.fitted_rate == pytest.approx(0.5, rel=1e-9)
        assert est.limsup == pytest.approx(1.5)
        assert est.residual < 1e-9
        assert est.used == tuple(ns) and est.excluded == ()

    def test_values_below_double_precision(self):
        ns = list(range(400, 420))
        est = fit_geometric_rate(ns, [mpmath.ldexp(1, -2*n) for n in ns])
        assert est.fitted_rate == pytest.approx(0.25, rel=1e-9)

    @pytest.mark.parametrize('c', [1e-3, 1, 1e5])
    def test_rate_does_not_depend_on_scale(self, c):
        ns = list(range(5, 31))
        base = [(1 + 0.3*(-1)**n)*0.7**n for n in ns]
        unscaled = fit_geometric_rate(ns, base)
        est = fit_geometric_rate(ns, [c*v for v in base])
        assert est.fitted_rate == pytest.approx(unscaled.fitted_rate, rel=1e-12)
        assert est.fitted_rate == pytest.approx(0.7, abs=0.01)
        assert est.used == unscaled.used

    def test_window(self):
        ns = list(range(1, 31))
        values = [0.9**n if n <= 15 else 0.5**n for n in ns]
        est = fit_geometric_rate(ns, values, window=(16, 30))
        assert est.window == (16, 30)
        assert est.fitted_rate == pytest.approx(0.5, rel=1e-9)

    def test_noise_floor_censoring(self):
        ns = list(range(1, 41))
        est = fit_geometric_rate(ns, [0.5**n for n in ns], noise_floor=1e-5)
        assert est.used == tuple(range(1, 17))
        assert est.excluded == tuple(range(17, 41))

    def test_per_n_floors_and_missing_values(self):
        ns = list(range(1, 11))
        values = [0.5**n for n in ns]
        values[3] = None
        values[4] = 0
        floors = [0]*10
        floors[5] = 1
        est = fit_geometric_rate(ns, values, noise_floor=floors)
        assert est.excluded == (4, 5, 6)

    def test_fully_censored(self):
        ns = list(range(1, 11))
        with pytest.raises(NoiseFloorError):
            fit_geometric_rate(ns, [1e-20]*10, noise_floor=1e-10)
        est = fit_geometric_rate(ns, [1e-20]*10, noise_floor=1e-10, allow_floor=True, predicted=0.3)
        assert est.method == 'noise_floor'
        assert est.fitted_rate == 0.0 and est.predicted == 0.3
        assert len(est.excluded) == 10

    def test_too_short(self):
        with pytest.raises(InputError, match='at least'):
            fit_geometric_rate([1, 2, 3], [0.5, 0.25, 0.125])

    @pytest.mark.parametrize('ns, values, window', [
        ([], [], None),
        ([1, 2], [1], None),
        (list(range(10)), [1.0]*10, (5, 12)),
        (list(range(10)), [1.0]*10, (6, 3)),
    ])
    def test_bad_input(self, ns, values, window):
        with pytest.raises(InputError):
            fit_geometric_rate(ns, values, window=window)

    def test_noise_floor_formula(self):
        assert noise_floor(512, 10) == mpmath.ldexp(1, -512)*2**16*10
        assert noise_floor(512, 10, conditioning=4) == 4*noise_floor(512, 10)
        assert noise_floor(512, 0, conditioning=0.1) == noise_floor(512, 1)


class TestSweep:

    def test_records(self, e2_sweep):
        assert e2_sweep.ns == list(range(2, 41))
        assert e2_sweep.m == (1, 1)
        assert e2_sweep.reference_source == 'system_poles'
        assert len(e2_sweep.norms) == len(e2_sweep.floors) == 39
        assert all(r.unique for r in e2_sweep.records)

    def test_shared_zero_is_exact(self, e2_sweep):
        for r in e2_sweep.records:
            Q = r.Q.shift(r.lambda_n)
            assert abs(Q(3)) <= 1e-100

    def test_denominator_rate(self, e2_sweep):
        est = denominator_rate(e2_sweep, predicted=0.5)
        assert est.method == 'regression'
        assert est.fitted_rate == pytest.approx(0.5, abs=0.02)
        assert est.excluded == ()

    @pytest.mark.parametrize('kind', ['1', '2'])
    def test_rate_does_not_depend_on_the_norm(self, catalog, e2_sweep, kind):
        other = sweep(catalog['E2'].system, 2, 40, norm=kind)
        assert other.norm_kind == kind
        for a, b in zip(e2_sweep.norms, other.norms):
            assert a - 1e-100*a <= b <= 3*a
        est = denominator_rate(other)
        assert est.fitted_rate == pytest.approx(denominator_rate(e2_sweep).fitted_rate, abs=0.02)
        assert est.fitted_rate == pytest.approx(0.5, abs=0.02)

    def test_derivative_rates(self, e2_sweep):
        rates = derivative_rates(e2_sweep, 1)
        assert rates.rate == pytest.approx(0.5, abs=0.02)
        assert len(rates.per_order) == 1
        with pytest.raises(InputError):
            derivative_rates(e2_sweep, 0)
        with pytest.raises(InputError):
            derivative_rates(e2_sweep, 1, up_to_order=-1)

    def test_stored_derivatives(self, e2_sweep):
        assert sorted(e2_sweep.derivatives) == [(0, 0), (0, 1)]
        values = e2_sweep.derivatives[(0, 0)]
        assert abs(values[-1]) < abs(values[0])

    def test_parallel_matches_serial(self, context, catalog):
        system = catalog['E4'].system
        serial = sweep(system, 2, 6)
        parallel = sweep(system, 2, 6, jobs=2)
        for a, b in zip(serial.records, parallel.records):
            assert a.n == b.n and a.null_dimension == b.null_dimension
            for x, y in zip(a.Q.coefficients, b.Q.coefficients):
                assert abs(x - y) <= 1e-120

    def test_references(self, context, catalog):
        system = catalog['E4'].system
        final = sweep(system, 2, 5, reference='final')
        assert final.reference_source == 'final'
        assert final.norms[-1] == 0
        none = sweep(system, 2, 5, reference=None)
        assert none.norms is None
        with pytest.raises(InputError):
            denominator_rate(none)
        given = sweep(system, 2, 5, reference=Polynomial([4, -6, 2], context))
        assert given.reference_source == 'user'
        assert all(x <= 1e-100 for x in given.norms)
        with pytest.raises(InputError):
            sweep(system, 2, 5, reference='limit')

    def test_l1_norms(self, context, catalog):
        result = sweep(catalog['E4'].system, 2, 5, normalization='l1')
        assert all(x <= 1e-100 for x in result.norms)

    @pytest.mark.parametrize('n_min, n_max, jobs', [(0, 5, 1), (6, 5, 1), (2, 5, 0), (2, 5.5, 1)])
    def test_bad_ranges(self, catalog, n_min, n_max, jobs):
        with pytest.raises(InputError):
            sweep(catalog['E4'].system, n_min, n_max, jobs=jobs)

    def test_dependent_system_warns(self, catalog):
        with pytest.warns(UserWarning) as seen:
            result = sweep(catalog['E5'].system, 2, 6)
        messages = ' '.join(str(w.message) for w in seen)
        assert 'not unique' in messages and 'incomplete' in messages
        assert result.norms is None

    def test_series_list_has_no_system_poles(self, catalog):
        f = catalog['E3'].system.components[0]
        with pytest.warns(UserWarning, match='SystemModel'):
            result = sweep([f], 2, 6, m=(1,))
        assert result.reference is None
        assert result.records[0].kind == 'pade'


class TestLacunaryRows:

    def test_denominator_rate_at_the_factorials(self, catalog):
        result = sweep(catalog['E1'].system, 6, 60)
        est = denominator_rate(result, window=(6, 60))
        assert est.used == (6, 7, 8, 24, 25, 26)
        assert est.fitted_rate == pytest.approx(0.5, abs=0.02)

    def test_scalar_denominator_rate(self, catalog):
        result = sweep(catalog['E3'].system, 2, 60)
        est = denominator_rate(result)
        assert est.used == (2, 3, 6, 7, 24, 25)
        assert est.fitted_rate == pytest.approx(0.5, abs=1e-2)

    def test_censored_window(self, catalog):
        result = sweep(catalog['E1'].system, 30, 60)
        with pytest.raises(NoiseFloorError):
            denominator_rate(result)
        est = denominator_rate(result, allow_floor=True)
        assert est.method == 'noise_floor'
        assert est.used == ()

    def test_clusters(self, context, catalog):
        result = sweep(catalog['E1'].system, 30, 60)
        clusters = cluster_zeros(result)
        assert len(clusters) == 2
        assert abs(clusters[0].center - 0.5) < 1e-6
        assert abs(clusters[1].center - 2) < 1e-6
        assert all(c.multiplicity == 1 and c.drift < 1e-6 for c in clusters)

    def test_scalar_error_on_a_circle(self, context, catalog):
        ex = catalog['E3']
        result = sweep(ex.system, 60, 125)
        est = convergence_on_circle(result, ex.system, 0, 0.75)
        assert est.predicted == pytest.approx(0.75)
        assert 0.70 <= est.limsup <= 0.80


class TestCircle:

    def test_rational_pair(self, context, catalog):
        ex = catalog['E2']
        result = sweep(ex.system, 10, 50)
        est = convergence_on_circle(result, ex.system, 0, 1.5, samples=64)
        assert est.predicted == pytest.approx(0.75)
        assert est.fitted_rate == pytest.approx(0.75, abs=0.05)

    def test_window_selects_records(self, context, catalog):
        ex = catalog['E2']
        result = sweep(ex.system, 10, 30)
        est = convergence_on_circle(result, ex.system, 0, 1.5, samples=32, window=(20, 30))
        assert est.window == (20, 30)
        with pytest.raises(InputError, match='no record'):
            convergence_on_circle(result, ex.system, 0, 1.5, samples=32, window=(40, 50))

    @pytest.mark.parametrize('k, radius, samples', [(0, 1.0001, 64), (0, 2.5, 64), (0, 1.5, 8), (2, 1.5, 64), (0, 0, 64)])
    def test_rejects(self, catalog, e2_sweep, k, radius, samples):
        ex = catalog['E2']
        with pytest.raises(InputError):
            convergence_on_circle(e2_sweep, ex.system, k, radius, samples=samples)


class TestClusters:

    def test_rational_pair(self, context, e2_sweep):
        clusters = cluster_zeros(e2_sweep)
        assert [c.multiplicity for c in clusters] == [1, 1]
        assert abs(clusters[0].center - 1) < 1e-6 and abs(clusters[1].center - 3) < 1e-6
        assert all(c.drift < 1e-6 for c in clusters)
        assert not any(abs(c.center - 2) < 0.1 for c in clusters)
        assert sorted(clusters[0].members) == list(range(21, 41))

    def test_close_tracks_merge(self, context):
        # a double pole gives two tracks that one cluster absorbs
        f = rational_model([(2, [0, 1])], context)
        result = sweep([f], 4, 12, m=(2,), reference=None)
        clusters = cluster_zeros(result, merge_radius=1e-3)
        assert len(clusters) == 1
        assert clusters[0].multiplicity == 2
        assert abs(clusters[0].center - 2) < 1e-6

    def test_empty(self, context):
        f = rational_model([(1, [-1])], context)
        result = sweep([f], 3, 5, m=(0,), reference=None)
        assert cluster_zeros(result) == []


class TestInverse:

    def test_scalar_row_with_model(self, context, catalog, e3_records):
        f = catalog['E3'].system.components[0]
        limit = Polynomial(['-1/2', 1], context)
        report = inverse_diagnosis(e3_records, model=f, limit=limit, theta=0.5)
        assert report.diagnosis == '0 < R_0(f) < inf'
        assert report.consistent
        assert report.R0_truth == 0.5
        assert report.branch == 'exact_poles'
        assert report.containment and report.limit_degree_ok and report.limit_nonzero_at_origin

    def test_without_model(self, e3_records):
        report = inverse_diagnosis(e3_records)
        assert report.diagnosis == '0 < R_0(f) < inf'
        assert report.R0_truth is None and report.branch is None

    def test_no_branch_without_theta(self, context, catalog, e3_records):
        f = catalog['E3'].system.components[0]
        report = inverse_diagnosis(e3_records, model=f, limit=Polynomial(['-1/2', 1], context))
        assert report.branch is None and report.containment

    def test_extended_radius_branch(self, context, e3_records):
        g = rational_model([(1, [1]), (-1, [1])], context)
        limit = Polynomial([-1, 0, 1], context)
        report = inverse_diagnosis(e3_records, model=g, limit=limit, theta=0.5)
        assert report.branch == 'extended_radius'

    def test_inconsistent_branch(self, context, e3_records):
        g = rational_model([(1, [1]), (-1, [1])], context)
        report = inverse_diagnosis(e3_records, model=g, limit=Polynomial(['-1/2', 1], context), theta=0.5)
        assert report.branch == 'inconsistent'

    def test_accepts_a_sweep(self, e2_sweep):
        report = inverse_diagnosis(e2_sweep)
        assert report.diagnostics.m == 2 and report.diagnostics.m_star == 1

    @pytest.mark.parametrize('name', ['E1', 'E2', 'E3', 'E4', 'E6'])
    def test_component_dichotomy(self, catalog, name):
        system = catalog[name].system
        limit = enumerate_system_poles(system).Q_limit
        checks = component_dichotomy(system, limit)
        assert len(checks) == system.d
        assert all(c.holds for c in checks)

    def test_dichotomy_fails_for_a_wrong_limit(self, context):
        g = rational_model([(1, [1]), (-1, [1])], context)
        (check,) = component_dichotomy(SystemModel([g], (1,)), Polynomial(['-1/2', 1], context))
        assert not check.exact_poles and not check.holds


class TestSerialization:

    def test_rate_json(self, context, e2_sweep):
        est = denominator_rate(e2_sweep, predicted=0.5)
        out = json.loads(json.dumps(rate_to_json(est, context)))
        assert out['method'] == 'regression'
        assert out['window'] == [2, 40]
        assert set(out) >= {'fitted_rate', 'limsup', 'used', 'excluded', 'predicted'}
        for key in ('fitted_rate', 'limsup', 'residual', 'stderr'):
            assert float(out[key]) == pytest.approx(getattr(est, key), rel=1e-15)
        assert out['predicted'] == '0.5'

    def test_rate_strings(self, context):
        assert rate_to_str(None, context) is None
        assert rate_to_str(0.25, context) == '0.25'
        assert rate_to_str(float('inf'), context) == 'inf'
        assert float(rate_to_str(0.1, context)) == 0.1

    def test_cluster_json(self, context, e2_sweep):
        out = [cluster_to_json(c, context) for c in cluster_zeros(e2_sweep)]
        assert [round(float(c['re'])) for c in out] == [1, 3]
        assert out[0]['n'] == list(range(21, 41))

    def test_inverse_json(self, context, catalog, e3_records):
        f = catalog['E3'].system.components[0]
        report = inverse_diagnosis(e3_records, model=f, limit=Polynomial(['-1/2', 1], context), theta=0.5)
        out = json.loads(json.dumps(inverse_to_json(report, context)))
        assert out['branch'] == 'exact_poles'
        assert out['diagnostics']['sufficient_condition_from'] == 3

    def test_csv_rows(self, e2_sweep):
        rows = sweep_to_csv_rows(e2_sweep)
        header = rows[0]
        assert tuple(header[:len(SWEEP_CSV_COLUMNS)]) == SWEEP_CSV_COLUMNS
        assert header[len(SWEEP_CSV_COLUMNS):] == ['abs_dQ0_at_0', 'abs_dQ1_at_0']
        assert len(rows) == 40
        assert all(len(row) == len(header) for row in rows)
        assert len(json.loads(rows[1][header.index('zeros')])) == 2
