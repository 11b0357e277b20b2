import os

import pytest

from pademiner.numerics import Polynomial
from pademiner.series import load_system, rational_model, taylor_coefficients
from pademiner.testbed import example, examples, export_examples, series_product_oracle
from pademiner.tools.utils import InputError


class TestCatalog:

    def test_ids(self, catalog):
        assert sorted(catalog) == ['E1', 'E2', 'E3', 'E4', 'E5', 'E6']

    def test_ground_truth_keys(self, catalog):
        for ex in catalog.values():
            for key in ('poles', 'excluded', 'theta', 'Q_limit', 'complete', 'independent', 'R0'):
                assert key in ex.ground_truth, (ex.id, key)
            assert len(ex.ground_truth['R0']) == ex.system.d

    def test_limit_degree_matches_the_poles(self, catalog):
        for ex in catalog.values():
            orders = sum(p['tau'] for p in ex.ground_truth['poles'])
            assert len(ex.ground_truth['Q_limit']) == orders + 1

    def test_lookup(self, context):
        assert example('E3', context).system.m == (1,)
        with pytest.raises(InputError, match='unknown example'):
            example('E9', context)

    def test_default_context(self):
        assert len(examples()) == 6


class TestOracle:

    def test_product_with_a_pole(self, context):
        f = rational_model([(2, [1])], context)
        prod = series_product_oracle(Polynomial([-2, 1], context), f, 10)
        # (z - 2)/(z - 2) = 1
        assert abs(prod.coefficient(0) - 1) <= 1e-120
        assert all(abs(prod.coefficient(i)) <= 1e-120 for i in range(1, 11))
        assert prod.label == 'oracle'
        with pytest.raises(InputError):
            prod.coefficient(11)

    def test_accepts_a_stream(self, context, catalog):
        f = catalog['E3'].system.components[0]
        stream = taylor_coefficients(f, 8)
        a = series_product_oracle(Polynomial([0, 1], context), stream, 8)
        for i in range(1, 9):
            assert a.coefficient(i) == f.taylor_coefficient(i-1)

    def test_rejects_non_polynomials(self, context, catalog):
        with pytest.raises(InputError):
            series_product_oracle([1, 2], catalog['E3'].system.components[0], 4)


class TestExport:

    def test_round_trip(self, context, catalog, tmp_path):
        paths = export_examples(str(tmp_path/'catalog'), context)
        assert sorted(os.path.basename(p) for p in paths) == ['E%d.json'%i for i in range(1, 7)]
        for path in paths:
            name = os.path.basename(path)[:-5]
            original = catalog[name].system
            back = load_system(path, context)
            assert back.m == original.m
            for f, g in zip(original.components, back.components):
                assert len(f.poles()) == len(g.poles())
                assert f.tail.kind == g.tail.kind
                for n in (0, 1, 5, 24, 40):
                    assert abs(f.taylor_coefficient(n) - g.taylor_coefficient(n)) <= 1e-100*max(1, abs(f.taylor_coefficient(n)))
