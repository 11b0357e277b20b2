"""
Catalog of example systems with known system poles, radii and rates,
and an independent series multiplication oracle.

Ground truth values are strings ('1/2', 'inf') read with
`~pademiner.numerics.PrecisionContext.parse_real`, so they do not depend
on the working precision.
"""
import os
import json
from dataclasses import dataclass, field

from .numerics import PrecisionContext, Polynomial
from .series import (CoefficientSeries, MeromorphicModel, SystemModel, EntireTail, PrincipalPart,
                     lacunary_atom, power_series_atom, taylor_coefficients, system_to_json)
from .tools.utils import InputError


@dataclass(frozen=True)
class NamedExample:
    id: str
    title: str
    system: SystemModel
    ground_truth: dict
    notes: str = ''
    tags: tuple = field(default_factory=tuple)


def _model(context, poles, atoms=()):
    parts = [PrincipalPart(context.parse_complex(loc), tuple(context.parse_complex(c) for c in coeffs))
             for loc, coeffs in poles]
    tail = EntireTail((), tuple((atom, (context.mpc(1),)) for atom in atoms))
    return MeromorphicModel(parts, tail, context)


def _pole(xi, tau, r):
    R_cum = []
    for value in r:
        R_cum.append(value if not R_cum else min(R_cum[-1], value, key=_order_key))
    return {'xi': xi, 'tau': tau, 'r': list(r), 'R_cum': R_cum, 'R_xi': R_cum[-1]}


def _order_key(text):
    if text == 'inf':
        return float('inf')
    num, _, den = text.partition('/')
    return float(num)/float(den or 1)


def examples(context=None):
    """
    E1  1/(1-2z) + L(z) + 1/(z-2) and 1/(1-2z) + L(z), m = (1, 1)
    E2  1/(z-1) + 1/(z-2) and 1/(z-3), m = (1, 1)
    E3  1/(z-1/2) + L(z), m = 1
    E4  1/(z-1) + 1/(z-2) and 1/(z-1) - 1/(z-2), m = (1, 1)
    E5  (g, g) with g = 1/(z-1/2) + L(z), m = (1, 1)
    E6  1/(z-1/2) + 1/(z+1) + sum z**n/(3**n (n+1)**2), m = 2

    L(z) is the lacunary series with coefficient 1 at every k!.
    """
    context = context if context is not None else PrecisionContext()
    lac = lacunary_atom(context)
    half = [('1/2', ['-1/2'])]
    out = []

    f1 = _model(context, half + [('2', ['1'])], [lac])
    f2 = _model(context, half, [lac])
    out.append(NamedExample('E1', 'two lacunary series sharing the pole 1/2', SystemModel([f1, f2], (1, 1)), {
        'poles': [_pole('1/2', 1, ['1']), _pole('2', 1, ['inf'])],
        'excluded': [],
        'theta': '1/2',
        'Q_limit': ['1', '-5/2', '1'],
        'complete': True,
        'independent': True,
        'R0': ['1/2', '1/2'],
        'star_radii': [('1', '1'), ('1', '1')],
    }, notes='2 lies beyond the natural boundary |z| = 1 yet f1 - f2 = 1/(z-2) makes it a system pole.',
        tags=('lacunary',)))

    g1 = _model(context, [('1', ['1']), ('2', ['1'])])
    g2 = _model(context, [('3', ['1'])])
    out.append(NamedExample('E2', 'pole at 2 tied to the pole at 1', SystemModel([g1, g2], (1, 1)), {
        'poles': [_pole('1', 1, ['2']), _pole('3', 1, ['inf'])],
        'excluded': ['2'],
        'theta': '1/2',
        'Q_limit': ['3', '-4', '1'],
        'complete': True,
        'independent': True,
        'R0': ['1', '3'],
        'star_radii': [('2', '2'), ('inf', 'inf')],
    }, notes='no combination removes the pole at 1 while keeping the pole at 2.', tags=('rational',)))

    h = _model(context, [('1/2', ['1'])], [lac])
    out.append(NamedExample('E3', 'scalar series with one pole inside the natural boundary', SystemModel([h], (1,)), {
        'poles': [_pole('1/2', 1, ['1'])],
        'excluded': [],
        'theta': '1/2',
        'Q_limit': ['-1/2', '1'],
        'complete': True,
        'independent': True,
        'R0': ['1/2'],
        'R_m': ['1'],
        'star_radii': [('1', '1')],
    }, notes='R_1(f) = 1, one pole in D_1(f).', tags=('lacunary', 'scalar')))

    a1 = _model(context, [('1', ['1']), ('2', ['1'])])
    a2 = _model(context, [('1', ['1']), ('2', ['-1'])])
    out.append(NamedExample('E4', 'independent rational pair', SystemModel([a1, a2], (1, 1)), {
        'poles': [_pole('1', 1, ['inf']), _pole('2', 1, ['inf'])],
        'excluded': [],
        'theta': '0',
        'Q_limit': ['2', '-3', '1'],
        'complete': True,
        'independent': True,
        'R0': ['1', '1'],
        'star_radii': [('inf', 'inf'), ('inf', 'inf')],
    }, tags=('rational',)))

    g = _model(context, [('1/2', ['1'])], [lac])
    out.append(NamedExample('E5', 'dependent pair', SystemModel([g, g], (1, 1)), {
        'poles': [_pole('1/2', 1, ['1'])],
        'excluded': [],
        'theta': None,
        'Q_limit': ['-1/2', '1'],
        'complete': False,
        'independent': False,
        'witness': ['1', '-1'],
        'R0': ['1/2', '1/2'],
        'star_radii': None,
    }, notes='f1 - f2 = 0, only one system pole out of |m| = 2.', tags=('lacunary', 'dependent')))

    ps = power_series_atom(3, context, exponent=2)
    e = _model(context, [('1/2', ['1']), ('-1', ['1'])], [ps])
    out.append(NamedExample('E6', 'scalar series with two poles, m = 2', SystemModel([e], (2,)), {
        'poles': [_pole('1/2', 1, ['3']), _pole('-1', 1, ['3'])],
        'excluded': [],
        'theta': '1/3',
        'Q_limit': ['-1/2', '1/2', '1'],
        'complete': True,
        'independent': True,
        'R0': ['1/2'],
        'R_m': ['3'],
        'star_radii': [('3', '3')],
    }, notes='same poles and radii through associated_system (f, z f) with m = (1, 1).', tags=('scalar',)))
    return out


def example(name, context=None):
    for ex in examples(context):
        if ex.id == name:
            return ex
    raise InputError(name, 'unknown example, use one of %s'%', '.join(ex.id for ex in examples(context)))


def series_product_oracle(q, series, up_to):
    """
    Coefficients 0..up_to of q times the series, by plain convolution of
    the stream coefficients.
    """
    if isinstance(series, MeromorphicModel):
        series = taylor_coefficients(series, up_to)
    if not isinstance(q, Polynomial):
        raise InputError(q, 'q must be a Polynomial')
    phi = series.coefficients(up_to)
    mp = series.context.mp
    out = []
    for i in range(up_to+1):
        acc = mp.mpc(0)
        for j, c in enumerate(q.coefficients[:i+1]):
            acc += c*phi[i-j]
        out.append(acc)
    return CoefficientSeries.from_values(out, series.context, label='oracle')


def export_examples(directory, context=None):
    """Write every example as <id>.json in the system schema; returns the paths."""
    if not os.path.isdir(directory):
        os.makedirs(directory)
    paths = []
    for ex in examples(context):
        path = os.path.join(directory, '%s.json'%ex.id)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(system_to_json(ex.system), f, ensure_ascii=False, indent=4)
            f.write('\n')
        paths.append(path)
    return paths
