"""
Command line front end.

    pademiner approx --example E1 --n 20
    pademiner sweep --example E1 --n 2..60 --out runs/e1
    pademiner system-poles --example E2
    pademiner rates --example E3 --n 60..125 --circle 0.75
    pademiner diagnose --example E3 --n 2..60
    pademiner examples --export examples_json

Every command writes <out>.json (metadata, full run configuration,
results); approx and sweep also write <out>.csv. Exit codes: 0 success,
1 usage or input error, 2 computation failure.
"""
import os
import sys
import csv
import warnings
from argparse import ArgumentParser
from dataclasses import dataclass, asdict

from . import constants as pmc
from .numerics import PrecisionContext
from .series import SystemModel, load_system, radius_R0, model_to_json
from .approximants import (HERMITE_PADE, PADE, INCOMPLETE_PADE, NORMALIZATIONS, CSV_COLUMNS,
                           hermite_pade, pade, incomplete_pade, record_to_json, record_to_csv_row)
from .system_poles import (EXACT, QUADRATURE, enumerate_system_poles, algebraically_independent,
                           pole_set_to_json, predicted_theta, star_radii)
from .row_analysis import (REFERENCES, sweep, denominator_rate, derivative_rates, convergence_on_circle,
                           cluster_zeros, inverse_diagnosis, component_dichotomy, rate_to_json, rate_to_str,
                           cluster_to_json, inverse_to_json, sweep_to_csv_rows)
from .testbed import examples, example, export_examples
from .tools.utils import FrontendUtils, InputError, ComputationError, _JSON

COMMANDS = ('approx', 'sweep', 'system-poles', 'rates', 'diagnose', 'examples')
KINDS = (HERMITE_PADE, PADE, INCOMPLETE_PADE)


class _Parser(ArgumentParser):
    """argparse exits with 2 on usage errors; 2 is reserved for computation failures here."""
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, '%s: error: %s\n'%(self.prog, message))


def add_parser_args(parser,
                    source=False, n=False, m=False, precision=False, jobs=False, out=False,
                    window=False, circle=False, samples=False, component=False, xi=False,
                    s_bar=False, m_star=False, kind=False, normalization=False, reference=False,
                    method=False, min_tail=False, export=False, quiet=True):

    def set_default(val, default):
        if isinstance(val, bool):
            return default
        else:
            return val

    if source:
        group = parser.add_mutually_exclusive_group(required=True)
        group.add_argument('-i', '--input', default=None, type=str,
                           help="System JSON file with 'components' and 'm'")
        group.add_argument('-e', '--example', default=None, type=str,
                           help="Builtin example id, one of %s"%', '.join(ex.id for ex in examples()))
    if n:
        d0 = set_default(n, '2..60')
        parser.add_argument('-n', '--n', default=d0, type=str,
                            help="Row index or closed range 'lo..hi'. DEFAULTS to '%s'"%d0)
    if m:
        parser.add_argument('-m', '--m', default=None, type=str,
                            help="Multi-index as comma separated integers, overrides the one of the input. DEFAULTS to the input's")
    if precision:
        d0 = set_default(precision, pmc.DEFAULT_PRECISION_BITS)
        parser.add_argument('-p', '--precision-bits', default=d0, type=int,
                            help="Significand bits of the working precision. DEFAULTS to %d"%d0)
    if jobs:
        d0 = set_default(jobs, 1)
        parser.add_argument('-j', '--jobs', default=d0, type=int,
                            help="Worker processes for row sweeps. DEFAULTS to %d"%d0)
    if out:
        d0 = set_default(out, None)
        parser.add_argument('-o', '--out', default=d0, type=str,
                            help="Output path without extension. DEFAULTS to 'pademiner_<command>'")
    if window:
        parser.add_argument('-w', '--window', default=None, type=str,
                            help="Closed n range 'lo..hi' used by rate fits. DEFAULTS to the whole sweep")
    if circle:
        parser.add_argument('-c', '--circle', default=None, type=str,
                            help="Radius of the circle where f_k - P_k/Q is measured. When the error is large only at sparse n "
                                 "(lacunary tails) the limsup needs a long row, e.g. --n 60..125 for E3 at 0.75. "
                                 "DEFAULTS to no circle check")
    if samples:
        d0 = set_default(samples, pmc.DEFAULT_SAMPLES)
        parser.add_argument('-s', '--samples', default=d0, type=int,
                            help="Points on the sampling circle. DEFAULTS to %d"%d0)
    if component:
        d0 = set_default(component, 0)
        parser.add_argument('-k', '--component', default=d0, type=int,
                            help="Component index k (0-based). DEFAULTS to %d"%d0)
    if xi:
        parser.add_argument('-x', '--xi', default=None, type=str,
                            help="Point for derivative rates, 're' or 're,im'. DEFAULTS to no derivative check")
    if s_bar:
        d0 = set_default(s_bar, 0)
        parser.add_argument('--s-bar', default=d0, type=int,
                            help="Highest derivative order at xi. DEFAULTS to %d"%d0)
    if m_star:
        parser.add_argument('--m-star', default=None, type=int,
                            help="Interpolation conditions of incomplete approximants. DEFAULTS to min m_k")
    if kind:
        d0 = set_default(kind, HERMITE_PADE)
        parser.add_argument('--kind', default=d0, type=str, choices=KINDS,
                            help="Approximant type. DEFAULTS to '%s'"%d0)
    if normalization:
        d0 = set_default(normalization, 'monic')
        parser.add_argument('--normalization', default=d0, type=str, choices=NORMALIZATIONS,
                            help="Denominator normalization. DEFAULTS to '%s'"%d0)
    if reference:
        d0 = set_default(reference, 'system_poles')
        parser.add_argument('--reference', default=d0, type=str, choices=REFERENCES,
                            help="Limit denominator the norms are measured against. DEFAULTS to '%s'"%d0)
    if method:
        d0 = set_default(method, EXACT)
        parser.add_argument('--method', default=d0, type=str, choices=[EXACT, QUADRATURE],
                            help="How principal coefficients are read. DEFAULTS to '%s'"%d0)
    if min_tail:
        parser.add_argument('--min-tail', default=None, type=int,
                            help="Shortest trailing run of records used for S and G. DEFAULTS to half the records")
    if export:
        parser.add_argument('--export', default=None, type=str,
                            help="Directory where every example is written as system JSON. DEFAULTS to no export")
    if quiet:
        parser.add_argument('-q', '--quiet', action='store_true',
                            help="Do not print the banner and progress bars")
    return parser


def build_parser():
    parser = _Parser(prog='pademiner', description='Rows of Hermite-Pade approximants, system poles and convergence rates')
    sub = parser.add_subparsers(dest='command', required=True)
    common = dict(source=True, m=True, precision=True, out=True)
    add_parser_args(sub.add_parser('approx', help='one approximant of type (n, m)'),
                    n='20', kind=True, normalization=True, component=True, m_star=True, **common)
    add_parser_args(sub.add_parser('sweep', help='a row n = lo..hi with norms and zero clusters'),
                    n=True, jobs=True, normalization=True, reference=True, xi=True, s_bar=True, **common)
    add_parser_args(sub.add_parser('system-poles', help='system poles, radii, theta and independence'),
                    method=True, **common)
    add_parser_args(sub.add_parser('rates', help='denominator, derivative and circle convergence rates'),
                    n=True, jobs=True, window=True, circle=True, samples=True, component=True,
                    xi=True, s_bar=True, reference=True, **common)
    add_parser_args(sub.add_parser('diagnose', help='zero set diagnostics and radius of convergence'),
                    n=True, jobs=True, component=True, m_star=True, min_tail=True, **common)
    add_parser_args(sub.add_parser('examples', help='list and export the builtin examples'),
                    precision=True, out=True, export=True)
    return parser


#*************
#CONFIGURATION
#*************
def parse_range(text, name='n'):
    """'20' -> (20, 20), '2..60' -> (2, 60)."""
    try:
        if '..' in text:
            lo, hi = text.split('..', 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise InputError(text, "%s must be an integer or a range 'lo..hi'"%name)
    if lo > hi:
        raise InputError(text, 'empty %s range'%name)
    return lo, hi


def _parse_m(text):
    try:
        return tuple(int(x) for x in text.split(','))
    except ValueError:
        raise InputError(text, 'm must be comma separated integers')


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; embedded in its output."""
    command: str
    input: str = None
    example: str = None
    m: tuple = None
    n_range: tuple = None
    precision_bits: int = pmc.DEFAULT_PRECISION_BITS
    jobs: int = 1
    out: str = None
    window: tuple = None
    circle: str = None
    samples: int = pmc.DEFAULT_SAMPLES
    component: int = 0
    xi: str = None
    s_bar: int = 0
    m_star: int = None
    kind: str = HERMITE_PADE
    normalization: str = 'monic'
    reference: str = 'system_poles'
    method: str = EXACT
    min_tail: int = None
    export: str = None
    quiet: bool = False

    @classmethod
    def from_namespace(cls, args):
        values = dict(vars(args))
        command = values.pop('command')
        n = values.pop('n', None)
        window = values.pop('window', None)
        m = values.pop('m', None)
        config = cls(command=command,
                     n_range=parse_range(n) if n is not None else None,
                     window=parse_range(window, 'window') if window is not None else None,
                     m=_parse_m(m) if m is not None else None,
                     **values)
        config.validate()
        return config

    @property
    def outfile(self):
        return self.out if self.out is not None else 'pademiner_%s'%self.command.replace('-', '_')

    def validate(self):
        if self.command not in COMMANDS:
            raise InputError(self.command, 'unknown command')
        if self.command != 'examples' and (self.input is None) == (self.example is None):
            raise InputError('input', 'give exactly one of --input and --example')
        if self.precision_bits < pmc.MIN_PRECISION_BITS:
            raise InputError(self.precision_bits, 'precision must be >= %d bits'%pmc.MIN_PRECISION_BITS)
        if self.jobs < 1:
            raise InputError(self.jobs, 'jobs must be >= 1')
        if self.samples < pmc.MIN_SAMPLES:
            raise InputError(self.samples, 'at least %d samples are required'%pmc.MIN_SAMPLES)
        if self.component < 0:
            raise InputError(self.component, 'component must be nonnegative')
        if self.s_bar < 0:
            raise InputError(self.s_bar, 's-bar must be nonnegative')
        if self.m_star is not None and self.m_star < 1:
            raise InputError(self.m_star, 'm-star must be >= 1')
        if self.n_range is not None and self.n_range[0] < 0:
            raise InputError(self.n_range, 'n must be nonnegative')
        if self.command == 'approx' and self.n_range[0] != self.n_range[1]:
            raise InputError(self.n_range, 'approx takes a single n')
        if self.window is not None and self.n_range is not None:
            lo, hi = self.n_range
            if self.window[0] < lo or self.window[1] > hi:
                raise InputError(self.window, 'window must lie within n = %d..%d'%(lo, hi))

    def as_json(self):
        out = asdict(self)
        for key in ('m', 'n_range', 'window'):
            if out[key] is not None:
                out[key] = list(out[key])
        return out


#*******
#HELPERS
#*******
def _context(config):
    return PrecisionContext(config.precision_bits)


def _system(config, context):
    if config.example is not None:
        system = example(config.example, context).system
    else:
        system = load_system(config.input, context)
    if config.m is not None:
        system = SystemModel(system.components, config.m)
    return system


def _component(config, system):
    if config.component >= system.d:
        raise InputError(config.component, 'the system has %d components'%system.d)
    return system.components[config.component]


def _writer(config, command, context):
    return _JSON(command, context.describe(), config=config.as_json(), outfile=config.outfile+'.json')


def _write_csv(path, rows):
    folder = os.path.dirname(path)
    if folder and not os.path.isdir(folder):
        os.makedirs(folder)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        csv.writer(f).writerows(rows)


def _banner(config):
    if not config.quiet:
        FrontendUtils._print_logo()
        FrontendUtils._break_line()


def _sweep(config, system):
    lo, hi = config.n_range
    points = [_parse_point(config.xi, system.context)] if config.xi is not None else []
    return sweep(system, lo, hi, normalization=config.normalization, reference=config.reference,
                 derivative_points=points, derivative_orders=config.s_bar if points else 0,
                 jobs=config.jobs, verbose=not config.quiet)


def _parse_point(text, context):
    parts = text.split(',')
    if len(parts) == 1:
        return context.parse_complex(parts[0])
    if len(parts) == 2:
        return context.parse_complex(parts)
    raise InputError(text, "points are 're' or 're,im'")


#********
#COMMANDS
#********
def cmd_approx(config):
    context = _context(config)
    system = _system(config, context)
    n = config.n_range[0]
    if config.kind == HERMITE_PADE:
        record = hermite_pade(system, n, normalization=config.normalization)
    elif config.kind == PADE:
        record = pade(_component(config, system), n, system.m[config.component], normalization=config.normalization)
    else:
        m_star = config.m_star if config.m_star is not None else min(system.m)
        record = incomplete_pade(_component(config, system), n, system.total, m_star,
                                 normalization=config.normalization)
    out = _writer(config, 'approx', context)
    out.json_results = {'record': record_to_json(record)}
    out.make_outfile()
    _write_csv(config.outfile+'.csv', [list(CSV_COLUMNS), record_to_csv_row(record)])
    return out


def cmd_sweep(config):
    _banner(config)
    context = _context(config)
    system = _system(config, context)
    result = _sweep(config, system)
    out = _writer(config, 'sweep', context)
    out.json_results = {
        'records': [record_to_json(r) for r in result.records],
        'reference': result.reference.to_pairs() if result.reference is not None else None,
        'reference_source': result.reference_source,
        'norms': [context.to_str(x) for x in result.norms] if result.norms is not None else None,
        'clusters': [cluster_to_json(c, context) for c in cluster_zeros(result)],
    }
    out.make_outfile()
    _write_csv(config.outfile+'.csv', sweep_to_csv_rows(result))
    return out


def cmd_system_poles(config):
    context = _context(config)
    system = _system(config, context)
    independence = algebraically_independent(system)
    pole_set = enumerate_system_poles(system, method=config.method)
    results = {
        'system': {'m': list(system.m), 'components': [model_to_json(f) for f in system.components]},
        'independent': independence.independent,
        'witness': [context.to_pair(c) for c in independence.witness] if independence.witness is not None else None,
        'pole_set': pole_set_to_json(pole_set, context),
        'R0': [context.to_str(radius_R0(f)) for f in system.components],
    }
    if pole_set.complete:
        results['star_radii'] = []
        for k in range(system.d):
            R, R_star = star_radii(system, pole_set, k)
            results['star_radii'].append({'R': context.to_str(R), 'R_star': context.to_str(R_star)})
    out = _writer(config, 'system-poles', context)
    out.json_results = results
    out.make_outfile()
    return out


def cmd_rates(config):
    _banner(config)
    context = _context(config)
    system = _system(config, context)
    result = _sweep(config, system)
    pole_set = enumerate_system_poles(system)
    theta = float(predicted_theta(pole_set)) if pole_set.complete else None
    results = {'predicted_theta': rate_to_str(theta, context)}
    if result.norms is not None:
        est = denominator_rate(result, window=config.window, allow_floor=True, predicted=theta)
        results['denominator'] = rate_to_json(est, context)
    else:
        warnings.warn('no reference denominator, the denominator rate is skipped')
    if config.xi is not None:
        rates = derivative_rates(result, result.points[0], up_to_order=config.s_bar,
                                 window=config.window, allow_floor=True)
        results['derivatives'] = {'rate': rate_to_str(rates.rate, context),
                                  'per_order': [rate_to_json(e, context) for e in rates.per_order]}
    if config.circle is not None:
        _component(config, system)
        est = convergence_on_circle(result, system, config.component, config.circle,
                                    samples=config.samples, window=config.window, pole_set=pole_set,
                                    allow_floor=True, verbose=not config.quiet)
        results['circle'] = dict(rate_to_json(est, context), radius=config.circle, component=config.component)
    out = _writer(config, 'rates', context)
    out.json_results = results
    out.make_outfile()
    return out


def cmd_diagnose(config):
    _banner(config)
    context = _context(config)
    system = _system(config, context)
    lo, hi = config.n_range
    pole_set = enumerate_system_poles(system)
    limit = pole_set.Q_limit if pole_set.complete else None
    theta = predicted_theta(pole_set) if pole_set.complete else None
    if system.d == 1:
        f = system.components[0]
        m = system.total
        m_star = config.m_star if config.m_star is not None else m
        if not lo >= m >= m_star:
            raise InputError((lo, m, m_star), 'need n >= m >= m-star')
        records = [incomplete_pade(f, n, m, m_star) for n in range(lo, hi+1)]
        report = inverse_diagnosis(records, model=f, limit=limit, theta=theta, min_tail=config.min_tail)
    else:
        result = sweep(system, lo, hi, reference=None, jobs=config.jobs, verbose=not config.quiet)
        report = inverse_diagnosis(result, model=None, min_tail=config.min_tail)
    results = {'inverse': inverse_to_json(report, context)}
    if limit is not None:
        results['dichotomy'] = [{'k': c.k, 'exact_poles': c.exact_poles,
                                 'R0_after_division': context.to_str(c.R0_after_division),
                                 'R_m': context.to_str(c.R_m), 'holds': c.holds}
                                for c in component_dichotomy(system, limit)]
    out = _writer(config, 'diagnose', context)
    out.json_results = results
    out.make_outfile()
    return out


def cmd_examples(config):
    context = _context(config)
    catalog = examples(context)
    paths = export_examples(config.export, context) if config.export is not None else []
    out = _writer(config, 'examples', context)
    out.json_results = {
        'examples': [{'id': ex.id, 'title': ex.title, 'm': list(ex.system.m), 'notes': ex.notes,
                      'tags': list(ex.tags), 'ground_truth': ex.ground_truth} for ex in catalog],
        'exported': paths,
    }
    out.make_outfile()
    return out


_DISPATCH = {
    'approx': cmd_approx,
    'sweep': cmd_sweep,
    'system-poles': cmd_system_poles,
    'rates': cmd_rates,
    'diagnose': cmd_diagnose,
    'examples': cmd_examples,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_namespace(args)
        _DISPATCH[config.command](config)
    except InputError as err:
        sys.stderr.write('pademiner: input error: %s\n'%err)
        return 1
    except ComputationError as err:
        sys.stderr.write('pademiner: computation failed: %s\n'%err)
        return 2
    return 0


if __name__ == '__main__':
    sys.exit(main())
