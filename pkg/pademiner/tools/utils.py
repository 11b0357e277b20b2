from .._version import __version__

import os
import sys
import json
import copy


class InputError(Exception):
    """Exception raised for input errors.

    Parameters
    ----------
    expression : str
        Input expression where error occurred

    message : str
        Output description of the error
    """
    def __init__(self, expression, message):
        super().__init__(expression, message)
        self.expression = expression
        self.message = message

    def __str__(self):
        return '%s --> %s'%(self.expression, self.message)


class ComputationError(Exception):
    """Exception raised when a numerical procedure fails on valid input.

    Parameters
    ----------
    expression : str
        Quantity or point where the failure occurred

    message : str
        Output description of the failure
    """
    def __init__(self, expression, message):
        super().__init__(expression, message)
        self.expression = expression
        self.message = message

    def __str__(self):
        return '%s --> %s'%(self.expression, self.message)


class ConvergenceError(ComputationError):
    """Root iteration exhausted its step budget."""


class EvaluationError(ComputationError):
    """A function could not be evaluated at a requested point."""


class NoiseFloorError(ComputationError):
    """Every value offered to a rate fit lies below the precision noise floor."""


class NotSystemPoleError(ComputationError):
    """No admissible combination isolates the requested pole at the requested order."""


class DegenerateSolutionError(ComputationError):
    """The homogeneous solve returned a numerically zero denominator."""


def annotate(err, n):
    """Return a copy of err whose expression records the row index n."""
    new = copy.copy(err)
    new.expression = 'n=%d: %s'%(n, err.expression)
    return new


class FrontendUtils(object):
    """
    Make outputs prettier
    """
    path_icons = os.path.dirname(os.path.realpath(__file__))+'/../icons/'

    @staticmethod
    def _progress_bar(percent=0, width=50):
        left = width * int(percent) // 100
        right = width - left
        print('\r[', '#' * left, ' ' * right, ']', ' %.0f%%'%percent, sep='', end='')
        sys.stdout.flush()

    @staticmethod
    def _break_line(init='', border='*', middle='=', end='\n', width=100):
        print('\r', init, border, middle * width, border, sep='', end=end)

    @staticmethod
    def _print_logo(filename=path_icons+'logo.txt'):
        with open(filename, 'r') as logo:
            print(logo.read())


class _JSON(object):
    """
    Collects metadata and results of a run and writes them as one JSON document.

    Parameters
    ----------
    command : str
        Name of the command that produced the results.

    precision : dict
        Working precision, as returned by `~pademiner.numerics.PrecisionContext.describe`.

    config : dict, optional
        Full run configuration, embedded for reproducibility.

    outfile : str, optional
        Output path.
    """
    def __init__(self, command, precision, config={}, outfile='pademiner.json'):
        self._json_metadata = {
            'v_pademiner': __version__,
            'command': command,
            'precision': dict(precision),
        }
        self._json_config = {}
        self._json_results = {}
        self._outfile = outfile
        self.json_config = config

    @property
    def json_metadata(self):
        return self._json_metadata

    @json_metadata.setter
    def json_metadata(self, new):
        self._json_metadata.update(new)

    @property
    def json_config(self):
        return self._json_config

    @json_config.setter
    def json_config(self, new):
        self._json_config.update(new)

    @property
    def json_results(self):
        return self._json_results

    @json_results.setter
    def json_results(self, new):
        self._json_results.update(new)

    @property
    def outfile(self):
        return self._outfile

    @outfile.setter
    def outfile(self, new):
        self._outfile = new

    def as_dict(self, keys=['metadata', 'config', 'results']):
        master_dict = {
            'metadata': self.json_metadata,
            'config': self.json_config,
            'results': self.json_results,
        }
        return {key: master_dict[key] for key in keys}

    def make_outfile(self, keys=['metadata', 'config', 'results']):
        folder = os.path.dirname(self.outfile)
        if folder and not os.path.isdir(folder):
            os.makedirs(folder)
        with open(self.outfile, 'w', encoding='utf-8') as f:
            json.dump(self.as_dict(keys), f, ensure_ascii=False, indent=4)
            f.write('\n')

