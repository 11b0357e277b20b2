"""A setuptools based setup module.

See:
https://packaging.python.org/guides/distributing-packages-using-setuptools/
https://github.com/pypa/sampleproject
"""

# Always prefer setuptools over distutils
from setuptools import setup
import pathlib
import re

# Get version
VERSIONFILE="pademiner/_version.py"
verstrline = open(VERSIONFILE, "rt").read()
VSRE = r"^__version__ = ['\"]([^'\"]*)['\"]"
mo = re.search(VSRE, verstrline, re.M)
if mo:
    verstr = mo.group(1)
else:
    raise RuntimeError("Unable to find version string in %s." % (VERSIONFILE,))
#*************

here = pathlib.Path(__file__).parent.resolve()

# Get the long description from the README file
long_description = (here / 'README.md').read_text(encoding='utf-8')

setup(
    name='pademiner',  # Required
    version=verstr,  # Required
    description='High-precision Hermite-Pade approximants, system poles and convergence-rate diagnostics',  # Optional
    long_description=long_description,  # Optional
    long_description_content_type='text/markdown',  # Optional (see note above)
    classifiers=[  # Optional
        'Development Status :: 4 - Beta',
        'Topic :: Scientific/Engineering :: Mathematics',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3 :: Only',
    ],
    keywords='pade, hermite-pade, rational approximation, poles, convergence',  # Optional
    packages=['pademiner', 'pademiner.tools'],  # Required
    python_requires='>=3.7, <4',
    install_requires=
    [
        'numpy>=1.18',
        'scipy>=1.5',
        'mpmath>=1.2',
        'scikit-learn',
    ],
    extras_require={
        'tests': ['pytest>=6'],
    },
    package_data={  # Optional
        'pademiner':
        [
            'icons/logo.txt',
        ],
    },
    entry_points={
        'console_scripts': [
            'pademiner=pademiner.cli:main',
        ],
    },
)
