import os
import os.path

from setuptools import setup, find_packages


root = os.path.abspath(os.path.dirname(__file__))
with open(os.path.join(root, 'README.md'), 'rb') as readme:
    long_description = readme.read().decode('utf-8')


setup(
    name='qhalab',
    packages=find_packages(exclude=['tests', 'tests.*']),
    version='0.1.0',
    description=(
        'Quantum harmonic analysis on truncated Fock and Bergman spaces.'
    ),
    long_description=long_description,
    long_description_content_type='text/markdown',
    keywords=['quantum harmonic analysis', 'toeplitz', 'fock space'],
    zip_safe=False,
    classifiers=[
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: Implementation :: CPython',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    extras_require={
        'test': [
            'pytest',
            'pytest-watch',
            'pytest-cov',
            'hypothesis',
            'click'
        ],
        'cli': [
            'click'
        ],
        'release': [
            'sphinx',
            'sphinx-click',
            'furo',
            'twine',
            'ghp-import',
            'bump2version'
        ]
    },
    install_requires=[
        'numpy>=1.20',
        'scipy>=1.7'
    ],
    python_requires='>=3.8',
    entry_points={
        'console_scripts': [
            'qhalab=qhalab.cli:cli'
        ],
        'qhalab.renderers': (
            'json = qhalab.render.json:JSONRenderer\n'
            'csv = qhalab.render.csv:CSVRenderer\n'
            'txt = qhalab.render.txt:TXTRenderer'
        ),
        'qhalab.backends': (
            'fock = qhalab.backends.fock:FockBackend\n'
            'bergman = qhalab.backends.bergman:BergmanBackend'
        )
    }
)
