# Sphinx configuration for the qhalab documentation.
# https://www.sphinx-doc.org/en/master/usage/configuration.html

project = 'qhalab'
copyright = '2026, the qhalab developers'
author = 'the qhalab developers'

# Kept in step with setup.py by bump2version.
release = '0.1.0'

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx_click'
]

templates_path = ['_templates']
exclude_patterns = []

html_theme = 'furo'
html_static_path = ['_static']

autodoc_inherit_docstrings = False
autodoc_member_order = 'bysource'
