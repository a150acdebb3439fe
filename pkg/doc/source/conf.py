# Sphinx configuration of the firstnature documentation.
#
# The API reference is generated from the package docstrings on every build, the narrative pages are
# markdown under overview/.

import os
import sys

sys.path.insert(0, os.path.abspath('../..'))

# -- Project -----------------------------------------------------------------

project = 'firstnature'
copyright = '2026, firstnature developers'
author = 'firstnature developers'

exec(open('../../firstnature/version.py').read())
version = __version__  # noqa F821
release = __version__  # noqa F821

# -- Extensions --------------------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon',
    'sphinx_autodoc_typehints',
    'sphinxcontrib.apidoc',
    'myst_parser'
]

# one page per module, tests left out
apidoc_module_dir = '../../firstnature'
apidoc_output_dir = 'api'
apidoc_excluded_paths = ['**/tests/*']
apidoc_module_first = True
apidoc_separate_modules = True

# heavy or compiled imports are not needed to render docstrings
autodoc_mock_imports = ['sklearn', 'dill', 'matplotlib', 'shapely', 'scipy', 'tqdm']
autodoc_member_order = 'bysource'
typehints_fully_qualified = False

# docstrings are numpy style
napoleon_google_docstring = False
napoleon_numpy_docstring = True
napoleon_include_init_with_doc = True
napoleon_use_rtype = False

templates_path = ['_templates']
source_suffix = ['.rst', '.md']
master_doc = 'index'
exclude_patterns = ['_build']

# -- HTML --------------------------------------------------------------------

html_theme = 'sphinx_rtd_theme'
htmlhelp_basename = 'firstnaturedoc'

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable/', None),
                       'pandas': ('https://pandas.pydata.org/docs/', None)}
