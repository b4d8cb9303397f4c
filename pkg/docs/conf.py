# -*- coding: utf-8 -*-
#
# Sphinx configuration for the Boundary-CF documentation.
#
# ------------------------------------------------


# imports
# -------
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(os.path.dirname(__file__))))

from boundary_cf import __author__, __pkg__, __version__


# general
# -------
extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.imgmath',
]

# docstrings use the "Arguments:" / "Returns:" sections
napoleon_google_docstring = True
napoleon_numpy_docstring = False
napoleon_use_param = True
napoleon_use_rtype = True

autodoc_member_order = 'bysource'

source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = ['_build']
pygments_style = 'sphinx'

project = __pkg__
author = __author__
copyright = __author__
version = __version__
release = __version__


# html
# ----
html_theme = 'flask'
html_sidebars = {
    '**': ['localtoc.html', 'relations.html', 'sourcelink.html', 'searchbox.html'],
}
htmlhelp_basename = 'boundary-cf-doc'


# manual pages
# ------------
man_pages = [
    ('index', 'boundary-cf', u'{} Documentation'.format(__pkg__), [__author__], 1),
]
