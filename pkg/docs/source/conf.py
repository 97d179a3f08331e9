#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# PcoPycker documentation build configuration file

import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join("..", "..")))

from pcopycker import __version__  # noqa: E402


extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'PcoPycker'
copyright = '2016, PcoPycker developers'
author = 'PcoPycker developers'

version = '.'.join(__version__.split('.')[:2])
release = __version__

exclude_patterns = []
pygments_style = 'sphinx'
autodoc_member_order = 'bysource'

on_rtd = os.environ.get('READTHEDOCS', None) == 'True'

if not on_rtd:  # only import and set the theme if we're building docs locally
    import sphinx_rtd_theme
    html_theme = 'sphinx_rtd_theme'
    html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]

html_static_path = ['_static']
htmlhelp_basename = 'PcoPyckerdoc'

latex_documents = [
    (master_doc, 'PcoPycker.tex', 'PcoPycker Documentation', author, 'manual'),
]

man_pages = [
    (master_doc, 'pcopycker', 'PcoPycker Documentation', [author], 1)
]
