# Configuration file for Sphinx to build our documentation to HTML.
#
import datetime

import adelicfermat

# -- Project information -----------------------------------------------------
# ref: https://www.sphinx-doc.org/en/master/usage/configuration.html#project-information
#
project = 'adelicfermat'
copyright = f"{datetime.date.today().year}, adelicfermat contributors"
author = "adelicfermat contributors"
version = '%i.%i' % adelicfermat.version_info[:2]
release = adelicfermat.__version__


# -- General Sphinx configuration --------------------------------------------
# ref: https://www.sphinx-doc.org/en/master/usage/configuration.html#general-configuration
#
extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx.ext.napoleon',
    'autodoc_traits',
    'myst_parser',
    'sphinx_copybutton',
]

root_doc = "index"
source_suffix = [".md", ".rst"]

# default_role is set for use with reStructuredText that we still need to use in
# docstrings in the autodoc_traits inspected Python module. It makes single
# backticks around text, like `mahler_measure`, behave as in typical Markdown.
default_role = "literal"

myst_enable_extensions = ["dollarmath"]


# -- Options for intersphinx extension ---------------------------------------
# ref: https://www.sphinx-doc.org/en/master/usage/extensions/intersphinx.html#configuration
#
intersphinx_mapping = {
    "python": ("https://docs.python.org/3/", None),
    "traitlets": ("https://traitlets.readthedocs.io/en/stable/", None),
    "mpmath": ("https://mpmath.org/doc/current/", None),
}

# intersphinx_disabled_reftypes set based on recommendation in
# https://docs.readthedocs.io/en/stable/guides/intersphinx.html#using-intersphinx
intersphinx_disabled_reftypes = ["*"]


# -- Options for HTML output -------------------------------------------------
# ref: https://www.sphinx-doc.org/en/master/usage/configuration.html#options-for-html-output
#
html_title = 'adelicfermat'
html_theme = 'sphinx_book_theme'
