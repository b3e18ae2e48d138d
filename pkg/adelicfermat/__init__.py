from ._version import __version__, version_info  # noqa
from .adelic import *  # noqa
from .fermat import *  # noqa
from .mahler import *  # noqa
from .polycore import *  # noqa
