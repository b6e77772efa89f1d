# SPDX-License-Identifier: MIT

from .block import *
from .errors import *
from .linop import *
from .matrix_io import *
from .reports import *

__all__ = ()
__all__ += block.__all__
__all__ += errors.__all__
__all__ += linop.__all__
__all__ += matrix_io.__all__
__all__ += reports.__all__
