# SPDX-License-Identifier: MIT

from .errors import *
from .feedback import *
from .grid import *
from .inhom import *

__all__ = ()
__all__ += errors.__all__
__all__ += feedback.__all__
__all__ += grid.__all__
__all__ += inhom.__all__
