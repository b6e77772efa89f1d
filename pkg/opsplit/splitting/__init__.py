# SPDX-License-Identifier: MIT

from .errors import *
from .schemes import *
from .stability import *

__all__ = ()
__all__ += errors.__all__
__all__ += schemes.__all__
__all__ += stability.__all__
