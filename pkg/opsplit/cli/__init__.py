# SPDX-License-Identifier: MIT

from .commands import *
from .config import *
from .errors import *
from .main import build_parser, main

__all__ = ()
__all__ += commands.__all__
__all__ += config.__all__
__all__ += errors.__all__
__all__ += ("build_parser", "main")
