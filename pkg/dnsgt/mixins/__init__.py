from .base import MixinBase
from .cool_nameable import CoolNameable
from .hashable import Hashable
from .identifiable import Identifiable
from .serialisable import Serialisable


__all__ = ("CoolNameable", "Hashable", "Identifiable", "MixinBase", "Serialisable")
