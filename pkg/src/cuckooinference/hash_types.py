"""Type aliases shared by the library.
SlotArray is the (n, 2, d) int64 array of hash outputs held by an Instance."""
from typing import Literal, TypeAlias

from numpy import int64
from numpy.typing import NDArray

Side: TypeAlias = Literal[0, 1]

SlotArray: TypeAlias = NDArray[int64]

SlotVector: TypeAlias = tuple[int, ...]

# (side, slot) -> item
Occupancy: TypeAlias = dict[tuple[int, int], int]
