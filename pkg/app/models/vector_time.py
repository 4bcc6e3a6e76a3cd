"""
Vector time values.

A VectorTime maps dense thread indices to non-negative counters. Indices past
the stored width read as 0, and trailing zeros are trimmed so that equality
and hashing ignore the width a value happened to be built with.
"""
from itertools import zip_longest
from typing import Iterable, Optional, Tuple


def _trim(components: Tuple[int, ...]) -> Tuple[int, ...]:
    end = len(components)
    while end and components[end - 1] == 0:
        end -= 1
    return components[:end]


class VectorTime:
    """Immutable vector timestamp with ⊥-extension"""

    __slots__ = ("_c",)

    def __init__(self, components: Iterable[int] = ()):
        values = tuple(int(n) for n in components)
        if any(n < 0 for n in values):
            raise ValueError(f"vector time components must be >= 0: {values}")
        self._c = _trim(values)

    @classmethod
    def _wrap(cls, components: Tuple[int, ...]) -> "VectorTime":
        vt = cls.__new__(cls)
        vt._c = components
        return vt

    @classmethod
    def bottom(cls) -> "VectorTime":
        return BOTTOM

    @property
    def width(self) -> int:
        return len(self._c)

    @property
    def components(self) -> Tuple[int, ...]:
        return self._c

    def is_bottom(self) -> bool:
        return not self._c

    def get(self, u: int) -> int:
        return self._c[u] if u < len(self._c) else 0

    def leq(self, other: "VectorTime") -> bool:
        mine, theirs = self._c, other._c
        if len(mine) > len(theirs):
            # trimmed, so the last component of `mine` is non-zero
            return False
        for a, b in zip(mine, theirs):
            if a > b:
                return False
        return True

    def join(self, other: "VectorTime") -> "VectorTime":
        if not other._c:
            return self
        if not self._c:
            return other
        merged = tuple(max(a, b) for a, b in zip_longest(self._c, other._c, fillvalue=0))
        return VectorTime._wrap(merged)

    def with_component(self, u: int, n: int) -> "VectorTime":
        if n < 0:
            raise ValueError(f"component value must be >= 0, got {n}")
        if u < 0:
            raise ValueError(f"thread index must be >= 0, got {u}")
        width = max(len(self._c), u + 1)
        values = list(self._c) + [0] * (width - len(self._c))
        values[u] = n
        return VectorTime._wrap(_trim(tuple(values)))

    def concurrent_with(self, other: "VectorTime") -> bool:
        return not self.leq(other) and not other.leq(self)

    def render(self, width: Optional[int] = None) -> str:
        """Debug rendering `[n0,n1,...]`, zero-padded to `width` if given"""
        size = max(len(self._c), width or 0)
        return "[" + ",".join(str(self.get(i)) for i in range(size)) + "]"

    def __le__(self, other: "VectorTime") -> bool:
        return self.leq(other)

    def __or__(self, other: "VectorTime") -> "VectorTime":
        return self.join(other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorTime):
            return NotImplemented
        return self._c == other._c

    def __hash__(self) -> int:
        return hash(self._c)

    def __repr__(self) -> str:
        return f"VectorTime({self.render()})"


BOTTOM = VectorTime._wrap(())


def leq(v1: VectorTime, v2: VectorTime) -> bool:
    """Pointwise ≤ over the union of widths"""
    return v1.leq(v2)


def join(v1: VectorTime, v2: VectorTime) -> VectorTime:
    """Pointwise max"""
    return v1.join(v2)


def with_component(v: VectorTime, u: int, n: int) -> VectorTime:
    """V[u := n]"""
    return v.with_component(u, n)


def join_all(values: Iterable[VectorTime]) -> VectorTime:
    result = BOTTOM
    for value in values:
        result = result.join(value)
    return result
