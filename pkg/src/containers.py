"""Executable container catalogue.

Every implementation offers ``new()`` and ``abstract()``; the latter is its abstraction
function to the list model. Operations that may find no element return ``None``.
"""

from abc import ABC, abstractmethod
from bisect import bisect_left, insort
from collections import deque
from typing import Deque, Dict, Hashable, List, Optional, Tuple, Type

from sortedcontainers import SortedSet


Elem = Hashable
Model = Tuple[Elem, ...]


class ContainerT(ABC):
    """len, contains, is_empty, insert, clear, remove"""

    @classmethod
    def new(cls):
        return cls()

    @abstractmethod
    def abstract(self) -> Model:
        ...

    @abstractmethod
    def len(self) -> int:
        ...

    @abstractmethod
    def contains(self, x: Elem) -> bool:
        ...

    def is_empty(self) -> bool:
        return self.len() == 0

    @abstractmethod
    def insert(self, x: Elem) -> None:
        ...

    @abstractmethod
    def clear(self) -> None:
        ...

    @abstractmethod
    def remove(self, x: Elem) -> Optional[Elem]:
        ...

    def __repr__(self) -> str:
        return f"{type(self).__name__}({list(self.abstract())})"


class IndexableT(ABC):
    """Positional access in model order"""

    @abstractmethod
    def first(self) -> Optional[Elem]:
        ...

    @abstractmethod
    def last(self) -> Optional[Elem]:
        ...

    @abstractmethod
    def nth(self, n: int) -> Optional[Elem]:
        ...


class StackT(ABC):

    @abstractmethod
    def push(self, x: Elem) -> None:
        ...

    @abstractmethod
    def pop(self) -> Optional[Elem]:
        ...


def interfaces_of(cls: type) -> Tuple[str, ...]:
    """Names of the interface ABCs a container class implements"""
    return tuple(base.__name__ for base in (ContainerT, IndexableT, StackT) if issubclass(cls, base))


def _at(items, n: int) -> Optional[Elem]:
    return items[n] if 0 <= n < len(items) else None


# =======================================================#
# Sequences

class Vec(ContainerT, IndexableT):
    """Growable array"""

    def __init__(self):
        self.items: List[Elem] = []

    def abstract(self) -> Model:
        return tuple(self.items)

    def len(self) -> int:
        return len(self.items)

    def contains(self, x: Elem) -> bool:
        return x in self.items

    def insert(self, x: Elem) -> None:
        self.items.append(x)

    def clear(self) -> None:
        self.items.clear()

    def remove(self, x: Elem) -> Optional[Elem]:
        if x in self.items:
            self.items.remove(x)
            return x
        return None

    def first(self) -> Optional[Elem]:
        return _at(self.items, 0)

    def last(self) -> Optional[Elem]:
        return _at(self.items, len(self.items) - 1)

    def nth(self, n: int) -> Optional[Elem]:
        return _at(self.items, n)


class _Node:
    __slots__ = ("value", "prev", "next")

    def __init__(self, value: Elem):
        self.value = value
        self.prev: Optional["_Node"] = None
        self.next: Optional["_Node"] = None


class LinkedList(ContainerT, IndexableT):
    """Doubly linked list; inserts go to the back"""

    def __init__(self):
        self.head: Optional[_Node] = None
        self.tail: Optional[_Node] = None
        self.size = 0

    def _nodes(self):
        node = self.head
        while node is not None:
            yield node
            node = node.next

    def abstract(self) -> Model:
        return tuple(node.value for node in self._nodes())

    def len(self) -> int:
        return self.size

    def contains(self, x: Elem) -> bool:
        return any(node.value == x for node in self._nodes())

    def insert(self, x: Elem) -> None:
        node = _Node(x)
        if self.tail is None:
            self.head = self.tail = node
        else:
            node.prev = self.tail
            self.tail.next = node
            self.tail = node
        self.size += 1

    def clear(self) -> None:
        self.head = self.tail = None
        self.size = 0

    def _unlink(self, node: _Node) -> None:
        if node.prev is None:
            self.head = node.next
        else:
            node.prev.next = node.next
        if node.next is None:
            self.tail = node.prev
        else:
            node.next.prev = node.prev
        self.size -= 1

    def remove(self, x: Elem) -> Optional[Elem]:
        for node in self._nodes():
            if node.value == x:
                self._unlink(node)
                return x
        return None

    def first(self) -> Optional[Elem]:
        return self.head.value if self.head is not None else None

    def last(self) -> Optional[Elem]:
        return self.tail.value if self.tail is not None else None

    def nth(self, n: int) -> Optional[Elem]:
        if not 0 <= n < self.size:
            return None
        # walk from the nearer end
        if n < self.size // 2:
            node = self.head
            for _ in range(n):
                node = node.next
        else:
            node = self.tail
            for _ in range(self.size - 1 - n):
                node = node.prev
        return node.value


# =======================================================#
# Sets

class HashSet(ContainerT):
    """Hash table; abstraction collects the elements and sorts them"""

    def __init__(self):
        self.items = set()

    def abstract(self) -> Model:
        return tuple(sorted(self.items))

    def len(self) -> int:
        return len(self.items)

    def contains(self, x: Elem) -> bool:
        return x in self.items

    def insert(self, x: Elem) -> None:
        self.items.add(x)

    def clear(self) -> None:
        self.items.clear()

    def remove(self, x: Elem) -> Optional[Elem]:
        if x in self.items:
            self.items.discard(x)
            return x
        return None


class BTreeSet(ContainerT, IndexableT):
    """Ordered balanced structure; abstraction is the in-order traversal"""

    def __init__(self):
        self.items = SortedSet()

    def abstract(self) -> Model:
        return tuple(self.items)

    def len(self) -> int:
        return len(self.items)

    def contains(self, x: Elem) -> bool:
        return x in self.items

    def insert(self, x: Elem) -> None:
        self.items.add(x)

    def clear(self) -> None:
        self.items.clear()

    def remove(self, x: Elem) -> Optional[Elem]:
        if x in self.items:
            self.items.discard(x)
            return x
        return None

    def first(self) -> Optional[Elem]:
        return self.items[0] if self.items else None

    def last(self) -> Optional[Elem]:
        return self.items[-1] if self.items else None

    def nth(self, n: int) -> Optional[Elem]:
        return self.items[n] if 0 <= n < len(self.items) else None


# =======================================================#
# Custom vectors

class SortedVec(Vec):
    """Array kept in ascending order on insert"""

    def insert(self, x: Elem) -> None:
        insort(self.items, x)

    def contains(self, x: Elem) -> bool:
        i = bisect_left(self.items, x)
        return i < len(self.items) and self.items[i] == x

    def remove(self, x: Elem) -> Optional[Elem]:
        i = bisect_left(self.items, x)
        if i < len(self.items) and self.items[i] == x:
            del self.items[i]
            return x
        return None


class _LazyVec(Vec):
    """Vec that appends on insert and normalizes before any observation"""

    def __init__(self):
        super().__init__()
        self.dirty = False

    def _normalized(self) -> List[Elem]:
        raise NotImplementedError

    def _normalize(self) -> None:
        if self.dirty:
            self.items = self._normalized()
            self.dirty = False

    def abstract(self) -> Model:
        return tuple(self._normalized()) if self.dirty else tuple(self.items)

    def insert(self, x: Elem) -> None:
        self.items.append(x)
        self.dirty = True

    def clear(self) -> None:
        super().clear()
        self.dirty = False

    def len(self) -> int:
        self._normalize()
        return super().len()

    def contains(self, x: Elem) -> bool:
        return x in self.items

    def remove(self, x: Elem) -> Optional[Elem]:
        self._normalize()
        return super().remove(x)

    def first(self) -> Optional[Elem]:
        self._normalize()
        return super().first()

    def last(self) -> Optional[Elem]:
        self._normalize()
        return super().last()

    def nth(self, n: int) -> Optional[Elem]:
        self._normalize()
        return super().nth(n)


class LazySortedVec(_LazyVec):
    """Array sorted on access"""

    def _normalized(self) -> List[Elem]:
        return sorted(self.items)


class UniqueVec(Vec):
    """Array that ignores inserts of elements already present"""

    def insert(self, x: Elem) -> None:
        if x not in self.items:
            self.items.append(x)


class LazyUniqueVec(_LazyVec):
    """Array de-duplicated on access, keeping each element's first occurrence"""

    def _normalized(self) -> List[Elem]:
        return list(dict.fromkeys(self.items))


# =======================================================#
# Stacks

class Stack(ContainerT, StackT):
    """push and insert append; pop takes the newest element"""

    def __init__(self):
        self.items: List[Elem] = []

    def abstract(self) -> Model:
        return tuple(self.items)

    def len(self) -> int:
        return len(self.items)

    def contains(self, x: Elem) -> bool:
        return x in self.items

    def insert(self, x: Elem) -> None:
        self.push(x)

    def clear(self) -> None:
        self.items.clear()

    def remove(self, x: Elem) -> Optional[Elem]:
        if x in self.items:
            self.items.remove(x)
            return x
        return None

    def push(self, x: Elem) -> None:
        self.items.append(x)

    def pop(self) -> Optional[Elem]:
        return self.items.pop() if self.items else None


class Queue(ContainerT, StackT):
    """push and insert add at the front; pop takes the oldest element from the back"""

    def __init__(self):
        self.items: Deque[Elem] = deque()

    def abstract(self) -> Model:
        return tuple(self.items)

    def len(self) -> int:
        return len(self.items)

    def contains(self, x: Elem) -> bool:
        return x in self.items

    def insert(self, x: Elem) -> None:
        self.push(x)

    def clear(self) -> None:
        self.items.clear()

    def remove(self, x: Elem) -> Optional[Elem]:
        if x in self.items:
            self.items.remove(x)
            return x
        return None

    def push(self, x: Elem) -> None:
        self.items.appendleft(x)

    def pop(self) -> Optional[Elem]:
        return self.items.pop() if self.items else None


IMPLEMENTATIONS: Dict[str, Type[ContainerT]] = {
    cls.__name__: cls
    for cls in sorted(
        (Vec, LinkedList, HashSet, BTreeSet, SortedVec, LazySortedVec, UniqueVec, LazyUniqueVec, Stack, Queue),
        key=lambda c: c.__name__,
    )
}


def get_implementation(name: str) -> Type[ContainerT]:
    try:
        return IMPLEMENTATIONS[name]
    except KeyError:
        raise KeyError(f"no implementation named '{name}'") from None
