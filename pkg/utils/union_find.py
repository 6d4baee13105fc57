from typing import Dict, Hashable, Iterable, List


class UnionFind:
    """Disjoint-set forest with path compression and union by size.

    Elements are added lazily, so keys may be any hashable (vertex ids,
    interval ids, component ids).
    """

    def __init__(self, elements: Iterable[Hashable] = ()):
        self.parent: Dict[Hashable, Hashable] = {}
        self.size: Dict[Hashable, int] = {}
        self.num_components = 0
        for x in elements:
            self.add(x)

    def add(self, x: Hashable) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1
            self.num_components += 1

    def __contains__(self, x: Hashable) -> bool:
        return x in self.parent

    def find(self, x: Hashable) -> Hashable:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        # compress the path so every node points at the root
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: Hashable, b: Hashable) -> bool:
        """Merge the sets of a and b; returns False if already merged"""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.num_components -= 1
        return True

    def connected(self, a: Hashable, b: Hashable) -> bool:
        return self.find(a) == self.find(b)

    def groups(self) -> List[List[Hashable]]:
        """Sets as sorted lists, ordered by smallest member"""
        buckets: Dict[Hashable, List[Hashable]] = {}
        for x in self.parent:
            buckets.setdefault(self.find(x), []).append(x)
        return sorted((sorted(members) for members in buckets.values()), key=lambda g: g[0])
