"""Assignment graph between pattern blocks and users.

A pattern is authorised iff its block-user graph has a matching covering
every block.  ``AssignmentState`` keeps that graph and a matching up to date
while blocks are added or extended one step at a time, with an exact undo.
Each block keeps at most ``cap`` candidate users: with at most ``cap``
blocks, a block with ``cap`` candidates can always be matched.
"""

from __future__ import annotations

from .core import Instance, Pattern

CACHE_LIMIT = 16384


class BlockEdgeCache:
    """Capped candidate lists keyed by block bit set, wiped when full."""

    def __init__(self, limit: int = CACHE_LIMIT):
        self.limit = limit
        self.records: dict[int, tuple[int, ...]] = {}
        self.clears = 0

    def get(self, mask: int):
        return self.records.get(mask)

    def put(self, mask: int, users: tuple[int, ...]) -> None:
        if len(self.records) >= self.limit:
            self.records.clear()
            self.clears += 1
        self.records[mask] = users

    def __len__(self):
        return len(self.records)


def candidate_users(inst: Instance, block: int, cap: int,
                    cache: BlockEdgeCache | None = None) -> tuple[int, ...]:
    """Users authorised for every step of ``block`` (a bit set), ascending, at most ``cap``."""
    if cache is not None:
        hit = cache.get(block)
        if hit is not None:
            return hit
    out = []
    if cap > 0:
        for u, m in enumerate(inst.auth_masks):
            if m & block == block:
                out.append(u)
                if len(out) == cap:
                    break
    users = tuple(out)
    if cache is not None:
        cache.put(block, users)
    return users


def is_authorised(inst: Instance, pattern: Pattern,
                  cap: int | None = None) -> tuple[bool, dict[int, int] | None]:
    """Maximum matching test from scratch.

    Returns ``(True, witness)`` with ``witness`` mapping block index (in the
    pattern's canonical order) to user, or ``(False, None)``.
    """
    if cap is None:
        cap = inst.n
    edges = [candidate_users(inst, m, cap) for m in pattern.masks]
    owner: dict[int, int] = {}

    def augment(b, seen):
        for u in edges[b]:
            if u in seen:
                continue
            seen.add(u)
            if u not in owner or augment(owner[u], seen):
                owner[u] = b
                return True
        return False

    for b in range(len(edges)):
        if not augment(b, set()):
            return False, None
    return True, {b: u for u, b in owner.items()}


def witness_plan(pattern: Pattern, witness: dict[int, int]) -> dict[int, int]:
    plan = {}
    for b, m in enumerate(pattern.masks):
        for s in range(m.bit_length()):
            if m >> s & 1:
                plan[s] = witness[b]
    return plan


class AssignmentState:
    """Blocks, capped edge lists and a matching, maintained incrementally.

    Every push records enough to be reverted by ``pop``; pushes and pops must
    nest like a depth-first search.
    """

    def __init__(self, inst: Instance, cap: int | None = None,
                 cache: BlockEdgeCache | None = None):
        self.inst = inst
        self.cap = inst.k if cap is None else cap
        self.cache = BlockEdgeCache() if cache is None else cache
        self.blocks: list[int] = []
        self.edges: list[tuple[int, ...]] = []
        self.match_block: list[int] = []          # block -> user or -1
        self.match_user: dict[int, int] = {}      # user -> block
        self._trail: list[tuple] = []
        self._frames: list[tuple] = []
        self.edge_visits = 0

    def _set_block(self, b, u):
        self._trail.append(("b", b, self.match_block[b]))
        self.match_block[b] = u

    def _set_user(self, u, b):
        self._trail.append(("u", u, self.match_user.get(u, -1)))
        if b < 0:
            self.match_user.pop(u, None)
        else:
            self.match_user[u] = b

    def _augment(self, b, seen):
        for u in self.edges[b]:
            self.edge_visits += 1
            if u in seen:
                continue
            seen.add(u)
            owner = self.match_user.get(u, -1)
            if owner < 0 or self._augment(owner, seen):
                self._set_user(u, b)
                self._set_block(b, u)
                return True
        return False

    def push_new_block(self, s: int) -> bool:
        mask = 1 << s
        self._frames.append(("new", len(self._trail)))
        self.blocks.append(mask)
        self.edges.append(candidate_users(self.inst, mask, self.cap, self.cache))
        self.match_block.append(-1)
        return self._augment(len(self.blocks) - 1, set())

    def push_extend_block(self, b: int, s: int) -> bool:
        old_mask, old_edges = self.blocks[b], self.edges[b]
        self._frames.append(("ext", len(self._trail), b, old_mask, old_edges))
        mask = old_mask | (1 << s)
        self.blocks[b] = mask
        self.edges[b] = candidate_users(self.inst, mask, self.cap, self.cache)
        u = self.match_block[b]
        if u >= 0:
            self._set_user(u, -1)
            self._set_block(b, -1)
        return self._augment(b, set())

    def pop(self) -> None:
        if not self._frames:
            raise IndexError("pop on an empty assignment stack")
        frame = self._frames.pop()
        mark = frame[1]
        while len(self._trail) > mark:
            side, idx, old = self._trail.pop()
            if side == "b":
                self.match_block[idx] = old
            elif old < 0:
                self.match_user.pop(idx, None)
            else:
                self.match_user[idx] = old
        if frame[0] == "new":
            self.blocks.pop()
            self.edges.pop()
            self.match_block.pop()
        else:
            _, _, b, old_mask, old_edges = frame
            self.blocks[b] = old_mask
            self.edges[b] = old_edges

    @property
    def depth(self) -> int:
        return len(self._frames)

    def is_full(self) -> bool:
        return all(u >= 0 for u in self.match_block)

    def snapshot(self):
        return (tuple(self.blocks), tuple(self.edges), tuple(self.match_block),
                tuple(sorted(self.match_user.items())))

    def plan(self) -> dict[int, int]:
        out = {}
        for b, m in enumerate(self.blocks):
            for s in range(m.bit_length()):
                if m >> s & 1:
                    out[s] = self.match_block[b]
        return out
