"""Longest-matching-block sequence matcher producing equal/replace/insert/delete opcodes.

Same recursion as difflib's SequenceMatcher with junk and auto-junk disabled:
find the longest common block (earliest in `old`, then earliest in `new`),
recurse on the left and right remainders, merge adjacent blocks, and classify
the gaps.
"""
from enum import Enum
from typing import Dict, Hashable, List, NamedTuple, Sequence, Tuple


class OpTag(str, Enum):
    EQUAL = "equal"
    REPLACE = "replace"
    INSERT = "insert"
    DELETE = "delete"


class Opcode(NamedTuple):
    tag: OpTag
    old_start: int
    old_end: int
    new_start: int
    new_end: int

    @property
    def old_range(self) -> range:
        return range(self.old_start, self.old_end)

    @property
    def new_range(self) -> range:
        return range(self.new_start, self.new_end)


class Block(NamedTuple):
    old: int
    new: int
    size: int


def _index_new(new: Sequence[Hashable]) -> Dict[Hashable, List[int]]:
    positions: Dict[Hashable, List[int]] = {}
    for j, item in enumerate(new):
        positions.setdefault(item, []).append(j)
    return positions


def find_longest_match(
    old: Sequence[Hashable],
    positions: Dict[Hashable, List[int]],
    alo: int,
    ahi: int,
    blo: int,
    bhi: int,
) -> Block:
    """Longest block old[i:i+k] == new[j:j+k] inside the window; ties -> smallest i, then smallest j"""
    best_i, best_j, best_size = alo, blo, 0
    j2len: Dict[int, int] = {}
    for i in range(alo, ahi):
        new_j2len: Dict[int, int] = {}
        for j in positions.get(old[i], ()):
            if j < blo:
                continue
            if j >= bhi:
                break
            k = new_j2len[j] = j2len.get(j - 1, 0) + 1
            if k > best_size:
                best_i, best_j, best_size = i - k + 1, j - k + 1, k
        j2len = new_j2len
    return Block(best_i, best_j, best_size)


def matching_blocks(old: Sequence[Hashable], new: Sequence[Hashable]) -> List[Block]:
    positions = _index_new(new)
    queue: List[Tuple[int, int, int, int]] = [(0, len(old), 0, len(new))]
    blocks: List[Block] = []
    while queue:
        alo, ahi, blo, bhi = queue.pop()
        block = find_longest_match(old, positions, alo, ahi, blo, bhi)
        if block.size:
            blocks.append(block)
            if alo < block.old and blo < block.new:
                queue.append((alo, block.old, blo, block.new))
            if block.old + block.size < ahi and block.new + block.size < bhi:
                queue.append((block.old + block.size, ahi, block.new + block.size, bhi))
    blocks.sort()

    merged: List[Block] = []
    for block in blocks:
        if merged and merged[-1].old + merged[-1].size == block.old and merged[-1].new + merged[-1].size == block.new:
            last = merged.pop()
            block = Block(last.old, last.new, last.size + block.size)
        merged.append(block)
    merged.append(Block(len(old), len(new), 0))
    return merged


def match_sequences(old: Sequence[Hashable], new: Sequence[Hashable]) -> List[Opcode]:
    opcodes: List[Opcode] = []
    i = j = 0
    for block in matching_blocks(old, new):
        if i < block.old and j < block.new:
            opcodes.append(Opcode(OpTag.REPLACE, i, block.old, j, block.new))
        elif i < block.old:
            opcodes.append(Opcode(OpTag.DELETE, i, block.old, j, block.new))
        elif j < block.new:
            opcodes.append(Opcode(OpTag.INSERT, i, block.old, j, block.new))
        i, j = block.old + block.size, block.new + block.size
        if block.size:
            opcodes.append(Opcode(OpTag.EQUAL, block.old, i, block.new, j))
    return opcodes


def apply_opcodes(old: Sequence[Hashable], new: Sequence[Hashable], opcodes: Sequence[Opcode]) -> List[Hashable]:
    """Rebuild `new` from `old` and the opcodes (new-side content is read from `new`)"""
    out: List[Hashable] = []
    for op in opcodes:
        if op.tag == OpTag.EQUAL:
            out.extend(old[op.old_start:op.old_end])
        elif op.tag in (OpTag.REPLACE, OpTag.INSERT):
            out.extend(new[op.new_start:op.new_end])
    return out
