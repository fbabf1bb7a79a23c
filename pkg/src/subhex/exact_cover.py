"""Dancing-links exact cover with budgets, streaming and checkpoints.

The node mesh lives in flat integer arrays (left/right/up/down/column/row per
node).  The search itself is an explicit-stack state machine compiled with
numba; it returns to Python whenever it finds a solution, exhausts the tree
or hits a node limit, and can be resumed from the exact same state.  That is
what makes solution streaming, node budgets and on-disk checkpoints cheap.
"""

from __future__ import annotations

import enum
import json
import math
import time
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .errors import IsolatedPoint, TooLarge
from .geometry import IncidenceGeometry

# return codes of the compiled search
_SOLUTION, _COMPLETE, _LIMIT = 0, 1, 2
# phases of the state machine
_ENTER, _TRY, _BACKTRACK, _DONE = 0, 1, 2, 3

CHUNK_NODES = 1 << 22


class Status(str, enum.Enum):
    COMPLETE = "Complete"
    BUDGET_EXHAUSTED = "BudgetExhausted"
    STOPPED = "Stopped"


@dataclass(frozen=True)
class ExactCoverInstance:
    num_columns: int
    rows: tuple[tuple[int, ...], ...]
    metadata: str = ""

    def __post_init__(self) -> None:
        rows = tuple(tuple(sorted({int(c) for c in row})) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        for i, row in enumerate(rows):
            if not row:
                raise ValueError(f"row {i} is empty")
            if row[0] < 0 or row[-1] >= self.num_columns:
                raise ValueError(f"row {i} has a column outside 0..{self.num_columns - 1}")
        if len(set(rows)) != len(rows):
            raise ValueError("instance has duplicate rows")

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def to_dict(self) -> dict:
        return {"num_columns": self.num_columns, "rows": [list(r) for r in self.rows], "metadata": self.metadata}

    @classmethod
    def from_dict(cls, data: dict) -> ExactCoverInstance:
        return cls(int(data["num_columns"]), tuple(tuple(r) for r in data["rows"]), str(data.get("metadata", "")))

    def is_cover(self, solution: Sequence[int]) -> bool:
        """Independent validator: do the chosen rows partition the columns?"""
        seen = np.zeros(self.num_columns, dtype=np.int64)
        for r in solution:
            seen[list(self.rows[r])] += 1
        return bool((seen == 1).all())


@dataclass(frozen=True)
class SearchBudget:
    max_nodes: int | None = None
    max_solutions: int | None = None
    wall_clock_limit: float | None = None

    def __post_init__(self) -> None:
        for name in ("max_nodes", "max_solutions", "wall_clock_limit"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive when given")


UNLIMITED = SearchBudget()


@dataclass
class SearchOutcome:
    status: Status
    solutions_found: int
    nodes_expanded: int
    solutions: list[tuple[int, ...]] | None = None
    wall_seconds: float = 0.0

    @property
    def complete(self) -> bool:
        return self.status is Status.COMPLETE


_DEBRUIJN = 0x03F79D71B4CB0A89
_DEBRUIJN_TABLE = np.zeros(64, dtype=np.int64)
for _i in range(64):
    _DEBRUIJN_TABLE[(((1 << _i) * _DEBRUIJN) & (2**64 - 1)) >> 58] = _i


# Columns of each size are tracked in per-size bitsets (bit c = column node c),
# so "smallest column, lowest index" costs a short word scan instead of a
# pass over every live column.

@njit(cache=True)
def _bucket_remove(c, size, B, cnt):
    B[size, c >> 6] &= ~(np.uint64(1) << np.uint64(c & 63))
    cnt[size] -= 1


@njit(cache=True)
def _bucket_add(c, size, B, cnt):
    B[size, c >> 6] |= np.uint64(1) << np.uint64(c & 63)
    cnt[size] += 1


@njit(cache=True)
def _cover(c, L, R, U, D, C, S, B, cnt):
    _bucket_remove(c, S[c], B, cnt)
    L[R[c]] = L[c]
    R[L[c]] = R[c]
    i = D[c]
    while i != c:
        j = R[i]
        while j != i:
            U[D[j]] = U[j]
            D[U[j]] = D[j]
            col = C[j]
            _bucket_remove(col, S[col], B, cnt)
            S[col] -= 1
            _bucket_add(col, S[col], B, cnt)
            j = R[j]
        i = D[i]


@njit(cache=True)
def _uncover(c, L, R, U, D, C, S, B, cnt):
    i = U[c]
    while i != c:
        j = L[i]
        while j != i:
            col = C[j]
            _bucket_remove(col, S[col], B, cnt)
            S[col] += 1
            _bucket_add(col, S[col], B, cnt)
            U[D[j]] = j
            D[U[j]] = j
            j = L[j]
        i = U[i]
    L[R[c]] = c
    R[L[c]] = c
    _bucket_add(c, S[c], B, cnt)


@njit(cache=True)
def _choose(B, cnt, table):
    """Smallest live column, lowest index among ties; returns (column, size)."""
    for size in range(cnt.shape[0]):
        if cnt[size] > 0:
            row = B[size]
            for w in range(row.shape[0]):
                word = row[w]
                if word != 0:
                    low = word & (~word + np.uint64(1))
                    bit = table[(low * np.uint64(0x03F79D71B4CB0A89)) >> np.uint64(58)]
                    return w * 64 + bit, size
    return 0, -1


@njit(cache=True)
def _search(L, R, U, D, C, S, B, cnt, table, choice, colchoice, state, node_limit):
    level = state[0]
    phase = state[1]
    nodes = state[2]
    while True:
        if phase == _ENTER:
            if R[0] == 0:
                phase = _BACKTRACK
                state[0] = level
                state[1] = phase
                state[2] = nodes
                return _SOLUTION
            best, size = _choose(B, cnt, table)
            if size == 0:
                phase = _BACKTRACK
                continue
            _cover(best, L, R, U, D, C, S, B, cnt)
            colchoice[level] = best
            choice[level] = D[best]
            phase = _TRY
        elif phase == _TRY:
            r = choice[level]
            c = colchoice[level]
            if r == c:
                _uncover(c, L, R, U, D, C, S, B, cnt)
                phase = _BACKTRACK
                continue
            if nodes >= node_limit:
                state[0] = level
                state[1] = phase
                state[2] = nodes
                return _LIMIT
            nodes += 1
            j = R[r]
            while j != r:
                _cover(C[j], L, R, U, D, C, S, B, cnt)
                j = R[j]
            level += 1
            phase = _ENTER
        elif phase == _BACKTRACK:
            if level == 0:
                state[0] = 0
                state[1] = _DONE
                state[2] = nodes
                return _COMPLETE
            level -= 1
            r = choice[level]
            j = L[r]
            while j != r:
                _uncover(C[j], L, R, U, D, C, S, B, cnt)
                j = L[j]
            choice[level] = D[r]
            phase = _TRY
        else:
            state[2] = nodes
            return _COMPLETE


@njit(cache=True)
def _replay(L, R, U, D, C, S, B, cnt, choice, colchoice, level, phase):
    for lv in range(level):
        _cover(colchoice[lv], L, R, U, D, C, S, B, cnt)
        r = choice[lv]
        j = R[r]
        while j != r:
            _cover(C[j], L, R, U, D, C, S, B, cnt)
            j = R[j]
    if phase == _TRY:
        _cover(colchoice[level], L, R, U, D, C, S, B, cnt)


class DancingLinks:
    """A resumable dancing-links search over one instance (single owner)."""

    def __init__(self, instance: ExactCoverInstance) -> None:
        self.instance = instance
        ncol = instance.num_columns
        total = 1 + ncol + sum(len(r) for r in instance.rows)
        L = np.empty(total, dtype=np.int64)
        R = np.empty(total, dtype=np.int64)
        U = np.arange(total, dtype=np.int64)
        D = np.arange(total, dtype=np.int64)
        C = np.zeros(total, dtype=np.int64)
        row_of = np.full(total, -1, dtype=np.int64)
        S = np.zeros(ncol + 1, dtype=np.int64)
        heads = np.arange(ncol + 1)
        L[heads] = np.roll(heads, 1)
        R[heads] = np.roll(heads, -1)
        C[heads] = heads
        node = ncol + 1
        for ri, row in enumerate(instance.rows):
            first = node
            k = len(row)
            for pos, col in enumerate(row):
                c = col + 1
                L[node] = first + (pos - 1) % k
                R[node] = first + (pos + 1) % k
                U[node] = U[c]
                D[node] = c
                D[U[c]] = node
                U[c] = node
                C[node] = c
                row_of[node] = ri
                S[c] += 1
                node += 1
        B = np.zeros((int(S.max(initial=0)) + 1, (ncol + 1) // 64 + 1), dtype=np.uint64)
        cnt = np.zeros(B.shape[0], dtype=np.int64)
        for c in range(1, ncol + 1):
            B[S[c], c >> 6] |= np.uint64(1) << np.uint64(c & 63)
            cnt[S[c]] += 1
        self._mesh = (L, R, U, D, C, S, B, cnt)
        self._row_of = row_of
        depth = ncol + 1
        self._choice = np.zeros(depth, dtype=np.int64)
        self._colchoice = np.zeros(depth, dtype=np.int64)
        self._state = np.zeros(3, dtype=np.int64)
        self.solutions_found = 0

    @property
    def nodes(self) -> int:
        return int(self._state[2])

    @property
    def finished(self) -> bool:
        return int(self._state[1]) == _DONE

    def step(self, node_limit: int) -> int:
        """Advance until a solution, completion, or ``node_limit`` total nodes."""
        code = _search(*self._mesh, _DEBRUIJN_TABLE, self._choice, self._colchoice, self._state, node_limit)
        if code == _SOLUTION:
            self.solutions_found += 1
        return int(code)

    def current_solution(self) -> tuple[int, ...]:
        level = int(self._state[0])
        return tuple(sorted(int(self._row_of[n]) for n in self._choice[:level]))

    def checkpoint(self) -> dict:
        level = int(self._state[0])
        return {
            "level": level,
            "phase": int(self._state[1]),
            "nodes": int(self._state[2]),
            "solutions_found": self.solutions_found,
            "choice": self._choice[: level + 1].tolist(),
            "colchoice": self._colchoice[: level + 1].tolist(),
        }

    @classmethod
    def resume(cls, instance: ExactCoverInstance, checkpoint: dict) -> DancingLinks:
        dlx = cls(instance)
        level, phase = int(checkpoint["level"]), int(checkpoint["phase"])
        n = len(checkpoint["choice"])
        dlx._choice[:n] = checkpoint["choice"]
        dlx._colchoice[:n] = checkpoint["colchoice"]
        dlx._state[:] = (level, phase, int(checkpoint["nodes"]))
        dlx.solutions_found = int(checkpoint["solutions_found"])
        if phase != _DONE:
            _replay(*dlx._mesh, dlx._choice, dlx._colchoice, level, phase)
        return dlx


class SolutionStream:
    """Iterate over exact covers; ``outcome`` is filled in once iteration ends.

    Solutions are sorted tuples of row indices, visited in a deterministic
    order.  Iteration stops early when the budget runs out or when the
    consumer calls :meth:`stop`.
    """

    def __init__(
        self,
        instance: ExactCoverInstance,
        budget: SearchBudget = UNLIMITED,
        checkpoint: dict | None = None,
        on_chunk: Callable[[DancingLinks], None] | None = None,
    ) -> None:
        self.instance = instance
        self.budget = budget
        self.dlx = DancingLinks.resume(instance, checkpoint) if checkpoint else DancingLinks(instance)
        self.on_chunk = on_chunk
        self.outcome: SearchOutcome | None = None
        self._stopped = False
        self._start = time.monotonic()

    def stop(self) -> None:
        self._stopped = True

    def _finish(self, status: Status) -> None:
        self.outcome = SearchOutcome(
            status=status,
            solutions_found=self.dlx.solutions_found,
            nodes_expanded=self.dlx.nodes,
            wall_seconds=time.monotonic() - self._start,
        )

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        budget = self.budget
        max_nodes = budget.max_nodes if budget.max_nodes is not None else math.inf
        dlx = self.dlx
        if dlx.finished:
            self._finish(Status.COMPLETE)
            return
        while True:
            if self._stopped:
                self._finish(Status.STOPPED)
                return
            if budget.max_solutions is not None and dlx.solutions_found >= budget.max_solutions:
                self._finish(Status.BUDGET_EXHAUSTED)
                return
            limit = int(min(max_nodes, dlx.nodes + CHUNK_NODES))
            code = dlx.step(limit)
            if code == _SOLUTION:
                yield dlx.current_solution()
            elif code == _COMPLETE:
                self._finish(Status.COMPLETE)
                return
            else:
                if self.on_chunk is not None:
                    self.on_chunk(dlx)
                if dlx.nodes >= max_nodes:
                    self._finish(Status.BUDGET_EXHAUSTED)
                    return
            # checked after solutions too, since a solution-dense tree may never hit a chunk boundary
            if budget.wall_clock_limit is not None and time.monotonic() - self._start > budget.wall_clock_limit:
                self._finish(Status.BUDGET_EXHAUSTED)
                return

    def checkpoint(self) -> dict:
        return self.dlx.checkpoint()


def solve_stream(
    instance: ExactCoverInstance,
    visitor: Callable[[tuple[int, ...]], bool | None] | None = None,
    budget: SearchBudget = UNLIMITED,
    store: bool = True,
    out: Path | str | None = None,
) -> SearchOutcome:
    """Visit every exact cover once.  A visitor returning ``False`` stops the search.

    With ``out`` given, solutions are also written one per line as JSON lists.
    """
    stream = SolutionStream(instance, budget)
    kept: list[tuple[int, ...]] | None = [] if store else None
    handle = open(out, "w") if out is not None else None
    try:
        for sol in stream:
            if kept is not None:
                kept.append(sol)
            if handle is not None:
                handle.write(json.dumps(list(sol)) + "\n")
            if visitor is not None and visitor(sol) is False:
                stream.stop()
    finally:
        if handle is not None:
            handle.close()
    outcome = stream.outcome
    outcome.solutions = kept
    return outcome


def count_solutions(instance: ExactCoverInstance, budget: SearchBudget = UNLIMITED) -> SearchOutcome:
    return solve_stream(instance, budget=budget, store=False)


BRUTE_FORCE_MAX_COLUMNS = 25


def brute_force_oracle(instance: ExactCoverInstance) -> list[tuple[int, ...]]:
    """All exact covers by plain recursion on bitmasks (no links, no heuristic)."""
    n = instance.num_columns
    if n > BRUTE_FORCE_MAX_COLUMNS:
        raise TooLarge(f"{n} columns exceeds the brute-force limit of {BRUTE_FORCE_MAX_COLUMNS}")
    masks = [sum(1 << c for c in row) for row in instance.rows]
    full = (1 << n) - 1
    by_column: list[list[int]] = [[] for _ in range(n)]
    for i, m in enumerate(masks):
        by_column[(m & -m).bit_length() - 1].append(i)
    # a row is tried only at the lowest column it contains, so each cover is seen once
    out: list[tuple[int, ...]] = []

    def extend(covered: int, chosen: list[int]) -> None:
        if covered == full:
            out.append(tuple(sorted(chosen)))
            return
        free = ~covered & full
        col = (free & -free).bit_length() - 1
        for i in by_column[col]:
            if masks[i] & covered == 0:
                chosen.append(i)
                extend(covered | masks[i], chosen)
                chosen.pop()

    extend(0, [])
    return sorted(out)


def hitting_instance(geometry: IncidenceGeometry, metadata: str = "") -> ExactCoverInstance:
    """Dual problem: exact covers of the line set by point rows are the 1-ovoids."""
    for p, ls in enumerate(geometry.point_lines):
        if not ls:
            raise IsolatedPoint(f"point {p} lies on no line")
    return ExactCoverInstance(geometry.num_lines, geometry.point_lines, metadata or f"hitting:{geometry.name}")


def save_instance(instance: ExactCoverInstance, path: Path | str) -> None:
    Path(path).write_text(json.dumps(instance.to_dict()) + "\n")


def load_instance(path: Path | str) -> ExactCoverInstance:
    return ExactCoverInstance.from_dict(json.loads(Path(path).read_text()))
