"""Smith normal form over the integers with unimodular transforms.

Entries are kept as Python ints so nothing overflows.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

Matrix = list[list[int]]


def _identity(k: int) -> Matrix:
    return [[int(a == b) for b in range(k)] for a in range(k)]


def matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> Matrix:
    if not A:
        return []
    inner = len(B)
    cols = len(B[0]) if B else 0
    return [[sum(A[i][t] * B[t][j] for t in range(inner)) for j in range(cols)]
            for i in range(len(A))]


def transpose(A: Sequence[Sequence[int]]) -> Matrix:
    if not A:
        return []
    return [list(col) for col in zip(*A)]


@dataclass(frozen=True)
class SmithForm:
    """``left @ M @ right == diag``, with ``left``/``right`` unimodular.

    ``diagonal`` holds the min(rows, cols) diagonal entries d1 | d2 | ...,
    all nonnegative, zeros last.
    """

    diagonal: tuple[int, ...]
    left: tuple[tuple[int, ...], ...]
    right: tuple[tuple[int, ...], ...]
    shape: tuple[int, int]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        """Nontrivial invariant factors (the entries > 1)."""
        return tuple(d for d in self.diagonal if d > 1)

    def matrix(self) -> Matrix:
        rows, cols = self.shape
        D = [[0] * cols for _ in range(rows)]
        for t, d in enumerate(self.diagonal):
            D[t][t] = d
        return D


def smith_normal_form(M: Sequence[Sequence[int]]) -> SmithForm:
    A = [[int(v) for v in row] for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    U = _identity(rows)
    V = _identity(cols)

    def swap_rows(a, b):
        A[a], A[b] = A[b], A[a]
        U[a], U[b] = U[b], U[a]

    def swap_cols(a, b):
        for row in A:
            row[a], row[b] = row[b], row[a]
        for row in V:
            row[a], row[b] = row[b], row[a]

    def add_row(dst, src, q):  # row_dst += q * row_src
        A[dst] = [x + q * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x + q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for row in A:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    for t in range(min(rows, cols)):
        while True:
            pivot = None
            for i in range(t, rows):
                for j in range(t, cols):
                    if A[i][j] and (pivot is None or abs(A[i][j]) < abs(A[pivot[0]][pivot[1]])):
                        pivot = (i, j)
            if pivot is None:
                break
            swap_rows(t, pivot[0])
            swap_cols(t, pivot[1])
            p = A[t][t]
            clean = True
            for i in range(t + 1, rows):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    clean = clean and A[i][t] == 0
            for j in range(t + 1, cols):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    clean = clean and A[t][j] == 0
            if not clean:
                continue
            bad = next((i for i in range(t + 1, rows)
                        if any(A[i][j] % p for j in range(t + 1, cols))), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]

    diag = tuple(A[t][t] for t in range(min(rows, cols)))
    return SmithForm(
        diagonal=diag,
        left=tuple(tuple(r) for r in U),
        right=tuple(tuple(r) for r in V),
        shape=(rows, cols),
    )


def abelian_invariants(relations: Sequence[Sequence[int]], ngens: int) -> tuple[int, ...]:
    """Invariant factors of Z^ngens / rowspan(relations); 0 marks a free factor."""
    if not relations:
        return (0,) * ngens
    snf = smith_normal_form(relations)
    diag = list(snf.diagonal) + [0] * (ngens - len(snf.diagonal))
    return tuple(d for d in diag if d != 1)
