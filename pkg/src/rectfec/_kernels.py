"""Compiled inner loops: grid peeling and depth-first spanning forests."""
import numpy as np
from numba import njit


@njit(cache=True)
def peel_inplace(payload, known):
    """Repair every unknown cell that is alone in its row or column.

    ``payload`` is ``(R, C, L)`` uint8 and ``known`` is ``(R, C)`` bool; both
    are updated in place. Row and column xor sums of the known cells are kept
    incrementally, so each repair costs one payload copy plus two xors. The
    column index of a row's last unknown cell is recovered from the running
    sum of unknown indices. Returns the number of repaired cells.
    """
    R, C, L = payload.shape
    row_cnt = np.zeros(R, np.int64)
    col_cnt = np.zeros(C, np.int64)
    row_idx = np.zeros(R, np.int64)
    col_idx = np.zeros(C, np.int64)
    row_sum = np.zeros((R, L), np.uint8)
    col_sum = np.zeros((C, L), np.uint8)
    for i in range(R):
        for j in range(C):
            if known[i, j]:
                for b in range(L):
                    row_sum[i, b] ^= payload[i, j, b]
                    col_sum[j, b] ^= payload[i, j, b]
            else:
                row_cnt[i] += 1
                col_cnt[j] += 1
                row_idx[i] += j
                col_idx[j] += i

    # lines are pushed when their unknown count reaches one; that happens once
    queue = np.empty(R + C, np.int64)
    head = 0
    tail = 0
    for i in range(R):
        if row_cnt[i] == 1:
            queue[tail] = i
            tail += 1
    for j in range(C):
        if col_cnt[j] == 1:
            queue[tail] = R + j
            tail += 1

    repaired = 0
    while head < tail:
        line = queue[head]
        head += 1
        if line < R:
            i = line
            if row_cnt[i] != 1:
                continue
            j = row_idx[i]
            for b in range(L):
                v = row_sum[i, b]
                payload[i, j, b] = v
                row_sum[i, b] = 0
                col_sum[j, b] ^= v
        else:
            j = line - R
            if col_cnt[j] != 1:
                continue
            i = col_idx[j]
            for b in range(L):
                v = col_sum[j, b]
                payload[i, j, b] = v
                col_sum[j, b] = 0
                row_sum[i, b] ^= v
        known[i, j] = True
        repaired += 1
        row_cnt[i] -= 1
        col_cnt[j] -= 1
        row_idx[i] -= j
        col_idx[j] -= i
        if row_cnt[i] == 1:
            queue[tail] = i
            tail += 1
        if col_cnt[j] == 1:
            queue[tail] = R + j
            tail += 1
    return repaired


@njit(cache=True)
def dfs_tree_edges(n_vertices, indptr, nbr, eid, n_edges):
    """Mark the edges of a depth-first spanning forest.

    Roots are taken in ascending vertex order and each adjacency list is
    scanned in the order given by the CSR arrays. Every unmarked edge is a
    back edge of the search.
    """
    visited = np.zeros(n_vertices, np.bool_)
    tree = np.zeros(n_edges, np.bool_)
    stack_v = np.empty(n_vertices, np.int64)
    stack_p = np.empty(n_vertices, np.int64)
    for root in range(n_vertices):
        if visited[root]:
            continue
        visited[root] = True
        top = 0
        stack_v[0] = root
        stack_p[0] = indptr[root]
        while top >= 0:
            v = stack_v[top]
            p = stack_p[top]
            if p < indptr[v + 1]:
                stack_p[top] = p + 1
                w = nbr[p]
                if not visited[w]:
                    visited[w] = True
                    tree[eid[p]] = True
                    top += 1
                    stack_v[top] = w
                    stack_p[top] = indptr[w]
            else:
                top -= 1
    return tree
