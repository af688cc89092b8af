# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pattern-backtracking search.

Mirrors ``solver.SearchState`` move for move: same step selection, same move
order, same matching updates, same block-edge cache policy.  All search
state lives in fixed-size C buffers allocated once per call.
"""

from libc.stdlib cimport malloc, calloc, free
from libc.string cimport memset, memcpy
from libc.stdint cimport uint64_t, int64_t
from posix.time cimport clock_gettime, timespec, CLOCK_MONOTONIC

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

cdef enum:
    CACHE_LIMIT = 16384
    CACHE_SLOTS = 32768
    MAXK = 64

cdef enum:
    AM = 0
    AL = 1
    T_BLOCK = 0
    T_USER = 1


cdef struct Search:
    int k
    int n
    int cap
    uint64_t* auth
    uint64_t* ne_mask
    int m
    int* ckind
    int* cr
    int* cq
    int* sc_start
    int* sc_idx
    int maxdeg
    double* static_score
    double a0
    double a1
    double a2
    int heuristic
    int le_steps

    uint64_t blocks[MAXK]
    int nb
    int block_of[MAXK]
    uint64_t assigned_mask
    uint64_t* blockset
    int* assigned
    uint64_t* saved_blockset

    int* edges
    int nedges[MAXK]
    int match_block[MAXK]
    int* match_user
    int64_t* stamp
    int64_t cur_stamp
    int* saved_edges
    int saved_nedges[MAXK]
    uint64_t saved_mask[MAXK]

    int* trail_kind
    int* trail_idx
    int* trail_old
    int trail_len
    int trail_mark[MAXK + 1]

    uint64_t* ckeys
    int* coff
    int* clen
    int* pool
    int ccount
    int clears

    int64_t nodes
    int64_t* by_depth
    int max_depth
    int64_t elig
    int64_t auth_prunes
    int64_t node_limit
    double deadline
    int timed_out


cdef inline double now() noexcept nogil:
    cdef timespec ts
    clock_gettime(CLOCK_MONOTONIC, &ts)
    return ts.tv_sec + ts.tv_nsec * 1e-9


cdef inline int popcount(uint64_t x) noexcept nogil:
    return __builtin_popcountll(x)


cdef int get_edges(Search* S, uint64_t mask, int* out) noexcept nogil:
    cdef uint64_t h = (mask * <uint64_t>0x9E3779B97F4A7C15ULL) >> 49
    cdef int slot = <int>h
    cdef int i, cnt, off, u
    while S.ckeys[slot] != 0:
        if S.ckeys[slot] == mask:
            cnt = S.clen[slot]
            memcpy(out, S.pool + S.coff[slot], cnt * sizeof(int))
            return cnt
        slot = (slot + 1) & (CACHE_SLOTS - 1)
    cnt = 0
    if S.cap > 0:
        for u in range(S.n):
            if (S.auth[u] & mask) == mask:
                out[cnt] = u
                cnt += 1
                if cnt == S.cap:
                    break
    if S.ccount >= CACHE_LIMIT:
        memset(S.ckeys, 0, CACHE_SLOTS * sizeof(uint64_t))
        S.ccount = 0
        S.clears += 1
        slot = <int>h
    off = S.ccount * S.cap
    S.ckeys[slot] = mask
    S.coff[slot] = off
    S.clen[slot] = cnt
    if cnt:
        memcpy(S.pool + off, out, cnt * sizeof(int))
    S.ccount += 1
    return cnt


cdef inline void trail_push(Search* S, int kind, int idx, int old) noexcept nogil:
    S.trail_kind[S.trail_len] = kind
    S.trail_idx[S.trail_len] = idx
    S.trail_old[S.trail_len] = old
    S.trail_len += 1


cdef int augment(Search* S, int b) noexcept nogil:
    cdef int i, u, owner
    cdef int* row = S.edges + b * S.cap
    for i in range(S.nedges[b]):
        u = row[i]
        if S.stamp[u] == S.cur_stamp:
            continue
        S.stamp[u] = S.cur_stamp
        owner = S.match_user[u]
        if owner < 0 or augment(S, owner):
            trail_push(S, T_USER, u, S.match_user[u])
            S.match_user[u] = b
            trail_push(S, T_BLOCK, b, S.match_block[b])
            S.match_block[b] = u
            return 1
    return 0


cdef int apply_move(Search* S, int s, int move, int depth) noexcept nogil:
    cdef int b = S.nb if move < 0 else move
    cdef int j = 0
    cdef int idx, c, u
    cdef int base = depth * S.maxdeg
    cdef uint64_t bit = (<uint64_t>1) << b
    for idx in range(S.sc_start[s], S.sc_start[s + 1]):
        c = S.sc_idx[idx]
        S.saved_blockset[base + j] = S.blockset[c]
        S.blockset[c] |= bit
        S.assigned[c] += 1
        j += 1
    S.block_of[s] = b
    S.assigned_mask |= (<uint64_t>1) << s
    S.trail_mark[depth] = S.trail_len
    if move < 0:
        S.blocks[b] = (<uint64_t>1) << s
        S.nb += 1
        S.match_block[b] = -1
        S.nedges[b] = get_edges(S, S.blocks[b], S.edges + b * S.cap)
    else:
        S.saved_mask[depth] = S.blocks[b]
        S.saved_nedges[depth] = S.nedges[b]
        memcpy(S.saved_edges + depth * S.cap, S.edges + b * S.cap, S.nedges[b] * sizeof(int))
        S.blocks[b] |= (<uint64_t>1) << s
        S.nedges[b] = get_edges(S, S.blocks[b], S.edges + b * S.cap)
        u = S.match_block[b]
        if u >= 0:
            trail_push(S, T_USER, u, S.match_user[u])
            S.match_user[u] = -1
            trail_push(S, T_BLOCK, b, u)
            S.match_block[b] = -1
    S.cur_stamp += 1
    return augment(S, b)


cdef void undo_move(Search* S, int s, int move, int depth) noexcept nogil:
    cdef int b = S.block_of[s]
    cdef int j = 0
    cdef int idx, c, t
    while S.trail_len > S.trail_mark[depth]:
        S.trail_len -= 1
        t = S.trail_len
        if S.trail_kind[t] == T_BLOCK:
            S.match_block[S.trail_idx[t]] = S.trail_old[t]
        else:
            S.match_user[S.trail_idx[t]] = S.trail_old[t]
    if move < 0:
        S.nb -= 1
    else:
        S.blocks[b] = S.saved_mask[depth]
        S.nedges[b] = S.saved_nedges[depth]
        memcpy(S.edges + b * S.cap, S.saved_edges + depth * S.cap, S.nedges[b] * sizeof(int))
    for idx in range(S.sc_start[s], S.sc_start[s + 1]):
        c = S.sc_idx[idx]
        S.blockset[c] = S.saved_blockset[depth * S.maxdeg + j]
        S.assigned[c] -= 1
        j += 1
    S.block_of[s] = -1
    S.assigned_mask &= ~((<uint64_t>1) << s)


cdef int select_step(Search* S) noexcept nogil:
    cdef int s, idx, c, used, i
    cdef int best = -1
    cdef double best_score = -1.0
    cdef double sc
    for s in range(S.k):
        if (S.assigned_mask >> s) & 1:
            continue
        if not S.heuristic:
            return s
        sc = S.static_score[s]
        for idx in range(S.sc_start[s], S.sc_start[s + 1]):
            c = S.sc_idx[idx]
            if S.ckind[c] != AM:
                continue
            if S.le_steps:
                used = S.assigned[c]
            else:
                used = popcount(S.blockset[c])
            i = S.cr[c] - used
            if i == 0:
                sc += S.a0
            elif i == 1:
                sc += S.a1
            elif i == 2:
                sc += S.a2
        if sc > best_score:
            best = s
            best_score = sc
    return best


cdef int rec(Search* S, int depth) noexcept nogil:
    cdef int moves[MAXK + 1]
    cdef int nm = 0
    cdef int s, b, idx, c, distinct, ok, i, r
    cdef uint64_t bit
    S.nodes += 1
    S.by_depth[depth] += 1
    if depth > S.max_depth:
        S.max_depth = depth
    if S.node_limit > 0 and S.nodes >= S.node_limit:
        S.timed_out = 1
        return -1
    if S.deadline > 0 and (S.nodes & 1023) == 0 and now() > S.deadline:
        S.timed_out = 1
        return -1
    if depth == S.k:
        return 1
    s = select_step(S)
    for b in range(S.nb + 1):
        if b < S.nb and (S.blocks[b] & S.ne_mask[s]):
            continue
        bit = (<uint64_t>1) << b
        ok = 1
        for idx in range(S.sc_start[s], S.sc_start[s + 1]):
            c = S.sc_idx[idx]
            distinct = popcount(S.blockset[c] | bit)
            if S.ckind[c] == AM:
                if distinct > S.cr[c]:
                    ok = 0
                    break
            elif distinct + S.cq[c] - S.assigned[c] - 1 < S.cr[c]:
                ok = 0
                break
        if ok:
            moves[nm] = b if b < S.nb else -1
            nm += 1
    S.elig += S.nb + 1 - nm
    for i in range(nm):
        if apply_move(S, s, moves[i], depth):
            r = rec(S, depth + 1)
            if r != 0:
                return r
        else:
            S.auth_prunes += 1
        undo_move(S, s, moves[i], depth)
    return 0


def search(int k, int n, auth, ne_mask, kind, r, q, scope, static, alphas,
           bint heuristic, bint le_steps, long long node_limit, double time_limit):
    """Run the search; returns (code, plan, nodes, by_depth, max_depth, elig, auth, clears).

    code: 0 unsat, 1 sat, 2 stopped by a limit.
    """
    cdef Search S
    cdef int i, j, c, s, m = len(kind), code
    cdef int cap = k
    memset(&S, 0, sizeof(Search))
    S.k = k
    S.n = n
    S.cap = cap
    S.m = m
    S.heuristic = heuristic
    S.le_steps = le_steps
    S.a0, S.a1, S.a2 = alphas
    S.node_limit = node_limit
    S.deadline = now() + time_limit if time_limit > 0 else 0.0

    step_cons = [[] for _ in range(k)]
    for c in range(m):
        for s in range(k):
            if (scope[c] >> s) & 1:
                step_cons[s].append(c)
    S.maxdeg = max([len(x) for x in step_cons] + [1])
    total = sum(len(x) for x in step_cons)

    S.auth = <uint64_t*>malloc((n + 1) * sizeof(uint64_t))
    S.ne_mask = <uint64_t*>malloc((k + 1) * sizeof(uint64_t))
    S.ckind = <int*>malloc((m + 1) * sizeof(int))
    S.cr = <int*>malloc((m + 1) * sizeof(int))
    S.cq = <int*>malloc((m + 1) * sizeof(int))
    S.sc_start = <int*>malloc((k + 2) * sizeof(int))
    S.sc_idx = <int*>malloc((total + 1) * sizeof(int))
    S.static_score = <double*>malloc((k + 1) * sizeof(double))
    S.blockset = <uint64_t*>calloc(m + 1, sizeof(uint64_t))
    S.assigned = <int*>calloc(m + 1, sizeof(int))
    S.saved_blockset = <uint64_t*>malloc((k + 1) * S.maxdeg * sizeof(uint64_t))
    S.edges = <int*>malloc((MAXK * cap + 1) * sizeof(int))
    S.match_user = <int*>malloc((n + 1) * sizeof(int))
    S.stamp = <int64_t*>calloc(n + 1, sizeof(int64_t))
    S.saved_edges = <int*>malloc(((k + 1) * cap + 1) * sizeof(int))
    cdef int trail_cap = (k + 1) * (2 * k + 8)
    S.trail_kind = <int*>malloc(trail_cap * sizeof(int))
    S.trail_idx = <int*>malloc(trail_cap * sizeof(int))
    S.trail_old = <int*>malloc(trail_cap * sizeof(int))
    S.ckeys = <uint64_t*>calloc(CACHE_SLOTS, sizeof(uint64_t))
    S.coff = <int*>malloc(CACHE_SLOTS * sizeof(int))
    S.clen = <int*>malloc(CACHE_SLOTS * sizeof(int))
    S.pool = <int*>malloc((CACHE_LIMIT * cap + 1) * sizeof(int))
    S.by_depth = <int64_t*>calloc(k + 2, sizeof(int64_t))
    try:
        if (S.auth == NULL or S.ne_mask == NULL or S.sc_idx == NULL or S.pool == NULL
                or S.edges == NULL or S.trail_old == NULL or S.by_depth == NULL):
            raise MemoryError()
        for i in range(n):
            S.auth[i] = auth[i]
            S.match_user[i] = -1
        for s in range(k):
            S.ne_mask[s] = ne_mask[s]
            S.static_score[s] = static[s]
            S.block_of[s] = -1
        for c in range(m):
            S.ckind[c] = kind[c]
            S.cr[c] = r[c]
            S.cq[c] = q[c]
        j = 0
        for s in range(k):
            S.sc_start[s] = j
            for c in step_cons[s]:
                S.sc_idx[j] = c
                j += 1
        S.sc_start[k] = j
        S.cur_stamp = 0

        with nogil:
            code = rec(&S, 0)
        plan = None
        if code == 1:
            plan = [S.match_block[S.block_of[s]] for s in range(k)]
            out_code = 1
        elif code == 0:
            out_code = 0
        else:
            out_code = 2
        by_depth = [S.by_depth[i] for i in range(k + 1)]
        return (out_code, plan, S.nodes, by_depth, S.max_depth, S.elig, S.auth_prunes, S.clears)
    finally:
        free(S.auth); free(S.ne_mask); free(S.ckind); free(S.cr); free(S.cq)
        free(S.sc_start); free(S.sc_idx); free(S.static_score); free(S.blockset)
        free(S.assigned); free(S.saved_blockset); free(S.edges); free(S.match_user)
        free(S.stamp); free(S.saved_edges); free(S.trail_kind); free(S.trail_idx)
        free(S.trail_old); free(S.ckeys); free(S.coff); free(S.clen); free(S.pool)
        free(S.by_depth)
