# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Statement-for-statement mirror of _pk.py (same iteration and
accumulation order, so results are bit-identical); see that module for
the semantics of each kernel.  Keep the two files in sync.
"""

from cpython cimport array
import array

cdef array.array _D_TEMPLATE = array.array("d", [])
cdef array.array _Q_TEMPLATE = array.array("q", [])


def product(cards, strides_a, strides_b, table_a, table_b):
    cdef long long[::1] c = cards
    cdef long long[::1] sa = strides_a
    cdef long long[::1] sb = strides_b
    cdef double[::1] ta = table_a
    cdef double[::1] tb = table_b
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t size = 1
    cdef Py_ssize_t k
    for k in range(n):
        size *= c[k]
    out_arr = array.clone(_D_TEMPLATE, size, zero=True)
    cdef double[::1] out = out_arr
    digits_arr = array.clone(_Q_TEMPLATE, n, zero=True)
    cdef long long[::1] digits = digits_arr
    cdef Py_ssize_t ia = 0, ib = 0, i, ax
    for i in range(size):
        out[i] = ta[ia] * tb[ib]
        ax = n - 1
        while ax >= 0:
            digits[ax] += 1
            ia += sa[ax]
            ib += sb[ax]
            if digits[ax] < c[ax]:
                break
            digits[ax] = 0
            ia -= sa[ax] * c[ax]
            ib -= sb[ax] * c[ax]
            ax -= 1
    return out_arr


def sum_axis(Py_ssize_t n_major, Py_ssize_t card, Py_ssize_t n_minor, table):
    cdef double[::1] t = table
    out_arr = array.clone(_D_TEMPLATE, n_major * n_minor, zero=True)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t block = card * n_minor
    cdef Py_ssize_t hi, s, lo, base, obase, sbase
    for hi in range(n_major):
        base = hi * block
        obase = hi * n_minor
        for s in range(card):
            sbase = base + s * n_minor
            for lo in range(n_minor):
                out[obase + lo] += t[sbase + lo]
    return out_arr


def slice_axis(Py_ssize_t n_major, Py_ssize_t card, Py_ssize_t n_minor,
               Py_ssize_t state, table):
    cdef double[::1] t = table
    out_arr = array.clone(_D_TEMPLATE, n_major * n_minor, zero=True)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t block = card * n_minor
    cdef Py_ssize_t hi, lo, base, obase
    for hi in range(n_major):
        base = hi * block + state * n_minor
        obase = hi * n_minor
        for lo in range(n_minor):
            out[obase + lo] = t[base + lo]
    return out_arr


def joint_marginal(cards, base_config, free, Py_ssize_t query,
                   scope_vars, scope_strides, scope_offsets,
                   tables, table_offsets):
    cdef long long[::1] c = cards
    cdef long long[::1] fr = free
    cdef long long[::1] sv = scope_vars
    cdef long long[::1] ss = scope_strides
    cdef long long[::1] so = scope_offsets
    cdef double[::1] tb = tables
    cdef long long[::1] to = table_offsets
    cdef Py_ssize_t n_nodes = to.shape[0] - 1
    cdef Py_ssize_t n_free = fr.shape[0]
    config_arr = array.array("q", base_config)
    cdef long long[::1] config = config_arr
    out_arr = array.clone(_D_TEMPLATE, c[query], zero=True)
    cdef double[::1] out = out_arr
    cdef double p
    cdef Py_ssize_t node, j, i, v
    cdef long long idx
    while True:
        p = 1.0
        for node in range(n_nodes):
            idx = 0
            for j in range(so[node], so[node + 1]):
                idx += config[sv[j]] * ss[j]
            p *= tb[to[node] + idx]
        out[config[query]] += p
        i = n_free - 1
        while i >= 0:
            v = fr[i]
            config[v] += 1
            if config[v] < c[v]:
                break
            config[v] = 0
            i -= 1
        if i < 0:
            break
    return out_arr


def rule_rows(cards, group_of, group_sizes, Py_ssize_t max_card,
              atom_kind, atom_group, atom_state, atom_min,
              rpn, rpn_offsets, vectors, Py_ssize_t n_states):
    cdef long long[::1] c = cards
    cdef long long[::1] grp = group_of
    cdef long long[::1] gsz = group_sizes
    cdef long long[::1] akind = atom_kind
    cdef long long[::1] agrp = atom_group
    cdef long long[::1] astate = atom_state
    cdef long long[::1] amin = atom_min
    cdef long long[::1] tokens = rpn
    cdef long long[::1] roff = rpn_offsets
    cdef double[::1] vecs = vectors
    cdef Py_ssize_t n_pos = c.shape[0]
    cdef Py_ssize_t n_rules = roff.shape[0] - 1
    cdef Py_ssize_t n_groups = gsz.shape[0]
    cdef Py_ssize_t n_configs = 1
    cdef Py_ssize_t k
    for k in range(n_pos):
        n_configs *= c[k]
    counts_arr = array.clone(_Q_TEMPLATE, n_groups * max_card, zero=True)
    cdef long long[::1] counts = counts_arr
    cdef Py_ssize_t g
    for g in range(n_groups):
        counts[g * max_card] = gsz[g]
    digits_arr = array.clone(_Q_TEMPLATE, n_pos, zero=True)
    cdef long long[::1] digits = digits_arr
    out_arr = array.clone(_D_TEMPLATE, n_configs * n_states, zero=True)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t stack_size = tokens.shape[0] + 2
    stack_arr = array.clone(_Q_TEMPLATE, stack_size, zero=True)
    cdef long long[::1] stack = stack_arr
    cdef Py_ssize_t row, r, t, i, chosen, top, s
    cdef long long tok, cnt
    cdef bint val
    for row in range(n_configs):
        chosen = n_rules
        for r in range(n_rules):
            top = -1
            for t in range(roff[r], roff[r + 1]):
                tok = tokens[t]
                if tok >= 0:
                    g = agrp[tok]
                    cnt = counts[g * max_card + astate[tok]]
                    if akind[tok] == 0:
                        val = cnt > 0
                    elif akind[tok] == 1:
                        val = cnt == gsz[g]
                    else:
                        val = cnt >= amin[tok]
                    top += 1
                    stack[top] = val
                elif tok == -1:
                    stack[top - 1] = stack[top - 1] and stack[top]
                    top -= 1
                else:
                    stack[top - 1] = stack[top - 1] or stack[top]
                    top -= 1
            if stack[0]:
                chosen = r
                break
        for s in range(n_states):
            out[row * n_states + s] = vecs[chosen * n_states + s]
        i = n_pos - 1
        while i >= 0:
            g = grp[i] * max_card
            counts[g + digits[i]] -= 1
            digits[i] += 1
            if digits[i] < c[i]:
                counts[g + digits[i]] += 1
                break
            digits[i] = 0
            counts[g] += 1
            i -= 1
    return out_arr
