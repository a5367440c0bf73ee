"""Pure-Python kernel backend.

Reference implementation of the hot numeric loops.  The compiled backend
(_ck) mirrors these loops statement for statement, including iteration
and accumulation order, so both backends produce bit-identical floats.
Keep the two files in sync.

Tables are flat ``array('d')`` buffers in row-major order with the last
axis varying fastest; integer metadata arrives as ``array('q')``.
"""

from __future__ import annotations

from array import array


def _zeros(n: int) -> array:
    return array("d", bytes(8 * n))


def product(cards, strides_a, strides_b, table_a, table_b):
    """Pointwise product of two factors on the union scope.

    ``cards`` describes the output scope; ``strides_a[i]`` is the stride
    of output axis ``i`` inside table_a (0 when the axis is absent from
    a's scope), likewise ``strides_b``.
    """
    n = len(cards)
    size = 1
    for c in cards:
        size *= c
    out = _zeros(size)
    digits = [0] * n
    ia = 0
    ib = 0
    for i in range(size):
        out[i] = table_a[ia] * table_b[ib]
        ax = n - 1
        while ax >= 0:
            digits[ax] += 1
            ia += strides_a[ax]
            ib += strides_b[ax]
            if digits[ax] < cards[ax]:
                break
            digits[ax] = 0
            ia -= strides_a[ax] * cards[ax]
            ib -= strides_b[ax] * cards[ax]
            ax -= 1
    return out


def sum_axis(n_major: int, card: int, n_minor: int, table):
    """Sum out the middle axis of a table viewed as [major, axis, minor]."""
    out = _zeros(n_major * n_minor)
    block = card * n_minor
    for hi in range(n_major):
        base = hi * block
        obase = hi * n_minor
        for s in range(card):
            sbase = base + s * n_minor
            for lo in range(n_minor):
                out[obase + lo] += table[sbase + lo]
    return out


def slice_axis(n_major: int, card: int, n_minor: int, state: int, table):
    """Fix the middle axis of [major, axis, minor] at ``state``."""
    out = _zeros(n_major * n_minor)
    block = card * n_minor
    for hi in range(n_major):
        base = hi * block + state * n_minor
        obase = hi * n_minor
        for lo in range(n_minor):
            out[obase + lo] = table[base + lo]
    return out


def joint_marginal(
    cards,
    base_config,
    free,
    query: int,
    scope_vars,
    scope_strides,
    scope_offsets,
    tables,
    table_offsets,
):
    """Unnormalized query marginal by full joint enumeration.

    Sweeps every configuration of the ``free`` variables (evidence
    variables stay pinned at their ``base_config`` states), multiplies
    one CPT entry per node, and accumulates into the query state's cell.
    Node ``i``'s CPT entry address is ``table_offsets[i]`` plus the
    stride-weighted digits of its scope.
    """
    n_nodes = len(table_offsets) - 1
    n_free = len(free)
    config = list(base_config)
    out = _zeros(cards[query])
    while True:
        p = 1.0
        for node in range(n_nodes):
            idx = 0
            for j in range(scope_offsets[node], scope_offsets[node + 1]):
                idx += config[scope_vars[j]] * scope_strides[j]
            p *= tables[table_offsets[node] + idx]
        out[config[query]] += p
        i = n_free - 1
        while i >= 0:
            v = free[i]
            config[v] += 1
            if config[v] < cards[v]:
                break
            config[v] = 0
            i -= 1
        if i < 0:
            break
    return out


def rule_rows(
    cards,
    group_of,
    group_sizes,
    max_card: int,
    atom_kind,
    atom_group,
    atom_state,
    atom_min,
    rpn,
    rpn_offsets,
    vectors,
    n_states: int,
):
    """First-match rule table over every joint parent configuration.

    Parent positions follow the grounded parent order with the last
    position varying fastest.  Per-group state counts are maintained
    incrementally along the configuration odometer; atoms test those
    counts (ANY: >0, ALL: ==group size, COUNT: >=minimum) and each
    rule's condition is a postfix expression over atom truths
    (token >= 0 pushes an atom, -1 is AND, -2 is OR).  Row ``r`` of the
    output copies the vector of the first matching rule, or the final
    ELSE vector (stored last in ``vectors``).
    """
    n_pos = len(cards)
    n_rules = len(rpn_offsets) - 1
    n_groups = len(group_sizes)
    n_configs = 1
    for c in cards:
        n_configs *= c
    rows = [vectors[r * n_states:(r + 1) * n_states] for r in range(n_rules + 1)]
    counts = [0] * (n_groups * max_card)
    for g in range(n_groups):
        counts[g * max_card] = group_sizes[g]
    digits = [0] * n_pos
    out = _zeros(n_configs * n_states)
    stack = [False] * (max(len(rpn), 1) + 1)
    for row in range(n_configs):
        chosen = n_rules
        for r in range(n_rules):
            top = -1
            for t in range(rpn_offsets[r], rpn_offsets[r + 1]):
                tok = rpn[t]
                if tok >= 0:
                    g = atom_group[tok]
                    c = counts[g * max_card + atom_state[tok]]
                    kind = atom_kind[tok]
                    if kind == 0:
                        val = c > 0
                    elif kind == 1:
                        val = c == group_sizes[g]
                    else:
                        val = c >= atom_min[tok]
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
        out[row * n_states:(row + 1) * n_states] = rows[chosen]
        i = n_pos - 1
        while i >= 0:
            g = group_of[i] * max_card
            counts[g + digits[i]] -= 1
            digits[i] += 1
            if digits[i] < cards[i]:
                counts[g + digits[i]] += 1
                break
            digits[i] = 0
            counts[g] += 1
            i -= 1
    return out
