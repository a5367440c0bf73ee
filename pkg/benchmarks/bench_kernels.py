#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the pure-Python fallback.

Runs each kernel on a representative workload and prints median wall
times plus the speedup.  Workloads mirror the package's hot paths:

* product / sum_axis -- variable-elimination factor operations
* joint_marginal     -- the enumeration oracle's full-joint sweep
* rule_rows          -- rule-table synthesis for a six-entity grounding
                        (the node that dominates large-k grounding)

Usage: python benchmarks/bench_kernels.py [--repeat N] [--scale S]
"""

from __future__ import annotations

import argparse
import statistics
import time
from array import array

from mebnkit import _kernels


def q(values) -> array:
    return array("q", values)


def d(values) -> array:
    return array("d", values)


def time_call(fn, args, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def product_workload(scale: int):
    # two factors over 2^scale binary variables, half-overlapping scopes
    n = scale
    cards = [2] * n
    size = 1 << n
    strides_full = [0] * n
    acc = 1
    for i in reversed(range(n)):
        strides_full[i] = acc
        acc *= 2
    # factor a covers the first 2/3 of the axes, b the last 2/3
    cut = n // 3
    sa = [s if i < 2 * cut or n < 3 else 0 for i, s in enumerate(strides_full)]
    sb = [s if i >= cut else 0 for i, s in enumerate(strides_full)]
    table = d([0.5] * size)
    return (q(cards), q(sa), q(sb), table, table)


def sum_axis_workload(scale: int):
    size = 1 << scale
    return (size // 4, 2, 2, d([0.5] * size))


def joint_workload(scale: int):
    # a chain of `scale` binary nodes, no evidence, query the last node
    n = scale
    cards = q([2] * n)
    base = q([0] * n)
    free = q(list(range(n)))
    scope_vars: list[int] = []
    scope_strides: list[int] = []
    scope_offsets = [0]
    tables: list[float] = []
    table_offsets = [0]
    for i in range(n):
        if i == 0:
            scope_vars += [0]
            scope_strides += [1]
            tables += [0.5, 0.5]
        else:
            scope_vars += [i - 1, i]
            scope_strides += [2, 1]
            tables += [0.8, 0.2, 0.3, 0.7]
        scope_offsets.append(len(scope_vars))
        table_offsets.append(len(tables))
    return (
        cards, base, free, n - 1,
        q(scope_vars), q(scope_strides), q(scope_offsets),
        d(tables), q(table_offsets),
    )


def rule_rows_workload(n_spills: int):
    # the bundled SeverityLevel rule list over n_spills spills:
    # 3 groups (thickness, size, speed), binary states, 3 rules + ELSE
    n_pos = 3 * n_spills
    cards = q([2] * n_pos)
    group_of = q([i // n_spills for i in range(n_pos)])
    group_sizes = q([n_spills] * 3)
    # atoms: ANY(g, state0) for g in 0..2
    atom_kind = q([0, 0, 0])
    atom_group = q([0, 1, 2])
    atom_state = q([0, 0, 0])
    atom_min = q([0, 0, 0])
    rpn = q([0, 1, -1, 2, -1,   # ANY0 AND ANY1 AND ANY2
             0, 1, -1,          # ANY0 AND ANY1
             0, 1, -2, 2, -2])  # ANY0 OR ANY1 OR ANY2
    rpn_offsets = q([0, 5, 8, 13])
    vectors = d([0.9, 0.08, 0.02, 0.7, 0.22, 0.08, 0.35, 0.45, 0.2, 0.05, 0.25, 0.7])
    return (cards, group_of, group_sizes, 2,
            atom_kind, atom_group, atom_state, atom_min,
            rpn, rpn_offsets, vectors, 3)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="samples per measurement")
    parser.add_argument(
        "--scale", type=int, default=16,
        help="log2 of the factor/joint workload size (default 16)",
    )
    args = parser.parse_args()

    backends = {name: _kernels.get(name) for name in _kernels.available()}
    if "compiled" not in backends:
        print("compiled backend not built; run `pip install -e . --no-build-isolation`")

    workloads = [
        (f"product        (2^{args.scale} cells)", "product", product_workload(args.scale)),
        (f"sum_axis       (2^{args.scale} cells)", "sum_axis", sum_axis_workload(args.scale)),
        (f"joint_marginal ({args.scale}-node chain)", "joint_marginal", joint_workload(args.scale)),
        ("rule_rows      (6 spills, 2^18 rows)", "rule_rows", rule_rows_workload(6)),
    ]

    name_width = max(len(label) for label, _, _ in workloads)
    header = f"{'workload':<{name_width}}  " + "".join(
        f"{name:>12}" for name in backends
    )
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(f"kernel backends: {', '.join(backends)}")
    print(header)
    print("-" * len(header))
    for label, fn_name, workload in workloads:
        times = {
            name: time_call(getattr(mod, fn_name), workload, args.repeat)
            for name, mod in backends.items()
        }
        row = f"{label:<{name_width}}  " + "".join(
            f"{times[name] * 1e3:>10.2f}ms" for name in backends
        )
        if "python" in times and "compiled" in times:
            row += f"{times['python'] / times['compiled']:>9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
