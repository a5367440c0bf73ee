"""SSBN export: DOT graphs and a stable JSON document.

Both serializations are byte-deterministic for a given SSBN.

JSON schema (stable; additions would be backward compatible)::

    {
      "query": "<canonical node text>",
      "evidence": { "<node text>": "<observed state>", ... },
      "nodes": [
        {
          "name":    "<canonical node text>",
          "functor": "<functor>",
          "args":    ["<entity instance>", ...],
          "states":  ["<state>", ...],
          "parents": ["<node text>", ...],      # recorded parent order
          "cpt":     [[p, ...], ...]            # one row per parent
        },                                      # configuration, last
        ...                                     # parent varies fastest
      ],
      "edges": [["<parent text>", "<child text>"], ...]
    }

``nodes`` follows the SSBN's recorded topological order; ``edges``
lists each child's in-edges in recorded parent order.
"""

from __future__ import annotations

import json

from .grounding import SSBN


def ssbn_to_dot(ssbn: SSBN) -> str:
    """GraphViz rendering: evidence nodes are annotated with their
    observed state and filled; the query node is double-outlined."""
    lines = ["digraph ssbn {"]
    for node in ssbn.nodes:
        name = node.rv.text()
        attrs = []
        if node.rv in ssbn.evidence:
            attrs.append(f'label="{name} = {ssbn.evidence[node.rv]}"')
            attrs.append("style=filled")
            attrs.append("fillcolor=lightgrey")
        else:
            attrs.append(f'label="{name}"')
        if node.rv == ssbn.query:
            attrs.append("peripheries=2")
        lines.append(f'  "{name}" [{", ".join(attrs)}];')
    for parent, child in ssbn.edges():
        lines.append(f'  "{parent.text()}" -> "{child.text()}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def ssbn_to_json(ssbn: SSBN) -> str:
    doc = {
        "query": ssbn.query.text(),
        "evidence": {rv.text(): state for rv, state in ssbn.evidence.items()},
        "nodes": [
            {
                "name": node.rv.text(),
                "functor": node.rv.functor,
                "args": list(node.rv.args),
                "states": list(node.states),
                "parents": [p.text() for p in node.parents],
                "cpt": [list(node.cpt_row(i)) for i in range(node.n_rows)],
            }
            for node in ssbn.nodes
        ],
        "edges": [[p.text(), c.text()] for p, c in ssbn.edges()],
    }
    return json.dumps(doc, indent=2) + "\n"
