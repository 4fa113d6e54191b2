"""Minimal DOT parser, just enough to round-trip the graphs this package
emits: one digraph, quoted node ids, node/edge statements with [k=v, ...]
attribute lists.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

_HEADER = re.compile(r"^\s*digraph\s+(\w+)\s*\{\s*$")
_EDGE = re.compile(r'^\s*"([^"]+)"\s*->\s*"([^"]+)"\s*(\[(.*)\])?\s*;\s*$')
_NODE = re.compile(r'^\s*"([^"]+)"\s*(\[(.*)\])?\s*;\s*$')


def _parse_attrs(raw: str) -> Dict[str, str]:
    attrs = {}
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        key, _, value = part.partition("=")
        attrs[key.strip()] = value.strip().strip('"')
    return attrs


@dataclass
class DotGraph:
    name: str
    nodes: Dict[str, Dict[str, str]] = field(default_factory=dict)
    edges: List[Tuple[str, str, Dict[str, str]]] = field(default_factory=list)


def parse(text: str) -> DotGraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    m = _HEADER.match(lines[0])
    if not m:
        raise ValueError("not a digraph")
    graph = DotGraph(name=m.group(1))
    if lines[-1].strip() != "}":
        raise ValueError("missing closing brace")
    for line in lines[1:-1]:
        m = _EDGE.match(line)
        if m:
            graph.edges.append((m.group(1), m.group(2), _parse_attrs(m.group(4) or "")))
            continue
        m = _NODE.match(line)
        if m:
            graph.nodes[m.group(1)] = _parse_attrs(m.group(3) or "")
            continue
        raise ValueError(f"unparseable DOT line: {line!r}")
    return graph
