"""Text formats for degree sequences and edge lists."""

from __future__ import annotations

from typing import Iterable, Sequence

from treetau.graphs import SimpleGraph
from treetau.trees import LabeledTree


def _strip(text: str) -> list[str]:
    lines = (ln.split("#", 1)[0].strip() for ln in text.splitlines())
    return [ln for ln in lines if ln]


def parse_int_list(text: str) -> list[int]:
    """One nonnegative integer per line, or a single comma-separated line.

    Blank lines and ``#`` comments are ignored.
    """
    values = []
    for ln in _strip(text):
        for tok in ln.replace(",", " ").split():
            v = int(tok)
            if v < 0:
                raise ValueError(f"negative entry {v}")
            values.append(v)
    if not values:
        raise ValueError("no integers found")
    return values


def format_int_list(values: Sequence[int]) -> str:
    return "\n".join(str(v) for v in values) + "\n"


def parse_edge_list(text: str) -> tuple[int, list[tuple[int, int]]]:
    """First line ``n``, then one ``u v`` edge per line (1-indexed)."""
    lines = _strip(text)
    if not lines:
        raise ValueError("empty edge-list file")
    n = int(lines[0])
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"bad edge line {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return n, edges


def format_edge_list(n: int, edges: Iterable[Sequence[int]]) -> str:
    return "\n".join([str(n)] + [f"{int(u)} {int(v)}" for u, v in edges]) + "\n"


def read_graph(text: str) -> SimpleGraph:
    n, edges = parse_edge_list(text)
    return SimpleGraph(n, tuple(edges))


def read_tree(text: str) -> LabeledTree:
    n, edges = parse_edge_list(text)
    return LabeledTree(n, tuple(edges))
