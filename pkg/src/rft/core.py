"""Covers and finite cores: expand the cover of a finitely generated
subgroup and extract a finite subgraph carrying its fundamental group.

The cover is kept as a letter-labelled graph over the group's
generators (a Stallings-style automaton).  Over a free base this is
exact; over a tower the graph is additionally folded by word-problem
verified coset identifications and the stabilization criterion is
explicitly heuristic.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

from . import graphgroups as gg
from .graphgroups import GraphOfGroups, NONTRIVIAL, TRIVIAL, UNKNOWN
from .tower import Tower
from .words import Alphabet, Word, concat, format_word, invert, reduce_word


class CoreError(ValueError):
    """Cover not expanded far enough, or an undecidable input word."""


Edge = tuple[int, str, int]  # (tail, sym, head), positive orientation


def _fold(edges: set[Edge], count: int):
    """Fold to a partial deterministic automaton; returns (edges, find)."""
    parent = list(range(count))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a: int, b: int):
        a, b = find(a), find(b)
        if a != b:
            parent[max(a, b)] = min(a, b)

    while True:
        edges = {(find(v), sym, find(u)) for v, sym, u in edges}
        out: dict[tuple[int, str], int] = {}
        inc: dict[tuple[int, str], int] = {}
        merged = False
        for v, sym, u in edges:
            if (v, sym) in out and out[(v, sym)] != u:
                union(out[(v, sym)], u)
                merged = True
                break
            out[(v, sym)] = u
            if (u, sym) in inc and inc[(u, sym)] != v:
                union(inc[(u, sym)], v)
                merged = True
                break
            inc[(u, sym)] = v
        if not merged:
            break
    return edges, find


class CoverGraph:
    """The portion of the subgroup cover generated by tracing the
    subgroup generators, folded and (over towers) coset-identified."""

    def __init__(self, source: Union[Tower, GraphOfGroups], subgens: list[Word],
                 depth_budget: int = 2, budget: int = 8):
        self.source = source
        self.budget = budget
        if isinstance(source, Tower):
            pres = source.presentation()
            self._wp = lambda w: source.word_problem(w, budget)
        else:
            pres = source.presentation()
            self._wp = lambda w: gg.word_problem(source, w, budget)
        self.alphabet: Alphabet = pres.alphabet
        self.exact = not pres.relators

        kept: list[Word] = []
        for g in subgens:
            w = reduce_word(g, self.alphabet)
            v = self._wp(w)
            if v == TRIVIAL:
                warnings.warn(f"dropping trivial subgroup generator {format_word(g)}")
                continue
            if v == UNKNOWN:
                raise CoreError(
                    f"cannot certify nontriviality of generator {format_word(g)}")
            kept.append(w)
        self.subgens = kept

        # petal graph, one loop per generator, then free folding
        count = 1
        edges: set[Edge] = set()
        for w in kept:
            cur = 0
            for i, (sym, sign) in enumerate(w):
                nxt = 0 if i == len(w) - 1 else count
                if nxt == count:
                    count += 1
                if sign == 1:
                    edges.add((cur, sym, nxt))
                else:
                    edges.add((nxt, sym, cur))
                cur = nxt
        self._set_edges(*_fold(edges, count))
        self.rounds_log: list[int] = []
        if not self.exact:
            for _ in range(max(depth_budget, 0)):
                merges = self._identify_round()
                self.rounds_log.append(merges)
                if merges == 0:
                    break

    # -- structure ---------------------------------------------------------

    def _set_edges(self, edges: set[Edge], find):
        self.base = find(0)
        self.edges: set[Edge] = edges
        self.delta: dict[int, dict[tuple[str, int], int]] = {self.base: {}}
        for v, sym, u in edges:
            self.delta.setdefault(v, {})[(sym, 1)] = u
            self.delta.setdefault(u, {})[(sym, -1)] = v
        self.vertices = sorted(self.delta)
        self.path_words = self._bfs_paths()

    def _bfs_paths(self) -> dict[int, Word]:
        paths = {self.base: ()}
        frontier = [self.base]
        while frontier:
            nxt = []
            for v in frontier:
                for (sym, sign) in sorted(self.delta[v],
                                          key=lambda k: (self.alphabet.index(k[0]), -k[1])):
                    u = self.delta[v][(sym, sign)]
                    if u not in paths:
                        paths[u] = paths[v] + ((sym, sign),)
                        nxt.append(u)
            frontier = nxt
        return paths

    @property
    def frontier(self) -> list[tuple[int, str, int]]:
        """Missing transitions of the partial automaton."""
        out = []
        for v in self.vertices:
            for sym in self.alphabet.generators:
                for sign in (1, -1):
                    if (sym, sign) not in self.delta[v]:
                        out.append((v, sym, sign))
        return out

    @property
    def is_complete(self) -> bool:
        return not self.frontier

    def trace(self, w: Word, start: Optional[int] = None) -> Optional[int]:
        v = self.base if start is None else start
        for step in reduce_word(w):
            v = self.delta.get(v, {}).get(step)
            if v is None:
                return None
        return v

    # -- tower-regime identification --------------------------------------

    def _membership_candidates(self) -> list[Word]:
        """Short elements of the subgroup used to verify identifications."""
        out = [()]
        gens = [g for g in self.subgens] + [invert(g) for g in self.subgens]
        out += gens
        for a, b in itertools.product(gens, repeat=2):
            out.append(reduce_word(concat(a, b)))
        seen = set()
        uniq = []
        for h in out:
            if h not in seen:
                seen.add(h)
                uniq.append(h)
        return uniq

    def _identify_round(self) -> int:
        """One round: merge vertex pairs whose connecting word provably
        lies in the subgroup; returns the number of merges."""
        cands = self._membership_candidates()
        merges = 0
        merged_pairs: list[tuple[int, int]] = []
        verts = sorted(self.path_words)
        for i, u in enumerate(verts):
            for v in verts[i + 1:]:
                c = reduce_word(concat(self.path_words[u], invert(self.path_words[v])))
                if any(self._wp(concat(c, invert(h))) == TRIVIAL for h in cands):
                    merged_pairs.append((u, v))
        if not merged_pairs:
            return 0
        count = max(self.vertices) + 1
        edges = set(self.edges)
        parent = list(range(count))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in merged_pairs:
            a, b = find(u), find(v)
            if a != b:
                parent[max(a, b)] = min(a, b)
                merges += 1
        edges = {(find(a), sym, find(b)) for a, sym, b in edges}
        self._set_edges(*_fold(edges, count))
        return merges

    # -- canonical form ----------------------------------------------------

    def canonical_form(self) -> tuple:
        """Shortlex-minimal adjacency encoding after BFS renumbering; two
        covers are graph-isomorphic iff the forms are equal."""
        order = {self.base: 0}
        frontier = [self.base]
        while frontier:
            nxt = []
            for v in frontier:
                for (sym, sign) in sorted(self.delta[v],
                                          key=lambda k: (self.alphabet.index(k[0]), -k[1])):
                    u = self.delta[v][(sym, sign)]
                    if u not in order:
                        order[u] = len(order)
                        nxt.append(u)
            frontier = nxt
        return tuple(sorted(
            (order[a], sym, order[b]) for a, sym, b in self.edges))


# ---------------------------------------------------------------------------
# Core extraction
# ---------------------------------------------------------------------------


@dataclass
class LoopExpression:
    generator: Word
    steps: list[tuple[int, str, int, int]]  # (from-vertex, sym, sign, to-vertex)


@dataclass
class PieceClass:
    edge_label: str
    rank: int
    kind: str  # "Strip" | "Annulus" | "TorusTube"
    lifts: int
    note: str = ""


@dataclass
class CoreReport:
    vertices: list[int]
    edges: list[Edge]
    base: int
    loop_expressions: list[LoopExpression]
    rank: int
    exact: bool
    stabilization: dict
    cover: CoverGraph
    required: frozenset = frozenset()

    def canonical_form(self) -> tuple:
        return self.cover.canonical_form()


def expand_cover(source: Union[Tower, GraphOfGroups], subgens: list[Word],
                 depth_budget: int = 2, budget: int = 8) -> CoverGraph:
    return CoverGraph(source, subgens, depth_budget, budget)


def extract_core(C: CoverGraph, required: Optional[set] = None) -> CoreReport:
    """Finite subgraph carrying the subgroup: the union of the generator
    loops (plus any required cells), connected along BFS tree paths.

    Stabilization evidence: two further identification rounds change
    nothing.  Exact over a free base; explicitly heuristic otherwise.
    """
    required = set(required or ())
    loops: list[LoopExpression] = []
    used_edges: set[Edge] = set()
    used_vertices: set[int] = {C.base}
    for w in C.subgens:
        v = C.base
        steps = []
        for sym, sign in w:
            u = C.delta.get(v, {}).get((sym, sign))
            if u is None:
                raise CoreError(
                    f"generator loop for {format_word(w)} does not close; "
                    f"raise depth_budget")
            steps.append((v, sym, sign, u))
            used_edges.add((v, sym, u) if sign == 1 else (u, sym, v))
            used_vertices.update((v, u))
            v = u
        if v != C.base:
            raise CoreError(
                f"generator loop for {format_word(w)} does not return to base")
        loops.append(LoopExpression(w, steps))

    for cell in required:
        if isinstance(cell, int):
            used_vertices.add(cell)
        else:
            used_edges.add(cell)
            used_vertices.update((cell[0], cell[2]))
    # close up connectivity along the BFS spanning tree
    for v in list(used_vertices):
        path = C.path_words.get(v)
        if path is None:
            raise CoreError(f"required cell {v} is outside the generated cover")
        u = C.base
        for sym, sign in path:
            nxt = C.delta[u][(sym, sign)]
            used_edges.add((u, sym, nxt) if sign == 1 else (nxt, sym, u))
            used_vertices.update((u, nxt))
            u = nxt

    rank = len(used_edges) - len(used_vertices) + 1

    stab: dict = {"criterion": "generator loops closed + two quiet rounds",
                  "heuristic": not C.exact}
    if C.exact:
        stab["evidence"] = "free base: folding is exact, no rounds needed"
        stab["quiet_rounds"] = 2
    else:
        quiet = 0
        probe = C
        before = probe.canonical_form()
        for _ in range(2):
            merges = probe._identify_round()
            if merges == 0 and probe.canonical_form() == before:
                quiet += 1
            else:
                before = probe.canonical_form()
                quiet = 0
        stab["quiet_rounds"] = quiet
        stab["evidence"] = ("two further identification rounds added nothing"
                            if quiet >= 2 else "cover still moving; raise depth_budget")
        if quiet < 2:
            raise CoreError("cover not stabilized; raise depth_budget")

    return CoreReport(sorted(used_vertices), sorted(used_edges), C.base, loops,
                      rank, C.exact, stab, C, frozenset(required))


def classify_edge_pieces(R: CoreReport) -> list[PieceClass]:
    """Per edge of the base splitting: Strip (rank 0), Annulus (rank 1) or
    TorusTube (rank >= 2), with the number of closed lifts in the core."""
    source = R.cover.source
    graph = source.stages[-1].graph if isinstance(source, Tower) else source

    def kind_of(rank: int) -> str:
        return "Strip" if rank == 0 else ("Annulus" if rank == 1 else "TorusTube")

    out: list[PieceClass] = []
    base_edges = list(graph.edges)
    if not base_edges:
        # wedge of circles: each letter's edges are strips between the two
        # incident vertex entries
        for sym in R.cover.alphabet.generators:
            lifts = sum(1 for (a, s, b) in R.edges if s == sym)
            out.append(PieceClass(sym, 0, "Strip", lifts,
                                  note="rectangle support lies in the incident "
                                       "vertex entries"))
        return out
    for e in base_edges:
        if e.rank == 0:
            attach = None
        else:
            attach = e.side(1)[1][0] if e.side(1)[1] else None
        lifts = 0
        if attach is not None:
            for v in R.vertices:
                if R.cover.trace(attach, v) == v:
                    lifts += 1
        note = ("rectangle support lies in the incident vertex entries"
                if e.rank == 0 else "")
        out.append(PieceClass(e.label, e.rank, kind_of(e.rank), lifts, note))
    return out
