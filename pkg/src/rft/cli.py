"""Command-line front end: tower-description DSL, command dispatch, and
deterministic structured reports.

Exit codes: 0 verified/complete, 2 refuted (with witness), 3
budget-limited/partial, 1 usage or input error.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import __version__
from . import core as core_mod
from . import embed as embed_mod
from . import flats as flats_mod
from . import tower as tower_mod
from .graphgroups import (
    EdgeGroup,
    GraphOfGroups,
    NONTRIVIAL,
    TRIVIAL,
    UNKNOWN,
    abelian_vertex,
    free_vertex,
)
from .graphgroups import word_problem as graph_word_problem
from .words import (
    Alphabet,
    GroupHom,
    SurfacePresentation,
    WordError,
    format_word,
    parse_word,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REFUTED = 2
EXIT_BUDGET = 3


class DslError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # "name" | "int" | "string" | "punct" | "eof"
    value: str
    line: int
    col: int


_PUNCT = ("->", "{", "}", "(", ")", "=", ";", ",", ":")


def _tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise DslError("unterminated string", line, col)
                j += 1
            if j >= n:
                raise DslError("unterminated string", line, col)
            toks.append(Token("string", text[i + 1:j], line, col))
            col += j - i + 1
            i = j + 1
            continue
        two = text[i:i + 2]
        if two == "->":
            toks.append(Token("punct", "->", line, col))
            i += 2
            col += 2
            continue
        if c in "{}()=;,:":
            toks.append(Token("punct", c, line, col))
            i += 1
            col += 1
            continue
        if c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise DslError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class _Stream:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, kind: str, value: Optional[str] = None) -> Token:
        t = self.peek()
        if t.kind != kind or (value is not None and t.value != value):
            want = value if value is not None else kind
            raise DslError(f"expected {want!r}, got {t.value!r}", t.line, t.col)
        return self.next()

    def accept(self, kind: str, value: Optional[str] = None) -> Optional[Token]:
        t = self.peek()
        if t.kind == kind and (value is None or t.value == value):
            return self.next()
        return None


# ---------------------------------------------------------------------------
# Tower document
# ---------------------------------------------------------------------------


@dataclass
class SummandDecl:
    kind: str  # "free" | "abelian" | "surface"
    generators: tuple[str, ...] = ()
    rank: int = 0
    genus: int = 0
    punctures: int = 0


@dataclass
class BlockDecl:
    kind: str  # "A" | "Q" | "T"
    attach: tuple[str, ...] = ()  # word texts
    rank: int = 0
    letters: tuple[str, ...] = ()
    surface: Optional[SummandDecl] = None
    boundary: tuple[tuple[str, str], ...] = ()  # (circle name, word text)
    retract: tuple[tuple[str, str], ...] = ()  # (generator, word text)
    assume: bool = False


@dataclass
class TowerDocument:
    name: str
    summands: list[SummandDecl]
    blocks: list[BlockDecl]


def _parse_surface_spec(s: _Stream) -> SummandDecl:
    s.expect("punct", "(")
    s.expect("name", "genus")
    s.expect("punct", "=")
    genus = int(s.expect("int").value)
    punctures = 0
    if s.accept("punct", ","):
        s.expect("name", "punctures")
        s.expect("punct", "=")
        punctures = int(s.expect("int").value)
    gens: list[str] = []
    if s.accept("punct", ":"):
        gens.append(s.expect("name").value)
        while s.accept("punct", ","):
            gens.append(s.expect("name").value)
    s.expect("punct", ")")
    return SummandDecl("surface", tuple(gens), genus=genus, punctures=punctures)


def _parse_summand(s: _Stream) -> SummandDecl:
    t = s.expect("name")
    if t.value == "free":
        s.expect("punct", "(")
        gens = [s.expect("name").value]
        while s.accept("punct", ","):
            gens.append(s.expect("name").value)
        s.expect("punct", ")")
        return SummandDecl("free", tuple(gens))
    if t.value == "abelian":
        s.expect("punct", "(")
        s.expect("name", "rank")
        s.expect("punct", "=")
        rank = int(s.expect("int").value)
        s.expect("punct", ":")
        gens = [s.expect("name").value]
        while s.accept("punct", ","):
            gens.append(s.expect("name").value)
        s.expect("punct", ")")
        if len(gens) != rank:
            raise DslError(f"abelian rank {rank} with {len(gens)} generators",
                           t.line, t.col)
        return SummandDecl("abelian", tuple(gens), rank=rank)
    if t.value == "surface":
        return _parse_surface_spec(s)
    raise DslError(f"unknown summand kind {t.value!r}", t.line, t.col)


def _parse_name_list(s: _Stream) -> tuple[str, ...]:
    names = [s.expect("name").value]
    while s.accept("punct", ","):
        names.append(s.expect("name").value)
    return tuple(names)


def _parse_arrow_map(s: _Stream) -> tuple[tuple[str, str], ...]:
    s.expect("punct", "{")
    pairs = []
    while not s.accept("punct", "}"):
        key = s.expect("name").value
        s.expect("punct", "->")
        val = s.expect("string").value
        pairs.append((key, val))
        s.accept("punct", ",")
        s.accept("punct", ";")
    return tuple(pairs)


def _parse_block(s: _Stream) -> BlockDecl:
    kind_tok = s.expect("name")
    kind = kind_tok.value
    if kind not in ("A", "Q", "T"):
        raise DslError(f"unknown block kind {kind!r}", kind_tok.line, kind_tok.col)
    decl = BlockDecl(kind)
    s.expect("punct", "{")
    while not s.accept("punct", "}"):
        key = s.expect("name")
        s.expect("punct", "=")
        if key.value == "attach":
            if s.accept("punct", "("):
                words = [s.expect("string").value]
                while s.accept("punct", ","):
                    words.append(s.expect("string").value)
                s.expect("punct", ")")
                decl.attach = tuple(words)
            else:
                tok = s.peek()
                if tok.kind != "string":
                    raise DslError("expected a word string after attach=",
                                   tok.line, tok.col)
                decl.attach = (s.next().value,)
        elif key.value == "rank":
            decl.rank = int(s.expect("int").value)
        elif key.value == "letters":
            decl.letters = _parse_name_list(s)
        elif key.value == "surface":
            decl.surface = _parse_surface_spec(s)
        elif key.value == "boundary":
            decl.boundary = _parse_arrow_map(s)
        elif key.value == "retract":
            decl.retract = _parse_arrow_map(s)
        elif key.value == "assume":
            decl.assume = s.expect("name").value == "true"
        else:
            raise DslError(f"unknown block field {key.value!r}", key.line, key.col)
        s.expect("punct", ";")
    return decl


def parse_tower_dsl(text: str) -> TowerDocument:
    s = _Stream(_tokenize(text))
    s.expect("name", "tower")
    name = s.expect("name").value
    s.expect("punct", "{")
    s.expect("name", "base")
    s.expect("punct", "{")
    summands = [_parse_summand(s)]
    while s.accept("punct", ";"):
        if s.peek().kind == "punct" and s.peek().value == "}":
            break
        summands.append(_parse_summand(s))
    s.expect("punct", "}")
    blocks = []
    while s.accept("name", "block"):
        blocks.append(_parse_block(s))
    s.expect("punct", "}")
    s.expect("eof")
    return TowerDocument(name, summands, blocks)


def print_tower_dsl(doc: TowerDocument) -> str:
    """Canonical printer; parse(print(doc)) == doc."""
    out = [f"tower {doc.name} {{"]
    parts = []
    for sm in doc.summands:
        if sm.kind == "free":
            parts.append(f"free({', '.join(sm.generators)})")
        elif sm.kind == "abelian":
            parts.append(f"abelian(rank={sm.rank}: {', '.join(sm.generators)})")
        else:
            spec = f"genus={sm.genus}"
            if sm.punctures:
                spec += f", punctures={sm.punctures}"
            if sm.generators:
                spec += f": {', '.join(sm.generators)}"
            parts.append(f"surface({spec})")
    out.append("  base { " + "; ".join(parts) + " }")
    for b in doc.blocks:
        lines = [f"  block {b.kind} {{"]
        if b.kind in ("A", "T"):
            if len(b.attach) == 1 and b.kind == "A":
                lines.append(f'    attach="{b.attach[0]}";')
            else:
                quoted = ", ".join(f'"{w}"' for w in b.attach)
                lines.append(f"    attach=({quoted});")
            lines.append(f"    rank={b.rank};")
            lines.append(f"    letters={', '.join(b.letters)};")
        else:
            sm = b.surface
            spec = f"genus={sm.genus}"
            if sm.punctures:
                spec += f", punctures={sm.punctures}"
            if sm.generators:
                spec += f": {', '.join(sm.generators)}"
            lines.append(f"    surface=({spec});")
            bnd = ", ".join(f'{k} -> "{v}"' for k, v in b.boundary)
            lines.append(f"    boundary={{ {bnd} }};")
            ret = ", ".join(f'{k} -> "{v}"' for k, v in b.retract)
            lines.append(f"    retract={{ {ret} }};")
        if b.assume:
            lines.append("    assume=true;")
        lines.append("  }")
        out.extend(lines)
    out.append("}")
    return "\n".join(out) + "\n"


def build_tower(doc: TowerDocument, budget: int = 8) -> tower_mod.Tower:
    summands = []
    for sm in doc.summands:
        if sm.kind == "free":
            summands.append(tower_mod.free_summand(*sm.generators))
        elif sm.kind == "abelian":
            summands.append(tower_mod.abelian_summand(*sm.generators))
        else:
            surf = SurfacePresentation(sm.genus, sm.punctures, sm.generators)
            summands.append(tower_mod.surface_vertex("", surf))
    T = tower_mod.new_height0(summands)
    for b in doc.blocks:
        alph = T.alphabet()
        if b.kind == "A":
            block = tower_mod.BlockA(parse_word(b.attach[0], alph), b.rank, b.letters)
        elif b.kind == "T":
            words = tuple(parse_word(w, alph) for w in b.attach)
            block = tower_mod.BlockT(words, b.rank, b.letters)
        else:
            sm = b.surface
            surf = SurfacePresentation(sm.genus, sm.punctures, sm.generators)
            circles = [f"b{i + 1}" for i in range(surf.punctures)]
            given = dict(b.boundary)
            missing = [c for c in circles if c not in given]
            if missing:
                raise WordError(f"boundary circle(s) {', '.join(missing)} unassigned")
            attach = tuple(parse_word(given[c], alph) for c in circles)
            retract = {g: parse_word(w, alph) for g, w in b.retract}
            block = tower_mod.BlockQ(surf, attach, retract)
        T = tower_mod.attach_block(T, block, budget, assume=b.assume)
    return T


# ---------------------------------------------------------------------------
# Splitting documents (for `embed`)
# ---------------------------------------------------------------------------


def parse_splitting(text: str, gamma_prime: tower_mod.Tower):
    """Parse a splitting/quotient document into SplittingData and
    StrictQuotientData against the given target tower."""
    s = _Stream(_tokenize(text))
    s.expect("name", "splitting")
    s.expect("name")  # document name, unused beyond round-trip context
    s.expect("punct", "{")
    kind = None
    vertices: list = []
    base = None
    edge = None
    nu_pairs: tuple[tuple[str, str], ...] = ()
    surface_decl = None
    special = None
    stable = None
    while not s.accept("punct", "}"):
        key = s.expect("name")
        if key.value == "kind":
            s.expect("punct", "=")
            kind = s.expect("name").value
            s.expect("punct", ";")
        elif key.value == "vertex":
            label = s.expect("name").value
            s.expect("punct", "{")
            sm = _parse_summand(s)
            s.expect("punct", "}")
            vertices.append((label, sm))
        elif key.value == "base":
            s.expect("punct", "=")
            base = s.expect("name").value
            s.expect("punct", ";")
        elif key.value == "edge":
            elabel = s.expect("name").value
            s.expect("punct", "{")
            sides = {}
            while not s.accept("punct", "}"):
                which = s.expect("name").value
                s.expect("punct", "=")
                vlab = s.expect("name").value
                s.expect("punct", ":")
                word = s.expect("string").value
                sides[which] = (vlab, word)
                s.expect("punct", ";")
            edge = (elabel, sides)
        elif key.value == "nu":
            nu_pairs = _parse_arrow_map(s)
        elif key.value == "surface":
            s.expect("punct", "=")
            surface_decl = _parse_surface_spec(s)
            s.expect("punct", ";")
        elif key.value == "special":
            s.expect("punct", "=")
            special = s.expect("name").value
            s.expect("punct", ";")
        elif key.value == "stable":
            s.expect("punct", "=")
            stable = s.expect("name").value
            s.expect("punct", ";")
        else:
            raise DslError(f"unknown splitting field {key.value!r}",
                           key.line, key.col)
    s.expect("eof")
    if kind is None or edge is None or not vertices:
        raise WordError("splitting document needs kind, vertices, and an edge")

    vgroups = []
    for label, sm in vertices:
        if sm.kind == "free":
            vgroups.append(free_vertex(label, Alphabet(sm.generators)))
        elif sm.kind == "abelian":
            vgroups.append(abelian_vertex(label, Alphabet(sm.generators)))
        else:
            raise WordError("surface vertices are declared via the qh surface field")
    by_label = {v.label: v for v in vgroups}
    elabel, sides = edge
    lv, lw = sides["left"]
    rv, rw = sides["right"]
    e = EdgeGroup(elabel, 1,
                  (lv, (parse_word(lw, by_label[lv].alphabet),)),
                  (rv, (parse_word(rw, by_label[rv].alphabet),)),
                  stable_letter=stable)
    L = GraphOfGroups(vgroups, [e], base or vgroups[0].label)
    L_alph = L.presentation().alphabet
    gp_alph = gamma_prime.alphabet()
    given = dict(nu_pairs)
    images = {}
    for g in L_alph.generators:
        if g in given:
            images[g] = parse_word(given[g], gp_alph)
        elif g in gp_alph:
            images[g] = parse_word(g, gp_alph)
        else:
            raise WordError(f"nu image missing for generator {g!r}")
    rho = GroupHom(L_alph, gp_alph, images)
    D = embed_mod.StrictQuotientData(rho, GroupHom.identity(gp_alph), gamma_prime)
    surf = None
    if surface_decl is not None:
        surf = SurfacePresentation(surface_decl.genus, surface_decl.punctures,
                                   surface_decl.generators)
    S = embed_mod.SplittingData(kind, L, elabel, surface=surf,
                                special_vertex=special)
    return S, D


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


class Report:
    """Flat key/value report with stable ordering."""

    def __init__(self, command: str, source_text: str):
        self.lines: list[str] = [
            f"command: {command}",
            f"version: {__version__}",
            f"input-digest: {_digest(source_text)}",
        ]

    def add(self, key: str, value) -> None:
        self.lines.append(f"{key}: {value}")

    def render(self) -> str:
        return "\n".join(self.lines) + "\n"


def _obligation_lines(rep: Report, obligations):
    for i, ob in enumerate(obligations):
        rep.add(f"obligation-{i}", f"{ob.name} {ob.status} ({ob.detail})")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_present(args, text: str) -> tuple[int, Report]:
    doc = parse_tower_dsl(text)
    T = build_tower(doc)
    stage = args.stage if args.stage is not None else T.height
    if not (0 <= stage <= T.height):
        raise WordError(f"stage {stage} out of range 0..{T.height}")
    pres = T.presentation(stage)
    rep = Report("present", text)
    rep.add("tower", doc.name)
    rep.add("height", T.height)
    rep.add("stage", stage)
    rep.add("generators", " ".join(pres.alphabet.generators))
    for i, r in enumerate(pres.relators):
        rep.add(f"relator-{i}", format_word(r))
    _obligation_lines(rep, T.obligations())
    return EXIT_OK, rep


def _cmd_wp(args, text: str) -> tuple[int, Report]:
    doc = parse_tower_dsl(text)
    T = build_tower(doc)
    w = parse_word(args.word, T.alphabet())
    verdict = T.word_problem(w, args.budget)
    rep = Report("wp", text)
    rep.add("tower", doc.name)
    rep.add("word", format_word(w) or "1")
    rep.add("budget", args.budget)
    rep.add("verdict", verdict)
    return (EXIT_OK if verdict != UNKNOWN else EXIT_BUDGET), rep


def _cmd_witness(args, text: str) -> tuple[int, Report]:
    doc = parse_tower_dsl(text)
    T = build_tower(doc)
    alph = T.alphabet()
    words = [parse_word(w, alph) for w in args.words.split(";") if w.strip()]
    cert = tower_mod.find_rf_witness(T, words, args.budget, seed=args.seed)
    rep = Report("witness", text)
    rep.add("tower", doc.name)
    rep.add("budget", args.budget)
    rep.add("seed", args.seed)
    rep.add("family", cert.family or "identity")
    rep.add("verdict", cert.verdict)
    rep.add("target", " ".join(cert.target.generators))
    if cert.verdict == "valid":
        for g in sorted(cert.hom.images):
            rep.add(f"image-{g}", format_word(cert.hom.images[g]) or "1")
        for w, img in zip(cert.words, cert.images):
            rep.add(f"word-image {format_word(w) or '1'}", format_word(img) or "1")
        return EXIT_OK, rep
    rep.add("attempts", len(cert.trace))
    if cert.trace:
        rep.add("last-collision", cert.trace[-1][1])
    return EXIT_BUDGET, rep


def _cmd_embed(args, text: str) -> tuple[int, Report]:
    doc = parse_tower_dsl(text)
    T = build_tower(doc)
    with open(args.splitting, encoding="utf-8") as f:
        spl_text = f.read()
    S, D = parse_splitting(spl_text, T)
    rep = Report("embed", text + spl_text)
    rep.add("tower", doc.name)
    rep.add("kind", S.kind)
    try:
        R = embed_mod.embed_step(S, D, args.budget, assume=args.assume)
    except embed_mod.EmbedError as exc:
        rep.add("verdict", "refuted")
        rep.add("witness", str(exc))
        return EXIT_REFUTED, rep
    rep.add("gamma-generators", " ".join(R.gamma.alphabet().generators))
    for i, r in enumerate(R.gamma.presentation().relators):
        rep.add(f"gamma-relator-{i}", format_word(r))
    for g in sorted(R.j.images):
        rep.add(f"j-{g}", format_word(R.j.images[g]) or "1")
    rep.add("U", " ; ".join(format_word(g) for g in R.U.generators))
    rep.add("U-status", R.U.status)
    _obligation_lines(rep, R.obligations)
    cert = embed_mod.certify_injectivity_on_ball(
        R, lambda w, b: graph_word_problem(S.L, w, b), args.ball, args.budget)
    rep.add("ball-radius", cert.radius)
    rep.add("ball-elements", len(cert.entries))
    rep.add("ball-unknowns", len(cert.unknowns))
    rep.add("ball-refutations", len(cert.refutations))
    rep.add("certificate", cert.status)
    if cert.status == "refuted":
        rep.add("witness", format_word(cert.refutations[0].word))
        return EXIT_REFUTED, rep
    if cert.status == "partial":
        return EXIT_BUDGET, rep
    return EXIT_OK, rep


def _cmd_core(args, text: str) -> tuple[int, Report]:
    doc = parse_tower_dsl(text)
    T = build_tower(doc)
    alph = T.alphabet()
    gens = [parse_word(w, alph) for w in args.gens.split(";") if w.strip()]
    rep = Report("core", text)
    rep.add("tower", doc.name)
    try:
        C = core_mod.expand_cover(T, gens, depth_budget=args.depth,
                                  budget=args.budget)
        required = set()
        if args.require:
            required = {int(x) for x in args.require.split(",") if x.strip()}
        R = core_mod.extract_core(C, required)
    except core_mod.CoreError as exc:
        rep.add("verdict", "budget-limited")
        rep.add("detail", str(exc))
        return EXIT_BUDGET, rep
    rep.add("vertices", len(R.vertices))
    rep.add("edges", len(R.edges))
    rep.add("rank", R.rank)
    rep.add("exact", str(R.exact).lower())
    rep.add("stabilization", R.stabilization["evidence"])
    for p in core_mod.classify_edge_pieces(R):
        rep.add(f"piece-{p.edge_label}", f"{p.kind} lifts={p.lifts}")
    for i, loop in enumerate(R.loop_expressions):
        path = " ".join(f"{a}-{sym}{'' if sg == 1 else chr(39)}-{b}"
                        for a, sym, sg, b in loop.steps)
        rep.add(f"loop-{i}", f"{format_word(loop.generator)} : {path}")
    return EXIT_OK, rep


def _cmd_flats(args, text: str) -> tuple[int, Report]:
    doc = parse_tower_dsl(text)
    T = build_tower(doc)
    rep = Report("flats", text)
    rep.add("tower", doc.name)
    inventory = flats_mod.flat_inventory(T, args.budget)
    rep.add("flat-classes", len(inventory))
    for i, f in enumerate(inventory):
        rep.add(f"flat-{i}",
                f"rank={f.rank} stage={f.block_index} origin={f.origin} "
                f"lattice=({'; '.join(format_word(g) for g in f.lattice)})")
    code = EXIT_OK
    if T.height >= 1:
        alph = T.alphabet()
        gens = ([parse_word(w, alph) for w in args.gens.split(";") if w.strip()]
                if args.gens else [parse_word(g, alph) for g in alph.generators])
        C = core_mod.expand_cover(T, gens, budget=args.budget)
        R = core_mod.extract_core(C)
        colored = flats_mod.color_vertices(R, T)
        report = flats_mod.check_isolation_hypotheses(colored, T, args.power_budget)
        for v in report.verdicts:
            val = v.status
            if v.witness:
                val += f" witness={v.witness}"
            if v.detail:
                val += f" ({v.detail})"
            rep.add(v.name, val)
        statuses = [v.status for v in report.verdicts]
        if "refuted" in statuses:
            code = EXIT_REFUTED
        elif "verified-to-budget" in statuses:
            code = EXIT_BUDGET
    return code, rep


def _cmd_selftest(args) -> tuple[int, Report]:
    from .words import reduce_word, is_proper_power, enumerate_ball
    rep = Report("selftest", "")
    ab = Alphabet(("a", "b"))
    checks = [
        ("reduce", format_word(reduce_word(parse_word("a a^-1 b", ab))) == "b"),
        ("proper-power", is_proper_power(parse_word("a b a b", ab)) is not None),
        ("ball", len(enumerate_ball(ab, 2)) == 17),
    ]
    T = build_tower(parse_tower_dsl(
        'tower selftest { base { free(a,b) } '
        'block A { attach="[a,b]"; rank=2; letters=t; } }'))
    checks.append(("relator-trivial",
                   T.word_problem(parse_word("[[a,b],t]", T.alphabet())) == TRIVIAL))
    checks.append(("commutator-nontrivial",
                   T.word_problem(parse_word("[a,t]", T.alphabet())) == NONTRIVIAL))
    ok = True
    for name, passed in checks:
        rep.add(f"check-{name}", "pass" if passed else "FAIL")
        ok = ok and passed
    rep.add("verdict", "verified" if ok else "refuted")
    return (EXIT_OK if ok else EXIT_REFUTED), rep


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rft", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("present", help="print a tower presentation")
    sp.add_argument("file")
    sp.add_argument("--stage", type=int, default=None)

    sp = sub.add_parser("wp", help="tower word problem")
    sp.add_argument("file")
    sp.add_argument("--word", required=True)
    sp.add_argument("--budget", type=int, default=8)

    sp = sub.add_parser("witness", help="residual-freeness witness search")
    sp.add_argument("file")
    sp.add_argument("--words", required=True)
    sp.add_argument("--budget", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("embed", help="one-edge splitting embedding")
    sp.add_argument("file")
    sp.add_argument("--splitting", required=True)
    sp.add_argument("--ball", type=int, default=2)
    sp.add_argument("--budget", type=int, default=8)
    sp.add_argument("--assume", action="store_true")

    sp = sub.add_parser("core", help="cover expansion and core extraction")
    sp.add_argument("file")
    sp.add_argument("--gens", required=True)
    sp.add_argument("--depth", type=int, default=2)
    sp.add_argument("--budget", type=int, default=8)
    sp.add_argument("--require", default="")

    sp = sub.add_parser("flats", help="flat inventory and isolation hypotheses")
    sp.add_argument("file")
    sp.add_argument("--gens", default="")
    sp.add_argument("--budget", type=int, default=8)
    sp.add_argument("--power-budget", type=int, dest="power_budget", default=8)

    sub.add_parser("selftest", help="quick internal checks")
    return p


def run_command(argv: list[str]) -> tuple[int, str]:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_USAGE if exc.code else EXIT_OK), ""
    try:
        if args.command == "selftest":
            code, rep = _cmd_selftest(args)
        else:
            with open(args.file, encoding="utf-8") as f:
                text = f.read()
            handler = {
                "present": _cmd_present,
                "wp": _cmd_wp,
                "witness": _cmd_witness,
                "embed": _cmd_embed,
                "core": _cmd_core,
                "flats": _cmd_flats,
            }[args.command]
            code, rep = handler(args, text)
    except (DslError, WordError, ValueError, OSError) as exc:
        return EXIT_USAGE, f"error: {exc}\n"
    return code, rep.render()


def main() -> None:
    code, output = run_command(sys.argv[1:])
    sys.stdout.write(output)
    raise SystemExit(code)


if __name__ == "__main__":
    main()
