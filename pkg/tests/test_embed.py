import pytest

from rft import embed as em
from rft import tower as tw
from rft.graphgroups import (
    EdgeGroup,
    GraphOfGroups,
    NONTRIVIAL,
    TRIVIAL,
    abelian_vertex,
    free_vertex,
    word_problem,
)
from rft.words import (
    GroupHom,
    SurfacePresentation,
    alphabet,
    format_word,
    parse_word,
    reduce_word,
)

AB = alphabet("a", "b")


def _double():
    cd = alphabet("c", "d")
    vA = free_vertex("vA", AB)
    vB = free_vertex("vB", cd)
    e = EdgeGroup("E", 1, ("vA", (parse_word("[a,b]", AB),)),
                  ("vB", (parse_word("[c,d]", cd),)))
    return GraphOfGroups([vA, vB], [e], "vA")


def _double_data(nu_c="a", nu_d="b"):
    L = _double()
    gp = tw.new_height0([tw.free_summand("a", "b")])
    Lal = L.presentation().alphabet
    rho = GroupHom(Lal, gp.alphabet(), {
        "a": parse_word("a"), "b": parse_word("b"),
        "c": parse_word(nu_c), "d": parse_word(nu_d)})
    D = em.StrictQuotientData(rho, GroupHom.identity(gp.alphabet()), gp)
    return em.SplittingData("amalgam", L, "E"), D


def test_maximal_abelian_free_locus(free2):
    loc = em.maximal_abelian_containing(free2, parse_word("[a,b]"))
    assert loc.status == "verified"
    assert [format_word(g) for g in loc.generators] == ["a b a^-1 b^-1"]
    loc = em.maximal_abelian_containing(free2, parse_word("a^2"))
    assert [format_word(g) for g in loc.generators] == ["a"]
    loc = em.maximal_abelian_containing(free2, parse_word("b a^2 b^-1"))
    assert [format_word(g) for g in loc.generators] == ["b a b^-1"]


def test_maximal_abelian_lattice_locus(gamma):
    loc = em.maximal_abelian_containing(gamma, parse_word("t", gamma.alphabet()))
    assert loc.status == "verified"
    assert len(loc.generators) == 2


def test_embed_amalgam_double():
    S, D = _double_data()
    R = em.embed_step(S, D)
    assert R.gamma.alphabet().generators == ("a", "b", "t")
    assert [format_word(r) for r in R.gamma.presentation().relators] == [
        "a b a^-1 b^-1 t b a b^-1 a^-1 t^-1"]
    assert format_word(R.j.images["c"]) == "t a t^-1"
    assert format_word(R.j.images["d"]) == "t b t^-1"
    # hard postcondition: relator images die
    for r in S.L.presentation().relators:
        assert R.gamma.word_problem(R.j.apply(r)) == TRIVIAL


def test_embed_amalgam_certificate():
    S, D = _double_data()
    R = em.embed_step(S, D)
    cert = em.certify_injectivity_on_ball(
        R, lambda w, b: word_problem(S.L, w, b), 2)
    assert cert.status == "full"
    assert not cert.refutations and not cert.unknowns


def test_certificate_radius0_vacuous():
    S, D = _double_data()
    R = em.embed_step(S, D)
    cert = em.certify_injectivity_on_ball(
        R, lambda w, b: word_problem(S.L, w, b), 0)
    assert cert.status == "full"
    assert cert.entries == []


def test_corrupted_j_refuted():
    S, D = _double_data()
    R = em.embed_step(S, D)
    bad_images = dict(R.j.images)
    bad_images["c"] = parse_word("a", R.gamma.alphabet())
    R_bad = em.EmbeddingResult(R.gamma, GroupHom(R.j.source, R.j.target, bad_images),
                               R.U, R.new_letter, R.obligations)
    cert = em.certify_injectivity_on_ball(
        R_bad, lambda w, b: word_problem(S.L, w, b), 2)
    assert cert.status == "refuted"
    assert any(format_word(e.word) in ("c a^-1", "a c^-1", "a^-1 c", "c^-1 a")
               for e in cert.refutations)


def test_embed_hnn():
    # L = <a, s | s a s^-1 = a> = Z^2; nu collapses s onto a
    va = free_vertex("vA", alphabet("a"))
    e = EdgeGroup("E", 1, ("vA", (parse_word("a", alphabet("a")),)),
                  ("vA", (parse_word("a", alphabet("a")),)), stable_letter="s")
    L = GraphOfGroups([va], [e], "vA")
    gp = tw.new_height0([tw.free_summand("a", "b")])
    Lal = L.presentation().alphabet
    rho = GroupHom(Lal, gp.alphabet(),
                   {"a": parse_word("a"), "s": parse_word("a")})
    D = em.StrictQuotientData(rho, GroupHom.identity(gp.alphabet()), gp)
    S = em.SplittingData("hnn", L, "E")
    R = em.embed_step(S, D)
    # j(s) = t nu(s)
    t = R.new_letter
    assert format_word(R.j.images["s"]) == f"{t} a"
    for r in L.presentation().relators:
        assert R.gamma.word_problem(R.j.apply(r)) == TRIVIAL


def test_embed_abelian_vertex():
    # L = <a> *_{a = x} Z^2(x,y); nu sends the edge to a in the free target
    va = free_vertex("vA", alphabet("a"))
    vb = abelian_vertex("vB", alphabet("x", "y"))
    e = EdgeGroup("E", 1, ("vA", (parse_word("a", alphabet("a")),)),
                  ("vB", (parse_word("x", alphabet("x", "y")),)))
    L = GraphOfGroups([va, vb], [e], "vA")
    gp = tw.new_height0([tw.free_summand("a", "b")])
    Lal = L.presentation().alphabet
    rho = GroupHom(Lal, gp.alphabet(), {
        "a": parse_word("a"), "x": parse_word("a"), "y": ()})
    D = em.StrictQuotientData(rho, GroupHom.identity(gp.alphabet()), gp)
    S = em.SplittingData("abelian", L, "E", special_vertex="vB")
    R = em.embed_step(S, D)
    # the tower gained a rank-2 torus block over <a>
    top = R.gamma.stages[-1].block
    assert isinstance(top, tw.BlockT) and top.rank == 2
    assert format_word(R.j.images["x"]) == "a"
    s = top.letters[0]
    assert format_word(R.j.images["y"]) == s
    for r in L.presentation().relators:
        assert R.gamma.word_problem(R.j.apply(r)) == TRIVIAL


def test_embed_qh():
    # QH vertex: once-punctured torus glued to <a,b> along [a,b]
    surf = SurfacePresentation(1, 1, ("x", "y"))
    va = free_vertex("vA", AB)
    vq = free_vertex("vQ", alphabet("x", "y"))
    e = EdgeGroup("E", 1, ("vA", (parse_word("[a,b]", AB),)),
                  ("vQ", (parse_word("[x,y]", alphabet("x", "y")),)))
    L = GraphOfGroups([va, vq], [e], "vA")
    gp = tw.new_height0([tw.free_summand("a", "b")])
    Lal = L.presentation().alphabet
    rho = GroupHom(Lal, gp.alphabet(), {
        "a": parse_word("a"), "b": parse_word("b"),
        "x": parse_word("a"), "y": parse_word("b")})
    D = em.StrictQuotientData(rho, GroupHom.identity(gp.alphabet()), gp)
    S = em.SplittingData("qh", L, "E", surface=surf, special_vertex="vQ")
    R = em.embed_step(S, D)
    top = R.gamma.stages[-1].block
    assert isinstance(top, tw.BlockQ)
    for r in L.presentation().relators:
        assert R.gamma.word_problem(R.j.apply(r)) == TRIVIAL


# -- strict-quotient validation ----------------------------------------------

def test_validate_double_verified():
    S, D = _double_data()
    rep = {b.name: b for b in em.validate_strict_quotient(S, D, 2)}
    assert rep["edge-injective-maximal"].status == "verified"
    assert rep["envelope-injective"].status == "verified"
    assert rep["abelian-peripheral"].status == "not-applicable"


def test_validate_killed_edge_refuted():
    S, D = _double_data(nu_c="b", nu_d="a")
    # nu(E) = [b,a] is still fine; kill it instead via c,d -> a,a
    S2, D2 = _double_data(nu_c="a", nu_d="a")
    rep = {b.name: b for b in em.validate_strict_quotient(S2, D2, 1)}
    assert rep["edge-injective-maximal"].status == "refuted"


def test_validate_qh_abelian_image_refuted():
    surf = SurfacePresentation(1, 1, ("x", "y"))
    va = free_vertex("vA", AB)
    vq = free_vertex("vQ", alphabet("x", "y"))
    e = EdgeGroup("E", 1, ("vA", (parse_word("[a,b]", AB),)),
                  ("vQ", (parse_word("[x,y]", alphabet("x", "y")),)))
    L = GraphOfGroups([va, vq], [e], "vA")
    gp = tw.new_height0([tw.free_summand("a", "b")])
    Lal = L.presentation().alphabet
    # both surface generators land on powers of a: abelian image
    rho = GroupHom(Lal, gp.alphabet(), {
        "a": parse_word("a"), "b": parse_word("b"),
        "x": parse_word("a"), "y": parse_word("a^2")})
    D = em.StrictQuotientData(rho, GroupHom.identity(gp.alphabet()), gp)
    S = em.SplittingData("qh", L, "E", surface=surf, special_vertex="vQ")
    rep = {b.name: b for b in em.validate_strict_quotient(S, D, 1)}
    assert rep["qh-nonabelian"].status == "refuted"


def test_validate_monotone_in_budget():
    S, D = _double_data()
    low = {b.name: b.status for b in em.validate_strict_quotient(S, D, 1, budget=2)}
    high = {b.name: b.status for b in em.validate_strict_quotient(S, D, 1, budget=12)}
    for name, status in low.items():
        if status in ("verified", "refuted"):
            assert high[name] == status
