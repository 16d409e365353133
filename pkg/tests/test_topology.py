import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ssgforms import topology as tp
from ssgforms.topology import Address, EmbeddingParams, Symmetry, canonicalize


def brute_vertices(m):
    """Distinct points G_w(p_i) over all |w| = m, found by embedding and rounding."""
    pts = set()
    for w in tp.words(m):
        for c in tp.CORNERS:
            x = tp.embed(Address(w, c), EmbeddingParams(0.5))
            pts.add((round(x[0], 9), round(x[1], 9)))
    return pts


class TestCanonicalize:
    def test_examples(self):
        assert canonicalize("", 1) == Address("", 1)
        assert canonicalize("12", 2) == Address("1", 2)
        assert canonicalize("122", 2) == Address("1", 2)

    def test_bad_corner(self):
        with pytest.raises(ValueError):
            canonicalize("1", 4)
        with pytest.raises(ValueError):
            canonicalize("14", 1)

    def test_idempotent_exhaustive(self):
        for k in range(6):
            for w in tp.words(k):
                for c in tp.CORNERS:
                    a = canonicalize(w, c)
                    assert a.is_canonical
                    assert canonicalize(a.word, a.corner) == a

    def test_parse_roundtrip(self):
        for a in tp.vertex_set(3):
            assert Address.parse(str(a)) == a
        assert Address.parse(":1") == Address("", 1)
        assert Address.parse("∅:2") == Address("", 2)
        with pytest.raises(ValueError):
            Address.parse("12")


class TestVertexSet:
    def test_small(self):
        assert tp.vertex_set(0) == [Address("", 1), Address("", 2), Address("", 3)]
        assert len(tp.vertex_set(1)) == 9

    @pytest.mark.parametrize("m", range(7))
    def test_cardinality(self, m):
        assert len(tp.vertex_set(m)) == 3 ** (m + 1)

    @pytest.mark.parametrize("m", range(5))
    def test_matches_brute_enumeration(self, m):
        # Every point G_w(p_i), |w| = m, is named exactly once.
        assert len(brute_vertices(m)) == 3 ** (m + 1) == len(tp.vertex_set(m))

    def test_nested_prefix(self):
        assert tp.vertex_set(3)[:27] == tp.vertex_set(2)

    def test_level_cap(self, monkeypatch):
        with pytest.raises(tp.LevelError):
            tp.vertex_set(9)
        monkeypatch.setenv("SSG_MAX_LEVEL", "2")
        with pytest.raises(tp.LevelError):
            tp.vertex_set(3)
        assert len(tp.vertex_set(2)) == 27


class TestEmbed:
    def test_corner(self):
        for alpha in (0.2, 0.5, 0.8):
            params = EmbeddingParams(alpha)
            assert np.allclose(tp.embed(Address("", 1), params), params.corners[0])

    def test_single_contraction(self):
        params = EmbeddingParams(0.5)
        p1, p2, _ = params.corners
        assert np.allclose(tp.embed(Address("1", 2), params), p1 + 0.25 * (p2 - p1))

    def test_two_steps(self):
        params = EmbeddingParams(0.5)
        p1, p2, p3 = params.corners
        inner = 0.25 * (p3 - p2) + p2
        outer = 0.25 * (inner - p1) + p1
        assert np.allclose(tp.embed(Address("12", 3), params), outer)

    def test_default_corners_valid(self):
        params = EmbeddingParams()
        pts = params.corners
        for a, b in itertools.combinations(pts, 2):
            assert np.linalg.norm(a - b) == pytest.approx(1.0, abs=1e-15)
        assert np.linalg.norm(sum(pts)) < 1e-15

    def test_rejects_bad_params(self):
        with pytest.raises(ValueError):
            EmbeddingParams(1.0)
        with pytest.raises(ValueError):
            EmbeddingParams(0.5, (np.zeros(2), np.ones(2), np.array([2.0, 0.0])))

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
    @pytest.mark.parametrize("m", range(6))
    def test_injective(self, alpha, m):
        params = EmbeddingParams(alpha)
        pts = np.array([tp.embed(a, params) for a in tp.vertex_set(m)])
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff**2).sum(-1)) + np.eye(len(pts))
        assert dist.min() > 0

    def test_coordinates_csv(self):
        text = tp.coordinates_csv(1)
        assert text.splitlines()[0] == "address,x,y"
        assert len(text.splitlines()) == 10


class TestSymmetry:
    def test_identity(self):
        for a in tp.vertex_set(3):
            assert tp.apply_symmetry(tp.IDENTITY, a) == a

    def test_swap(self):
        assert tp.apply_symmetry(Symmetry((2, 1, 3)), Address("1", 2)) == Address("2", 1)

    def test_cycle_order_three(self):
        cyc = Symmetry((2, 3, 1))
        for a in tp.vertex_set(3):
            b = a
            for _ in range(3):
                b = tp.apply_symmetry(cyc, b)
            assert b == a

    def test_group_action(self):
        verts = tp.vertex_set(3)
        for s, t in itertools.product(tp.SYMMETRIES, repeat=2):
            st_ = s.compose(t)
            for a in verts:
                assert tp.apply_symmetry(st_, a) == tp.apply_symmetry(s, tp.apply_symmetry(t, a))

    def test_six_elements_and_inverses(self):
        assert len(set(tp.SYMMETRIES)) == 6
        for s in tp.SYMMETRIES:
            assert s.compose(s.inverse()) == tp.IDENTITY

    def test_is_isometry_of_embedding(self):
        # Relabeling corners moves G_w(p_i) by the matching isometry of the triangle.
        params = EmbeddingParams(0.4)
        P = np.array(params.corners)
        for s in tp.SYMMETRIES:
            Q = np.array([params.corners[s(i) - 1] for i in tp.CORNERS])
            A, *_ = np.linalg.lstsq(P, Q, rcond=None)
            for a in tp.vertex_set(2):
                assert np.allclose(tp.embed(a, params) @ A, tp.embed(tp.apply_symmetry(s, a), params))

    def test_bad_permutation(self):
        with pytest.raises(ValueError):
            Symmetry((1, 1, 2))


class TestSgClass:
    def test_examples(self):
        assert tp.sg_class(Address("", 1), 2) == tp.sg_class(canonicalize("11", 1), 2)
        c = tp.sg_class(Address("1", 2), 1)
        assert set(c.members) == {Address("1", 2), Address("2", 1)}
        c = tp.sg_class(Address("12", 3), 2)
        assert set(c.members) == {Address("12", 3), Address("13", 2)}
        assert c.representative == Address("12", 3)

    def test_bridge_endpoints_collapse(self):
        for seg in tp.segment_list(4):
            a, b = seg.endpoints()
            assert tp.sg_class(a, 4) == tp.sg_class(b, 4)

    def test_representative_is_least(self):
        for c in tp.sg_vertex_set(3):
            assert c.representative == min(c.members, key=Address.sort_key)

    @pytest.mark.parametrize("m", range(6))
    def test_count(self, m):
        # Oracle: distinct points of the (alpha -> 0) gasket embedding.
        params = EmbeddingParams(1e-12)
        pts = {tuple(np.round(tp.embed(a, params), 7)) for a in tp.vertex_set(m)}
        assert len(tp.sg_vertex_set(m)) == len(pts) == 3 * (3**m + 1) // 2

    def test_sg_embedding_agrees(self):
        # With alpha -> 0 the SSG collapses onto SG; classes are the coincident points.
        params = EmbeddingParams(1e-12)
        for c in tp.sg_vertex_set(3):
            pts = [tp.embed(a, params) for a in c.members]
            assert all(np.allclose(pts[0], q, atol=1e-9) for q in pts)

    def test_too_deep(self):
        with pytest.raises(ValueError):
            tp.sg_class(Address("123", 1), 2)


class TestSegments:
    def test_counts_and_blocks(self):
        segs = tp.segment_list(3)
        assert len(segs) == 3 + 9 + 27
        for k in (1, 2, 3):
            assert all(s.level == k for s in segs[tp.segment_block(k)])

    def test_parse(self):
        s = tp.Segment.parse("∅:12")
        assert s == tp.Segment("", (1, 2))
        assert tp.Segment.parse(str(tp.Segment("31", (2, 3)))) == tp.Segment("31", (2, 3))
        with pytest.raises(ValueError):
            tp.Segment("", (2, 1))


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="123", max_size=6), st.sampled_from([1, 2, 3]), st.sampled_from(tp.SYMMETRIES))
def test_symmetry_commutes_with_canonicalize(word, corner, s):
    a = canonicalize(word, corner)
    direct = canonicalize(s.map_word(word), s(corner))
    assert tp.apply_symmetry(s, a) == direct
