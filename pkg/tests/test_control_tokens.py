import math

import numpy as np
import pytest

from sketchpipe.control.embeddings import D_MODEL, EmptyName, SeededNameEmbedder, embed_name
from sketchpipe.control.fourier import DEFAULT_FOURIER, FourierConfig, fourier_embed
from sketchpipe.control.fusion import (
    FusionParams,
    ShapeMismatch,
    TooManyGroundings,
    fuse_tokens,
)
from sketchpipe.grounding import GroundingEntry, GroundingSet
from sketchpipe.tikz.ast import Point


def test_fourier_dim_is_16():
    assert DEFAULT_FOURIER.dim == 16
    assert fourier_embed((1.0, 2.0)).shape == (16,)
    assert fourier_embed((1.0, 2.0)).dtype == np.float64


def test_fourier_at_origin():
    # u = v = 0: every sin is 0, every cos is 1
    expect = np.array([0.0, 1.0, 0.0, 1.0] * 4)
    assert np.allclose(fourier_embed((0.0, 0.0)), expect, atol=1e-12)


def test_fourier_at_far_corner_x():
    # u = 5.12/5.12 = 1: band b sees angle 2^b pi, so only band 0's cos
    # flips sign; v stays at the origin pattern
    got = fourier_embed((5.12, 0.0))
    expect = np.array(
        [0.0, -1.0, 0.0, 1.0] + [0.0, 1.0, 0.0, 1.0] * 3
    )
    assert np.allclose(got, expect, atol=1e-12)


def test_fourier_band_layout():
    v = fourier_embed((1.28, 0.0))  # u = 0.25
    assert v[0] == pytest.approx(math.sin(math.pi * 0.25))
    assert v[1] == pytest.approx(math.cos(math.pi * 0.25))
    assert v[4] == pytest.approx(math.sin(2 * math.pi * 0.25))
    assert v[12] == pytest.approx(math.sin(8 * math.pi * 0.25), abs=1e-12)


def test_fourier_rejects_non_finite():
    with pytest.raises(ValueError):
        fourier_embed((math.nan, 0.0))
    with pytest.raises(ValueError):
        fourier_embed((0.0, math.inf))


def test_fourier_point_and_tuple_agree():
    assert np.array_equal(fourier_embed(Point(1.1, 2.2)), fourier_embed((1.1, 2.2)))


def test_fourier_injective_on_centimetre_grid():
    # 0.01 cm steps across the canvas; band 0 alone separates u in [0, 1]
    # because cos is strictly monotone on [0, pi], so no two grid points
    # may collide
    xs = np.round(np.arange(0, 513) * 0.01, 2)
    seen = {fourier_embed((x, 0.0)).tobytes() for x in xs}
    assert len(seen) == len(xs)
    rng = np.random.default_rng(7)
    pts = {(xs[i], xs[j]) for i, j in rng.integers(0, len(xs), size=(400, 2))}
    embedded = {fourier_embed(p).tobytes() for p in pts}
    assert len(embedded) == len(pts)


def test_custom_band_count():
    cfg = FourierConfig(bands=2)
    assert cfg.dim == 8
    assert fourier_embed((1.0, 1.0), cfg).shape == (8,)


# -- name embeddings -----------------------------------------------------


def test_embeddings_are_unit_norm_and_stable():
    a = SeededNameEmbedder().embed("zebra")
    b = SeededNameEmbedder().embed("zebra")
    assert a.shape == (D_MODEL,)
    assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-12)
    assert np.array_equal(a, b)


def test_distinct_names_are_nearly_orthogonal():
    emb = SeededNameEmbedder()
    names = ["zebra", "giraffe", "apple", "fire hydrant", "tv"]
    for i, n1 in enumerate(names):
        for n2 in names[i + 1 :]:
            assert abs(emb.embed(n1) @ emb.embed(n2)) < 0.2


def test_seed_changes_embedding():
    assert not np.array_equal(
        SeededNameEmbedder(seed=0).embed("dog"), SeededNameEmbedder(seed=1).embed("dog")
    )


def test_empty_name_raises():
    with pytest.raises(EmptyName):
        SeededNameEmbedder().embed("")


def test_embed_name_helper():
    assert np.array_equal(embed_name("cat"), SeededNameEmbedder().embed("cat"))


# -- fusion --------------------------------------------------------------


def gset(*names, x=1.0, y=2.0):
    return GroundingSet(
        entries=[GroundingEntry(name=n, center=Point(x + i * 0.1, y)) for i, n in enumerate(names)],
        source="manual",
    )


def img_tokens(k=4, d=D_MODEL, seed=3):
    return np.random.default_rng(seed).standard_normal((k, d))


def test_fused_shapes_and_mask():
    out = fuse_tokens(gset("cat", "dog"), img_tokens(), FusionParams.seeded())
    assert out.grounding_tokens.shape == (2, D_MODEL)
    assert out.fused.shape == (6, D_MODEL)
    assert np.array_equal(out.mask, np.ones(6))
    assert np.array_equal(out.fused[:2], out.grounding_tokens)
    assert np.array_equal(out.fused[2:], out.image_tokens)


def test_grounding_token_is_projection_of_features():
    params = FusionParams.seeded()
    emb = SeededNameEmbedder()
    out = fuse_tokens(gset("cat"), img_tokens(), params, embedder=emb)
    feats = np.concatenate([fourier_embed(Point(1.0, 2.0)), emb.embed("cat")])
    assert np.allclose(out.grounding_tokens[0], params.projection @ feats)


def test_padding_rows_are_zero_and_masked():
    out = fuse_tokens(gset("cat"), img_tokens(k=3), FusionParams.seeded(), pad_to=5)
    assert out.fused.shape == (8, D_MODEL)
    assert np.array_equal(out.mask, [1, 0, 0, 0, 0, 1, 1, 1])
    assert not out.fused[1:5].any()


def test_pad_to_smaller_than_count():
    with pytest.raises(ShapeMismatch, match="pad_to"):
        fuse_tokens(gset("a", "b", "c"), img_tokens(), FusionParams.seeded(), pad_to=2)


def test_permuting_groundings_permutes_rows():
    t1 = fuse_tokens(gset("cat", "dog"), img_tokens(), FusionParams.seeded())
    fwd = gset("cat", "dog")
    rev = GroundingSet(entries=list(reversed(fwd.entries)), source="manual")
    t2 = fuse_tokens(rev, img_tokens(), FusionParams.seeded())
    assert np.array_equal(t1.grounding_tokens[0], t2.grounding_tokens[1])
    assert np.array_equal(t1.grounding_tokens[1], t2.grounding_tokens[0])


def test_over_budget_groundings():
    with pytest.raises(TooManyGroundings):
        fuse_tokens(gset(*[f"o{i}" for i in range(31)]), img_tokens(), FusionParams.seeded())


def test_image_token_shape_checked():
    with pytest.raises(ShapeMismatch, match="image tokens"):
        fuse_tokens(gset("cat"), np.zeros((4, 10)), FusionParams.seeded())


def test_embedder_dim_must_fit_projection():
    with pytest.raises(ShapeMismatch, match="projection expects"):
        fuse_tokens(
            gset("cat"), img_tokens(), FusionParams.seeded(), embedder=SeededNameEmbedder(dim=100)
        )


def test_seeded_projection_is_reproducible():
    p1 = FusionParams.seeded(seed=5).projection
    p2 = FusionParams.seeded(seed=5).projection
    assert np.array_equal(p1, p2)
    assert p1.shape == (768, 784)
    assert not np.array_equal(p1, FusionParams.seeded(seed=6).projection)


def test_empty_grounding_set_gives_image_only_tokens():
    out = fuse_tokens(GroundingSet(), img_tokens(k=2), FusionParams.seeded())
    assert out.grounding_tokens.shape == (0, D_MODEL)
    assert out.fused.shape == (2, D_MODEL)
