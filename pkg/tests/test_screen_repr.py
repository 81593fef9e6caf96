import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semtransport.corpus import generate_corpus, generate_snapshot, reference_snapshot
from semtransport.frame_codec import HEADER_SIZE, Modality, decode_frame, default_registry
from semtransport.screen_repr import (
    MalformedLine,
    NodeRecord,
    ScreenSnapshot,
    Source,
    UiNode,
    assemble_hybrid,
    encode_compact_text,
    load_corpus,
    parse_compact_text,
    plan_tiling,
    save_corpus,
)

EXAMPLE = '[e2] button "Back" @132,52 32x32 [click]'


@pytest.fixture
def registry():
    return default_registry()


def test_example_line_verbatim():
    node = UiNode(2, "button", "Back", 132, 52, 32, 32, ("click",))
    assert encode_compact_text(ScreenSnapshot(1920, 1080, node)).decode() == EXAMPLE


def test_example_line_parses():
    assert parse_compact_text(EXAMPLE.encode()) == [
        NodeRecord(2, "button", "Back", 132, 52, 32, 32, ("click",))
    ]


def test_empty_tree_is_single_root_line():
    snap = ScreenSnapshot(800, 600, UiNode(0, "window"))
    assert encode_compact_text(snap) == b'[e0] window "" @0,0 0x0'


def test_pre_order():
    leaf = lambda i: UiNode(i, "text", f"n{i}")  # noqa: E731
    root = UiNode(0, "window", children=(UiNode(1, "group", children=(leaf(2), leaf(3))), leaf(4)))
    ids = [r.id for r in parse_compact_text(encode_compact_text(ScreenSnapshot(10, 10, root)))]
    assert ids == [0, 1, 2, 3, 4]


def test_escaped_quote_round_trips():
    node = UiNode(5, "text", 'He said "hi" \\ then\nleft', 1, 2, 3, 4)
    line = encode_compact_text(ScreenSnapshot(10, 10, node))
    assert b"\n" not in line
    assert line == b'[e5] text "He said \\"hi\\" \\\\ then\\nleft" @1,2 3x4'
    assert parse_compact_text(line)[0].label == node.label


def test_states_emitted_after_actions():
    a = UiNode(1, "textfield", "Email", 0, 0, 9, 9, ("type",), ("focused", "disabled"))
    b = UiNode(2, "text", "x", 0, 0, 9, 9, (), ("disabled",))
    text = encode_compact_text(ScreenSnapshot(10, 10, UiNode(0, "w", children=(a, b)))).decode()
    assert text.splitlines()[1:] == [
        '[e1] textfield "Email" @0,0 9x9 [type] [focused,disabled]',
        '[e2] text "x" @0,0 9x9 [] [disabled]',
    ]
    recs = parse_compact_text(text)
    assert recs[1].states == ("focused", "disabled")
    assert recs[2].actions == () and recs[2].states == ("disabled",)


def test_missing_at_marker():
    with pytest.raises(MalformedLine, match="line 2: missing '@'"):
        parse_compact_text(EXAMPLE + '\n[e3] button "Go" 1,2 3x4')


@pytest.mark.parametrize("bad", ['button "Back" @1,2 3x4', '[e1] button Back @1,2 3x4', '[e1] b "x" @1,2 3x'])
def test_other_malformed_lines(bad):
    with pytest.raises(MalformedLine) as exc:
        parse_compact_text(bad)
    assert exc.value.lineno == 1


def test_invalid_nodes_rejected():
    with pytest.raises(ValueError):
        UiNode(1, "button", w=-1)
    with pytest.raises(ValueError):
        UiNode(1, "two words")
    with pytest.raises(ValueError):
        ScreenSnapshot(0, 10, UiNode(0, "w"))
    with pytest.raises(ValueError):
        ScreenSnapshot(10, 10, UiNode(0, "w", children=(UiNode(0, "x"),)))


# -- property: parse . encode is identity ---------------------------------------

_tokens = st.text(st.characters(blacklist_characters=' ",[]', blacklist_categories=("Zs", "Cc", "Zl", "Zp", "Cs")),
                  min_size=1, max_size=8)


@st.composite
def trees(draw, max_nodes=40):
    n = draw(st.integers(1, max_nodes))
    ids = draw(st.lists(st.integers(0, 10**6), min_size=n, max_size=n, unique=True))
    nodes = []
    for i in ids:
        nodes.append(dict(
            id=i, role=draw(_tokens), label=draw(st.text(max_size=30)),
            x=draw(st.integers(-5000, 5000)), y=draw(st.integers(-5000, 5000)),
            w=draw(st.integers(0, 5000)), h=draw(st.integers(0, 5000)),
            actions=tuple(draw(st.lists(_tokens, max_size=3))),
            states=tuple(draw(st.lists(_tokens, max_size=2))),
            children=[],
        ))
    # attach each node to an earlier one to form a tree
    for k in range(1, n):
        nodes[draw(st.integers(0, k - 1))]["children"].append(nodes[k])

    def build(d):
        return UiNode(**{**d, "children": tuple(build(c) for c in d["children"])})

    return ScreenSnapshot(1920, 1080, build(nodes[0]))


@settings(max_examples=300)
@given(trees())
def test_parse_encode_identity(snap):
    encoded = encode_compact_text(snap)
    encoded.decode("utf-8")
    assert parse_compact_text(encoded) == [NodeRecord.from_node(n) for n in snap.root.walk()]


def test_corpus_round_trip():
    for snap in generate_corpus(20, seed=3):
        assert parse_compact_text(encode_compact_text(snap)) == [NodeRecord.from_node(n) for n in snap.root.walk()]


# -- tiling -------------------------------------------------------------------

def test_tiling_1080p():
    plan = plan_tiling(1920, 1080)
    assert plan.tile_count == 2
    assert plan.scale == pytest.approx(1024 / 1080)
    assert round(plan.scale, 3) == 0.948


def test_tiling_exact_tile():
    plan = plan_tiling(1024, 1024)
    assert (plan.scale, plan.tile_count) == (1.0, 1)


def test_tiling_4k_by_direct_arithmetic():
    scale = 1024 / 2160
    assert math.ceil(3840 * scale / 1024) == 2
    assert plan_tiling(3840, 2160).tile_count == 2


@given(st.integers(1, 8000), st.integers(1, 8000), st.sampled_from([256, 512, 1024]))
def test_tiling_invariants(w, h, tile):
    plan = plan_tiling(w, h, tile)
    assert plan.tile_count >= 1
    if min(w, h) > tile:
        assert plan.scale <= 1
        # scaled screen fits in the tiles, and one fewer tile would not do
        assert plan.scale * max(w, h) <= plan.tile_count * tile + 1e-6
        assert plan.scale * max(w, h) > (plan.tile_count - 1) * tile - 1e-6
    else:
        assert plan.scale == 1


def test_tiling_rejects_empty_screen():
    with pytest.raises(ValueError):
        plan_tiling(0, 100)


# -- hybrid payloads ------------------------------------------------------------

def test_visual_payload_832_at_1080p(registry):
    hp = assemble_hybrid(reference_snapshot(), plan_tiling(1920, 1080), registry)
    assert hp.visual_bytes == 832
    assert hp.visual_frame.header.modality is Modality.VISUAL_TOKENS
    assert hp.text_frame.header.modality is Modality.STRUCTURED_TEXT
    assert hp.total_bytes == hp.text_frame.size + hp.visual_frame.size


def test_empty_tree_single_tile(registry):
    snap = ScreenSnapshot(1024, 768, UiNode(0, "window"))
    hp = assemble_hybrid(snap, None, registry)
    assert hp.visual_bytes == 416 == 256 * 13 // 8
    assert hp.total_bytes == 416 + len(b'[e0] window "" @0,0 0x0') + 2 * HEADER_SIZE


def test_hybrid_with_2300_byte_text(registry):
    snap = generate_snapshot(random.Random(11), text_budget=2300)
    hp = assemble_hybrid(snap, None, registry)
    assert 2300 <= hp.text_bytes < 2400
    assert hp.total_bytes == hp.text_bytes + 832 + 34
    assert 3000 <= hp.total_bytes <= 5000


def test_hybrid_frames_decode(registry):
    snap = reference_snapshot()
    hp = assemble_hybrid(snap, None, registry)
    _, text = decode_frame(hp.text_frame.to_bytes(), registry)
    assert text == encode_compact_text(snap)
    _, toks = decode_frame(hp.visual_frame.to_bytes(), registry)
    assert len(toks) == 512


def test_text_stream_independent_of_tiling(registry):
    snap = reference_snapshot()
    a = assemble_hybrid(snap, plan_tiling(1920, 1080), registry)
    b = assemble_hybrid(snap, plan_tiling(1920, 1080, tile_size=512), registry)
    assert a.text_frame.payload == b.text_frame.payload
    recs = parse_compact_text(a.text_frame.payload)
    assert max(r.x + r.w for r in recs) > 1024  # original pixel space, not tile space


# -- corpus -------------------------------------------------------------------

def test_120_node_snapshots_size_band():
    for seed in range(100):
        snap = generate_snapshot(random.Random(seed), n_nodes=120)
        assert snap.node_count == 120
        assert 2048 <= len(encode_compact_text(snap)) <= 5120


def test_corpus_hybrid_band(registry):
    corpus = generate_corpus(200, seed=1)
    totals = [assemble_hybrid(s, None, registry).total_bytes for s in corpus]
    in_band = sum(3000 <= t <= 5000 for t in totals)
    assert in_band / len(totals) >= 0.9
    assert all(130 <= 700_000 / t <= 210 for t in totals)


def test_corpus_deterministic():
    a = [encode_compact_text(s) for s in generate_corpus(5, seed=9)]
    b = [encode_compact_text(s) for s in generate_corpus(5, seed=9)]
    assert a == b


def test_ocr_corpus():
    corpus = generate_corpus(30, seed=4, source=Source.OCR)
    for snap in corpus:
        assert snap.source is Source.OCR
        assert 20 <= snap.ocr_encode_ms <= 50
        assert 1000 <= len(encode_compact_text(snap)) <= 3100


def test_corpus_file_round_trip(tmp_path):
    corpus = generate_corpus(3, seed=2) + generate_corpus(2, seed=2, source="ocr")
    path = tmp_path / "c.json"
    save_corpus(corpus, path, seed=2)
    assert load_corpus(path) == corpus


def test_corpus_file_rejects_unknown_format(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"format": "other", "version": 1}')
    with pytest.raises(ValueError):
        load_corpus(path)
