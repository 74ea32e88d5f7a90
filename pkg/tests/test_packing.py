import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_page
from oracles import mask_reference
from readorder.core import BBox, DataError
from readorder.model import (
    ModelConfig,
    bbox_buckets,
    build_mask,
    hash_word_id,
    pack_source,
    pack_training,
)

TINY = ModelConfig(
    layers=1,
    hidden_dim=16,
    heads=2,
    ffn_dim=32,
    max_tokens_per_page=16,
    coord_grid=100,
    vocab_size=64,
    dropout=0.0,
    seed=0,
)


class TestBuildMask:
    def test_source_only_is_all_ones(self):
        assert build_mask(2, 0).all()

    def test_two_by_two(self):
        mask = build_mask(2, 2)
        allowed_sets = [set(np.flatnonzero(row)) for row in mask]
        assert allowed_sets == [{0, 1}, {0, 1}, {0, 1, 2}, {0, 1, 2, 3}]

    def test_target_block_is_lower_triangular(self):
        mask = build_mask(3, 5)
        target = mask[3:, 3:]
        assert (target == np.tril(np.ones((5, 5), dtype=bool))).all()

    @given(st.integers(1, 64), st.integers(0, 64))
    @settings(max_examples=60)
    def test_matches_case_analysis(self, n_src, n_tgt):
        assert build_mask(n_src, n_tgt).tolist() == mask_reference(n_src, n_tgt)

    def test_contract_properties(self):
        for n_src, n_tgt in [(1, 0), (4, 4), (7, 3), (2, 9)]:
            mask = build_mask(n_src, n_tgt)
            assert mask[:, :n_src].all(), "source columns visible to every row"
            assert not mask[:n_src, n_src:].any(), "source rows blind to targets"
            if n_tgt:
                tri = np.tril(np.ones((n_tgt, n_tgt), dtype=bool))
                assert (mask[n_src:, n_src:] == tri).all()

    def test_invalid_sizes(self):
        with pytest.raises(DataError):
            build_mask(0, 3)
        with pytest.raises(DataError):
            build_mask(2, -1)


class TestVocabHash:
    def test_range_and_reserved_zero(self):
        for word in ["the", "amount", "x", "Ω"]:
            assert 1 <= hash_word_id(word, 64) < 64

    def test_stable(self):
        assert hash_word_id("total", 4096) == hash_word_id("total", 4096)

    def test_spreads(self):
        ids = {hash_word_id(w, 4096) for w in ("a", "b", "c", "d", "e", "f")}
        assert len(ids) > 1


class TestBboxBuckets:
    def test_midpoint_on_grid_1000(self):
        buckets = bbox_buckets(BBox(500, 0, 500, 0), 1000, 800, 1000)
        assert buckets[0] == 500

    def test_extremes(self):
        assert bbox_buckets(BBox(0, 0, 1000, 800), 1000, 800, 1000) == (0, 0, 1000, 1000)

    def test_floor_behaviour(self):
        # 333/1000 on a 10 grid floors to 3
        assert bbox_buckets(BBox(333, 0, 333, 0), 1000, 800, 10)[0] == 3

    def test_out_of_page_rejected(self):
        with pytest.raises(DataError):
            bbox_buckets(BBox(0, 0, 1200, 10), 1000, 800, 1000)


def _demo_page():
    words = ["aa", "bb", "cc", "aa"]
    boxes = [(0, 0, 20, 10), (30, 0, 50, 10), (0, 20, 20, 30), (30, 20, 50, 30)]
    return make_page(words, boxes, page_id="demo", width=100, height=50)


class TestPacking:
    def test_source_arrangement_and_ids(self):
        page = _demo_page()
        src = pack_source(page, TINY, [2, 0, 3, 1])
        assert src.n == 4
        assert src.source_order == (2, 0, 3, 1)
        assert src.word_ids[1] == hash_word_id("aa", TINY.vocab_size)
        assert tuple(src.buckets[1]) == bbox_buckets(BBox(0, 0, 20, 10), 100, 50, 100)

    def test_overflow_rejected(self):
        page = _demo_page()
        small = ModelConfig(
            layers=1, hidden_dim=16, heads=2, ffn_dim=32,
            max_tokens_per_page=3, coord_grid=100, vocab_size=64, dropout=0.0,
        )
        with pytest.raises(DataError, match="over the"):
            pack_source(page, small, [0, 1, 2, 3])

    def test_non_permutation_rejected(self):
        with pytest.raises(DataError, match="permutation"):
            pack_source(_demo_page(), TINY, [0, 0, 1, 2])

    def test_targets_invert_the_arrangement(self):
        page = _demo_page()
        arrangement = [2, 0, 3, 1]
        pack = pack_training(page, TINY, arrangement)
        # following targets through the arrangement recovers the gold order
        assert [arrangement[t] for t in pack.targets] == [0, 1, 2, 3]

    def test_target_slots_re_present_previous_gold_token(self):
        page = _demo_page()
        arrangement = [2, 0, 3, 1]
        pack = pack_training(page, TINY, arrangement)
        n = pack.n_src
        assert pack.is_begin[0] and pack.is_begin[1 + n]
        assert not pack.is_begin[1 : 1 + n].any()
        for k in range(1, n):
            slot = 1 + n + k
            gold_slot = pack.targets[k - 1]
            assert pack.word_ids[slot] == pack.word_ids[1 + gold_slot]
            assert (pack.buckets[slot] == pack.buckets[1 + gold_slot]).all()

    def test_positions_are_contiguous(self):
        pack = pack_training(_demo_page(), TINY, [0, 1, 2, 3])
        assert (pack.positions == np.arange(1 + 2 * pack.n_src)).all()

    def test_mask_matches_contract(self):
        pack = pack_training(_demo_page(), TINY, [0, 1, 2, 3])
        assert (pack.mask() == build_mask(1 + pack.n_src, pack.n_tgt)).all()
