import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_page, pages
from oracles import match_tokens_exhaustive
from readorder.core import (
    AlignmentError,
    BBox,
    DataError,
    OrderPrediction,
    Page,
    Token,
    appearance_indices,
    page_from_dict,
    page_to_dict,
    permutation_from_layout_order,
    read_pages,
    write_pages,
)


class TestBBox:
    def test_valid(self):
        box = BBox(1, 2, 5, 9)
        assert box.width == 4 and box.height == 7
        assert box.center() == (3.0, 5.5)

    def test_degenerate_allowed(self):
        assert BBox(3, 3, 3, 3).width == 0

    @pytest.mark.parametrize("coords", [(-1, 0, 1, 1), (0, 0, -1, 1), (2, 0, 1, 1), (0, 5, 1, 4)])
    def test_invalid(self, coords):
        with pytest.raises(DataError):
            BBox(*coords)

    def test_intersection_area(self):
        a = BBox(0, 0, 10, 10)
        assert a.intersection_area(BBox(5, 5, 15, 15)) == 25
        assert a.intersection_area(BBox(10, 0, 20, 10)) == 0
        assert a.intersection_area(BBox(20, 20, 30, 30)) == 0


class TestToken:
    def test_empty_word_rejected(self):
        with pytest.raises(DataError):
            Token(word="", bbox=BBox(0, 0, 1, 1), appearance_index=0)

    def test_negative_appearance_rejected(self):
        with pytest.raises(DataError):
            Token(word="a", bbox=BBox(0, 0, 1, 1), appearance_index=-1)


class TestPage:
    def test_bbox_containment_enforced(self):
        with pytest.raises(DataError):
            make_page(["a"], [(0, 0, 500, 10)], width=400, height=400)

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            Page(id="x", width=10, height=10, tokens=())

    def test_appearance_indices_must_count_prior_occurrences(self):
        with pytest.raises(DataError):
            # second "the" must carry index 1
            Page(
                id="x",
                width=100,
                height=100,
                tokens=(
                    Token("the", BBox(0, 0, 5, 5), 0),
                    Token("the", BBox(10, 0, 15, 5), 0),
                ),
            )

    def test_appearance_indices_helper(self):
        assert appearance_indices(["the", "car", "hits", "the", "bus"]) == [0, 0, 0, 1, 0]


class TestPermutationFromLayoutOrder:
    def test_identity(self):
        page = make_page(["a", "b", "c"], [(0, 0, 5, 5), (10, 0, 15, 5), (20, 0, 25, 5)])
        assert permutation_from_layout_order(page, list(page.tokens)) == [0, 1, 2]

    def test_swap(self):
        page = make_page(["a", "b"], [(0, 0, 5, 5), (10, 0, 15, 5)])
        layout = [page.tokens[1], page.tokens[0]]
        assert permutation_from_layout_order(page, layout) == [1, 0]

    def test_random_shuffle_matches_exhaustive_matcher(self, rng):
        words = ["the", "car", "the", "bus", "the", "car", "stop", "go", "the", "bus"]
        boxes = [(10 * i, 0, 10 * i + 8, 8) for i in range(10)]
        page = make_page(words, boxes)
        layout = list(page.tokens)
        rng.shuffle(layout)
        perm = permutation_from_layout_order(page, layout)
        oracle = match_tokens_exhaustive(
            [t.key for t in page.tokens], [t.key for t in layout]
        )
        assert perm == oracle
        for k, pos in enumerate(perm):
            assert layout[pos] == page.tokens[k]

    def test_key_mismatch_raises(self):
        page = make_page(["a", "b"], [(0, 0, 5, 5), (10, 0, 15, 5)])
        stranger = Token("zzz", BBox(0, 0, 5, 5), 0)
        with pytest.raises(AlignmentError):
            permutation_from_layout_order(page, [page.tokens[0], stranger])

    def test_count_mismatch_raises(self):
        page = make_page(["a", "b"], [(0, 0, 5, 5), (10, 0, 15, 5)])
        with pytest.raises(AlignmentError):
            permutation_from_layout_order(page, [page.tokens[0]])

    @given(pages(max_size=8), st.randoms(use_true_random=False))
    def test_always_a_bijection(self, page, rnd):
        layout = list(page.tokens)
        rnd.shuffle(layout)
        perm = permutation_from_layout_order(page, layout)
        assert sorted(perm) == list(range(len(page)))


class TestJsonl:
    def test_round_trip_dict(self, mixed_pages):
        for page in mixed_pages:
            assert page_from_dict(page_to_dict(page)) == page

    @given(pages(max_size=8))
    def test_round_trip_random_pages(self, page):
        assert page_from_dict(page_to_dict(page)) == page

    def test_file_round_trip(self, tmp_path, mixed_pages):
        path = str(tmp_path / "pages.jsonl")
        write_pages(path, mixed_pages)
        assert read_pages(path) == mixed_pages

    def test_schema_field_names(self, mixed_pages):
        record = page_to_dict(mixed_pages[0])
        assert set(record) == {"id", "width", "height", "words", "bboxes", "appearance_indices"}

    def test_misaligned_arrays_rejected(self):
        record = {
            "id": "x",
            "width": 10,
            "height": 10,
            "words": ["a", "b"],
            "bboxes": [[0, 0, 1, 1]],
            "appearance_indices": [0, 0],
        }
        with pytest.raises(DataError):
            page_from_dict(record)

    def test_invalid_json_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text("{not json}\n", encoding="utf-8")
        with pytest.raises(DataError):
            read_pages(str(path))


class TestOrderPrediction:
    def test_out_of_range_index(self):
        page = make_page(["a"], [(0, 0, 5, 5)])
        pred = OrderPrediction(page_id="p0", indices=(3,))
        with pytest.raises(DataError):
            pred.validate_against(page)

    def test_page_id_mismatch(self):
        page = make_page(["a"], [(0, 0, 5, 5)])
        with pytest.raises(DataError):
            OrderPrediction(page_id="other", indices=(0,)).validate_against(page)

    def test_repeats_are_representable(self):
        pred = OrderPrediction(page_id="p", indices=(0, 0, 1))
        assert pred.indices == (0, 0, 1)


def test_pages_jsonl_is_single_line_per_page(tmp_path, mixed_pages):
    path = tmp_path / "pages.jsonl"
    write_pages(str(path), mixed_pages)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert len(lines) == len(mixed_pages)
    assert json.loads(lines[0])["id"] == mixed_pages[0].id
