import random

import pytest
from hypothesis import strategies as st

from readorder.core import BBox, Page, Token, appearance_indices
from readorder.synthgen import GenSpec, generate

PAGE_SIZE = 400

WORDS = ("alpha", "beta", "gamma", "dd", "x")


@st.composite
def token_lists(draw, min_size=1, max_size=10):
    """Arbitrary valid tokens inside a PAGE_SIZE square (boxes may overlap)."""
    n = draw(st.integers(min_size, max_size))
    words = draw(st.lists(st.sampled_from(WORDS), min_size=n, max_size=n))
    tokens = []
    for word, idx in zip(words, appearance_indices(words)):
        x0 = draw(st.integers(0, PAGE_SIZE - 30))
        y0 = draw(st.integers(0, PAGE_SIZE - 30))
        w = draw(st.integers(1, 30))
        h = draw(st.integers(1, 30))
        tokens.append(Token(word=word, bbox=BBox(x0, y0, x0 + w, y0 + h), appearance_index=idx))
    return tokens


@st.composite
def pages(draw, min_size=1, max_size=10):
    tokens = draw(token_lists(min_size=min_size, max_size=max_size))
    return Page(id="hyp", width=PAGE_SIZE, height=PAGE_SIZE, tokens=tuple(tokens))


def make_page(words, boxes, page_id="p0", width=400, height=400):
    tokens = tuple(
        Token(word=w, bbox=BBox(*b), appearance_index=i)
        for (w, b), i in zip(zip(words, boxes), appearance_indices(words))
    )
    return Page(id=page_id, width=width, height=height, tokens=tokens)


@pytest.fixture(scope="session")
def mixed_corpus():
    """Thirty small mixed pages with their line boxes."""
    spec = GenSpec(layout_kind="mixed", tokens_min=15, tokens_max=25, seed=77)
    return generate(spec, 30)


@pytest.fixture(scope="session")
def mixed_pages(mixed_corpus):
    return [page for page, _ in mixed_corpus]


@pytest.fixture()
def rng():
    return random.Random(1234)
