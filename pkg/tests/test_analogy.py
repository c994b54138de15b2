import math

import numpy as np
import pytest

from subatlas.analogy import (
    AnalogyQuery,
    AnalogySet,
    UndefinedPrecisionError,
    generate_queries,
    load_pairs,
    precision_at_k,
    solvable,
    solve_3cosadd,
)

from conftest import toy_model, unit_rows


def build_set(pairs_by_cat: dict) -> AnalogySet:
    s = AnalogySet()
    for cat, pairs in pairs_by_cat.items():
        for left, right in pairs:
            s.add_pair(cat, left, right)
    return s


def parallelogram_model():
    """Vocabulary where b - a + c lands exactly on the expected vector.

    composed = r1 - l1 + l2 = (-1, 1, 1); r2 is that direction normalized, so
    its cosine with the composed vector is exactly 1. The two fillers sit at
    cosine 0.
    """
    root3 = math.sqrt(3.0)
    vectors = np.array(
        [
            [1.0, 0.0, 0.0],  # l1
            [0.0, 1.0, 0.0],  # r1
            [0.0, 0.0, 1.0],  # l2
            [-1.0 / root3, 1.0 / root3, 1.0 / root3],  # r2
            [0.0, -1.0, 0.0],
            [0.0, 0.0, -1.0],
        ],
        dtype=np.float32,
    )
    names = ["l1", "r1", "l2", "r2", "f1", "f2"]
    return toy_model(vectors, names=names, normalized=True)


# ---------------------------------------------------------------------------
# pair files and query generation


def test_add_pair_accumulates_and_dedups():
    s = AnalogySet()
    s.add_pair("teams", "l1", "r1")
    s.add_pair("teams", "l1", "r1")
    s.add_pair("teams", "l1", "r1b")
    assert s.categories["teams"] == [("l1", "r1"), ("l1", "r1b")]
    assert s.acceptable[("teams", "l1")] == {"r1", "r1b"}
    with pytest.raises(ValueError):
        s.add_pair("teams", "x", "x")
    with pytest.raises(ValueError):
        s.add_pair("teams", "", "y")


def test_load_pairs(tmp_path):
    path = tmp_path / "pairs.txt"
    path.write_text(": teams\nl1 r1\nl2 r2\n\n: cities\na b\na b\n")
    s = load_pairs(path)
    assert set(s.categories) == {"teams", "cities"}
    assert s.categories["cities"] == [("a", "b")]


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("l1 r1\n", "before any category"),
        (": teams\nl1 r1 extra\n", "expected 'left right'"),
        (":\nl1 r1\n", "empty category"),
    ],
)
def test_load_pairs_rejects_malformed(tmp_path, text, fragment):
    path = tmp_path / "pairs.txt"
    path.write_text(text)
    with pytest.raises(ValueError, match=fragment):
        load_pairs(path)


def test_generate_queries_all_ordered_pairs():
    s = build_set({"c": [("l1", "r1"), ("l2", "r2"), ("l3", "r3")]})
    queries = generate_queries(s)
    # 3 pairs -> 3 * 2 ordered combinations with distinct left members
    assert len(queries) == 6
    assert {(q.a, q.b, q.c) for q in queries} == {
        ("l1", "r1", "l2"),
        ("l1", "r1", "l3"),
        ("l2", "r2", "l1"),
        ("l2", "r2", "l3"),
        ("l3", "r3", "l1"),
        ("l3", "r3", "l2"),
    }
    for q in queries:
        assert q.expected == {"r" + q.c[1:]}


def test_generate_queries_multiple_answers():
    s = build_set({"c": [("l1", "r1"), ("l1", "r1b"), ("l2", "r2")]})
    by_target = {
        (q.a, q.b, q.c): q.expected for q in generate_queries(s)
    }
    assert by_target[("l2", "r2", "l1")] == {"r1", "r1b"}


def test_query_validation():
    with pytest.raises(ValueError):
        AnalogyQuery(a="x", b="x", c="y", expected=frozenset({"z"}), category="c")
    with pytest.raises(ValueError):
        AnalogyQuery(a="x", b="y", c="x", expected=frozenset({"z"}), category="c")
    with pytest.raises(ValueError):
        AnalogyQuery(a="x", b="y", c="z", expected=frozenset(), category="c")


def test_solvable_filters_and_restricts_answers():
    q = AnalogyQuery(
        a="l1", b="r1", c="l2", expected=frozenset({"r2", "gone"}), category="c"
    )
    kept = solvable([q], ["l1", "r1", "l2", "r2"])
    assert len(kept) == 1
    assert kept[0].expected == {"r2"}
    assert solvable([q], ["l1", "r1", "l2"]) == []  # no answer in vocab
    assert solvable([q], ["r1", "l2", "r2"]) == []  # query term missing


# ---------------------------------------------------------------------------
# solving


def test_solve_3cosadd_exact_parallelogram():
    model = parallelogram_model()
    q = AnalogyQuery(
        a="l1", b="r1", c="l2", expected=frozenset({"r2"}), category="c"
    )
    top = solve_3cosadd(model, q, topn=3)
    assert top[0][0] == "r2"
    assert top[0][1] == pytest.approx(1.0, abs=1e-6)
    assert {"l1", "r1", "l2"}.isdisjoint({name for name, _ in top})


def test_solve_3cosadd_requires_normalized():
    model = toy_model([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], names=["a", "b", "c"])
    q = AnalogyQuery(a="a", b="b", c="c", expected=frozenset({"b"}), category="x")
    with pytest.raises(ValueError, match="normalized"):
        solve_3cosadd(model, q)


def test_solve_3cosadd_unknown_term():
    model = parallelogram_model()
    q = AnalogyQuery(
        a="l1", b="r1", c="missing", expected=frozenset({"r2"}), category="c"
    )
    with pytest.raises(ValueError, match="not solvable"):
        solve_3cosadd(model, q)


def test_solve_3cosadd_tie_break_is_vocab_order():
    vectors = unit_rows(
        [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 2.0], [1.0, 2.0]]
    )
    model = toy_model(vectors, names=["a", "b", "c", "first", "second"],
                      normalized=True)
    q = AnalogyQuery(a="a", b="b", c="c", expected=frozenset({"first"}),
                     category="x")
    top = solve_3cosadd(model, q, topn=2)
    assert [name for name, _ in top] == ["first", "second"]


# ---------------------------------------------------------------------------
# precision


def test_precision_perfect_on_parallelogram():
    model = parallelogram_model()
    s = build_set({"c": [("l1", "r1"), ("l2", "r2")]})
    report = precision_at_k(model, generate_queries(s), k=5)
    assert report["p_at_k"] == 1.0
    assert report["solvable"] == 2
    assert report["correct"] == 2
    assert report["per_category"]["c"]["p_at_k"] == 1.0


def test_precision_zero_on_adversarial_embedding():
    # expected answer is anti-aligned with the composed direction while five
    # fillers sit slightly on the positive side: P@5 is exactly 0
    composed_dir = np.array([0.0, 1.0, 1.0]) - np.array([1.0, 0.0, 0.0])
    composed_dir = composed_dir + np.array([1.0, 1.0, 0.0])  # b - a + c
    rows = [
        [1.0, 0.0, 0.0],  # a
        [0.0, 1.0, 1.0],  # b
        [1.0, 1.0, 0.0],  # c
        list(-composed_dir),  # answer, cosine -1
    ]
    fillers = []
    for i in range(5):
        v = np.array([0.1 * (i + 1), 0.2, 0.3])
        fillers.append(list(v))
    model = toy_model(
        unit_rows(rows + fillers),
        names=["a", "b", "c", "ans", "f1", "f2", "f3", "f4", "f5"],
        normalized=True,
    )
    s = AnalogySet()
    s.add_pair("adv", "a", "b")
    s.add_pair("adv", "c", "ans")
    queries = [q for q in generate_queries(s) if q.c == "c"]
    report = precision_at_k(model, queries, k=5)
    assert report["p_at_k"] == 0.0
    assert report["solvable"] == 1


def test_precision_undefined_without_solvable_queries():
    model = parallelogram_model()
    s = build_set({"c": [("x1", "y1"), ("x2", "y2")]})
    with pytest.raises(UndefinedPrecisionError):
        precision_at_k(model, generate_queries(s), k=5)
    with pytest.raises(ValueError):
        precision_at_k(model, [], k=0)
