import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spp.pattern_db import (DataError, PatternDB, dumps_transactions, load_transactions,
                            occurs, save_item_map)


def write(tmp_path, text, name="d.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_libsvm_line_binarized(tmp_path):
    db = load_transactions(write(tmp_path, "+1 3:1 7:2\n-1 1:0.5\n"), "libsvm", "clf")
    assert db.transactions[0] == (2, 6)
    assert db.responses[0] == 1.0
    assert db.decode((2, 6)) == [3, 7]


def test_libsvm_zero_value_is_absent(tmp_path):
    db = load_transactions(write(tmp_path, "1.5 2:0 4:1\n"), "libsvm", "reg")
    assert db.transactions == ((3,),)


def test_tlist_dedup_and_sort(tmp_path):
    db = load_transactions(write(tmp_path, "2.5\t0 4 4\n1\t3 0\n"), "tlist", "reg")
    assert db.transactions == ((0, 4), (0, 3))
    assert db.responses.tolist() == [2.5, 1.0]


def test_invalid_class_label_reports_line(tmp_path):
    with pytest.raises(DataError, match="invalid class label at line 2"):
        load_transactions(write(tmp_path, "+1\t0\n0\t1\n"), "tlist", "clf")


@pytest.mark.parametrize("text", ["", "\n\n"])
def test_empty_file_rejected(tmp_path, text):
    with pytest.raises(DataError):
        load_transactions(write(tmp_path, text), "tlist", "reg")


def test_bad_item_token(tmp_path):
    with pytest.raises(DataError, match="line 1"):
        load_transactions(write(tmp_path, "1\t0 x\n"), "tlist", "reg")


def test_unknown_format():
    with pytest.raises(DataError):
        load_transactions("nowhere", "csv", "reg")


@pytest.mark.parametrize("pattern,row,expected", [
    ((0, 4), [0, 2, 4], True),
    ((0, 4), [0, 2], False),
    ((1,), [1], True),
])
def test_occurs(pattern, row, expected):
    db = PatternDB.from_rows([row], [1.0])
    assert occurs(db, pattern, 0) is expected


def test_support_and_item_rows(tiny):
    assert tiny.support((0,)).tolist() == [0, 1]
    assert tiny.support((0, 1)).tolist() == [1]
    assert tiny.item_rows(1).tolist() == [1, 2]


def test_responses_read_only(tiny):
    with pytest.raises(ValueError):
        tiny.responses[0] = 5.0


def test_fingerprint_stable_and_sensitive(tiny):
    other = PatternDB.from_rows([[0], [0, 1], [1]], [2.0, 0.0, -2.5])
    assert tiny.fingerprint() == PatternDB.from_rows([[0], [0, 1], [1]],
                                                     [2.0, 0.0, -2.0]).fingerprint()
    assert tiny.fingerprint()["sha256"] != other.fingerprint()["sha256"]


def test_round_trip(tmp_path, tiny_clf):
    p = tmp_path / "x.tlist"
    p.write_text(dumps_transactions(tiny_clf))
    back = load_transactions(p, "tlist", "clf")
    assert back.transactions == tiny_clf.transactions
    assert np.array_equal(back.responses, tiny_clf.responses)
    assert dumps_transactions(back) == dumps_transactions(tiny_clf)


def test_item_map(tmp_path):
    db = load_transactions(write(tmp_path, "1 2:1 5:1\n"), "libsvm", "reg")
    save_item_map(db, tmp_path / "m.json")
    assert json.loads((tmp_path / "m.json").read_text()) == {"1": 2, "4": 5}


rows_st = st.lists(st.lists(st.integers(0, 7), min_size=1, max_size=5),
                   min_size=1, max_size=12)


@settings(max_examples=60, deadline=None)
@given(rows=rows_st, data=st.data())
def test_support_anti_monotone(rows, data):
    db = PatternDB.from_rows(rows, np.arange(len(rows), dtype=float))
    sup = data.draw(st.lists(st.integers(0, 7), min_size=1, max_size=4, unique=True))
    sup = tuple(sorted(sup))
    sub = tuple(sorted(data.draw(st.lists(st.sampled_from(sup), min_size=1, unique=True))))
    assert set(db.support(sup)) <= set(db.support(sub))
    expect = [i for i, r in enumerate(rows) if set(sup) <= set(r)]
    assert db.support(sup).tolist() == expect
