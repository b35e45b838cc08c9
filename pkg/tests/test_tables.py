import math

from hypothesis import given, settings, strategies as st

from gapchain.tables import columns_of, format_value, parse_value, read_rows, same_value, write_rows

finite = st.floats(allow_nan=True, allow_infinity=True)
cells = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(-10**12, 10**12),
    finite,
    st.builds(complex, finite, finite),
    st.text(alphabet="abcxyz_ ,\"", min_size=1, max_size=8).filter(lambda s: parse_value(s) == s),
)


@settings(max_examples=200, deadline=None)
@given(cells)
def test_cell_round_trip(x):
    assert same_value(parse_value(format_value(x)), x)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.dictionaries(st.sampled_from(["a", "b", "c"]), cells, min_size=1), min_size=1, max_size=5))
def test_table_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("t") / "rows.csv"
    write_rows(path, rows)
    back = read_rows(path)
    cols = columns_of(rows)
    assert len(back) == len(rows)
    for orig, got in zip(rows, back):
        assert list(got) == cols
        for c in cols:
            assert same_value(got[c], orig.get(c))


def test_formats():
    assert format_value(0.1) == "0.1"
    assert format_value(1 - 2j) == "1.0-2.0i"
    assert format_value(complex(0.5, -0.0)) == "0.5-0.0i"
    assert format_value(True) == "True"
    assert format_value(None) == ""
    assert parse_value("3") == 3 and isinstance(parse_value("3"), int)
    assert parse_value("1e-3") == 1e-3
    assert math.isnan(parse_value("nan"))
    assert parse_value("-inf+infi") == complex(-math.inf, math.inf)


def test_same_value():
    assert same_value(float("nan"), float("nan"))
    assert not same_value(1, 1.0)
    assert not same_value(True, 1)
