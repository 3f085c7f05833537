import pytest

from orderfour.bench import bench_table, constants_report, paper_format, parse_paper_value
from orderfour.numeric import Precision
from orderfour.problems import GOLDEN

P = Precision(60)


@pytest.mark.parametrize(
    "value,expected",
    [
        ("1.03125", "0.10312e1"),  # tie rounds to even
        ("1.09375", "0.10938e1"),
        ("4.2864e-10", "0.42864e-9"),
        ("9.99996e-5", "0.10000e-3"),  # carry into a new digit
        ("0.5", "0.50000e0"),
        ("-2.5e3", "0.25000e4"),
    ],
)
def test_paper_format(value, expected):
    assert paper_format(P.real(value)) == expected


def test_paper_format_zero():
    assert paper_format(P.real(0)) == "0.00000e0"


def test_parse_paper_value():
    assert parse_paper_value("0.42864e-9") == ("42864", -9)
    assert parse_paper_value(".1E2") == ("1", 2)
    with pytest.raises(ValueError):
        parse_paper_value("4.2864e-10")


def test_golden_shape():
    assert sorted(GOLDEN) == [1, 2, 3]
    for table in GOLDEN.values():
        assert len(table) == 7
        for cells in table.values():
            assert len(cells) == 3
            for text in cells:
                parse_paper_value(text)


@pytest.fixture(scope="module")
def tables():
    return {t: bench_table(t) for t in (1, 2, 3)}


@pytest.mark.parametrize("table_id", [1, 2])
def test_tables_match(tables, table_id):
    result = tables[table_id]
    assert result.matched == 21, [(c.method, c.iteration, c.computed, c.golden) for c in result.mismatched]


def test_table_three_single_exponent_discrepancy(tables):
    result = tables[3]
    assert result.matched == 20
    (cell,) = result.mismatched
    assert (cell.method, cell.iteration) == ("weighted4", 1)
    assert cell.rechecked and cell.mantissa_match
    assert (cell.computed, cell.golden) == ("0.25102e-7", "0.25102e-8")


def test_three_steps_always_taken(tables):
    for result in tables.values():
        assert all(c.x is not None for c in result.cells)
        assert set(result.stops.values()) == {"MaxIterations"}


def test_bench_rejects_unknown_table():
    with pytest.raises(ValueError):
        bench_table(4)


def test_constants_report_deterministic():
    first = constants_report()
    assert len(first) == 9
    assert all(f.agrees for f in first)
    assert constants_report() == first
