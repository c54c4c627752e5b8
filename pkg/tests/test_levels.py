from dqm.app.cli.levels import parse_levels
from dqm.domain.errors import OutOfDomain


def test_comma_separated() -> None:
    assert parse_levels("1,2").unwrap() == (1, 2)
    assert parse_levels(" 3, 5 ").unwrap() == (3, 5)


def test_span_expands() -> None:
    assert parse_levels("1-4").unwrap() == (1, 2, 3, 4)
    assert parse_levels("0,2-3,7").unwrap() == (0, 2, 3, 7)


def test_empty_is_no_deletion() -> None:
    assert parse_levels("").unwrap() == ()


def test_bad_syntax() -> None:
    for text in ("a", "1,", "1;2", "-1", "2-"):
        err = parse_levels(text).unwrap_err()
        assert isinstance(err, OutOfDomain)
        assert err.parameter == "levels"
