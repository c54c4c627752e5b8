from pyparsing import DelimitedList, Optional, ParseException, Regex, StringEnd, Suppress
from dqm.core.result import Result
from dqm.domain.errors import OutOfDomain


level = Regex(r"\d+").set_parse_action(lambda t: int(t[0]))

# "1-4" expands to 1,2,3,4
span = (level("start") + Suppress("-") + level("stop")).set_parse_action(lambda t: list(range(t[0], t[1] + 1)))

levels_expr = Optional(DelimitedList(span | level, delim=",")) + StringEnd()


def parse_levels(text: str) -> Result[tuple[int, ...], OutOfDomain]:
    """Deletion set syntax: comma separated levels and inclusive spans, e.g. "1,2" or "1-4"."""
    try:
        parsed = levels_expr.parse_string(text.replace(" ", ""))
    except ParseException as e:
        return Result.err(OutOfDomain("levels", f"comma separated non-negative integers ({e.msg} at column {e.col})"))
    return Result.ok(tuple(int(d) for d in parsed))
