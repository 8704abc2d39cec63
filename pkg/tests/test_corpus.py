import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import alma0
from alma0 import corpus
from alma0.corpus import (FEASIBLE, INFEASIBLE, TINY, Timetable, case, manifest, parse_rows,
                          parse_timetable_blocks)

FAST = [c for c in manifest() if c.tier == "fast"]


def test_manifest_layout():
    names = [c.name for c in manifest()]
    assert len(names) == len(set(names)) == 9
    for c in manifest():
        assert c.source_path.is_file()
        assert (c.source_path.with_suffix(".golden")).is_file()


def test_generated_files_match_generators():
    for name, text in corpus.generated_sources().items():
        assert case(name).source() == text, name


@pytest.mark.parametrize("c", FAST, ids=lambda c: c.name)
def test_fast_golden(c):
    r = alma0.run_source(c.source())
    assert r.status == "succeeded"
    assert r.output == c.golden()


# oracles

def test_self_describing_oracle():
    assert corpus.oracle_self_describing((6, 2, 1, 0, 0, 0, 1, 0, 0, 0))
    assert not corpus.oracle_self_describing((0,) * 10)
    assert corpus.self_describing_solutions() == [(6, 2, 1, 0, 0, 0, 1, 0, 0, 0)]


def test_tendigit_golden_is_the_oracle_solution():
    digits = tuple(int(ch) for ch in case("tendigit").golden().strip())
    assert corpus.oracle_self_describing(digits)


def test_knight_oracle():
    assert corpus.oracle_knight_tour([[1]])
    board = parse_rows(case("knighttour").golden())
    assert len(board) == 5 and corpus.oracle_knight_tour(board)
    twice = [row[:] for row in board]
    twice[0][1] = 7 if twice[0][1] != 7 else 8
    assert not corpus.oracle_knight_tour(twice)


def test_longest_path_oracle():
    assert corpus.oracle_longest_path(2, [(1, 2)], 1, 2) == 1
    assert corpus.oracle_longest_path(3, [(2, 3)], 1, 3) is None
    n, arcs, v1, v2 = corpus.LONGEST_PATH_INSTANCE
    assert case("longestpath").golden() == f"{corpus.oracle_longest_path(n, arcs, v1, v2)}\n"


def test_longest_path_no_path_reports_unknown():
    src = corpus.longest_path_source(4, [(2, 3), (3, 4)], 1, 4)
    assert alma0.run_source(src).output == "none\n"


def test_permutation_oracles():
    assert corpus.next_permutation((1, 2, 3)) == [1, 3, 2]
    assert corpus.next_permutation((3, 2, 1)) is None
    assert corpus.oracle_next_permutation(corpus.PERMUTATION_INPUT) == [1, 4, 6, 2, 9, 7, 3, 5, 8]
    assert corpus.prev_permutation(corpus.PERMUTATION_INPUT) == [1, 4, 6, 2, 9, 5, 8, 3, 7]
    expected = " ".join(map(str, corpus.next_permutation(corpus.PERMUTATION_INPUT))) + "\n"
    assert case("nextperm").golden() == expected
    expected = " ".join(map(str, corpus.prev_permutation(corpus.PERMUTATION_INPUT))) + "\n"
    assert case("prevperm").golden() == expected


def test_small_permutation_program():
    # same program shape as the shipped one, at N = 4, checked against the oracle for every input
    import itertools
    src = case("nextperm").source()
    for perm in itertools.permutations(range(1, 5)):
        nxt = corpus.next_permutation(perm)
        if nxt is None:
            continue
        text = _with_input(src, perm)
        r = alma0.run_source(text)
        assert r.output == " ".join(map(str, nxt)) + "\n", perm


def _with_input(src, perm):
    import re
    n = len(perm)
    src = re.sub(r"N = \d+", f"N = {n}", src, count=1)
    lines = []
    for line in src.splitlines():
        m = re.match(r"(\s*)a\[(\d+)\] := \d+;?$", line)
        if m:
            i = int(m.group(2))
            if i > n:
                continue
            line = f"{m.group(1)}a[{i}] := {perm[i - 1]};"
        lines.append(line)
    return "\n".join(lines) + "\n"


def test_timetable_oracle_basics():
    empty = Timetable(courses=2, periods=2, rooms=1, requirements=(0, 0))
    assert corpus.oracle_timetable(empty, [[0, 0], [0, 0]])
    assert not corpus.oracle_timetable(empty, [[1, 0], [0, 0]])
    clash = Timetable(courses=2, periods=1, rooms=2, requirements=(1, 1), conflicts=frozenset({(1, 2)}))
    assert not corpus.oracle_timetable(clash, [[1], [1]])
    assert corpus.oracle_timetable(clash.relaxed(1, 2), [[1], [1]])
    full = Timetable(courses=2, periods=1, rooms=1, requirements=(1, 1))
    assert not corpus.oracle_timetable(full, [[1], [1]])


def test_timetable_golden():
    table = parse_rows(case("timetable").golden())
    assert corpus.oracle_timetable(FEASIBLE, table)


def test_relaxed_golden():
    text = case("relaxed").golden()
    *rows, note = text.splitlines()
    table = parse_rows("\n".join(rows))
    assert note == "Conflict between course 1 and 2 relaxed"
    assert not corpus.oracle_timetable(INFEASIBLE, table)
    assert corpus.oracle_timetable(INFEASIBLE.relaxed(1, 2), table)
    assert corpus.count_timetables(INFEASIBLE) == 0


def test_create_timetable_count():
    records, count = parse_timetable_blocks(case("createtimetable").golden(), TINY.courses)
    assert count == len(records) == corpus.count_relaxed_solutions(TINY) == 85
    for table, pair in records:
        inst = TINY if pair is None else TINY.relaxed(*pair)
        assert corpus.oracle_timetable(inst, table)


def test_no_repeated_solutions():
    records, _ = parse_timetable_blocks(case("createtimetable").golden(), TINY.courses)
    assert corpus.no_repeated_solutions(records)
    assert not corpus.no_repeated_solutions(records + records[:1])


def test_repeats_appear_without_symmetry_breaking():
    # scanning every period for every lecture revisits the same sets in other orders
    src = case("createtimetable").source()
    mutant = src.replace("SOME P := PeriodOfPreviousLecture+1 TO Periods DO",
                         "SOME P := 1 TO Periods DO NOT Timetable[C,P];")
    assert mutant != src
    r = alma0.run_source(mutant, alma0.Limits(max_steps=10_000_000))
    records, _ = parse_timetable_blocks(r.output, TINY.courses)
    assert records and not corpus.no_repeated_solutions(records)


def test_relaxation_adds_solutions():
    assert corpus.count_relaxed_solutions(TINY) > corpus.count_timetables(TINY) > 0


@pytest.mark.parametrize("c", FAST, ids=lambda c: c.name)
def test_deterministic_output(c):
    outs = {alma0.run_source(c.source()).output for _ in range(5)}
    assert len(outs) == 1


def _naive_count(inst):
    import itertools
    cells = [(c, p) for c in range(1, inst.courses + 1) for p in range(1, inst.periods + 1)]
    total = 0
    for bits in itertools.product((0, 1), repeat=len(cells)):
        table = [list(bits[i * inst.periods:(i + 1) * inst.periods]) for i in range(inst.courses)]
        total += corpus.oracle_timetable(inst, table)
    return total


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_timetable_counter_matches_naive(data):
    courses = data.draw(st.integers(1, 3))
    periods = data.draw(st.integers(1, 4))
    pairs = [(a, b) for a in range(1, courses + 1) for b in range(a + 1, courses + 1)]
    inst = Timetable(
        courses=courses, periods=periods, rooms=data.draw(st.integers(1, 2)),
        requirements=tuple(data.draw(st.integers(0, periods)) for _ in range(courses)),
        unavailable=frozenset(data.draw(st.sets(st.tuples(st.integers(1, courses), st.integers(1, periods))))),
        conflicts=frozenset(data.draw(st.sets(st.sampled_from(pairs))) if pairs else ()),
    )
    assert corpus.count_timetables(inst) == _naive_count(inst)
