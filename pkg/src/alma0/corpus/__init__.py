"""Shipped Alma-0 programs, their golden outputs, and independent checkers.

Nothing in here evaluates Alma-0: the oracles are plain Python over plain
data, so they can catch engine bugs rather than repeat them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

CORPUS_DIR = Path(__file__).resolve().parent


@dataclass(frozen=True)
class Case:
    name: str
    tier: str  # "fast" or "slow"
    oracle: str

    @property
    def source_path(self) -> Path:
        return CORPUS_DIR / f"{self.name}.a0"

    def source(self) -> str:
        return self.source_path.read_text(encoding="utf-8")

    def golden(self) -> str:
        return (CORPUS_DIR / f"{self.name}.golden").read_text(encoding="utf-8")


def manifest() -> list[Case]:
    """Parse MANIFEST: one ``name tier oracle`` triple per line, ``#`` comments."""
    cases = []
    text = resources.files(__name__).joinpath("MANIFEST").read_text(encoding="utf-8")
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, tier, oracle = line.split()
        if tier not in ("fast", "slow"):
            raise ValueError(f"bad tier {tier!r} for {name}")
        cases.append(Case(name, tier, oracle))
    return cases


def case(name: str) -> Case:
    for c in manifest():
        if c.name == name:
            return c
    raise KeyError(name)


# output parsing

def parse_rows(text: str) -> list[list[int | None]]:
    """Rows of space-separated integers; ``.`` becomes None."""
    rows = []
    for line in text.splitlines():
        if line.strip():
            rows.append([None if tok == "." else int(tok) for tok in line.split()])
    return rows


# tendigit

def oracle_self_describing(digits) -> bool:
    digits = list(digits)
    if len(digits) != 10 or any(not 0 <= d <= 9 for d in digits):
        return False
    return all(digits[i] == digits.count(i) for i in range(10))


def self_describing_solutions() -> list[tuple[int, ...]]:
    """Every self-describing 10-digit vector, found by brute force over digit sums of 10."""
    found = []

    def extend(prefix, remaining):
        if len(prefix) == 10:
            if remaining == 0 and oracle_self_describing(prefix):
                found.append(tuple(prefix))
            return
        for d in range(remaining + 1):
            prefix.append(d)
            extend(prefix, remaining - d)
            prefix.pop()
    extend([], 10)
    return found


# knight's tour

def oracle_knight_tour(board) -> bool:
    n = len(board)
    if n == 0 or any(len(row) != n for row in board):
        return False
    where = {}
    for r, row in enumerate(board):
        for c, mark in enumerate(row):
            if mark is None or mark in where:
                return False
            where[mark] = (r, c)
    if sorted(where) != list(range(1, n * n + 1)):
        return False
    if where[1] != (0, 0):
        return False
    for m in range(1, n * n):
        (r1, c1), (r2, c2) = where[m], where[m + 1]
        if sorted((abs(r1 - r2), abs(c1 - c2))) != [1, 2]:
            return False
    return True


# longest path

def oracle_longest_path(n: int, arcs, v1: int, v2: int):
    """Most arcs on a simple path v1 -> v2 in a digraph on 1..n, or None if there is none."""
    arcs = set(arcs)
    best = None
    inner = [v for v in range(1, n + 1) if v not in (v1, v2)]
    for size in range(len(inner) + 1):
        for mids in itertools.permutations(inner, size):
            path = (v1, *mids, v2)
            if all((a, b) in arcs for a, b in zip(path, path[1:])):
                if best is None or len(path) - 1 > best:
                    best = len(path) - 1
    return best


_LONGEST_PATH_PROCS = """\
PROCEDURE Successor(G: Graph; X: Node): Node;
VAR i: Node;
BEGIN
  SOME i := 1 TO N DO
    G[X,i]
  END;
  RETURN i
END Successor;

PROCEDURE LongestPath(G: Graph; InitNode, FinalNode: Node): PathMark;
VAR k, max: INTEGER;
    i: Node;
    Path, LongPath: PathMark;
BEGIN
  FOR i := 1 TO N DO Path[i] := 0 END;
  i := InitNode;
  k := 0;
  max := 0;
  FORALL
    WHILE (Path[i] = 0) AND (i <> FinalNode) DO
      k := k+1;
      Path[i] := k;
      i := Successor(G,i) (* generate a successor
                             nondeterministically *)
    END
  DO
    IF (i = FinalNode) AND (k > max)
    THEN max := k; LongPath := Path END
  END;
  RETURN LongPath
END LongestPath;
"""


def longest_path_source(n: int, arcs, v1: int, v2: int, name: str = "Paths") -> str:
    """Program printing the longest v1 -> v2 path length (largest mark), or ``none``."""
    lines = [
        f"MODULE {name};",
        f"CONST N = {n};",
        "TYPE Node = [1..N];",
        "  Graph = ARRAY [1..N],[1..N] OF BOOLEAN;",
        "  PathMark = ARRAY [1..N] OF INTEGER;",
        "VAR G: Graph;",
        "  P: PathMark;",
        "  a, b, len: INTEGER;",
        "",
        _LONGEST_PATH_PROCS,
        "BEGIN",
        "  FOR a := 1 TO N DO FOR b := 1 TO N DO G[a,b] := FALSE END END;",
    ]
    for a, b in sorted(set(arcs)):
        lines.append(f"  G[{a},{b}] := TRUE;")
    lines += [
        f"  P := LongestPath(G, {v1}, {v2});",
        "  IF KNOWN(P) THEN",
        "    len := 0;",
        "    FOR a := 1 TO N DO IF P[a] > len THEN len := P[a] END END;",
        "    WRITELN(len)",
        "  ELSE",
        "    WRITELN('none')",
        "  END",
        f"END {name}.",
    ]
    return "\n".join(lines) + "\n"


LONGEST_PATH_INSTANCE = (6, ((1, 2), (1, 3), (2, 3), (3, 2), (2, 4), (3, 5), (4, 5),
                             (5, 4), (4, 6), (5, 6), (6, 1)), 1, 6)


# permutations

def next_permutation(seq):
    """Lexicographic successor of ``seq`` or None when it is the last one."""
    a = list(seq)
    i = len(a) - 2
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return None
    j = len(a) - 1
    while a[j] <= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    a[i + 1:] = reversed(a[i + 1:])
    return a


def prev_permutation(seq):
    a = list(seq)
    i = len(a) - 2
    while i >= 0 and a[i] <= a[i + 1]:
        i -= 1
    if i < 0:
        return None
    j = len(a) - 1
    while a[j] >= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    a[i + 1:] = reversed(a[i + 1:])
    return a


oracle_next_permutation = next_permutation

PERMUTATION_INPUT = (1, 4, 6, 2, 9, 5, 8, 7, 3)


# timetabling

@dataclass(frozen=True)
class Timetable:
    """Instance data. Courses and periods are 1-based in the program, 0-based here."""

    courses: int
    periods: int
    rooms: int
    requirements: tuple[int, ...]
    unavailable: frozenset = field(default_factory=frozenset)  # (course, period), 1-based
    conflicts: frozenset = field(default_factory=frozenset)  # (c1, c2) with c1 < c2, 1-based

    def available(self, c: int, p: int) -> bool:
        return (c, p) not in self.unavailable

    def conflict(self, c1: int, c2: int) -> bool:
        return (min(c1, c2), max(c1, c2)) in self.conflicts

    def relaxed(self, c1: int, c2: int) -> "Timetable":
        return Timetable(self.courses, self.periods, self.rooms, self.requirements,
                         self.unavailable, self.conflicts - {(min(c1, c2), max(c1, c2))})


def oracle_timetable(inst: Timetable, table) -> bool:
    """``table[c][p]`` truthy when course c+1 meets in period p+1."""
    if len(table) != inst.courses or any(len(r) != inst.periods for r in table):
        return False
    if any(v not in (0, 1, True, False) for r in table for v in r):
        return False
    for c in range(1, inst.courses + 1):
        row = table[c - 1]
        if sum(1 for v in row if v) != inst.requirements[c - 1]:
            return False
        if any(v and not inst.available(c, p) for p, v in enumerate(row, 1)):
            return False
    for p in range(inst.periods):
        busy = [c for c in range(1, inst.courses + 1) if table[c - 1][p]]
        if len(busy) > inst.rooms:
            return False
        if any(inst.conflict(a, b) for a, b in itertools.combinations(busy, 2)):
            return False
    return True


def count_timetables(inst: Timetable) -> int:
    """Number of feasible timetables: depth-first over period sets per course, pruning partial clashes."""
    def options(c):
        allowed = [p for p in range(1, inst.periods + 1) if inst.available(c, p)]
        return list(itertools.combinations(allowed, inst.requirements[c - 1]))

    per_course = [options(c) for c in range(1, inst.courses + 1)]
    load = [0] * (inst.periods + 1)
    chosen: list[tuple[int, ...]] = []

    def search(c):
        if c > inst.courses:
            return 1
        total = 0
        for periods in per_course[c - 1]:
            if any(load[p] >= inst.rooms for p in periods):
                continue
            if any(inst.conflict(c1, c) and set(pc) & set(periods) for c1, pc in enumerate(chosen, 1)):
                continue
            for p in periods:
                load[p] += 1
            chosen.append(periods)
            total += search(c + 1)
            chosen.pop()
            for p in periods:
                load[p] -= 1
        return total

    return search(1)


def count_relaxed_solutions(inst: Timetable) -> int:
    """Solutions of the original instance plus those of every single-conflict relaxation."""
    total = count_timetables(inst)
    for a, b in sorted(inst.conflicts):
        total += count_timetables(inst.relaxed(a, b))
    return total


FEASIBLE = Timetable(
    courses=10, periods=20, rooms=3,
    requirements=(4, 3, 5, 2, 4, 3, 6, 2, 5, 4),
    unavailable=frozenset({(1, 1), (1, 2), (1, 3), (2, 5), (2, 6), (3, 1), (3, 20),
                           (4, 10), (4, 11), (4, 12), (5, 1), (5, 2), (6, 7), (7, 3),
                           (7, 4), (8, 15), (9, 9), (9, 10), (10, 1), (10, 20)}),
    conflicts=frozenset({(1, 2), (1, 3), (2, 3), (2, 4), (3, 5), (4, 6), (5, 7),
                         (6, 8), (7, 9), (8, 10), (1, 10), (3, 7)}),
)

# Courses 1 and 2 can only meet in period 1 and share students, so nothing
# fits until that one conflict is relaxed.
INFEASIBLE = Timetable(
    courses=10, periods=20, rooms=3,
    requirements=(1, 1, 3, 2, 2, 3, 2, 2, 3, 2),
    unavailable=frozenset({(c, p) for c in (1, 2) for p in range(2, 21)}),
    conflicts=frozenset({(1, 2), (2, 5), (3, 4), (4, 9), (6, 7)}),
)

TINY = Timetable(
    courses=4, periods=4, rooms=2,
    requirements=(2, 1, 2, 1),
    unavailable=frozenset({(1, 1), (3, 2), (4, 4)}),
    conflicts=frozenset({(1, 2), (2, 3), (3, 4)}),
)

_TIMETABLING_PROCS = """\
PROCEDURE Timetabling(Available: AvailabilityMatrix;
                      Conflict: ConflictMatrix;
                      Requirements: RequirementVector;
                      VAR Timetable: TimetableMatrix);
VAR
   BusyRooms : ARRAY [1..Periods] OF INTEGER;
   C, C1, L, P : INTEGER;
   PeriodOfPreviousLecture : INTEGER;
BEGIN
   FOR P := 1 TO Periods DO
      BusyRooms[P] := 0;
   END;
   FOR C := 1 TO Courses DO
      PeriodOfPreviousLecture := 0;
      FOR L := 1 TO Requirements[C] DO
         SOME P := PeriodOfPreviousLecture+1 TO Periods DO
            Available[C,P];
            BusyRooms[P] < Rooms;
            FOR C1 := 1 TO C-1 DO
               NOT (Conflict[C1,C] AND Timetable[C1,P])
            END;
            Timetable[C,P] := TRUE;
            BusyRooms[P] := BusyRooms[P] + 1;
            PeriodOfPreviousLecture := P;
         END
      END
   END
END Timetabling;

PROCEDURE RelaxedTimetabling(Available: AvailabilityMatrix;
                             VAR Conflict: ConflictMatrix;
                             Requirements: RequirementVector;
                             VAR Timetable: TimetableMatrix;
                             MIX c1, c2: INTEGER);
VAR
   i, j: INTEGER;
BEGIN
   EITHER
     Timetabling(Available, Conflict, Requirements, Timetable)
   ORELSE
     SOME i := 1 TO Courses-1 DO
       SOME j := i+1 TO Courses DO
         Conflict[i,j];
         c1 = i; c2 = j;
         Conflict[i,j] := FALSE;
         Timetabling(Available, Conflict, Requirements, Timetable)
       END
     END
   END
END RelaxedTimetabling;
"""

_CREATE_TIMETABLE = """\
PROCEDURE CreateTimetable;
VAR
  Available: AvailabilityMatrix;
  Conflict: ConflictMatrix;
  Requirements: RequirementVector;
  Timetable: TimetableMatrix;
  NbrSolutions: INTEGER;
  c1, c2: INTEGER;
BEGIN
  Initialize(Available,Conflict,Requirements,Timetable);
  NbrSolutions := 0;
  FORALL
    RelaxedTimetabling(Available,Conflict,Requirements,Timetable,c1,c2)
  DO
    NbrSolutions := NbrSolutions + 1;
    WRITELN('Solution number ',NbrSolutions);
    PrintSolution(Available,Timetable);
    IF KNOWN(c1)
    THEN WRITELN('Conflict between course ', c1,' and ',c2,' relaxed')
    ELSE WRITELN('No constraint relaxed for this solution');
    END
  END;
  IF NbrSolutions > 0
  THEN WRITELN('Number of solutions : ',NbrSolutions)
  ELSE WRITELN('No solution found.');
  END;
  WRITELN
END CreateTimetable;
"""

_MAIN_BODIES = {
    "first": """\
VAR
  Available: AvailabilityMatrix;
  Conflict: ConflictMatrix;
  Requirements: RequirementVector;
  Timetable: TimetableMatrix;
BEGIN
  Initialize(Available, Conflict, Requirements, Timetable);
  IF Timetabling(Available, Conflict, Requirements, Timetable)
  THEN PrintSolution(Available, Timetable)
  ELSE WRITELN('No solution found.')
  END
""",
    "relaxed": """\
VAR
  Available: AvailabilityMatrix;
  Conflict: ConflictMatrix;
  Requirements: RequirementVector;
  Timetable: TimetableMatrix;
  c1, c2: INTEGER;
BEGIN
  Initialize(Available, Conflict, Requirements, Timetable);
  RelaxedTimetabling(Available, Conflict, Requirements, Timetable, c1, c2);
  PrintSolution(Available, Timetable);
  IF KNOWN(c1)
  THEN WRITELN('Conflict between course ', c1, ' and ', c2, ' relaxed')
  ELSE WRITELN('No constraint relaxed for this solution')
  END
""",
    "all": """\
BEGIN
  CreateTimetable
""",
}


def _initialize(inst: Timetable) -> str:
    lines = [
        "PROCEDURE Initialize(VAR Available: AvailabilityMatrix;",
        "                     VAR Conflict: ConflictMatrix;",
        "                     VAR Requirements: RequirementVector;",
        "                     VAR Timetable: TimetableMatrix);",
        "VAR C, P: INTEGER;",
        "BEGIN",
        "  FOR C := 1 TO Courses DO",
        "    FOR P := 1 TO Periods DO",
        "      Available[C,P] := TRUE;",
        "      Timetable[C,P] := FALSE",
        "    END;",
        "    FOR P := 1 TO Courses DO Conflict[C,P] := FALSE END",
        "  END;",
    ]
    for c, r in enumerate(inst.requirements, 1):
        lines.append(f"  Requirements[{c}] := {r};")
    for c, p in sorted(inst.unavailable):
        lines.append(f"  Available[{c},{p}] := FALSE;")
    for a, b in sorted(inst.conflicts):
        lines.append(f"  Conflict[{a},{b}] := TRUE;")
        lines.append(f"  Conflict[{b},{a}] := TRUE;")
    lines[-1] = lines[-1].rstrip(";")
    lines.append("END Initialize;")
    return "\n".join(lines) + "\n"


def timetable_source(inst: Timetable, mode: str, name: str) -> str:
    """Timetabling program over ``inst``; ``mode`` is first, relaxed or all."""
    head = (
        f"MODULE {name};\n"
        "CONST\n"
        f"   Courses = {inst.courses};  (* q *)\n"
        f"   Periods = {inst.periods};  (* p *)\n"
        f"   Rooms = {inst.rooms};     (* r *)\n"
        "TYPE\n"
        "   AvailabilityMatrix = ARRAY [1..Courses],[1..Periods] OF BOOLEAN;\n"
        "   ConflictMatrix = ARRAY [1..Courses],[1..Courses] OF BOOLEAN;\n"
        "   RequirementVector = ARRAY [1..Courses] OF INTEGER;\n"
        "   TimetableMatrix = ARRAY [1..Courses],[1..Periods] OF BOOLEAN;\n\n"
    )
    parts = [head, _initialize(inst), "\n", _TIMETABLING_PROCS]
    if mode == "all":
        parts += ["\n", _CREATE_TIMETABLE]
    parts += ["\n", _MAIN_BODIES[mode], f"END {name}.\n"]
    return "".join(parts)


def parse_timetable_blocks(text: str, courses: int):
    """Split CreateTimetable-style output into (table, relaxed pair or None) records and the final count."""
    lines = text.splitlines()
    records = []
    count = None
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith("Solution number "):
            table = parse_rows("\n".join(lines[i + 1:i + 1 + courses]))
            note = lines[i + 1 + courses]
            pair = None
            if note.startswith("Conflict between course "):
                words = note.split()
                pair = (int(words[3]), int(words[5]))
            records.append((table, pair))
            i += courses + 2
            continue
        if line.startswith("Number of solutions : "):
            count = int(line.rsplit(" ", 1)[1])
        elif line == "No solution found.":
            count = 0
        i += 1
    return records, count


def generated_sources() -> dict[str, str]:
    """Corpus files that are produced from the instance data above."""
    n, arcs, v1, v2 = LONGEST_PATH_INSTANCE
    return {
        "longestpath": longest_path_source(n, arcs, v1, v2, "LongestPathDemo"),
        "timetable": timetable_source(FEASIBLE, "first", "Timetable"),
        "relaxed": timetable_source(INFEASIBLE, "relaxed", "Relaxed"),
        "createtimetable": timetable_source(TINY, "all", "Create"),
    }


def no_repeated_solutions(records) -> bool:
    """No (table, relaxed pair) record occurs twice.

    Choosing each lecture in a later period than the previous one means every
    set of periods is produced once; without that, reordering a course's
    lectures would repeat tables.
    """
    keys = [(tuple(map(tuple, table)), pair) for table, pair in records]
    return len(keys) == len(set(keys))
