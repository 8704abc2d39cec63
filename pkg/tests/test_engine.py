import pytest

import alma0
from alma0.engine import Limits
from alma0.errors import (ChoicePointLimitExceeded, StepLimitExceeded,
                          UninitializedError)
from alma0.store import UNKNOWN
from support import EventLog, engine_for, module, run_body, run_src


def test_empty_module_succeeds():
    r = run_src("MODULE m; BEGIN END m.")
    assert r.status == "succeeded" and r.output == ""


def test_false_fails_with_empty_output():
    r = run_src("MODULE m; BEGIN FALSE END m.")
    assert r.status == "failed" and r.output == ""


def test_true_succeeds():
    assert run_src("MODULE m; BEGIN TRUE END m.").status == "succeeded"


# sequencing

def test_seq_backtracks_into_earlier_some():
    log = EventLog()
    r = run_body("SOME i := 1 TO 3 DO TRUE END; i = 2", trace=log)
    assert r.succeeded and r.store["i"] == 2
    assert [k for k, _ in log.events].count("backtrack") == 1


def test_false_then_assignment_leaves_store_alone():
    r = run_body("EITHER FALSE; x := 1 ORELSE TRUE END")
    assert r.succeeded and r.store["x"] is UNKNOWN


def test_true_true():
    assert run_body("TRUE; TRUE").succeeded


# EITHER

def test_either_first_branch_fails():
    r = run_body("EITHER FALSE ORELSE x = 7 END")
    assert r.succeeded and r.store["x"] == 7


def test_either_then_test():
    r = run_body("EITHER x = 1 ORELSE x = 2 END; x = 2")
    assert r.succeeded and r.store["x"] == 2


def test_either_exhausts_to_failure():
    assert run_body("EITHER x = 1 ORELSE x = 2 END; x = 3").status == "failed"


KNIGHT_NEXT = """
MODULE k;
CONST N = 5;
VAR row, col: INTEGER;
PROCEDURE Next(VAR row, col: INTEGER);
VAR i, j: INTEGER;
BEGIN
  EITHER i = 2;  j = 1
  ORELSE i = 1;  j = 2
  ORELSE i = -1; j = 2
  ORELSE i = -2; j = 1
  ORELSE i = -2; j = -1
  ORELSE i = -1; j = -2
  ORELSE i = 1; j = -2
  ORELSE i = 2; j = -1
  END;
  row := row + i;
  col := col + j;
  (1 <= row) AND (row <= N);
  (1 <= col) AND (col <= N)
END Next;
BEGIN
  row := 1; col := 1;
  FORALL Next(row, col) DO WRITELN(row, ',', col) END
END k.
"""


def test_knight_moves_from_corner():
    # Only two of the eight offsets stay on a 5x5 board from (1,1).
    moves = [(r, c) for dr, dc in [(2, 1), (1, 2), (-1, 2), (-2, 1), (-2, -1), (-1, -2), (1, -2), (2, -1)]
             for r, c in [(1 + dr, 1 + dc)] if 1 <= r <= 5 and 1 <= c <= 5]
    r = run_src(KNIGHT_NEXT)
    assert r.output == "".join(f"{a},{b}\n" for a, b in moves) == "3,2\n2,3\n"


# SOME

def test_some_empty_range_fails():
    assert run_body("SOME i := 1 TO 0 DO TRUE END").status == "failed"


def test_some_linear_scan():
    r = run_body("SOME i := 1 TO 5 DO i = 4 END")
    assert r.succeeded and r.store["i"] == 4


def test_some_bounds_evaluated_once():
    r = run_body("n := 3; FORALL SOME i := 1 TO n DO n := n + 1 END DO z := i END")
    # the generator's write to n is undone after exhaustion; only the DO part sticks
    assert r.store["n"] == 3 and r.store["z"] == 3


def test_some_tendigit_fragment():
    body = "sum := 7; i := 2; SOME j := 0 TO 10-sum DO a[i] = j; sum := sum + j END; a[i] = 3"
    decls = "VAR i, j, sum: INTEGER; a: ARRAY [0..9] OF INTEGER;"
    r = run_body(body, decls)
    assert r.succeeded and r.store["sum"] == 10 and r.store["a"][2] == 3


def test_some_unknown_bound_is_error():
    r = run_body("SOME i := 1 TO x DO TRUE END")
    assert r.status == "runtime-error" and isinstance(r.error, UninitializedError)


# FOR

def test_for_empty_range_succeeds():
    assert run_body("FOR i := 1 TO 0 DO FALSE END").succeeded


def test_for_fills_array():
    r = run_body("FOR i := 1 TO 3 DO a[i] = i END")
    assert r.store["a"][:3] == [1, 2, 3]


def test_for_backtracks_into_earlier_iteration():
    # permutation of 1..3 via FOR over SOME, checked by a final constraint
    body = "FOR i := 1 TO 3 DO SOME j := 1 TO 3 DO a[j] = i END END; a[1] = 3"
    r = run_body(body)
    assert r.succeeded and r.store["a"][:3] == [3, 1, 2]


def test_for_permutations_count():
    body = ("n := 0; FORALL FOR i := 1 TO 4 DO SOME j := 1 TO 4 DO a[j] = i END END "
            "DO n := n + 1 END")
    assert run_body(body).store["n"] == 24


# FORALL

def test_forall_counts_solutions():
    r = run_body("n := 0; FORALL SOME i := 1 TO 3 DO TRUE END DO n := n+1 END")
    assert r.store["n"] == 3


def test_forall_no_solutions():
    r = run_body("n := 0; FORALL FALSE DO n := n+1 END")
    assert r.succeeded and r.store["n"] == 0


def test_forall_generator_effects_undone():
    r = run_body("FORALL SOME i := 1 TO 3 DO x := i END DO n := i END")
    assert r.store["x"] is UNKNOWN and r.store["i"] is UNKNOWN and r.store["n"] == 3


def test_forall_body_failure_aborts():
    r = run_body("n := 0; EITHER FORALL SOME i := 1 TO 3 DO TRUE END DO n := n + 1; i < 2 END "
                 "ORELSE y := n END")
    assert r.succeeded and r.store["y"] == 0 and r.store["n"] == 0


def test_forall_body_choice_points_discarded():
    r = run_body("n := 0; FORALL SOME i := 1 TO 2 DO TRUE END DO "
                 "EITHER n := n + 1 ORELSE n := n + 100 END END")
    assert r.store["n"] == 2


def test_forall_output_irrevocable():
    r = run_body("FORALL SOME i := 1 TO 3 DO TRUE END DO WRITE(i) END; FALSE")
    assert r.status == "failed" and r.output == "123"


# COMMIT

def test_commit_prevents_retry():
    log = EventLog()
    r = run_body("COMMIT SOME i := 1 TO 3 DO WRITE(i) END END; FALSE", trace=log)
    assert r.status == "failed" and r.output == "1"
    assert ("backtrack", "i=2") not in log.events


def test_commit_false():
    assert run_body("COMMIT FALSE END").status == "failed"


def test_commit_keeps_state():
    e = engine_for(module("COMMIT x = 1 END; y := x"))
    r = e.run()
    assert r.succeeded and r.store["x"] == 1 and e.choicepoints == 0


# NOT

PENGUIN_AB = """
MODULE p;
TYPE Animal = (Tweety, Toto);
VAR x: Animal;
PROCEDURE penguin(MIX x: Animal); BEGIN x = Tweety END penguin;
PROCEDURE ab(MIX x: Animal); BEGIN penguin(x) END ab;
BEGIN
  x := {who};
  NOT ab(x)
END p.
"""


@pytest.mark.parametrize("who,status", [("Toto", "succeeded"), ("Tweety", "failed")])
def test_not_ab(who, status):
    assert run_src(PENGUIN_AB.format(who=who)).status == status


def test_not_false():
    assert run_body("NOT FALSE").succeeded


def test_not_discards_bindings():
    r = run_body("NOT NOT x = 3")
    assert r.succeeded and r.store["x"] is UNKNOWN


def test_not_statement_vs_operator():
    # statement position: negation as failure over a procedure; expression: boolean NOT
    r = run_body("b := FALSE; (NOT b); NOT (b)")
    assert r.succeeded


# equality

def test_equality_known():
    assert run_body("10 = 10").succeeded
    assert run_body("10 = 9").status == "failed"


def test_equality_binds_either_side():
    assert run_body("x = 4").store["x"] == 4
    assert run_body("4 = x").store["x"] == 4


def test_equality_both_unknown_is_error():
    r = run_body("x = y")
    assert r.status == "runtime-error" and isinstance(r.error, UninitializedError)


def test_equality_binds_array_cell_and_then_compares():
    r = run_body("a[2] = 5; a[2] = 5; EITHER a[2] = 6 ORELSE y := 1 END")
    assert r.succeeded and r.store["a"][1] == 5 and r.store["y"] == 1


def test_equality_bind_respects_subrange():
    r = run_body("s = 11", "VAR s: [1..10];")
    assert r.status == "runtime-error" and "out of range" in str(r.error)


def test_equality_in_expression_does_not_bind():
    r = run_body("(x = 3) OR TRUE")
    assert r.status == "runtime-error" and isinstance(r.error, UninitializedError)


# assignment

def test_assign_twice():
    assert run_body("x := 1; x := 2").store["x"] == 2


def test_assign_undone_in_failed_branch():
    r = run_body("x := 1; EITHER x := 5; FALSE ORELSE TRUE END")
    assert r.store["x"] == 1


def test_array_assignment_copies_unknown_cells():
    decls = "VAR p, q: ARRAY [1..3] OF INTEGER;"
    r = run_body("p[1] := 7; q[2] := 9; q := p; p[1] := 8", decls)
    assert r.store["q"] == [7, UNKNOWN, UNKNOWN] and r.store["p"][0] == 8


def test_array_assignment_undone_on_backtrack():
    decls = "VAR p, q: ARRAY [1..2] OF INTEGER;"
    r = run_body("p[1] := 1; p[2] := 2; q[1] := 5; EITHER q := p; FALSE ORELSE TRUE END", decls)
    assert r.store["q"] == [5, UNKNOWN]


def test_subrange_assignment_checked():
    r = run_body("s := 0", "VAR s: [1..10];")
    assert r.status == "runtime-error"


def test_index_out_of_range():
    r = run_body("a[6] := 1")
    assert r.status == "runtime-error" and "index 6" in str(r.error)


# expressions

def test_arithmetic_precedence():
    r = run_body("x := 2 + 3*4; y := (2 + 3) * 4; z := -7 DIV 2; n := -7 MOD 2")
    assert (r.store["x"], r.store["y"], r.store["z"], r.store["n"]) == (14, 20, -3, -1)


def test_division_by_zero():
    r = run_body("x := 0; y := 1 DIV x")
    assert r.status == "runtime-error" and "division by zero" in str(r.error)


def test_overflow_is_error():
    r = run_body("x := 9223372036854775807; x := x + 1")
    assert r.status == "runtime-error" and "overflow" in str(r.error)


def test_short_circuit_guards():
    r = run_body("row := 0; (1 <= row) AND (row <= N)", "CONST N = 5; VAR row, other: INTEGER;")
    assert r.status == "failed"
    r = run_body("TRUE OR (other = 1)", "VAR other: INTEGER;")
    assert r.succeeded


def test_uninitialized_read_is_error():
    r = run_body("y := x + 1")
    assert r.status == "runtime-error" and "uninitialized variable x" in str(r.error)


def test_known():
    r = run_body("b := KNOWN(x); x = 1; IF KNOWN(x) THEN y := 1 END")
    assert r.store["b"] is False and r.store["y"] == 1


def test_known_array_all_cells():
    r = run_body("a[1] := 1; b := KNOWN(a); FOR i := 1 TO 5 DO a[i] := 0 END; IF KNOWN(a) THEN y := 1 END")
    assert r.store["b"] is False and r.store["y"] == 1


def test_statement_in_expression_position_commits():
    src = """
MODULE m;
VAR x, n: INTEGER;
PROCEDURE Pick(MIX v: INTEGER);
BEGIN SOME n := 1 TO 3 DO v = n END END Pick;
BEGIN
  IF Pick(x) THEN WRITE(x) END;
  IF Pick(2) THEN WRITE('y') END;
  IF Pick(7) THEN WRITE('n') ELSE WRITE('-') END;
  x = 1
END m.
"""
    r = run_src(src)
    assert r.output == "1y-" and r.succeeded


def test_statement_in_expression_false_undoes_effects():
    src = """
MODULE m;
VAR x, y: INTEGER;
PROCEDURE Bad(VAR v: INTEGER); BEGIN v := 5; FALSE END Bad;
BEGIN
  x := 1;
  IF Bad(x) THEN y := 1 ELSE y := x END
END m.
"""
    assert run_src(src).store["y"] == 1


# WHILE

def test_while_false():
    r = run_body("WHILE FALSE DO x := 1 END")
    assert r.succeeded and r.store["x"] is UNKNOWN


def test_while_backtracks_into_earlier_iteration():
    body = ("i := 0; n := 0; WHILE i < 3 DO i := i + 1; EITHER n := n + 1 ORELSE n := n + 10 END END; "
            "n = 21")
    r = run_body(body)
    assert r.succeeded and r.store["n"] == 21


def test_step_limit():
    r = run_body("WHILE TRUE DO x := 1 END", limits=Limits(max_steps=1000))
    assert r.status == "runtime-error" and isinstance(r.error, StepLimitExceeded)
    assert "step limit" in str(r.error)


def test_choicepoint_limit():
    r = run_body("FOR i := 1 TO 50 DO EITHER TRUE ORELSE TRUE END END; FALSE",
                 limits=Limits(max_choicepoints=10))
    assert r.status == "runtime-error" and isinstance(r.error, ChoicePointLimitExceeded)


def test_max_solutions_collects_top_level_solutions():
    r = run_body("SOME i := 1 TO 5 DO TRUE END", limits=Limits(max_solutions=3))
    assert r.succeeded and r.solutions == 3 and r.store["i"] == 3


# procedures

def test_choice_points_survive_procedure_return():
    src = """
MODULE m;
VAR x: INTEGER;
PROCEDURE Gen(VAR v: INTEGER); BEGIN SOME v := 1 TO 5 DO TRUE END END Gen;
BEGIN Gen(x); x = 4 END m.
"""
    r = run_src(src)
    assert r.succeeded and r.store["x"] == 4


def test_function_successor_generates_on_backtracking():
    src = """
MODULE m;
CONST N = 4;
TYPE Node = [1..N]; Graph = ARRAY [1..N],[1..N] OF BOOLEAN;
VAR G: Graph; a, b: INTEGER; v: Node;
PROCEDURE Successor(G: Graph; X: Node): Node;
VAR i: Node;
BEGIN
  SOME i := 1 TO N DO G[X,i] END;
  RETURN i
END Successor;
BEGIN
  FOR a := 1 TO N DO FOR b := 1 TO N DO G[a,b] := FALSE END END;
  G[2,1] := TRUE; G[2,3] := TRUE; G[2,4] := TRUE;
  FORALL v := Successor(G, 2) DO WRITE(v) END;
  WRITELN
END m.
"""
    assert run_src(src).output == "134\n"


def test_mix_binds_unknown_actual():
    src = """
MODULE m;
TYPE Animal = (Tweety, Toto);
VAR x: Animal;
PROCEDURE eagle(MIX x: Animal); BEGIN x = Toto END eagle;
BEGIN eagle(x); Print(x); eagle(Toto) END m.
"""
    r = run_src(src)
    assert r.succeeded and r.output == "Toto\n"


def test_mix_literal_is_fresh_cell():
    src = """
MODULE m;
VAR c: INTEGER;
PROCEDURE Pair(MIX c1, c2: INTEGER); BEGIN c1 = 1; c2 = c1 + 1 END Pair;
BEGIN Pair(1, c); WRITE(c) END m.
"""
    assert run_src(src).output == "2"


def test_value_parameter_is_copy():
    src = """
MODULE m;
VAR x: INTEGER; p: ARRAY [1..2] OF INTEGER;
PROCEDURE Touch(v: INTEGER; q: ARRAY [1..2] OF INTEGER);
BEGIN v := 9; q[1] := 9 END Touch;
BEGIN x := 1; p[1] := 1; Touch(x, p); WRITE(x, p[1]) END m.
"""
    assert run_src(src).output == "11"


def test_var_parameter_aliases():
    src = """
MODULE m;
VAR x: INTEGER;
PROCEDURE Set(VAR v: INTEGER); BEGIN v := 9 END Set;
BEGIN x := 1; Set(x); WRITE(x) END m.
"""
    assert run_src(src).output == "9"


def test_value_parameter_unknown_is_error():
    src = """
MODULE m;
VAR x: INTEGER;
PROCEDURE P(v: INTEGER); BEGIN TRUE END P;
BEGIN P(x) END m.
"""
    r = run_src(src)
    assert r.status == "runtime-error" and isinstance(r.error, UninitializedError)


def test_function_without_return_is_error():
    src = """
MODULE m;
VAR x: INTEGER;
PROCEDURE F(v: INTEGER): INTEGER; BEGIN v > 0 END F;
BEGIN x := F(1) END m.
"""
    r = run_src(src)
    assert r.status == "runtime-error" and "without RETURN" in str(r.error)


def test_function_failure_propagates():
    src = """
MODULE m;
VAR x: INTEGER;
PROCEDURE F(v: INTEGER): INTEGER; BEGIN v > 0; RETURN v END F;
BEGIN EITHER x := F(0) ORELSE x := F(2) END; WRITE(x) END m.
"""
    assert run_src(src).output == "2"


def test_recursion_and_return_in_proper_procedure():
    src = """
MODULE m;
VAR r: INTEGER;
PROCEDURE Fact(n: INTEGER): INTEGER;
BEGIN IF n = 0 THEN RETURN 1 END; RETURN n * Fact(n - 1) END Fact;
PROCEDURE Early(VAR x: INTEGER);
BEGIN x := 1; RETURN; x := 2 END Early;
BEGIN r := Fact(10); WRITE(r); Early(r); WRITE(' ', r) END m.
"""
    assert run_src(src).output == "3628800 1"


def test_nested_procedure_static_link():
    src = """
MODULE m;
VAR r: INTEGER;
PROCEDURE Outer(n: INTEGER): INTEGER;
VAR acc: INTEGER;
  PROCEDURE Add(k: INTEGER); BEGIN acc := acc + k END Add;
BEGIN acc := 0; Add(n); Add(n); RETURN acc END Outer;
BEGIN r := Outer(21); WRITE(r) END m.
"""
    assert run_src(src).output == "42"


def test_array_function_result():
    src = """
MODULE m;
TYPE V = ARRAY [1..3] OF INTEGER;
VAR p: V;
PROCEDURE Make(x: INTEGER): V;
VAR q: V;
BEGIN q[1] := x; q[3] := x; RETURN q END Make;
BEGIN p := Make(4); Print(p); IF KNOWN(p) THEN WRITE('known') END END m.
"""
    assert run_src(src).output == "4 . 4\n"


def test_deep_nondeterministic_nesting():
    r = run_body("FOR i := 1 TO 20000 DO SOME j := 1 TO 2 DO TRUE END END; WRITE(i)")
    assert r.output == "20000"


def test_run_is_deterministic():
    src = module("FORALL SOME i := 1 TO 4 DO EITHER x = i ORELSE x = 2*i END END DO WRITE(x) END")
    outs = {alma0.run_source(src).output for _ in range(3)}
    assert outs == {"12243648"}


def test_trace_lines_format():
    import io
    buf = io.StringIO()
    run_body("EITHER x = 1 ORELSE x = 2 END; x = 2", trace=alma0.Tracer(buf))
    lines = buf.getvalue().splitlines()
    kinds = [ln.split()[1] for ln in lines]
    assert kinds == ["kind=choice", "kind=bind", "kind=backtrack", "kind=bind"]
    assert all(ln.startswith("EVENT kind=") and " loc=" in ln and " detail=" in ln for ln in lines)
    assert lines[1] == "EVENT kind=bind loc=6:10 detail=x=1"
