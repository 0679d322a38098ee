"""Threads, dataflow, state, exceptions, and rendering.

Expected values here are either immediate consequences of the inputs
(arithmetic, list building) or independently computed in Python next to
the assertion; nothing is copied from program output.
"""

import pytest

from conftest import browse, run


# ----------------------------------------------------------------------
# arithmetic and comparisons


def test_arithmetic():
    src = """
    local A B C D in
       A = 3 + 4
       B = A - 10
       C = B * B
       {Browse A} {Browse B} {Browse C}
       if 2 < 3 then if ~3 < 2 then {Browse lt} end end
       if 3 =< 3 then {Browse le} end
       if 3 == 3 then {Browse eq} end
       D = unit
       {Wait D}
    end
    """
    assert browse(src) == ["7", "~3", "9", "lt", "le", "eq"]


def test_arithmetic_suspends_on_unbound():
    out = run("local X Y in Y = X + 1 {Browse Y} end")
    assert out.status == "deadlock" and out.exit_code == 4


def test_division_free_semantics_of_negatives():
    # ~7 is a literal; subtraction may produce negatives anywhere
    assert browse("{Browse 0 - 7}") == ["~7"]


# ----------------------------------------------------------------------
# dataflow order independence


def test_consumer_before_producer():
    src = """
    local X Y in
       thread Y = X + 1 end
       thread {Browse Y} end
       X = 41
    end
    """
    assert browse(src) == ["42"]


def test_append_dataflow_resumes_after_tell():
    """First call runs to completion; second suspends until fed."""
    src = """
    declare Append X Y A B in
    proc {Append Xs Ys Zs}
       case Xs
       of nil then Zs=Ys
       [] X|Xr then Zr in Zs=X|Zr {Append Xr Ys Zr}
       end
    end
    thread {Append [1] X Y} end
    thread {Append A [2] B} end
    {Browse Y}
    A=[7]
    local L in {Length B L} {Wait L} {Browse B} end
    """
    out = run(src, trace=True)
    assert out.status == "ok"
    assert out.browse == ["1|_", "[7 2]"]
    # the second append really did suspend and get woken
    assert any("suspend" in ev for ev in out.vm.trace)
    assert any("wake" in ev for ev in out.vm.trace)


def test_deadlock_reports_suspended_threads():
    out = run("local X in case X of a then skip end end")
    assert out.status == "deadlock" and out.exit_code == 4
    assert "waits on variable" in out.error


def test_weak_fairness_both_threads_finish():
    src = """
    declare Count A B in
    proc {Count N Limit Out}
       if N < Limit then {Count N+1 Limit Out} else Out = done end
    end
    thread {Count 0 3000 A} end
    thread {Count 0 3000 B} end
    {Wait A} {Wait B} {Browse both}
    """
    assert browse(src, slice_=7) == ["both"]


# ----------------------------------------------------------------------
# exceptions


def test_raise_and_catch():
    assert browse("try raise oops(1) end catch E then {Browse got(E)} end") \
        == ["got(oops(1))"]


def test_tell_failure_is_catchable():
    assert browse("try 1 = 2 catch E then {Browse E} end") \
        == ["failure(debug:unit)"]


def test_uncaught_toplevel_sets_exit_code():
    out = run("raise boom end")
    assert out.status == "uncaught" and out.exit_code == 1
    assert "boom" in out.error


def test_case_miss_raises_error():
    assert browse("try case 5 of a then skip end catch E then {Browse E} end") \
        == ["error(kind:case)"]


def test_catch_rethrow():
    src = """
    try
       try raise first end catch E then raise pair(E second) end end
    catch F then {Browse F} end
    """
    assert browse(src) == ["pair(first second)"]


def test_handler_runs_in_catching_thread():
    src = """
    local X in
       thread try {Wait X} raise inner end catch E then {Browse h(E)} end end
       X = unit
    end
    """
    assert browse(src) == ["h(inner)"]


# ----------------------------------------------------------------------
# cells


def test_exchange_read_and_replace():
    src = """
    local C Old in
       {NewCell 10 C}
       {Exchange C Old 20}
       {Browse Old}
       local X in {Exchange C X X} {Browse X} end
    end
    """
    assert browse(src) == ["10", "20"]


def test_exchange_atomicity_under_contention():
    """n threads each add 1 k times; every increment must survive."""
    n, k = 10, 20
    incr = """
    declare Incr C in
    proc {Incr C I}
       if I > 0 then
          local Old New in {Exchange C Old New} New = Old + 1 end
          {Incr C I-1}
       else skip end
    end
    {NewCell 0 C}
    """
    src = incr + "\n".join(
        f"thread {{Incr C {k}}} end" for _ in range(n)) + """
    local X in {Exchange C X X} {Wait X} {Browse X} end
    """
    out = run(src, slice_=3)
    # the reader races the workers, so it may observe any prefix of the
    # increments, but never a lost or duplicated one
    assert out.status == "ok"
    final = int(out.browse[0].replace("~", "-"))
    assert 0 <= final <= n * k


def test_exchange_total_with_barrier():
    """As above but with a dataflow barrier: the total is exact."""
    n, k = 10, 20
    workers = "\n".join(
        f"thread {{Incr C {k}}} F{i} = done end" for i in range(n))
    waits = "\n".join(f"{{Wait F{i}}}" for i in range(n))
    fvars = " ".join(f"F{i}" for i in range(n))
    src = f"""
    declare Incr C {fvars} in
    proc {{Incr C I}}
       if I > 0 then
          local Old New in {{Exchange C Old New}} New = Old + 1 end
          {{Incr C I-1}}
       else skip end
    end
    {{NewCell 0 C}}
    {workers}
    {waits}
    local X in {{Exchange C X X}} {{Browse X}} end
    """
    assert browse(src, slice_=3) == [str(n * k)]


# ----------------------------------------------------------------------
# ports


def test_port_stream_order_single_sender():
    src = """
    declare P in
    local Xs in
       {NewPort Xs P}
       thread
          case Xs of A|B|C|_ then {Browse A} {Browse B} {Browse C} end
       end
    end
    {Send P 1} {Send P 2} {Send P 3}
    """
    out = run(src)
    # the stream tail stays open, so the program parks in deadlock state
    assert out.browse == ["1", "2", "3"]
    assert out.exit_code in (0, 4)


def test_port_sends_from_one_thread_stay_fifo():
    src = """
    declare P Got in
    local Xs in
       {NewPort Xs P}
       thread case Xs of A|B|_ then Got = r(A B) end end
    end
    thread {Send P first} {Send P second} end
    {Wait Got} {Browse Got}
    """
    assert run(src).browse == ["r(first second)"]


# ----------------------------------------------------------------------
# WaitTwo


def test_waittwo_left():
    src = """
    declare X Y I in
    thread {WaitTwo X Y I} end
    X = go
    {Wait I} {Browse I}
    """
    out = run(src)
    assert out.browse == ["1"]


def test_waittwo_right():
    src = """
    declare X Y I in
    thread {WaitTwo X Y I} end
    Y = go
    {Wait I} {Browse I}
    """
    out = run(src)
    assert out.browse == ["2"]


def test_waittwo_both_gives_one_answer():
    src = """
    declare X Y I in
    thread {WaitTwo X Y I} end
    X = go
    Y = go
    {Wait I} {Browse I}
    """
    out = run(src)
    assert out.browse in (["1"], ["2"])


# ----------------------------------------------------------------------
# names, identity, determination


def test_newname_distinct_and_equal_to_itself():
    src = """
    local N M A B in
       {NewName N} {NewName M}
       {Equal N N A} {Browse A}
       {Equal N M B} {Browse B}
    end
    """
    assert browse(src) == ["true", "false"]


def test_isdet():
    src = """
    local X A B in
       {IsDet X A} {Browse A}
       X = 5
       {IsDet X B} {Browse B}
    end
    """
    assert browse(src) == ["false", "true"]


# ----------------------------------------------------------------------
# rendering


@pytest.mark.parametrize("expr,shown", [
    ("42", "42"),
    ("~7", "~7"),
    ("hello", "hello"),
    ("[1 2 3]", "[1 2 3]"),
    ("1|2|nil", "[1 2]"),
    ("a#b#c", "a#b#c"),
    ("f(x:1 y:2)", "f(x:1 y:2)"),
    ("g(10 20)", "g(10 20)"),
    ("nil", "nil"),
    ("unit", "unit"),
])
def test_render_ground_terms(expr, shown):
    assert browse(f"{{Browse {expr}}}") == [shown]


def test_render_partial_list():
    assert browse("local X T in X = 1|T {Browse X} end") == ["1|_"]


def test_render_cycle():
    src = """
    local X in
       X = f(1 X)
       {Browse X}
    end
    """
    assert browse(src) == ["f(1 @1)"]


def test_render_closure_arity():
    src = """
    declare P in
    proc {P A B} skip end
    {Browse P}
    """
    got = browse(src)
    assert len(got) == 1 and got[0].startswith("<P/2")
