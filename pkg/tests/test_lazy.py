"""By-need triggers: installed lazily, fired at most once, only on demand."""

from conftest import browse, run


def counters(out):
    return out.vm.triggers_installed, out.vm.triggers_fired


def test_untouched_trigger_never_fires():
    src = """
    local X in
       {ByNeed proc {$ R} R = 99 end X}
       {Browse ready}
    end
    """
    out = run(src)
    assert out.status == "ok"
    assert out.browse == ["ready"]
    assert counters(out) == (1, 0)


def test_wait_demands():
    src = """
    local X in
       {ByNeed proc {$ R} R = 7 end X}
       {Wait X} {Browse X}
    end
    """
    out = run(src)
    assert out.browse == ["7"]
    assert counters(out) == (1, 1)


def test_arithmetic_demands():
    src = """
    local X Y in
       {ByNeed proc {$ R} R = 20 end X}
       Y = X + 1
       {Browse Y}
    end
    """
    out = run(src)
    assert out.browse == ["21"]
    assert counters(out) == (1, 1)


def test_case_demands():
    src = """
    local X in
       {ByNeed proc {$ R} R = f(inner) end X}
       case X of f(A) then {Browse A} end
    end
    """
    out = run(src)
    assert out.browse == ["inner"]
    assert counters(out) == (1, 1)


def test_unification_with_determined_value_demands():
    src = """
    local X in
       {ByNeed proc {$ R} R = 5 end X}
       X = 5
       {Browse X}
    end
    """
    out = run(src)
    assert out.browse == ["5"]
    assert counters(out) == (1, 1)


def test_var_var_unification_does_not_demand():
    # aliasing two unbound variables is not a demand
    src = """
    local X Y in
       {ByNeed proc {$ R} R = 1 end X}
       Y = X
       {Browse done}
    end
    """
    out = run(src)
    assert out.browse == ["done"]
    assert counters(out) == (1, 0)


def test_single_fire_under_many_demanders():
    n = 8
    waits = "\n".join(f"thread {{Wait X}} D{i} = u end" for i in range(n))
    dvars = " ".join(f"D{i}" for i in range(n))
    sync = " ".join(f"{{Wait D{i}}}" for i in range(n))
    src = f"""
    declare X {dvars} in
    {{ByNeed proc {{$ R}} R = 3 end X}}
    {waits}
    {sync}
    {{Browse X}}
    """
    out = run(src, slice_=2)
    assert out.browse == ["3"]
    assert counters(out) == (1, 1)


def test_lazy_function_chain_counts():
    """n list elements consumed: n+1 triggers exist, n have fired.

    The producer guards every tail with a trigger; consuming k cells
    forces k of them and installs one more for the frontier.
    """
    n = 25
    src = f"""
    declare Gen Take Out in
    fun lazy {{Gen I}}
       I|{{Gen I+1}}
    end
    proc {{Take Xs K Acc Out}}
       if K == 0 then Out = Acc
       else
          case Xs of X|Xr then {{Take Xr K-1 Acc+X Out}} end
       end
    end
    {{Take {{Gen 1}} {n} 0 Out}}
    {{Browse Out}}
    """
    out = run(src)
    # sum 1..n, computed here rather than trusted from the program
    assert out.browse == [str(n * (n + 1) // 2)]
    assert counters(out) == (n + 1, n)


def test_lazy_value_shared_between_consumers():
    src = """
    declare Gen Xs A B in
    fun lazy {Gen I} I|{Gen I+1} end
    Xs = {Gen 10}
    thread case Xs of X|_ then A = X end end
    thread case Xs of X|_ then B = X end end
    {Wait A} {Wait B}
    {Browse A + B}
    """
    out = run(src)
    assert out.browse == ["20"]
    # one cell forced once, its tail trigger installed but unforced
    assert out.vm.triggers_fired == 1


def test_byneed_requires_fresh_variable():
    # a trigger can only guard an unbound variable
    src = """
    local X in
       X = 4
       try {ByNeed proc {$ R} R = 9 end X}
       catch E then {Browse E} end
    end
    """
    out = run(src)
    assert out.browse == ["error(kind:byNeed)"]
    assert counters(out) == (0, 0)


def test_second_trigger_on_same_variable_rejected():
    src = """
    local X in
       {ByNeed proc {$ R} R = 1 end X}
       try {ByNeed proc {$ R} R = 2 end X}
       catch E then {Browse E} end
    end
    """
    out = run(src)
    assert out.browse == ["error(kind:byNeed)"]
    assert counters(out) == (1, 0)
