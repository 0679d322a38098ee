"""Running programs: configuration, outcome classification, sessions.

Exit code meanings, in precedence order when several conditions hold:

  2  the input did not parse (or the configuration is unusable)
  1  a toplevel thread died with an uncaught exception
  3  the reduction budget ran out before quiescence
  4  quiescent, but some toplevel thread is still suspended (deadlock)
  0  ran to quiescence with nothing left over
"""

from dataclasses import dataclass, field

from . import kernel, stdlib, syntax
from .errors import ParseError
from .vm import VM, render


@dataclass
class RunConfig:
    slice_: int = 1000
    max_reductions: int = 200_000_000
    trace: bool = False
    reverse_queue: bool = False

    def validate(self):
        if self.slice_ < 1:
            raise ValueError("slice budget must be at least 1")
        if self.max_reductions < self.slice_:
            raise ValueError("max reductions must be at least the slice budget")


@dataclass
class Outcome:
    status: str                 # ok | parse-error | uncaught | budget | deadlock
    exit_code: int
    browse: list = field(default_factory=list)
    error: str = None
    vm: object = None


def _new_vm(config, on_browse=None):
    config.validate()
    return VM(slice_=config.slice_, max_reductions=config.max_reductions,
              reverse_queue=config.reverse_queue, trace=config.trace,
              on_browse=on_browse)


def _classify(vm, status):
    if vm.uncaught is not None:
        msg = "uncaught exception: " + render(vm, vm.uncaught, vm.top)
        return Outcome("uncaught", 1, vm.browse, msg, vm)
    if status == "budget":
        return Outcome("budget", 3, vm.browse, "reduction budget exhausted", vm)
    if vm.top_deadlocked():
        return Outcome("deadlock", 4, vm.browse, _deadlock_report(vm), vm)
    return Outcome("ok", 0, vm.browse, None, vm)


def _deadlock_report(vm):
    lines = ["quiescent with suspended threads:"]
    for t in vm.top.threads:
        if t.state == "suspended":
            lines.append(f"  thread T{t.tid} waits on variable v{t.wait_vid}")
    return "\n".join(lines)


def run_text(src, config=None, on_browse=None):
    """Parse and run one program text under a fresh vm."""
    config = config if config is not None else RunConfig()
    vm = _new_vm(config, on_browse)
    try:
        env = stdlib.base_env(vm)
        phrase = syntax.parse(src)
        k = kernel.desugar(phrase, set(env))
    except ParseError as e:
        return Outcome("parse-error", 2, list(vm.browse), str(e), None)
    vm.spawn(k, env, vm.top)
    status = vm.run()
    return _classify(vm, status)


def run_file(path, config=None, on_browse=None):
    with open(path) as f:
        return run_text(f.read(), config, on_browse)


@dataclass
class FeedResult:
    status: str                 # ok | parse-error | uncaught | budget
    browse: list
    error: str = None
    blocked: int = 0            # suspended toplevel threads after this input


class Session:
    """An interactive session: declare persists, errors do not end it."""

    def __init__(self, config=None, on_browse=None):
        config = config if config is not None else RunConfig()
        self.vm = _new_vm(config, on_browse)
        self.env = stdlib.base_env(self.vm)

    def feed(self, src):
        vm = self.vm
        seen = len(vm.browse)
        try:
            phrase = syntax.parse(src)
            if isinstance(phrase, syntax.SDeclare):
                names, body = phrase.names, phrase.body
            else:
                names, body = (), phrase
            # redeclaring an identifier rebinds it to a fresh variable
            new_vars = {n: vm.store.new_var(vm.top) for n in names}
            k = kernel.desugar(body, set(self.env) | set(new_vars))
        except ParseError as e:
            return FeedResult("parse-error", [], str(e), self._blocked())
        self.env.update(new_vars)
        vm.spawn(k, self.env, vm.top)
        status = vm.run()
        out = vm.browse[seen:]
        if vm.uncaught is not None:
            msg = "uncaught exception: " + render(vm, vm.uncaught, vm.top)
            vm.uncaught = None
            return FeedResult("uncaught", out, msg, self._blocked())
        if status == "budget":
            return FeedResult("budget", out, "reduction budget exhausted",
                              self._blocked())
        return FeedResult("ok", out, None, self._blocked())

    def _blocked(self):
        return sum(1 for t in self.vm.top.threads if t.state == "suspended")
