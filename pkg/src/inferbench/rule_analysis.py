"""How much of a benchmark's rule set a mined rule set entails or contains."""

import logging
import re
from dataclasses import dataclass, field

from ._parallel import map_shared, shared
from .datalog.entailment import entails
from .datalog.syntax import RawAtom, _Resolver, iter_rule_lines, make_rule, parse_rule
from .errors import InferBenchError, UndefinedMetricError

log = logging.getLogger(__name__)

_ARROW_ATOM = re.compile(r"\s*([^\s(),]+)\(([^(),]+),([^(),]+)\)\s*(?:,|$)")
_ARROW_VAR = re.compile(r"^[A-Z][A-Za-z0-9_]*$")


@dataclass
class RuleComparisonReport:
    epsilon_ent: float
    epsilon_cont: float
    entailed: list  # one bool per benchmark rule
    contained: list
    bench: list
    skipped: int = 0
    notes: list = field(default_factory=list)

    def text(self) -> str:
        lines = [f"epsilon_ent={self.epsilon_ent:.1f}", f"epsilon_cont={self.epsilon_cont:.1f}",
                 f"benchmark_rules={len(self.bench)}", f"skipped_system_rules={self.skipped}",
                 "", "entailed\tcontained\trule"]
        for r, e, c in zip(self.bench, self.entailed, self.contained):
            lines.append(f"{'yes' if e else 'no'}\t{'yes' if c else 'no'}\t{r.text()}")
        return "\n".join(lines) + "\n"


def _percent(flags) -> float:
    if not flags:
        raise UndefinedMetricError("benchmark rule set is empty")
    return 100.0 * sum(flags) / len(flags)


def _entails_job(rule):
    return entails(shared(), rule)


def entailed_flags(bench, sys, workers: int = 1) -> list:
    bench, sys = list(bench), list(sys)
    if workers > 1 and len(bench) > 1:
        return map_shared(_entails_job, bench, sys, workers)
    return [entails(sys, r) for r in bench]


def contained_flags(bench, sys) -> list:
    keys = {r.canonical for r in sys}
    return [r.canonical in keys for r in bench]


def epsilon_ent(bench, sys, workers: int = 1) -> float:
    return _percent(entailed_flags(bench, sys, workers))


def epsilon_cont(bench, sys) -> float:
    return _percent(contained_flags(bench, sys))


def compare_rules(bench, sys, workers: int = 1, skipped: int = 0) -> RuleComparisonReport:
    bench = list(bench)
    ent = entailed_flags(bench, sys, workers)
    cont = contained_flags(bench, sys)
    return RuleComparisonReport(_percent(ent), _percent(cont), ent, cont, bench, skipped)


# ---------------------------------------------------------------- loading

def parse_arrow_rule(text: str, symbols):
    """Parse ``head <= body`` rules such as ``r(X,Y) <= s(Y,X), t(X,A)``.

    Arguments starting with an uppercase letter are variables; leading
    tab-separated numbers (confidences, counts) are ignored.
    """
    text = text.split("\t")[-1].strip()
    if "<=" not in text:
        raise ValueError("missing '<='")
    head_s, body_s = (x.strip() for x in text.split("<=", 1))
    head = _arrow_atoms(head_s, symbols.type_marker)
    body = _arrow_atoms(body_s, symbols.type_marker)
    if len(head) != 1 or not body:
        raise ValueError("expected one head atom and a non-empty body")
    res = _Resolver(symbols)
    b = [res.atom(a) for a in body]
    h = res.atom(head[0])
    return make_rule(b, h, symbols, res.var_names)


def _arrow_atoms(text, type_marker):
    out, pos = [], 0
    while pos < len(text):
        m = _ARROW_ATOM.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse atom at {text[pos:]!r}")
        pred, a, b = (x.strip() for x in m.groups())
        s = ("var", a) if _ARROW_VAR.match(a) else ("const", a)
        if pred == type_marker:
            out.append(RawAtom("type", s, pred, ("name", b)))
        else:
            o = ("var", b) if _ARROW_VAR.match(b) else ("const", b)
            out.append(RawAtom("rel", s, pred, o))
        pos = m.end()
    return out


def load_system_rules(path, symbols, fmt: str = "native"):
    """Rules from a mined rule file and the number of lines skipped."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    rules, skipped = [], 0
    if fmt == "native":
        items = iter_rule_lines(text)
        parse = lambda s, n: parse_rule(s, symbols, line=n)  # noqa: E731
    elif fmt == "arrow":
        items = ((n, line) for n, line in enumerate(text.splitlines(), 1)
                 if line.strip() and not line.startswith("#"))
        parse = lambda s, n: parse_arrow_rule(s, symbols)  # noqa: E731
    else:
        raise ValueError(f"unknown rule format {fmt!r}")
    for n, line in items:
        try:
            rules.append(parse(line, n))
        except (InferBenchError, ValueError) as e:
            skipped += 1
            log.debug("skipping line %d: %s", n, e)
    if skipped:
        log.warning("skipped %d unparseable rule(s) in %s", skipped, path)
    return rules, skipped
