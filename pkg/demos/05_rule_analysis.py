"""How much of a benchmark's rule set does a 'mined' rule set recover?"""
from inferbench.datalog import entails, parse_rule
from inferbench.kg import SymbolTable
from inferbench.negatives import derive_subrules
from inferbench.rule_analysis import compare_rules

st = SymbolTable()
intended = parse_rule("(x, IsParent, y), (x, GivesBirth, y) -> (x, IsMother, y)", st)
learned = parse_rule("(x, IsParent, y) -> (x, IsMother, y)", st)
print("learned entails intended:", entails([learned], intended))
print("intended entails learned:", entails([intended], learned))

bench = [intended,
         parse_rule("(x, R, y), (y, S, z), (x, T, z), x != z -> (z, U, x)", st),
         parse_rule("(x, R, y) -> (y, R, x)", st)]

# a miner that only finds sub-rules gets entailment credit but no containment
subs, _ = derive_subrules(bench)
print(compare_rules(bench, subs).text())

# renamed, reordered copies count as contained
copies = [parse_rule("(b, GivesBirth, c), (b, IsParent, c) -> (b, IsMother, c)", st),
          parse_rule("(p, R, q) -> (q, R, p)", st)]
print(compare_rules(bench, copies).text())
