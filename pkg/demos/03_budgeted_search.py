"""Searching for an architecture that suits a crossbar budget.

Squeezes the budget to 80% of what the one-box-per-crossbar mapping of
MobilenetV3-small needs. That mapping no longer fits, while a short NSGA-II
run still finds architectures that do, several of them faster than the
hand-designed network compiled into the same budget.

The accuracy column is a parameter-count surrogate, not a measurement.

    python demos/03_budgeted_search.py [generations]
"""

import sys

from xbarmap import HWConfig, PackingInfeasible, compile_network, isaac_map, simulate
from xbarmap.nas import SearchSpace, search
from xbarmap.zoo import mobilenetv3_small

generations = int(sys.argv[1]) if len(sys.argv) > 1 else 10
net = mobilenetv3_small()
hw = HWConfig(num_xbars=round(0.8 * isaac_map(net, HWConfig()).containers_used))

try:
    isaac_map(net, hw)
except PackingInfeasible as exc:
    print(f"one box per crossbar: {exc}")

base = simulate(compile_network(net, hw, duplicate=True).plan, net).total_cycles
print(f"hand-designed network, packed and duplicated into {hw.num_xbars} crossbars: {base} cycles\n")

result = search(SearchSpace(), hw, preference="speed", seed=0, pop_size=50, generations=generations,
                callback=lambda gen, pop: print(f"  generation {gen}", end="\r"))
print(f"{'accuracy':>9}{'cycles':>8}{'xbars':>7}  depths")
for c in result.front:
    print(f"{c.accuracy:>9.3f}{c.total_cycles:>8}{c.containers_used:>7}  {c.genome.depths}")
print(f"\nfastest: {result.chosen.total_cycles} cycles ({base / result.chosen.total_cycles:.1f}x the base network)")
