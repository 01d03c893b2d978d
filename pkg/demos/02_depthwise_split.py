"""Trading crossbars for cycles by splitting depthwise layers.

A depthwise layer's matrix is tall and narrow, and its cycle count grows
with the channel count. Splitting it into s_dw slices runs them side by
side. This script sweeps s_dw on MobilenetV3-small and reports the speedup
at a few batch sizes; the gain shrinks as pipelining across samples hides
per-layer latency.

    python demos/02_depthwise_split.py
"""

from xbarmap import HWConfig, compile_network, simulate
from xbarmap.zoo import mobilenetv3_small

net = mobilenetv3_small()
samples = (1, 4, 16, 64, 256)
reference = compile_network(net, HWConfig(s_dw=1)).plan
ref_cycles = {n: simulate(reference, net, n).total_cycles for n in samples}

print("s_dw  xbars  " + "  ".join(f"n={n:<5}" for n in samples))
for s_dw in (1, 2, 4, 8, 16, 20):
    plan = compile_network(net, HWConfig(s_dw=s_dw)).plan
    row = [ref_cycles[n] / simulate(plan, net, n).total_cycles for n in samples]
    print(f"{s_dw:>4}  {plan.containers_used:>5}  " + "  ".join(f"{v:7.2f}" for v in row))
