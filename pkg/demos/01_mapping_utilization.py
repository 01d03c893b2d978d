"""How much crossbar area does each mapping leave idle?

Maps three networks onto 128x128 crossbars twice: once with one layer box
per crossbar, once packed. Prints crossbar counts and cell utilization.

    python demos/01_mapping_utilization.py
"""

from xbarmap import HWConfig, compile_network, isaac_map, utilization
from xbarmap.zoo import mobilenetv3_small, resnet18, squeezenet

hw = HWConfig()
print(f"{'network':<18}{'isaac xbars':>12}{'util':>7}{'packed xbars':>14}{'util':>7}{'saved':>8}")
for net in (squeezenet(), mobilenetv3_small(), resnet18()):
    base = isaac_map(net, hw)
    packed = compile_network(net, hw).plan
    saved = 1 - packed.containers_used / base.containers_used
    print(f"{net.name:<18}{base.containers_used:>12}{utilization(base):>7.2f}"
          f"{packed.containers_used:>14}{utilization(packed):>7.2f}{saved:>8.1%}")

# Resnet18's 3x3 convolutions already tile the crossbars almost perfectly,
# so packing has little left to recover there.
