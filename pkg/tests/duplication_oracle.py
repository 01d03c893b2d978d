"""Brute-force reference for the duplication solver."""

import numpy as np


def brute_force(cycles, areas, capacity):
    """Best x_t by scanning every x_t and, per layer, the smallest admissible copy count.

    Each layer is scanned upward from 1 rather than using the closed-form
    ceiling, so this shares no arithmetic with the solver.
    """
    t = int(np.argmax(cycles))  # first maximum
    best = None
    for x_t in range(1, capacity // areas[t] + 1):
        copies = []
        for c, a in zip(cycles, areas):
            x = 1
            while x * cycles[t] < x_t * c:
                x += 1
            copies.append(x)
        if sum(x * a for x, a in zip(copies, areas)) <= capacity:
            best = (x_t, tuple(copies))
    return best
