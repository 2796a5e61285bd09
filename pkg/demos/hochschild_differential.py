"""Compare the twisted convolution differential with the Hochschild differential.

An associative algebra A becomes a cobar algebra over the desuspended
associative cooperad. Twisting the convolution algebra Conv(A, A) by the
structure element gives a differential on cochains. After the sign change
(−1)^{n−1} on arity-n cochains it agrees with the Hochschild differential on
every basis cochain. Run with ``python demos/hochschild_differential.py``.
"""

import time

from cobarkit.cooperad import builtin
from cobarkit.hochschild import compare_twisted_differential, dual_numbers, upper_triangular


def main():
    C = builtin("s^-1 coAs", 4)
    for make in (dual_numbers, upper_triangular):
        alg = make()
        start = time.perf_counter()
        report = compare_twisted_differential(alg, C, max_arity=3)
        print(f"{make.__name__:>16}: {report.summary()}  [{time.perf_counter() - start:.1f} s]")


if __name__ == "__main__":
    main()
