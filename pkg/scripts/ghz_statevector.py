#!/usr/bin/env python3
"""Independent oracle for the GHZ outcome tables.

Computes |<abc|GHZ>|^2 for GHZ = (|000> + |111>)/sqrt(2) in the X/Y eigenbases
with numpy, reading outcome "0" as the +1 eigenvector and "1" as -1.  Prints
each context's table and exits non-zero if it differs from the package's.
"""

from __future__ import annotations

import itertools
import sys
from fractions import Fraction

import numpy as np

EIGEN = {
    # (basis, outcome) -> eigenvector
    ("X", "0"): np.array([1, 1]) / np.sqrt(2),
    ("X", "1"): np.array([1, -1]) / np.sqrt(2),
    ("Y", "0"): np.array([1, 1j]) / np.sqrt(2),
    ("Y", "1"): np.array([1, -1j]) / np.sqrt(2),
}
GHZ = np.zeros(8, dtype=complex)
GHZ[0] = GHZ[7] = 1 / np.sqrt(2)


def statevector_table(context) -> dict[tuple[str, ...], Fraction]:
    """Outcome probabilities for measurement ids like ("A0", "B1", "C1")."""
    bases = ["X" if m.endswith("0") else "Y" for m in context]
    table = {}
    for outs in itertools.product("01", repeat=3):
        vec = EIGEN[bases[0], outs[0]]
        for b, o in zip(bases[1:], outs[1:]):
            vec = np.kron(vec, EIGEN[b, o])
        p = abs(np.vdot(vec, GHZ)) ** 2
        table[outs] = Fraction(float(p)).limit_denominator(64)
    return table


def main() -> int:
    from causalctx.encodings import GHZ_EXTRA_CONTEXTS, GHZ_TABLE_CONTEXTS, ghz_table

    bad = 0
    for ctx in GHZ_TABLE_CONTEXTS + GHZ_EXTRA_CONTEXTS:
        want = statevector_table(ctx)
        got = {k: v for k, v in ghz_table(ctx).items() if v}
        want_nz = {k: v for k, v in want.items() if v}
        ok = got == want_nz
        bad += not ok
        row = " ".join(f"{''.join(k)}:{v}" for k, v in sorted(want.items()))
        print(f"{''.join(ctx):8s} {'ok ' if ok else 'BAD'} {row}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
