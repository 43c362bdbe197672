"""
The cyclic single-resolving-state demonstration.

Three I-states each have one cross link, arranged in a cycle (2→1, 3→2,
1→3), and carry one fresh symbol from every transmitter. A fourth use in the
R-state, which has all three cyclic links, has every transmitter resend the
symbol that caused interference in an I-state. Each receiver already knows
its own transmitter's resent symbol from a clean I-state, so the R-state
hands it a second, independent equation in the interfering symbol, which
frees up its own symbol in the interfered I-state.

That is 9 fresh symbols over 4 channel uses.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from gfp import FieldElement, FieldSpec, Matrix, solve_partial

from .states import DIRECT_LINKS, NUM_USERS, Link

__all__ = ['CYCLIC_LINKS', 'JessReport', 'cyclic_jess_demo']

log = logging.getLogger(__name__)

# The cross link of I-states I1, I2 and I3.
CYCLIC_LINKS: tuple[Link, ...] = (Link(2, 1), Link(3, 2), Link(1, 3))

_NUM_I_STATES = len(CYCLIC_LINKS)

# A symbol is (tx, I-state index): the fresh symbol Tx tx sent in that
# I-state.
_Symbol = tuple[int, int]


def _interfering_state(tx: int) -> int:
    return next(t for t, link in enumerate(CYCLIC_LINKS) if link.tx == tx)


def _symbol_name(sym: _Symbol) -> str:
    return f'x{sym[0]}(I{sym[1] + 1})'


@dataclass(frozen=True)
class JessReport:
    """Outcome of one run. verdict is True iff every symbol a receiver
    recovered, its own or an interferer's, matches what was sent."""
    p: int
    uses: int
    symbols: int
    decoded: int
    unresolved: int
    verdict: bool
    recovered: tuple[dict[str, int], ...]

    @property
    def rate(self) -> Fraction:
        """Correctly decoded symbols per channel use."""
        return Fraction(self.decoded, self.uses) if self.uses else Fraction(0)

    @property
    def complete(self) -> bool:
        return self.unresolved == 0

    @property
    def rate_bits(self) -> float:
        return float(self.rate) * FieldSpec(self.p).rate_unit


def _uses(include_resolving_state: bool) -> list[tuple[frozenset[Link], list[_Symbol]]]:
    """(links present, symbol sent by each Tx) for each channel use."""
    res = [(DIRECT_LINKS | {link}, [(tx, t) for tx in range(1, NUM_USERS + 1)])
           for t, link in enumerate(CYCLIC_LINKS)]

    if include_resolving_state:
        res.append((DIRECT_LINKS | frozenset(CYCLIC_LINKS),
                    [(tx, _interfering_state(tx)) for tx in range(1, NUM_USERS + 1)]))

    return res


def cyclic_jess_demo(p: int,
                     seed: int,
                     include_resolving_state: bool = True,
                     unit_coefficients: bool = False,
                     messages: Optional[dict[_Symbol, int]] = None) -> JessReport:
    """Runs the demonstration once over GF(p) with coefficients and messages
    drawn from seed.

    Coefficients of present links are uniform over the nonzero elements, or
    all 1 with unit_coefficients. messages overrides the drawn message
    symbols.
    """
    spec = FieldSpec.checked(p)
    rng = np.random.default_rng(seed)

    if messages is None:
        drawn = rng.integers(0, p, size=(NUM_USERS, _NUM_I_STATES))
        messages = {(tx, t): int(drawn[tx - 1, t])
                    for tx in range(1, NUM_USERS + 1) for t in range(_NUM_I_STATES)}

    uses = _uses(include_resolving_state)

    decoded = 0
    verdict = True
    recovered: list[dict[str, int]] = []
    for j in range(1, NUM_USERS + 1):
        own: list[_Symbol] = [(j, t) for t in range(_NUM_I_STATES)]
        foreign: list[_Symbol] = []
        rows: list[dict[_Symbol, int]] = []
        y: list[FieldElement] = []

        for links, sent in uses:
            row: dict[_Symbol, int] = {}
            received = spec.zero()
            for link in sorted(links):
                if link.rx != j:
                    continue

                h = 1 if unit_coefficients else int(rng.integers(1, p))
                sym = sent[link.tx - 1]
                row[sym] = row.get(sym, 0) + h
                received = received + h * messages[sym]
                if sym not in own and sym not in foreign:
                    foreign.append(sym)

            rows.append(row)
            y.append(received)

        unknowns = own + foreign
        a = Matrix.from_rows(spec, [[row.get(sym, 0) for sym in unknowns] for row in rows])
        solved = solve_partial(a, y)

        mine: dict[str, int] = {}
        for col, sym in enumerate(own):
            if col not in solved:
                continue

            value = int(solved[col])
            mine[_symbol_name(sym)] = value
            if value == messages[sym]:
                decoded += 1
            else:
                verdict = False

        for col, sym in enumerate(foreign, start=len(own)):
            if col in solved and int(solved[col]) != messages[sym]:
                verdict = False

        log.debug('Rx %d: %d equations, %d unknowns, recovered %s', j, len(rows), len(unknowns),
                  ', '.join(mine) or 'nothing')
        recovered.append(mine)

    symbols = NUM_USERS * _NUM_I_STATES
    return JessReport(p=p,
                      uses=len(uses),
                      symbols=symbols,
                      decoded=decoded,
                      unresolved=symbols - decoded,
                      verdict=verdict,
                      recovered=tuple(recovered))
