"""Daily vulnerability rankings and model comparison by sign test.

For every in-window event, both candidate models rank all entities by
intensity at the start of the event's day (history strictly before that
instant). The failing entity's rank is the number of entities placed strictly
above it. Events where either model sits at its own baseline are excluded,
and the remaining per-event rank comparisons feed an exact binomial sign
test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import core
from .errors import InsufficientDataError, InvalidParameterError


def vulnerability_snapshot(corpus, params, day) -> np.ndarray:
    """Per-entity intensity at `day`, in corpus order.

    Events and inspections at or after `day` do not contribute (strict
    comparison inside the intensity evaluation).
    """
    return np.array([core.intensity(float(day), e, params) for e in corpus])


def rank_at_event(snapshot, index) -> int:
    """Number of entities ranked strictly above the one at `index`."""
    snapshot = np.asarray(snapshot)
    if not 0 <= index < snapshot.size:
        raise InvalidParameterError("index outside the snapshot")
    return int(np.sum(snapshot > snapshot[index]))


def binomial_tail(n, wins) -> Fraction:
    """Exact P[X >= wins] for X ~ Binomial(n, 1/2)."""
    if n < 0 or not 0 <= wins <= n:
        raise InvalidParameterError("need 0 <= wins <= n")
    num = sum(math.comb(n, k) for k in range(wins, n + 1))
    return Fraction(num, 2 ** n)


def sign_test(wins_a, wins_b):
    """Exact sign test on win counts, ties already removed.

    Returns (better, p_one_sided, p_two_sided); one-sided in the direction of
    the larger count, two-sided doubled and capped at 1. All None when no
    non-tied comparisons exist.
    """
    n = wins_a + wins_b
    if n == 0:
        return None, None, None
    w = max(wins_a, wins_b)
    p_one = binomial_tail(n, w)
    p_two = min(Fraction(1), 2 * p_one)
    if wins_a == wins_b:
        better = None
    else:
        better = "a" if wins_a > wins_b else "b"
    return better, float(p_one), float(p_two)


@dataclass(frozen=True)
class RankReport:
    """Per-event ranks under both models plus the sign-test outcome.

    rows: (event time, entity id, rank_a, rank_b) for each qualifying event.
    degenerate is True when every comparison tied (no decision possible).
    """

    rows: tuple
    wins_a: int
    wins_b: int
    ties: int
    better: str | None
    p_one_sided: float | None
    p_two_sided: float | None

    @property
    def n_compared(self) -> int:
        return self.wins_a + self.wins_b + self.ties

    @property
    def degenerate(self) -> bool:
        return self.wins_a + self.wins_b == 0


def _baseline_vector(corpus, params, day) -> np.ndarray:
    out = np.empty(len(corpus))
    for j, e in enumerate(corpus):
        had = bool(np.searchsorted(e.events, day, side="left") > 0)
        out[j] = params.base_rate * (1.0 + (params.event_lift if had else 0.0))
    return out


def compare_models(corpus, params_a, params_b, t_start, t_end,
                   baseline_rel_tol=1e-12) -> RankReport:
    """Rank every in-window event under both models and sign-test the ranks.

    Snapshots are taken at the start of each event's day (floor of the event
    time). An event qualifies only when both models assign the failing entity
    an intensity differing from that model's own baseline level by more than
    baseline_rel_tol relative; a model that has nothing to say about an
    entity ranks it arbitrarily among equals, which would only add noise.
    """
    corpus = list(corpus)
    if t_end <= t_start:
        raise InvalidParameterError("empty evaluation window")
    by_day = {}
    for j, e in enumerate(corpus):
        for t in e.events[(e.events >= t_start) & (e.events < t_end)]:
            by_day.setdefault(math.floor(t), []).append((float(t), j))
    rows = []
    wins_a = wins_b = ties = 0
    for day in sorted(by_day):
        snap_a = vulnerability_snapshot(corpus, params_a, day)
        snap_b = vulnerability_snapshot(corpus, params_b, day)
        base_a = _baseline_vector(corpus, params_a, day)
        base_b = _baseline_vector(corpus, params_b, day)
        for t, j in by_day[day]:
            off_a = abs(snap_a[j] - base_a[j]) > baseline_rel_tol * max(base_a[j], 1e-300)
            off_b = abs(snap_b[j] - base_b[j]) > baseline_rel_tol * max(base_b[j], 1e-300)
            if not (off_a and off_b):
                continue
            ra = rank_at_event(snap_a, j)
            rb = rank_at_event(snap_b, j)
            rows.append((t, corpus[j].id, ra, rb))
            if ra < rb:
                wins_a += 1
            elif rb < ra:
                wins_b += 1
            else:
                ties += 1
    if not rows:
        raise InsufficientDataError("no event passes the baseline filter in "
                                    "the evaluation window")
    better, p_one, p_two = sign_test(wins_a, wins_b)
    return RankReport(tuple(rows), wins_a, wins_b, ties, better, p_one, p_two)
