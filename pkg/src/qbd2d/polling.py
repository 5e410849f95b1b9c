"""Builder for the single-server two-queue limited-service polling model.

The server alternates between the queues: queue 1 receives 1-limited
service (one customer per visit) and queue 2 receives exhaustive-type
K-limited service (a visit serves until either K customers are done or the
queue empties).  Arrivals are Poisson, services exponential.  The
continuous-time chain is turned into a discrete-time 2d-QBD process by
uniformization with the total event rate.

Phase semantics, with ``s0 = K + 1`` phases ``0..K``:

* interior (both queues busy): phase 0 means queue 1 is in service; phase
  ``j in 1..K`` means the server is working through a queue-2 visit and is
  on the customer in position ``K - j + 1`` (phase 1 is the last customer
  of the visit, phase K the first);
* x-axis (queue 2 empty): the server just works queue 1, so the phase is
  informationless and is resampled uniformly over all phases;
* y-axis (queue 1 empty): phases 2..K keep their interior meaning, while
  phases 0 and 1 jointly stand for "serving the final customer of the
  visit" and are resampled uniformly over that pair; when a visit ends
  with queue 1 still empty a fresh visit starts immediately;
* origin: idle server, phase resampled uniformly over all phases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import QbdModel, Region

__all__ = ["LimitedServiceParams", "build_limited_service"]


@dataclass(frozen=True)
class LimitedServiceParams:
    """Arrival/service rates and the queue-2 visit limit."""

    lambda1: float
    lambda2: float
    mu1: float
    mu2: float
    K: int

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "mu1", "mu2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.K < 1:
            raise ValueError("K must be at least 1")


def build_limited_service(params, uniformization_rate=None):
    """Discrete-time 2d-QBD model of the (1, K)-limited service system.

    ``uniformization_rate`` may be set above the default total event rate
    ``lambda1 + lambda2 + mu1 + mu2``; that only thickens the self-loops
    and leaves the stationary distribution (hence every decay rate)
    unchanged.
    """
    if isinstance(params, tuple):
        params = LimitedServiceParams(*params)
    lam1, lam2, mu1, mu2, big_k = (
        params.lambda1,
        params.lambda2,
        params.mu1,
        params.mu2,
        params.K,
    )
    total = lam1 + lam2 + mu1 + mu2
    nu = total if uniformization_rate is None else float(uniformization_rate)
    if nu < total - 1e-12:
        raise ValueError("uniformization rate must dominate the total event rate")

    s0 = big_k + 1
    uniform_all = np.full(s0, 1.0 / s0)
    final_pair = np.zeros(s0)
    final_pair[0] = final_pair[1] = 0.5

    def delta(j):
        row = np.zeros(s0)
        row[j] = 1.0
        return row

    # Phase reached when a fresh queue-2 visit starts, by destination kind.
    visit_start_interior = delta(big_k)
    visit_start_yaxis = delta(big_k) if big_k >= 2 else final_pair

    blocks = {}

    def add(region, step, j, rate, phase_row):
        if rate <= 0.0:
            return
        key = (region, step)
        mat = blocks.setdefault(key, np.zeros((s0, s0)))
        mat[j] += (rate / nu) * phase_row

    for j in range(s0):
        # Interior: both queues busy.
        if j == 0:
            add(Region.INTERIOR, (1, 0), j, lam1, delta(0))
            add(Region.INTERIOR, (0, 1), j, lam2, delta(0))
            add(Region.INTERIOR, (-1, 0), j, mu1, visit_start_interior)
            add(Region.INTERIOR, (0, 0), j, nu - lam1 - lam2 - mu1, delta(0))
        else:
            after_service = delta(0) if j == 1 else delta(j - 1)
            add(Region.INTERIOR, (1, 0), j, lam1, delta(j))
            add(Region.INTERIOR, (0, 1), j, lam2, delta(j))
            add(Region.INTERIOR, (0, -1), j, mu2, after_service)
            add(Region.INTERIOR, (0, 0), j, nu - lam1 - lam2 - mu2, delta(j))

        # x-axis: queue 2 empty, queue 1 in service whatever the phase says.
        add(Region.X_BOUNDARY, (1, 0), j, lam1, uniform_all)
        add(Region.X_BOUNDARY, (0, 1), j, lam2, delta(0))
        add(Region.X_BOUNDARY, (-1, 0), j, mu1, uniform_all)
        add(Region.X_BOUNDARY, (0, 0), j, nu - lam1 - lam2 - mu1, uniform_all)

        # y-axis: queue 1 empty, queue 2 in service.
        if j <= 1:
            add(Region.Y_BOUNDARY, (1, 0), j, lam1, delta(1))
            add(Region.Y_BOUNDARY, (0, 1), j, lam2, final_pair)
            add(Region.Y_BOUNDARY, (0, -1), j, mu2, visit_start_yaxis)
            add(Region.Y_BOUNDARY, (0, 0), j, nu - lam1 - lam2 - mu2, final_pair)
        else:
            next_phase = final_pair if j == 2 else delta(j - 1)
            add(Region.Y_BOUNDARY, (1, 0), j, lam1, delta(j))
            add(Region.Y_BOUNDARY, (0, 1), j, lam2, delta(j))
            add(Region.Y_BOUNDARY, (0, -1), j, mu2, next_phase)
            add(Region.Y_BOUNDARY, (0, 0), j, nu - lam1 - lam2 - mu2, delta(j))

        # Origin: empty system.
        add(Region.ORIGIN, (1, 0), j, lam1, uniform_all)
        add(Region.ORIGIN, (0, 1), j, lam2, visit_start_yaxis)
        add(Region.ORIGIN, (0, 0), j, nu - lam1 - lam2, uniform_all)

    return QbdModel(s0=s0, blocks=blocks)
