"""Per-class agent: closed-form best response and the bid-raising rule.

Given the VMs ``r`` handed out by the resource manager, a class manager
picks its reciprocal concurrency and slot split in closed form (the same
expressions the centralized solver eliminates with).  A manager that is
still rejecting jobs afterwards raises its bid by a fixed fraction of
its ceiling, starting from the larger of its previous bid and the
current posted price; bids never exceed the ceiling, so a rejected
manager eventually stops escalating and the negotiation settles.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParameterError, ProtocolViolationError
from .model import DerivedClassParams

#: relative slack below rLow treated as floating-point noise, and above
#: psiLow treated as genuine rejection
_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class CmState:
    """One manager's view after responding to an assignment."""

    class_id: str
    r: float
    bid: float
    rho_up: float
    psi: float
    sM: float
    sR: float
    rejecting: bool


def best_response(
    params: DerivedClassParams, r: float
) -> tuple[float, float, float]:
    """Optimal (psi, sM, sR) for an assignment of ``r`` VMs.

    For r in [rLow, rUp) the deadline and slot constraints are active:
    psi = K/r, sM = xiM*r, sR = xiR*r.  At or above rUp every plan at
    maximum concurrency is optimal; the slot counts are frozen at the
    rUp level, the cheapest of them.  Assignments below rLow (beyond
    rounding noise) violate the protocol: the resource manager must
    never hand out less than the guaranteed minimum.
    """
    if r < params.rLow * (1.0 - _EDGE_TOL):
        raise ProtocolViolationError(
            f"assigned r={r} is below the guaranteed minimum {params.rLow}"
        )
    if r >= params.rUp:
        return params.psiLow, params.xiM * params.rUp, params.xiR * params.rUp
    if r <= params.rLow:
        return params.psiUp, params.xiM * r, params.xiR * r
    return params.K / r, params.xiM * r, params.xiR * r


def respond(
    params: DerivedClassParams, class_id: str, r: float, bid: float, rho_up: float
) -> CmState:
    """Best-respond and package the result as a manager state."""
    psi, sM, sR = best_response(params, r)
    return CmState(
        class_id=class_id,
        r=r,
        bid=bid,
        rho_up=rho_up,
        psi=psi,
        sM=sM,
        sR=sR,
        rejecting=psi > params.psiLow * (1.0 + _EDGE_TOL),
    )


def update_bid(state: CmState, rm_price: float, lam: float) -> float:
    """New bid after one negotiation round.

    A manager that is not rejecting keeps its bid.  A rejecting one
    moves to max(previous bid, posted price) plus ``lam`` times its
    ceiling, clamped at the ceiling so the bid interval stays valid.
    """
    if not 0.0 < lam < 1.0:
        raise InvalidParameterError(f"bid increment fraction must be in (0,1), got {lam}")
    if not state.rejecting:
        return state.bid
    return min(state.rho_up, max(state.bid, rm_price) + lam * state.rho_up)


def cm_objective(psi: float, alpha: float, beta: float) -> float:
    """Penalty paid at reciprocal concurrency ``psi``: alpha*psi - beta."""
    return alpha * psi - beta
