"""
A3 handover rule and handover classification.

These scalar functions define the semantics; the simulator evaluates the same
rule vectorised over all UEs.
"""

from typing import Dict, Optional, Sequence, Tuple

from pydantic import BaseModel, Field

from ..models import HANDOVER_KINDS, EventKind, HandoverClass, HandoverParams, SimEvent, UeState


class A3Decision(BaseModel):
    """Result of one A3 evaluation for one UE."""
    target: Optional[int] = None
    a3_timer: Dict[int, int] = Field(default_factory=dict)


def a3_entering(rsrp_serving: float, rsrp_neighbor: float, h_serving: float, cio: float) -> bool:
    """A3 entering condition: rsrp_n + CIO(s, n) > rsrp_s + H(s)."""
    return rsrp_neighbor + cio > rsrp_serving + h_serving


def evaluate_a3(ue: UeState, params: HandoverParams, tick_ms: int) -> A3Decision:
    """
    Advance the A3 timers of ``ue`` by one tick and pick a handover target.

    A candidate fires once its condition has held for at least TTT(serving) ms.
    Timers reset when the condition breaks and never exceed the current TTT.
    Among firing candidates the highest RSRP wins, ties going to the lowest cell id.

    Args:
        ue: UE with a serving cell and a current rsrp_map
        params: Handover parameters in force for this tick
        tick_ms: Tick duration

    Returns:
        A3Decision with the target (or None) and the updated timers

    Raises:
        ValueError: If the UE is in outage.
    """
    serving = ue.serving_cell
    if serving is None:
        raise ValueError(f"UE {ue.ue_id} has no serving cell")

    rsrp_serving = ue.rsrp_map[serving]
    h = params.h_for(serving)
    ttt = params.ttt_for(serving)

    timers: Dict[int, int] = {}
    firing = []
    for cell in sorted(ue.rsrp_map):
        if cell == serving:
            continue
        rsrp = ue.rsrp_map[cell]
        if not a3_entering(rsrp_serving, rsrp, h, params.cio_for(serving, cell)):
            continue
        elapsed = ue.a3_timer.get(cell, 0) + tick_ms
        if elapsed >= ttt:
            firing.append(cell)
        timers[cell] = min(elapsed, ttt)

    target = None
    if firing:
        target = max(firing, key=lambda cell: (ue.rsrp_map[cell], -cell))
    return A3Decision(target=target, a3_timer=timers)


def is_pingpong(
    last_serving: Optional[Tuple[int, int]],
    to_cell: int,
    now_tick: int,
    t_pp_ms: int,
    tick_ms: int,
) -> bool:
    """True when a handover to ``to_cell`` returns to the previous cell inside t_pp."""
    if last_serving is None:
        return False
    cell, handover_tick = last_serving
    return to_cell == cell and (now_tick - handover_tick) * tick_ms < t_pp_ms


def classify_handover(
    history: Sequence[SimEvent],
    handover: SimEvent,
    t_pp_ms: int,
    t_early_ms: int,
    tick_ms: int,
) -> HandoverClass:
    """
    Classify an executed handover against the event history of its UE.

    TooEarly is attributed retroactively: it wins when the history already holds
    an Rlf of the UE within t_early after the handover, before any further handover.
    PingPong means the UE returned to the cell it left on its previous handover
    within t_pp.
    """
    ue_events = [e for e in history if e.ue_id == handover.ue_id and e is not handover]

    for event in sorted((e for e in ue_events if e.tick >= handover.tick), key=lambda e: e.tick):
        if event.kind in HANDOVER_KINDS and event.tick > handover.tick:
            break
        if event.kind == EventKind.RLF and event.from_cell == handover.to_cell:
            if (event.tick - handover.tick) * tick_ms <= t_early_ms:
                return HandoverClass.TOO_EARLY
            break

    previous = [e for e in ue_events if e.kind in HANDOVER_KINDS and e.tick < handover.tick]
    if previous:
        last = max(previous, key=lambda e: e.tick)
        if is_pingpong((last.from_cell, last.tick), handover.to_cell, handover.tick, t_pp_ms, tick_ms):
            return HandoverClass.PING_PONG
    return HandoverClass.NORMAL
