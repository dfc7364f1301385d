"""Expert base-station MAC.

Per slot the BS reacts to the uplink outcome and the received scheduling
requests. A reception is acknowledged only when it comes from the UE
that was granted in the previous slot (grants are valid for exactly one
slot); unscheduled transmissions may deliver data but are never acked.
One requester is granted uniformly at random, excluding the UE that was
just acked, since only one UE can be scheduled per slot.

The function is pure: the single slot of scheduling memory is threaded
through the ``granted_prev`` argument and the returned decision.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .types import DownlinkMessage, UplinkMessage


@dataclass(frozen=True)
class BsDecision:
    """Downlink messages for every UE plus the UE granted this slot."""

    dl_messages: tuple
    granted: Optional[int]


def bs_policy(bs_obs: int,
              ul_messages: Sequence[int],
              granted_prev: Optional[int],
              rng: random.Random) -> BsDecision:
    """One slot of the base-station scheduler.

    bs_obs: 0 idle, 1..U reception from UE (bs_obs - 1), U + 1 collision.
    granted_prev: UE granted in the previous slot, or None.
    """
    num_ues = len(ul_messages)
    dl = [DownlinkMessage.NULL] * num_ues

    acked: Optional[int] = None
    if 1 <= bs_obs <= num_ues and granted_prev == bs_obs - 1:
        acked = bs_obs - 1
        dl[acked] = DownlinkMessage.ACK

    candidates = [u for u in range(num_ues)
                  if ul_messages[u] == UplinkMessage.SCHEDULING_REQUEST and u != acked]
    granted: Optional[int] = None
    if candidates:
        if len(candidates) == 1:
            granted = candidates[0]
        else:
            granted = candidates[rng.randrange(len(candidates))]
        dl[granted] = DownlinkMessage.SCHEDULING_GRANT

    return BsDecision(tuple(dl), granted)
