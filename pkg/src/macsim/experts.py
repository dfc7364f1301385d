"""Hand-coded per-UE policies.

``ExpertUe`` is the fully coordinated baseline: it only transmits on the
slot after receiving a grant and only deletes on the slot after an ack.
``FireForgetUe`` ignores all downlink signaling, transmits at the first
opportunity and deletes on the next slot. ``AckWaitUe`` requests on
every slot with pending data, transmits whenever granted and deletes
once acked, so each failed attempt costs one extra slot.

All three read the downlink message issued at the end of the previous
slot; per-UE state is just (last DL message, last own action).
"""

from __future__ import annotations

from dataclasses import dataclass

from .types import AgentKind, ChannelAction, DownlinkMessage, UplinkMessage

_SG = DownlinkMessage.SCHEDULING_GRANT
_ACK = DownlinkMessage.ACK
_SR = UplinkMessage.SCHEDULING_REQUEST


def expert_channel_access(obs: int, dl_prev: int, action_prev: int) -> ChannelAction:
    """Coordinated channel access: transmit on a fresh grant, delete on ack."""
    if dl_prev == _SG and obs > 0 and action_prev != ChannelAction.TRANSMIT:
        return ChannelAction.TRANSMIT
    if dl_prev == _ACK and obs > 0:
        return ChannelAction.DELETE
    return ChannelAction.NOTHING


def expert_signaling(obs: int, dl_prev: int) -> UplinkMessage:
    """Coordinated signaling: request when idle with data, or when an ack
    leaves more data behind."""
    if obs > 0 and (dl_prev == DownlinkMessage.NULL or (obs > 1 and dl_prev == _ACK)):
        return _SR
    return UplinkMessage.NULL


@dataclass
class ExpertUeState:
    """What an expert UE remembers between slots."""

    last_dl: int = DownlinkMessage.NULL
    last_action: int = ChannelAction.NOTHING


class ExpertUe:
    def __init__(self) -> None:
        self.state = ExpertUeState()

    def act(self, obs: int):
        a = expert_channel_access(obs, self.state.last_dl, self.state.last_action)
        n = expert_signaling(obs, self.state.last_dl)
        return a, n

    def observe(self, action: int, dl_message: int) -> None:
        self.state.last_action = action
        self.state.last_dl = dl_message


class FireForgetUe:
    """Transmit at the first opportunity, delete next slot, ignore all DL."""

    def __init__(self) -> None:
        self.last_action = ChannelAction.NOTHING

    def act(self, obs: int):
        if obs > 0:
            a = ChannelAction.DELETE if self.last_action == ChannelAction.TRANSMIT \
                else ChannelAction.TRANSMIT
        else:
            a = ChannelAction.NOTHING
        return a, UplinkMessage.NULL

    def observe(self, action: int, dl_message: int) -> None:
        self.last_action = action


class AckWaitUe:
    """Request every slot with pending data; transmit when granted, delete
    once the transmission is acked."""

    def __init__(self) -> None:
        self.last_dl = DownlinkMessage.NULL

    def act(self, obs: int):
        if obs == 0:
            return ChannelAction.NOTHING, UplinkMessage.NULL
        if self.last_dl == _SG:
            a = ChannelAction.TRANSMIT
        elif self.last_dl == _ACK:
            a = ChannelAction.DELETE
        else:
            a = ChannelAction.NOTHING
        return a, _SR

    def observe(self, action: int, dl_message: int) -> None:
        self.last_dl = dl_message


def make_agent(kind: AgentKind):
    if kind is AgentKind.EXPERT:
        return ExpertUe()
    if kind is AgentKind.FIRE_FORGET:
        return FireForgetUe()
    if kind is AgentKind.ACK_WAIT:
        return AckWaitUe()
    raise ValueError(f"no hand-coded agent for {kind!r}")
