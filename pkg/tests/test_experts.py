"""Hand-coded UE policies: decision tables and whole-episode behavior."""

import random

import macsim
from macsim.experts import (
    AckWaitUe,
    ExpertUe,
    FireForgetUe,
    expert_channel_access,
    expert_signaling,
)
from macsim.learner import QTables
from macsim.types import (
    AgentKind,
    ChannelAction,
    DownlinkMessage,
    EnvConfig,
    Mode,
    UplinkMessage,
)

SG = DownlinkMessage.SCHEDULING_GRANT
ACK = DownlinkMessage.ACK
DL0 = DownlinkMessage.NULL
TX = ChannelAction.TRANSMIT
DEL = ChannelAction.DELETE
NOP = ChannelAction.NOTHING
SR = UplinkMessage.SCHEDULING_REQUEST
UL0 = UplinkMessage.NULL


def test_channel_access_decision_table():
    assert expert_channel_access(1, SG, NOP) == TX
    assert expert_channel_access(1, ACK, TX) == DEL
    assert expert_channel_access(0, SG, NOP) == NOP       # empty buffer guard
    assert expert_channel_access(1, SG, TX) == NOP        # no back-to-back transmit
    assert expert_channel_access(1, DL0, NOP) == NOP
    assert expert_channel_access(0, ACK, TX) == NOP


def test_signaling_decision_table():
    assert expert_signaling(2, ACK) == SR   # more data behind the acked SDU
    assert expert_signaling(1, ACK) == UL0  # last SDU acked: nothing to ask
    assert expert_signaling(0, DL0) == UL0
    assert expert_signaling(1, DL0) == SR
    assert expert_signaling(1, SG) == UL0   # grant pending: no re-request
    assert expert_signaling(3, DL0) == SR


def test_expert_initial_state():
    ue = ExpertUe()
    assert ue.state.last_dl == DL0
    assert ue.state.last_action == NOP


def test_expert_single_ue_episode_is_three_steps():
    cfg = EnvConfig(num_ues=1, sdus_per_ue=1, bler=0.0, t_max=32)
    res = macsim.run_episode(cfg, QTables(memory_len=1), 0.0, Mode.EVAL,
                             AgentKind.EXPERT, random.Random(3), record_trace=True)
    assert res.episode_return == -3.0
    assert res.steps == 3
    # SR first, granted transmit second, acked delete third
    assert res.trace[0][3] == (1,) and res.trace[0][4] == (1,)
    assert res.trace[1][2] == (1,) and res.trace[1][4] == (2,)
    assert res.trace[2][2] == (2,)


def test_expert_never_acts_without_signal():
    """No transmit without a prior grant, no delete without a prior ack."""
    cfg = EnvConfig(num_ues=2, sdus_per_ue=2, bler=0.4, t_max=32)
    for seed in range(50):
        res = macsim.run_episode(cfg, QTables(memory_len=1), 0.0, Mode.EVAL,
                                 AgentKind.EXPERT, random.Random(seed),
                                 record_trace=True)
        last_dl = [0, 0]
        for step in res.trace:
            _, _, actions, _, dl, _, _ = step
            for u in range(2):
                if actions[u] == TX:
                    assert last_dl[u] == SG
                if actions[u] == DEL:
                    assert last_dl[u] == ACK
            last_dl = list(dl)


def test_two_experts_never_collide():
    cfg = EnvConfig(num_ues=2, sdus_per_ue=2, bler=0.5, t_max=32)
    for seed in range(200):
        res = macsim.run_episode(cfg, QTables(memory_len=1), 0.0, Mode.EVAL,
                                 AgentKind.EXPERT, random.Random(seed),
                                 record_trace=True)
        assert all(step[5] != 3 for step in res.trace)  # 3 = collision marker


def test_fire_forget_alternates():
    ue = FireForgetUe()
    a, n = ue.act(1)
    assert (a, n) == (TX, UL0)
    ue.observe(a, DL0)
    a, n = ue.act(1)
    assert a == DEL
    ue.observe(a, DL0)
    assert ue.act(0)[0] == NOP


def test_fire_forget_episode_return():
    cfg = EnvConfig(num_ues=1, sdus_per_ue=1, bler=0.0, t_max=32)
    res = macsim.run_episode(cfg, QTables(memory_len=1), 0.0, Mode.EVAL,
                             AgentKind.FIRE_FORGET, random.Random(0))
    assert res.episode_return == -2.0


def test_ack_wait_requests_and_follows_grants():
    ue = AckWaitUe()
    a, n = ue.act(1)
    assert (a, n) == (NOP, SR)
    ue.observe(a, SG)
    a, n = ue.act(1)
    assert (a, n) == (TX, SR)   # keeps requesting while transmitting
    ue.observe(a, SG)           # erased attempt: re-granted
    a, n = ue.act(1)
    assert (a, n) == (TX, SR)
    ue.observe(a, ACK)
    a, n = ue.act(1)
    assert (a, n) == (DEL, SR)
    ue.observe(a, DL0)
    assert ue.act(0) == (NOP, UL0)
