# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled episode kernel.

A line-for-line mirror of macsim.episode, including the order of every
RNG draw and the exact float arithmetic, so both lanes produce
bit-identical episodes from the same random.Random instance. Compiled
with -ffp-contract=off to keep double rounding identical to CPython.
"""

from .types import AgentKind, EpisodeResult, Mode, TrafficMode


cdef inline int _pick(dict table, long long key, int n, double dflt,
                      double epsilon, object rnd_random,
                      object rnd_randrange) except? -1:
    """Epsilon-greedy index, uniform tie-break; draw discipline matches
    macsim.learner.egreedy_index."""
    cdef object row
    cdef list lrow
    cdef double x, best, v
    cdef int i, nt
    cdef int ties[3]
    if epsilon > 0.0:
        x = <double>rnd_random()
        if x < epsilon:
            return <int>rnd_randrange(n)
    row = table.get(key)
    if row is None:
        # All entries equal the default: uniform over the alphabet.
        return <int>rnd_randrange(n)
    lrow = <list>row
    best = <double>lrow[0]
    for i in range(1, n):
        v = <double>lrow[i]
        if v > best:
            best = v
    nt = 0
    for i in range(n):
        v = <double>lrow[i]
        if v == best:
            ties[nt] = i
            nt += 1
    if nt == 1:
        return ties[0]
    return ties[<int>rnd_randrange(nt)]


cdef inline double _max_row(dict table, long long key, int n, double dflt):
    cdef object row = table.get(key)
    cdef list lrow
    cdef double best, v
    cdef int i
    if row is None:
        return dflt
    lrow = <list>row
    best = <double>lrow[0]
    for i in range(1, n):
        v = <double>lrow[i]
        if v > best:
            best = v
    return best


def run_episode(object env_cfg, object qtables, double epsilon, object mode,
                object agent, object rng, double alpha=0.3, double gamma=1.0,
                bint record_trace=False):
    """Compiled equivalent of macsim.episode.run_episode."""
    cdef bint train = mode is Mode.TRAIN
    if not train:
        epsilon = 0.0

    cdef int agent_code
    if agent is AgentKind.LEARNER:
        agent_code = 0
    elif agent is AgentKind.EXPERT:
        agent_code = 1
    elif agent is AgentKind.FIRE_FORGET:
        agent_code = 2
    elif agent is AgentKind.ACK_WAIT:
        agent_code = 3
    else:
        raise ValueError(f"unknown agent kind: {agent!r}")
    cdef bint learner = agent_code == 0

    cdef int num_ues = env_cfg.num_ues
    cdef int sdus = env_cfg.sdus_per_ue
    cdef int t_max = env_cfg.t_max
    cdef double bler = env_cfg.bler
    cdef double arrival = env_cfg.arrival_prob
    cdef bint empty_start = env_cfg.traffic_mode is TrafficMode.EMPTY_BUFFER_START
    if num_ues > 64 or sdus > 63:
        raise ValueError("compiled kernel supports at most 64 UEs and 63 SDUs")

    cdef object rnd_random = rng.random
    cdef object rnd_randrange = rng.randrange

    # Environment state: buffers are index ranges [head, tail); arrivals
    # append consecutively so generated_count == tail.
    cdef int head[64]
    cdef int tail[64]
    cdef unsigned long long delivered[64]
    cdef int delivered_count[64]
    cdef int obs[64]
    cdef int obs_next[64]
    cdef int acts[64]
    cdef int ups[64]
    cdef int dl[64]
    cdef int cand[64]
    cdef long long mems[64]
    cdef long long keys[64]
    cdef long long next_keys[64]
    cdef int last_dl[64]
    cdef int last_action[64]

    cdef int initial = sdus if not empty_start else 0
    cdef int u
    for u in range(num_ues):
        head[u] = 0
        tail[u] = initial
        delivered[u] = 0
        delivered_count[u] = 0
        obs[u] = initial
        last_dl[u] = 0
        last_action[u] = 0
        mems[u] = 0

    cdef dict qp = None
    cdef dict qs = None
    cdef double default = 0.0
    cdef int memory_len = 0
    cdef int shift = 0
    cdef long long mask = 0
    if learner:
        qp = qtables.q_p
        qs = qtables.q_s
        default = qtables.default_value
        memory_len = qtables.memory_len
        if not 1 <= memory_len <= 5:
            raise ValueError(f"memory_len must be in [1, 5], got {memory_len}")
        shift = 11 * memory_len
        mask = ((<long long>1) << shift) - 1
        for u in range(num_ues):
            keys[u] = (<long long>obs[u]) << shift

    cdef int granted_prev = -1
    cdef list trace = [] if record_trace else None
    cdef double total = 0.0
    cdef double reward = -1.0
    cdef bint done = False

    cdef int t = 0
    cdef int t_slot, o, a, n, ntrans, trans_u, sdu, bs_obs, acked, ncand, i
    cdef double x, boot_p, boot_s, old
    cdef long long packed, key
    cdef object row
    cdef list lrow

    while not done:
        t_slot = t

        # 1. per-UE action and uplink-message selection
        for u in range(num_ues):
            if learner:
                key = keys[u]
                acts[u] = _pick(qp, key, 3, default, epsilon,
                                rnd_random, rnd_randrange)
                ups[u] = _pick(qs, key, 2, default, epsilon,
                               rnd_random, rnd_randrange)
            elif agent_code == 1:
                o = obs[u]
                if last_dl[u] == 1 and o > 0 and last_action[u] != 1:
                    acts[u] = 1
                elif last_dl[u] == 2 and o > 0:
                    acts[u] = 2
                else:
                    acts[u] = 0
                if o > 0 and (last_dl[u] == 0 or (o > 1 and last_dl[u] == 2)):
                    ups[u] = 1
                else:
                    ups[u] = 0
            elif agent_code == 2:
                if obs[u] > 0:
                    acts[u] = 2 if last_action[u] == 1 else 1
                else:
                    acts[u] = 0
                ups[u] = 0
            else:
                if obs[u] == 0:
                    acts[u] = 0
                    ups[u] = 0
                else:
                    ups[u] = 1
                    if last_dl[u] == 1:
                        acts[u] = 1
                    elif last_dl[u] == 2:
                        acts[u] = 2
                    else:
                        acts[u] = 0

        # 2. environment step
        ntrans = 0
        trans_u = -1
        for u in range(num_ues):
            if acts[u] == 1 and tail[u] > head[u]:
                ntrans += 1
                trans_u = u
        bs_obs = 0
        if ntrans == 1:
            x = <double>rnd_random()
            if not (x < bler):
                bs_obs = trans_u + 1
                sdu = head[trans_u]
                if not (delivered[trans_u] >> sdu) & 1:
                    delivered[trans_u] |= (<unsigned long long>1) << sdu
                    delivered_count[trans_u] += 1
        elif ntrans >= 2:
            bs_obs = num_ues + 1
        for u in range(num_ues):
            if acts[u] == 2 and tail[u] > head[u]:
                head[u] += 1
        if empty_start:
            for u in range(num_ues):
                if tail[u] < sdus:
                    x = <double>rnd_random()
                    if x < arrival:
                        tail[u] += 1
        t += 1
        done = True
        if t < t_max:
            for u in range(num_ues):
                if not (tail[u] == sdus and delivered_count[u] == sdus
                        and head[u] == tail[u]):
                    done = False
                    break
        for u in range(num_ues):
            obs_next[u] = tail[u] - head[u]

        # 3. BS reply (ack only the UE granted in the previous slot)
        acked = -1
        for u in range(num_ues):
            dl[u] = 0
        if 1 <= bs_obs <= num_ues and granted_prev == bs_obs - 1:
            acked = bs_obs - 1
            dl[acked] = 2
        ncand = 0
        for u in range(num_ues):
            if ups[u] == 1 and u != acked:
                cand[ncand] = u
                ncand += 1
        granted_prev = -1
        if ncand == 1:
            granted_prev = cand[0]
            dl[granted_prev] = 1
        elif ncand > 1:
            granted_prev = cand[<int>rnd_randrange(ncand)]
            dl[granted_prev] = 1

        # 4. memory push / expert state update; 5. table backups
        if learner:
            for u in range(num_ues):
                packed = (dl[u] << 9) | (acts[u] << 7) | (ups[u] << 6) | obs[u]
                mems[u] = ((mems[u] << 11) | packed) & mask
                next_keys[u] = ((<long long>obs_next[u]) << shift) | mems[u]
            if train:
                for u in range(num_ues):
                    if done:
                        boot_p = 0.0
                        boot_s = 0.0
                    else:
                        boot_p = _max_row(qp, next_keys[u], 3, default)
                        boot_s = _max_row(qs, next_keys[u], 2, default)
                    key = keys[u]
                    row = qp.get(key)
                    if row is None:
                        row = [default, default, default]
                        qp[key] = row
                    lrow = <list>row
                    a = acts[u]
                    old = <double>lrow[a]
                    lrow[a] = old + alpha * (reward + gamma * boot_p - old)
                    row = qs.get(key)
                    if row is None:
                        row = [default, default]
                        qs[key] = row
                    lrow = <list>row
                    n = ups[u]
                    old = <double>lrow[n]
                    lrow[n] = old + alpha * (reward + gamma * boot_s - old)
            for u in range(num_ues):
                keys[u] = next_keys[u]
        else:
            for u in range(num_ues):
                last_action[u] = acts[u]
                last_dl[u] = dl[u]

        if record_trace:
            trace.append((t_slot,
                          tuple([obs[i] for i in range(num_ues)]),
                          tuple([acts[i] for i in range(num_ues)]),
                          tuple([ups[i] for i in range(num_ues)]),
                          tuple([dl[i] for i in range(num_ues)]),
                          bs_obs, reward))
        total += reward
        for u in range(num_ues):
            obs[u] = obs_next[u]

    return EpisodeResult(total, t, trace)
