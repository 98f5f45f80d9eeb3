# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled slot loop.

Mirrors _kernel_py draw for draw: same stream keys, same SplitMix64-style
uint64 arithmetic, same per-slot order (snapshot stats, sample channels,
select, serve FIFO, admit arrivals), same integer accumulators.  Any change
here must be made in _kernel_py as well; the parity tests compare the two
backends for exact equality.
"""

from libc.stdlib cimport free, malloc, realloc

ctypedef unsigned long long u64


cdef inline u64 _mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(u64 key, long long counter) nogil:
    cdef u64 x = _mix64(key + (<u64>(counter + 1)) * 0x9E3779B97F4A7C15ULL)
    return <double>(x >> 11) * (1.0 / 9007199254740992.0)


cdef inline long long _poisson_inverse(double lam, double pexp, double u) nogil:
    cdef long long k = 0
    cdef double p = pexp
    cdef double f = p
    while u >= f and k < 1000:
        k += 1
        p *= lam / k
        f += p
    return k


cdef struct Ledger:
    # ring buffer of (arrival slot, packet count) pairs, FIFO order
    long long* ts
    long long* cnt
    long long head
    long long size
    long long cap


cdef inline int _ledger_push(Ledger* led, long long ts, long long count) nogil:
    cdef long long new_cap, i, src
    cdef long long* nts
    cdef long long* ncnt
    if led.size == led.cap:
        new_cap = led.cap * 2
        nts = <long long*>malloc(new_cap * sizeof(long long))
        ncnt = <long long*>malloc(new_cap * sizeof(long long))
        if nts == NULL or ncnt == NULL:
            if nts != NULL:
                free(nts)
            if ncnt != NULL:
                free(ncnt)
            return -1
        for i in range(led.size):
            src = (led.head + i) % led.cap
            nts[i] = led.ts[src]
            ncnt[i] = led.cnt[src]
        free(led.ts)
        free(led.cnt)
        led.ts = nts
        led.cnt = ncnt
        led.head = 0
        led.cap = new_cap
    cdef long long tail = (led.head + led.size) % led.cap
    led.ts[tail] = ts
    led.cnt[tail] = count
    led.size += 1
    return 0


cdef inline long long _ledger_pop(Ledger* led, long long want) nogil:
    # removes ``want`` packets FIFO; returns the sum of their arrival slots
    cdef long long ts_sum = 0
    cdef long long take
    while want > 0:
        take = led.cnt[led.head]
        if take > want:
            take = want
        ts_sum += take * led.ts[led.head]
        led.cnt[led.head] -= take
        if led.cnt[led.head] == 0:
            led.head = (led.head + 1) % led.cap
            led.size -= 1
        want -= take
    return ts_sum


def run(
    long long n,
    long long horizon,
    long long warmup,
    int scheduler_code,
    long long z_threshold,
    int collect_z,
    unsigned long long[::1] ch_keys,
    unsigned long long[::1] arr_keys,
    unsigned long long sched_key,
    long long[::1] ch_offsets,
    long long[::1] ch_values,
    double[::1] ch_cdf,
    long long[::1] arr_poisson,
    double[::1] arr_rate,
    double[::1] arr_pexp,
    long long[::1] mu_max,
    long long[::1] q_sum_out,
    long long[::1] z_trace_out,
):
    cdef long long* q = <long long*>malloc(n * sizeof(long long))
    cdef long long* s = <long long*>malloc(n * sizeof(long long))
    cdef Ledger* led = <Ledger*>malloc(n * sizeof(Ledger))
    cdef long long i, t, j, z, qi, w, d, best, count, r, take, ptr, k, a
    cdef long long qtot_sum = 0, z_sum = 0, z_ge = 0
    cdef long long residual_sum = 0, full_sum = 0
    cdef long long delay_sum = 0, departed_measured = 0
    cdef long long arrivals_total = 0, departures_total = 0
    cdef long long final_qtot = 0
    cdef double u
    cdef int failed = 0

    if q == NULL or s == NULL or led == NULL:
        failed = 1
    else:
        for i in range(n):
            led[i].ts = NULL
            led[i].cnt = NULL
        for i in range(n):
            q[i] = 0
            led[i].cap = 8
            led[i].head = 0
            led[i].size = 0
            led[i].ts = <long long*>malloc(8 * sizeof(long long))
            led[i].cnt = <long long*>malloc(8 * sizeof(long long))
            if led[i].ts == NULL or led[i].cnt == NULL:
                failed = 1
                break

    if not failed:
        with nogil:
            ptr = 0
            for t in range(horizon):
                # 1. pre-slot snapshot
                z = 0
                if t >= warmup:
                    for i in range(n):
                        qi = q[i]
                        if qi > 0:
                            z += 1
                            if qi < mu_max[i]:
                                residual_sum += qi
                            else:
                                full_sum += qi
                            qtot_sum += qi
                            q_sum_out[i] += qi
                    z_sum += z
                    if z >= z_threshold:
                        z_ge += 1
                else:
                    for i in range(n):
                        if q[i] > 0:
                            z += 1
                if collect_z:
                    z_trace_out[t] = z

                # 2. channel states
                for i in range(n):
                    u = _uniform(ch_keys[i], t)
                    j = ch_offsets[i]
                    while u >= ch_cdf[j]:
                        j += 1
                    s[i] = ch_values[j]

                # 3. link selection
                j = -1
                if scheduler_code <= 2:
                    best = 0
                    count = 0
                    for i in range(n):
                        if scheduler_code == 2:
                            w = q[i] if q[i] < s[i] else s[i]
                            w *= q[i]
                        else:
                            w = q[i] * s[i]
                        if w > best:
                            best = w
                            count = 1
                            j = i
                        elif count > 0 and w == best:
                            count += 1
                    if count == 0:
                        j = -1
                    elif count > 1:
                        u = _uniform(sched_key, t)
                        r = <long long>(u * count)
                        for i in range(n):
                            if scheduler_code == 2:
                                w = q[i] if q[i] < s[i] else s[i]
                                w *= q[i]
                            else:
                                w = q[i] * s[i]
                            if w == best:
                                if r == 0:
                                    j = i
                                    break
                                r -= 1
                elif scheduler_code == 3:
                    count = 0
                    for i in range(n):
                        if q[i] > 0 and s[i] > 0:
                            count += 1
                            if count == 1:
                                j = i
                    if count == 0:
                        j = -1
                    elif count > 1:
                        u = _uniform(sched_key, t)
                        r = <long long>(u * count)
                        for i in range(n):
                            if q[i] > 0 and s[i] > 0:
                                if r == 0:
                                    j = i
                                    break
                                r -= 1
                else:
                    j = -1
                    for k in range(1, n + 1):
                        i = (ptr + k) % n
                        if q[i] > 0 and s[i] > 0:
                            j = i
                            ptr = i
                            break

                # 4. service
                if j >= 0:
                    d = q[j] if q[j] < s[j] else s[j]
                    if d > 0:
                        take = _ledger_pop(&led[j], d)
                        q[j] -= d
                        departures_total += d
                        if t >= warmup:
                            delay_sum += d * t - take
                            departed_measured += d

                # 5. arrivals
                for i in range(n):
                    u = _uniform(arr_keys[i], t)
                    if arr_poisson[i]:
                        a = _poisson_inverse(arr_rate[i], arr_pexp[i], u)
                    else:
                        a = 1 if u < arr_rate[i] else 0
                    if a > 0:
                        if _ledger_push(&led[i], t, a) != 0:
                            failed = 1
                            break
                        q[i] += a
                        arrivals_total += a
                if failed:
                    break

            if not failed:
                z = 0
                for i in range(n):
                    final_qtot += q[i]
                    if q[i] > 0:
                        z += 1
                if collect_z:
                    z_trace_out[horizon] = z

    if led != NULL:
        for i in range(n):
            if led[i].ts != NULL:
                free(led[i].ts)
            if led[i].cnt != NULL:
                free(led[i].cnt)
        free(led)
    if q != NULL:
        free(q)
    if s != NULL:
        free(s)
    if failed:
        raise MemoryError("slot-loop kernel ran out of memory")

    return {
        "qtot_sum": qtot_sum,
        "z_sum": z_sum,
        "z_ge_count": z_ge,
        "residual_sum": residual_sum,
        "full_sum": full_sum,
        "delay_sum": delay_sum,
        "departed_measured": departed_measured,
        "arrivals_total": arrivals_total,
        "departures_total": departures_total,
        "final_qtot": final_qtot,
    }
