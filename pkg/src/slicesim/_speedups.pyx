# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels for the placement engine.

Same contracts as ``_purekernels``; see there for semantics.  Keep the float
expressions in the exact same order so both backends make bitwise-identical
decisions.
"""


def best_fit_pick(double[::1] load, double[::1] min_d, long long[::1] slots,
                  Py_ssize_t n, double lam, double budget, double theta,
                  double mu_bar):
    cdef Py_ssize_t k
    cdef long long s, best = -1
    cdef double best_load = -1.0
    cdef double l, denom, d_eff
    for k in range(n):
        s = slots[k]
        l = load[s]
        denom = mu_bar - theta * (l + lam)
        if denom <= 0.0:
            continue
        d_eff = min_d[s]
        if budget < d_eff:
            d_eff = budget
        if 1.0 / denom <= d_eff and l > best_load:
            best = s
            best_load = l
    return best


def add_and_check(double[::1] req_sum, double[::1] limit, long long[::1] reqs,
                  Py_ssize_t n, double delta, double rtol):
    cdef Py_ssize_t k
    cdef long long r, bad = -1
    for k in range(n):
        r = reqs[k]
        req_sum[r] += delta
        if bad < 0 and req_sum[r] > limit[r] * (1.0 + rtol):
            bad = r
    return bad


def greedy_pick(double[::1] load, double[::1] min_d, double[::1] mu,
                long long[::1] slots, Py_ssize_t n, double lam, double budget,
                double theta, double mu_bar, double kp):
    cdef Py_ssize_t k
    cdef long long s, best = -1
    cdef double best_cost = float("inf")
    cdef double l, denom, d_eff, cost
    for k in range(n):
        s = slots[k]
        l = load[s]
        denom = mu_bar - theta * (l + lam)
        if denom <= 0.0:
            continue
        d_eff = min_d[s]
        if budget < d_eff:
            d_eff = budget
        if 1.0 / denom > d_eff:
            continue
        cost = kp * (theta * (l + lam) + 1.0 / d_eff - mu[s])
        if cost < best_cost:
            best = s
            best_cost = cost
    return best, best_cost


def check_subset(double[::1] req_sum, double[::1] limit, long long[::1] reqs,
                 Py_ssize_t n, double rtol):
    cdef Py_ssize_t k
    cdef long long r
    for k in range(n):
        r = reqs[k]
        if req_sum[r] > limit[r] * (1.0 + rtol):
            return r
    return -1


def add_job_fast(double[::1] vm_load, double[::1] vm_min_d, double[::1] vm_max_d,
                 double[::1] vm_mu, double[::1] vm_delay, double[::1] vm_phi,
                 double[::1] vm_pod, double[::1] req_sum, double[::1] req_limit,
                 long long[::1] reqs, Py_ssize_t slot, long long ridx,
                 Py_ssize_t n, double lam, double budget, double theta,
                 double kf, double kp, double mu_bar, double rtol,
                 bint verify, bint new_vm):
    """Array half of placing one job: load/min/max, exact speed, budget sums.

    Returns (phi_delta, mu_delta, pod_delta, bad) with bad = -1 when all
    checks pass, -2 on a speed-cap breach, or the offending request index.
    """
    cdef double min_d = vm_min_d[slot]
    cdef double max_d = vm_max_d[slot]
    cdef double load, rated, mu, margin, delay, phi, pod, d_old, delta
    cdef double phi_delta, mu_delta, pod_delta
    cdef Py_ssize_t k
    cdef long long r, bad = -1
    if budget < min_d:
        min_d = budget
        vm_min_d[slot] = budget
    if budget > max_d:
        max_d = budget
        vm_max_d[slot] = budget
    load = vm_load[slot] + lam
    vm_load[slot] = load
    reqs[n] = ridx
    rated = theta * load
    mu = rated + 1.0 / min_d
    margin = mu - rated
    delay = 1.0 / margin
    phi = kf + kp * mu
    pod = margin - 1.0 / max_d
    phi_delta = phi - vm_phi[slot]
    mu_delta = mu - vm_mu[slot]
    pod_delta = pod - vm_pod[slot]
    d_old = vm_delay[slot]
    vm_mu[slot] = mu
    vm_delay[slot] = delay
    vm_phi[slot] = phi
    vm_pod[slot] = pod
    if verify:
        if mu > mu_bar * (1.0 + rtol):
            bad = -2
        else:
            if (not new_vm) and n > 0:
                delta = delay - d_old
                for k in range(n):
                    r = reqs[k]
                    req_sum[r] += delta
                    if bad < 0 and req_sum[r] > req_limit[r] * (1.0 + rtol):
                        bad = r
            req_sum[ridx] += delay
            if bad < 0 and req_sum[ridx] > req_limit[ridx] * (1.0 + rtol):
                bad = ridx
    return phi_delta, mu_delta, pod_delta, bad


def remove_job_fast(double[::1] vm_load, double[::1] vm_min_d, double[::1] vm_max_d,
                    double[::1] vm_mu, double[::1] vm_delay, double[::1] vm_phi,
                    double[::1] vm_pod, double[::1] req_sum, double[::1] req_limit,
                    long long[::1] reqs, Py_ssize_t slot, long long ridx,
                    Py_ssize_t pos, Py_ssize_t n_after, double lam,
                    double new_min_d, double new_max_d, double theta,
                    double kf, double kp, double mu_bar, double rtol,
                    bint verify, bint alive_after):
    """Array half of removing one job; mirrors add_job_fast.

    new_min_d/new_max_d of 0.0 mean 'unchanged'; subscriber slot ``pos`` is
    overwritten by the last entry.  Returns (phi_delta, mu_delta, pod_delta,
    bad); deltas are zero when the VM empties (caller destroys it).
    """
    cdef double d_old = vm_delay[slot]
    cdef double min_d, max_d, load, rated, mu, margin, delay, phi, pod, delta
    cdef double phi_delta, mu_delta, pod_delta
    cdef Py_ssize_t k
    cdef long long r, bad = -1
    if verify:
        req_sum[ridx] -= d_old
    vm_load[slot] = vm_load[slot] - lam
    if pos != n_after:
        reqs[pos] = reqs[n_after]
    if not alive_after:
        return 0.0, 0.0, 0.0, -1
    if new_min_d > 0.0:
        vm_min_d[slot] = new_min_d
    if new_max_d > 0.0:
        vm_max_d[slot] = new_max_d
    min_d = vm_min_d[slot]
    max_d = vm_max_d[slot]
    rated = theta * vm_load[slot]
    mu = rated + 1.0 / min_d
    margin = mu - rated
    delay = 1.0 / margin
    phi = kf + kp * mu
    pod = margin - 1.0 / max_d
    phi_delta = phi - vm_phi[slot]
    mu_delta = mu - vm_mu[slot]
    pod_delta = pod - vm_pod[slot]
    vm_mu[slot] = mu
    vm_delay[slot] = delay
    vm_phi[slot] = phi
    vm_pod[slot] = pod
    if verify and n_after > 0:
        delta = delay - d_old
        for k in range(n_after):
            r = reqs[k]
            req_sum[r] += delta
            if bad < 0 and req_sum[r] > req_limit[r] * (1.0 + rtol):
                bad = r
    return phi_delta, mu_delta, pod_delta, bad
