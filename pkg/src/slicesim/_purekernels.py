"""Pure-Python/numpy fallback for the compiled hot kernels.

Semantics must match ``_speedups`` exactly, including float expression order
and first-wins tie-breaking, so that runs are identical under either backend.
"""

import numpy as np

# Below this candidate count a plain loop beats numpy's call overhead.
_SMALL = 24


def best_fit_pick(load, min_d, slots, n, lam, budget, theta, mu_bar):
    """Fullest viable VM among ``slots[:n]``; -1 if none.

    A VM is viable when, expanded to carry the extra load, its delay at full
    speed still meets both the new budget and every resident budget (the
    latter summarized by the VM's minimum).  Ties go to the earliest slot in
    the list, which assign order keeps sorted by VM id.
    """
    if n <= _SMALL:
        best = -1
        best_load = -1.0
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
        return int(best)
    idx = slots[:n]
    l = load[idx]
    denom = mu_bar - theta * (l + lam)
    d_eff = np.minimum(min_d[idx], budget)
    ok = denom > 0.0
    nz = np.nonzero(ok)[0]
    ok[nz] = (1.0 / denom[nz]) <= d_eff[nz]
    if not ok.any():
        return -1
    return int(idx[int(np.argmax(np.where(ok, l, -np.inf)))])


def add_and_check(req_sum, limit, reqs, n, delta, rtol):
    """req_sum[reqs[:n]] += delta; first index over its limit*(1+rtol), else -1."""
    if n == 0:
        return -1
    if n <= _SMALL:
        bad = -1
        for k in range(n):
            r = reqs[k]
            req_sum[r] += delta
            if bad < 0 and req_sum[r] > limit[r] * (1.0 + rtol):
                bad = r
        return int(bad)
    idx = reqs[:n]
    req_sum[idx] += delta
    over = np.nonzero(req_sum[idx] > limit[idx] * (1.0 + rtol))[0]
    return int(idx[over[0]]) if over.size else -1


def greedy_pick(load, min_d, mu, slots, n, lam, budget, theta, mu_bar, kp):
    """Cheapest-expansion VM among ``slots[:n]``: (slot, marginal) or (-1, inf).

    Marginal cost is the proportional-rate increase of growing the VM to
    absorb the job at the exact speed; ties keep the earliest slot (lowest
    VM id, since slot lists are kept in creation order).
    """
    best = -1
    best_cost = float("inf")
    if n <= _SMALL:
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
        return int(best), best_cost
    idx = slots[:n]
    l = load[idx]
    denom = mu_bar - theta * (l + lam)
    d_eff = np.minimum(min_d[idx], budget)
    ok = denom > 0.0
    nz = np.nonzero(ok)[0]
    ok[nz] = (1.0 / denom[nz]) <= d_eff[nz]
    if not ok.any():
        return -1, float("inf")
    cost = kp * (theta * (l + lam) + 1.0 / d_eff - mu[idx])
    cost = np.where(ok, cost, np.inf)
    k = int(np.argmin(cost))
    return int(idx[k]), float(cost[k])


def check_subset(req_sum, limit, reqs, n, rtol):
    """First index in reqs[:n] whose sum exceeds its limit*(1+rtol), else -1."""
    if n == 0:
        return -1
    if n <= _SMALL:
        for k in range(n):
            r = reqs[k]
            if req_sum[r] > limit[r] * (1.0 + rtol):
                return int(r)
        return -1
    idx = reqs[:n]
    over = np.nonzero(req_sum[idx] > limit[idx] * (1.0 + rtol))[0]
    return int(idx[over[0]]) if over.size else -1


def add_job_fast(vm_load, vm_min_d, vm_max_d, vm_mu, vm_delay, vm_phi, vm_pod,
                 req_sum, req_limit, reqs, slot, ridx, n, lam, budget, theta,
                 kf, kp, mu_bar, rtol, verify, new_vm):
    """Array half of placing one job; see the compiled twin for semantics."""
    min_d = vm_min_d[slot]
    max_d = vm_max_d[slot]
    bad = -1
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
    return float(phi_delta), float(mu_delta), float(pod_delta), int(bad)


def remove_job_fast(vm_load, vm_min_d, vm_max_d, vm_mu, vm_delay, vm_phi, vm_pod,
                    req_sum, req_limit, reqs, slot, ridx, pos, n_after, lam,
                    new_min_d, new_max_d, theta, kf, kp, mu_bar, rtol,
                    verify, alive_after):
    """Array half of removing one job; see the compiled twin for semantics."""
    d_old = vm_delay[slot]
    bad = -1
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
    return float(phi_delta), float(mu_delta), float(pod_delta), int(bad)
