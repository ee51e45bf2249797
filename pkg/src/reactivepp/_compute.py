"""JIT-compiled hot paths: thinning samplers and intensity traces.

The math here mirrors core._intensity_arrays term for term (division by log 2,
strict-before comparisons); tests cross-check the two paths. Randomness is the
same counter stream as _rng: draw i of stream `key` is the SplitMix64 output
function applied to key + (i+1) * GOLDEN.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_LOG2 = np.log(2.0)
_INV53 = 2.0 ** -53

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U1 = np.uint64(1)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


@njit(inline="always")
def _u01(key, ctr):
    # uniform in (0, 1]; safe as a log() argument
    x = key + (np.uint64(ctr) + _U1) * _GOLD
    x = (x ^ (x >> _S30)) * _M1
    x = (x ^ (x >> _S27)) * _M2
    x = x ^ (x >> _S31)
    return np.float64((x >> _S11) + _U1) * _INV53


@njit(inline="always")
def _sat_exc(s, cap, slope):
    return cap * (1.0 - np.log1p(np.exp(-slope * s)) / _LOG2)


@njit(inline="always")
def _sat_reg(s, cap, slope):
    return cap * (1.0 - np.log1p(np.exp(slope * s)) / _LOG2)


@njit(cache=True, nogil=True)
def thin_saturated_batch(keys, betas, t0, t1, base, lift, ecap, eslope,
                         rcap, rslope, ev0_flat, ev0_off,
                         it_flat, iamp_flat, idec_flat, insp_off):
    """Thinning with the global dominating rate base*(1+ecap+lift).

    Per-entity CSR inputs: initial events (all < t0) and regulation marks
    (time, amplitude, decay). Returns accepted events as (flat, offsets).
    """
    n = keys.shape[0]
    out_off = np.zeros(n + 1, np.int64)
    cap_out = 1024
    out = np.empty(cap_out, np.float64)
    total = 0
    lam_max = base * (1.0 + ecap + lift)
    for p in range(n):
        key = keys[p]
        beta = betas[p]
        e0 = ev0_off[p]
        e1 = ev0_off[p + 1]
        i0 = insp_off[p]
        i1 = insp_off[p + 1]
        npre = e1 - e0
        cap_w = npre + 64
        work = np.empty(cap_w, np.float64)
        work[:npre] = ev0_flat[e0:e1]
        nev = npre
        if lam_max > 0.0:
            ctr = 0
            t = t0
            while True:
                u = _u01(key, ctr)
                ctr += 1
                t -= np.log(u) / lam_max
                if t >= t1:
                    break
                se = 0.0
                for k in range(nev):  # all work[:nev] < t by construction
                    se += 1.0 / (1.0 + np.exp(beta * (t - work[k])))
                si = 0.0
                for k in range(i0, i1):
                    dt = t - it_flat[k]
                    if dt > 0.0:
                        si -= iamp_flat[k] / (1.0 + np.exp(idec_flat[k] * dt))
                ind = 1.0 if nev > 0 else 0.0
                br = (1.0 + _sat_exc(se, ecap, eslope)
                      - _sat_reg(si, rcap, rslope) + lift * ind)
                if br < 0.0:
                    br = 0.0
                lam = base * br
                v = _u01(key, ctr)
                ctr += 1
                if v * lam_max <= lam:
                    if nev == cap_w:
                        cap_w *= 2
                        nw = np.empty(cap_w, np.float64)
                        nw[:nev] = work[:nev]
                        work = nw
                    work[nev] = t
                    nev += 1
        nacc = nev - npre
        while total + nacc > cap_out:
            cap_out *= 2
            no = np.empty(cap_out, np.float64)
            no[:total] = out[:total]
            out = no
        out[total:total + nacc] = work[npre:nev]
        total += nacc
        out_off[p + 1] = total
    return out[:total].copy(), out_off


@njit(cache=True, nogil=True)
def thin_unsaturated(key, t0, t1, base, lift, beta,
                     ev0, it, iamp, idec, ceiling):
    """Linear (no-saturation) variant with an adaptive dominating envelope.

    The envelope drops the (nonpositive) regulation terms and freezes the
    excitation sum at the current time, which dominates all later intensities
    until the next accepted event. Returns (accepted events, status, t_stop)
    with status 1 when the evaluated intensity exceeded `ceiling`.
    """
    npre = ev0.shape[0]
    cap_w = npre + 64
    work = np.empty(cap_w, np.float64)
    work[:npre] = ev0
    nev = npre
    status = 0
    t_stop = t1
    if base > 0.0:
        ctr = 0
        t = t0
        while True:
            se_env = 0.0
            for k in range(nev):
                dt = t - work[k]
                if dt < 0.0:
                    dt = 0.0
                se_env += 1.0 / (1.0 + np.exp(beta * dt))
            ind = 1.0 if nev > 0 else 0.0
            env = base * (1.0 + se_env + lift * ind)
            u = _u01(key, ctr)
            ctr += 1
            t -= np.log(u) / env
            if t >= t1:
                break
            se = 0.0
            for k in range(nev):
                se += 1.0 / (1.0 + np.exp(beta * (t - work[k])))
            si = 0.0
            for k in range(it.shape[0]):
                dt = t - it[k]
                if dt > 0.0:
                    si -= iamp[k] / (1.0 + np.exp(idec[k] * dt))
            br = 1.0 + se + si + lift * ind
            if br < 0.0:
                br = 0.0
            lam = base * br
            if lam > ceiling:
                status = 1
                t_stop = t
                break
            v = _u01(key, ctr)
            ctr += 1
            if v * env <= lam:
                if nev == cap_w:
                    cap_w *= 2
                    nw = np.empty(cap_w, np.float64)
                    nw[:nev] = work[:nev]
                    work = nw
                work[nev] = t
                nev += 1
    return work[npre:nev].copy(), status, t_stop


@njit(cache=True, nogil=True)
def trace_entity(grid, ev, it, iamp, idec, base, lift, beta,
                 ecap, eslope, rcap, rslope, saturated):
    """Intensity at each grid time, history strictly before each point."""
    ng = grid.shape[0]
    out = np.empty(ng, np.float64)
    for gi in range(ng):
        t = grid[gi]
        se = 0.0
        ind = 0.0
        for k in range(ev.shape[0]):
            dt = t - ev[k]
            if dt > 0.0:
                se += 1.0 / (1.0 + np.exp(beta * dt))
                ind = 1.0
        si = 0.0
        for k in range(it.shape[0]):
            dt = t - it[k]
            if dt > 0.0:
                si -= iamp[k] / (1.0 + np.exp(idec[k] * dt))
        if saturated:
            br = (1.0 + _sat_exc(se, ecap, eslope)
                  - _sat_reg(si, rcap, rslope) + lift * ind)
        else:
            br = 1.0 + se + si + lift * ind
        if br < 0.0:
            br = 0.0
        out[gi] = base * br
    return out
