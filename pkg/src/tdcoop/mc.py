"""Deterministic parallel Monte Carlo trial engine.

Every batch of trials draws from its own counter-based stream whose key
is (seed, blake2b-64 of the batch's index path), so results depend only
on the configuration and never on worker count or execution order:

    placement i       <- stream (master_seed; 0, i)
    point seed        <- mix64(master_seed, 1, strategy_idx, snr_idx)
    trial chunk       <- stream (point_seed; placement_idx, user_idx,
                                 round_idx, chunk_idx)

Trials for one (strategy, SNR) point are scheduled in geometric rounds:
every (placement, user) cell starts at MIN_CELL_TRIALS and quadruples at
each round until the point has TARGET_EVENTS pooled outage events or the
cell hits its equal share of the trial ceiling.  Decisions use pooled
integer event counts at round boundaries only, which keeps the schedule
identical for any worker count.  Rounds are cut into tasks of at most
MAX_TASK_TRIALS trials; each task reduces to one integer.

Kernels draw channels directly (documented column layouts below) and
return outage event counts.  A trial is in outage when its mutual
information is strictly below the rate; rate 0 therefore never fails.
"""

from __future__ import annotations

import hashlib
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import multiprocessing

import numpy as np

from . import af as _af
from . import ddf as _ddf

__all__ = [
    "MIN_CELL_TRIALS",
    "MAX_TASK_TRIALS",
    "ROUND_GROWTH",
    "TARGET_EVENTS",
    "TRIAL_CEILING",
    "mix64",
    "derive_stream",
    "round_targets",
    "chunk_sizes",
    "count_events",
    "run_cells",
    "CellResult",
]

MIN_CELL_TRIALS = 2048
MAX_TASK_TRIALS = 1 << 20
ROUND_GROWTH = 4
TARGET_EVENTS = 100
TRIAL_CEILING = 10_000_000

_BATCH = 1 << 16
_MASK = (1 << 64) - 1


def mix64(*words) -> int:
    """Collapse an index path into one 64-bit stream key word."""
    data = struct.pack("<%dQ" % len(words), *(int(w) & _MASK for w in words))
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def derive_stream(seed, *path) -> np.random.Generator:
    """Independent generator for one index path under the given seed."""
    return np.random.Generator(np.random.Philox(key=[int(seed) & _MASK, mix64(*path)]))


def round_targets(cap: int) -> list[int]:
    """Cumulative per-cell trial counts per round: 2048, 8192, ... up to cap."""
    if cap < 1:
        raise ValueError("per-cell trial cap must be >= 1")
    targets = []
    t = min(MIN_CELL_TRIALS, cap)
    while True:
        targets.append(t)
        if t >= cap:
            return targets
        t = min(t * ROUND_GROWTH, cap)


def chunk_sizes(n: int) -> list[int]:
    """Fixed decomposition of a round's addition into task-sized chunks."""
    out = [MAX_TASK_TRIALS] * (n // MAX_TASK_TRIALS)
    if n % MAX_TASK_TRIALS:
        out.append(n % MAX_TASK_TRIALS)
    return out


# ---------------------------------------------------------------------------
# Trial kernels.  params holds plain floats/tuples so tasks pickle cheaply.
# Each kernel documents its draw layout; changing a layout changes results.


def _rayleigh_complex(rng, n, m):
    """m proper complex unit-variance amplitudes per trial.

    Layout: standard_normal (n, 2m), first m columns real parts, last m
    imaginary, scaled by sqrt(1/2).
    """
    parts = rng.standard_normal((n, 2 * m))
    return math.sqrt(0.5) * (parts[:, :m] + 1j * parts[:, m:])


def _count_mac(params, rng, n):
    """Direct slot only.  Draws: exponential (n, 1) = |A_dk|^2."""
    rate = params["rate"]
    a = rng.exponential(size=(n, 1))[:, 0]
    if rate <= 0.0:
        return 0
    burst = params["burst"]
    if burst <= 0.0:
        return n
    threshold = math.expm1(rate * math.log(2.0)) * params["d_dk_pow"] / burst
    return int((a < threshold).sum())


def _count_rc_ddf(params, rng, n):
    """One dedicated forwarder.  Draws: exponential (n, 3) = A_rk, A_dk, A_dr."""
    rate = params["rate"]
    a = rng.exponential(size=(n, 3))
    if rate <= 0.0:
        return 0
    burst = params["burst"]
    theta = _ddf.listen_fraction_rc(a[:, 0], params["d_rk"], burst, rate, params["gamma"])
    mi = _ddf.trial_mutual_info_rc(
        theta,
        a[:, 1] * burst / params["d_dk_pow"],
        a[:, 2] * params["relay_budget"] / params["d_dr_pow"],
    )
    return int((mi < rate).sum())


def _count_uc2_ddf(params, rng, n):
    """Shared second slot, m helpers.

    Draws: exponential (n, 2m + 1) = helper listen links A_jk (m), then
    A_dk, then destination links A_dj (m).
    """
    rate = params["rate"]
    m = len(params["helper_budgets"])
    a = rng.exponential(size=(n, 2 * m + 1))
    if rate <= 0.0:
        return 0
    burst = params["burst"]
    d_jk = np.asarray(params["d_jk"])
    theta = _ddf.listen_fraction_uc2(a[:, :m], d_jk, burst, rate, params["gamma"])
    budgets = np.asarray(params["helper_budgets"])
    helper_snr = a[:, m + 1 :] * budgets / np.asarray(params["d_dj_pow"])
    mi = _ddf.trial_mutual_info_uc2(theta, a[:, m] * burst / params["d_dk_pow"], helper_snr)
    return int((mi < rate).sum())


def _count_ucmh_ddf(params, rng, n):
    """Greedy multihop chain, m helpers (L = m + 1 slots).

    Draws: exponential (n, m + m(m-1)/2 + 1 + m) in the order
    helper-hears-source (m), helper pairs (h < j, row-major), destination
    from source (1), destination from helpers (m).  A helper pair shares
    one fading draw for both directions.
    """
    rate = params["rate"]
    recv_coef = np.asarray(params["recv_coef"])
    m, L = recv_coef.shape[0], recv_coef.shape[1]
    npairs = m * (m - 1) // 2
    a = rng.exponential(size=(n, m + npairs + 1 + m))
    if rate <= 0.0:
        return 0
    recv = np.zeros((n, m, L))
    recv[:, :, 0] = a[:, :m]
    col = m
    for h in range(m):
        for j in range(h + 1, m):
            recv[:, h, j + 1] = a[:, col]
            recv[:, j, h + 1] = a[:, col]
            col += 1
    dest = a[:, m + npairs :]
    sched = _ddf.multihop_schedule(recv, recv_coef, rate, mode=params["mode"])
    mi = _ddf.trial_mutual_info_multihop(sched, dest, np.asarray(params["dest_coef"]))
    return int((mi < rate).sum())


def _count_af2(params, rng, n):
    """Two-slot AF, m helpers.

    Draws: complex amplitudes for links [d-k, d-j (m), j-k (m)] via
    standard_normal (n, 2(1 + 2m)).
    """
    rate = params["rate"]
    m = len(params["helper_budgets"])
    amp = _rayleigh_complex(rng, n, 1 + 2 * m)
    if rate <= 0.0:
        return 0
    h_dk = amp[:, 0] * params["scale_dk"]
    h_dj = amp[:, 1 : 1 + m] * np.asarray(params["scale_dj"])
    h_jk = amp[:, 1 + m :] * np.asarray(params["scale_jk"])
    ch = _af.af2_equivalent_channel(
        h_dk, h_dj, h_jk, np.asarray(params["helper_budgets"]), params["burst"]
    )
    mi = _af.af_trial_mutual_info(ch, params["burst"])
    return int((mi < rate).sum())


def _count_afmh(params, rng, n):
    """L-slot AF, one helper forwarding per slot.  Same draw layout as
    the two-slot kernel (helpers never hear each other)."""
    rate = params["rate"]
    m = len(params["helper_budgets"])
    amp = _rayleigh_complex(rng, n, 1 + 2 * m)
    if rate <= 0.0:
        return 0
    h_dk = amp[:, 0] * params["scale_dk"]
    h_dj = amp[:, 1 : 1 + m] * np.asarray(params["scale_dj"])
    h_jk = amp[:, 1 + m :] * np.asarray(params["scale_jk"])
    ch = _af.afmh_equivalent_channel(
        h_dk, h_dj, h_jk, np.asarray(params["helper_budgets"]), params["burst"]
    )
    mi = _af.af_trial_mutual_info(ch, params["burst"])
    return int((mi < rate).sum())


_KERNELS = {
    "mac": _count_mac,
    "rc-ddf": _count_rc_ddf,
    "uc2-ddf": _count_uc2_ddf,
    "ucmh-ddf": _count_ucmh_ddf,
    "af2": _count_af2,
    "afmh": _count_afmh,
}


def count_events(kernel: str, params: dict, seed: int, path: tuple, trials: int) -> int:
    """Outage events in one task, consumed in fixed internal batches."""
    fn = _KERNELS[kernel]
    rng = derive_stream(seed, *path)
    events = 0
    done = 0
    while done < trials:
        step = min(_BATCH, trials - done)
        events += fn(params, rng, step)
        done += step
    return events


def _run_task(args):
    kernel, params, seed, path, trials = args
    return count_events(kernel, params, seed, path, trials)


@dataclass(frozen=True)
class CellResult:
    """Pooled counts for one (placement, user) cell of a sweep point."""

    placement_idx: int
    user_idx: int
    trials: int
    events: int


def run_cells(
    cells: list[tuple[int, int, str, dict]],
    point_seed: int,
    workers: int = 1,
    target_events: int = TARGET_EVENTS,
    trial_ceiling: int = TRIAL_CEILING,
) -> tuple[list[CellResult], bool]:
    """Adaptive pooled trial loop for one sweep point.

    cells holds (placement_idx, user_idx, kernel, params) entries; every
    cell receives the same per-round trial counts (equal shares of the
    ceiling), so per-user and per-placement averages pool cleanly.
    Returns the per-cell counts and the ceiling flag (True when the point
    stopped at the ceiling with fewer than target_events events).
    """
    if not cells:
        raise ValueError("run_cells needs at least one cell")
    if trial_ceiling < len(cells):
        raise ValueError("trial ceiling below one trial per cell")
    cap = trial_ceiling // len(cells)
    targets = round_targets(cap)
    trials = {(c[0], c[1]): 0 for c in cells}
    events = {(c[0], c[1]): 0 for c in cells}
    pool = ProcessPoolExecutor(
        max_workers=workers, mp_context=multiprocessing.get_context("fork")
    ) if workers > 1 else None
    try:
        prev = 0
        for round_idx, cum in enumerate(targets):
            add = cum - prev
            prev = cum
            tasks = []
            owners = []
            for placement_idx, user_idx, kernel, params in cells:
                for chunk_idx, size in enumerate(chunk_sizes(add)):
                    path = (placement_idx, user_idx, round_idx, chunk_idx)
                    tasks.append((kernel, params, point_seed, path, size))
                    owners.append((placement_idx, user_idx))
            if pool is not None:
                results = list(pool.map(_run_task, tasks, chunksize=1))
            else:
                results = [_run_task(t) for t in tasks]
            for owner, task, got in zip(owners, tasks, results):
                trials[owner] += task[4]
                events[owner] += got
            if sum(events.values()) >= target_events:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    flagged = sum(events.values()) < target_events
    out = [
        CellResult(p, u, trials[(p, u)], events[(p, u)])
        for p, u, _, _ in cells
    ]
    return out, flagged
