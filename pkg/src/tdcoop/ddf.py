"""Dynamic decode-and-forward: slot fractions, trial rates, outage bounds.

A forwarder listens to the source until it has collected enough mutual
information to decode, then re-encodes and transmits for the rest of the
period.  The listen fraction is therefore random,

    Theta = min(1, R / C(|A|^2 * Pbar / d^gamma)),

with an atom at 1 when the source-forwarder link is too weak.  The
destination sees a piecewise-constant rate: the direct-only part for the
listen fraction and a higher multi-antenna rate afterwards.  With 3+
hops the decode order is greedy (earliest decoder first, ties to the
lowest node index) and each new decoder boosts its burst power by the
inverse of its remaining transmit time.

All trial-level functions are vectorised over trials.  The bound
functions return the high-SNR lower/upper pair built from the leading
term of the weighted-exponential-sum CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mathcore import capacity

__all__ = [
    "BoundPair",
    "listen_fraction_rc",
    "listen_fraction_uc2",
    "listen_fraction_cdf",
    "trial_mutual_info_rc",
    "trial_mutual_info_uc2",
    "MultihopSchedule",
    "multihop_schedule",
    "trial_mutual_info_multihop",
    "ddf_bounds_rc",
    "ddf_bounds_uc2",
    "ddf_bounds_multihop",
    "clustering_condition",
    "optimize_theta_grid",
]

_THETA_GRID = np.linspace(0.01, 0.99, 99)


@dataclass(frozen=True)
class BoundPair:
    """Analytic outage bounds; lower <= upper always holds."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper):
            raise ValueError(f"invalid bound pair ({self.lower}, {self.upper})")


def _pow2m1(x):
    """2**x - 1, exact at 0."""
    return np.expm1(np.asarray(x) * math.log(2.0))


def listen_fraction_rc(amp_sq, distance, burst_power, rate, gamma):
    """Listen fraction of a single forwarder on link gain |A|^2.

    min(1, R / C(|A|^2 * Pbar / d^gamma)); a zero gain gives 1 (the
    forwarder never decodes and stays silent).  Co-located nodes have no
    fading link, so a zero distance is rejected.
    """
    if distance <= 0.0:
        raise ValueError("forwarder distance must be positive")
    snr = np.asarray(amp_sq, dtype=float) * burst_power / distance**gamma
    c = capacity(snr)
    with np.errstate(divide="ignore"):
        theta = np.where(c > 0.0, rate / np.maximum(c, 1e-300), np.inf)
    out = np.minimum(theta, 1.0)
    return float(out) if np.ndim(amp_sq) == 0 else out


def listen_fraction_uc2(amp_sq, distances, burst_power, rate, gamma):
    """Shared listen fraction when all helpers must decode before relaying.

    amp_sq has one column per helper; the slot boundary waits for the
    slowest helper, so the fraction is the per-helper maximum capped at 1.
    """
    a = np.atleast_2d(np.asarray(amp_sq, dtype=float))
    d = np.asarray(distances, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("helper distances must be positive")
    snr = a * burst_power / d**gamma
    c = capacity(snr)
    with np.errstate(divide="ignore"):
        theta = np.where(c > 0.0, rate / np.maximum(c, 1e-300), np.inf)
    return np.minimum(theta.max(axis=1), 1.0)


def listen_fraction_cdf(theta, dist_pow_sum, burst_power, rate):
    """Mixed CDF of the listen fraction.

    dist_pow_sum is d^gamma of the source-forwarder link, or the sum of
    d^gamma over helpers in the shared-slot case (the per-helper survival
    probabilities multiply into one exponential).  The distribution has
    an atom at 1: F(theta) = exp(-(2^(R/theta)-1) * dist_pow_sum / Pbar)
    for 0 < theta < 1, and 1 from theta = 1 on.
    """
    t = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        body = np.exp(-_pow2m1(rate / np.maximum(t, 1e-300)) * dist_pow_sum / burst_power)
    out = np.where(t <= 0.0, 0.0, np.where(t >= 1.0, 1.0, body))
    return float(out) if np.ndim(theta) == 0 else out


def trial_mutual_info_rc(theta, direct_snr, relay_link_snr):
    """Destination rate for one forwarder: theta*G1 + (1-theta)*G2.

    direct_snr is |H_dk|^2 * Pbar_k; relay_link_snr is |H_dr|^2 * P_r at
    the relay's average budget, and the burst boost 1/(1-theta) is applied
    here.  At theta = 1 the relay never transmits and the rate is G1.
    """
    theta = np.asarray(theta, dtype=float)
    g1 = capacity(direct_snr)
    thetabar = 1.0 - theta
    full = thetabar <= 0.0
    safe = np.where(full, 1.0, thetabar)
    g2 = capacity(np.asarray(direct_snr) + np.asarray(relay_link_snr) / safe)
    out = np.where(full, g1, theta * g1 + thetabar * g2)
    return float(out) if out.ndim == 0 else out


def trial_mutual_info_uc2(theta, direct_snr, helper_link_snr):
    """Destination rate with all helpers transmitting the second slot.

    helper_link_snr has one column per helper and carries |H_dj|^2 times
    the helper's average burst budget; the shared boost 1/(1-theta)
    applies to every helper.
    """
    theta = np.asarray(theta, dtype=float)
    g1 = capacity(direct_snr)
    thetabar = 1.0 - theta
    full = thetabar <= 0.0
    safe = np.where(full, 1.0, thetabar)
    boosted = np.asarray(direct_snr) + np.asarray(helper_link_snr).sum(axis=1) / safe
    g2 = capacity(boosted)
    out = np.where(full, g1, theta * g1 + thetabar * g2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MultihopSchedule:
    """Greedy decode schedule for a batch of trials.

    order[i, p] is the node slot (0 = source, 1.. = helpers in input
    order) transmitting from stage p on; fractions[i] sums to 1 and
    decoded[i] counts the nodes that actually transmit.  Positions at and
    beyond decoded[i] never got any time.
    """

    order: np.ndarray
    fractions: np.ndarray
    decoded: np.ndarray


def multihop_schedule(recv_amp_sq, recv_coef, rate, mode="accumulating"):
    """Greedy stage fractions for the 3+ hop decode-and-forward chain.

    recv_amp_sq is (n, H, L): |A|^2 at helper h from transmitter slot t
    (slot 0 is the source, slots 1..H the helpers in input order).
    recv_coef is (H, L) with entries Pbar_t / d(h, t)^gamma.  At each
    stage the undecided helper needing the smallest additional fraction
    decodes next; the stage is capped at the remaining time when nobody
    can decode, which ends the schedule.  In "accumulating" mode a helper
    keeps the information collected in earlier stages; in "per-fraction"
    mode it must decode within a single stage.
    """
    if mode not in ("accumulating", "per-fraction"):
        raise ValueError(f"unknown multihop mode {mode!r}")
    a = np.asarray(recv_amp_sq, dtype=float)
    coef = np.asarray(recv_coef, dtype=float)
    n, H, L = a.shape
    if H != L - 1 or coef.shape != (H, L):
        raise ValueError("recv_amp_sq must be (n, L-1, L) with matching recv_coef")
    order = np.zeros((n, L), dtype=np.int64)
    fractions = np.zeros((n, L))
    decoded = np.ones(n, dtype=np.int64)
    undecided = np.ones((n, H), dtype=bool)
    acc_info = np.zeros((n, H))
    remaining = np.ones(n)
    alive = np.ones(n, dtype=bool)
    rows = np.arange(n)
    helper_snr = a[:, :, 0] * coef[:, 0]  # source transmits from stage 0
    for s in range(L - 1):
        rate_now = capacity(helper_snr)
        need = rate - acc_info if mode == "accumulating" else np.full((n, H), rate)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = np.where(need <= 0.0, 0.0, need / np.where(rate_now > 0.0, rate_now, np.nan))
        cand = np.where(np.isnan(cand), np.inf, cand)
        cand[~undecided] = np.inf
        best = np.argmin(cand, axis=1)
        best_theta = cand[rows, best]
        decode = alive & (best_theta < remaining)
        cap = alive & ~decode
        fractions[cap, s] = remaining[cap]
        remaining[cap] = 0.0
        alive[cap] = False
        if not decode.any():
            break
        theta_s = np.where(decode, best_theta, 0.0)
        fractions[decode, s] = best_theta[decode]
        if mode == "accumulating":
            acc_info[decode] += theta_s[decode, None] * rate_now[decode]
        remaining[decode] = remaining[decode] - best_theta[decode]
        order[decode, s + 1] = best[decode] + 1
        decoded[decode] += 1
        undecided[rows[decode], best[decode]] = False
        new_slot = best[decode] + 1
        helper_snr[decode] += a[rows[decode], :, new_slot] * coef.T[new_slot]
    fractions[alive, L - 1] = remaining[alive]
    return MultihopSchedule(order=order, fractions=fractions, decoded=decoded)


def trial_mutual_info_multihop(schedule: MultihopSchedule, dest_amp_sq, dest_coef):
    """Destination rate sum_l theta_l * C(stage-l SNR) for the schedule.

    dest_amp_sq is (n, L) with |A|^2 of destination links by node slot;
    dest_coef[t] = Pbar_t / d(d, t)^gamma.  A node entering at position p
    transmits for the remaining time there, so its received power is
    boosted by 1 / remaining.
    """
    a = np.asarray(dest_amp_sq, dtype=float)
    coef = np.asarray(dest_coef, dtype=float)
    n, L = a.shape
    fr = schedule.fractions
    info = np.zeros(n)
    snr = np.zeros(n)
    remaining = np.ones(n)
    rows = np.arange(n)
    for p in range(L):
        active = (p < schedule.decoded) & (remaining > 0.0)
        slot = schedule.order[:, p]
        boost = np.where(active, np.where(remaining > 0.0, remaining, 1.0), 1.0)
        contrib = np.where(active, a[rows, slot] * coef[slot] / boost, 0.0)
        snr = snr + contrib
        theta_p = fr[:, p]
        info = info + np.where(theta_p > 0.0, theta_p * capacity(snr), 0.0)
        remaining = remaining - theta_p
    return info


def _leading_product(rate, burst_power, lambdas, dist_dest_pow):
    """(2^R-1)^L / (L! * Pbar^L) * prod_j d_dj^gamma / lambda_j."""
    lam = np.asarray(lambdas, dtype=float)
    dd = np.asarray(dist_dest_pow, dtype=float)
    L = lam.size
    eta = float(_pow2m1(rate))
    return eta**L / (math.factorial(L) * burst_power**L) * float(np.prod(dd / lam))


def ddf_bounds_rc(
    rate,
    burst_power,
    relay_ratio,
    d_dk,
    d_dr,
    d_rk,
    gamma,
    theta_star=0.5,
    optimize=False,
) -> BoundPair:
    """High-SNR outage bounds for one dedicated DDF forwarder.

    relay_ratio is the relay budget over the user burst power.  The lower
    bound is the two-branch diversity term; the upper bound multiplies it
    by a bracket evaluated at the split point theta_star (optionally grid
    searched).
    """
    if not 0.0 < theta_star < 1.0:
        raise ValueError("theta_star must be in (0, 1)")
    eta = float(_pow2m1(rate))
    lower = (
        eta**2
        * d_dk**gamma
        * d_dr**gamma
        / (2.0 * relay_ratio * burst_power**2)
    )

    def bracket(ts):
        tb = 1.0 - ts
        first = float(_pow2m1(rate / tb)) ** 2 * tb / eta**2
        second = (
            2.0
            * d_rk**gamma
            * float(_pow2m1(rate / ts)) ** 2
            * relay_ratio
            / (d_dr**gamma * eta**2)
        )
        return first + second

    if optimize:
        theta_star = min(_THETA_GRID, key=bracket)
    return BoundPair(lower=lower, upper=bracket(theta_star) * lower)


def ddf_bounds_uc2(
    rate,
    burst_power,
    lambdas,
    dist_dest_pow,
    dist_to_source_pow,
    theta_star=0.5,
    optimize=False,
) -> BoundPair:
    """High-SNR outage bounds for the shared-slot user-cooperation scheme.

    lambdas and dist_dest_pow cover the source plus its helpers (source
    first, lambda_k = 1, distances already raised to gamma);
    dist_to_source_pow are the helper-to-source d^gamma values.
    """
    if not 0.0 < theta_star < 1.0:
        raise ValueError("theta_star must be in (0, 1)")
    lam = np.asarray(lambdas, dtype=float)
    dd = np.asarray(dist_dest_pow, dtype=float)
    dk = np.asarray(dist_to_source_pow, dtype=float)
    L = lam.size
    eta = float(_pow2m1(rate))
    lower = _leading_product(rate, burst_power, lam, dd)
    helper_term = float(np.prod(dd[1:] / lam[1:]))

    def k2(ts):
        tb = 1.0 - ts
        first = float(_pow2m1(rate / tb)) ** L * tb ** (L - 1) / eta**L
        second = (
            float(_pow2m1(rate / ts)) ** 2
            * float(dk.sum())
            * math.factorial(L)
            * burst_power ** (L - 2)
            / (eta**L * helper_term)
        )
        return first + second

    if optimize:
        theta_star = min(_THETA_GRID, key=k2)
    return BoundPair(lower=lower, upper=k2(theta_star) * lower)


def _multihop_theta_vector(L, first_fraction=None):
    """Bound split fractions: equal 1/L by default, else (t, rest equal)."""
    if first_fraction is None:
        return np.full(L, 1.0 / L)
    t = float(first_fraction)
    if not 0.0 < t < 1.0:
        raise ValueError("first_fraction must be in (0, 1)")
    out = np.full(L, (1.0 - t) / (L - 1))
    out[0] = t
    return out


def ddf_bounds_multihop(
    rate,
    burst_power,
    lambdas,
    dist_dest_pow,
    dist_to_source_pow,
    theta_fractions=None,
    optimize=False,
) -> BoundPair:
    """High-SNR outage bounds for the 3+ hop chain.

    The upper bound is the diversity-L term times (K_c + K_d): K_c covers
    trials where every helper decodes under the split theta_fractions,
    K_d those where none does.  Both products run over all helpers, so
    the decode order does not enter.
    """
    lam = np.asarray(lambdas, dtype=float)
    dd = np.asarray(dist_dest_pow, dtype=float)
    dk = np.asarray(dist_to_source_pow, dtype=float)
    L = lam.size
    if L < 3:
        raise ValueError("multihop bounds need at least three hops")
    eta = float(_pow2m1(rate))
    lower = _leading_product(rate, burst_power, lam, dd)

    def kc_kd(tvec):
        tail = 1.0 - np.cumsum(tvec)[:-1]
        thetabar_sum = np.concatenate(([1.0], tail))  # remaining time at each stage
        kc = float(_pow2m1(rate / tvec[-1])) ** L * float(np.prod(thetabar_sum)) / eta**L
        kd = (
            float(_pow2m1(rate / tvec[0])) ** L
            * math.factorial(L)
            / eta**L
            * float(np.prod(dk / lam[1:]))
        )
        return kc + kd

    if optimize:
        best = min(
            (kc_kd(_multihop_theta_vector(L, t)) for t in _THETA_GRID),
        )
        return BoundPair(lower=lower, upper=best * lower)
    tvec = (
        np.asarray(theta_fractions, dtype=float)
        if theta_fractions is not None
        else _multihop_theta_vector(L)
    )
    if tvec.size != L or np.any(tvec <= 0) or not math.isclose(tvec.sum(), 1.0, rel_tol=1e-9):
        raise ValueError("theta_fractions must be L positive values summing to 1")
    return BoundPair(lower=lower, upper=kc_kd(tvec) * lower)


def clustering_condition(
    rate,
    burst_power,
    lambdas,
    dist_dest_pow,
    dist_to_source_pow,
    theta_star=0.5,
):
    """Whether helpers sit close enough for the full-diversity regime.

    Returns (satisfied, threshold) where the condition is
    sum_j d_jk^gamma <= threshold.  Only defined for three or more
    cooperating branches.
    """
    lam = np.asarray(lambdas, dtype=float)
    dd = np.asarray(dist_dest_pow, dtype=float)
    dk = np.asarray(dist_to_source_pow, dtype=float)
    L = lam.size
    if L <= 2:
        raise ValueError("clustering condition needs more than two branches")
    if not 0.0 < theta_star < 1.0:
        raise ValueError("theta_star must be in (0, 1)")
    tb = 1.0 - theta_star
    threshold = (
        float(_pow2m1(rate / tb)) ** (L - 2)
        / (math.factorial(L) * burst_power ** (L - 2))
        * float(np.prod(dd / lam))
        / dd[0]
    )
    return bool(dk.sum() <= threshold), float(threshold)


def optimize_theta_grid():
    """The 99-point split-fraction grid used by the bound optimisers."""
    return _THETA_GRID.copy()
