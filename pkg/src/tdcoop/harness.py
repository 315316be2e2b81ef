"""Experiment sweeps: outage estimates, area averaging, slopes, CSV rows.

A sweep point is one (strategy, SNR) pair; the SNR grid is over the
per-user power P_1 in dB.  Each point runs the adaptive trial engine
over every (placement, user) cell, pools the integer counts, and pairs
the estimate with the analytic bounds averaged the same way.  All
randomness is derived from the master seed by the keyed-stream rule in
the engine module, so rows are byte-identical across runs and worker
counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import mc
from .af import af_bounds_2hop, af_bounds_multihop
from .ddf import BoundPair, ddf_bounds_multihop, ddf_bounds_rc, ddf_bounds_uc2
from .network import DESTINATION, RELAY, GeometryParams, NodePlacement, sample_placement, user_id
from .power import PowerConfig, relay_power, total_power, user_burst_power
from .strategies import Strategy

__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "OutageEstimate",
    "mac_outage",
    "estimate_outage",
    "area_averaged_outage",
    "sweep_fixed_placement",
    "diversity_slope",
    "run_experiment",
    "format_rows",
]

CSV_HEADER = "strategy,user_k,snr_db,ptot_db,outage,ci95,bound_lower,bound_upper,trials,ceiling_flag"

_X_AXIS_MODES = ("transmit-snr", "total-power")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one sweep run."""

    geometry: GeometryParams
    power: PowerConfig
    strategies: tuple[Strategy, ...]
    snr_db: tuple[float, ...]
    num_placements: int = 100
    master_seed: int = 0
    target_events: int = mc.TARGET_EVENTS
    trial_ceiling: int = mc.TRIAL_CEILING
    workers: int = 1
    x_axis: str = "transmit-snr"
    output_path: str | None = None
    per_user_rows: bool = False
    theta_star: float = 0.5
    optimize_bounds: bool = False
    bounds_only: bool = False

    def __post_init__(self):
        if len(self.strategies) == 0:
            raise ValueError("strategy list must not be empty")
        grid = tuple(float(x) for x in self.snr_db)
        if len(grid) == 0 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("snr_db grid must be nonempty and strictly increasing")
        object.__setattr__(self, "snr_db", grid)
        if self.num_placements < 1:
            raise ValueError("num_placements must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        if self.target_events < 1 or self.trial_ceiling < 1:
            raise ValueError("target_events and trial_ceiling must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.x_axis not in _X_AXIS_MODES:
            raise ValueError(f"x_axis must be one of {_X_AXIS_MODES}")
        if not 0.0 < self.theta_star < 1.0:
            raise ValueError("theta_star must be in (0, 1)")
        for s in self.strategies:
            if s.num_users != self.geometry.num_users:
                raise ValueError(f"strategy {s.name} sized for {s.num_users} users")

    def placements(self) -> list[NodePlacement]:
        """The run's placement ensemble (stream keyed by placement index)."""
        return [
            sample_placement(self.geometry, mc.derive_stream(self.master_seed, 0, i))
            for i in range(self.num_placements)
        ]


@dataclass(frozen=True)
class OutageEstimate:
    """Pooled Monte Carlo estimate for one sweep point."""

    p_hat: float
    trials: int
    ci95: float
    bounds: BoundPair
    per_placement: tuple[float, ...]
    events: int = 0
    ceiling_flag: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p_hat <= 1.0:
            raise ValueError("p_hat must lie in [0, 1]")


def _halfwidth(p: float, n: int) -> float:
    return 1.96 * math.sqrt(p * (1.0 - p) / n)


def mac_outage(pc: PowerConfig, d_dk: float, gamma: float, num_users: int) -> float:
    """Closed-form direct-link outage 1 - exp(-(2^R - 1) d^g / (K P_k))."""
    if d_dk <= 0 or gamma <= 0 or num_users < 1:
        raise ValueError("mac_outage requires positive inputs")
    burst = num_users * pc.user_power
    if burst == 0.0:
        return 1.0 if pc.rate > 0 else 0.0
    return -math.expm1(-math.expm1(pc.rate * math.log(2.0)) * d_dk**gamma / burst)


def _helper_ids(strategy: Strategy, k: int) -> list[str]:
    if strategy.uses_relay:
        return [RELAY]
    return [user_id(j) for j in strategy.helpers(k)]


def _cell_kernel(strategy: Strategy, placement: NodePlacement, pc: PowerConfig, k: int):
    """Kernel name and plain-data params for one (strategy, user) cell."""
    gamma = placement.params.path_loss_exponent
    src = user_id(k)
    d_dk = placement.distance(DESTINATION, src)
    burst = user_burst_power(strategy, pc, k)
    if strategy.mode == "mac":
        return "mac", {"rate": pc.rate, "burst": burst, "d_dk_pow": d_dk**gamma}
    helpers = _helper_ids(strategy, k)
    budgets = (
        (relay_power(pc),)
        if strategy.uses_relay
        else tuple(user_burst_power(strategy, pc, j) for j in strategy.helpers(k))
    )
    if strategy.family == "af":
        kernel = "af2" if strategy.hops(k) == 2 else "afmh"
        return kernel, {
            "rate": pc.rate,
            "burst": burst,
            "helper_budgets": budgets,
            "scale_dk": d_dk ** (-gamma / 2.0),
            "scale_dj": tuple(
                placement.distance(DESTINATION, h) ** (-gamma / 2.0) for h in helpers
            ),
            "scale_jk": tuple(placement.distance(h, src) ** (-gamma / 2.0) for h in helpers),
        }
    if strategy.mode == "rc":
        return "rc-ddf", {
            "rate": pc.rate,
            "burst": burst,
            "relay_budget": budgets[0],
            "d_rk": placement.distance(RELAY, src),
            "gamma": gamma,
            "d_dk_pow": d_dk**gamma,
            "d_dr_pow": placement.distance(DESTINATION, RELAY) ** gamma,
        }
    if strategy.mode == "uc2":
        return "uc2-ddf", {
            "rate": pc.rate,
            "burst": burst,
            "helper_budgets": budgets,
            "d_jk": tuple(placement.distance(h, src) for h in helpers),
            "gamma": gamma,
            "d_dk_pow": d_dk**gamma,
            "d_dj_pow": tuple(placement.distance(DESTINATION, h) ** gamma for h in helpers),
        }
    # ucmh-ddf: helper h hears the source (slot 0) and every other helper.
    m = len(helpers)
    recv_coef = np.zeros((m, m + 1))
    for hh, h in enumerate(helpers):
        recv_coef[hh, 0] = burst / placement.distance(h, src) ** gamma
        for jj, other in enumerate(helpers):
            if jj != hh:
                recv_coef[hh, jj + 1] = budgets[jj] / placement.distance(h, other) ** gamma
    dest_coef = (burst / d_dk**gamma,) + tuple(
        budgets[jj] / placement.distance(DESTINATION, h) ** gamma
        for jj, h in enumerate(helpers)
    )
    return "ucmh-ddf", {
        "rate": pc.rate,
        "recv_coef": tuple(map(tuple, recv_coef)),
        "dest_coef": dest_coef,
        "mode": strategy.multihop_mode,
    }


def _cell_bounds(
    strategy: Strategy,
    placement: NodePlacement,
    pc: PowerConfig,
    k: int,
    theta_star: float = 0.5,
    optimize: bool = False,
) -> BoundPair:
    """Analytic bound pair for one cell; the closed form twice for mac."""
    gamma = placement.params.path_loss_exponent
    src = user_id(k)
    d_dk = placement.distance(DESTINATION, src)
    if strategy.mode == "mac":
        cf = mac_outage(pc, d_dk, gamma, strategy.num_users)
        return BoundPair(lower=cf, upper=cf)
    burst = user_burst_power(strategy, pc, k)
    helpers = _helper_ids(strategy, k)
    budgets = (
        (relay_power(pc),)
        if strategy.uses_relay
        else tuple(user_burst_power(strategy, pc, j) for j in strategy.helpers(k))
    )
    if strategy.family == "af":
        d_dj = [placement.distance(DESTINATION, h) for h in helpers]
        d_jk = [placement.distance(h, src) for h in helpers]
        if strategy.hops(k) == 2:
            return af_bounds_2hop(pc.rate, burst, d_dk, d_dj, d_jk, gamma)
        return af_bounds_multihop(pc.rate, burst, d_dk, d_dj, d_jk, gamma)
    if strategy.mode == "rc":
        return ddf_bounds_rc(
            pc.rate,
            burst,
            budgets[0] / burst,
            d_dk,
            placement.distance(DESTINATION, RELAY),
            placement.distance(RELAY, src),
            gamma,
            theta_star=theta_star,
            optimize=optimize,
        )
    lambdas = np.concatenate(([1.0], np.asarray(budgets) / burst))
    dist_dest_pow = np.array(
        [d_dk**gamma] + [placement.distance(DESTINATION, h) ** gamma for h in helpers]
    )
    dist_src_pow = np.array([placement.distance(h, src) ** gamma for h in helpers])
    if strategy.mode == "uc2":
        return ddf_bounds_uc2(
            pc.rate,
            burst,
            lambdas,
            dist_dest_pow,
            dist_src_pow,
            theta_star=theta_star,
            optimize=optimize,
        )
    return ddf_bounds_multihop(
        pc.rate, burst, lambdas, dist_dest_pow, dist_src_pow, optimize=optimize
    )


def _mean_bounds(pairs: list[BoundPair]) -> BoundPair:
    return BoundPair(
        lower=float(np.mean([b.lower for b in pairs])),
        upper=float(np.mean([b.upper for b in pairs])),
    )


def estimate_outage(
    strategy: Strategy,
    placement: NodePlacement,
    pc: PowerConfig,
    trials: int,
    seed: int,
    placement_index: int = 0,
) -> OutageEstimate:
    """Fixed-size user-averaged estimate on one placement.

    ``trials`` is per user; the estimate pools the per-user counts, which
    equals the arithmetic user average because every user runs the same
    count.  Streams are keyed exactly like the sweep engine's, so a sweep
    point that stops at its ceiling reproduces this function.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    total_events = 0
    bounds = []
    for u in range(strategy.num_users):
        kernel, params = _cell_kernel(strategy, placement, pc, u + 1)
        prev = 0
        for round_idx, cum in enumerate(mc.round_targets(trials)):
            for chunk_idx, size in enumerate(mc.chunk_sizes(cum - prev)):
                path = (placement_index, u, round_idx, chunk_idx)
                total_events += mc.count_events(kernel, params, seed, path, size)
            prev = cum
        bounds.append(_cell_bounds(strategy, placement, pc, u + 1))
    n = trials * strategy.num_users
    p = total_events / n
    return OutageEstimate(
        p_hat=p,
        trials=n,
        ci95=_halfwidth(p, n),
        bounds=_mean_bounds(bounds),
        per_placement=(p,),
        events=total_events,
    )


@dataclass(frozen=True)
class _PointResult:
    """Internal per-point pooling, kept at cell granularity for rows."""

    cells: list[mc.CellResult]
    cell_bounds: dict[tuple[int, int], BoundPair]
    ceiling_flag: bool
    num_users: int

    def pooled(self, user: int | None = None) -> tuple[float, int, int]:
        picked = [c for c in self.cells if user is None or c.user_idx == user]
        n = sum(c.trials for c in picked)
        e = sum(c.events for c in picked)
        return e / n, n, e

    def bounds(self, user: int | None = None) -> BoundPair:
        picked = [
            b for (p, u), b in sorted(self.cell_bounds.items()) if user is None or u == user
        ]
        return _mean_bounds(picked)

    def per_placement(self) -> tuple[float, ...]:
        out = []
        for p in sorted({c.placement_idx for c in self.cells}):
            picked = [c for c in self.cells if c.placement_idx == p]
            out.append(sum(c.events for c in picked) / sum(c.trials for c in picked))
        return tuple(out)


def _run_point(
    cfg: ExperimentConfig,
    strategy: Strategy,
    strategy_index: int,
    snr_index: int,
    placements: list[NodePlacement],
    pc: PowerConfig,
) -> _PointResult:
    cells = []
    cell_bounds = {}
    for p_idx, placement in enumerate(placements):
        for u in range(strategy.num_users):
            kernel, params = _cell_kernel(strategy, placement, pc, u + 1)
            cells.append((p_idx, u, kernel, params))
            cell_bounds[(p_idx, u)] = _cell_bounds(
                strategy, placement, pc, u + 1, cfg.theta_star, cfg.optimize_bounds
            )
    point_seed = mc.mix64(cfg.master_seed, 1, strategy_index, snr_index)
    if cfg.bounds_only:
        results = [mc.CellResult(p, u, 0, 0) for p, u, _, _ in cells]
        return _PointResult(results, cell_bounds, False, strategy.num_users)
    results, flagged = mc.run_cells(
        cells,
        point_seed,
        workers=cfg.workers,
        target_events=cfg.target_events,
        trial_ceiling=cfg.trial_ceiling,
    )
    return _PointResult(results, cell_bounds, flagged, strategy.num_users)


def sweep_fixed_placement(
    strategy: Strategy,
    placement: NodePlacement,
    base_power: PowerConfig,
    snr_db,
    seed: int,
    strategy_index: int = 0,
    target_events: int = mc.TARGET_EVENTS,
    trial_ceiling: int = mc.TRIAL_CEILING,
    workers: int = 1,
    theta_star: float = 0.5,
    optimize_bounds: bool = False,
) -> list[OutageEstimate]:
    """Adaptive sweep on one hand-picked geometry (no area averaging).

    Useful for slope benchmarks where the node layout must stay fixed
    across the grid.  Streams are keyed exactly like a one-placement
    sweep under the same seed.
    """
    cfg = ExperimentConfig(
        geometry=placement.params,
        power=base_power,
        strategies=(strategy,),
        snr_db=tuple(snr_db),
        num_placements=1,
        master_seed=seed,
        target_events=target_events,
        trial_ceiling=trial_ceiling,
        workers=workers,
        theta_star=theta_star,
        optimize_bounds=optimize_bounds,
    )
    out = []
    for snr_index, snr in enumerate(cfg.snr_db):
        pc = cfg.power.with_user_power(10.0 ** (snr / 10.0))
        point = _run_point(cfg, strategy, strategy_index, snr_index, [placement], pc)
        p, n, e = point.pooled()
        out.append(
            OutageEstimate(
                p_hat=p,
                trials=n,
                ci95=_halfwidth(p, n),
                bounds=point.bounds(),
                per_placement=point.per_placement(),
                events=e,
                ceiling_flag=point.ceiling_flag,
            )
        )
    return out


def area_averaged_outage(
    cfg: ExperimentConfig, strategy: Strategy, strategy_index: int = 0
) -> list[OutageEstimate]:
    """Adaptive pooled estimate at every SNR grid point.

    strategy_index labels the point streams; sweeps over several
    strategies must pass each one's position so streams never collide.
    """
    placements = cfg.placements()
    out = []
    for snr_index, snr in enumerate(cfg.snr_db):
        pc = cfg.power.with_user_power(10.0 ** (snr / 10.0))
        point = _run_point(cfg, strategy, strategy_index, snr_index, placements, pc)
        p, n, e = point.pooled()
        out.append(
            OutageEstimate(
                p_hat=p,
                trials=n,
                ci95=_halfwidth(p, n),
                bounds=point.bounds(),
                per_placement=point.per_placement(),
                events=e,
                ceiling_flag=point.ceiling_flag,
            )
        )
    return out


def diversity_slope(points) -> float:
    """Least-squares slope of -log10(outage) against SNR_dB / 10.

    points is an iterable of (snr_db, outage) pairs; every outage must be
    positive, and at least two points are required.
    """
    pts = [(float(s), float(p)) for s, p in points]
    if len(pts) < 2:
        raise ValueError("diversity_slope needs at least two points")
    if any(p <= 0.0 for _, p in pts):
        raise ValueError("diversity_slope: zero outage in window, not enough events")
    x = np.array([s / 10.0 for s, _ in pts])
    y = np.array([-math.log10(p) for _, p in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def format_rows(rows: list[dict]) -> str:
    """Render result rows as the CSV body (header included)."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r["strategy"],
                    str(r["user_k"]),
                    _fmt(r["snr_db"]),
                    _fmt(r["ptot_db"]),
                    _fmt(r["outage"]) if r["outage"] is not None else "",
                    _fmt(r["ci95"]) if r["ci95"] is not None else "",
                    _fmt(r["bound_lower"]),
                    _fmt(r["bound_upper"]),
                    str(r["trials"]),
                    str(int(r["ceiling_flag"])),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """Run the full sweep; returns rows and writes the CSV when configured.

    Row order: strategies in config order, SNR ascending, the averaged
    row first and then per-user rows when enabled.
    """
    placements = cfg.placements()
    rows = []
    for s_idx, strategy in enumerate(cfg.strategies):
        for snr_index, snr in enumerate(cfg.snr_db):
            pc = cfg.power.with_user_power(10.0 ** (snr / 10.0))
            point = _run_point(cfg, strategy, s_idx, snr_index, placements, pc)
            ptot_db = 10.0 * math.log10(total_power(strategy, pc))
            targets: list[int | None] = [None]
            if cfg.per_user_rows:
                targets += list(range(strategy.num_users))
            for user in targets:
                b = point.bounds(user)
                if cfg.bounds_only:
                    outage = ci = None
                    n = 0
                else:
                    p, n, _ = point.pooled(user)
                    outage, ci = p, _halfwidth(p, n)
                rows.append(
                    {
                        "strategy": strategy.name,
                        "user_k": "avg" if user is None else user + 1,
                        "snr_db": snr,
                        "ptot_db": ptot_db,
                        "outage": outage,
                        "ci95": ci,
                        "bound_lower": b.lower,
                        "bound_upper": b.upper,
                        "trials": n,
                        "ceiling_flag": point.ceiling_flag and not cfg.bounds_only,
                    }
                )
    if cfg.output_path is not None:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(format_rows(rows))
    return rows
