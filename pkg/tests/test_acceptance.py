"""End-to-end acceptance benchmarks for the package.

Each check prints one live PASS/FAIL line with its measured quantities
(bypassing capture), so a full run documents how the build performed.
The Monte Carlo checks run on frozen seeds and fixed hand-picked
geometries; every tolerance is stated inline.

Budget note: everything here is sized for a single CPU core.  The
slope benchmark is the expensive part (about three minutes); it is
computed once in a module fixture and shared by the slope and bound
sandwich checks.
"""

import math
import time

import numpy as np
import pytest
import yaml

from tdcoop.cli import main
from tdcoop.ddf import clustering_condition, listen_fraction_cdf, listen_fraction_rc
from tdcoop.harness import (
    ExperimentConfig,
    area_averaged_outage,
    diversity_slope,
    mac_outage,
    sweep_fixed_placement,
)
from tdcoop.mathcore import WeightedExpSum, hypoexp_cdf, hypoexp_coefficients
from tdcoop.network import DESTINATION, RELAY, GeometryParams, NodePlacement, user_id
from tdcoop.power import PowerConfig, total_power, user_burst_power
from tdcoop.strategies import parse_strategy

GP = GeometryParams()
GAMMA = GP.path_loss_exponent


def polar_placement(specs):
    """Users at (radius, angle degrees); relay and destination at defaults."""
    pos = {DESTINATION: (0.0, 0.0), RELAY: (0.5, 0.0)}
    for k, (r, deg) in zip((1, 2, 3), specs):
        a = math.radians(deg)
        pos[user_id(k)] = (r * math.cos(a), r * math.sin(a))
    return NodePlacement(params=GP, positions=pos)


# Frozen benchmark geometries.  The slope benchmark wants the users in a
# tight cluster near the sector rim: clustering keeps the decode-and-
# forward onset early, the rim maximises direct-path loss so that the
# amplify-and-forward sweep still produces outage events at 45 dB.
EDGE_CLUSTER = ((1.0, 29.0), (0.99, 31.0), (0.98, 33.0))
SPREAD_USERS = ((0.95, 5.0), (0.95, 30.0), (0.95, 55.0))
TIGHT_CLUSTER = ((0.9, 30.05), (0.9, 31.3), (0.9, 32.55))
UNIT_CIRCLE = ((1.0, 10.0), (1.0, 30.0), (1.0, 50.0))

SEED = 2024
GRID_45 = tuple(float(x) for x in range(0, 50, 5))
WINDOW = (30.0, 45.0)  # top 15 dB of the 0-45 sweep

# (strategy, spectral efficiency, trial ceiling); index = stream index.
# Rates are per-strategy: the DDF sweeps need a high rate so their full-
# diversity onset is not already saturated below 30 dB, while AF pays a
# 2^(L R) combining penalty and needs a low rate to keep 45 dB measurable.
SLOPE_BENCH = (
    ("rc-ddf", 9.0, 10**7),
    ("uc2-ddf", 9.0, 10**7),
    ("uc3-ddf", 9.0, 3 * 10**7),
    ("uc2-af", 5.0, 10**7),
    ("uc3-af", 4.0, 10**8),
)


def tell(capsys, line):
    with capsys.disabled():
        print(line, flush=True)


def window_points(grid, ests, lo=WINDOW[0], hi=WINDOW[1]):
    return [(s, e) for s, e in zip(grid, ests) if lo <= s <= hi]


def slope_of(grid, ests):
    pts = [(s, e.p_hat) for s, e in window_points(grid, ests) if e.p_hat > 0]
    return diversity_slope(pts)


@pytest.fixture(scope="module")
def slope_sweeps():
    pl = polar_placement(EDGE_CLUSTER)
    out = {}
    t0 = time.perf_counter()
    for idx, (name, rate, ceiling) in enumerate(SLOPE_BENCH):
        out[name] = sweep_fixed_placement(
            parse_strategy(name, 3), pl, PowerConfig(rate=rate), GRID_45, SEED,
            strategy_index=idx, trial_ceiling=ceiling,
        )
    out["elapsed"] = time.perf_counter() - t0
    return out


def test_hypoexp_cdf_matches_empirical_sampling(capsys):
    """Closed-form CDF against 1e6-sample empirical CDFs, orders 1..4."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_sup = 0.0
    worst_sum = 0.0
    for L in (1, 2, 3, 4):
        dist = WeightedExpSum(weights=tuple(rng.uniform(0.2, 4.0, size=L)))
        worst_sum = max(worst_sum, abs(hypoexp_coefficients(dist).sum() - 1.0))
        samples = np.sort(dist.sample(rng, 10**6))
        grid = samples[:: len(samples) // 500]
        emp = np.searchsorted(samples, grid, side="right") / len(samples)
        worst_sup = max(worst_sup, float(np.max(np.abs(hypoexp_cdf(dist, grid) - emp))))
    dt = time.perf_counter() - t0
    ok = worst_sup <= 3e-3 and worst_sum <= 1e-10 and dt < 10.0
    tell(
        capsys,
        f"[acceptance 1] hypoexp sampling oracle: {'PASS' if ok else 'FAIL'} "
        f"(sup-norm {worst_sup:.2e} <= 3e-3, coeff-sum err {worst_sum:.1e} <= 1e-10, "
        f"{dt:.1f}s < 10s)",
    )
    assert worst_sup <= 3e-3
    assert worst_sum <= 1e-10
    assert dt < 10.0


def test_listen_fraction_distribution_law(capsys):
    """Empirical listen-fraction CDF against the analytic law, three setups."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for d_rk, pbar, rate in ((0.25, 100.0, 0.25), (0.5, 10.0, 1.0), (0.8, 50.0, 2.0)):
        theta = np.sort(listen_fraction_rc(rng.exponential(size=10**6), d_rk, pbar, rate, GAMMA))
        grid = np.linspace(0.02, 0.998, 250)
        emp = np.searchsorted(theta, grid, side="right") / theta.size
        law = listen_fraction_cdf(grid, d_rk**GAMMA, pbar, rate)
        worst = max(worst, float(np.max(np.abs(emp - law))))
    dt = time.perf_counter() - t0
    ok = worst <= 3e-3 and dt < 10.0
    tell(
        capsys,
        f"[acceptance 2] listen-fraction law: {'PASS' if ok else 'FAIL'} "
        f"(sup-norm {worst:.2e} <= 3e-3 over 3 setups, {dt:.1f}s < 10s)",
    )
    assert worst <= 3e-3
    assert dt < 10.0


def test_direct_link_closed_form_sweep(capsys):
    """Monte Carlo within its own 95% interval of the closed form, 0-20 dB."""
    t0 = time.perf_counter()
    pl = polar_placement(UNIT_CIRCLE)
    grid = tuple(float(x) for x in range(0, 22, 2))
    ests = sweep_fixed_placement(parse_strategy("mac", 3), pl, PowerConfig(), grid, seed=7)
    worst_z = 0.0
    for snr, est in zip(grid, ests):
        cf = mac_outage(PowerConfig().with_user_power(10 ** (snr / 10.0)), 1.0, GAMMA, 3)
        worst_z = max(worst_z, abs(est.p_hat - cf) / est.ci95)
    ref_cf = mac_outage(PowerConfig(), 1.0, GAMMA, 3)
    ref_ok = abs(ref_cf - 0.061121) < 5e-7 and abs(ests[0].p_hat - ref_cf) <= ests[0].ci95
    dt = time.perf_counter() - t0
    ok = worst_z <= 1.0 and ref_ok and dt < 30.0
    tell(
        capsys,
        f"[acceptance 3] direct-link closed form: {'PASS' if ok else 'FAIL'} "
        f"(max |error|/CI95 {worst_z:.2f} <= 1 over 11 points, reference 0.061121 "
        f"covered={ref_ok}, {dt:.1f}s < 30s)",
    )
    assert worst_z <= 1.0
    assert ref_ok
    assert dt < 30.0


def test_high_snr_diversity_slopes(capsys, slope_sweeps):
    """Fitted decay orders over 30-45 dB on the fixed rim cluster."""
    checks = [
        ("rc-ddf", slope_of(GRID_45, slope_sweeps["rc-ddf"]), 1.75, 2.25),
        ("uc3-ddf", slope_of(GRID_45, slope_sweeps["uc3-ddf"]), 2.75, 3.25),
        ("uc2-af", slope_of(GRID_45, slope_sweeps["uc2-af"]), None, 2.25),
        ("uc3-af", slope_of(GRID_45, slope_sweeps["uc3-af"]), 2.75, 3.25),
    ]
    dt = slope_sweeps["elapsed"]
    ok = dt < 600.0
    parts = []
    for name, got, lo, hi in checks:
        hit = (lo is None or got >= lo) and got <= hi
        ok = ok and hit
        bound = f"<={hi}" if lo is None else f"in [{lo},{hi}]"
        parts.append(f"{name}={got:.3f} {bound}")
    tell(
        capsys,
        f"[acceptance 4] diversity slopes: {'PASS' if ok else 'FAIL'} "
        f"({', '.join(parts)}, {dt:.0f}s < 600s)",
    )
    for name, got, lo, hi in checks:
        if lo is not None:
            assert got >= lo, name
        assert got <= hi, name
    assert dt < 600.0


def test_user_separation_changes_measured_slope(capsys):
    """Shared-slot cooperation: spread users decay near order 2 at high SNR,
    a tight cluster exceeds 2.5 already at mid SNR while the closeness
    condition holds at every window point."""
    t0 = time.perf_counter()
    spread = sweep_fixed_placement(
        parse_strategy("uc2-ddf", 3), polar_placement(SPREAD_USERS),
        PowerConfig(rate=7.0), GRID_45, SEED, trial_ceiling=10**7,
    )
    spread_slope = slope_of(GRID_45, spread)

    pl = polar_placement(TIGHT_CLUSTER)
    clust = sweep_fixed_placement(
        parse_strategy("uc2-ddf", 3), pl, PowerConfig(rate=4.0), GRID_45, SEED,
        trial_ceiling=10**7,
    )
    cl_pts = [(s, e.p_hat) for s, e in zip(GRID_45, clust) if 10 <= s <= 25 and e.p_hat > 0]
    clust_slope = diversity_slope(cl_pts)

    strategy = parse_strategy("uc2-ddf", 3)
    helpers = [user_id(j) for j in strategy.helpers(1)]
    dd = np.array(
        [pl.distance(DESTINATION, user_id(1)) ** GAMMA]
        + [pl.distance(DESTINATION, h) ** GAMMA for h in helpers]
    )
    dk = np.array([pl.distance(h, user_id(1)) ** GAMMA for h in helpers])
    condition = all(
        clustering_condition(
            4.0,
            user_burst_power(strategy, PowerConfig(rate=4.0).with_user_power(10 ** (s / 10)), 1),
            np.ones(3), dd, dk,
        )[0]
        for s in GRID_45
        if 10 <= s <= 25
    )
    dt = time.perf_counter() - t0
    ok = abs(spread_slope - 2.0) <= 0.3 and clust_slope > 2.5 and condition and dt < 600.0
    tell(
        capsys,
        f"[acceptance 5] separation vs slope: {'PASS' if ok else 'FAIL'} "
        f"(spread {spread_slope:.3f} in [1.7,2.3] over 30-45 dB, cluster "
        f"{clust_slope:.3f} > 2.5 over 10-25 dB, condition holds={condition}, "
        f"{dt:.0f}s < 600s)",
    )
    assert abs(spread_slope - 2.0) <= 0.3
    assert clust_slope > 2.5
    assert condition
    assert dt < 600.0


def test_analytic_bounds_sandwich_monte_carlo(capsys, slope_sweeps):
    """Estimates sit between the bound pairs (3 standard errors of slack)
    at the two highest SNR points of the slope benchmark."""
    ok = True
    parts = []
    for name in ("rc-ddf", "uc2-ddf", "uc2-af", "uc3-af"):
        for snr, est in window_points(GRID_45, slope_sweeps[name])[-2:]:
            se = est.ci95 / 1.96
            hit = est.bounds.lower - 3 * se <= est.p_hat <= est.bounds.upper + 3 * se
            ok = ok and hit
            parts.append(f"{name}@{snr:g}dB {'ok' if hit else 'MISS'}")
    tell(
        capsys,
        f"[acceptance 6] bound sandwich: {'PASS' if ok else 'FAIL'} ({', '.join(parts)})",
    )
    for name in ("rc-ddf", "uc2-ddf", "uc2-af", "uc3-af"):
        for snr, est in window_points(GRID_45, slope_sweeps[name])[-2:]:
            se = est.ci95 / 1.96
            assert est.bounds.lower - 3 * se <= est.p_hat, (name, snr)
            assert est.p_hat <= est.bounds.upper + 3 * se, (name, snr)


def interpolate_crossing(ptot_db, p_hat, level=1e-2):
    """Total power (dB) where the outage curve crosses level, log-linear."""
    for i in range(len(p_hat) - 1):
        a, b = p_hat[i], p_hat[i + 1]
        if a >= level > b and b > 0:
            xa, xb = ptot_db[i], ptot_db[i + 1]
            return xa + (math.log10(level) - math.log10(a)) * (xb - xa) / (
                math.log10(b) - math.log10(a)
            )
    return None


@pytest.fixture(scope="module")
def processing_cost_curves():
    names = ("mac", "rc-ddf", "uc2-ddf", "uc3-ddf", "rc-af", "uc3-af")
    grid = tuple(float(x) for x in range(-12, 14, 2))
    cfg = ExperimentConfig(
        geometry=GP,
        power=PowerConfig(rate=0.25, relay_power_factor=0.5),
        strategies=tuple(parse_strategy(n, 3) for n in names),
        snr_db=grid,
        num_placements=100,
        master_seed=SEED,
    )
    t0 = time.perf_counter()
    curves = {}
    for idx, s in enumerate(cfg.strategies):
        curves[s.name] = [e.p_hat for e in area_averaged_outage(cfg, s, strategy_index=idx)]
    stars = {}
    for name in names:
        s = parse_strategy(name, 3)
        stars[name] = []
        for eta in (0.01, 0.5, 1.0):
            ptot = [
                10 * math.log10(
                    total_power(
                        s,
                        PowerConfig(
                            user_power=10 ** (snr / 10.0), rate=0.25,
                            relay_power_factor=0.5, encode_factor=eta, decode_factor=eta,
                        ),
                    )
                )
                for snr in grid
            ]
            stars[name].append(interpolate_crossing(ptot, curves[name]))
    stars["elapsed"] = time.perf_counter() - t0
    return stars


def test_processing_cost_shifts_total_power(capsys, processing_cost_curves):
    """At 1e-2 outage the total power budget grows strictly with the
    processing-cost factor for every cooperative strategy."""
    stars = processing_cost_curves
    dt = stars["elapsed"]
    ok = dt < 900.0
    parts = []
    for name in ("rc-ddf", "uc2-ddf", "uc3-ddf", "rc-af", "uc3-af"):
        xs = stars[name]
        mono = None not in xs and xs[0] < xs[1] < xs[2]
        ok = ok and mono
        shown = ",".join("None" if x is None else f"{x:.3f}" for x in xs)
        parts.append(f"{name}:[{shown}]{'^' if mono else '!'}")
    tell(
        capsys,
        f"[acceptance 7a] processing cost ordering: {'PASS' if ok else 'FAIL'} "
        f"(P_tot* dB at eta 0.01/0.5/1: {' '.join(parts)}, {dt:.0f}s < 900s)",
    )
    for name in ("rc-ddf", "uc2-ddf", "uc3-ddf", "rc-af", "uc3-af"):
        xs = stars[name]
        assert None not in xs, name
        assert xs[0] < xs[1] < xs[2], name
    assert dt < 900.0


def test_direct_link_processing_shift_constant(capsys, processing_cost_curves):
    """Pinned expectation for the direct-only shift between eta 0.01 and 1.

    The pinned constant assumes the 1e-2 crossing sits at unit transmit
    power and that a direct user pays encode plus decode; the measured
    crossing sits near 2.3 and a source pays encode only, so the measured
    shift is smaller.  Kept at the pinned value rather than retuned.
    """
    xs = processing_cost_curves["mac"]
    assert None not in xs
    shift = xs[2] - xs[0]
    pinned = 10 * math.log10((3 + 3 * 2 * 0.25 * 1.0) / (3 + 3 * 2 * 0.25 * 0.01))
    ok = abs(shift - pinned) <= 0.05
    tell(
        capsys,
        f"[acceptance 7b] direct-link shift constant: {'PASS' if ok else 'FAIL'} "
        f"(measured {shift:.4f} dB vs pinned {pinned:.4f} dB, tolerance 0.05)",
    )
    assert ok, f"measured {shift:.4f} dB, pinned {pinned:.4f} dB"


def test_csv_byte_identity_across_workers(capsys, tmp_path):
    """Same CSV bytes for worker counts 1, 2, 8 and across reruns."""
    t0 = time.perf_counter()
    raw = {
        "seed": 11,
        "placements": 4,
        "snr_db": [0.0, 10.0, 20.0],
        "target_events": 100,
        "trial_ceiling": 120000,
        "power": {"rate": 1.0},
        "strategies": ["mac", "rc-ddf", "uc2-af"],
    }
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(yaml.safe_dump(raw))
    blobs = []
    for i, workers in enumerate((1, 2, 8, 1)):
        out = tmp_path / f"run{i}.csv"
        rc = main(
            ["run", "-c", str(cfg_path), "-o", str(out), "--workers", str(workers)]
        )
        assert rc == 0
        blobs.append(out.read_bytes())
    dt = time.perf_counter() - t0
    identical = len(set(blobs)) == 1
    ok = identical and dt < 60.0
    tell(
        capsys,
        f"[acceptance 8] CSV byte identity: {'PASS' if ok else 'FAIL'} "
        f"(workers 1/2/8 plus rerun identical={identical}, {dt:.1f}s < 60s)",
    )
    assert identical
    assert dt < 60.0
