//! Seller-side bid formation.
//!
//! For a fixed resource bundle a seller minimises `I0 * E_round` over
//! transmit power, CPU frequency and local accuracy subject to
//! `I0 * T_round <= T_max`. The problem is non-convex, so [`solve_bid`]
//! alternates two exactly-solvable blocks until the objective settles:
//!
//! 1. accuracy fixed: the smallest deadline-feasible power
//!    ([`min_power_for_deadline`]), then the smallest feasible CPU frequency
//!    ([`min_frequency_for_deadline`]);
//! 2. power and frequency fixed: the feasible accuracy interval
//!    ([`accuracy_feasible_interval`]) and the Dinkelbach minimiser of the
//!    resulting fractional objective ([`dinkelbach_accuracy`]).
//!
//! Upload energy `sigma * p / r(p)` is strictly increasing in `p`, so the
//! power block reduces to root-finding on the monotone rate function.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::fl_model::{comp_energy, comp_time, global_iterations, local_iterations, uplink_rate};
use crate::model::{Bid, BidSolution, SystemConfig, UserProfile};

/// Relative width at which the power bisection stops.
pub const POWER_TOL: f64 = 1e-12;
/// Width at which the accuracy-root bisections stop.
pub const ACCURACY_ROOT_TOL: f64 = 1e-12;
/// Dinkelbach stops once |H(xi)| <= DINKELBACH_TOL * (gamma1 + gamma2).
pub const DINKELBACH_TOL: f64 = 1e-8;
pub const DINKELBACH_MAX_ITERS: u32 = 200;
/// Outer alternation stops on a relative objective change below this.
pub const OUTER_TOL: f64 = 1e-6;
pub const OUTER_MAX_ITERS: u32 = 100;

/// Smallest power in `[p_min, p_max]` whose upload fits in what is left of
/// `time_budget` (a per-round budget) after local computation.
pub fn min_power_for_deadline(
    config: &SystemConfig,
    user: &UserProfile,
    antennas: u32,
    subchannels: u32,
    frequency: f64,
    eps: f64,
    time_budget: f64,
) -> Result<f64> {
    if antennas < 2 {
        return Err(Error::UnreachableUplink);
    }
    let compute = local_iterations(eps)? * comp_time(user, frequency);
    let upload_budget = time_budget - compute;
    if upload_budget <= 0.0 {
        return Err(Error::BundleInfeasible(
            "local computation exhausts the round budget",
        ));
    }
    let required = config.sigma_bits / upload_budget;
    let rate = |p: f64| uplink_rate(config, user, p, antennas, subchannels);

    if rate(user.p_max) < required {
        return Err(Error::BundleInfeasible(
            "p_max cannot meet the upload deadline",
        ));
    }
    if rate(user.p_min) >= required {
        return Ok(user.p_min);
    }
    // invariant: rate(lo) < required <= rate(hi)
    let (mut lo, mut hi) = (user.p_min, user.p_max);
    while hi - lo > POWER_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if rate(mid) >= required {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest CPU frequency meeting the deadline given the per-round upload time.
pub fn min_frequency_for_deadline(
    config: &SystemConfig,
    user: &UserProfile,
    eps: f64,
    comm_time: f64,
) -> Result<f64> {
    let rounds = global_iterations(config, eps)?;
    let residual = config.t_max - rounds * comm_time;
    if residual <= 0.0 {
        return Err(Error::BundleInfeasible("upload alone exceeds the deadline"));
    }
    let needed = rounds * local_iterations(eps)? * user.cycles_per_pass() / residual;
    if needed > user.f_max {
        return Err(Error::BundleInfeasible("f_max cannot meet the deadline"));
    }
    Ok(needed.max(user.f_min))
}

/// Deadline slack in accuracy form: the largest per-round upload time the
/// deadline tolerates at accuracy `eps`. Concave on (0,1).
pub fn upload_slack(config: &SystemConfig, user: &UserProfile, frequency: f64, eps: f64) -> f64 {
    (1.0 - eps) / config.iteration_scale() * config.t_max
        + user.cycles_per_pass() * eps.log2() / frequency
}

/// Interval of accuracies at which an upload of `comm_time` seconds per round
/// still meets the deadline, i.e. the superlevel set of [`upload_slack`].
pub fn accuracy_feasible_interval(
    config: &SystemConfig,
    user: &UserProfile,
    frequency: f64,
    comm_time: f64,
) -> Result<(f64, f64)> {
    let slack = |e: f64| upload_slack(config, user, frequency, e);
    let peak =
        user.cycles_per_pass() * config.iteration_scale() / (frequency * LN_2 * config.t_max);
    if peak >= 1.0 {
        // slack increases towards slack(1) = 0
        return Err(Error::NoFeasibleAccuracy {
            max_slack: 0.0,
            comm_time,
        });
    }
    let best = slack(peak);
    if best < comm_time {
        return Err(Error::NoFeasibleAccuracy {
            max_slack: best,
            comm_time,
        });
    }

    // Left root, searched in log space since it can sit many decades below
    // the peak. If even the smallest normal float is feasible the root is
    // below representable range and we report that float.
    let lower = if slack(f64::MIN_POSITIVE) >= comm_time {
        f64::MIN_POSITIVE
    } else {
        let (mut lo, mut hi) = (f64::MIN_POSITIVE.ln(), peak.ln());
        // invariant: slack(e^lo) < comm_time <= slack(e^hi)
        while hi.exp() - lo.exp() > ACCURACY_ROOT_TOL * hi.exp() {
            let mid = 0.5 * (lo + hi);
            if slack(mid.exp()) >= comm_time {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi.exp()
    };

    // invariant: slack(lo) >= comm_time > slack(hi)
    let (mut lo, mut hi) = (peak, 1.0);
    while hi - lo > ACCURACY_ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if slack(mid) >= comm_time {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lower.min(peak), lo))
}

/// Fractional accuracy objective `(gamma1 log2(1/eps) + gamma2) / (1 - eps)`.
pub fn accuracy_objective(gamma1: f64, gamma2: f64, eps: f64) -> f64 {
    (gamma1 * -eps.log2() + gamma2) / (1.0 - eps)
}

/// Dinkelbach parametric function evaluated at its minimiser over the
/// interval; zero exactly at the optimal ratio.
pub fn dinkelbach_residual(gamma1: f64, gamma2: f64, lo: f64, hi: f64, xi: f64) -> (f64, f64) {
    let eps = (gamma1 / (LN_2 * xi)).clamp(lo, hi);
    let h = gamma1 * -eps.log2() + gamma2 - xi * (1.0 - eps);
    (eps, h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DinkelbachOutcome {
    pub accuracy: f64,
    /// Optimal ratio (the objective value at `accuracy`).
    pub ratio: f64,
    /// |H| at the last parametric step.
    pub residual: f64,
    pub iterations: u32,
    pub converged: bool,
}

/// Minimise [`accuracy_objective`] over `[lo, hi]` with Dinkelbach's method.
pub fn dinkelbach_accuracy(
    gamma1: f64,
    gamma2: f64,
    lo: f64,
    hi: f64,
) -> Result<DinkelbachOutcome> {
    if !(lo > 0.0 && lo <= hi && hi < 1.0) {
        return Err(Error::Domain {
            op: "dinkelbach_accuracy",
            name: "interval",
            value: hi,
        });
    }
    if gamma1.is_nan() || gamma1 <= 0.0 || gamma2 < 0.0 {
        return Err(Error::Domain {
            op: "dinkelbach_accuracy",
            name: "gamma1",
            value: gamma1,
        });
    }
    let scale = gamma1 + gamma2;
    let mut eps = 0.5 * (lo + hi);
    let mut xi = accuracy_objective(gamma1, gamma2, eps);
    let mut best = (xi, eps);
    for iteration in 1..=DINKELBACH_MAX_ITERS {
        let (next, h) = dinkelbach_residual(gamma1, gamma2, lo, hi, xi);
        eps = next;
        xi = accuracy_objective(gamma1, gamma2, eps);
        if xi < best.0 {
            best = (xi, eps);
        }
        if h.abs() <= DINKELBACH_TOL * scale {
            return Ok(DinkelbachOutcome {
                accuracy: eps,
                ratio: xi,
                residual: h.abs(),
                iterations: iteration,
                converged: true,
            });
        }
    }
    let (_, h) = dinkelbach_residual(gamma1, gamma2, lo, hi, best.0);
    Ok(DinkelbachOutcome {
        accuracy: best.1,
        ratio: best.0,
        residual: h.abs(),
        iterations: DINKELBACH_MAX_ITERS,
        converged: false,
    })
}

/// Where the alternation starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverStart {
    /// `p_max`, `f_max`, and the midpoint of the feasible accuracy interval.
    Default,
    /// A caller-supplied point; must meet the deadline.
    Point {
        power: f64,
        frequency: f64,
        accuracy: f64,
    },
}

struct Point {
    power: f64,
    frequency: f64,
    accuracy: f64,
}

fn evaluate(
    config: &SystemConfig,
    user: &UserProfile,
    antennas: u32,
    subchannels: u32,
    pt: &Point,
) -> Result<(f64, f64, f64)> {
    let rounds = global_iterations(config, pt.accuracy)?;
    let m = crate::fl_model::round_metrics(
        config,
        user,
        pt.power,
        pt.frequency,
        antennas,
        subchannels,
        pt.accuracy,
    )?;
    Ok((rounds, rounds * m.round_energy, rounds * m.round_time))
}

/// Energy-minimal operating point for the bundle `(antennas, subchannels)`.
pub fn solve_bid(
    config: &SystemConfig,
    user: &UserProfile,
    antennas: u32,
    subchannels: u32,
) -> Result<BidSolution> {
    solve_bid_from(config, user, antennas, subchannels, SolverStart::Default)
}

pub fn solve_bid_from(
    config: &SystemConfig,
    user: &UserProfile,
    antennas: u32,
    subchannels: u32,
    start: SolverStart,
) -> Result<BidSolution> {
    if antennas < 2 {
        return Err(Error::UnreachableUplink);
    }
    let unreachable = |_| Error::DeadlineUnreachable {
        antennas,
        subchannels,
    };
    let comm_time =
        |p: f64| config.sigma_bits / uplink_rate(config, user, p, antennas, subchannels);
    let scale = config.iteration_scale();

    let mut pt = match start {
        SolverStart::Default => {
            let (lo, hi) =
                accuracy_feasible_interval(config, user, user.f_max, comm_time(user.p_max))
                    .map_err(unreachable)?;
            Point {
                power: user.p_max,
                frequency: user.f_max,
                accuracy: 0.5 * (lo + hi),
            }
        }
        SolverStart::Point {
            power,
            frequency,
            accuracy,
        } => Point {
            power,
            frequency,
            accuracy,
        },
    };
    let (_, mut objective, time) =
        evaluate(config, user, antennas, subchannels, &pt).map_err(unreachable)?;
    if time > config.t_max * (1.0 + 1e-12) {
        return Err(Error::DeadlineUnreachable {
            antennas,
            subchannels,
        });
    }

    let mut trace = vec![objective];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < OUTER_MAX_ITERS {
        iterations += 1;

        // Block 1: accuracy fixed.
        let rounds = global_iterations(config, pt.accuracy)?;
        let power = min_power_for_deadline(
            config,
            user,
            antennas,
            subchannels,
            pt.frequency,
            pt.accuracy,
            config.t_max / rounds,
        )?;
        pt.power = pt.power.min(power);
        let frequency = min_frequency_for_deadline(config, user, pt.accuracy, comm_time(pt.power))?;
        pt.frequency = pt.frequency.min(frequency);

        // Block 2: power and frequency fixed.
        let comm = comm_time(pt.power);
        let (lo, hi) = accuracy_feasible_interval(config, user, pt.frequency, comm)?;
        let gamma1 = scale * comp_energy(user, pt.frequency);
        let gamma2 = scale * pt.power * comm;
        let candidate = dinkelbach_accuracy(gamma1, gamma2, lo, hi)?.accuracy;
        let (_, current, _) = evaluate(config, user, antennas, subchannels, &pt)?;
        let previous_accuracy = pt.accuracy;
        pt.accuracy = candidate;
        let (_, next, _) = evaluate(config, user, antennas, subchannels, &pt)?;
        if next > current {
            pt.accuracy = previous_accuracy;
        }
        let (_, next, _) = evaluate(config, user, antennas, subchannels, &pt)?;

        let change = (objective - next).abs();
        objective = next;
        trace.push(objective);
        if change <= OUTER_TOL * objective {
            converged = true;
            break;
        }
    }

    let (rounds, total_energy, total_time) = evaluate(config, user, antennas, subchannels, &pt)?;
    Ok(BidSolution {
        power: pt.power,
        frequency: pt.frequency,
        accuracy: pt.accuracy,
        global_iterations: rounds,
        total_energy,
        total_time,
        iterations_used: iterations,
        converged,
        objective_trace: trace,
    })
}

/// A requested resource bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub subchannels: u32,
    pub antennas: u32,
}

impl Bundle {
    pub const fn new(subchannels: u32, antennas: u32) -> Self {
        Self {
            subchannels,
            antennas,
        }
    }
}

/// How a seller reports its cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostReport {
    Truthful,
    /// Claim `factor` times the true cost.
    Scaled(f64),
}

/// One bid per feasible bundle, in bundle order. Bundles the user cannot
/// serve before the deadline, and single-antenna bundles, are skipped.
pub fn build_bid_menu(
    config: &SystemConfig,
    user: &UserProfile,
    bundles: &[Bundle],
    report: CostReport,
) -> Result<Vec<Bid>> {
    let mut bids = Vec::with_capacity(bundles.len());
    for bundle in bundles {
        if bundle.subchannels < 1
            || bundle.subchannels > user.b_cap
            || bundle.antennas < 1
            || bundle.antennas > user.a_cap
        {
            return Err(Error::InvalidConfig(format!(
                "bundle ({}, {}) exceeds the ceilings of {}",
                bundle.subchannels, bundle.antennas, user.id
            )));
        }
        if bundle.antennas < 2 {
            continue;
        }
        let Ok(solution) = solve_bid(config, user, bundle.antennas, bundle.subchannels) else {
            continue;
        };
        let claimed_cost = match report {
            CostReport::Truthful => solution.total_energy,
            CostReport::Scaled(factor) => factor * solution.total_energy,
        };
        bids.push(Bid {
            user: user.id,
            index: bids.len(),
            subchannels: bundle.subchannels,
            antennas: bundle.antennas,
            accuracy: solution.accuracy,
            claimed_cost,
            solution: Some(solution),
        });
    }
    Ok(bids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fl_model::round_metrics;
    use crate::fl_model::tests::profile;

    fn config() -> SystemConfig {
        SystemConfig {
            noise_w_per_hz: 3.98e-21,
            ..SystemConfig::default()
        }
    }

    /// Golden-section minimiser; independent of the Dinkelbach path.
    fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        while b - a > 1e-12 {
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - r * (b - a);
            d = a + r * (b - a);
        }
        0.5 * (a + b)
    }

    #[test]
    fn power_clamps_to_p_min() {
        let cfg = config();
        let user = profile();
        // Per-round budget 0.1 s at eps = 1 (no local work): the analytic
        // inverse of the rate is 6.67e-6 W, well under p_min.
        let target_rate = cfg.sigma_bits / 0.1;
        let band = 10.0 * cfg.bandwidth_hz;
        let analytic = ((target_rate / band).exp2() - 1.0) * band * cfg.noise_w_per_hz
            / (9.0 * user.channel_gain);
        assert!((analytic - 6.67e-6).abs() < 0.01e-6, "{analytic}");
        let p = min_power_for_deadline(&cfg, &user, 10, 10, 1e9, 1.0, 0.1).unwrap();
        assert_eq!(p, user.p_min);
    }

    #[test]
    fn power_infeasible_above_p_max() {
        let cfg = config();
        let user = profile();
        // rate(p_max) is about 2.4 Mbit/s; ask for 10 Mbit/s.
        let err = min_power_for_deadline(&cfg, &user, 10, 10, 1e9, 1.0, 0.01).unwrap_err();
        assert!(matches!(err, Error::BundleInfeasible(_)));
    }

    #[test]
    fn interior_power_makes_upload_tight() {
        let cfg = config();
        let user = UserProfile {
            channel_gain: 1e-11,
            ..profile()
        };
        let budget = 0.08;
        let p = min_power_for_deadline(&cfg, &user, 10, 10, 1e9, 1.0, budget).unwrap();
        assert!(p > user.p_min && p < user.p_max, "{p}");
        let upload = cfg.sigma_bits / uplink_rate(&cfg, &user, p, 10, 10);
        assert!(upload <= budget);
        assert!((budget - upload) / budget < 1e-6);
    }

    #[test]
    fn frequency_clamps_to_f_min() {
        let cfg = config();
        let user = profile();
        let rounds = global_iterations(&cfg, 0.5).unwrap();
        let unconstrained = rounds * 1.0 * user.cycles_per_pass() / (cfg.t_max - rounds * 0.01);
        assert!((unconstrained - 7.37e5).abs() < 0.01e5, "{unconstrained}");
        let f = min_frequency_for_deadline(&cfg, &user, 0.5, 0.01).unwrap();
        assert_eq!(f, user.f_min);
    }

    #[test]
    fn frequency_infeasible_without_residual_budget() {
        let cfg = config();
        let user = profile();
        let rounds = global_iterations(&cfg, 0.5).unwrap();
        let err = min_frequency_for_deadline(&cfg, &user, 0.5, cfg.t_max / rounds).unwrap_err();
        assert!(matches!(err, Error::BundleInfeasible(_)));
    }

    #[test]
    fn interior_frequency_makes_deadline_tight() {
        let cfg = SystemConfig {
            t_max: 0.5,
            ..config()
        };
        let user = profile();
        let f = min_frequency_for_deadline(&cfg, &user, 0.5, 0.01).unwrap();
        assert!(f > user.f_min && f < user.f_max, "{f}");
        let m = round_metrics(&cfg, &user, user.p_min, f, 10, 10, 0.5).unwrap();
        let total = global_iterations(&cfg, 0.5).unwrap() * (m.comp_time_per_local_iter + 0.01);
        assert!((total - cfg.t_max).abs() / cfg.t_max < 1e-6);
    }

    fn interval_profile() -> (SystemConfig, UserProfile) {
        let cfg = SystemConfig {
            t_max: 10.0,
            ..config()
        };
        (cfg, profile())
    }

    #[test]
    fn accuracy_interval_matches_grid_scan() {
        let (cfg, user) = interval_profile();
        let f = 1e8;
        let comm = 3.0;
        let (lo, hi) = accuracy_feasible_interval(&cfg, &user, f, comm).unwrap();

        let step = 1e-6;
        let feasible: Vec<f64> = (1..1_000_000)
            .map(|k| k as f64 * step)
            .filter(|&e| {
                (1.0 - e) / (cfg.c1 * (1.0 / cfg.gamma).ln()) * cfg.t_max
                    + user.cycles_per_sample * user.samples * e.log2() / f
                    >= comm
            })
            .collect();
        let scan_lo = feasible[0];
        let scan_hi = *feasible.last().unwrap();
        assert!((lo - scan_lo).abs() <= step, "{lo} vs {scan_lo}");
        assert!((hi - scan_hi).abs() <= step, "{hi} vs {scan_hi}");
    }

    #[test]
    fn accuracy_interval_collapses_at_tangency() {
        let (cfg, user) = interval_profile();
        let f = 1e8;
        let peak = user.cycles_per_pass() * cfg.iteration_scale() / (f * LN_2 * cfg.t_max);
        let top = upload_slack(&cfg, &user, f, peak);
        let (lo, hi) = accuracy_feasible_interval(&cfg, &user, f, top).unwrap();
        assert!(
            (lo - peak).abs() < 1e-6 && (hi - peak).abs() < 1e-6,
            "{lo} {hi} {peak}"
        );

        let err = accuracy_feasible_interval(&cfg, &user, f, top * 1.001).unwrap_err();
        assert!(matches!(err, Error::NoFeasibleAccuracy { .. }));
    }

    #[test]
    fn dinkelbach_matches_golden_section() {
        let out = dinkelbach_accuracy(1.0, 1.0, 0.01, 0.9).unwrap();
        let oracle = golden_min(|e| accuracy_objective(1.0, 1.0, e), 0.01, 0.9);
        assert!((oracle - 0.374).abs() < 0.005, "{oracle}");
        assert!(
            (out.accuracy - oracle).abs() < 1e-6,
            "{} vs {oracle}",
            out.accuracy
        );
        assert!(out.converged);

        let at = |e| accuracy_objective(1.0, 1.0, e);
        let best = at(out.accuracy);
        assert!(best <= at(0.01) && best <= at(0.9) && best <= at(0.455));
    }

    #[test]
    fn dinkelbach_clamps_to_lower_end() {
        // Unconstrained minimiser near 0.374 lies below the interval.
        let out = dinkelbach_accuracy(1.0, 1.0, 0.6, 0.9).unwrap();
        assert_eq!(out.accuracy, 0.6);
    }

    #[test]
    fn dinkelbach_certificate_at_interior_optimum() {
        for (g1, g2) in [(1.0, 1.0), (2.4e-3, 1e-4), (0.05, 3.0), (1.0, 0.0)] {
            let out = dinkelbach_accuracy(g1, g2, 1e-6, 1.0 - 1e-9).unwrap();
            let (_, h) = dinkelbach_residual(g1, g2, 1e-6, 1.0 - 1e-9, out.ratio);
            assert!(h.abs() < 1e-6 * (g1 + g2), "{g1} {g2}: {h}");
        }
    }

    #[test]
    fn dinkelbach_rejects_bad_interval() {
        assert!(dinkelbach_accuracy(1.0, 1.0, 0.5, 0.4).is_err());
        assert!(dinkelbach_accuracy(1.0, 1.0, 0.0, 0.4).is_err());
        assert!(dinkelbach_accuracy(0.0, 1.0, 0.1, 0.4).is_err());
    }

    #[test]
    fn loose_deadline_uses_minimum_resources() {
        let cfg = SystemConfig {
            t_max: 1e9,
            ..config()
        };
        let user = profile();
        let sol = solve_bid(&cfg, &user, 10, 10).unwrap();
        assert_eq!(sol.power, user.p_min);
        assert_eq!(sol.frequency, user.f_min);

        let a = cfg.iteration_scale();
        let g1 = a * comp_energy(&user, user.f_min);
        let m = round_metrics(&cfg, &user, user.p_min, user.f_min, 10, 10, 0.5).unwrap();
        let g2 = a * m.comm_energy;
        let oracle = golden_min(|e| accuracy_objective(g1, g2, e), 1e-9, 1.0 - 1e-9);
        assert!(
            (sol.accuracy - oracle).abs() < 1e-6,
            "{} vs {oracle}",
            sol.accuracy
        );
        assert!(sol.accuracy > 0.0 && sol.accuracy < 1.0);
    }

    #[test]
    fn objective_trace_never_increases() {
        let user = UserProfile {
            samples: 8e7,
            ..profile()
        };
        for t_max in [100.0, 200.0, 500.0] {
            let cfg = SystemConfig { t_max, ..config() };
            let sol = solve_bid(&cfg, &user, 10, 10).unwrap();
            for w in sol.objective_trace.windows(2) {
                assert!(w[1] <= w[0], "{:?}", sol.objective_trace);
            }
            assert!(sol.total_time <= cfg.t_max * (1.0 + 1e-9));
        }
    }

    #[test]
    fn restarts_agree_within_five_percent() {
        let user = profile();
        let cfg = SystemConfig {
            t_max: 150.0,
            ..config()
        };
        let a = solve_bid(&cfg, &user, 10, 10).unwrap();
        let start = SolverStart::Point {
            power: 0.5 * (user.p_min + user.p_max),
            frequency: 2e9,
            accuracy: 0.3,
        };
        let b = solve_bid_from(&cfg, &user, 10, 10, start).unwrap();
        assert!(
            (a.total_energy - b.total_energy).abs() <= 0.05 * a.total_energy.min(b.total_energy)
        );
    }

    #[test]
    fn impossible_deadline_is_reported() {
        let cfg = SystemConfig {
            t_max: 1e-3,
            ..config()
        };
        let err = solve_bid(&cfg, &profile(), 10, 10).unwrap_err();
        assert_eq!(
            err,
            Error::DeadlineUnreachable {
                antennas: 10,
                subchannels: 10
            }
        );
    }

    #[test]
    fn menu_behaviour() {
        let cfg = config();
        let user = profile();
        assert!(build_bid_menu(&cfg, &user, &[], CostReport::Truthful)
            .unwrap()
            .is_empty());

        let bundles = [
            Bundle::new(10, 10),
            Bundle::new(30, 30),
            Bundle::new(50, 50),
        ];
        let menu = build_bid_menu(&cfg, &user, &bundles, CostReport::Truthful).unwrap();
        assert_eq!(menu.len(), 3);
        for (bid, bundle) in menu.iter().zip(&bundles) {
            assert_eq!(bid.claimed_cost, bid.true_cost());
            let alone = solve_bid(&cfg, &user, bundle.antennas, bundle.subchannels).unwrap();
            assert_eq!(bid.accuracy, alone.accuracy);
            assert_eq!(bid.claimed_cost, alone.total_energy);
        }

        let inflated = build_bid_menu(&cfg, &user, &bundles, CostReport::Scaled(1.5)).unwrap();
        for (lie, truth) in inflated.iter().zip(&menu) {
            assert_eq!(lie.claimed_cost, 1.5 * truth.claimed_cost);
        }
    }

    #[test]
    fn menu_skips_single_antenna_and_rejects_oversized() {
        let cfg = config();
        let user = profile();
        let menu = build_bid_menu(
            &cfg,
            &user,
            &[Bundle::new(5, 1), Bundle::new(5, 5)],
            CostReport::Truthful,
        )
        .unwrap();
        assert_eq!(menu.len(), 1);
        assert_eq!(menu[0].index, 0);
        assert_eq!(menu[0].antennas, 5);
        assert!(build_bid_menu(&cfg, &user, &[Bundle::new(60, 5)], CostReport::Truthful).is_err());
    }
}
