//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twobody_core::bifurcation::{self, Family};
use twobody_core::contact;
use twobody_core::dynamics;
use twobody_core::level_sets::{self, CompactPoint, TopologyClass};
use twobody_core::roots::isolate_roots;
use twobody_core::{Execution, ParamPair, ReducedState, Tolerances};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_budget(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, format!("runtime {elapsed:?} exceeds {budget:?}"))
}

fn pp(c: f64, h: f64) -> ParamPair {
    ParamPair { c, h }
}

/// Quartic at the separation point and its quadruple root.
fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let q = bifurcation::quartic_coeffs(pp(2.0, 1.0));
    let roots = isolate_roots(&q, 0.0, 2.0, 1e-8, 1e-12).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    // 1/4 (y - 1)^4
    ensure(q == [0.25, -1.0, 1.5, -1.0, 0.25], format!("coefficients {q:?}"))?;
    ensure(roots.len() == 1, format!("{} roots reported", roots.len()))?;
    let r = &roots[0];
    ensure(r.multiplicity == 4, format!("multiplicity {}", r.multiplicity))?;
    ensure((r.value - 1.0).abs() < 1e-8, format!("root {}", r.value))?;
    within_budget(elapsed, Duration::from_millis(1))?;
    Ok(format!("root {} x{}, {elapsed:?}", r.value, r.multiplicity))
}

/// Equilibrium curves against the implicit bifurcation equation.
fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let rep = bifurcation::verify_coincidence(1000, Execution::default()).map_err(|e| e.to_string())?;
    let eq_pos = bifurcation::curve_from_equilibria(Family::Equator, 1.0).map_err(|e| e.to_string())?;
    let eq_neg = bifurcation::curve_from_equilibria(Family::Equator, -1.0).map_err(|e| e.to_string())?;
    let mut min_c = f64::INFINITY;
    let mut max_gap = 0.0f64;
    for i in 1..=2000 {
        let m3 = -10.0 + 20.0 * i as f64 / 2001.0;
        let p = bifurcation::curve_from_equilibria(Family::Equator, m3).map_err(|e| e.to_string())?;
        min_c = min_c.min(p.c);
        max_gap = max_gap.max((p.h - 0.5 * p.c).abs());
    }
    let elapsed = t0.elapsed();
    ensure(rep.tan_max_relative < 1e-8, format!("tan-family residual {:e}", rep.tan_max_relative))?;
    ensure(rep.equator_max == 0.0 && max_gap == 0.0, format!("h - C/2 = {:e}", rep.equator_max.max(max_gap)))?;
    ensure(eq_pos == pp(2.0, 1.0) && eq_neg == pp(2.0, 1.0), format!("m3 = +-1 gives {eq_pos:?}, {eq_neg:?}"))?;
    ensure(min_c >= 2.0 && rep.equator_min_c == 2.0, format!("equator min C {min_c}"))?;
    within_budget(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "tan residual {:.2e} (abs {:.2e}), equator min C {}, {elapsed:?}",
        rep.tan_max_relative, rep.tan_max_absolute, rep.equator_min_c
    ))
}

/// Quartic hole count against the flood-fill oracle. Returns the 4-hole
/// pairs found for criterion 4.
fn criterion_3(four_hole: &mut Vec<ParamPair>) -> Outcome {
    let t0 = Instant::now();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pairs = vec![pp(6.02, 2.7), pp(6.07, 2.25), pp(1.0, 20.0)];
    let mut excluded = 0;
    while pairs.len() < 203 {
        let p = pp(rng.gen_range(0.1..=10.0), rng.gen_range(-20.0..=20.0));
        if bifurcation::distance_to_locus(p) < 1e-3 {
            excluded += 1;
            continue;
        }
        pairs.push(p);
    }
    let mut histogram = [0usize; 3];
    let mut warnings = 0;
    for p in &pairs {
        let fast = level_sets::hole_count_fast(*p, &tol).map_err(|e| format!("{p:?}: {e}"))?;
        let oracle = level_sets::hole_count_oracle(*p, 512, 1024, Execution::default()).map_err(|e| e.to_string())?;
        ensure(fast == oracle.holes, format!("{p:?}: fast {fast} vs oracle {}", oracle.holes))?;
        ensure(matches!(fast, 0 | 2 | 4), format!("{p:?}: {fast} holes"))?;
        histogram[fast / 2] += 1;
        warnings += usize::from(oracle.resolution_warning);
        if fast == 4 {
            four_hole.push(*p);
        }
    }
    let elapsed = t0.elapsed();
    within_budget(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "{} pairs agree, holes 0/2/4 = {}/{}/{}, {excluded} near-locus draws skipped, {warnings} resolution warnings, {elapsed:.2?}",
        pairs.len(),
        histogram[0],
        histogram[1],
        histogram[2]
    ))
}

fn criterion_4(four_hole: &[ParamPair]) -> Outcome {
    let tol = Tolerances::default();
    for h in [-10.0, 0.0, 3.5] {
        let got = level_sets::classify_topology(pp(0.0, h), &tol);
        ensure(got == TopologyClass::Circle, format!("C = 0, h = {h}: {}", got.as_str()))?;
    }
    let got = level_sets::classify_topology(pp(2.0, -10.0), &tol);
    ensure(got == TopologyClass::S1xS2, format!("(2, -10): {}", got.as_str()))?;
    ensure(!four_hole.is_empty(), "no 4-hole pair in the sweep")?;
    for p in four_hole {
        let got = level_sets::classify_topology(*p, &tol);
        ensure(got == TopologyClass::ConnSum3S1xS2, format!("{p:?}: {}", got.as_str()))?;
    }
    Ok(format!("{} four-hole pairs classified {}", four_hole.len(), TopologyClass::ConnSum3S1xS2.as_str()))
}

/// Finite-difference `L_X omega = omega`.
fn criterion_5() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let theta = rng.gen_range(0.1..=1.4) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let q = rng.gen_range(0.1..PI - 0.1);
        let p = rng.gen_range(-5.0..5.0);
        let phi = rng.gen_range(0.0..TAU);
        let c = rng.gen_range(0.25..4.0);
        let r = contact::lie_derivative_residual(q, p, theta, phi, c, 1e-5).map_err(|e| e.to_string())?;
        worst = worst.max(r);
    }
    let elapsed = t0.elapsed();
    ensure(worst < 1e-6, format!("max residual {worst:e}"))?;
    within_budget(elapsed, Duration::from_secs(1))?;
    Ok(format!("max residual {worst:.2e}, {elapsed:?}"))
}

/// Contact certificate at `(C, h) = (0.64, -1000)`.
fn criterion_6() -> Outcome {
    let t0 = Instant::now();
    let (c, h) = (0.64, -1000.0);
    let exec = Execution::default();
    let grid = contact::f_theta_grid_min(c, h, 10_000, exec);
    let fmin = grid.min.ok_or("no boundary point on the grid")?;
    let tr = contact::min_transversality(pp(c, h), 10_000, 6, &Tolerances::default(), exec).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let mut eq_min = f64::INFINITY;
    for _ in 0..100_000 {
        let v = contact::equator_transversality(
            rng.gen_range(-10.0..10.0),
            rng.gen_range(1e-9..PI),
            rng.gen_range(0.0..TAU),
            rng.gen_range(0.0..10.0),
        );
        eq_min = eq_min.min(v);
    }
    let elapsed = t0.elapsed();
    ensure(fmin > 0.0, format!("min F = {fmin:e}"))?;
    ensure(tr.samples == 10_000 && tr.min > 0.0, format!("min X(H) = {:e} over {}", tr.min, tr.samples))?;
    ensure(eq_min > 0.0, format!("equator min {eq_min:e}"))?;
    within_budget(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "min F {fmin:.3e} over {} boundary latitudes ({} without boundary point), min X(H) {:.3e}, equator min {eq_min:.3e}, {elapsed:.2?}",
        grid.evaluated, grid.skipped, tr.min
    ))
}

/// `theta^2 F -> (2C + 3) / C^2`.
fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for c in [0.5, 1.0, 2.0] {
        let lead = (2.0 * c + 3.0) / (c * c);
        let t = 1e-3;
        let v = t * t * contact::f_theta_extended(t, c, -10.0);
        worst = worst.max((v - lead).abs() / lead);
    }
    ensure(worst < 1e-2, format!("relative error {worst:e} at theta = 1e-3"))?;
    // Leading coefficient from Richardson extrapolation in theta^2.
    let lead_of = |c: f64, h: f64| {
        let g = |t: f64| t * t * contact::f_theta_extended(t, c, h);
        let t = 1e-4;
        (4.0 * g(0.5 * t) - g(t)) / 3.0
    };
    let mut spread = 0.0f64;
    for c in [0.5, 1.0, 2.0] {
        let l: Vec<f64> = [-1e2, -1e3, -1e4].iter().map(|&h| lead_of(c, h)).collect();
        let lo = l.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max((hi - lo) / lo.abs());
    }
    ensure(spread < 1e-3, format!("leading coefficient varies by {spread:e} across h"))?;
    Ok(format!("max relative error {worst:.2e}, h-spread of leading coefficient {spread:.2e}"))
}

fn random_state(rng: &mut ChaCha8Rng) -> ReducedState {
    ReducedState::new(
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

/// Largest `|xi|` admitted along a test trajectory; keeps `q` at least
/// `acot(10) ~ 0.1` away from collision and antipodal configurations.
const XI_TEST_BOUND: f64 = 10.0;

fn relative_drift(s0: ReducedState, t_end: f64, dt: f64) -> Result<(f64, f64, f64), String> {
    let tr = dynamics::integrate(s0, t_end, dt).map_err(|e| e.to_string())?;
    let max_xi = tr.states.iter().map(|s| s.xi.abs()).fold(0.0, f64::max);
    let (dh, dc) = dynamics::drift_report(&tr);
    Ok((dh, dc, max_xi))
}

/// Conservation, step-halving and fixed relative equilibria.
fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut states = Vec::new();
    let mut rejected = 0;
    let mut worst = (0.0f64, 0.0f64);
    while states.len() < 20 {
        let s0 = random_state(&mut rng);
        match relative_drift(s0, 10.0, 1e-3) {
            Ok((dh, dc, max_xi)) if max_xi <= XI_TEST_BOUND => {
                worst = (worst.0.max(dh), worst.1.max(dc));
                states.push(s0);
            }
            _ => rejected += 1,
        }
    }
    ensure(worst.0 < 1e-6 && worst.1 < 1e-6, format!("drift H {:e}, C {:e}", worst.0, worst.1))?;
    // Halving is measured where truncation dominates roundoff.
    let (coarse, fine) = (0.02, 0.01);
    let mut ratios = Vec::new();
    for s0 in &states {
        let (a, _, _) = relative_drift(*s0, 10.0, coarse)?;
        let (b, _, _) = relative_drift(*s0, 10.0, fine)?;
        ratios.push(a / b);
    }
    let rmin = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = ratios.iter().copied().fold(0.0, f64::max);
    ensure(rmin >= 8.0 && rmax <= 32.0, format!("halving ratios in [{rmin:.2}, {rmax:.2}]"))?;
    // Tan-family members near q = pi are unstable and leave a 1e-13 field
    // residual behind within a few time units, so fixity is checked over t = 1.
    let mut eq_dev = 0.0f64;
    for k in 0..10 {
        let q = 0.3 + 2.5 * k as f64 / 9.0;
        let m3 = [0.5, 1.0, -1.0, 1.7, -2.5, 3.0, 0.8, -0.6, 2.0, 1.2][k];
        for e in [
            bifurcation::equilibrium_tan_family(q, 1.0),
            bifurcation::equilibrium_tan_family(q, -1.0),
            bifurcation::equilibrium_equator_family(m3),
        ] {
            let e = e.map_err(|e| e.to_string())?;
            let tr = dynamics::integrate(e.state, 1.0, 1e-3).map_err(|e| e.to_string())?;
            for s in &tr.states {
                for (a, b) in s.to_array().iter().zip(e.state.to_array()) {
                    eq_dev = eq_dev.max((a - b).abs());
                }
            }
        }
    }
    ensure(eq_dev < 1e-8, format!("equilibrium deviation {eq_dev:e}"))?;
    Ok(format!(
        "drift H {:.2e} C {:.2e} ({rejected} near-collision draws skipped), halving ratios [{rmin:.1}, {rmax:.1}] at dt {coarse}->{fine}, equilibrium deviation {eq_dev:.1e}",
        worst.0, worst.1
    ))
}

/// Jacobian rank 3 off the added points, below 3 on them.
fn criterion_9() -> Outcome {
    let tol = Tolerances::default();
    let mut checked = 0;
    for (k, p) in [pp(1.5, -0.7), pp(0.64, -1000.0), pp(6.02, 2.7), pp(3.0, 4.0)].into_iter().enumerate() {
        ensure(bifurcation::distance_to_locus(p) > 1e-3, format!("{p:?} is near the locus"))?;
        let pts = level_sets::sample_level_set(p, 25, 90 + k as u64, &tol, Execution::default())
            .map_err(|e| format!("{p:?}: {e}"))?;
        for sp in pts {
            let cp = CompactPoint::from_state(&sp.to_reduced());
            ensure(cp.z < 1.0, "sample mapped to z = 1")?;
            let r = level_sets::jacobian_rank(&cp, p, &tol).map_err(|e| format!("{p:?}: {e}"))?;
            ensure(r == 3, format!("{p:?}: rank {r} at {cp:?}"))?;
            checked += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut singular = 0;
    for _ in 0..100 {
        let p = pp(rng.gen_range(0.1..10.0), rng.gen_range(-20.0..20.0));
        let theta = rng.gen_range(-FRAC_PI_2..FRAC_PI_2);
        let phi = rng.gen_range(0.0..TAU);
        let r = p.c.sqrt();
        let m = [r * theta.cos() * phi.cos(), r * theta.cos() * phi.sin(), r * theta.sin()];
        let cp = CompactPoint::at_infinity(m);
        let rank = level_sets::jacobian_rank(&cp, p, &tol).map_err(|e| e.to_string())?;
        ensure(rank < 3, format!("rank {rank} at {cp:?}"))?;
        singular += 1;
    }
    Ok(format!("{checked} points with z < 1 at rank 3, {singular} points with z = 1 below rank 3"))
}

/// Analytic gradient of H against central differences.
fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s = ReducedState::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let g = s.grad_hamiltonian();
        let x = s.to_array();
        for i in 0..5 {
            let e = 1e-6;
            let (mut a, mut b) = (x, x);
            a[i] += e;
            b[i] -= e;
            let fd = (ReducedState::from_array(a).hamiltonian() - ReducedState::from_array(b).hamiltonian()) / (2.0 * e);
            worst = worst.max((fd - g[i]).abs());
        }
    }
    ensure(worst < 1e-6, format!("max gradient error {worst:e}"))?;
    Ok(format!("max gradient error {worst:.2e}"))
}

fn main() -> ExitCode {
    // Warm up the rayon pool so its start-up cost is not billed to a criterion.
    let _ = twobody_core::par::map_indexed(64, Execution::default(), |i| i);
    let mut four_hole = Vec::new();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "quadruple root at the separation point", criterion_1()));
    results.push((2, "equilibrium curves coincide with the bifurcation locus", criterion_2()));
    results.push((3, "hole count agrees with the flood-fill oracle", criterion_3(&mut four_hole)));
    results.push((4, "topology classification", criterion_4(&four_hole)));
    results.push((5, "Liouville field satisfies L_X omega = omega", criterion_5()));
    results.push((6, "contact certificate at (0.64, -1000)", criterion_6()));
    results.push((7, "equator expansion of F", criterion_7()));
    results.push((8, "conservation, step halving and fixed equilibria", criterion_8()));
    results.push((9, "Jacobian rank off and on the added points", criterion_9()));
    results.push((10, "analytic gradient of H", criterion_10()));
    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {n:>2}: {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n:>2}: {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
