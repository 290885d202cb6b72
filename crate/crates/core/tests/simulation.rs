//! Disc-averaged and per-position analytics against end-to-end simulation.

use uavcov::coverage::{self, Scheme};
use uavcov::montecarlo;
use uavcov::SystemParams;

fn close(name: &str, analytic: f64, simulated: f64, tol: f64) {
    println!("{name}: analytic {analytic:.4}, simulated {simulated:.4}");
    assert!((analytic - simulated).abs() <= tol, "{name}: {analytic} vs {simulated}");
}

#[test]
fn area_fractions_match_classification() {
    let p = SystemParams::default();
    let a = coverage::area_fractions(&p).unwrap().fractions();
    let s = montecarlo::estimate_area_fractions(&p, 20_000, 17).unwrap().fractions();
    for i in 0..3 {
        close(&format!("f{}", i + 1), a[i], s[i], 0.01);
    }
}

#[test]
fn area_fractions_at_high_delta() {
    let p = SystemParams {
        delta: 0.8,
        ..SystemParams::default()
    };
    let a = coverage::area_fractions(&p).unwrap().fractions();
    let s = montecarlo::estimate_area_fractions(&p, 20_000, 18).unwrap().fractions();
    for i in 0..3 {
        close(&format!("f{} at delta 0.8", i + 1), a[i], s[i], 0.01);
    }
}

#[test]
fn region_probabilities_match() {
    let p = SystemParams::default();
    for r0 in [100.0, 350.0, 500.0] {
        let a = coverage::region_probabilities(&p, r0).unwrap();
        let s = montecarlo::estimate_region_probabilities(&p, r0, 20_000, 19).unwrap();
        for i in 0..3 {
            close(&format!("region {} at r0={r0}", i + 1), a[i], s[i], 0.015);
        }
    }
}

#[test]
fn schemes_at_the_disc_edge() {
    let p = SystemParams::default();
    let r0 = 500.0;
    let drops = montecarlo::simulate_drops(&p, r0, 5_000, 20).unwrap();
    for scheme in Scheme::ALL {
        let a = coverage::scheme_coverage(&p, scheme, r0).unwrap().total;
        let s = montecarlo::coverage_from_drops(&drops, scheme, p.sir_threshold);
        close(&format!("{scheme} at r0=500"), a, s.estimate, 0.025);
    }
}

#[test]
fn nse_matches_disc_simulation() {
    let p = SystemParams::default();
    let drops = montecarlo::simulate_disc_drops(&p, 6_000, 21).unwrap();
    for scheme in Scheme::ALL {
        let a = coverage::nse_report(&p, scheme).unwrap().nse;
        let s = montecarlo::nse_from_drops(&drops, scheme, p.sir_threshold);
        close(&format!("nse {scheme}"), a, s, 0.01);
    }
}

#[test]
fn interference_laplace_matches_simulated_field() {
    let p = SystemParams::default();
    for (r0, r1) in [(450.0, 80.0f64), (300.0, 250.0), (400.0, 150.0)] {
        let s = r1.powf(p.alpha_nlos) * p.sir_threshold;
        let a = uavcov::interference::LaplaceContext::new(&p, r0, r1)
            .unwrap()
            .laplace_i2(s)
            .unwrap();
        let (m, hw) = montecarlo::estimate_conditional_laplace(&p, r0, r1, s, 400, 22).unwrap();
        close(&format!("laplace r0={r0} r1={r1}"), a, m, 0.01_f64.max(2.0 * hw));
    }
}
