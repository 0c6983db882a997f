//! Trajectory-level checks: circular orbits, the axial ODE against the
//! period quadrature, and portrait structure. The long-horizon versions run
//! in the acceptance suite.

use annulus_core::dynamics::{
    axial_period, axial_return_time, integrate, measured_circular_period, planar_phase_portrait,
    w_value, CartesianState, IntegrationOptions, Termination,
};
use annulus_core::equilibria::{find_planar_critical_points, Kind, Region};
use annulus_core::{AnnulusBody, BodyStack};

fn stack() -> BodyStack {
    BodyStack::single(AnnulusBody::new(1.0, 0.75, 1.0).unwrap())
}

fn stable_exterior_radius(s: &BodyStack, lambda: f64) -> f64 {
    find_planar_critical_points(s, lambda, 100.0)
        .unwrap()
        .into_iter()
        .find(|r| r.region == Region::Exterior && r.kind == Kind::StableMin)
        .expect("stable exterior circular orbit")
        .r0
}

#[test]
fn circular_orbit_stays_circular_and_keeps_its_period() {
    let s = stack();
    let lambda = 2.5;
    let r0 = stable_exterior_radius(&s, lambda);
    let nominal = 2.0 * std::f64::consts::PI * r0 * r0 / lambda;

    let opts = IntegrationOptions {
        rtol: 1e-12,
        atol: 1e-14,
        sample_dt: Some(nominal / 50.0),
        ..Default::default()
    };
    let traj = integrate(
        &s,
        CartesianState::new(r0, 0.0, 0.0, 0.0, lambda / r0, 0.0),
        2.0 * nominal,
        &opts,
    )
    .unwrap();
    assert_eq!(traj.termination, Termination::TimeLimit);
    for (t, st) in &traj.samples {
        assert!(
            (st.r() - r0).abs() < 1e-8,
            "r drifted to {} at t = {t}",
            st.r()
        );
    }
    let measured = measured_circular_period(&s, r0, lambda, &opts).unwrap();
    assert!(
        ((measured - nominal) / nominal).abs() < 1e-6,
        "period: measured {measured}, nominal {nominal}"
    );
}

#[test]
fn axial_ode_return_time_matches_quadrature() {
    let ann = AnnulusBody::new(1.0, 0.75, 1.0).unwrap();
    let opts = IntegrationOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..Default::default()
    };
    for energy in [-1.0, -0.6, -0.2] {
        let quad = axial_period(&ann, energy).unwrap();
        let ode = axial_return_time(&ann, energy, &opts).unwrap();
        assert!(
            ((quad - ode) / quad).abs() < 1e-6,
            "E = {energy}: quadrature {quad}, ode {ode}"
        );
    }
}

#[test]
fn portrait_has_closed_loop_around_stable_circular_orbit() {
    let s = stack();
    let lambda = 2.5;
    let r0 = stable_exterior_radius(&s, lambda);
    let w_min = w_value(&s, lambda, r0).unwrap();
    let level = w_min + 0.2 * w_min.abs();
    let portrait = planar_phase_portrait(&s, lambda, 0.6 * r0, 2.0 * r0, 600, &[level]).unwrap();
    let segs = &portrait[0].segments;
    assert!(
        !segs.is_empty(),
        "expected an accessible region around r0 = {r0}"
    );
    // the loop is closed and strictly inside the sampled range
    let loop_ = segs
        .iter()
        .find(|seg| seg.iter().any(|&(r, _)| (r - r0).abs() < 0.2 * r0))
        .expect("loop around the minimum");
    assert_eq!(loop_.first(), loop_.last());
    let r_lo = loop_.iter().map(|&(r, _)| r).fold(f64::INFINITY, f64::min);
    let r_hi = loop_.iter().map(|&(r, _)| r).fold(0.0f64, f64::max);
    assert!(
        r_lo > 0.6 * r0 && r_hi < 2.0 * r0,
        "loop clipped: [{r_lo}, {r_hi}]"
    );
}

#[test]
fn lambda_one_portrait_has_no_exterior_loop() {
    // no exterior critical points at lambda = 1, so no bounded loop beyond
    // the plate: every accessible segment at E < 0 reaches the inner range
    // boundary near the plate (collision orbits) or extends outward
    let s = stack();
    let portrait = planar_phase_portrait(&s, 1.0, 1.001, 30.0, 2000, &[-0.25]).unwrap();
    for seg in &portrait[0].segments {
        let r_lo = seg.iter().map(|&(r, _)| r).fold(f64::INFINITY, f64::min);
        assert!(
            r_lo < 1.1,
            "found a bounded exterior loop starting at r = {r_lo}, none should exist"
        );
    }
}
