use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermocav::halfspace::*;

fn base() -> HalfspaceConfig {
    HalfspaceConfig { lambda0: 1.5, xi3: -0.4, eta3: -0.3, xi_perp: [0.2, -0.1], eta_perp: [0.0, 0.1], t: 0.35, s: 0.1 }
}

fn w(cfg: &HalfspaceConfig) -> f64 {
    w_plus(cfg).unwrap()
}

#[test]
fn satisfies_the_heat_equation() {
    let h = 1e-3;
    for lam in [0.0, 1.5, 4.0] {
        let c = HalfspaceConfig { lambda0: lam, ..base() };
        let w0 = w(&c);
        let dt = (w(&HalfspaceConfig { t: c.t + h, ..c }) - w(&HalfspaceConfig { t: c.t - h, ..c })) / (2.0 * h);
        let mut lap = 0.0;
        for axis in 0..3 {
            let shift = |d: f64| {
                let mut s = c;
                match axis {
                    0 => s.xi_perp[0] += d,
                    1 => s.xi_perp[1] += d,
                    _ => s.xi3 += d,
                }
                w(&s)
            };
            lap += (shift(h) - 2.0 * w0 + shift(-h)) / (h * h);
        }
        let rel = (dt - lap).abs() / dt.abs().max(lap.abs());
        assert!(rel <= 1e-4, "λ₀ = {lam}: ∂t {dt} Δ {lap} rel {rel}");
    }
}

#[test]
fn impedance_condition_holds_on_the_boundary() {
    // second-order one-sided difference at ξ₃ = 0
    let h = 1e-3;
    for lam in [0.0, 0.7, 2.0] {
        let c = HalfspaceConfig { lambda0: lam, xi3: 0.0, ..base() };
        let total = |x3: f64| {
            let s = HalfspaceConfig { xi3: x3, ..c };
            w(&s) + fundamental_3d(&s)
        };
        let d = (3.0 * total(0.0) - 4.0 * total(-h) + total(-2.0 * h)) / (2.0 * h);
        let resid = d - lam * total(0.0);
        let scale = d.abs().max(lam * total(0.0).abs()).max(total(0.0).abs());
        assert!(resid.abs() <= 1e-3 * scale, "λ₀ = {lam}: residual {resid} vs {scale}");
    }
}

#[test]
fn neumann_case_is_the_image_solution_at_random_configurations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let s = rng.random_range(0.0..1.0);
        let c = HalfspaceConfig {
            lambda0: 0.0,
            xi3: -rng.random_range(0.0..1.0),
            eta3: -rng.random_range(0.01..1.0),
            xi_perp: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            eta_perp: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            t: s + rng.random_range(0.01..1.0),
            s,
        };
        let image = image_solution(&c);
        let got = w(&c);
        assert!((got - image).abs() <= 1e-8 * image.abs().max(1e-300), "{c:?}: {got} vs {image}");
    }
}

#[test]
fn coincident_scaling_converges_linearly_to_the_constant() {
    let eps = [1e-1, 1e-2, 1e-3];
    let rows = coincident_asymptotics(1.0, &eps).unwrap();
    let target = asymptotic_constant();
    assert!(rows[2].deviation.abs() <= 0.05, "{rows:?}");
    for pair in rows.windows(2) {
        let ratio = pair[0].deviation.abs() / pair[1].deviation.abs();
        // one decade of ε, first-order remainder
        assert!((5.0..20.0).contains(&ratio), "ratio {ratio}: {rows:?}");
    }
    assert!((rows[2].scaled - target).abs() / target <= 0.05);
}

#[test]
fn l_approaches_its_leading_terms() {
    let lam = 1.0;
    let rel: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&e| {
            let l = integral_l(&HalfspaceConfig::coincident(lam, e)).unwrap();
            (l - 4.0 * std::f64::consts::PI * lam + (-0.25f64).exp() * std::f64::consts::PI.sqrt() / e).abs() * e
        })
        .collect();
    assert!(rel[0] > rel[1] && rel[1] > rel[2] && rel[2] < 1e-2, "{rel:?}");
}

#[test]
fn large_impedance_is_dominated_by_the_growing_mode() {
    // With this sign the condition ∂_{ξ₃}u = λ₀u admits the mode
    // e^{λ₀ξ₃ + λ₀²t}, so W⁺ has no Dirichlet limit: it grows without bound.
    let c = base();
    let vals: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&lam| w_plus_closed_form(&HalfspaceConfig { lambda0: lam, ..c }).unwrap()).collect();
    let dirichlet = -image_solution(&c);
    assert!(vals[0] > 1e6 * dirichlet.abs(), "{vals:?}");
    assert!(vals[0] <= vals[1] && vals[1] <= vals[2], "{vals:?}");
}

proptest! {
    #[test]
    fn swapping_source_and_target_is_symmetric(
        lam in 0.0..3.0f64, xi3 in -1.0..-0.01f64, eta3 in -1.0..-0.01f64,
        px in -1.0..1.0f64, qx in -1.0..1.0f64, tau in 0.01..1.0f64,
    ) {
        let c = HalfspaceConfig { lambda0: lam, xi3, eta3, xi_perp: [px, 0.0], eta_perp: [qx, 0.3], t: 0.2 + tau, s: 0.2 };
        let sw = HalfspaceConfig { xi3: eta3, eta3: xi3, xi_perp: c.eta_perp, eta_perp: c.xi_perp, ..c };
        let (a, b) = (w(&c), w(&sw));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
    }

    #[test]
    fn quadrature_matches_closed_form(lam in 0.0..5.0f64, a in 0.005..2.0f64, tau in 1e-4..2.0f64) {
        let c = HalfspaceConfig { lambda0: lam, xi3: -a / 2.0, eta3: -a / 2.0, xi_perp: [0.0; 2], eta_perp: [0.0; 2], t: tau, s: 0.0 };
        let q = integral_l(&c).unwrap();
        let e = integral_l_closed_form(&c).unwrap();
        prop_assert!((q - e).abs() <= 1e-9 * e.abs().max(1.0), "{} vs {}", q, e);
    }

    #[test]
    fn vanishes_before_the_source(lam in 0.0..3.0f64, lag in 0.0..1.0f64) {
        let c = HalfspaceConfig { t: 0.5 - lag, s: 0.5, lambda0: lam, ..base() };
        prop_assert_eq!(w(&c), 0.0);
    }
}
