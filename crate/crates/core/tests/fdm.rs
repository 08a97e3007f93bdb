use thermocav::fdm::*;
use thermocav::forward::CavityModel;
use thermocav::geometry::Scenario;
use thermocav::potentials::BoundaryDensity;

fn benchmark(n_s: usize, n_t: usize, horizon: f64) -> Scenario {
    Scenario::from_json(&format!(
        r#"{{"outer": {{"kind": "circle", "center": [0, 0], "radius": 1.0}},
        "cavity": {{"kind": "circle", "center": [0, 0], "radius": 0.4}},
        "lambda": 1.0, "T": {horizon}, "N_s_outer": {n_s}, "N_s_inner": {n_s}, "N_t": {n_t}}}"#
    ))
    .unwrap()
}

#[test]
fn constant_flux_approaches_the_steady_state() {
    // the slowest decaying mode still leaves about 1.7% at T = 5, so run to T = 8
    let g = AnnulusGrid::new(0.4, 1.0, 61, 16, 800, 8.0).unwrap();
    let sol = fdm_solve(&g, 1.0, &|_, _| 1.0, Some(800)).unwrap();
    let (_, last) = sol.snapshots.last().unwrap();
    let mut worst: f64 = 0.0;
    for (j, row) in last.iter().enumerate() {
        let exact = annulus_steady_state(g.radius(j), 0.4, 1.0, 1.0);
        worst = worst.max((row[0] - exact).abs() / exact.abs());
    }
    assert!(worst <= 1e-2, "max relative deviation {worst}");
}

#[test]
fn second_order_under_refinement() {
    let value = |k: usize| {
        let g = AnnulusGrid::new(0.4, 1.0, 16 * k + 1, 16, 20 * k, 0.5).unwrap();
        let sol = fdm_solve(&g, 1.0, &|th, t| (1.0 + th.cos()) * t.min(0.2), None).unwrap();
        sol.outer_trace.last().unwrap()[0]
    };
    let (a, b, c) = (value(1), value(2), value(4));
    let order = ((a - b) / (b - c)).abs().log2();
    assert!((1.7..2.3).contains(&order), "observed order {order} from {a} {b} {c}");
}

#[test]
fn energy_decays_after_the_flux_stops() {
    let g = AnnulusGrid::new(0.4, 1.0, 33, 32, 200, 1.0).unwrap();
    let sol = fdm_solve(&g, 1.0, &|th, t| if t < 0.3 { 1.0 + (2.0 * th).sin() } else { 0.0 }, None).unwrap();
    let start = (0.3 / g.dt()).ceil() as usize + 1;
    for w in sol.energy[start..].windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn heat_balance_matches_boundary_fluxes() {
    let g = AnnulusGrid::new(0.4, 1.0, 81, 32, 400, 1.0).unwrap();
    let c = 1.5;
    let sol = fdm_solve(&g, 1.0, &|_, _| c, None).unwrap();
    let inflow = 2.0 * std::f64::consts::PI * g.r_outer * c;
    let mut worst: f64 = 0.0;
    for n in 10..g.n_t {
        let rate = (sol.heat[n + 1] - sol.heat[n]) / g.dt();
        let balance = inflow - 0.5 * (sol.inner_loss[n] + sol.inner_loss[n + 1]);
        worst = worst.max((rate - balance).abs() / inflow);
    }
    assert!(worst <= 1e-2, "{worst}");
}

#[test]
fn zero_flux_trace_is_zero() {
    let s = benchmark(16, 8, 1.0);
    let mesh = s.outer_mesh().unwrap();
    let g = AnnulusGrid::new(0.4, 1.0, 17, 32, 32, 1.0).unwrap();
    let tr = fdm_ntd_trace(&g, 1.0, &BoundaryDensity::zeros_on(&mesh), &mesh).unwrap();
    assert_eq!(tr.max_abs(), 0.0);
}

#[test]
fn grids_must_align_with_the_mesh() {
    let s = benchmark(16, 8, 1.0);
    let mesh = s.outer_mesh().unwrap();
    let f = BoundaryDensity::zeros_on(&mesh);
    assert!(fdm_ntd_trace(&AnnulusGrid::new(0.4, 1.0, 17, 24, 32, 1.0).unwrap(), 1.0, &f, &mesh).is_err());
    assert!(fdm_ntd_trace(&AnnulusGrid::new(0.4, 1.0, 17, 32, 24, 1.0).unwrap(), 1.0, &f, &mesh).is_err());
}

#[test]
fn boundary_elements_agree_with_finite_differences() {
    let (n_s, n_t) = (32, 32);
    let s = benchmark(n_s, n_t, 1.0);
    let model = CavityModel::from_scenario(&s).unwrap();
    let mesh = model.outer.clone();
    let f = BoundaryDensity::from_fn(n_s, n_t, |i, k| {
        let th = mesh.params[i];
        1.0 + 0.5 * th.cos() + 0.25 * (2.0 * th).sin() * ((k as f64 + 0.5) / n_t as f64)
    });
    let bem = model.ntd_indirect().unwrap().apply(&f).unwrap();
    let g = AnnulusGrid::new(0.4, 1.0, 121, 64, 32 * 16, 1.0).unwrap();
    let fdm = fdm_ntd_trace(&g, 1.0, &f, &mesh).unwrap();
    let num: f64 = bem.values.iter().zip(&fdm.values).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = fdm.values.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(num / den <= 5e-2, "relative L2 gap {}", num / den);
}
