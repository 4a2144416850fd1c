//! Exponential convergence of the reduced basis algorithms on Zolotarev
//! spaces, checked against the predicted rate constant.

use fracrb_core::elliptic::decay_rate_c_star;
use fracrb_core::fem::{assemble, unit_interval_mesh, unit_square_mesh, FeOrder, Mesh};
use fracrb_core::fractional::{
    build_reduced_space, estimate_spectral_bounds, BuildOptions, TruthBasis,
};
use fracrb_core::linalg::gen_eig;
use fracrb_core::rng::SplitMix64;
use fracrb_core::DofVector;
use ndarray::Array1;

struct Setup {
    m: fracrb_core::sparse::SparseSymMatrix,
    a: fracrb_core::sparse::SparseSymMatrix,
    truth: TruthBasis,
    interval: fracrb_core::fractional::SpectralInterval,
    f: DofVector,
    c_star: f64,
}

fn setup(mesh: &Mesh, seed: u64) -> Setup {
    let (m, a) = assemble(mesh, FeOrder::P1).unwrap();
    let eig = gen_eig(&a, &m).unwrap();
    let n = m.dim();
    let mut rng = SplitMix64::new(seed);
    let mut f: Array1<f64> = (0..n).map(|_| rng.uniform_pm1()).collect();
    let norm = m.quadratic_form(&f.view()).sqrt();
    f /= norm;
    let truth = TruthBasis::new(eig, &m, &f).unwrap();
    let interval = estimate_spectral_bounds(&m, &a, 1.01).unwrap();
    let c_star = decay_rate_c_star(interval.kappa()).unwrap();
    Setup {
        m,
        a,
        truth,
        interval,
        f,
        c_star,
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn norm_gap_decay(setup: &Setup, r_max: usize, s: f64) -> Vec<f64> {
    let truth_sq = setup.truth.dual_norm(s).unwrap().powi(2);
    (1..=r_max)
        .map(|r| {
            let space = build_reduced_space(
                &setup.m,
                &setup.a,
                &setup.f,
                r,
                &setup.interval,
                &BuildOptions::default(),
            )
            .unwrap();
            space.dual_norm(s).unwrap().powi(2) - truth_sq
        })
        .collect()
}

#[test]
fn dual_norm_gap_decays_exponentially_on_interval() {
    let mesh = unit_interval_mesh(64).unwrap();
    let s = setup(&mesh, 1234);
    let gaps = norm_gap_decay(&s, 15, 0.5);
    // Monotone above the noise floor, and one-sided.
    for (r, w) in gaps.windows(2).enumerate() {
        assert!(w[0] >= -1e-12, "r={}: negative gap {}", r + 1, w[0]);
        if w[0] > 1e-12 && w[1] > 1e-12 {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "gap grew at r={}", r + 1);
        }
    }
    let pts: Vec<(f64, f64)> = gaps
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 1e-12)
        .map(|(i, &d)| ((i + 1) as f64, d.ln()))
        .collect();
    assert!(pts.len() >= 4, "too few points above the noise floor");
    let slope = least_squares_slope(&pts);
    let bound = -2.0 * 0.9 * s.c_star;
    assert!(
        slope <= bound,
        "interval: fitted slope {slope:.3} above bound {bound:.3} (C* = {:.3})",
        s.c_star
    );
}

#[test]
fn dual_norm_gap_decays_exponentially_on_square() {
    let mesh = unit_square_mesh(16).unwrap();
    let s = setup(&mesh, 77);
    let gaps = norm_gap_decay(&s, 15, 0.5);
    for w in gaps.windows(2) {
        assert!(w[0] >= -1e-12);
        if w[0] > 1e-12 && w[1] > 1e-12 {
            assert!(w[1] <= w[0] * (1.0 + 1e-9));
        }
    }
    let pts: Vec<(f64, f64)> = gaps
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 1e-12)
        .map(|(i, &d)| ((i + 1) as f64, d.ln()))
        .collect();
    assert!(pts.len() >= 4);
    let slope = least_squares_slope(&pts);
    let bound = -2.0 * 0.9 * s.c_star;
    assert!(
        slope <= bound,
        "square: fitted slope {slope:.3} above bound {bound:.3}"
    );
}

#[test]
fn dual_solution_error_decays_at_predicted_rate() {
    // || u_r^*(s) - u(s) ||_0 with fitted slope <= -0.9 C* for three orders.
    let mesh = unit_square_mesh(16).unwrap();
    let st = setup(&mesh, 4242);
    for &s in &[0.1, 0.5, 0.9] {
        let u_truth = st.truth.solve(s).unwrap();
        let mut pts = Vec::new();
        for r in 1..=15 {
            let space = build_reduced_space(
                &st.m,
                &st.a,
                &st.f,
                r,
                &st.interval,
                &BuildOptions::default(),
            )
            .unwrap();
            let u = space.dual_solve(s).unwrap();
            let diff = &u - &u_truth;
            let err = st.m.quadratic_form(&diff.view()).sqrt();
            if (1e-10..=1e-2).contains(&err) {
                pts.push((r as f64, err.ln()));
            }
        }
        assert!(pts.len() >= 3, "s={s}: window too small");
        let slope = least_squares_slope(&pts);
        let bound = -0.9 * st.c_star;
        assert!(
            slope <= bound,
            "s={s}: solution slope {slope:.3} above bound {bound:.3}"
        );
    }
}
