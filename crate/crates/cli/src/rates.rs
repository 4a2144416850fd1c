//! Decay-rate constant tables and Zolotarev point dumps.

use fracrb_core::elliptic::{zolotarev_points, EllipticError, RateConstants};

/// One row of the rate table.
#[derive(Debug, Clone, Copy)]
pub struct RateRow {
    pub kappa: f64,
    pub delta: f64,
    pub mu: f64,
    pub mu1: f64,
    pub c_star: f64,
}

/// Evaluates `C*` with its intermediate constants for each condition number.
/// Invalid rows are rejected individually with a message; valid rows are
/// still produced.
pub fn rate_table(kappas: &[f64]) -> (Vec<RateRow>, Vec<(f64, String)>) {
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for &kappa in kappas {
        match RateConstants::for_kappa(kappa) {
            Ok(rc) => rows.push(RateRow {
                kappa: rc.kappa,
                delta: rc.delta,
                mu: rc.mu,
                mu1: rc.mu1,
                c_star: rc.c_star,
            }),
            Err(e) => rejected.push((kappa, e.to_string())),
        }
    }
    (rows, rejected)
}

pub fn rates_csv(rows: &[RateRow]) -> String {
    let mut out = String::from("kappa,delta,mu,mu1,c_star\n");
    for r in rows {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.kappa, r.delta, r.mu, r.mu1, r.c_star
        ));
    }
    out
}

/// Text dump of the Zolotarev points on `[delta, 1]`, one per line.
pub fn zpoints_text(delta: f64, r: usize) -> Result<String, EllipticError> {
    let set = zolotarev_points(delta, r)?;
    let mut out = format!("# zolotarev points on [{delta:e}, 1], r = {r}\n");
    for z in set.points() {
        out.push_str(&format!("{z:.16e}\n"));
    }
    Ok(out)
}
