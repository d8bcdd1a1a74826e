//! Threshold parameters: the local reproduction number `R_L` (Perron root
//! of the complex-to-complex mean matrix) and the global one `R*`.

use crate::complex::tables::TableSet;
use crate::complex::SeedType;
use crate::error::Result;

/// Largest eigenvalue of a nonnegative 2x2 matrix.
pub fn perron_root(m: [[f64; 2]; 2]) -> f64 {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let disc = ((a - d) * (a - d) + 4.0 * b * c).max(0.0);
    0.5 * (a + d + disc.sqrt())
}

/// `[[mu_HH, mu_HW], [mu_WH, mu_WW]]`; zero when there are no movers.
pub fn mean_matrix(tables: &TableSet) -> [[f64; 2]; 2] {
    let row = |x| tables.get(x).map(|t| t.means()).unwrap_or([0.0; 3]);
    let h = row(SeedType::H);
    let w = row(SeedType::W);
    [[h[1], h[2]], [w[1], w[2]]]
}

pub fn compute_r_l(tables: &TableSet) -> f64 {
    perron_root(mean_matrix(tables))
}

/// Mean total progeny `(mu_ZH, mu_ZW)` of the branching process started by
/// one H or W complex; `None` when `R_L >= 1`.
pub fn progeny_means(tables: &TableSet) -> Option<(f64, f64)> {
    if compute_r_l(tables) >= 1.0 {
        return None;
    }
    let m = mean_matrix(tables);
    let row = |x| tables.get(x).map(|t| t.means()).unwrap_or([0.0; 3]);
    let bh = 1.0 + row(SeedType::H)[0];
    let bw = 1.0 + row(SeedType::W)[0];
    // (I - M) mu = b
    let (a, b, c, d) = (1.0 - m[0][0], -m[0][1], -m[1][0], 1.0 - m[1][1]);
    let det = a * d - b * c;
    assert!(det > 0.0, "I - M singular although R_L < 1");
    Some(((d * bh - b * bw) / det, (a * bw - c * bh) / det))
}

/// `R* = beta_G E[S]`, or infinity when `R_L >= 1`.
pub fn compute_r_star(beta_g: f64, theta: f64, tables: &TableSet) -> Result<f64> {
    let r = tables.require(SeedType::R)?.means();
    let Some((mh, mw)) = progeny_means(tables) else {
        return Ok(f64::INFINITY);
    };
    let mean_s = 1.0 - 2.0 * theta + (1.0 - theta) * (r[0] + r[1] * mh + r[2] * mw) + theta * (mh + mw);
    Ok(beta_g * mean_s)
}
