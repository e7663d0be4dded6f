//! Thermo-majorization curves for truncated geometric distributions.
//!
//! The Fock-diagonal statistics of an unsqueezed thermal mode are geometric.
//! Curves are built in log space so that Gibbs ratios far into the tail stay
//! finite and correctly ordered.

use serde::{Deserialize, Serialize};

use crate::error::{GtoError, Result};
use crate::feasibility::{single_mode_feasible, TransformQuery, FEASIBILITY_TOL};
use crate::states::nu_of;

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
pub const DOMINANCE_TOL: f64 = 1e-10;

/// `p_n ∝ e^{−βEn}` on `n = 0..N`, renormalised after truncation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometricDist {
    pub beta: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub cutoff: usize,
    /// Mass `e^{−βEN}` discarded before renormalising.
    pub tail: f64,
    pub probs: Vec<f64>,
    #[serde(skip)]
    log_probs: Vec<f64>,
}

impl GeometricDist {
    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }
}

pub fn geometric_probs(beta: f64, e: f64, cutoff: usize, tail_tol: f64) -> Result<GeometricDist> {
    let x = beta * e;
    if !(x > 0.0) || !x.is_finite() {
        return Err(GtoError::domain(format!("need βE > 0, got β={beta}, E={e}")));
    }
    if cutoff < 2 {
        return Err(GtoError::domain(format!("cutoff must be at least 2, got {cutoff}")));
    }
    let tail = (-x * cutoff as f64).exp();
    if tail > tail_tol {
        return Err(GtoError::Cutoff { cutoff, tail, tol: tail_tol });
    }
    // log[(1 − e^{−x}) / (1 − e^{−xN})] − x n
    let log_norm = (-(-x).exp_m1()).ln() - (-tail).ln_1p();
    let log_probs: Vec<f64> = (0..cutoff).map(|n| log_norm - x * n as f64).collect();
    let probs = log_probs.iter().map(|l| l.exp()).collect();
    Ok(GeometricDist { beta, e, cutoff, tail, probs, log_probs })
}

/// Smallest cutoff whose discarded tail is at most `tail_tol`.
pub fn cutoff_for(beta: f64, e: f64, tail_tol: f64) -> usize {
    ((-tail_tol.ln()) / (beta * e)).ceil().max(2.0) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoCurve {
    pub breakpoints: Vec<(f64, f64)>,
}

impl ThermoCurve {
    /// Linear interpolation; clamps outside `[0, x_last]`.
    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.breakpoints;
        let k = pts.partition_point(|&(px, _)| px <= x);
        if k == 0 {
            return pts[0].1;
        }
        if k == pts.len() {
            return pts[k - 1].1;
        }
        let (x0, y0) = pts[k - 1];
        let (x1, y1) = pts[k];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in &self.breakpoints {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }

    /// Slopes non-increasing, checked as `(B − A) × (C − B) ≤ tol` on
    /// consecutive triples so that tiny tail segments do not amplify rounding.
    pub fn is_concave(&self, tol: f64) -> bool {
        self.breakpoints.windows(3).all(|w| {
            let (a, b, c) = (w[0], w[1], w[2]);
            (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0) <= tol
        })
    }
}

/// Curve of `p` relative to the Gibbs distribution `g`: sort levels by
/// `p_n/g_n` descending (ties by ascending `n`) and join the cumulative sums
/// `(Σ g, Σ p)`.
pub fn thermo_curve(p: &GeometricDist, g: &GeometricDist) -> Result<ThermoCurve> {
    if p.cutoff != g.cutoff {
        return Err(GtoError::invalid(format!(
            "cutoffs differ: {} vs {}",
            p.cutoff, g.cutoff
        )));
    }
    if (p.e - g.e).abs() > 1e-12 * p.e.abs().max(g.e.abs()) {
        return Err(GtoError::invalid(format!("level spacings differ: {} vs {}", p.e, g.e)));
    }
    let log_ratio: Vec<f64> = p
        .log_probs
        .iter()
        .zip(&g.log_probs)
        .map(|(a, b)| a - b)
        .collect();
    let mut order: Vec<usize> = (0..p.cutoff).collect();
    order.sort_by(|&i, &j| log_ratio[j].total_cmp(&log_ratio[i]));

    let mut pts = Vec::with_capacity(p.cutoff + 1);
    pts.push((0.0, 0.0));
    let (mut x, mut y) = (0.0, 0.0);
    for n in order {
        x += g.probs[n];
        y += p.probs[n];
        let k = pts.len();
        // underflowed Gibbs weight: fold into the previous point
        if k > 1 && x <= pts[k - 1].0 {
            pts[k - 1].1 = y;
        } else {
            pts.push((x, y));
        }
    }
    Ok(ThermoCurve { breakpoints: pts })
}

/// `a` lies above `b` (within `tol`) at every breakpoint of either curve.
pub fn curve_dominates(a: &ThermoCurve, b: &ThermoCurve, tol: f64) -> bool {
    let check = |x: f64| a.eval(x) >= b.eval(x) - tol;
    a.breakpoints.iter().all(|&(x, _)| check(x)) && b.breakpoints.iter().all(|&(x, _)| check(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub thermo_verdict: bool,
    pub gaussian_verdict: bool,
    pub agree: bool,
}

/// Compare curve dominance of the thermal input over the thermal target with
/// the unsqueezed Gaussian criterion.
pub fn cross_check(beta_i: f64, beta_f: f64, beta: f64, e: f64, cutoff: usize) -> Result<CrossCheck> {
    let pi = geometric_probs(beta_i, e, cutoff, DEFAULT_TAIL_TOL)?;
    let qf = geometric_probs(beta_f, e, cutoff, DEFAULT_TAIL_TOL)?;
    let g = geometric_probs(beta, e, cutoff, DEFAULT_TAIL_TOL)?;
    let thermo_verdict = curve_dominates(&thermo_curve(&pi, &g)?, &thermo_curve(&qf, &g)?, DOMINANCE_TOL);
    let q = TransformQuery::new(nu_of(beta_i, e)?, 1.0, nu_of(beta_f, e)?, 1.0, nu_of(beta, e)?);
    let gaussian_verdict = single_mode_feasible(&q, FEASIBILITY_TOL)?.feasible;
    Ok(CrossCheck {
        thermo_verdict,
        gaussian_verdict,
        agree: thermo_verdict == gaussian_verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dist(beta: f64, n: usize) -> GeometricDist {
        geometric_probs(beta, 1.0, n, DEFAULT_TAIL_TOL).unwrap()
    }

    #[test]
    fn halving_distribution() {
        let d = dist(2.0_f64.ln(), 60);
        for (n, p) in d.probs.iter().take(10).enumerate() {
            assert_relative_eq!(*p, 0.5_f64.powi(n as i32 + 1), max_relative = 1e-12);
        }
        assert_relative_eq!(d.probs.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn quarter_distribution() {
        let d = dist(4.0_f64.ln(), 30);
        assert_relative_eq!(d.probs[0], 0.75, max_relative = 1e-12);
        assert_relative_eq!(d.probs[1], 0.1875, max_relative = 1e-12);
    }

    #[test]
    fn cutoff_is_enforced() {
        match geometric_probs(0.1, 1.0, 20, DEFAULT_TAIL_TOL) {
            Err(GtoError::Cutoff { cutoff: 20, .. }) => {}
            other => panic!("expected cutoff error, got {other:?}"),
        }
        assert!(geometric_probs(0.0, 1.0, 20, 1.0).is_err());
        assert!(geometric_probs(1.0, 1.0, 1, 1.0).is_err());
        let n = cutoff_for(0.1, 1.0, DEFAULT_TAIL_TOL);
        assert!(geometric_probs(0.1, 1.0, n, DEFAULT_TAIL_TOL).is_ok());
        assert!(geometric_probs(0.1, 1.0, n - 1, DEFAULT_TAIL_TOL).is_err());
    }

    #[test]
    fn self_curve_is_diagonal() {
        let g = dist(0.7, 60);
        let c = thermo_curve(&g, &g).unwrap();
        for &(x, y) in &c.breakpoints {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn ordering_follows_temperature() {
        let g = dist(0.7, 80);
        // colder input: ratios decrease with n, identity order
        let cold = thermo_curve(&dist(1.5, 80), &g).unwrap();
        assert_relative_eq!(cold.breakpoints[1].0, g.probs[0], epsilon = 1e-15);
        // hotter input: reversed
        let hot = thermo_curve(&dist(0.4, 80), &g).unwrap();
        assert_relative_eq!(hot.breakpoints[1].0, g.probs[79], epsilon = 1e-15);
        assert!(cold.is_concave(1e-14) && hot.is_concave(1e-14));
        let last = *hot.breakpoints.last().unwrap();
        assert!((last.0 - 1.0).abs() < 1e-12 && (last.1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dominance_examples() {
        let g = dist(1.0, 120);
        let diag = thermo_curve(&g, &g).unwrap();
        for beta in [0.3, 0.8, 1.7, 3.0] {
            let c = thermo_curve(&dist(beta, 120), &g).unwrap();
            assert!(curve_dominates(&c, &c, DOMINANCE_TOL));
            assert!(curve_dominates(&c, &diag, DOMINANCE_TOL));
        }
        // β_i < β < β_f: hot input cannot reach a colder-than-bath target
        let a = thermo_curve(&dist(0.5, 120), &g).unwrap();
        let b = thermo_curve(&dist(2.0, 120), &g).unwrap();
        assert!(!curve_dominates(&a, &b, DOMINANCE_TOL));
        assert!(!curve_dominates(&b, &a, DOMINANCE_TOL));
    }

    #[test]
    fn mismatched_inputs() {
        let a = dist(1.0, 40);
        let b = dist(1.0, 50);
        assert!(matches!(thermo_curve(&a, &b), Err(GtoError::Validation(_))));
        let c = geometric_probs(1.0, 2.0, 40, DEFAULT_TAIL_TOL).unwrap();
        assert!(thermo_curve(&a, &c).is_err());
    }

    #[test]
    fn cross_check_endpoints() {
        let r = cross_check(0.5, 0.5, 1.2, 1.0, 80).unwrap();
        assert!(r.thermo_verdict && r.gaussian_verdict && r.agree);
        let r = cross_check(0.5, 1.2, 1.2, 1.0, 80).unwrap();
        assert!(r.thermo_verdict && r.gaussian_verdict);
        let r = cross_check(0.5, 1.6, 1.2, 1.0, 80).unwrap();
        assert!(!r.thermo_verdict && !r.gaussian_verdict);
        assert!(cross_check(0.01, 1.0, 1.0, 1.0, 80).is_err());
    }

    #[test]
    fn csv_export() {
        let g = dist(1.0, 30);
        let csv = thermo_curve(&g, &g).unwrap().to_csv();
        assert!(csv.starts_with("x,y\n0,0\n"));
        assert_eq!(csv.lines().count(), 32);
    }

    proptest! {
        #[test]
        fn curves_are_concave_and_normalised(bi in 0.2..3.0f64, b in 0.2..3.0f64) {
            let n = cutoff_for(bi.min(b), 1.0, DEFAULT_TAIL_TOL);
            let c = thermo_curve(&dist(bi, n), &dist(b, n)).unwrap();
            prop_assert!(c.is_concave(1e-14));
            let (x, y) = *c.breakpoints.last().unwrap();
            prop_assert!((x - 1.0).abs() < 1e-12 && (y - 1.0).abs() < 1e-12);
            prop_assert!(c.breakpoints.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 >= w[0].1));
        }

        #[test]
        fn dominance_is_transitive(b1 in 0.2..3.0f64, b2 in 0.2..3.0f64, b3 in 0.2..3.0f64, b in 0.2..3.0f64) {
            let n = cutoff_for(b1.min(b2).min(b3).min(b), 1.0, DEFAULT_TAIL_TOL);
            let g = dist(b, n);
            let c: Vec<ThermoCurve> = [b1, b2, b3].iter().map(|&x| thermo_curve(&dist(x, n), &g).unwrap()).collect();
            if curve_dominates(&c[0], &c[1], 0.0) && curve_dominates(&c[1], &c[2], 0.0) {
                prop_assert!(curve_dominates(&c[0], &c[2], 1e-12));
            }
        }
    }
}
