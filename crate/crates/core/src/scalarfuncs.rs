//! The conformal profile `F` and the weight function `f`.
//!
//! For a constant `c < 0`, `F(t)` is the unique real solution of
//! `c e^{-F} - 2t e^{-3F} + 1 = 0`. In the variable `y = e^{-F}` this is the
//! cubic `2t y^3 - c y - 1 = 0`, which is increasing in `y > 0`.
//!
//! The weight function is `f(t) = -t^{1/3} ∫_0^t F'(s) s^{-1/3} ds`. With
//! `s = σ^3` the integrand becomes `3 F'(σ^3) σ`, which is smooth.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{domain, LabError, Result};

/// Number of geometrically graded panels used for the `f` quadrature.
const PANELS: usize = 10;

#[derive(Debug, Clone)]
pub struct ConformalProfile {
    c: f64,
    root_tol: f64,
    quad_order: usize,
    rule: GaussLegendre,
}

impl ConformalProfile {
    pub fn new(c: f64) -> Result<Self> {
        Self::with_options(c, 1e-12, 24)
    }

    pub fn with_options(c: f64, root_tol: f64, quad_order: usize) -> Result<Self> {
        if !(c < 0.0) || !c.is_finite() {
            return domain(format!("profile constant must be negative, got {c}"));
        }
        if !(root_tol > 0.0) {
            return domain(format!("root tolerance must be positive, got {root_tol}"));
        }
        if quad_order < 8 {
            return domain(format!("quadrature order must be at least 8, got {quad_order}"));
        }
        let rule = GaussLegendre::new(NonZeroUsize::new(quad_order).expect("order checked above"));
        Ok(Self { c, root_tol, quad_order, rule })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn root_tol(&self) -> f64 {
        self.root_tol
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    /// Left side of the functional equation at `(t, y)`.
    pub fn functional_residual(&self, t: f64, big_f: f64) -> f64 {
        self.c * (-big_f).exp() - 2.0 * t * (-3.0 * big_f).exp() + 1.0
    }

    /// `F(t)` by safeguarded Newton iteration on `y = e^{-F}`.
    #[allow(non_snake_case)]
    pub fn eval_F(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        let y = self.solve_y(t)?;
        Ok(-y.ln())
    }

    fn solve_y(&self, t: f64) -> Result<f64> {
        let c = self.c;
        if t == 0.0 {
            return Ok(-1.0 / c);
        }
        let p = |y: f64| 2.0 * t * y * y * y - c * y - 1.0;
        let dp = |y: f64| 6.0 * t * y * y - c;
        // p(0) = -1 and p(1/|c|) = 2t/|c|^3 >= 0 bracket the root.
        let (mut lo, mut hi) = (0.0_f64, -1.0 / c);
        let mut y = hi;
        for _ in 0..200 {
            let v = p(y);
            if v > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let mut next = y - v / dp(y);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() <= 4.0 * f64::EPSILON * y {
                y = next;
                break;
            }
            y = next;
        }
        let res = p(y).abs();
        if res > self.root_tol {
            return Err(LabError::Numerical { msg: format!("root of the profile cubic at t = {t}"), residual: res });
        }
        Ok(y)
    }

    /// Closed form of `F` through the real cube-root auxiliary `g`.
    #[allow(non_snake_case)]
    pub fn eval_F_closed_form(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Ok((-self.c).ln());
        }
        Ok((4.0 * t).cbrt().ln() - self.aux_g(t).ln())
    }

    /// `ζ = 2|c|^3 / 27`.
    pub fn zeta(&self) -> f64 {
        2.0 * self.c.abs().powi(3) / 27.0
    }

    /// `g(t) = ∛(1+S) + ∛(1−S)` with `S = √(1 + ζ/t)`.
    pub fn aux_g(&self, t: f64) -> f64 {
        let s = (1.0 + self.zeta() / t).sqrt();
        (1.0 + s).cbrt() + (1.0 - s).cbrt()
    }

    /// Derivative of [`Self::aux_g`].
    pub fn aux_g_prime(&self, t: f64) -> f64 {
        let z = self.zeta();
        let s = (1.0 + z / t).sqrt();
        let ds = -z / (2.0 * t * t * s);
        let a = (1.0 + s).cbrt();
        let b = (1.0 - s).cbrt();
        ds / 3.0 * (1.0 / (a * a) - 1.0 / (b * b))
    }

    /// `3t g'(t) / g(t)`.
    pub fn aux_log_derivative(&self, t: f64) -> f64 {
        3.0 * t * self.aux_g_prime(t) / self.aux_g(t)
    }

    /// `F'(t) = 2 / (6t − c e^{2F})`.
    #[allow(non_snake_case)]
    pub fn eval_F_prime(&self, t: f64) -> Result<f64> {
        let f = self.eval_F(t)?;
        Ok(self.f_prime_from(t, f))
    }

    fn f_prime_from(&self, t: f64, big_f: f64) -> f64 {
        2.0 / (6.0 * t - self.c * (2.0 * big_f).exp())
    }

    /// Second derivative of `F` by implicit differentiation.
    #[allow(non_snake_case)]
    pub fn eval_F_second(&self, t: f64) -> Result<f64> {
        let f = self.eval_F(t)?;
        let e = (2.0 * f).exp();
        let fp = self.f_prime_from(t, f);
        let d = 6.0 * t - self.c * e;
        Ok(-2.0 * (6.0 - 2.0 * self.c * e * fp) / (d * d))
    }

    /// `∫_0^{t^{1/3}} 3 σ h(σ^3) dσ` on fixed geometric panels.
    fn sigma_integral(&self, t: f64, h: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let s = t.cbrt();
        let mut total = 0.0;
        let mut err = None;
        let mut b = s;
        for k in 0..PANELS {
            let a = if k + 1 == PANELS { 0.0 } else { b * 0.5 };
            total += self.rule.integrate(a, b, |sigma| match h(sigma * sigma * sigma) {
                Ok(v) => 3.0 * sigma * v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            });
            b = a;
        }
        match err {
            Some(e) => Err(e),
            None => Ok(total),
        }
    }

    /// Weight function `f(t) ≤ 0`.
    pub fn eval_f(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let integral = self.sigma_integral(t, |s| self.eval_F_prime(s))?;
        Ok(-t.cbrt() * integral)
    }

    /// `f'(t) = −F'(t) + f(t)/(3t)`, with the limit `−(3/2)F'(0)` at `t = 0`.
    pub fn eval_f_prime(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Ok(-1.5 * self.eval_F_prime(0.0)?);
        }
        Ok(-self.eval_F_prime(t)? + self.eval_f(t)? / (3.0 * t))
    }

    /// `f''(t) = −F''(t) + f'(t)/(3t) − f(t)/(3t^2)` for `t > 0`.
    pub fn eval_f_second(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return domain(format!("second derivative of f needs t > 0, got {t}"));
        }
        let f = self.eval_f(t)?;
        let fp = -self.eval_F_prime(t)? + f / (3.0 * t);
        Ok(-self.eval_F_second(t)? + fp / (3.0 * t) - f / (3.0 * t * t))
    }

    /// Values `(f, f')` in one pass.
    pub fn f_and_prime(&self, t: f64) -> Result<(f64, f64)> {
        check_t(t)?;
        if t == 0.0 {
            return Ok((0.0, -1.5 * self.eval_F_prime(0.0)?));
        }
        let f = self.eval_f(t)?;
        Ok((f, -self.eval_F_prime(t)? + f / (3.0 * t)))
    }

    /// `1 − f(t) + 3t f'(t)`, positive for all `t ≥ 0`.
    pub fn positivity_combination(&self, t: f64) -> Result<f64> {
        let (f, fp) = self.f_and_prime(t)?;
        Ok(1.0 - f + 3.0 * t * fp)
    }

    /// `G(t) = f'(t) t^{2/3} − f(t) t^{−1/3}`, evaluated as
    /// `(2/3) ∫_0^t (F'(s) − F'(t)) s^{−1/3} ds` to avoid cancellation.
    pub fn monotonicity_gap(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let fp_t = self.eval_F_prime(t)?;
        let integral = self.sigma_integral(t, |s| Ok(self.eval_F_prime(s)? - fp_t))?;
        Ok(2.0 / 3.0 * integral)
    }
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        domain(format!("profile argument must be a finite nonnegative number, got {t}"))
    }
}

/// `t = 0` followed by `samples − 1` log-spaced points in `[t_min, t_max]`.
pub fn t_sweep(samples: usize, t_min: f64, t_max: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    if samples < 2 {
        return out;
    }
    let m = samples - 1;
    let (a, b) = (t_min.log10(), t_max.log10());
    for k in 0..m {
        let s = if m == 1 { 0.0 } else { k as f64 / (m - 1) as f64 };
        out.push(10f64.powf(a + (b - a) * s));
    }
    out
}

/// One row of the profile table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub t: f64,
    pub big_f: f64,
    pub big_f_prime: f64,
    pub f: f64,
    pub f_prime: f64,
    pub residual: f64,
}

/// Evaluates the profile on every sample point.
pub fn profile_table(profile: &ConformalProfile, ts: &[f64]) -> Result<Vec<ProfileRow>> {
    ts.iter()
        .map(|&t| {
            let big_f = profile.eval_F(t)?;
            let (f, f_prime) = profile.f_and_prime(t)?;
            Ok(ProfileRow {
                t,
                big_f,
                big_f_prime: profile.f_prime_from(t, big_f),
                f,
                f_prime,
                residual: profile.functional_residual(t, big_f).abs(),
            })
        })
        .collect()
}

/// Worst-case values of every profile identity on a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileAudit {
    pub max_functional_residual: f64,
    pub f_at_zero_error: f64,
    pub max_closed_form_gap: f64,
    pub f_zero_value: f64,
    pub max_f_prime: f64,
    pub f_prime_monotone_violations: usize,
    pub min_positivity: f64,
    pub max_positivity_rel_gap: f64,
    pub min_monotonicity_gap: f64,
}

pub fn audit_profile(profile: &ConformalProfile, ts: &[f64]) -> Result<ProfileAudit> {
    let rows = profile_table(profile, ts)?;
    let mut audit = ProfileAudit {
        max_functional_residual: 0.0,
        f_at_zero_error: (profile.eval_F(0.0)? - profile.c().abs().ln()).abs(),
        max_closed_form_gap: 0.0,
        f_zero_value: profile.eval_f(0.0)?,
        max_f_prime: f64::NEG_INFINITY,
        f_prime_monotone_violations: 0,
        min_positivity: f64::INFINITY,
        max_positivity_rel_gap: 0.0,
        min_monotonicity_gap: f64::INFINITY,
    };
    let mut prev_fp: Option<f64> = None;
    for row in &rows {
        audit.max_functional_residual = audit.max_functional_residual.max(row.residual);
        let pos = 1.0 - row.f + 3.0 * row.t * row.f_prime;
        audit.min_positivity = audit.min_positivity.min(pos);
        if row.t > 0.0 {
            let closed = profile.eval_F_closed_form(row.t)?;
            audit.max_closed_form_gap = audit.max_closed_form_gap.max((closed - row.big_f).abs());
            audit.max_f_prime = audit.max_f_prime.max(row.f_prime);
            if let Some(p) = prev_fp {
                if row.f_prime <= p {
                    audit.f_prime_monotone_violations += 1;
                }
            }
            prev_fp = Some(row.f_prime);
            let aux = profile.aux_log_derivative(row.t);
            audit.max_positivity_rel_gap = audit.max_positivity_rel_gap.max((aux - pos).abs() / pos.abs());
            audit.min_monotonicity_gap = audit.min_monotonicity_gap.min(profile.monotonicity_gap(row.t)?);
        }
    }
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_uses_cube_of_c() {
        let p = ConformalProfile::new(-2.0).unwrap();
        assert!((p.zeta() - 16.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonnegative_c() {
        assert!(ConformalProfile::new(0.0).is_err());
        assert!(ConformalProfile::new(1.0).is_err());
        assert!(ConformalProfile::with_options(-1.0, 1e-12, 4).is_err());
    }

    #[test]
    fn sweep_starts_at_zero() {
        let ts = t_sweep(1000, 1e-6, 1e4);
        assert_eq!(ts.len(), 1000);
        assert_eq!(ts[0], 0.0);
        assert!((ts[999] - 1e4).abs() < 1e-8);
    }
}
