use crate::error::{Error, Result};
use crate::special::{gamma, ln_gamma};

/// Two-parameter Mittag-Leffler function E_{α,β}(z) = Σ_{k≥0} z^k / Γ(αk + β).
///
/// Direct series, stopped once a term drops below 1e-16 of the partial sum
/// past the peak term. Fails when terms overflow or when alternating terms
/// cancel so badly that fewer than ~8 significant digits survive.
pub fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::precondition(format!(
            "mittag_leffler needs alpha, beta > 0 (got {alpha}, {beta})"
        )));
    }
    if z == 0.0 {
        return Ok(1.0 / gamma(beta));
    }
    let lz = z.abs().ln();
    let neg = z < 0.0;
    let mut sum = 0.0;
    let mut max_term: f64 = 0.0;
    let mut prev_mag = f64::INFINITY;
    for k in 0..100_000usize {
        let arg = alpha * k as f64 + beta;
        let mag = if arg < 170.0 && k as f64 * lz < 700.0 {
            z.abs().powi(k as i32) / gamma(arg)
        } else {
            (k as f64 * lz - ln_gamma(arg)).exp()
        };
        if !mag.is_finite() || mag > 1e300 {
            return Err(Error::numerical(format!("mittag_leffler: terms overflow at z = {z}")));
        }
        let term = if neg && k % 2 == 1 { -mag } else { mag };
        sum += term;
        max_term = max_term.max(mag);
        let past_peak = mag <= prev_mag;
        if past_peak && mag <= 1e-16 * sum.abs() {
            break;
        }
        if past_peak && sum == 0.0 && mag == 0.0 {
            break;
        }
        prev_mag = mag;
        if k == 99_999 {
            return Err(Error::numerical("mittag_leffler: series did not converge"));
        }
    }
    if neg && max_term > 1e8 * sum.abs() {
        return Err(Error::numerical(format!(
            "mittag_leffler: cancellation at z = {z} leaves too few digits (max term {max_term:e})"
        )));
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn classical_identities() {
        assert!((mittag_leffler(1.0, 1.0, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-12);
        assert!((mittag_leffler(2.0, 1.0, 1.0).unwrap() - 1f64.cosh()).abs() < 1e-12);
        assert_relative_eq!(mittag_leffler(1.0, 1.0, -2.0).unwrap(), (-2f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(mittag_leffler(2.0, 1.0, 9.0).unwrap(), 3f64.cosh(), max_relative = 1e-13);
        // E_{1,2}(z) = (e^z − 1)/z
        assert_relative_eq!(mittag_leffler(1.0, 2.0, 3.0).unwrap(), (3f64.exp() - 1.0) / 3.0, max_relative = 1e-13);
        // E_{1/2,1}(z) = e^{z²} erfc(−z); at z = 1: e·(1 + erf 1)
        let erf1 = 0.842_700_792_949_714_9;
        assert_relative_eq!(
            mittag_leffler(0.5, 1.0, 1.0).unwrap(),
            std::f64::consts::E * (1.0 + erf1),
            max_relative = 1e-12
        );
    }

    #[test]
    fn value_at_zero() {
        assert_relative_eq!(mittag_leffler(0.7, 2.5, 0.0).unwrap(), 1.0 / gamma(2.5), max_relative = 1e-15);
    }

    #[test]
    fn guards() {
        assert!(mittag_leffler(0.0, 1.0, 1.0).is_err());
        assert!(mittag_leffler(1.0, 1.0, -50.0).is_err());
        assert!(mittag_leffler(0.1, 1.0, 800.0).is_err());
    }
}
