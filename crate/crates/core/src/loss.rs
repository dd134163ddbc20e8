//! Cross-entropy loss on the logistic link, evaluated in `f64` and
//! quantized to the state memory's fixed-point format.

use crate::fixed::FixedFormat;

/// Logistic function without overflow for large |margin|.
pub fn sigmoid(margin: f64) -> f64 {
    if margin >= 0.0 {
        1.0 / (1.0 + (-margin).exp())
    } else {
        let e = margin.exp();
        e / (1.0 + e)
    }
}

/// Quantized `(p - y, max(p (1 - p), 1 ulp))` for a fixed-point score.
///
/// The hessian floor keeps every sample's hessian strictly positive even
/// when `p` saturates.
pub fn gradient_pair(fx: FixedFormat, score: i64, label: u8) -> (i64, i64) {
    let p = sigmoid(fx.dequantize(score));
    let grad = fx.quantize(p - f64::from(label));
    let hess = fx.quantize(p * (1.0 - p)).max(1);
    (grad, hess)
}

/// Mean binary log loss of margins against labels.
pub fn log_loss(margins: impl IntoIterator<Item = f64>, labels: &[u8]) -> f64 {
    let mut total = 0.0;
    let mut n = 0usize;
    for (m, &y) in margins.into_iter().zip(labels) {
        // log(1 + e^m) - y m, stable form
        let softplus = if m > 0.0 {
            m + (-m).exp().ln_1p()
        } else {
            m.exp().ln_1p()
        };
        total += softplus - f64::from(y) * m;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        total / n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_margin() {
        let fx = FixedFormat::default();
        assert_eq!(gradient_pair(fx, 0, 1), (-8_388_608, 4_194_304));
        assert_eq!(gradient_pair(fx, 0, 0), (8_388_608, 4_194_304));
    }

    #[test]
    fn hessian_floor_at_saturation() {
        let fx = FixedFormat::default();
        let (g, h) = gradient_pair(fx, fx.quantize(60.0), 1);
        assert_eq!(g, 0);
        assert_eq!(h, 1);
    }

    #[test]
    fn sigmoid_symmetry() {
        for m in [-30.0, -2.5, 0.0, 1.0, 700.0] {
            assert!((sigmoid(m) + sigmoid(-m) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn log_loss_at_zero_margin_is_ln2() {
        let l = log_loss([0.0, 0.0], &[0, 1]);
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
