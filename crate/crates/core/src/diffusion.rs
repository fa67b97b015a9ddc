//! Diffusion coefficients of the coupled system: the gray-level indicator,
//! the fractional-gradient texture detector, and the coefficients `c` (for
//! `u`) and `a` (for `v`).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::ImageField;
use crate::spectral::{frac_gradient, FracOutput};

/// How the texture detector's argument is formed from `(Dx, Dy)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TextureForm {
    /// `(Dx² + Dy²)^{β/2}`, i.e. `|∇^α u|^β`.
    #[default]
    Magnitude,
    /// `(Dx + Dy)^{β/2}` evaluated literally. Produces NaN wherever the sum
    /// is negative and β/2 is fractional; comparison use only.
    LiteralSum,
}

/// Constants of the model. The gray-level normalizer `M` is not part of the
/// parameter set: it is derived from the observed image and passed alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Fractional order of the gradient in the texture detector.
    pub alpha: f64,
    /// Texture exponent.
    pub beta: f64,
    /// Gray-level exponent applied to `v`.
    pub gamma: f64,
    /// Gray-level exponent applied to `u` inside `a`.
    pub mu: f64,
    /// Texture contrast.
    pub k1: f64,
    /// Fidelity weight.
    pub lambda: f64,
    /// Weight of the `u` indicator inside `a`.
    pub lambda1: f64,
    #[serde(default)]
    pub frac_output: FracOutput,
    #[serde(default)]
    pub texture_form: TextureForm,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            alpha: 0.9,
            beta: 1.0,
            gamma: 1.0,
            mu: 0.4,
            k1: 1.0,
            lambda: 45.0,
            lambda1: 0.9,
            frac_output: FracOutput::RealPart,
            texture_form: TextureForm::Magnitude,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !open_unit(self.alpha) {
            return Err(invalid("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        if !positive(self.beta) {
            return Err(invalid("beta", format!("must be positive, got {}", self.beta)));
        }
        if !positive(self.gamma) {
            return Err(invalid("gamma", format!("must be positive, got {}", self.gamma)));
        }
        if !positive(self.mu) {
            return Err(invalid("mu", format!("must be positive, got {}", self.mu)));
        }
        if !positive(self.k1) {
            return Err(invalid("k1", format!("must be positive, got {}", self.k1)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda", format!("must be non-negative, got {}", self.lambda)));
        }
        if !open_unit(self.lambda1) {
            return Err(invalid("lambda1", format!("must lie in (0, 1), got {}", self.lambda1)));
        }
        Ok(())
    }
}

fn check_gray_max(m: f64) -> Result<()> {
    if m > 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(invalid("M", format!("gray-level normalizer must be positive, got {m}")))
    }
}

/// `(|v| / M)^exponent` per pixel.
pub fn gray_indicator(field: &ImageField, exponent: f64, m: f64) -> Result<ImageField> {
    check_gray_max(m)?;
    Ok(field.map(|x| (x.abs() / m).powf(exponent)))
}

/// `b(g) = 1 / (1 + k1 g^β)`.
pub fn texture_detector(gmag: &ImageField, k1: f64, beta: f64) -> Result<ImageField> {
    if let Some(x) = gmag.data().iter().find(|&&x| !(x >= 0.0)) {
        return Err(invalid(
            "gmag",
            format!("gradient magnitudes must be non-negative, found {x}"),
        ));
    }
    Ok(gmag.map(|g| 1.0 / (1.0 + k1 * g.powf(beta))))
}

/// `c = (|v|/M)^γ · b(|∇^α u|)`.
pub fn coeff_c(u: &ImageField, v: &ImageField, params: &ModelParams, m: f64, h: f64) -> Result<ImageField> {
    u.ensure_same_dims(v)?;
    let indicator = gray_indicator(v, params.gamma, m)?;
    let (dx, dy) = frac_gradient(u, params.alpha, h, params.frac_output)?;
    let detector = match params.texture_form {
        TextureForm::Magnitude => texture_detector(&dx.zip_map(&dy, f64::hypot)?, params.k1, params.beta)?,
        TextureForm::LiteralSum => dx.zip_map(&dy, |x, y| 1.0 / (1.0 + params.k1 * (x + y).powf(params.beta / 2.0)))?,
    };
    indicator.zip_map(&detector, |g, b| g * b)
}

/// `a = λ1 (|u|/M)^μ + (1 - λ1) (|v|/M)^γ`.
pub fn coeff_a(u: &ImageField, v: &ImageField, params: &ModelParams, m: f64) -> Result<ImageField> {
    u.ensure_same_dims(v)?;
    let from_u = gray_indicator(u, params.mu, m)?;
    let from_v = gray_indicator(v, params.gamma, m)?;
    let l1 = params.lambda1;
    from_u.zip_map(&from_v, |x, y| l1 * x + (1.0 - l1) * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(v: f64) -> ImageField {
        ImageField::filled(8, 8, v).unwrap()
    }

    #[test]
    fn indicator_values() {
        assert!(gray_indicator(&flat(200.0), 0.4, 200.0)
            .unwrap()
            .data()
            .iter()
            .all(|&x| x == 1.0));
        assert!(gray_indicator(&flat(0.0), 1.0, 255.0)
            .unwrap()
            .data()
            .iter()
            .all(|&x| x == 0.0));
        assert_eq!(gray_indicator(&flat(127.5), 1.0, 255.0).unwrap().at(0, 0), 0.5);
        assert!(gray_indicator(&flat(1.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn detector_values() {
        assert_eq!(texture_detector(&flat(0.0), 1.0, 1.0).unwrap().at(0, 0), 1.0);
        assert_eq!(texture_detector(&flat(1.0), 1.0, 1.0).unwrap().at(0, 0), 0.5);
        let mut prev = 1.0;
        for g in [0.5, 2.0, 10.0, 1e3, 1e6] {
            let b = texture_detector(&flat(g), 1.0, 0.63).unwrap().at(0, 0);
            assert!(b < prev && b > 0.0);
            prev = b;
        }
        assert!(prev < 1e-3);
        assert!(texture_detector(&flat(-1.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn coefficient_c_limits() {
        let p = ModelParams::default();
        let c = coeff_c(&flat(30.0), &flat(255.0), &p, 255.0, 1.0).unwrap();
        assert!(c.data().iter().all(|&x| (x - 1.0).abs() < 1e-12));
        let c0 = coeff_c(&flat(30.0), &flat(0.0), &p, 255.0, 1.0).unwrap();
        assert!(c0.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn coefficient_a_values() {
        let p = ModelParams::default();
        let a = coeff_a(&flat(255.0), &flat(255.0), &p, 255.0).unwrap();
        assert!(a.data().iter().all(|&x| (x - 1.0).abs() < 1e-15));
        let a0 = coeff_a(&flat(0.0), &flat(0.0), &p, 255.0).unwrap();
        assert!(a0.data().iter().all(|&x| x == 0.0));
        let a9 = coeff_a(&flat(255.0), &flat(0.0), &p, 255.0).unwrap();
        assert!(a9.data().iter().all(|&x| (x - 0.9).abs() < 1e-15));
    }

    #[test]
    fn params_ranges_enforced() {
        assert!(ModelParams::default().validate().is_ok());
        for bad in [
            ModelParams {
                alpha: 1.0,
                ..Default::default()
            },
            ModelParams {
                beta: 0.0,
                ..Default::default()
            },
            ModelParams {
                lambda: -1.0,
                ..Default::default()
            },
            ModelParams {
                lambda1: 1.0,
                ..Default::default()
            },
            ModelParams {
                k1: 0.0,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
        assert!(ModelParams {
            beta: 0.63,
            ..Default::default()
        }
        .validate()
        .is_ok());
    }
}
