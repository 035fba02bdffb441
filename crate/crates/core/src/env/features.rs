use crate::error::{Error, Result};

/// Encodes a scalar parameter as responses of `J` Gaussian bumps with equally
/// spaced centers on `[a, b]` and shared width `(b − a)/J`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianFeaturizer {
    centers: Vec<f64>,
    sigma: f64,
    bounds: (f64, f64),
}

impl GaussianFeaturizer {
    /// `j = 0` disables the encoding (single-parameter runs).
    pub fn new(j: usize, a: f64, b: f64) -> Result<Self> {
        if j == 0 {
            return Ok(GaussianFeaturizer {
                centers: Vec::new(),
                sigma: 1.0,
                bounds: (a, b),
            });
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Invalid(format!(
                "featurization interval [{a}, {b}] must be nonempty"
            )));
        }
        let centers = if j == 1 {
            vec![0.5 * (a + b)]
        } else {
            (0..j)
                .map(|i| a + i as f64 / (j - 1) as f64 * (b - a))
                .collect()
        };
        Ok(GaussianFeaturizer {
            centers,
            sigma: (b - a) / j as f64,
            bounds: (a, b),
        })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn featurize(&self, r: f64) -> Vec<f64> {
        self.centers
            .iter()
            .map(|mu| {
                let z = (r - mu) / self.sigma;
                (-0.5 * z * z).exp()
            })
            .collect()
    }
}
