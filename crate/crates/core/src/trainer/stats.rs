use crate::error::{Error, Result};

/// Mean with separate spreads below and above it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymmetricSpread {
    pub mean: f64,
    pub minus: f64,
    pub plus: f64,
}

/// `σ₋ = √(Σ_{x<x̄}(x̄ − x)²/(N₋ − 1))`, `σ₊` likewise above the mean. A side
/// with at most one sample reports zero.
pub fn asymmetric_spread(xs: &[f64]) -> Result<AsymmetricSpread> {
    if xs.is_empty() {
        return Err(Error::Invalid("spread of an empty sample".into()));
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let side = |below: bool| {
        let devs: Vec<f64> = xs
            .iter()
            .filter(|x| if below { **x < mean } else { **x > mean })
            .map(|x| (x - mean) * (x - mean))
            .collect();
        if devs.len() <= 1 {
            0.0
        } else {
            (devs.iter().sum::<f64>() / (devs.len() - 1) as f64).sqrt()
        }
    };
    Ok(AsymmetricSpread {
        mean,
        minus: side(true),
        plus: side(false),
    })
}

/// Mean absolute deviation of one predicted curve from the reference.
pub fn mean_abs_error(predicted: &[f64], reference: &[f64]) -> Result<f64> {
    if predicted.len() != reference.len() || predicted.is_empty() {
        return Err(Error::Dimension {
            expected: reference.len(),
            got: predicted.len(),
        });
    }
    Ok(predicted
        .iter()
        .zip(reference)
        .map(|(p, e)| (p - e).abs())
        .sum::<f64>()
        / predicted.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PecSummary {
    /// Mean absolute error of each run.
    pub per_run: Vec<f64>,
    /// Spread of the per-run errors.
    pub runs: AsymmetricSpread,
    /// Smallest per-run error.
    pub best: f64,
    /// Spread of the predicted energies across runs at each grid point.
    pub pointwise: Vec<AsymmetricSpread>,
}

/// Error statistics of several predicted curves sharing one grid.
pub fn pec_statistics(runs: &[Vec<f64>], reference: &[f64]) -> Result<PecSummary> {
    if runs.is_empty() {
        return Err(Error::Invalid("no runs to summarize".into()));
    }
    let per_run = runs
        .iter()
        .map(|r| mean_abs_error(r, reference))
        .collect::<Result<Vec<_>>>()?;
    let pointwise = (0..reference.len())
        .map(|i| asymmetric_spread(&runs.iter().map(|r| r[i]).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok(PecSummary {
        runs: asymmetric_spread(&per_run)?,
        best: per_run.iter().copied().fold(f64::INFINITY, f64::min),
        per_run,
        pointwise,
    })
}

/// Average number of episodes spent per training parameter value.
pub fn cost_per_parameter(episodes: usize, n_values: usize) -> Result<f64> {
    if n_values == 0 {
        return Err(Error::Invalid("no training values".into()));
    }
    Ok(episodes as f64 / n_values as f64)
}

/// Rounds to the nearest multiple of `unit`.
pub fn round_to(x: f64, unit: f64) -> f64 {
    (x / unit).round() * unit
}

/// Trailing-window means over full windows: element `i` averages
/// `xs[i ..= i + window − 1]`.
pub fn moving_average(xs: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window > xs.len() {
        return Err(Error::Invalid(format!(
            "window {window} does not fit a series of {}",
            xs.len()
        )));
    }
    let mut out = Vec::with_capacity(xs.len() - window + 1);
    let mut acc: f64 = xs[..window].iter().sum();
    out.push(acc / window as f64);
    for i in window..xs.len() {
        acc += xs[i] - xs[i - window];
        out.push(acc / window as f64);
    }
    Ok(out)
}
