//! Probability-integral transform between remainder panels and the standard
//! normal scale.
//!
//! Forward: `z = Phi^-1(F(x))` per coordinate, with the marginal CDF clamped
//! to `[1e-12, 1 - 1e-12]` so scores stay finite (|z| <= ~7.03). Backward:
//! `x = F^-1(Phi(z))`. Both directions are strictly monotone per coordinate,
//! so scenario ranks survive the roundtrip.

use crate::error::{Error, Result};
use crate::normal::{norm_cdf, norm_quantile, CDF_CLAMP};
use crate::panel::{GaussianPanel, RemainderPanel};
use crate::tails::Marginal;

fn check_len(marginals: &[Marginal], flat_dim: usize) -> Result<()> {
    if marginals.len() != flat_dim {
        return Err(Error::Mismatch(format!(
            "{} marginals supplied for {} panel coordinates",
            marginals.len(),
            flat_dim
        )));
    }
    Ok(())
}

/// Maps a remainder panel onto the standard normal scale through the fitted
/// marginals, indexed `z * L + l`.
pub fn to_gaussian(panel: &RemainderPanel, marginals: &[Marginal]) -> Result<GaussianPanel> {
    check_len(marginals, panel.flat_dim())?;
    let lags = panel.l();
    let out = panel.map(|_, z, l, x| {
        let u = marginals[z * lags + l].cdf(x);
        norm_quantile(u)
    })?;
    Ok(GaussianPanel::new(out))
}

/// Inverse transform: normal scores back to physical remainders.
pub fn from_gaussian(panel: &GaussianPanel, marginals: &[Marginal]) -> Result<RemainderPanel> {
    check_len(marginals, panel.flat_dim())?;
    let lags = panel.l();
    let out = panel.map(|_, z, l, s| {
        let u = norm_cdf(s).clamp(CDF_CLAMP, 1.0 - CDF_CLAMP);
        marginals[z * lags + l].quantile(u)
    })?;
    Ok(RemainderPanel::new(out))
}
