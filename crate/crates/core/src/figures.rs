// SPDX-License-Identifier: Apache-2.0

//! Data behind the three figures: the deviation `δ(m, V)`, fidelity decays in
//! mismatched bases, and the basis sweep over `θ_z`.

use std::ops::RangeInclusive;

use crate::channel::SuperOp;
use crate::clifford::CliffordGroup;
use crate::correct::{find_basis, gateset_fidelity, AscentConfig};
use crate::error::{Error, Result};
use crate::noise::{build_noisy_gateset, NoiseModel};
use crate::twirl::{build_twirl, dominant_spectrum, fidelity_curve_exact, FidelityCurve, SpectralData, TwirlSuperchannel};

/// Everything derived from one noise model: noisy gate-set, twirl, dominant
/// spectrum and the corrected basis `U`.
pub struct Analysis {
    pub noisy: Vec<SuperOp>,
    pub twirl: TwirlSuperchannel,
    pub spectral: SpectralData,
    pub basis: SuperOp,
}

pub fn analyze(group: &CliffordGroup, model: &NoiseModel, cfg: &AscentConfig) -> Result<Analysis> {
    let noisy = build_noisy_gateset(model, group)?;
    let twirl = build_twirl(group, &noisy)?;
    let spectral = dominant_spectrum(&twirl)?;
    let basis = find_basis(&twirl.order_m_errors(4).right, group.dim(), cfg)?;
    Ok(Analysis { noisy, twirl, spectral, basis })
}

/// Default figure models: Z-tilt with over-rotated CZ, and pure over-rotation.
pub fn z_tilt(theta_z: f64) -> NoiseModel {
    NoiseModel::ZTilt { theta_z, cz_offset: 0.1 }
}

pub fn over_rotation() -> NoiseModel {
    NoiseModel::OverRotation { offset: 0.1, cz_offset: 0.1 }
}

#[derive(Clone, Debug)]
pub struct DeltaFigure {
    pub p: f64,
    /// `(1 − p)²`
    pub ref_p: f64,
    /// `(1 − F(G̃, G, 1))²`
    pub ref_f: f64,
    pub depths: Vec<usize>,
    pub delta_i: Vec<f64>,
    pub delta_u: Vec<f64>,
}

pub fn fig_delta(group: &CliffordGroup, model: &NoiseModel, max_depth: usize, cfg: &AscentConfig) -> Result<DeltaFigure> {
    let an = analyze(group, model, cfg)?;
    let depths: Vec<usize> = (1..=max_depth).collect();
    let id = SuperOp::identity(group.dim());
    let ci = fidelity_curve_exact(&an.twirl, &an.spectral, &id, "I", &depths);
    let cu = fidelity_curve_exact(&an.twirl, &an.spectral, &an.basis, "U", &depths);
    let f1 = gateset_fidelity(group, &an.noisy, &id)?;
    let p = an.spectral.p;
    Ok(DeltaFigure {
        p,
        ref_p: (1.0 - p).powi(2),
        ref_f: (1.0 - f1).powi(2),
        depths,
        delta_i: ci.delta.iter().map(|d| d.abs()).collect(),
        delta_u: cu.delta.iter().map(|d| d.abs()).collect(),
    })
}

/// Straight-line fit of `log(F − 1/d)` against `m`.
#[derive(Clone, Debug)]
pub struct LogFit {
    pub tag: String,
    pub slope: f64,
    pub log_intercept: f64,
    /// Extrapolated `F(0) = 1/d + e^b`.
    pub intercept: f64,
}

pub fn log_fit(dim: usize, tag: &str, depths: &[usize], fidelity: &[f64]) -> Result<LogFit> {
    let floor = 1.0 / dim as f64;
    if depths.len() < 2 {
        return Err(Error::Fit("need at least two depths".into()));
    }
    let mut pts = Vec::with_capacity(depths.len());
    for (&m, &f) in depths.iter().zip(fidelity) {
        if f - floor <= 0.0 {
            return Err(Error::Fit(format!("F({m}) = {f} is not above 1/d")));
        }
        pts.push((m as f64, (f - floor).ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let b = my - slope * mx;
    Ok(LogFit { tag: tag.to_string(), slope, log_intercept: b, intercept: floor + b.exp() })
}

#[derive(Clone, Debug)]
pub struct PblochFigure {
    pub p: f64,
    /// Curves for `V = I, U, U²`.
    pub curves: Vec<FidelityCurve>,
    pub fits: Vec<LogFit>,
    pub fit_range: (usize, usize),
}

pub fn fig_pbloch(
    group: &CliffordGroup,
    model: &NoiseModel,
    max_depth: usize,
    fit_range: RangeInclusive<usize>,
    cfg: &AscentConfig,
) -> Result<PblochFigure> {
    let an = analyze(group, model, cfg)?;
    let depths: Vec<usize> = (0..=max_depth.max(*fit_range.end())).collect();
    let u2 = an.basis.compose(&an.basis);
    let bases = [("I", SuperOp::identity(group.dim())), ("U", an.basis.clone()), ("U2", u2)];
    let mut curves = Vec::new();
    let mut fits = Vec::new();
    for (tag, v) in &bases {
        let c = fidelity_curve_exact(&an.twirl, &an.spectral, v, tag, &depths);
        let (ms, fs): (Vec<usize>, Vec<f64>) = c
            .depths
            .iter()
            .zip(&c.fidelity)
            .filter(|(m, _)| fit_range.contains(m))
            .map(|(&m, &f)| (m, f))
            .unzip();
        fits.push(log_fit(group.dim(), tag, &ms, &fs)?);
        curves.push(c);
    }
    Ok(PblochFigure { p: an.spectral.p, curves, fits, fit_range: (*fit_range.start(), *fit_range.end()) })
}

#[derive(Clone, Debug)]
pub struct BasisPoint {
    pub theta_z: f64,
    pub p: f64,
    /// `1 − F(G̃, G, 1)`
    pub infidelity_i: f64,
    /// `1 − F(G̃, U G U†, 1)`
    pub infidelity_u: f64,
    /// `(d − 1)(1 − p)/d`, which is `(1 − p)/2` for one qubit.
    pub rb_infidelity: f64,
}

/// Z-tilt sweep with an ideal CZ so that `θ_z = 0` is noiseless.
pub fn fig_basis(group: &CliffordGroup, thetas: &[f64], cfg: &AscentConfig) -> Result<Vec<BasisPoint>> {
    let d = group.dim() as f64;
    thetas
        .iter()
        .map(|&theta_z| {
            let an = analyze(group, &NoiseModel::ZTilt { theta_z, cz_offset: 0.0 }, cfg)?;
            let p = an.spectral.p;
            Ok(BasisPoint {
                theta_z,
                p,
                infidelity_i: 1.0 - gateset_fidelity(group, &an.noisy, &SuperOp::identity(group.dim()))?,
                infidelity_u: 1.0 - gateset_fidelity(group, &an.noisy, &an.basis)?,
                rb_infidelity: (d - 1.0) * (1.0 - p) / d,
            })
        })
        .collect()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_fit_recovers_line() {
        let ms: Vec<usize> = (5..=10).collect();
        let fs: Vec<f64> = ms.iter().map(|&m| 0.5 + 0.49 * 0.97f64.powi(m as i32)).collect();
        let f = log_fit(2, "x", &ms, &fs).unwrap();
        assert!((f.intercept - 0.99).abs() < 1e-12);
        assert!((f.slope - 0.97f64.ln()).abs() < 1e-12);
        assert!(log_fit(2, "x", &[1, 2], &[0.5, 0.4]).is_err());
    }

    #[test]
    fn zero_noise_pbloch_is_flat() {
        let g = CliffordGroup::standard(2).unwrap();
        let fig = fig_pbloch(&g, &NoiseModel::Ideal, 12, 5..=10, &AscentConfig::default()).unwrap();
        for c in &fig.curves {
            assert!(c.fidelity.iter().all(|f| (f - 1.0).abs() < 1e-12));
        }
        assert!(fig.fits.iter().all(|f| (f.intercept - 1.0).abs() < 1e-12));
    }

    #[test]
    fn basis_sweep_starts_noiseless() {
        let g = CliffordGroup::standard(2).unwrap();
        let pts = fig_basis(&g, &[0.0], &AscentConfig::default()).unwrap();
        assert!(pts[0].infidelity_i.abs() < 1e-12 && pts[0].infidelity_u.abs() < 1e-12);
        assert!(pts[0].rb_infidelity.abs() < 1e-12);
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.0, 0.3, 31);
        assert_eq!(v.len(), 31);
        assert_eq!(v[0], 0.0);
        assert!((v[30] - 0.3).abs() < 1e-15 && (v[10] - 0.1).abs() < 1e-15);
    }
}
