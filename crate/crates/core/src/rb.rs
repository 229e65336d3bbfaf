// SPDX-License-Identifier: Apache-2.0

//! Standard randomized benchmarking: sequence sampling with an inversion gate,
//! survival probabilities, and the `A p^m + B` decay fit.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{pauli_strings, CMatrix, SuperOp};
use crate::clifford::CliffordGroup;
use crate::error::{Error, Result};
use crate::twirl::job_rng;

const STATE_TOL: f64 = 1e-10;
/// Relative step and cost-decrease tolerance, as in MINPACK.
const LM_TOL: f64 = 1.49e-8;

/// Pauli vector of `|0…0⟩⟨0…0|`.
pub fn ground_state(dim: usize) -> Result<DVector<f64>> {
    let mut rho = CMatrix::zeros(dim, dim);
    rho[(0, 0)] = Complex64::new(1.0, 0.0);
    crate::channel::operator_to_pauli_vector(&rho)
}

fn pauli_operator(dim: usize, v: &DVector<f64>) -> Result<CMatrix> {
    let basis = pauli_strings(dim)?;
    if v.len() != basis.len() {
        return Err(Error::Shape(format!("expected a {}-vector, got {}", basis.len(), v.len())));
    }
    let s = (dim as f64).sqrt();
    Ok(basis
        .iter()
        .zip(v.iter())
        .fold(CMatrix::zeros(dim, dim), |acc, (p, &c)| acc + p * Complex64::new(c / s, 0.0)))
}

fn spectrum(dim: usize, v: &DVector<f64>) -> Result<(f64, f64)> {
    let ev = pauli_operator(dim, v)?.symmetric_eigen().eigenvalues;
    Ok((ev.min(), ev.max()))
}

#[derive(Clone, Debug)]
pub struct RbConfig {
    pub depths: Vec<usize>,
    /// Sequences per depth (`K`).
    pub sequences: usize,
    pub rho: DVector<f64>,
    pub mu: DVector<f64>,
    pub seed: u64,
    pub prep_noise: Option<SuperOp>,
    pub meas_noise: Option<SuperOp>,
}

impl RbConfig {
    /// Ground-state preparation and measurement, ideal SPAM.
    pub fn new(dim: usize, depths: Vec<usize>, sequences: usize, seed: u64) -> Result<Self> {
        let g = ground_state(dim)?;
        Ok(RbConfig { depths, sequences, rho: g.clone(), mu: g, seed, prep_noise: None, meas_noise: None })
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.depths.is_empty() || self.sequences == 0 {
            return Err(Error::Parameter("need at least one depth and one sequence".into()));
        }
        let tr = self.rho[0] * (dim as f64).sqrt();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::Parameter(format!("state has trace {tr}")));
        }
        let (lo, _) = spectrum(dim, &self.rho)?;
        if lo < -STATE_TOL {
            return Err(Error::Parameter(format!("state has negative eigenvalue {lo}")));
        }
        let (lo, hi) = spectrum(dim, &self.mu)?;
        if lo < -STATE_TOL || hi > 1.0 + STATE_TOL {
            return Err(Error::Parameter(format!("effect eigenvalues outside [0, 1]: [{lo}, {hi}]")));
        }
        for ch in [&self.prep_noise, &self.meas_noise].into_iter().flatten() {
            if ch.dim() != dim {
                return Err(Error::Dimension(ch.dim()));
            }
        }
        Ok(())
    }
}

/// Survival `⟨μ| S_M G̃_inv G̃_{s_m} ⋯ G̃_{s_1} S_P |ρ⟩` of one sequence.
pub fn sequence_survival(group: &CliffordGroup, noisy: &[SuperOp], cfg: &RbConfig, seq: &[usize]) -> Result<f64> {
    let n = group.dim() * group.dim();
    let mut ideal = DMatrix::<f64>::identity(n, n);
    let mut state = match &cfg.prep_noise {
        Some(ch) => ch.matrix() * &cfg.rho,
        None => cfg.rho.clone(),
    };
    for &g in seq {
        ideal = group.op(g).matrix() * ideal;
        let idx = group
            .lookup(&SuperOp::new(group.dim(), ideal)?)
            .ok_or(Error::MissingElement)?;
        // Snap back onto the stored element so rounding never accumulates.
        ideal = group.op(idx).matrix().clone();
        state = noisy[g].matrix() * state;
    }
    let inv = group.inverse(group.lookup(&SuperOp::new(group.dim(), ideal)?).ok_or(Error::MissingElement)?);
    state = noisy[inv].matrix() * state;
    if let Some(ch) = &cfg.meas_noise {
        state = ch.matrix() * state;
    }
    Ok(cfg.mu.dot(&state))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurvivalRow {
    pub depth: usize,
    pub sequence: usize,
    pub survival: f64,
}

#[derive(Clone, Debug)]
pub struct SurvivalTable {
    pub dim: usize,
    pub rows: Vec<SurvivalRow>,
}

impl SurvivalTable {
    /// Survivals grouped by depth, depths ascending.
    pub fn by_depth(&self) -> Vec<(usize, Vec<f64>)> {
        let mut depths: Vec<usize> = self.rows.iter().map(|r| r.depth).collect();
        depths.sort_unstable();
        depths.dedup();
        depths
            .into_iter()
            .map(|m| (m, self.rows.iter().filter(|r| r.depth == m).map(|r| r.survival).collect()))
            .collect()
    }
}

pub fn run_rb(group: &CliffordGroup, noisy: &[SuperOp], cfg: &RbConfig) -> Result<SurvivalTable> {
    if group.len() != noisy.len() {
        return Err(Error::Shape("noisy gate-set not aligned with group".into()));
    }
    cfg.validate(group.dim())?;
    let jobs: Vec<(usize, usize)> = cfg
        .depths
        .iter()
        .flat_map(|&m| (0..cfg.sequences).map(move |k| (m, k)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(m, k)| {
            let mut rng = job_rng(cfg.seed, m, k);
            let seq: Vec<usize> = (0..m).map(|_| group.random_element(&mut rng)).collect();
            Ok(SurvivalRow { depth: m, sequence: k, survival: sequence_survival(group, noisy, cfg, &seq)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurvivalTable { dim: group.dim(), rows })
}

#[derive(Clone, Debug)]
pub struct FitConfig {
    pub resamples: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { resamples: 200, seed: 0xb007, max_iter: 500 }
    }
}

#[derive(Clone, Debug)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    /// Percentile 95% intervals for `A`, `B`, `p`.
    pub ci: [(f64, f64); 3],
    /// Bootstrap standard deviations for `A`, `B`, `p`.
    pub std: [f64; 3],
    pub depths: Vec<usize>,
    pub mean_survival: Vec<f64>,
    /// `ε(m)`: mean survival minus the fitted model.
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
    pub converged: bool,
    /// Reason the fit should not be trusted, if any.
    pub flag: Option<String>,
}

struct Lm {
    params: Vector3<f64>,
    converged: bool,
}

fn model(t: &Vector3<f64>, m: f64) -> f64 {
    t[0] * t[2].powf(m) + t[1]
}

fn cost(t: &Vector3<f64>, xs: &[f64], ys: &[f64], ws: &[f64]) -> f64 {
    xs.iter().zip(ys).zip(ws).map(|((&m, &y), &w)| w * (y - model(t, m)).powi(2)).sum()
}

fn levenberg_marquardt(start: Vector3<f64>, xs: &[f64], ys: &[f64], ws: &[f64], max_iter: usize) -> Lm {
    let mut t = start;
    let mut c = cost(&t, xs, ys, ws);
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        if c <= 1e-30 {
            return Lm { params: t, converged: true };
        }
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for ((&m, &y), &w) in xs.iter().zip(ys).zip(ws) {
            let pm1 = if m == 0.0 { 0.0 } else { t[2].powf(m - 1.0) };
            let j = Vector3::new(t[2].powf(m), 1.0, t[0] * m * pm1);
            jtj += w * j * j.transpose();
            jtr += w * (y - model(&t, m)) * j;
        }
        if jtr.amax() <= 1e-15 * (1.0 + c) {
            return Lm { params: t, converged: true };
        }
        let mut accepted = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for i in 0..3 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let cand = t + step;
            let cc = cost(&cand, xs, ys, ws);
            if cc.is_finite() && cc <= c {
                let small = step.norm() <= LM_TOL * (t.norm() + LM_TOL);
                let flat = c - cc <= LM_TOL * c;
                t = cand;
                c = cc;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if small || flat {
                    return Lm { params: t, converged: true };
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No descent direction left at any damping: a minimum to working precision.
            return Lm { params: t, converged: true };
        }
    }
    Lm { params: t, converged: false }
}

fn initial_guess(dim: usize, xs: &[f64], ys: &[f64]) -> Vector3<f64> {
    let b0 = 1.0 / dim as f64;
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y - b0 > 1e-12)
        .map(|(&m, &y)| (m, (y - b0).ln()))
        .collect();
    let (p0, a0) = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        (slope.exp().min(1.0), (my - slope * mx).exp())
    } else {
        (0.99, 1.0 - b0)
    };
    Vector3::new(a0, b0, p0)
}

fn fit_means(dim: usize, xs: &[f64], ys: &[f64], ws: &[f64], max_iter: usize) -> Lm {
    levenberg_marquardt(initial_guess(dim, xs, ys), xs, ys, ws, max_iter)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn fit_decay(table: &SurvivalTable, cfg: &FitConfig) -> Result<DecayFit> {
    let groups = table.by_depth();
    if groups.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 distinct depths, got {}", groups.len())));
    }
    if cfg.resamples == 0 {
        return Err(Error::Parameter("bootstrap needs at least one resample".into()));
    }
    let xs: Vec<f64> = groups.iter().map(|(m, _)| *m as f64).collect();
    let ws: Vec<f64> = groups.iter().map(|(_, s)| s.len() as f64).collect();
    let ys: Vec<f64> = groups.iter().map(|(_, s)| mean(s)).collect();
    let fit = fit_means(table.dim, &xs, &ys, &ws, cfg.max_iter);

    let boots: Vec<Vector3<f64>> = (0..cfg.resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = job_rng(cfg.seed, 0, b);
            let ys: Vec<f64> = groups
                .iter()
                .map(|(_, s)| {
                    (0..s.len()).map(|_| *s.choose(&mut rng).expect("non-empty")).sum::<f64>() / s.len() as f64
                })
                .collect();
            fit_means(table.dim, &xs, &ys, &ws, cfg.max_iter).params
        })
        .collect();

    let mut ci = [(0.0, 0.0); 3];
    let mut std = [0.0; 3];
    for i in 0..3 {
        let mut v: Vec<f64> = boots.iter().map(|t| t[i]).collect();
        v.sort_by(f64::total_cmp);
        ci[i] = (percentile(&v, 0.025), percentile(&v, 0.975));
        let mu = mean(&v);
        std[i] = (v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (v.len().max(2) - 1) as f64).sqrt();
    }

    let t = fit.params;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(&m, &y)| y - model(&t, m)).collect();
    let flag = if !t.iter().all(|x| x.is_finite()) {
        Some("fit diverged".to_string())
    } else if !(0.0..=1.02).contains(&t[2]) {
        Some(format!("p = {} outside [0, 1.02]", t[2]))
    } else if !fit.converged {
        Some("fit did not converge".to_string())
    } else {
        None
    };
    Ok(DecayFit {
        a: t[0],
        b: t[1],
        p: t[2],
        ci,
        std,
        depths: groups.iter().map(|(m, _)| *m).collect(),
        mean_survival: ys,
        residual_norm: residuals.iter().map(|r| r * r).sum::<f64>().sqrt(),
        residuals,
        converged: fit.converged,
        flag,
    })
}

/// Synthetic survival table `A p^m + B` plus optional Gaussian noise per sequence.
pub fn synthetic_table<R: Rng + ?Sized>(
    dim: usize,
    (a, b, p): (f64, f64, f64),
    depths: &[usize],
    sequences: usize,
    sigma: f64,
    rng: &mut R,
) -> SurvivalTable {
    let mut rows = Vec::with_capacity(depths.len() * sequences);
    for &m in depths {
        for k in 0..sequences {
            let noise = if sigma > 0.0 { sigma * rng.sample::<f64, _>(rand_distr::StandardNormal) } else { 0.0 };
            rows.push(SurvivalRow { depth: m, sequence: k, survival: a * p.powi(m as i32) + b + noise });
        }
    }
    SurvivalTable { dim, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{build_noisy_gateset, NoiseModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn depths() -> Vec<usize> {
        vec![1, 2, 4, 8, 16, 32, 64, 128, 256]
    }

    #[test]
    fn exact_synthetic_data_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = synthetic_table(2, (0.5, 0.5, 0.99), &depths(), 4, 0.0, &mut rng);
        let fit = fit_decay(&t, &FitConfig::default()).unwrap();
        assert!((fit.a - 0.5).abs() < 1e-8, "{fit:?}");
        assert!((fit.b - 0.5).abs() < 1e-8);
        assert!((fit.p - 0.99).abs() < 1e-8);
        assert!(fit.flag.is_none());
    }

    #[test]
    fn noisy_synthetic_data_within_three_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = synthetic_table(2, (0.5, 0.5, 0.99), &depths(), 30, 0.005, &mut rng);
        let fit = fit_decay(&t, &FitConfig::default()).unwrap();
        assert!((fit.p - 0.99).abs() <= 3.0 * fit.std[2], "{} ± {}", fit.p, fit.std[2]);
        assert!(fit.ci.iter().zip([fit.a, fit.b, fit.p]).all(|((lo, hi), x)| lo <= &x && &x <= hi));
    }

    #[test]
    fn too_few_depths_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = synthetic_table(2, (0.5, 0.5, 0.99), &[1, 2], 4, 0.0, &mut rng);
        assert!(matches!(fit_decay(&t, &FitConfig::default()), Err(Error::Fit(_))));
    }

    #[test]
    fn out_of_range_p_is_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = synthetic_table(2, (0.05, 0.5, 1.05), &[1, 2, 3, 4, 5, 6], 2, 0.0, &mut rng);
        let fit = fit_decay(&t, &FitConfig { resamples: 10, ..Default::default() }).unwrap();
        assert!(fit.flag.is_some());
    }

    #[test]
    fn ideal_survival_is_one() {
        let g = CliffordGroup::standard(2).unwrap();
        let noisy = build_noisy_gateset(&NoiseModel::Ideal, &g).unwrap();
        let cfg = RbConfig::new(2, vec![1, 5, 20], 10, 7).unwrap();
        let t = run_rb(&g, &noisy, &cfg).unwrap();
        assert_eq!(t.rows.len(), 30);
        assert!(t.rows.iter().all(|r| (r.survival - 1.0).abs() < 1e-12));
    }

    #[test]
    fn run_is_reproducible() {
        let g = CliffordGroup::standard(2).unwrap();
        let noisy = build_noisy_gateset(&NoiseModel::OverRotation { offset: 0.1, cz_offset: 0.0 }, &g).unwrap();
        let cfg = RbConfig::new(2, vec![1, 3, 9], 8, 11).unwrap();
        let a = run_rb(&g, &noisy, &cfg).unwrap();
        let b = run_rb(&g, &noisy, &cfg).unwrap();
        assert_eq!(a.rows, b.rows);
        assert!(a.rows.iter().all(|r| (-1e-10..=1.0 + 1e-10).contains(&r.survival)));
    }

    #[test]
    fn invalid_states_rejected() {
        let mut cfg = RbConfig::new(2, vec![1], 1, 0).unwrap();
        cfg.rho[3] = 2.0;
        assert!(matches!(cfg.validate(2), Err(Error::Parameter(_))));
        let mut cfg = RbConfig::new(2, vec![1], 1, 0).unwrap();
        cfg.mu *= 2.0;
        assert!(matches!(cfg.validate(2), Err(Error::Parameter(_))));
        let mut cfg = RbConfig::new(2, vec![1], 1, 0).unwrap();
        cfg.rho[0] = 0.5;
        assert!(cfg.validate(2).is_err());
    }

    #[test]
    fn ground_state_vectors() {
        let s = 0.5f64.sqrt();
        let g = ground_state(2).unwrap();
        assert!((g - DVector::from_vec(vec![s, 0.0, 0.0, s])).norm() < 1e-15);
        let g4 = ground_state(4).unwrap();
        assert!((g4.norm() - 1.0).abs() < 1e-14);
        assert!((g4[0] - 0.5).abs() < 1e-15 && (g4[15] - 0.5).abs() < 1e-15);
    }
}
