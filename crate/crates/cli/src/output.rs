// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rbfid::rb::DecayFit;
use serde::Serialize;

/// Shortest round-trip representation in scientific notation.
pub fn f(x: f64) -> String {
    format!("{x:e}")
}

/// Output directory plus the metadata stamped on every file.
pub struct Output {
    dir: PathBuf,
    header: Vec<(String, String)>,
}

impl Output {
    pub fn new(dir: &Path, command: &str, seed: u64, dim: usize, config: Option<&Path>) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let header = vec![
            ("tool".to_string(), format!("rbfid {}", env!("CARGO_PKG_VERSION"))),
            ("command".to_string(), command.to_string()),
            ("seed".to_string(), seed.to_string()),
            ("dim".to_string(), dim.to_string()),
            ("config".to_string(), config.map_or("none".to_string(), |p| p.display().to_string())),
        ];
        Ok(Output { dir: dir.to_path_buf(), header })
    }

    fn preamble(&self, extra: &[(&str, String)]) -> String {
        let mut s = String::new();
        for (k, v) in self.header.iter().map(|(k, v)| (k.as_str(), v)).chain(extra.iter().map(|(k, v)| (*k, v))) {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        s
    }

    pub fn csv<I>(&self, name: &str, extra: &[(&str, String)], columns: &[&str], rows: I) -> std::io::Result<PathBuf>
    where
        I: Iterator<Item = Vec<String>>,
    {
        let path = self.dir.join(name);
        let mut file = fs::File::create(&path)?;
        file.write_all(self.preamble(extra).as_bytes())?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(columns)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn toml<T: Serialize>(&self, name: &str, extra: &[(&str, String)], value: &T) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        let body = toml::to_string(value).map_err(std::io::Error::other)?;
        fs::write(&path, self.preamble(extra) + &body)?;
        Ok(path)
    }
}

#[derive(Serialize)]
pub struct FitSummary {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub a_ci: [f64; 2],
    pub b_ci: [f64; 2],
    pub p_ci: [f64; 2],
    pub p_std: f64,
    pub converged: bool,
    pub flag: String,
    pub residual_norm: f64,
    pub depths: Vec<usize>,
    pub mean_survival: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl FitSummary {
    pub fn from_fit(fit: &DecayFit) -> Self {
        let ci = |i: usize| [fit.ci[i].0, fit.ci[i].1];
        FitSummary {
            a: fit.a,
            b: fit.b,
            p: fit.p,
            a_ci: ci(0),
            b_ci: ci(1),
            p_ci: ci(2),
            p_std: fit.std[2],
            converged: fit.converged,
            flag: fit.flag.clone().unwrap_or_default(),
            residual_norm: fit.residual_norm,
            depths: fit.depths.clone(),
            mean_survival: fit.mean_survival.clone(),
            residuals: fit.residuals.clone(),
        }
    }
}
