//! Monte Carlo tests of the martingale property of `N_t - A_t`.
//!
//! For a pair `s < t` and a history functional `g` measurable at `s`, a
//! compensator is correct only if `E[((N_t - A_t) - (N_s - A_s)) g] = 0`.
//! The probes are the generators `1(N_s = k)`, `1(N_s >= k)` and the
//! constant 1.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::compensator::anticipative_intensity;
use crate::error::{Error, Result};
use crate::events::EventSequence;
use crate::model::IntensityModel;
use crate::simulate::simulate_ensemble;

/// |z| above this fails a probe.
pub const Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "k")]
pub enum Probe {
    One,
    CountEquals(usize),
    CountAtLeast(usize),
}

impl Probe {
    fn eval(self, path: &EventSequence, s: f64) -> f64 {
        match self {
            Probe::One => 1.0,
            Probe::CountEquals(k) => (path.count(s) == k) as u8 as f64,
            Probe::CountAtLeast(k) => (path.count(s) >= k) as u8 as f64,
        }
    }
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probe::One => write!(f, "1"),
            Probe::CountEquals(k) => write!(f, "1(N_s = {k})"),
            Probe::CountAtLeast(k) => write!(f, "1(N_s >= {k})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The probe vanished on every path.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub s: f64,
    pub t: f64,
    pub probe: Probe,
    pub description: String,
    pub mean: f64,
    pub std_error: f64,
    pub z: f64,
    pub n_paths: usize,
    /// Paths on which the probe is non-zero.
    pub n_active: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleTestReport {
    pub results: Vec<ProbeResult>,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl MartingaleTestReport {
    pub fn max_abs_z(&self) -> f64 {
        self.results.iter().filter(|r| r.verdict != Verdict::Skipped).map(|r| r.z.abs()).fold(0.0, f64::max)
    }
}

/// Mean, standard error and z-score against zero; z is 0 for an exactly
/// zero sample and saturates at `f64::MAX` for a constant non-zero one.
pub(crate) fn z_score(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let se = (var / n).sqrt();
    let z = if se > 0.0 {
        mean / se
    } else if mean == 0.0 {
        0.0
    } else {
        f64::MAX.copysign(mean)
    };
    (mean, se, z)
}

/// Runs every probe at every `(s, t)` pair.
///
/// `compensator(i, path, t)` returns `A_t` on path `i`; paths are evaluated
/// in parallel and reduced in path order, so reports are reproducible.
pub fn martingale_residual_test<F>(
    ensemble: &[EventSequence],
    compensator: F,
    pairs: &[(f64, f64)],
    probes: &[Probe],
) -> Result<MartingaleTestReport>
where
    F: Fn(usize, &EventSequence, f64) -> Result<f64> + Sync,
{
    if ensemble.is_empty() {
        return Err(Error::Empty("ensemble"));
    }
    if pairs.is_empty() || probes.is_empty() {
        return Err(Error::Empty("pairs or probes"));
    }
    for &(s, t) in pairs {
        if !(0.0 <= s && s < t) {
            return Err(Error::invalid("pair", format!("need 0 <= s < t, got ({s}, {t})")));
        }
        if let Some(p) = ensemble.iter().find(|p| t > p.horizon()) {
            return Err(Error::domain("t", t, format!("[0, {}]", p.horizon())));
        }
    }

    // per path: one (residual * g, g != 0) per (pair, probe)
    let per_path: Vec<Vec<(f64, bool)>> = ensemble
        .par_iter()
        .enumerate()
        .map(|(i, path)| {
            let mut row = Vec::with_capacity(pairs.len() * probes.len());
            for &(s, t) in pairs {
                let resid = (path.count(t) as f64 - compensator(i, path, t)?)
                    - (path.count(s) as f64 - compensator(i, path, s)?);
                for &g in probes {
                    let gv = g.eval(path, s);
                    row.push((resid * gv, gv != 0.0));
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut results = Vec::new();
    let mut col = 0;
    for &(s, t) in pairs {
        for &probe in probes {
            let xs: Vec<f64> = per_path.iter().map(|r| r[col].0).collect();
            let n_active = per_path.iter().filter(|r| r[col].1).count();
            let (mean, std_error, z) = z_score(&xs);
            let verdict = if n_active == 0 {
                Verdict::Skipped
            } else if z.abs() <= Z_THRESHOLD {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            results.push(ProbeResult {
                s,
                t,
                probe,
                description: format!("E[(M_t - M_s) * {probe}] = 0 on (s, t] = ({s}, {t}]"),
                mean,
                std_error,
                z,
                n_paths: ensemble.len(),
                n_active,
                verdict,
            });
            col += 1;
        }
    }
    let passed =
        results.iter().all(|r| r.verdict != Verdict::Fail) && results.iter().any(|r| r.verdict == Verdict::Pass);
    Ok(MartingaleTestReport { results, threshold: Z_THRESHOLD, passed, seed: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionCheck {
    /// Sample mean of `\int C dN`.
    pub counts: f64,
    /// Sample mean of `\int C dA`.
    pub compensated: f64,
    pub z: f64,
}

/// Compares `E[\int C dN]` with `E[\int C dA]` for the generator
/// `C_u = 1(s < u <= t) 1(N_s = k)`.
pub fn predictable_projection_check<F>(
    ensemble: &[EventSequence],
    compensator: F,
    s: f64,
    t: f64,
    k: usize,
) -> Result<ProjectionCheck>
where
    F: Fn(usize, &EventSequence, f64) -> Result<f64> + Sync,
{
    if ensemble.is_empty() {
        return Err(Error::Empty("ensemble"));
    }
    if !(0.0 <= s && s <= t) {
        return Err(Error::invalid("window", format!("need 0 <= s <= t, got ({s}, {t})")));
    }
    let rows: Vec<(f64, f64)> = ensemble
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            if s == t || p.count(s) != k {
                return Ok((0.0, 0.0));
            }
            let dn = (p.count(t) - p.count(s)) as f64;
            let da = compensator(i, p, t)? - compensator(i, p, s)?;
            Ok((dn, da))
        })
        .collect::<Result<_>>()?;
    let n = rows.len() as f64;
    let counts = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let compensated = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let diffs: Vec<f64> = rows.iter().map(|r| r.0 - r.1).collect();
    let (_, _, z) = z_score(&diffs);
    Ok(ProjectionCheck { counts, compensated, z })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnticipativityReport {
    pub a: f64,
    pub t: f64,
    pub n_paths: usize,
    /// Sample mean of `N_t - A_t` with `A` built from the look-ahead rate.
    pub drift: f64,
    pub drift_se: f64,
    /// `-t e^{-a}`, the exact drift under the unit Poisson reference.
    pub expected_drift: f64,
    pub anticipative: MartingaleTestReport,
    pub control: MartingaleTestReport,
}

/// Simulates unit Poisson paths on `[0, horizon]`, compensates them with the
/// integral of [`anticipative_intensity`] and tests `N - A` on `(0, t]`,
/// next to the control compensator `A_t = t`.
pub fn anticipativity_report(n_paths: usize, a: f64, t: f64, horizon: f64, seed: u64) -> Result<AnticipativityReport> {
    if !(a > 0.0 && a < horizon) {
        return Err(Error::domain("a", a, format!("(0, {horizon})")));
    }
    if !(t > 0.0 && t <= horizon - a) {
        return Err(Error::domain("t", t, format!("(0, {}]", horizon - a)));
    }
    let paths = simulate_ensemble(&IntensityModel::Constant { rate: 1.0 }, horizon, n_paths, seed)?;
    let intensities = paths.par_iter().map(|p| anticipative_intensity(p, a)).collect::<Result<Vec<_>>>()?;
    let pairs = [(0.0, t)];
    let mut anticipative =
        martingale_residual_test(&paths, |i, _, u| intensities[i].integral(u), &pairs, &[Probe::One])?;
    let mut control = martingale_residual_test(&paths, |_, _, u| Ok(u), &pairs, &[Probe::One])?;
    anticipative.seed = Some(seed);
    control.seed = Some(seed);
    let r = &anticipative.results[0];
    Ok(AnticipativityReport {
        a,
        t,
        n_paths,
        drift: r.mean,
        drift_se: r.std_error,
        expected_drift: -t * (-a).exp(),
        anticipative: anticipative.clone(),
        control,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson(n: usize, seed: u64) -> Vec<EventSequence> {
        simulate_ensemble(&IntensityModel::Constant { rate: 1.0 }, 1.0, n, seed).unwrap()
    }

    #[test]
    fn unit_poisson_passes_with_true_compensator() {
        let ens = poisson(10_000, 1);
        let r = martingale_residual_test(&ens, |_, _, t| Ok(t), &[(0.5, 1.0)], &[Probe::One]).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn doubled_compensator_fails_with_drift() {
        let ens = poisson(10_000, 2);
        let r = martingale_residual_test(&ens, |_, _, t| Ok(2.0 * t), &[(0.5, 1.0)], &[Probe::One]).unwrap();
        assert!(!r.passed);
        let res = &r.results[0];
        assert!((res.mean + 0.5).abs() < 4.0 * res.std_error);
    }

    #[test]
    fn degenerate_probe_is_skipped() {
        let ens = poisson(100, 3);
        let r = martingale_residual_test(&ens, |_, _, t| Ok(t), &[(0.5, 1.0)], &[Probe::CountAtLeast(1000)]).unwrap();
        assert_eq!(r.results[0].verdict, Verdict::Skipped);
        assert!(!r.passed);
    }

    #[test]
    fn empty_ensemble_is_an_error() {
        assert!(martingale_residual_test(&[], |_, _, t| Ok(t), &[(0.5, 1.0)], &[Probe::One]).is_err());
    }

    #[test]
    fn projection_empty_window() {
        let ens = poisson(100, 4);
        let c = predictable_projection_check(&ens, |_, _, t| Ok(t), 0.5, 0.5, 0).unwrap();
        assert_eq!((c.counts, c.compensated, c.z), (0.0, 0.0, 0.0));
    }

    #[test]
    fn anticipativity_domain() {
        assert!(anticipativity_report(10, 5.0, 1.0, 2.0, 1).is_err());
        assert!(anticipativity_report(10, 1.0, 1.5, 2.0, 1).is_err());
    }
}
