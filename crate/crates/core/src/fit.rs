//! Maximum-likelihood fitting of parametric intensities.
//!
//! The objective is the log-likelihood ratio against the unit Poisson
//! process on `[0, horizon]`. Free parameters are searched on the log scale
//! with a Nelder-Mead simplex, which keeps them positive; fixed parameters
//! stay at their initial value.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::events::EventSequence;
use crate::likelihood::log_likelihood_ratio;
use crate::model::{Family, IntensityModel};

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Simplex diameter (log-parameter scale) at which the search stops.
    pub tol: f64,
    /// Initial simplex edge on the log scale.
    pub initial_step: f64,
    /// Parameters held at their initial value; empty means all free.
    pub fixed: Vec<bool>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 20_000, tol: 1e-8, initial_step: 0.1, fixed: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub family: Family,
    pub names: Vec<&'static str>,
    pub params: Vec<f64>,
    pub init: Vec<f64>,
    pub loglik: f64,
    pub initial_loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// A free parameter went to zero (the supremum is on the boundary).
    pub at_boundary: bool,
    /// Standard errors from the inverse observed information; `None` for
    /// fixed parameters or when the information is not positive definite.
    pub std_errors: Vec<Option<f64>>,
    /// Best log-likelihood after each iteration.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

impl FitResult {
    pub fn model(&self) -> IntensityModel {
        self.family.build(&self.params).expect("fitted parameters are valid")
    }
}

struct Objective<'a> {
    family: Family,
    events: &'a EventSequence,
    base: Vec<f64>,
    free: Vec<usize>,
}

impl Objective<'_> {
    fn params(&self, theta: &[f64]) -> Vec<f64> {
        let mut p = self.base.clone();
        for (&i, &th) in self.free.iter().zip(theta) {
            p[i] = th.exp();
        }
        p
    }

    fn loglik_natural(&self, p: &[f64]) -> f64 {
        match self.family.build(p) {
            Ok(m) => log_likelihood_ratio(self.events, &m, self.events.horizon()).unwrap_or(f64::NEG_INFINITY),
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// Minimized by the simplex; NaN and -inf map to +inf.
    fn cost(&self, theta: &[f64]) -> f64 {
        let l = self.loglik_natural(&self.params(theta));
        if l.is_nan() {
            f64::INFINITY
        } else {
            -l
        }
    }
}

pub fn fit_mle(events: &EventSequence, family: Family, init: &[f64], options: &FitOptions) -> Result<FitResult> {
    let names = family.param_names();
    family.build(init)?;
    let fixed = if options.fixed.is_empty() {
        vec![false; names.len()]
    } else if options.fixed.len() == names.len() {
        options.fixed.clone()
    } else {
        return Err(Error::invalid("fixed", format!("expected {} flags", names.len())));
    };
    let free: Vec<usize> = (0..names.len()).filter(|&i| !fixed[i]).collect();
    for &i in &free {
        if init[i] <= 0.0 {
            return Err(Error::invalid(names[i], "free parameters must start > 0"));
        }
    }
    let obj = Objective { family, events, base: init.to_vec(), free: free.clone() };
    let initial_loglik = obj.loglik_natural(init);
    if !initial_loglik.is_finite() {
        return Err(Error::NonFiniteLikelihood);
    }

    let theta0: Vec<f64> = free.iter().map(|&i| init[i].ln()).collect();
    let nm = nelder_mead(|th| obj.cost(th), &theta0, options);
    let params = obj.params(&nm.best);
    let loglik = -nm.best_value;
    let at_boundary = free.iter().any(|&i| params[i] < 1e-10);
    let std_errors = standard_errors(&obj, &params);

    Ok(FitResult {
        family,
        names: names.to_vec(),
        params,
        init: init.to_vec(),
        loglik,
        initial_loglik,
        iterations: nm.iterations,
        converged: nm.converged,
        at_boundary,
        std_errors,
        trace: nm.trace.into_iter().map(|c| -c).collect(),
    })
}

fn standard_errors(obj: &Objective<'_>, p: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; p.len()];
    let k = obj.free.len();
    if k == 0 {
        return out;
    }
    let steps: Vec<f64> = obj.free.iter().map(|&i| 1e-4 * p[i].abs().max(1e-6)).collect();
    let f = |d: &[(usize, f64)]| {
        let mut q = p.to_vec();
        for &(j, h) in d {
            q[obj.free[j]] += h;
        }
        obj.loglik_natural(&q)
    };
    let f0 = f(&[]);
    let mut info = DMatrix::<f64>::zeros(k, k);
    for a in 0..k {
        let ha = steps[a];
        let d2 = (f(&[(a, ha)]) - 2.0 * f0 + f(&[(a, -ha)])) / (ha * ha);
        info[(a, a)] = -d2;
        for b in 0..a {
            let hb = steps[b];
            let d2 = (f(&[(a, ha), (b, hb)]) - f(&[(a, ha), (b, -hb)]) - f(&[(a, -ha), (b, hb)])
                + f(&[(a, -ha), (b, -hb)]))
                / (4.0 * ha * hb);
            info[(a, b)] = -d2;
            info[(b, a)] = -d2;
        }
    }
    if !info.iter().all(|x| x.is_finite()) {
        return out;
    }
    let Some(chol) = info.cholesky() else { return out };
    let cov = chol.inverse();
    for (j, &i) in obj.free.iter().enumerate() {
        out[i] = Some(cov[(j, j)].sqrt());
    }
    out
}

pub(crate) struct SimplexOutcome {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Nelder-Mead minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
pub(crate) fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: &FitOptions) -> SimplexOutcome {
    let n = x0.len();
    if n == 0 {
        let v = f(x0);
        return SimplexOutcome { best: vec![], best_value: v, iterations: 0, converged: true, trace: vec![v] };
    }
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };

    while iterations < opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let diameter =
            pts[1..].iter().flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
        let spread = vals[n] - vals[0];
        if diameter <= opts.tol || (vals[0].is_finite() && spread <= 1e-14 * (1.0 + vals[0].abs())) {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n).map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let worst = pts[n].clone();
        let reflected = lerp(&centroid, &worst, -1.0);
        let fr = f(&reflected);
        if fr < vals[0] {
            let expanded = lerp(&centroid, &worst, -2.0);
            let fe = f(&expanded);
            if fe < fr {
                pts[n] = expanded;
                vals[n] = fe;
            } else {
                pts[n] = reflected;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = reflected;
            vals[n] = fr;
        } else {
            let (contracted, fc) = if fr < vals[n] {
                let c = lerp(&centroid, &worst, -0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = lerp(&centroid, &worst, 0.5);
                let fc = f(&c);
                (c, fc)
            };
            if fc < vals[n].min(fr) {
                pts[n] = contracted;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    pts[i] = lerp(&pts[0], &pts[i], 0.5);
                    vals[i] = f(&pts[i]);
                }
            }
        }
        trace.push(vals.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let (bi, _) = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    SimplexOutcome { best: pts[bi].clone(), best_value: vals[bi], iterations, converged, trace }
}
