//! Finite-state Markov chains: likelihood ratios between two transition
//! matrices, the support condition for absolute continuity, and the
//! compensated martingale residual of a test function.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Transition matrix `p` (row-stochastic) and initial law `v0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMarkov", into = "RawMarkov")]
pub struct MarkovModel {
    p: Vec<Vec<f64>>,
    v0: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMarkov {
    n: usize,
    p: Vec<Vec<f64>>,
    v0: Vec<f64>,
}

impl TryFrom<RawMarkov> for MarkovModel {
    type Error = Error;

    fn try_from(raw: RawMarkov) -> Result<Self> {
        if raw.p.len() != raw.n {
            return Err(Error::invalid("n", format!("n = {} but p has {} rows", raw.n, raw.p.len())));
        }
        MarkovModel::new(raw.p, raw.v0)
    }
}

impl From<MarkovModel> for RawMarkov {
    fn from(m: MarkovModel) -> Self {
        RawMarkov { n: m.n_states(), p: m.p, v0: m.v0 }
    }
}

const STOCHASTIC_TOL: f64 = 1e-12;

impl MarkovModel {
    pub fn new(p: Vec<Vec<f64>>, v0: Vec<f64>) -> Result<Self> {
        let n = p.len();
        if n < 1 {
            return Err(Error::Empty("transition matrix"));
        }
        for (i, row) in p.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!("p[{i}]"), format!("expected {n} entries")));
            }
            if row.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::invalid(format!("p[{i}]"), "entries must lie in [0, 1]"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::invalid(format!("p[{i}]"), format!("row sums to {s}")));
            }
        }
        if v0.len() != n || v0.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::invalid("v0", format!("need {n} probabilities")));
        }
        let s: f64 = v0.iter().sum();
        if (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::invalid("v0", format!("sums to {s}")));
        }
        Ok(Self { p, v0 })
    }

    /// Chain with every transition and initial state equally likely.
    pub fn uniform(n: usize) -> Self {
        let u = 1.0 / n as f64;
        Self { p: vec![vec![u; n]; n], v0: vec![u; n] }
    }

    pub fn n_states(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn v0(&self) -> &[f64] {
        &self.v0
    }

    /// Probability of a whole path, initial state included.
    pub fn path_probability(&self, path: &StatePath) -> f64 {
        let x = path.states();
        x.windows(2).fold(self.v0[x[0]], |acc, w| acc * self.p[w[0]][w[1]])
    }

    /// `(P z)_i = sum_j P_{ij} z_j`.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        self.p.iter().map(|row| row.iter().zip(z).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}

/// States `x_0, ..., x_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatePath {
    states: Vec<usize>,
}

impl StatePath {
    pub fn new(states: Vec<usize>, n_states: usize) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Empty("state path"));
        }
        if let Some((i, s)) = states.iter().enumerate().find(|(_, &s)| s >= n_states) {
            return Err(Error::invalid(format!("state[{i}]"), format!("{s} is not below {n_states}")));
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// CSV with one state index per row, header `state`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["state"])?;
        for s in &self.states {
            wtr.write_record([s.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, n_states: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
        let mut states = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = rec.get(0).unwrap_or("").trim();
            if i == 0 && field == "state" {
                continue;
            }
            let s = field
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("row {}", i + 1), format!("`{field}` is not a state index")))?;
            states.push(s);
        }
        Self::new(states, n_states)
    }
}

fn same_size(a: &MarkovModel, b: &MarkovModel) -> Result<()> {
    if a.n_states() != b.n_states() {
        return Err(Error::invalid("models", format!("{} states vs {} states", a.n_states(), b.n_states())));
    }
    Ok(())
}

/// `sum_i log(P[x_i, x_{i+1}] / P0[x_i, x_{i+1}])`.
///
/// A transition impossible under `p0` but possible under `p` breaks
/// absolute continuity and is an error; one impossible under `p` gives
/// `f64::NEG_INFINITY`.
pub fn markov_log_ratio(path: &StatePath, p: &MarkovModel, p0: &MarkovModel) -> Result<f64> {
    same_size(p, p0)?;
    if path.states().iter().any(|&s| s >= p.n_states()) {
        return Err(Error::invalid("path", "state index out of range"));
    }
    let mut acc = 0.0;
    for w in path.states().windows(2) {
        let (a, b) = (p.p(w[0], w[1]), p0.p(w[0], w[1]));
        if b == 0.0 {
            if a > 0.0 {
                return Err(Error::AbsoluteContinuity { from: w[0], to: w[1] });
            }
            return Ok(f64::NEG_INFINITY);
        }
        if a == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        acc += (a / b).ln();
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportCheck {
    pub pass: bool,
    /// First `(m, from, to)` with `P^m[from, to] > 0 = P0^m[from, to]`.
    pub witness: Option<(usize, usize, usize)>,
    /// Largest power examined.
    pub powers_checked: usize,
    /// The pair of support sequences was seen to cycle, so every power is
    /// covered.
    pub exhaustive: bool,
}

type Support = Vec<Vec<bool>>;

fn support(m: &MarkovModel) -> Support {
    m.rows().iter().map(|r| r.iter().map(|&x| x > 0.0).collect()).collect()
}

fn bool_mul(a: &Support, b: &Support) -> Support {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect()).collect()
}

/// Checks `support(P^m) ⊆ support(P0^m)` for every power `m >= 1`.
///
/// The pair of supports is a deterministic function of the previous pair,
/// so the sequence is eventually periodic; iteration stops as soon as a
/// pair repeats. `max_power` caps the search when the cycle is long.
pub fn abs_continuity_check(p: &MarkovModel, p0: &MarkovModel, max_power: usize) -> Result<SupportCheck> {
    same_size(p, p0)?;
    let (s1, s0) = (support(p), support(p0));
    let (mut a, mut b) = (s1.clone(), s0.clone());
    let mut seen: HashMap<(Support, Support), usize> = HashMap::new();
    let mut m = 1;
    loop {
        for i in 0..a.len() {
            for j in 0..a.len() {
                if a[i][j] && !b[i][j] {
                    return Ok(SupportCheck {
                        pass: false,
                        witness: Some((m, i, j)),
                        powers_checked: m,
                        exhaustive: true,
                    });
                }
            }
        }
        if seen.insert((a.clone(), b.clone()), m).is_some() {
            return Ok(SupportCheck { pass: true, witness: None, powers_checked: m, exhaustive: true });
        }
        if m >= max_power {
            return Ok(SupportCheck { pass: true, witness: None, powers_checked: m, exhaustive: false });
        }
        a = bool_mul(&a, &s1);
        b = bool_mul(&b, &s0);
        m += 1;
    }
}

/// `M_n = z[x_n] - z[x_0] - sum_{m=1}^n ((P z)[x_{m-1}] - z[x_{m-1}])`.
///
/// The subtracted sum is the Doob compensator of `z(X_n)`, so `M` has zero
/// one-step conditional drift under `P`.
pub fn markov_martingale_residual(path: &StatePath, p: &MarkovModel, z: &[f64]) -> Result<Vec<f64>> {
    if z.len() != p.n_states() {
        return Err(Error::invalid("z", format!("expected {} entries", p.n_states())));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("z", "entries must be finite"));
    }
    let pz = p.apply(z);
    let x = path.states();
    let mut out = Vec::with_capacity(x.len());
    let mut drift = 0.0;
    out.push(0.0);
    for m in 1..x.len() {
        drift += pz[x[m - 1]] - z[x[m - 1]];
        out.push(z[x[m]] - z[x[0]] - drift);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovFit {
    pub model: MarkovModel,
    /// Rows with no observed outgoing transition, filled uniformly.
    pub undetermined: Vec<usize>,
    pub transition_counts: Vec<Vec<u64>>,
}

/// Empirical transition frequencies and initial-state frequencies.
pub fn fit_markov(paths: &[StatePath], n_states: usize) -> Result<MarkovFit> {
    if paths.is_empty() {
        return Err(Error::Empty("paths"));
    }
    let mut counts = vec![vec![0u64; n_states]; n_states];
    let mut init = vec![0u64; n_states];
    for path in paths {
        let x = path.states();
        if x.iter().any(|&s| s >= n_states) {
            return Err(Error::invalid("paths", format!("state index not below {n_states}")));
        }
        init[x[0]] += 1;
        for w in x.windows(2) {
            counts[w[0]][w[1]] += 1;
        }
    }
    let mut undetermined = Vec::new();
    let p = counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: u64 = row.iter().sum();
            if total == 0 {
                undetermined.push(i);
                vec![1.0 / n_states as f64; n_states]
            } else {
                row.iter().map(|&c| c as f64 / total as f64).collect()
            }
        })
        .collect();
    let v0 = init.iter().map(|&c| c as f64 / paths.len() as f64).collect();
    Ok(MarkovFit { model: MarkovModel::new(p, v0)?, undetermined, transition_counts: counts })
}

fn draw(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// `x_0 ~ v0`, then `n_steps` transitions.
pub fn simulate_markov(model: &MarkovModel, n_steps: usize, stream: RandomStream) -> StatePath {
    let mut rng = stream.rng();
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut x = draw(model.v0(), rng.uniform());
    states.push(x);
    for _ in 0..n_steps {
        x = draw(&model.rows()[x], rng.uniform());
        states.push(x);
    }
    StatePath { states }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sticky() -> MarkovModel {
        MarkovModel::new(vec![vec![0.9, 0.1], vec![0.1, 0.9]], vec![0.5, 0.5]).unwrap()
    }

    fn path(x: &[usize]) -> StatePath {
        StatePath::new(x.to_vec(), 2).unwrap()
    }

    #[test]
    fn log_ratio_examples() {
        let p0 = MarkovModel::uniform(2);
        assert_eq!(markov_log_ratio(&path(&[0, 1, 1]), &p0, &p0).unwrap(), 0.0);
        let l = markov_log_ratio(&path(&[0, 0, 0]), &sticky(), &p0).unwrap();
        assert!((l - 2.0 * 1.8f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn forbidden_transitions() {
        let p = MarkovModel::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]], vec![1.0, 0.0]).unwrap();
        let p0 = MarkovModel::uniform(2);
        assert_eq!(markov_log_ratio(&path(&[0, 1]), &p, &p0).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(markov_log_ratio(&path(&[0, 1]), &p0, &p), Err(Error::AbsoluteContinuity { from: 0, to: 1 })));
    }

    #[test]
    fn support_checks() {
        let id = MarkovModel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.5, 0.5]).unwrap();
        let full = MarkovModel::uniform(2);
        let r = abs_continuity_check(&sticky(), &sticky(), 64).unwrap();
        assert!(r.pass && r.exhaustive);
        let r = abs_continuity_check(&sticky(), &id, 64).unwrap();
        assert_eq!(r.witness, Some((1, 0, 1)));
        assert!(abs_continuity_check(&id, &full, 64).unwrap().pass);
    }

    #[test]
    fn support_violation_only_at_higher_power() {
        // P0 is a 3-cycle; P adds nothing at step one but reaches 0 -> 0 in two steps
        let cyc =
            MarkovModel::new(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]], vec![1.0, 0.0, 0.0])
                .unwrap();
        let p =
            MarkovModel::new(vec![vec![0.0, 1.0, 0.0], vec![0.5, 0.0, 0.5], vec![1.0, 0.0, 0.0]], vec![1.0, 0.0, 0.0])
                .unwrap();
        // step one: 1 -> 0 is new, so m = 1 fails directly
        assert_eq!(abs_continuity_check(&p, &cyc, 64).unwrap().witness.map(|w| w.0), Some(1));
    }

    #[test]
    fn residual_examples() {
        let half = MarkovModel::uniform(2);
        let m = markov_martingale_residual(&path(&[0, 1]), &half, &[0.0, 1.0]).unwrap();
        assert_eq!(m, vec![0.0, 0.5]);
        let c = markov_martingale_residual(&path(&[0, 1, 1, 0]), &sticky(), &[3.0, 3.0]).unwrap();
        assert!(c.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn fit_examples() {
        let cyc = fit_markov(&[path(&[0, 1, 0, 1, 0])], 2).unwrap();
        assert_eq!(cyc.model.rows(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let deg = fit_markov(&[path(&[0, 0])], 2).unwrap();
        assert_eq!(deg.undetermined, vec![1]);
        assert_eq!(deg.model.rows()[1], vec![0.5, 0.5]);
        assert!(fit_markov(&[], 2).is_err());
    }

    #[test]
    fn identity_chain_is_constant() {
        let id = MarkovModel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 1.0]).unwrap();
        let s = simulate_markov(&id, 100, RandomStream::new(5, 0));
        assert!(s.states().iter().all(|&x| x == 1));
        assert_eq!(
            simulate_markov(&sticky(), 50, RandomStream::new(5, 1)),
            simulate_markov(&sticky(), 50, RandomStream::new(5, 1))
        );
    }

    #[test]
    fn json_schema() {
        let m: MarkovModel = serde_json::from_str(r#"{"n":2,"p":[[0.9,0.1],[0.1,0.9]],"v0":[0.5,0.5]}"#).unwrap();
        assert_eq!(m, sticky());
        assert!(serde_json::from_str::<MarkovModel>(r#"{"n":2,"p":[[0.9,0.2],[0.1,0.9]],"v0":[0.5,0.5]}"#).is_err());
        assert!(serde_json::from_str::<MarkovModel>(r#"{"n":3,"p":[[1.0,0.0],[0.1,0.9]],"v0":[0.5,0.5]}"#).is_err());
    }

    #[test]
    fn path_csv() {
        let p = path(&[0, 1, 1, 0]);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(StatePath::read_csv(&buf[..], 2).unwrap(), p);
        assert_eq!(StatePath::read_csv(&b"0\n1\n"[..], 2).unwrap(), path(&[0, 1]));
        assert!(StatePath::read_csv(&b"0\n7\n"[..], 2).is_err());
    }
}
