//! Entropy, pressure, Abramov's formula, the Bernoulli weight equation,
//! and loop-sum pressure estimates.

use crate::error::{Error, Result};
use crate::scalar::{rf, Real};
use crate::shift::{Symbol, Word};
use crate::suspension::{birkhoff_sum, PeriodicPoint, Potential, RoofFunction};

const MEASURE_TOL: f64 = 1e-12;

/// Shift-invariant measure on a full shift: Bernoulli weights or a
/// stationary Markov chain.
#[derive(Clone, Debug, PartialEq)]
pub enum MarkovMeasure<T> {
    Bernoulli { weights: Vec<T> },
    Markov { p: Vec<Vec<T>>, pi: Vec<T> },
}

impl<T: Real> MarkovMeasure<T> {
    pub fn bernoulli(weights: Vec<T>) -> Result<Self> {
        let m = MarkovMeasure::Bernoulli { weights };
        m.validate()?;
        Ok(m)
    }

    pub fn markov(p: Vec<Vec<T>>, pi: Vec<T>) -> Result<Self> {
        let m = MarkovMeasure::Markov { p, pi };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform_bernoulli(l: usize) -> Self {
        MarkovMeasure::Bernoulli {
            weights: vec![rf::<T>(1.0) / rf::<T>(l as f64); l],
        }
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            MarkovMeasure::Bernoulli { weights } => weights.len(),
            MarkovMeasure::Markov { pi, .. } => pi.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        let tol = rf::<T>(MEASURE_TOL);
        let one = T::one();
        match self {
            MarkovMeasure::Bernoulli { weights } => {
                if weights.is_empty() {
                    return Err(Error::InvalidMeasure("empty weight vector".into()));
                }
                if weights.iter().any(|&w| w < T::zero()) {
                    return Err(Error::InvalidMeasure("negative weight".into()));
                }
                let s: T = weights.iter().fold(T::zero(), |a, &b| a + b);
                if (s - one).abs() > tol {
                    return Err(Error::InvalidMeasure(format!(
                        "weights sum to {s}, expected 1"
                    )));
                }
            }
            MarkovMeasure::Markov { p, pi } => {
                let l = pi.len();
                if l == 0 || p.len() != l || p.iter().any(|row| row.len() != l) {
                    return Err(Error::InvalidMeasure("matrix/vector shape mismatch".into()));
                }
                if pi.iter().any(|&w| w < T::zero())
                    || p.iter().flatten().any(|&w| w < T::zero())
                {
                    return Err(Error::InvalidMeasure("negative entry".into()));
                }
                let spi: T = pi.iter().fold(T::zero(), |a, &b| a + b);
                if (spi - one).abs() > tol {
                    return Err(Error::InvalidMeasure("stationary vector does not sum to 1".into()));
                }
                for (i, row) in p.iter().enumerate() {
                    let s: T = row.iter().fold(T::zero(), |a, &b| a + b);
                    if (s - one).abs() > tol {
                        return Err(Error::InvalidMeasure(format!(
                            "row {i} sums to {s}, expected 1"
                        )));
                    }
                }
                for j in 0..l {
                    let v: T = (0..l).fold(T::zero(), |a, i| a + pi[i] * p[i][j]);
                    if (v - pi[j]).abs() > tol {
                        return Err(Error::InvalidMeasure(
                            "stationary vector is not invariant under the matrix".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Measure of the forward cylinder `[w_0 ... w_{k-1}]`.
    pub fn cylinder_weight(&self, w: &[Symbol]) -> T {
        match self {
            MarkovMeasure::Bernoulli { weights } => {
                w.iter().fold(T::one(), |a, &s| a * weights[s])
            }
            MarkovMeasure::Markov { p, pi } => {
                if w.is_empty() {
                    return T::one();
                }
                let mut acc = pi[w[0]];
                for pair in w.windows(2) {
                    acc = acc * p[pair[0]][pair[1]];
                }
                acc
            }
        }
    }
}

fn xlogx<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.ln()
    }
}

/// Kolmogorov-Sinai entropy of the measure under the shift.
pub fn measure_entropy<T: Real>(m: &MarkovMeasure<T>) -> T {
    match m {
        MarkovMeasure::Bernoulli { weights } => {
            -weights.iter().fold(T::zero(), |a, &p| a + xlogx(p))
        }
        MarkovMeasure::Markov { p, pi } => {
            let mut acc = T::zero();
            for (i, row) in p.iter().enumerate() {
                for &pij in row {
                    acc = acc + pi[i] * xlogx(pij);
                }
            }
            -acc
        }
    }
}

fn all_words(l: usize, k: usize) -> Vec<Vec<Symbol>> {
    let mut out: Vec<Vec<Symbol>> = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..l).map(move |s| {
                    let mut w2 = w.clone();
                    w2.push(s);
                    w2
                })
            })
            .collect();
    }
    out
}

/// Integral of a cylinder potential: the exact cylinder-weighted sum
/// over all length-`k` words of positive measure.
pub fn integrate<T: Real>(pot: &Potential<T>, m: &MarkovMeasure<T>) -> Result<T> {
    let l = m.alphabet_size();
    let mut acc = T::zero();
    for w in all_words(l, pot.depth()) {
        let mu = m.cylinder_weight(&w);
        if mu > T::zero() {
            match pot.values().get(w.as_slice()) {
                Some(&v) => acc = acc + mu * v,
                None => {
                    return Err(Error::DepthMismatch {
                        expected: pot.depth(),
                        got: w.len(),
                    })
                }
            }
        }
    }
    Ok(acc)
}

/// Pressure with respect to the measure: entropy plus the integral.
pub fn pressure<T: Real>(m: &MarkovMeasure<T>, pot: &Potential<T>) -> Result<T> {
    Ok(measure_entropy(m) + integrate(pot, m)?)
}

/// Entropy of the suspension flow with this base measure and roof:
/// base entropy divided by the mean roof.
pub fn abramov_entropy<T: Real>(m: &MarkovMeasure<T>, roof: &RoofFunction<T>) -> Result<T> {
    Ok(measure_entropy(m) / integrate(roof.as_cylinder(), m)?)
}

/// Root of the weight equation together with the Bernoulli weights it
/// induces.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSolution<T> {
    pub h: T,
    pub weights: Vec<T>,
}

/// Solve `sum_i exp(-h r_i) = 1` for `h`. The left side is strictly
/// decreasing from `L` at `h = 0` to `0`, so the root is unique; bisection
/// on `[0, log(L)/min r_i + 1]`, 200 iterations.
pub fn solve_weight_equation<T: Real>(roof_values: &[T]) -> Result<WeightSolution<T>> {
    let l = roof_values.len();
    if l < 2 {
        return Err(Error::InvalidInput(
            "weight equation needs at least two roof values".into(),
        ));
    }
    if roof_values.iter().any(|&r| r <= T::zero()) {
        return Err(Error::InvalidInput("roof values must be positive".into()));
    }
    let rmin = roof_values
        .iter()
        .cloned()
        .fold(roof_values[0], |a, b| if b < a { b } else { a });
    let f = |h: T| {
        roof_values
            .iter()
            .fold(T::zero(), |a, &r| a + (-h * r).exp())
            - T::one()
    };
    let mut lo = T::zero();
    let mut hi = rf::<T>(l as f64).ln() / rmin + T::one();
    for _ in 0..200 {
        let mid = (lo + hi) / rf::<T>(2.0);
        if f(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = (lo + hi) / rf::<T>(2.0);
    let weights = roof_values.iter().map(|&r| (-h * r).exp()).collect();
    Ok(WeightSolution { h, weights })
}

/// Lower bound for the flow entropy: `h_nu / (sum p_i r_i + p_max C)` with
/// the weights from the weight equation. Equals `h` at `C = 0` and is
/// strictly decreasing in `C`.
pub fn entropy_lower_bound<T: Real>(roof_values: &[T], holder_slack: T) -> Result<T> {
    if holder_slack < T::zero() {
        return Err(Error::InvalidInput("slack must be nonnegative".into()));
    }
    let sol = solve_weight_equation(roof_values)?;
    let m = MarkovMeasure::Bernoulli {
        weights: sol.weights.clone(),
    };
    let h_nu = measure_entropy(&m);
    let mean_r = sol
        .weights
        .iter()
        .zip(roof_values)
        .fold(T::zero(), |a, (&p, &r)| a + p * r);
    let p_max = sol
        .weights
        .iter()
        .cloned()
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    Ok(h_nu / (mean_r + p_max * holder_slack))
}

/// Normalized log-sum of exponentials of Birkhoff sums over a family of
/// loops of common length `n`.
pub fn loop_pressure_sum<T: Real>(loops: &[Word], pot: &Potential<T>, n: usize) -> Result<T> {
    if loops.is_empty() {
        return Err(Error::InvalidInput("empty loop list".into()));
    }
    for w in loops {
        if w.len() != n {
            return Err(Error::LengthMismatch(format!(
                "loop length {} != {}",
                w.len(),
                n
            )));
        }
    }
    // log-sum-exp with max shift for stability.
    let sums: Vec<T> = loops
        .iter()
        .map(|w| birkhoff_sum(pot, &PeriodicPoint::from_word(w), n as i64))
        .collect();
    let mx = sums.iter().cloned().fold(sums[0], |a, b| if b > a { b } else { a });
    let s = sums.iter().fold(T::zero(), |a, &v| a + (v - mx).exp());
    Ok((mx + s.ln()) / rf::<T>(n as f64))
}
