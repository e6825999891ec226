//! Suspension flows over a shift: roof functions locally constant on
//! depth-k cylinders, Birkhoff sums with the two-sided sign convention,
//! the flow map, orbit periods, and the symbolic metric.

use std::borrow::Borrow;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::shift::{canonical_necklace, Necklace, Symbol, TransitionGraph, Word};

/// Largest supported cylinder depth.
pub const MAX_DEPTH: usize = 16;

impl Borrow<[Symbol]> for Word {
    fn borrow(&self) -> &[Symbol] {
        &self.0
    }
}

/// A bi-infinite symbol sequence that can be sampled at any position.
pub trait SymbolSequence {
    fn symbol_at(&self, i: i64) -> Symbol;
}

/// Periodic point of the shift: the bi-infinite periodic extension of a
/// cyclic word, read off starting at `phase`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicPoint {
    block: Necklace,
    phase: usize,
}

impl PeriodicPoint {
    pub fn new(block: Necklace, phase: usize) -> Self {
        let n = block.period_length();
        PeriodicPoint {
            block,
            phase: phase % n,
        }
    }

    /// Periodic extension of `w` so that `symbol_at(i) = w[i mod n]`.
    pub fn from_word(w: &Word) -> Self {
        let canon = canonical_necklace(w);
        let n = w.len();
        let phase = (0..n)
            .find(|&p| (0..n).all(|i| canon.symbol_at((p + i) as i64) == w.0[i]))
            .expect("some rotation of the canonical form reproduces the word");
        PeriodicPoint {
            block: canon,
            phase,
        }
    }

    pub fn block(&self) -> &Necklace {
        &self.block
    }

    pub fn phase(&self) -> usize {
        self.phase
    }

    pub fn period_length(&self) -> usize {
        self.block.period_length()
    }

    /// The shift `sigma^n` applied to this point.
    pub fn shifted(&self, n: i64) -> PeriodicPoint {
        let len = self.block.period_length() as i64;
        PeriodicPoint {
            block: self.block.clone(),
            phase: (self.phase as i64 + n).rem_euclid(len) as usize,
        }
    }
}

impl SymbolSequence for PeriodicPoint {
    fn symbol_at(&self, i: i64) -> Symbol {
        self.block.symbol_at(self.phase as i64 + i)
    }
}

/// Eventually periodic two-sided sequence: a periodic past, a finite core
/// starting at index `core_start`, and a periodic future.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpSequence {
    past: Necklace,
    core: Vec<Symbol>,
    future: Necklace,
    core_start: i64,
}

impl EpSequence {
    pub fn new(past: Necklace, core: Vec<Symbol>, future: Necklace, core_start: i64) -> Self {
        EpSequence {
            past,
            core,
            future,
            core_start,
        }
    }

    /// Purely periodic two-sided sequence.
    pub fn periodic(n: Necklace) -> Self {
        EpSequence {
            past: n.clone(),
            core: Vec::new(),
            future: n,
            core_start: 0,
        }
    }

    /// The chord sequence of a census: past tail on `j <= 0`, the interior
    /// tuple on `1 <= j <= n-2`, and the future tail from `j >= n-1` on,
    /// where `n = interior.len() + 2`.
    pub fn chord(past: &Necklace, interior: &Word, future: &Necklace) -> Self {
        // Past occupies j <= 0; realize it as core symbol at j=0 plus tail.
        EpSequence {
            past: past.clone(),
            core: interior.0.clone(),
            future: future.clone(),
            core_start: 1,
        }
    }

    pub fn core_start(&self) -> i64 {
        self.core_start
    }

    pub fn core_end(&self) -> i64 {
        self.core_start + self.core.len() as i64
    }

    pub fn past(&self) -> &Necklace {
        &self.past
    }

    pub fn future(&self) -> &Necklace {
        &self.future
    }
}

impl SymbolSequence for EpSequence {
    fn symbol_at(&self, i: i64) -> Symbol {
        if i < self.core_start {
            // past tail ends immediately before the core; position
            // core_start - 1 reads the last symbol of the past block.
            self.past.symbol_at(i - self.core_start)
        } else if i < self.core_end() {
            self.core[(i - self.core_start) as usize]
        } else {
            self.future.symbol_at(i - self.core_end())
        }
    }
}

/// Function on the shift space that is locally constant on forward
/// cylinders of a fixed depth `k`: its value at `x` depends only on
/// `x_0 .. x_{k-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderFunction<T> {
    depth: usize,
    values: HashMap<Word, T>,
}

impl<T: Scalar> CylinderFunction<T> {
    pub fn new(depth: usize, values: HashMap<Word, T>) -> Result<Self> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::InvalidInput(format!(
                "cylinder depth must be in 1..={MAX_DEPTH}"
            )));
        }
        for w in values.keys() {
            if w.len() != depth {
                return Err(Error::DepthMismatch {
                    expected: depth,
                    got: w.len(),
                });
            }
        }
        Ok(CylinderFunction { depth, values })
    }

    /// Depth-1 function from per-symbol values.
    pub fn depth1(values: &[T]) -> Self {
        let map = values
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (Word::new(vec![i]), v))
            .collect();
        CylinderFunction {
            depth: 1,
            values: map,
        }
    }

    /// Constant function on an alphabet of size `l`.
    pub fn constant(l: usize, value: T) -> Self {
        Self::depth1(&vec![value; l])
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &HashMap<Word, T> {
        &self.values
    }

    /// True iff all length-`depth` admissible words of `g` carry a value.
    pub fn covers(&self, g: &TransitionGraph) -> bool {
        let mut stack: Vec<Vec<Symbol>> = (0..g.alphabet_size()).map(|s| vec![s]).collect();
        while let Some(w) = stack.pop() {
            if w.len() == self.depth {
                if !self.values.contains_key(w.as_slice()) {
                    return false;
                }
                continue;
            }
            for next in g.successors(*w.last().unwrap()) {
                let mut w2 = w.clone();
                w2.push(next);
                stack.push(w2);
            }
        }
        true
    }

    /// Value at `sigma^pos(x)`, i.e. the value attached to the cylinder
    /// `x_pos .. x_{pos+k-1}`. Panics if the cylinder carries no value.
    pub fn eval_at<S: SymbolSequence + ?Sized>(&self, seq: &S, pos: i64) -> T {
        let mut buf = [0usize; MAX_DEPTH];
        for (j, slot) in buf.iter_mut().enumerate().take(self.depth) {
            *slot = seq.symbol_at(pos + j as i64);
        }
        self.values
            .get(&buf[..self.depth])
            .unwrap_or_else(|| panic!("no value for cylinder {:?}", &buf[..self.depth]))
            .clone()
    }

    /// Pointwise scalar multiple (used to form potentials `-h * r`).
    pub fn scaled<U, F>(&self, f: F) -> CylinderFunction<U>
    where
        F: Fn(&T) -> U,
    {
        CylinderFunction {
            depth: self.depth,
            values: self.values.iter().map(|(w, v)| (w.clone(), f(v))).collect(),
        }
    }

    pub fn min_value(&self) -> Option<T> {
        self.values
            .values()
            .cloned()
            .fold(None, |acc: Option<T>, v| match acc {
                None => Some(v),
                Some(a) => Some(if v < a { v } else { a }),
            })
    }

    pub fn max_value(&self) -> Option<T> {
        self.values
            .values()
            .cloned()
            .fold(None, |acc: Option<T>, v| match acc {
                None => Some(v),
                Some(a) => Some(if v > a { v } else { a }),
            })
    }
}

/// Potential for pressure computations; shares the cylinder representation.
pub type Potential<T> = CylinderFunction<T>;

/// Positive cylinder function: the roof of a suspension flow.
#[derive(Clone, Debug, PartialEq)]
pub struct RoofFunction<T> {
    inner: CylinderFunction<T>,
}

impl<T: Scalar> RoofFunction<T> {
    pub fn new(inner: CylinderFunction<T>) -> Result<Self> {
        if inner.values.is_empty() {
            return Err(Error::InvalidRoof("no cylinder values".into()));
        }
        for (w, v) in &inner.values {
            if *v <= T::zero() {
                return Err(Error::InvalidRoof(format!(
                    "roof value at {:?} is not strictly positive",
                    w
                )));
            }
        }
        Ok(RoofFunction { inner })
    }

    pub fn depth1(values: &[T]) -> Result<Self> {
        Self::new(CylinderFunction::depth1(values))
    }

    pub fn constant(l: usize, value: T) -> Result<Self> {
        Self::new(CylinderFunction::constant(l, value))
    }

    pub fn depth(&self) -> usize {
        self.inner.depth()
    }

    pub fn as_cylinder(&self) -> &CylinderFunction<T> {
        &self.inner
    }

    pub fn eval_at<S: SymbolSequence + ?Sized>(&self, seq: &S, pos: i64) -> T {
        self.inner.eval_at(seq, pos)
    }

    pub fn min_value(&self) -> T {
        self.inner.min_value().expect("roof is nonempty")
    }

    pub fn max_value(&self) -> T {
        self.inner.max_value().expect("roof is nonempty")
    }

    /// True iff every roof value is the same.
    pub fn is_constant(&self) -> bool {
        let mut it = self.inner.values.values();
        let first = it.next().expect("roof is nonempty");
        it.all(|v| v == first)
    }

    /// The potential `-h * r` for a real-valued roof.
    pub fn potential(&self, h: T) -> Potential<T>
    where
        T: std::ops::Mul<Output = T>,
    {
        self.inner.scaled(|v| -(h.clone() * v.clone()))
    }
}

/// Birkhoff sum of a cylinder function along the shift orbit of `seq`:
/// `f_n = f + f.sigma + ... + f.sigma^{n-1}` for `n >= 0`, `f_0 = 0`, and
/// `f_n = -f_{|n|} . sigma^{-|n|}` for negative `n`. The cocycle identity
/// `f_{m+n}(x) = f_m(x) + f_n(sigma^m x)` holds exactly for exact scalars.
pub fn birkhoff_sum<T: Scalar, S: SymbolSequence + ?Sized>(
    f: &CylinderFunction<T>,
    seq: &S,
    n: i64,
) -> T {
    let mut acc = T::zero();
    if n >= 0 {
        for j in 0..n {
            acc = acc + f.eval_at(seq, j);
        }
        acc
    } else {
        for j in n..0 {
            acc = acc + f.eval_at(seq, j);
        }
        -acc
    }
}

/// Birkhoff sum of a roof function (always through the underlying cylinders).
pub fn roof_birkhoff_sum<T: Scalar, S: SymbolSequence + ?Sized>(
    roof: &RoofFunction<T>,
    seq: &S,
    n: i64,
) -> T {
    birkhoff_sum(roof.as_cylinder(), seq, n)
}

/// A point of the suspension space: a base sequence and a height
/// `0 <= t < r(base)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowPoint<T> {
    pub base: PeriodicPoint,
    pub height: T,
}

impl<T: Scalar> FlowPoint<T> {
    pub fn new(roof: &RoofFunction<T>, base: PeriodicPoint, height: T) -> Result<Self> {
        let ceiling = roof.eval_at(&base, 0);
        if height < T::zero() || height >= ceiling {
            return Err(Error::InvalidInput(format!(
                "height {:?} outside [0, {:?})",
                height, ceiling
            )));
        }
        Ok(FlowPoint { base, height })
    }
}

/// The suspension flow for time `tau` (any sign): shifts through the roof
/// so that the new height lies in `[0, r(new base))`. Group law
/// `flow(flow(x,a),b) = flow(x,a+b)` holds exactly for exact scalars.
pub fn flow_step<T: Scalar>(
    roof: &RoofFunction<T>,
    x: &FlowPoint<T>,
    tau: T,
) -> FlowPoint<T> {
    let total = x.height.clone() + tau;
    let mut n: i64 = 0;
    let mut acc = T::zero(); // r_n(base)
    if total >= T::zero() {
        loop {
            let cur = roof.eval_at(&x.base, n);
            if total < acc.clone() + cur {
                break;
            }
            acc = acc + roof.eval_at(&x.base, n);
            n += 1;
        }
    } else {
        while total < acc {
            n -= 1;
            acc = acc - roof.eval_at(&x.base, n);
        }
    }
    FlowPoint {
        base: x.base.shifted(n),
        height: total - acc,
    }
}

/// Period of the closed orbit labelled by a necklace: the Birkhoff sum of
/// the roof over one full cyclic block. Rotation invariant.
pub fn orbit_period<T: Scalar>(roof: &RoofFunction<T>, w: &Necklace) -> T {
    let p = PeriodicPoint::new(w.clone(), 0);
    roof_birkhoff_sum(roof, &p, w.period_length() as i64)
}

/// Metric on the shift space: `exp(-m)` where `m` is the smallest `|n|` at
/// which the sequences differ; `0` if they never differ. Sequences that
/// already differ at `n = 0` are at distance `1`. Agreement on `[-N, N]`
/// implies distance `<= exp(-N)`.
pub fn symbolic_distance(x: &EpSequence, y: &EpSequence) -> f64 {
    let core_extent = x
        .core_start()
        .abs()
        .max(x.core_end().abs())
        .max(y.core_start().abs())
        .max(y.core_end().abs());
    let fwd = num_integer::lcm(
        x.future().period_length() as i64,
        y.future().period_length() as i64,
    );
    let bwd = num_integer::lcm(
        x.past().period_length() as i64,
        y.past().period_length() as i64,
    );
    // Beyond the cores both sequences are purely periodic; agreement over
    // two full common periods pins them together forever.
    let bound = core_extent + 2 * fwd.max(bwd) + 2;
    let mut first_diff: Option<i64> = None;
    for m in 0..=bound {
        for n in [m, -m] {
            if x.symbol_at(n) != y.symbol_at(n) {
                first_diff = Some(m);
                break;
            }
        }
        if first_diff.is_some() {
            break;
        }
    }
    match first_diff {
        Some(m) => (-(m as f64)).exp(),
        None => 0.0,
    }
}

/// Bowen-Walters-style distance on the suspension space, built from the
/// symbolic metric and roof-normalized heights. This is the standard
/// external construction (direct move, or through the roof either way);
/// nothing downstream depends on its exact constants.
pub fn bowen_walters_distance<T: Real>(
    roof: &RoofFunction<T>,
    x: &FlowPoint<T>,
    y: &FlowPoint<T>,
) -> f64 {
    let seq = |p: &PeriodicPoint| EpSequence::periodic(p.block().clone());
    let shift_seq = |p: &PeriodicPoint, k: i64| EpSequence::periodic(p.shifted(k).block().clone());
    // phases are lost by EpSequence::periodic; rebuild aligned sequences.
    let aligned = |p: &PeriodicPoint| {
        let n = p.period_length();
        let core: Vec<Symbol> = (0..n as i64).map(|i| p.symbol_at(i)).collect();
        EpSequence::new(
            p.shifted(0).block().clone(),
            core,
            p.shifted(n as i64).block().clone(),
            0,
        )
    };
    let _ = (seq, shift_seq);
    let xa = aligned(&x.base);
    let ya = aligned(&y.base);
    let xs = aligned(&x.base.shifted(1));
    let ys = aligned(&y.base.shifted(1));
    let rx = roof.eval_at(&x.base, 0).to_f64().unwrap();
    let ry = roof.eval_at(&y.base, 0).to_f64().unwrap();
    let px = x.height.to_f64().unwrap() / rx;
    let py = y.height.to_f64().unwrap() / ry;
    let direct = symbolic_distance(&xa, &ya) + (px - py).abs();
    let through_up = symbolic_distance(&xs, &ya) + (1.0 - px) + py;
    let through_down = symbolic_distance(&xa, &ys) + (1.0 - py) + px;
    direct.min(through_up).min(through_down)
}
