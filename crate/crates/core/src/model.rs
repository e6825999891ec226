//! Concrete 3-d realization of a suspended L-branch affine horseshoe: the
//! square section with horizontal domain strips, per-branch affine maps,
//! an embedding of the suspension into a solid torus, exact periodic
//! orbits, rectangle-crossing verification, section intersection patterns,
//! spanning-set entropy estimates, and boundary links of selected orbits.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linking::{min_distance, Vec3};
use crate::select::OrderedSelection;
use crate::shift::{canonical_necklace, Necklace, Word};

/// Geometry of the solid-torus embedding and its sampling density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    /// Radius of the core circle of the solid torus.
    pub major_radius: f64,
    /// Horizontal half-extent scale of the section inside the torus.
    pub scale_x: f64,
    /// Vertical half-extent scale of the section inside the torus.
    pub scale_y: f64,
    /// Polyline vertices per trip around the torus.
    pub samples_per_turn: usize,
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        EmbeddingParams {
            major_radius: 0.6,
            scale_x: 0.3,
            scale_y: 0.5,
            samples_per_turn: 100,
        }
    }
}

/// Axis-aligned rectangle in the section plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, other: &Rect) -> bool {
        self.x0 <= other.x0 && other.x1 <= self.x1 && self.y0 <= other.y0 && other.y1 <= self.y1
    }

    pub fn disjoint(&self, other: &Rect) -> bool {
        self.x1 <= other.x0 || other.x1 <= self.x0 || self.y1 <= other.y0 || other.y1 <= self.y0
    }
}

/// The section square with its domain strips.
#[derive(Clone, Debug, PartialEq)]
pub struct RectangleSection {
    pub outer: Rect,
    pub domains: Vec<Rect>,
}

/// L-branch affine horseshoe on the unit square, suspended with a
/// per-branch constant roof and embedded in a solid torus. Branch `i`
/// contracts x by `lambda`, expands y by `1/lambda`, maps the horizontal
/// strip at height `offsets_y[i]` onto the vertical strip at
/// `offsets_x[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineHorseshoeModel {
    pub branch_count: usize,
    pub lambda: f64,
    pub roofs: Vec<f64>,
    /// Left edges of the image (vertical) strips.
    pub offsets_x: Vec<f64>,
    /// Bottom edges of the domain (horizontal) strips.
    pub offsets_y: Vec<f64>,
    pub embedding: EmbeddingParams,
}

/// Closed orbit of the suspension, sampled as a time-stamped polyline.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit3D {
    pub label: Necklace,
    pub vertices: Vec<Vec3>,
    pub times: Vec<f64>,
    pub closed: bool,
    pub period: f64,
}

/// Build the canonical model: strips centered at `(2i+1)/(2L)` with width
/// `lambda`, which keeps domains and images pairwise disjoint inside the
/// square exactly when `lambda < 1/(2L)`.
pub fn build_model(
    branch_count: usize,
    lambda: f64,
    roofs: &[f64],
) -> Result<AffineHorseshoeModel> {
    if branch_count == 0 {
        return Err(Error::InvalidModel("need at least one branch".into()));
    }
    if !(lambda > 0.0 && lambda < 1.0 / (2.0 * branch_count as f64)) {
        return Err(Error::InvalidModel(format!(
            "lambda {lambda} outside (0, 1/{})",
            2 * branch_count
        )));
    }
    if roofs.len() != branch_count || roofs.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidModel(
            "need one positive finite roof value per branch".into(),
        ));
    }
    let offsets: Vec<f64> = (0..branch_count)
        .map(|i| (2 * i + 1) as f64 / (2.0 * branch_count as f64) - lambda / 2.0)
        .collect();
    Ok(AffineHorseshoeModel {
        branch_count,
        lambda,
        roofs: roofs.to_vec(),
        offsets_x: offsets.clone(),
        offsets_y: offsets,
        embedding: EmbeddingParams::default(),
    })
}

impl AffineHorseshoeModel {
    /// The section square with its domain strips.
    pub fn section(&self) -> RectangleSection {
        RectangleSection {
            outer: Rect {
                x0: 0.0,
                y0: 0.0,
                x1: 1.0,
                y1: 1.0,
            },
            domains: (0..self.branch_count)
                .map(|i| Rect {
                    x0: 0.0,
                    y0: self.offsets_y[i],
                    x1: 1.0,
                    y1: self.offsets_y[i] + self.lambda,
                })
                .collect(),
        }
    }

    /// Image of the section under branch `i`.
    pub fn branch_map(&self, i: usize, x: f64, y: f64) -> (f64, f64) {
        (
            self.lambda * x + self.offsets_x[i],
            (y - self.offsets_y[i]) / self.lambda,
        )
    }

    /// Image strip of branch `i`: a full-height vertical strip.
    pub fn image_strip(&self, i: usize) -> Rect {
        Rect {
            x0: self.offsets_x[i],
            y0: 0.0,
            x1: self.offsets_x[i] + self.lambda,
            y1: 1.0,
        }
    }

    /// Position of the embedded suspension at section point `(x, y)` in
    /// branch `i`, a fraction `s` of the way around the torus. The motion
    /// splits into two phases: first contract x inside the branch's own
    /// horizontal strip, then expand y with the branches already separated
    /// horizontally; the map is injective at every fixed `s`.
    pub fn embed(&self, i: usize, x: f64, y: f64, s: f64) -> Vec3 {
        let (fx, fy) = self.branch_map(i, x, y);
        let (xs, ys) = if s <= 0.5 {
            let sigma = 2.0 * s;
            (x + sigma * (fx - x), y)
        } else {
            let sigma = 2.0 * s - 1.0;
            (fx, y + sigma * (fy - y))
        };
        let phi = std::f64::consts::TAU * s;
        let radial = self.embedding.major_radius + self.embedding.scale_x * (xs - 0.5);
        Vec3::new(
            radial * phi.cos(),
            radial * phi.sin(),
            self.embedding.scale_y * (ys - 0.5),
        )
    }
}

const GEOMETRY_MARGIN: f64 = 1e-9;

/// Check that every branch image is a full-height vertical strip strictly
/// inside the square, pairwise disjoint from the others, and that it
/// crosses every domain strip: its long sides traverse the strip from
/// below to above while its short sides stay outside the strip.
pub fn verify_markov_type(model: &AffineHorseshoeModel) -> bool {
    let l = model.branch_count;
    let lam = model.lambda;
    let m = GEOMETRY_MARGIN;
    for i in 0..l {
        let a = model.offsets_x[i];
        let c = model.offsets_y[i];
        if !(a > m && a + lam < 1.0 - m && c > m && c + lam < 1.0 - m) {
            return false;
        }
        for j in 0..i {
            if !model.image_strip(i).disjoint(&model.image_strip(j)) {
                return false;
            }
            let di = model.section().domains[i];
            let dj = model.section().domains[j];
            if !di.disjoint(&dj) {
                return false;
            }
        }
    }
    // Crossing conditions for every image/domain pair (i, j): the image's
    // vertical sides run from y=0 to y=1, so they enter the strip from
    // below c_j and leave above c_j + lambda; its horizontal sides at
    // y = 0, 1 avoid the strip entirely.
    for i in 0..l {
        let img = model.image_strip(i);
        for j in 0..l {
            let c = model.offsets_y[j];
            let crosses = img.y0 < c - m && img.y1 > c + lam + m;
            let ends_outside = img.y0 < c - m && img.y1 > c + lam + m;
            let spans_x = img.x0 > m && img.x1 < 1.0 - m;
            if !(crosses && ends_outside && spans_x) {
                return false;
            }
        }
    }
    true
}

fn compose_affine(slope: f64, intercept: f64, lam: f64, offset: f64) -> (f64, f64) {
    // apply y = lam * x + offset after the existing map
    (lam * slope, lam * intercept + offset)
}

/// The unique periodic point of the horseshoe with the given itinerary,
/// solved exactly as an affine fixed point, then lifted through the
/// suspension into a closed polyline.
pub fn periodic_orbit(model: &AffineHorseshoeModel, w: &Necklace) -> Result<Orbit3D> {
    let n = w.period_length();
    let symbols: Vec<usize> = (0..n as i64).map(|j| w.symbol_at(j)).collect();
    if symbols.iter().any(|&s| s >= model.branch_count) {
        return Err(Error::SymbolOutOfRange {
            symbol: *symbols.iter().max().unwrap(),
            alphabet_size: model.branch_count,
        });
    }
    let lam = model.lambda;
    // x is driven forward: over one period x -> lam^n x + b.
    let (mut sx, mut bx) = (1.0, 0.0);
    for &s in &symbols {
        let (s2, b2) = compose_affine(sx, bx, lam, model.offsets_x[s]);
        sx = s2;
        bx = b2;
    }
    let x0 = bx / (1.0 - sx);
    // y is driven backward: y_j = lam * y_{j+1} + c_{w_j}.
    let (mut sy, mut by) = (1.0, 0.0);
    for &s in symbols.iter().rev() {
        let (s2, b2) = compose_affine(sy, by, lam, model.offsets_y[s]);
        sy = s2;
        by = b2;
    }
    let y0 = by / (1.0 - sy);

    // Section points of the orbit: x forward (contracting), y backward
    // (the backward recursion y_j = lam y_{j+1} + c_j is the contracting
    // direction; iterating y forward would amplify rounding by lam^{-n}).
    let mut xs = vec![0.0; n + 1];
    xs[0] = x0;
    for (j, &s) in symbols.iter().enumerate() {
        xs[j + 1] = lam * xs[j] + model.offsets_x[s];
    }
    let mut ys = vec![0.0; n + 1];
    ys[n] = y0;
    for j in (0..n).rev() {
        ys[j] = lam * ys[j + 1] + model.offsets_y[symbols[j]];
    }
    let pts: Vec<(f64, f64)> = (0..n).map(|j| (xs[j], ys[j])).collect();
    let closure = ((xs[n] - x0).powi(2) + (ys[0] - y0).powi(2)).sqrt();
    if closure > 1e-9 {
        return Err(Error::InvalidModel(format!(
            "periodic point failed to close up (error {closure})"
        )));
    }

    // sample the suspension trajectory; offset by half a step so no vertex
    // lies exactly on the section plane
    let samples = model.embedding.samples_per_turn.max(8);
    let mut vertices = Vec::with_capacity(n * samples);
    let mut times = Vec::with_capacity(n * samples);
    let mut elapsed = 0.0;
    for (j, &s) in symbols.iter().enumerate() {
        let (px, py) = pts[j];
        let roof = model.roofs[s];
        for k in 0..samples {
            let frac = (k as f64 + 0.5) / samples as f64;
            vertices.push(model.embed(s, px, py, frac));
            times.push(elapsed + frac * roof);
        }
        elapsed += roof;
    }
    Ok(Orbit3D {
        label: w.clone(),
        vertices,
        times,
        closed: true,
        period: elapsed,
    })
}

/// Transverse intersections of a closed orbit with the section half-plane:
/// the number of passages and the cyclic order of domain strips hit.
pub fn intersection_pattern(
    model: &AffineHorseshoeModel,
    orbit: &Orbit3D,
) -> Result<(usize, Word)> {
    let n = orbit.vertices.len();
    if n < 3 {
        return Err(Error::InvalidInput("orbit polyline too short".into()));
    }
    // unwrap the angular coordinate along the polyline
    let mut angles = Vec::with_capacity(n + 1);
    let mut prev = f64::atan2(orbit.vertices[0].y, orbit.vertices[0].x);
    let mut acc = prev;
    angles.push(acc);
    for k in 1..=n {
        let v = orbit.vertices[k % n];
        let a = f64::atan2(v.y, v.x);
        let mut da = a - prev;
        while da > std::f64::consts::PI {
            da -= std::f64::consts::TAU;
        }
        while da < -std::f64::consts::PI {
            da += std::f64::consts::TAU;
        }
        if da.abs() < 1e-15 {
            return Err(Error::TangentialIntersection {
                t: orbit.times[k % n],
            });
        }
        prev = a;
        acc += da;
        angles.push(acc);
    }
    // crossings of multiples of 2 pi, classified by the strip the section
    // point lands in
    let section = model.section();
    let mut sequence = Vec::new();
    for k in 0..n {
        let (a0, a1) = (angles[k], angles[k + 1]);
        let lo = (a0 / std::f64::consts::TAU).ceil() as i64;
        let hi = (a1 / std::f64::consts::TAU).floor() as i64;
        if a1 <= a0 {
            return Err(Error::TangentialIntersection { t: orbit.times[k] });
        }
        for mult in lo..=hi {
            let target = mult as f64 * std::f64::consts::TAU;
            let f = (target - a0) / (a1 - a0);
            let p0 = orbit.vertices[k];
            let p1 = orbit.vertices[(k + 1) % n];
            let p = p0.add(p1.sub(p0).scale(f));
            let ys = p.z / model.embedding.scale_y + 0.5;
            // nearest domain strip
            let (best, dist) = section
                .domains
                .iter()
                .enumerate()
                .map(|(j, d)| {
                    let dd = if ys < d.y0 {
                        d.y0 - ys
                    } else if ys > d.y1 {
                        ys - d.y1
                    } else {
                        0.0
                    };
                    (j, dd)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if dist > 0.1 {
                return Err(Error::InvalidInput(format!(
                    "section crossing at height {ys} is not inside any domain strip"
                )));
            }
            sequence.push(best);
        }
    }
    Ok((sequence.len(), Word::new(sequence)))
}

fn window_count(roofs: &[f64], t: f64, memo: &mut HashMap<u64, f64>) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let key = t.to_bits();
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let mut total = 0.0;
    for &r in roofs {
        total += window_count(roofs, t - r, memo);
    }
    memo.insert(key, total);
    total
}

/// Size of the structured cylinder cover at scale `epsilon` over horizon
/// `t`, returned as its logarithm: a cell fixes the future symbol window
/// covering time `t` plus enough extra symbols to pin the expanding
/// coordinate, a past window pinning the contracting coordinate, and a
/// starting-height bin.
fn log_cover_size(model: &AffineHorseshoeModel, t: f64, epsilon: f64) -> Result<f64> {
    if epsilon <= 0.0 {
        return Err(Error::GridTooCoarse { epsilon });
    }
    let lam = model.lambda;
    let l = model.branch_count as f64;
    let emb = &model.embedding;
    let budget = epsilon / 3.0;
    let count_pow = |scale: f64| -> Result<u32> {
        // smallest p with scale * lam^p <= budget
        let mut p = 0u32;
        let mut v = scale;
        while v > budget {
            v *= lam;
            p += 1;
            if p > 500 {
                return Err(Error::GridTooCoarse { epsilon });
            }
        }
        Ok(p)
    };
    let p = count_pow(emb.scale_x)?;
    let q = count_pow(emb.scale_y / lam)?; // q extra symbols, control lam^{q-1}
    let r_min = model.roofs.iter().cloned().fold(f64::INFINITY, f64::min);
    let r_max = model.roofs.iter().cloned().fold(0.0, f64::max);
    let v_max = std::f64::consts::TAU * (emb.major_radius + 0.5 * emb.scale_x)
        + (emb.scale_x + emb.scale_y) / r_min;
    let bins = (r_max * v_max / budget).ceil().max(1.0);
    let mut memo = HashMap::new();
    let w = window_count(&model.roofs, t, &mut memo);
    Ok(w.ln() + (p + q) as f64 * l.ln() + bins.ln())
}

/// Spanning-set entropy estimates: for each `epsilon`, `(1/t) * log` of the
/// structured cover size. Nonincreasing in `epsilon`.
pub fn spanning_entropy(
    model: &AffineHorseshoeModel,
    t: f64,
    epsilons: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if t <= 0.0 {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    epsilons
        .iter()
        .map(|&eps| Ok((eps, log_cover_size(model, t, eps)? / t)))
        .collect()
}

/// Two-horizon entropy estimate: the per-epsilon estimates at `t1 < t2`
/// share the same epsilon-dependent constant, so
/// `(t2 e2 - t1 e1) / (t2 - t1)` cancels it; the values are then averaged
/// over the epsilon sweep.
pub fn spanning_entropy_extrapolated(
    model: &AffineHorseshoeModel,
    t1: f64,
    t2: f64,
    epsilons: &[f64],
) -> Result<f64> {
    if !(t1 > 0.0 && t2 > t1) {
        return Err(Error::InvalidInput("need 0 < t1 < t2".into()));
    }
    if epsilons.is_empty() {
        return Err(Error::InvalidInput("need at least one epsilon".into()));
    }
    let e1 = spanning_entropy(model, t1, epsilons)?;
    let e2 = spanning_entropy(model, t2, epsilons)?;
    let mut acc = 0.0;
    for (&(_, a), &(_, b)) in e1.iter().zip(&e2) {
        acc += (t2 * b - t1 * a) / (t2 - t1);
    }
    Ok(acc / epsilons.len() as f64)
}

const LINK_RESOLUTION: f64 = 1e-7;

/// Realize the boundary link of a selection over a pool of itinerary
/// words: one orbit triple for the outer bracket pair (the two orbits and
/// their concatenation) and one triple per interior item `(omega theta_m,
/// omega theta_p, omega theta_m omega theta_p)`. All labels must be
/// primitive and pairwise distinct as necklaces, and the realized curves
/// pairwise disjoint.
pub fn fried_link(
    model: &AffineHorseshoeModel,
    pool: &[Word],
    selection: &OrderedSelection,
) -> Result<Vec<[Orbit3D; 3]>> {
    let word = |idx: usize| -> Result<&Word> {
        pool.get(idx)
            .ok_or_else(|| Error::InvalidInput(format!("selection index {idx} outside pool")))
    };
    let t_mm = word(selection.theta_mm)?;
    let t_pp = word(selection.theta_pp)?;
    let t_m = word(selection.theta_m)?;
    let t_p = word(selection.theta_p)?;
    let mut label_triples: Vec<[Word; 3]> =
        vec![[t_mm.clone(), t_pp.clone(), t_mm.concat(t_pp)]];
    for &oi in &selection.omegas {
        let om = word(oi)?;
        let a = om.concat(t_m);
        let b = om.concat(t_p);
        let c = a.concat(&b);
        label_triples.push([a, b, c]);
    }
    let all_labels: Vec<&Word> = label_triples.iter().flatten().collect();
    for (i, a) in all_labels.iter().enumerate() {
        if !a.is_primitive() {
            return Err(Error::LabelCollision(format!(
                "label {:?} is a proper power",
                a
            )));
        }
        for b in &all_labels[i + 1..] {
            if canonical_necklace(a) == canonical_necklace(b) {
                return Err(Error::LabelCollision(format!(
                    "labels {:?} and {:?} name the same orbit",
                    a, b
                )));
            }
        }
    }
    let triples: Vec<[Orbit3D; 3]> = label_triples
        .iter()
        .map(|[a, b, c]| {
            Ok([
                periodic_orbit(model, &canonical_necklace(a))?,
                periodic_orbit(model, &canonical_necklace(b))?,
                periodic_orbit(model, &canonical_necklace(c))?,
            ])
        })
        .collect::<Result<_>>()?;
    let curves: Vec<&Orbit3D> = triples.iter().flatten().collect();
    for (i, a) in curves.iter().enumerate() {
        for b in &curves[i + 1..] {
            let d = min_distance(&a.vertices, &b.vertices);
            if d < LINK_RESOLUTION {
                return Err(Error::CurvesTooClose { min_dist: d });
            }
        }
    }
    Ok(triples)
}
