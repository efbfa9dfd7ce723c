//! Integral means of rough functions and their iterates.
//!
//! A function is held as samples on a uniform grid together with a composite
//! Simpson prefix-integral table. Off-grid queries go through a cubic Hermite
//! interpolant of the prefix table whose slopes are the sampled values, so the
//! derivative of the interpolated integral reproduces the function exactly at
//! grid nodes. Iterated means re-sample each smoothing level on its shrunken
//! domain; when window widths are multiples of the grid step every level is
//! exact for the piecewise-cubic surrogate.

use serde::{Deserialize, Serialize};

use crate::index_algebra::{Sign, SignString};
use crate::stretching::Interval;
use crate::{Error, Result};

/// Classical roughness threshold a·q > 1 + 3π/2 for Σ aᵏ cos(qᵏπt).
const ROUGHNESS_THRESHOLD: f64 = 1.0 + 3.0 * std::f64::consts::PI / 2.0;

pub const DEFAULT_CELLS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassParams {
    pub amp: f64,
    pub freq: u32,
    pub terms: u32,
}

impl Default for WeierstrassParams {
    fn default() -> Self {
        WeierstrassParams {
            amp: 0.5,
            freq: 13,
            terms: 30,
        }
    }
}

impl WeierstrassParams {
    pub fn new(amp: f64, freq: u32, terms: u32) -> Result<Self> {
        if !(amp > 0.0 && amp < 1.0) {
            return Err(Error::invalid("amp", format!("must lie in ]0,1[, got {amp}")));
        }
        if freq < 3 || freq % 2 == 0 {
            return Err(Error::invalid("freq", format!("must be an odd integer >= 3, got {freq}")));
        }
        if terms == 0 {
            return Err(Error::invalid("terms", "must be positive".to_string()));
        }
        Ok(WeierstrassParams { amp, freq, terms })
    }

    /// Whether the classical nowhere-differentiability condition holds.
    /// Violations are advisory only; construction does not reject them.
    pub fn is_rough(&self) -> bool {
        self.amp * self.freq as f64 > ROUGHNESS_THRESHOLD
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut a = 1.0;
        let mut q = 1.0;
        for _ in 0..self.terms {
            acc += a * (q * std::f64::consts::PI * t).cos();
            a *= self.amp;
            q *= self.freq as f64;
        }
        acc
    }

    /// Geometric tail bound: |f| <= (1-ampᵗᵉʳᵐˢ)/(1-amp).
    pub fn sup_bound(&self) -> f64 {
        (1.0 - self.amp.powi(self.terms as i32)) / (1.0 - self.amp)
    }
}

pub fn weierstrass(params: WeierstrassParams) -> impl Fn(f64) -> f64 {
    move |t| params.eval(t)
}

/// Uniform samples of a function plus its Simpson prefix integrals.
/// `values[i]` sits at node a + i·step, `mids[i]` at the midpoint of cell i.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledFunction {
    domain: Interval,
    step: f64,
    values: Vec<f64>,
    mids: Vec<f64>,
    prefix: Vec<f64>,
}

impl SampledFunction {
    pub fn sample(f: impl Fn(f64) -> f64, domain: Interval, cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::invalid("cells", format!("need at least 2 grid cells, got {cells}")));
        }
        let step = domain.length() / cells as f64;
        let node = |i: usize| domain.lo() + i as f64 * step;
        let values: Vec<f64> = (0..=cells).map(|i| f(node(i))).collect();
        let mids: Vec<f64> = (0..cells).map(|i| f(node(i) + step / 2.0)).collect();
        if values.iter().chain(&mids).any(|v| !v.is_finite()) {
            return Err(Error::domain("function produced a non-finite sample".to_string()));
        }
        let mut prefix = Vec::with_capacity(cells + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for i in 0..cells {
            acc += step / 6.0 * (values[i] + 4.0 * mids[i] + values[i + 1]);
            prefix.push(acc);
        }
        Ok(SampledFunction {
            domain,
            step,
            values,
            mids,
            prefix,
        })
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn cells(&self) -> usize {
        self.mids.len()
    }

    /// Index of the cell containing x and the offset into it, clamped to the
    /// grid so boundary queries stay in range.
    fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let slack = self.step * 1e-6;
        if x < self.domain.lo() - slack || x > self.domain.hi() + slack {
            return Err(Error::domain(format!(
                "{x} outside sampled domain ]{},{}[",
                self.domain.lo(),
                self.domain.hi()
            )));
        }
        let raw = ((x - self.domain.lo()) / self.step).floor();
        let i = (raw.max(0.0) as usize).min(self.cells() - 1);
        Ok((i, x - (self.domain.lo() + i as f64 * self.step)))
    }

    /// Hermite coefficients of the prefix interpolant on cell i, in the local
    /// coordinate u ∈ [0, step]: P(u) = c0 + c1·u + c2·u² + c3·u³.
    fn cell_coeffs(&self, i: usize) -> [f64; 4] {
        let s = self.step;
        let dp = self.prefix[i + 1] - self.prefix[i];
        let f0 = self.values[i];
        let f1 = self.values[i + 1];
        let c2 = (3.0 * dp / s - 2.0 * f0 - f1) / s;
        let c3 = (f0 + f1 - 2.0 * dp / s) / (s * s);
        [self.prefix[i], f0, c2, c3]
    }

    /// Interpolated prefix integral ∫_a^x.
    pub fn integral_to(&self, x: f64) -> Result<f64> {
        let (i, u) = self.locate(x)?;
        let [c0, c1, c2, c3] = self.cell_coeffs(i);
        Ok(c0 + u * (c1 + u * (c2 + u * c3)))
    }

    /// Function value: derivative of the interpolated prefix, exact at nodes.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (i, u) = self.locate(x)?;
        let [_, c1, c2, c3] = self.cell_coeffs(i);
        Ok(c1 + u * (2.0 * c2 + u * 3.0 * c3))
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .chain(&self.mids)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Window widths δ_0 > δ_1 > … > δ_n, strictly decreasing; the last entry may
/// be 0 (the degenerate index of the limit identification).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeltaSchedule {
    deltas: Vec<f64>,
}

impl DeltaSchedule {
    pub fn new(deltas: Vec<f64>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::invalid("deltas", "schedule must be non-empty".to_string()));
        }
        for (i, &d) in deltas.iter().enumerate() {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::invalid("deltas", format!("delta_{i} = {d} is not a finite non-negative value")));
            }
            if d == 0.0 && i + 1 != deltas.len() {
                return Err(Error::invalid("deltas", format!("delta_{i} = 0 before the final index")));
            }
        }
        if deltas[0] == 0.0 && deltas.len() > 1 {
            return Err(Error::invalid("deltas", "delta_0 must be positive".to_string()));
        }
        for w in deltas.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::invalid("deltas", format!("schedule not strictly decreasing at {} >= {}", w[1], w[0])));
            }
        }
        Ok(DeltaSchedule { deltas })
    }

    /// δ_0 must fall inside ]0, ε_0[ when a stretching schedule is in play.
    pub fn check_eps0(&self, eps0: f64) -> Result<()> {
        if self.deltas[0] <= 0.0 || self.deltas[0] >= eps0 {
            return Err(Error::invalid("deltas", format!("delta_0 = {} must lie in ]0, {eps0}[", self.deltas[0])));
        }
        Ok(())
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Child schedule with one more window appended.
    pub fn extended(&self, delta_next: f64) -> Result<DeltaSchedule> {
        let mut deltas = self.deltas.clone();
        deltas.push(delta_next);
        DeltaSchedule::new(deltas)
    }
}

fn signed_window(x: f64, delta: f64, sigma: Sign) -> f64 {
    match sigma {
        Sign::Plus => x + delta,
        Sign::Minus => x - delta,
    }
}

/// Forward/backward mean (σ/δ)∫_x^{x+σδ} f; δ = 0 degenerates to
/// the pointwise value, the unique continuous extension.
pub fn mean(f: &SampledFunction, x: f64, delta: f64, sigma: Sign) -> Result<f64> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid("delta", format!("{delta} is not a finite non-negative width")));
    }
    if delta == 0.0 {
        return f.eval(x);
    }
    let far = signed_window(x, delta, sigma);
    let integral = f.integral_to(far)? - f.integral_to(x)?;
    Ok(match sigma {
        Sign::Plus => integral / delta,
        Sign::Minus => -integral / delta,
    })
}

/// The x-range on which every nested window of the iterate stays inside the
/// domain of `f`.
pub fn valid_range(f: &SampledFunction, signs: &SignString, deltas: &DeltaSchedule) -> Result<Interval> {
    if signs.signs().len() != deltas.len() {
        return Err(Error::invalid("signs", format!("{} signs vs {} deltas", signs.signs().len(), deltas.len())));
    }
    let (mut lo, mut hi) = (f.domain().lo(), f.domain().hi());
    for (sigma, &delta) in signs.signs().iter().zip(deltas.deltas()) {
        match sigma {
            Sign::Plus => hi -= delta,
            Sign::Minus => lo += delta,
        }
    }
    if lo >= hi {
        return Err(Error::domain(format!(
            "windows exhaust the domain: valid range would be [{lo}, {hi}]"
        )));
    }
    Interval::new(lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanValue {
    pub value: f64,
    /// Nominal per-level composite-Simpson bound, O(step⁴) in the grid step.
    pub err_bound: f64,
}

/// Materializes the level functions F⁽⁰⁾ … F⁽ⁿ⁾ of the iterate. Each level
/// lives on the domain shrunk by its window and keeps the original step.
fn iterate_levels(
    f: &SampledFunction,
    signs: &SignString,
    deltas: &DeltaSchedule,
) -> Result<(Vec<SampledFunction>, f64)> {
    valid_range(f, signs, deltas)?;
    let mut levels: Vec<SampledFunction> = Vec::new();
    let mut err = 0.0;
    for (k, (&sigma, &delta)) in signs.signs().iter().zip(deltas.deltas()).enumerate() {
        let prev = levels.last().unwrap_or(f);
        let (lo, hi) = match sigma {
            Sign::Plus => (prev.domain().lo(), prev.domain().hi() - delta),
            Sign::Minus => (prev.domain().lo() + delta, prev.domain().hi()),
        };
        let domain = Interval::new(lo, hi)?;
        let cells = ((domain.length() / f.step()).round() as usize).max(2);
        let prev_ref = prev.clone();
        let level = SampledFunction::sample(
            |t| mean(&prev_ref, t, delta, sigma).unwrap_or(f64::NAN),
            domain,
            cells,
        )
        .map_err(|e| match e {
            Error::Domain(_) => Error::domain(format!("level {k} window left the sampled domain")),
            other => other,
        })?;
        err += level.step().powi(4) / 180.0 * level.max_abs().max(1.0);
        levels.push(level);
    }
    Ok((levels, err))
}

/// Iterated mean F^{σ_0…σ_n}_{δ_0…δ_n}(x) by the level recursion
/// F⁽ᵏ⁾(x) = (σ_k/δ_k)∫_x^{x+σ_kδ_k} F⁽ᵏ⁻¹⁾, base F⁽⁻¹⁾ = f.
pub fn iterated_mean(
    f: &SampledFunction,
    x: f64,
    signs: &SignString,
    deltas: &DeltaSchedule,
) -> Result<MeanValue> {
    if signs.signs().len() != deltas.len() {
        return Err(Error::invalid(
            "signs",
            format!("{} signs vs {} deltas", signs.signs().len(), deltas.len()),
        ));
    }
    if signs.signs().len() == 1 {
        return Ok(MeanValue {
            value: mean(f, x, deltas.deltas()[0], signs.signs()[0])?,
            err_bound: f.step().powi(4) / 180.0 * f.max_abs().max(1.0),
        });
    }
    let (levels, err_bound) = iterate_levels(f, signs, deltas)?;
    Ok(MeanValue {
        value: levels.last().expect("non-empty schedule").eval(x)?,
        err_bound,
    })
}

/// Central-difference probe of d/dx mean(f,x,δ,σ) against the fundamental-
/// theorem value (σ/δ)(f(x+σδ) − f(x)). The stencil is one-sided with nodes
/// inside a single grid cell, so it differentiates the piecewise-cubic
/// surrogate exactly; agreement is tightest at grid-aligned x.
pub fn mean_derivative_check(f: &SampledFunction, x: f64, delta: f64, sigma: Sign) -> Result<(f64, f64)> {
    let h = f.step() / 8.0;
    let g = |t: f64| mean(f, t, delta, sigma);
    // Third-order forward stencil, exact on cubics.
    let numeric = (-11.0 * g(x)? + 18.0 * g(x + h)? - 9.0 * g(x + 2.0 * h)? + 2.0 * g(x + 3.0 * h)?) / (6.0 * h);
    let analytic = if delta == 0.0 {
        // Degenerate window: mean ≡ f, derivative is f'.
        (f.eval(x + h)? - f.eval(x - h)?) / (2.0 * h)
    } else {
        let far = signed_window(x, delta, sigma);
        let diff = f.eval(far)? - f.eval(x)?;
        match sigma {
            Sign::Plus => diff / delta,
            Sign::Minus => -diff / delta,
        }
    };
    Ok((numeric, analytic))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPoint {
    pub x: f64,
    pub y: f64,
    /// Window tuple in the order (δ_n, …, δ_0).
    pub tags: Vec<f64>,
}

/// Samples the graph sets of three component iterates at the given abscissas.
pub fn graph_points(
    fs: [&SampledFunction; 3],
    signs: &SignString,
    deltas: &DeltaSchedule,
    xs: &[f64],
) -> Result<Vec<[GraphPoint; 3]>> {
    let tags: Vec<f64> = deltas.deltas().iter().rev().copied().collect();
    let mut per_f: Vec<Option<Vec<SampledFunction>>> = Vec::new();
    for f in fs {
        per_f.push(if signs.signs().len() == 1 || xs.is_empty() {
            None
        } else {
            Some(iterate_levels(f, signs, deltas)?.0)
        });
    }
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let mut triple = Vec::with_capacity(3);
        for (f, levels) in fs.iter().zip(&per_f) {
            let y = match levels {
                Some(levels) => levels.last().expect("non-empty").eval(x)?,
                None => mean(f, x, deltas.deltas()[0], signs.signs()[0])?,
            };
            triple.push(GraphPoint {
                x,
                y,
                tags: tags.clone(),
            });
        }
        out.push([triple[0].clone(), triple[1].clone(), triple[2].clone()]);
    }
    Ok(out)
}

/// Shifts first coordinates by δ_0, mapping forward-mean graph samples onto
/// backward-mean ones.
pub fn translate(points: &[GraphPoint], delta0: f64) -> Vec<GraphPoint> {
    points
        .iter()
        .map(|p| GraphPoint {
            x: p.x + delta0,
            y: p.y,
            tags: p.tags.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub delta_next: f64,
    pub abs_error: f64,
}

/// Tabulates |F^{σ…σ_{n+1}}_{δ…δ_{n+1}}(x) − F^{σ…}_{δ…}(x)| for a sequence
/// of next-level windows, witnessing the δ_{n+1} → 0 identification.
pub fn lemma_l1_convergence(
    f: &SampledFunction,
    x: f64,
    signs: &SignString,
    deltas: &DeltaSchedule,
    sigma_next: Sign,
    delta_next_sequence: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    for w in delta_next_sequence.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::invalid("delta_next_sequence", format!("not decreasing at {} >= {}", w[1], w[0])));
        }
    }
    let base = iterated_mean(f, x, signs, deltas)?.value;
    let mut signs_ext = signs.signs().to_vec();
    signs_ext.push(sigma_next);
    let signs_ext = SignString::new(signs_ext)?;
    let mut rows = Vec::with_capacity(delta_next_sequence.len());
    for &dn in delta_next_sequence {
        let deltas_ext = deltas.extended(dn)?;
        let value = iterated_mean(f, x, &signs_ext, &deltas_ext)?.value;
        rows.push(ConvergenceRow {
            delta_next: dn,
            abs_error: (value - base).abs(),
        });
    }
    Ok(rows)
}
