//! Norms, weight classes, and variable-exponent machinery.
//!
//! Everything is computed by grid quadrature on sampled functions: weighted
//! `L^p` and weak `L^{p,∞}` norms, BMO norms over cube families, Muckenhoupt
//! `A_p` and multilinear `A_{P,q}` characteristic constants, and the modular
//! / Luxemburg norm of variable-exponent Lebesgue spaces together with
//! log-Hölder regularity constants of the exponent.
//!
//! Cube sweeps (BMO, weight constants) skip cubes holding fewer than 4 grid
//! nodes: a near-empty cube has spuriously zero oscillation and spuriously
//! flat averages, which would contaminate suprema in both directions.

use serde::{Deserialize, Serialize};

use crate::error::FraclabError;
use crate::exec;
use crate::grid::{
    clipped_weight, for_cells_in, CellTable, Cube, CubeFamily, GridDomain, SampledFunction,
};
use crate::Result;

/// Minimum nodes a cube must hold to enter BMO / weight-constant suprema.
pub const MIN_CUBE_NODES: usize = 4;

// Integration weights only need nonnegativity (a null set of zeros is
// harmless); weight-class constants check strict positivity separately
// because they average negative powers.
fn check_weight(f: &SampledFunction, w: &SampledFunction) -> Result<()> {
    if w.domain() != f.domain() {
        return Err(FraclabError::GridMismatch(
            "weight grid differs from the function grid".into(),
        ));
    }
    if w.values().iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(FraclabError::invalid(
            "weights must be nonnegative and finite at every node",
        ));
    }
    Ok(())
}

/// `(∫ |f|^p w dx)^{1/p}` over the grid box; `w ≡ 1` when omitted.
pub fn lp_norm(f: &SampledFunction, p: f64, weight: Option<&SampledFunction>) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(FraclabError::invalid(format!(
            "norm exponent must be positive, got {p}"
        )));
    }
    if let Some(w) = weight {
        check_weight(f, w)?;
    }
    let vol = f.domain().cell_volume();
    let mut acc = 0.0;
    for (i, v) in f.values().iter().enumerate() {
        let w = weight.map_or(1.0, |w| w.values()[i]);
        acc += v.abs().powf(p) * w;
    }
    Ok((acc * vol).powf(1.0 / p))
}

/// Weak norm `sup_λ λ · w({|f| > λ})^{1/p}`. The supremum over λ > 0 is
/// attained just below a sampled value of `|f|`, so the sweep visits each
/// distinct sample shifted down by one ulp-scale factor.
pub fn weak_lp_norm(f: &SampledFunction, p: f64, weight: Option<&SampledFunction>) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(FraclabError::invalid(format!(
            "norm exponent must be positive, got {p}"
        )));
    }
    if let Some(w) = weight {
        check_weight(f, w)?;
    }
    let vol = f.domain().cell_volume();
    let mut pairs: Vec<(f64, f64)> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.abs(), weight.map_or(1.0, |w| w.values()[i]) * vol))
        .collect();
    // Descending by value; index order is irrelevant because the measure is
    // accumulated in this sorted order either way.
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut exceedance = 0.0;
    let mut best = 0.0f64;
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        if v <= 0.0 {
            break;
        }
        // Include the whole tie block: λ just below v captures all of it.
        while i < pairs.len() && pairs[i].0 == v {
            exceedance += pairs[i].1;
            i += 1;
        }
        let lambda = v * (1.0 - 1e-15);
        best = best.max(lambda * exceedance.powf(1.0 / p));
    }
    Ok(best)
}

/// Mean oscillation `(1/|Q ∩ box|) ∫_{Q ∩ box} |f - f_Q|` of raw samples.
pub fn mean_oscillation(f: &SampledFunction, cube: &Cube) -> f64 {
    let domain = f.domain();
    let vol = domain.cell_volume();
    let weight = clipped_weight(domain, cube);
    if weight <= 0.0 {
        return 0.0;
    }
    let measure = weight * vol;
    let table = CellTable::for_function(f);
    let mean = table.integral_over(cube) / measure;
    let mut acc = 0.0;
    for_cells_in(domain, cube, |idx, w| {
        acc += (f.values()[idx] - mean).abs() * w;
    });
    acc * vol / measure
}

/// Average of `f` over the clipped cube.
pub fn cube_average(f: &SampledFunction, cube: &Cube) -> f64 {
    CellTable::for_function(f).average_over(cube)
}

/// BMO norm: the largest mean oscillation over family cubes with at least
/// [`MIN_CUBE_NODES`] nodes.
pub fn bmo_norm(b: &SampledFunction, family: &CubeFamily) -> Result<f64> {
    if family.domain() != b.domain() {
        return Err(FraclabError::GridMismatch(
            "cube family grid differs from the symbol grid".into(),
        ));
    }
    let eligible = family.indices_with_min_nodes(MIN_CUBE_NODES);
    let table = CellTable::for_function(b);
    let vol = b.domain().cell_volume();
    let oscs = exec::map_indexed(eligible.len(), |j| {
        let cube = &family.cubes()[eligible[j]];
        let weight = clipped_weight(b.domain(), cube);
        let measure = weight * vol;
        let mean = table.integral_over(cube) / measure;
        let mut acc = 0.0;
        for_cells_in(b.domain(), cube, |idx, w| {
            acc += (b.values()[idx] - mean).abs() * w;
        });
        acc * vol / measure
    });
    Ok(oscs.into_iter().fold(0.0f64, f64::max))
}

/// Muckenhoupt constant
/// `A_p(w) = sup_Q (avg_Q w) (avg_Q w^{-1/(p-1)})^{p-1}` over the family.
pub fn ap_constant(w: &SampledFunction, p: f64, family: &CubeFamily) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(FraclabError::invalid(format!(
            "weight class exponent must exceed 1, got {p}"
        )));
    }
    if w.values().iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(FraclabError::invalid(
            "weight class constants need strictly positive weights at every node",
        ));
    }
    if family.domain() != w.domain() {
        return Err(FraclabError::GridMismatch(
            "cube family grid differs from the weight grid".into(),
        ));
    }
    let eligible = family.indices_with_min_nodes(MIN_CUBE_NODES);
    let table_w = CellTable::for_function(w);
    let dual = SampledFunction::from_values(
        *w.domain(),
        w.values()
            .iter()
            .map(|v| v.powf(-1.0 / (p - 1.0)))
            .collect(),
    )?;
    let table_d = CellTable::for_function(&dual);
    let vals = exec::map_indexed(eligible.len(), |j| {
        let cube = &family.cubes()[eligible[j]];
        let (iw, meas) = table_w.integral_and_measure(cube);
        let id = table_d.integral_over(cube);
        (iw / meas) * (id / meas).powf(p - 1.0)
    });
    Ok(vals.into_iter().fold(0.0f64, f64::max))
}

/// An m-tuple of strictly positive sampled weights on one grid.
#[derive(Debug, Clone)]
pub struct WeightVector {
    weights: Vec<SampledFunction>,
}

impl WeightVector {
    pub fn new(weights: Vec<SampledFunction>) -> Result<WeightVector> {
        if weights.is_empty() || weights.len() > 3 {
            return Err(FraclabError::invalid(format!(
                "weight vector expects 1..=3 weights, got {}",
                weights.len()
            )));
        }
        let domain = *weights[0].domain();
        for (j, w) in weights.iter().enumerate() {
            if *w.domain() != domain {
                return Err(FraclabError::GridMismatch(format!(
                    "weight {j} is sampled on a different grid"
                )));
            }
            if w.values().iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(FraclabError::invalid(format!(
                    "weight {j} must be strictly positive and finite at every node"
                )));
            }
        }
        Ok(WeightVector { weights })
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    pub fn domain(&self) -> &GridDomain {
        self.weights[0].domain()
    }

    pub fn weight(&self, j: usize) -> &SampledFunction {
        &self.weights[j]
    }

    /// `ω_j^e`, sampled.
    pub fn powered(&self, j: usize, e: f64) -> SampledFunction {
        pow_samples(&self.weights[j], e)
    }

    /// The product weight `v_ω = Π_j ω_j`, recomputed on demand.
    pub fn product_weight(&self) -> SampledFunction {
        let domain = *self.domain();
        let values = exec::map_indexed(domain.node_count(), |i| {
            self.weights.iter().map(|w| w.values()[i]).product()
        });
        SampledFunction::from_values(domain, values).expect("product of aligned samples")
    }
}

/// `|f|^e`, sampled on the same grid (closed form dropped).
pub fn pow_samples(f: &SampledFunction, e: f64) -> SampledFunction {
    SampledFunction::from_values(*f.domain(), f.powered_abs(e)).expect("same grid")
}

/// Constant exponent tuple `(p_1, .., p_m)` with its harmonic mean `p` and
/// fractional-integral target `q` given by `1/q = 1/p - α/n > 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentVector {
    p: Vec<f64>,
    alpha: f64,
    n: usize,
}

impl ExponentVector {
    pub fn new(p: &[f64], alpha: f64, n: usize) -> Result<ExponentVector> {
        if p.is_empty() || p.len() > 3 {
            return Err(FraclabError::invalid(format!(
                "exponent vector expects 1..=3 exponents, got {}",
                p.len()
            )));
        }
        if n != 1 && n != 2 {
            return Err(FraclabError::invalid(format!(
                "exponent vector dimension must be 1 or 2, got {n}"
            )));
        }
        for (j, pj) in p.iter().enumerate() {
            if !(*pj >= 1.0) || !pj.is_finite() {
                return Err(FraclabError::invalid(format!(
                    "exponent p[{j}] must lie in [1, ∞), got {pj}"
                )));
            }
        }
        if !(alpha >= 0.0) {
            return Err(FraclabError::invalid(format!(
                "order alpha must be nonnegative, got {alpha}"
            )));
        }
        let v = ExponentVector {
            p: p.to_vec(),
            alpha,
            n,
        };
        if !(v.q_inverse() > 0.0) {
            return Err(FraclabError::invalid(format!(
                "target exponent needs 1/p - alpha/n > 0, got {}",
                v.q_inverse()
            )));
        }
        Ok(v)
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Harmonic mean: `1/p = Σ_j 1/p_j`.
    pub fn p(&self) -> f64 {
        1.0 / self.p.iter().map(|pj| 1.0 / pj).sum::<f64>()
    }

    fn q_inverse(&self) -> f64 {
        1.0 / self.p() - self.alpha / self.n as f64
    }

    /// Target exponent: `1/q = 1/p - α/n`.
    pub fn q(&self) -> f64 {
        1.0 / self.q_inverse()
    }

    /// The tuple with every entry divided by `d` and the target rescaled
    /// accordingly (the `P/p_0'` rescaling of the weighted theorems).
    pub fn scaled_down(&self, d: f64) -> Result<ExponentVector> {
        let p: Vec<f64> = self.p.iter().map(|pj| pj / d).collect();
        ExponentVector::new(&p, self.alpha * d, self.n)
    }
}

/// Multilinear Muckenhoupt constant of `Def`-type classes:
/// `sup_Q (avg_Q v_ω^q)^{1/q} Π_j (avg_Q ω_j^{-p_j'})^{1/p_j'}`, where a
/// slot with `p_j = 1` contributes `(inf_Q ω_j)^{-1}`.
pub fn apq_constant(
    weights: &WeightVector,
    exponents: &ExponentVector,
    q: f64,
    family: &CubeFamily,
) -> Result<f64> {
    if weights.m() != exponents.m() {
        return Err(FraclabError::invalid(format!(
            "weight vector arity {} does not match exponent arity {}",
            weights.m(),
            exponents.m()
        )));
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(FraclabError::invalid(format!(
            "target exponent q must be positive, got {q}"
        )));
    }
    if family.domain() != weights.domain() {
        return Err(FraclabError::GridMismatch(
            "cube family grid differs from the weight grid".into(),
        ));
    }
    let domain = *weights.domain();
    let eligible = family.indices_with_min_nodes(MIN_CUBE_NODES);
    let vq = pow_samples(&weights.product_weight(), q);
    let table_vq = CellTable::for_function(&vq);
    // Per-slot tables for avg ω_j^{-p_j'}; min-slots keep raw samples.
    let mut slot_tables: Vec<Option<(CellTable, f64)>> = Vec::new();
    for (j, pj) in exponents.exponents().iter().enumerate() {
        if *pj > 1.0 {
            let pjp = pj / (pj - 1.0);
            let powered = weights.powered(j, -pjp);
            slot_tables.push(Some((CellTable::for_function(&powered), pjp)));
        } else {
            slot_tables.push(None);
        }
    }
    let vals = exec::map_indexed(eligible.len(), |c| {
        let cube = &family.cubes()[eligible[c]];
        let (ivq, meas) = table_vq.integral_and_measure(cube);
        let mut value = (ivq / meas).powf(1.0 / q);
        for (j, slot) in slot_tables.iter().enumerate() {
            match slot {
                Some((table, pjp)) => {
                    value *= (table.integral_over(cube) / meas).powf(1.0 / pjp);
                }
                None => {
                    let mut minimum = f64::INFINITY;
                    for_cells_in(&domain, cube, |idx, w| {
                        if w > 0.0 {
                            minimum = minimum.min(weights.weight(j).values()[idx]);
                        }
                    });
                    value /= minimum;
                }
            }
        }
        value
    });
    Ok(vals.into_iter().fold(0.0f64, f64::max))
}

/// Closed forms for variable exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExponentForm {
    /// `q(x) = p`
    Constant { p: f64 },
    /// `q(x) = p_inf + a_c / ln(e + |x|)`
    Asymptotic { p_inf: f64, a_c: f64 },
    /// Smooth ramp from `p1` (inside radius `r0`) to `p2` (outside
    /// `r0 + w`) in `|x|`.
    Smoothstep { p1: f64, p2: f64, r0: f64, w: f64 },
    /// Externally supplied samples; no limit metadata.
    Custom,
}

/// A variable exponent sampled on a grid, with its closed form (when one
/// exists), range `[q_-, q_+]`, and declared limit `q_∞`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentFunction {
    form: ExponentForm,
    domain: GridDomain,
    values: Vec<f64>,
    q_minus: f64,
    q_plus: f64,
    q_inf: Option<f64>,
}

impl ExponentFunction {
    fn finish(
        form: ExponentForm,
        domain: GridDomain,
        values: Vec<f64>,
        q_inf: Option<f64>,
    ) -> Result<ExponentFunction> {
        let q_minus = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let q_plus = values.iter().cloned().fold(0.0f64, f64::max);
        if !(q_minus > 1.0) || !q_plus.is_finite() {
            return Err(FraclabError::invalid(format!(
                "variable exponent must satisfy 1 < q_- <= q_+ < ∞, got range [{q_minus}, {q_plus}]"
            )));
        }
        Ok(ExponentFunction {
            form,
            domain,
            values,
            q_minus,
            q_plus,
            q_inf,
        })
    }

    pub fn constant(p: f64, domain: GridDomain) -> Result<ExponentFunction> {
        let values = vec![p; domain.node_count()];
        Self::finish(ExponentForm::Constant { p }, domain, values, Some(p))
    }

    pub fn asymptotic(p_inf: f64, a_c: f64, domain: GridDomain) -> Result<ExponentFunction> {
        let n = domain.dim();
        let values = exec::map_indexed(domain.node_count(), |i| {
            let x = domain.node(i);
            p_inf + a_c / (std::f64::consts::E + crate::grid::norm_n(x, n)).ln()
        });
        Self::finish(
            ExponentForm::Asymptotic { p_inf, a_c },
            domain,
            values,
            Some(p_inf),
        )
    }

    pub fn smoothstep(
        p1: f64,
        p2: f64,
        r0: f64,
        w: f64,
        domain: GridDomain,
    ) -> Result<ExponentFunction> {
        if !(w > 0.0) || !(r0 >= 0.0) {
            return Err(FraclabError::invalid(
                "smoothstep exponent needs ramp width w > 0 and radius r0 >= 0",
            ));
        }
        let n = domain.dim();
        let values = exec::map_indexed(domain.node_count(), |i| {
            let x = domain.node(i);
            let t = ((crate::grid::norm_n(x, n) - r0) / w).clamp(0.0, 1.0);
            let s = t * t * (3.0 - 2.0 * t);
            p1 + (p2 - p1) * s
        });
        Self::finish(
            ExponentForm::Smoothstep { p1, p2, r0, w },
            domain,
            values,
            Some(p2),
        )
    }

    /// Exponent given by explicit samples (piecewise test exponents, derived
    /// pointwise combinations). Carries no `q_∞` metadata unless supplied.
    pub fn custom(
        values: Vec<f64>,
        domain: GridDomain,
        q_inf: Option<f64>,
    ) -> Result<ExponentFunction> {
        if values.len() != domain.node_count() {
            return Err(FraclabError::GridMismatch(format!(
                "exponent samples ({}) do not match the grid ({} nodes)",
                values.len(),
                domain.node_count()
            )));
        }
        Self::finish(ExponentForm::Custom, domain, values, q_inf)
    }

    pub fn form(&self) -> ExponentForm {
        self.form
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn q_minus(&self) -> f64 {
        self.q_minus
    }

    pub fn q_plus(&self) -> f64 {
        self.q_plus
    }

    pub fn q_inf(&self) -> Option<f64> {
        self.q_inf
    }

    /// Pointwise conjugate `q'(x) = q(x)/(q(x)-1)`.
    pub fn conjugate(&self) -> Result<ExponentFunction> {
        let values: Vec<f64> = self.values.iter().map(|q| q / (q - 1.0)).collect();
        Self::finish(
            ExponentForm::Custom,
            self.domain,
            values,
            self.q_inf.map(|q| q / (q - 1.0)),
        )
    }

    /// Divides the exponent pointwise by `d > 0`.
    pub fn scaled_down(&self, d: f64) -> Result<ExponentFunction> {
        if !(d > 0.0) {
            return Err(FraclabError::invalid(format!(
                "exponent divisor must be positive, got {d}"
            )));
        }
        let values: Vec<f64> = self.values.iter().map(|q| q / d).collect();
        Self::finish(
            ExponentForm::Custom,
            self.domain,
            values,
            self.q_inf.map(|q| q / d),
        )
    }

    /// Pointwise harmonic combination `1/q = Σ_j 1/q_j`.
    pub fn harmonic_combination(parts: &[&ExponentFunction]) -> Result<ExponentFunction> {
        let first = parts.first().ok_or_else(|| {
            FraclabError::invalid("harmonic combination needs at least one exponent")
        })?;
        let domain = first.domain;
        for p in parts {
            if p.domain != domain {
                return Err(FraclabError::GridMismatch(
                    "exponents must share one grid to combine".into(),
                ));
            }
        }
        let values: Vec<f64> = (0..domain.node_count())
            .map(|i| 1.0 / parts.iter().map(|p| 1.0 / p.values[i]).sum::<f64>())
            .collect();
        let q_inf = parts
            .iter()
            .try_fold(0.0f64, |acc, p| p.q_inf.map(|q| acc + 1.0 / q));
        Self::finish(ExponentForm::Custom, domain, values, q_inf.map(|s| 1.0 / s))
    }

    /// The fractional-integral target `1/q(x) = 1/p(x) - α/n`, requiring
    /// `p_+ < n/α` so the result stays positive and finite.
    pub fn fractional_shift(&self, alpha: f64, n: usize) -> Result<ExponentFunction> {
        if !(alpha > 0.0) || !(self.q_plus < n as f64 / alpha) {
            return Err(FraclabError::invalid(format!(
                "fractional target needs 0 < alpha and p_+ < n/alpha, got p_+ = {} and alpha = {alpha}",
                self.q_plus
            )));
        }
        let an = alpha / n as f64;
        let values: Vec<f64> = self.values.iter().map(|p| 1.0 / (1.0 / p - an)).collect();
        let q_inf = self.q_inf.map(|p| 1.0 / (1.0 / p - an));
        Self::finish(ExponentForm::Custom, self.domain, values, q_inf)
    }
}

/// Modular `F_q(f) = ∫ |f(x)|^{q(x)} dx`.
pub fn modular(f: &SampledFunction, q: &ExponentFunction) -> Result<f64> {
    if f.domain() != q.domain() {
        return Err(FraclabError::GridMismatch(
            "exponent grid differs from the function grid".into(),
        ));
    }
    let vol = f.domain().cell_volume();
    let mut acc = 0.0;
    for (v, qx) in f.values().iter().zip(q.values()) {
        acc += v.abs().powf(*qx);
    }
    Ok(acc * vol)
}

/// Luxemburg norm `inf { η > 0 : F_q(f/η) ≤ 1 }`, by bracketing and
/// bisection on the strictly decreasing map `η ↦ F_q(f/η)`.
pub fn luxemburg_norm(f: &SampledFunction, q: &ExponentFunction) -> Result<f64> {
    if f.domain() != q.domain() {
        return Err(FraclabError::GridMismatch(
            "exponent grid differs from the function grid".into(),
        ));
    }
    if f.values().iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let vol = f.domain().cell_volume();
    let modular_at = |eta: f64| -> f64 {
        let mut acc = 0.0;
        for (v, qx) in f.values().iter().zip(q.values()) {
            acc += (v.abs() / eta).powf(*qx);
        }
        acc * vol
    };
    let mut eta = lp_norm(f, q.q_plus(), None)?;
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(FraclabError::invalid(
            "luxemburg bracket seed is degenerate",
        ));
    }
    let (mut lo, mut hi);
    if modular_at(eta) <= 1.0 {
        hi = eta;
        lo = eta;
        for _ in 0..200 {
            lo /= 2.0;
            if modular_at(lo) > 1.0 {
                break;
            }
            hi = lo;
        }
        if modular_at(lo) <= 1.0 {
            // Modular stays below 1 down to an η smaller than any sample
            // scale: the norm is 0 only for f ≡ 0, handled above.
            return Ok(0.0);
        }
    } else {
        lo = eta;
        for _ in 0..200 {
            eta *= 2.0;
            if modular_at(eta) <= 1.0 {
                break;
            }
            lo = eta;
        }
        if modular_at(eta) > 1.0 {
            return Err(FraclabError::invalid(
                "luxemburg modular does not drop below 1",
            ));
        }
        hi = eta;
    }
    while (hi - lo) / hi > 1e-10 {
        let mid = 0.5 * (hi + lo);
        if modular_at(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (hi + lo))
}

/// Log-Hölder constants of a closed-form exponent:
/// local `sup_{0<|x-y|<=1/2} |q(x)-q(y)| ln(1/|x-y|)` and decay
/// `sup_x |q(x)-q_∞| ln(e+|x|)`, both over grid nodes.
pub fn log_holder_constants(q: &ExponentFunction) -> Result<(f64, f64)> {
    let q_inf = q.q_inf().ok_or_else(|| {
        FraclabError::invalid("log-Hölder constants need an exponent with declared q_∞")
    })?;
    let domain = q.domain();
    let n = domain.dim();
    let count = domain.node_count();
    let locals = exec::map_indexed(count, |i| {
        let xi = domain.node(i);
        let qi = q.values()[i];
        let mut best = 0.0f64;
        for j in (i + 1)..count {
            let d = crate::grid::dist_n(xi, domain.node(j), n);
            if d > 0.5 || d <= 0.0 {
                continue;
            }
            let v = (qi - q.values()[j]).abs() * (1.0 / d).ln();
            if v > best {
                best = v;
            }
        }
        best
    });
    let c_local = locals.into_iter().fold(0.0f64, f64::max);
    let decays = exec::map_indexed(count, |i| {
        let x = domain.node(i);
        (q.values()[i] - q_inf).abs() * (std::f64::consts::E + crate::grid::norm_n(x, n)).ln()
    });
    let c_inf = decays.into_iter().fold(0.0f64, f64::max);
    Ok((c_local, c_inf))
}

/// `L^p` norm restricted to a clipped cube.
pub fn lp_norm_on_cube(f: &SampledFunction, p: f64, cube: &Cube) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(FraclabError::invalid(format!(
            "norm exponent must be positive, got {p}"
        )));
    }
    let vol = f.domain().cell_volume();
    let mut acc = 0.0;
    for_cells_in(f.domain(), cube, |idx, w| {
        acc += f.values()[idx].abs().powf(p) * w;
    });
    Ok((acc * vol).powf(1.0 / p))
}

/// Weak `L^{p,∞}` norm restricted to a clipped cube.
pub fn weak_lp_norm_on_cube(f: &SampledFunction, p: f64, cube: &Cube) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(FraclabError::invalid(format!(
            "norm exponent must be positive, got {p}"
        )));
    }
    let vol = f.domain().cell_volume();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for_cells_in(f.domain(), cube, |idx, w| {
        if w > 0.0 {
            pairs.push((f.values()[idx].abs(), w * vol));
        }
    });
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut exceedance = 0.0;
    let mut best = 0.0f64;
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        if v <= 0.0 {
            break;
        }
        while i < pairs.len() && pairs[i].0 == v {
            exceedance += pairs[i].1;
            i += 1;
        }
        best = best.max(v * (1.0 - 1e-15) * exceedance.powf(1.0 / p));
    }
    Ok(best)
}

/// Kolmogorov comparison on one cube: returns
/// `(|Q|^{-1/p} ||f||_{L^p(Q)}, |Q|^{-1/u} ||f||_{L^{u,∞}(Q)})`.
pub fn kolmogorov_sides(f: &SampledFunction, p: f64, u: f64, cube: &Cube) -> Result<(f64, f64)> {
    if !(p > 0.0 && p < u) {
        return Err(FraclabError::invalid(format!(
            "kolmogorov comparison needs 0 < p < u, got p = {p}, u = {u}"
        )));
    }
    let measure = clipped_weight(f.domain(), cube) * f.domain().cell_volume();
    if measure <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let lhs = measure.powf(-1.0 / p) * lp_norm_on_cube(f, p, cube)?;
    let rhs = measure.powf(-1.0 / u) * weak_lp_norm_on_cube(f, u, cube)?;
    Ok((lhs, rhs))
}

/// The sharp Kolmogorov constant `(u/(u-p))^{1/p}`.
pub fn kolmogorov_constant(p: f64, u: f64) -> f64 {
    (u / (u - p)).powf(1.0 / p)
}
