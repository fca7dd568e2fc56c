//! Fractional integral operators on sampled functions.
//!
//! The central operation integrates a kernel against an m-tuple of sampled
//! inputs: `T(f_1, .., f_m)(x) = int K(x, y_1, .., y_m) prod_j f_j(y_j) dy`.
//! The integral is an `m*n`-dimensional midpoint sum over the cells of the
//! shared input grid, evaluated at every node of a caller-chosen output
//! grid. Output nodes must not coincide with input nodes (the kernel is
//! singular on the full diagonal); [`crate::grid::GridDomain::offset_half_cell`]
//! produces a safely interleaved grid when input and output boxes agree.
//!
//! Cost is `O(nodes_out * cells_in^m)` with no fast transform, which is why
//! construction refuses `m * n > 3` and anything past a fixed evaluation
//! budget.

use serde::{Deserialize, Serialize};

use crate::error::FraclabError;
use crate::exec;
use crate::grid::{GridDomain, Point, SampledFunction};
use crate::kernels::KernelSpec;
use crate::Result;

/// Evaluation budget for one operator application (kernel evaluations).
const MAX_EVALS: f64 = 8.6e9;

/// Auxiliary exponents for sharp-maximal-function inequalities, validated
/// against the admissible windows determined by the kernel.
///
/// `s` is the harmonic mean exponent `1/s = sum_j 1/s_j` of per-slot
/// exponents `1 <= s_j <= p0'` (all equal to `p0'` by default); the sharp
/// maximal comparison requires `0 < delta < min(1, s n / (n - s alpha))`,
/// and the commutator form additionally `delta < epsilon` and `t > p0'`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OperatorParams {
    kernel: KernelSpec,
    delta: f64,
    epsilon: f64,
    t: f64,
    s_vec: [f64; 3],
}

impl OperatorParams {
    pub fn new(kernel: KernelSpec, delta: f64, epsilon: f64, t: f64) -> Result<OperatorParams> {
        let p0p = kernel.p0_prime();
        let s_vec = [p0p; 3];
        Self::with_slot_exponents(kernel, delta, epsilon, t, &s_vec[..kernel.m()])
    }

    pub fn with_slot_exponents(
        kernel: KernelSpec,
        delta: f64,
        epsilon: f64,
        t: f64,
        s_slots: &[f64],
    ) -> Result<OperatorParams> {
        if s_slots.len() != kernel.m() {
            return Err(FraclabError::invalid(format!(
                "params.s expects {} slot exponents, got {}",
                kernel.m(),
                s_slots.len()
            )));
        }
        let p0p = kernel.p0_prime();
        let mut s_vec = [p0p; 3];
        for (i, s) in s_slots.iter().enumerate() {
            if !(*s >= 1.0 && *s <= p0p) {
                return Err(FraclabError::invalid(format!(
                    "params.s[{i}] must lie in [1, p0'] = [1, {p0p}], got {s}"
                )));
            }
            s_vec[i] = *s;
        }
        let params = OperatorParams {
            kernel,
            delta,
            epsilon,
            t,
            s_vec,
        };
        let s = params.s();
        let n = kernel.n() as f64;
        if s * kernel.alpha() >= n {
            return Err(FraclabError::invalid(format!(
                "params.s: needs s * alpha < n, got {} >= {n}",
                s * kernel.alpha()
            )));
        }
        let cap = (s * n / (n - s * kernel.alpha())).min(1.0);
        if !(delta > 0.0 && delta < cap) {
            return Err(FraclabError::invalid(format!(
                "params.delta must lie in (0, {cap}), got {delta}"
            )));
        }
        if !(epsilon > delta) || !epsilon.is_finite() {
            return Err(FraclabError::invalid(format!(
                "params.epsilon must exceed delta = {delta}, got {epsilon}"
            )));
        }
        if !(t > p0p) || !t.is_finite() {
            return Err(FraclabError::invalid(format!(
                "params.t must exceed p0' = {p0p}, got {t}"
            )));
        }
        Ok(params)
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn slot_exponents(&self) -> &[f64] {
        &self.s_vec[..self.kernel.m()]
    }

    /// Harmonic-mean exponent `1/s = sum_j 1/s_j`.
    pub fn s(&self) -> f64 {
        let inv: f64 = self.slot_exponents().iter().map(|s| 1.0 / s).sum();
        1.0 / inv
    }
}

fn common_domain(fs: &[SampledFunction]) -> Result<GridDomain> {
    let first = *fs[0].domain();
    for f in &fs[1..] {
        if *f.domain() != first {
            return Err(FraclabError::GridMismatch(
                "operator inputs must share one grid".into(),
            ));
        }
    }
    Ok(first)
}

/// Applies the m-linear fractional integral of `spec` to `fs`, sampling the
/// result on `out`.
pub fn apply_fractional_integral(
    spec: &KernelSpec,
    fs: &[SampledFunction],
    out: &GridDomain,
) -> Result<SampledFunction> {
    let m = spec.m();
    let n = spec.n();
    if fs.len() != m {
        return Err(FraclabError::invalid(format!(
            "operator expects {m} input functions, got {}",
            fs.len()
        )));
    }
    let domain = common_domain(fs)?;
    if domain.dim() != n || out.dim() != n {
        return Err(FraclabError::GridMismatch(format!(
            "kernel dimension {n} does not match grids ({} in, {} out)",
            domain.dim(),
            out.dim()
        )));
    }
    if domain.nodes_collide(out) {
        return Err(FraclabError::invalid(
            "output nodes coincide with input nodes; offset the output grid by half a cell",
        ));
    }
    let cells = domain.node_count() as f64;
    if (out.node_count() as f64) * cells.powi(m as i32) > MAX_EVALS {
        return Err(FraclabError::CostBound(format!(
            "operator application needs {:.2e} kernel evaluations (cap {MAX_EVALS:.1e}); coarsen a grid",
            (out.node_count() as f64) * cells.powi(m as i32)
        )));
    }

    // Per-slot sparse supports: quadrature cells with a nonzero sample.
    let supports: Vec<Vec<(Point, f64)>> = fs
        .iter()
        .map(|f| {
            (0..domain.node_count())
                .filter_map(|i| {
                    let v = f.values()[i];
                    (v != 0.0).then(|| (domain.node(i), v))
                })
                .collect()
        })
        .collect();
    let cell_vol = domain.cell_volume().powi(m as i32);

    let values = exec::map_indexed(out.node_count(), |idx| -> Result<f64> {
        let x = out.node(idx);
        let mut acc = 0.0;
        match m {
            1 => {
                for &(y0, v0) in &supports[0] {
                    acc += v0 * spec.eval(x, &[y0])?;
                }
            }
            2 => {
                for &(y0, v0) in &supports[0] {
                    for &(y1, v1) in &supports[1] {
                        acc += v0 * v1 * spec.eval(x, &[y0, y1])?;
                    }
                }
            }
            _ => {
                for &(y0, v0) in &supports[0] {
                    for &(y1, v1) in &supports[1] {
                        let v01 = v0 * v1;
                        for &(y2, v2) in &supports[2] {
                            acc += v01 * v2 * spec.eval(x, &[y0, y1, y2])?;
                        }
                    }
                }
            }
        }
        Ok(acc * cell_vol)
    });
    let mut out_values = Vec::with_capacity(values.len());
    for v in values {
        out_values.push(v?);
    }
    SampledFunction::from_values(*out, out_values)
}

/// Riesz potential `I_a f(x) = gamma_n(a)^-1 int f(y) |x-y|^{a-n} dy`.
pub fn apply_riesz_potential(
    alpha: f64,
    f: &SampledFunction,
    out: &GridDomain,
) -> Result<SampledFunction> {
    let spec = KernelSpec::riesz(f.domain().dim(), alpha)?;
    apply_fractional_integral(&spec, std::slice::from_ref(f), out)
}

/// The m-linear commutator with symbol tuple `b`:
/// `sum_i [ b_i(x) T(f)(x) - T(f_1, .., b_i f_i, .., f_m)(x) ]`.
///
/// Each symbol must carry a closed form so it can be evaluated at output
/// nodes that are not input nodes.
pub fn apply_commutator(
    spec: &KernelSpec,
    b: &[SampledFunction],
    fs: &[SampledFunction],
    out: &GridDomain,
) -> Result<SampledFunction> {
    let m = spec.m();
    if b.len() != m {
        return Err(FraclabError::invalid(format!(
            "commutator expects {m} symbols, got {}",
            b.len()
        )));
    }
    let domain = common_domain(fs)?;
    for (i, bi) in b.iter().enumerate() {
        if *bi.domain() != domain {
            return Err(FraclabError::GridMismatch(format!(
                "symbol {i} is sampled on a different grid than the inputs"
            )));
        }
        if bi.expr().is_none() {
            return Err(FraclabError::invalid(format!(
                "symbol {i} lacks a closed form; commutators need symbols evaluable at output nodes"
            )));
        }
    }
    let t_all = apply_fractional_integral(spec, fs, out)?;
    let n = out.dim();
    let mut acc = vec![0.0; out.node_count()];
    for (i, bi) in b.iter().enumerate() {
        let expr = bi.expr().unwrap();
        let mut modified = fs.to_vec();
        let product: Vec<f64> = bi
            .values()
            .iter()
            .zip(fs[i].values())
            .map(|(bv, fv)| bv * fv)
            .collect();
        modified[i] = SampledFunction::from_values(domain, product)?;
        let t_i = apply_fractional_integral(spec, &modified, out)?;
        for (idx, slot) in acc.iter_mut().enumerate() {
            let bx = expr.eval(out.node(idx), n);
            *slot += bx * t_all.values()[idx] - t_i.values()[idx];
        }
    }
    SampledFunction::from_values(*out, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusExpr;
    use crate::kernels::{riesz_gamma, KernelKind};
    use approx::assert_abs_diff_eq;

    fn standard_2_1() -> KernelSpec {
        KernelSpec::new(KernelKind::Standard, 2, 1, 0.5, 1.0, 2.0).unwrap()
    }

    fn indicator01(domain: &GridDomain) -> SampledFunction {
        let e = CorpusExpr::from_catalog("indicator", &[0.0, 1.0], 1).unwrap();
        SampledFunction::from_expr(e, *domain)
    }

    #[test]
    fn params_validation_windows() {
        let spec = standard_2_1();
        // s = p0'/m = 1, cap = min(1, 1/(1-0.5)) = 1.
        assert!(OperatorParams::new(spec, 0.5, 0.8, 3.0).is_ok());
        assert!(OperatorParams::new(spec, 1.0, 1.5, 3.0).is_err());
        assert!(OperatorParams::new(spec, 0.5, 0.5, 3.0).is_err());
        assert!(OperatorParams::new(spec, 0.5, 0.8, 2.0).is_err());
        assert!(OperatorParams::with_slot_exponents(spec, 0.5, 0.8, 3.0, &[1.0, 3.0]).is_err());
        let p = OperatorParams::new(spec, 0.5, 0.8, 3.0).unwrap();
        assert_abs_diff_eq!(p.s(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_inputs_give_zero_output() {
        let spec = standard_2_1();
        let domain = GridDomain::new(1, &[-1.0], 2.0, 16).unwrap();
        let z = SampledFunction::zeros(domain);
        let out = domain.offset_half_cell();
        let t = apply_fractional_integral(&spec, &[z.clone(), z], &out).unwrap();
        assert!(t.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn colliding_grids_are_refused() {
        let spec = standard_2_1();
        let domain = GridDomain::new(1, &[-1.0], 2.0, 16).unwrap();
        let f = indicator01(&domain);
        let err = apply_fractional_integral(&spec, &[f.clone(), f], &domain).unwrap_err();
        assert!(matches!(err, FraclabError::InvalidConfig(_)));
    }

    #[test]
    fn bilinear_value_matches_fine_brute_force() {
        // T(chi, chi)(2) = int_0^1 int_0^1 (|2-y1| + |2-y2|)^{-3/2} dy.
        let spec = standard_2_1();
        let domain = GridDomain::new(1, &[-1.0], 2.0, 32).unwrap();
        let f = indicator01(&domain);
        // Output grid with a node exactly at x = 2.
        let out = GridDomain::new(1, &[0.25], 4.0, 8).unwrap();
        let x = out.node(3)[0];
        assert_abs_diff_eq!(x, 2.0, epsilon = 0.0);
        let t = apply_fractional_integral(&spec, &[f.clone(), f], &out).unwrap();

        let fine = 128usize;
        let hf = 1.0 / fine as f64;
        let mut brute = 0.0;
        for i in 0..fine {
            let y1 = (i as f64 + 0.5) * hf;
            for j in 0..fine {
                let y2 = (j as f64 + 0.5) * hf;
                brute += ((2.0 - y1).abs() + (2.0 - y2).abs()).powf(-1.5) * hf * hf;
            }
        }
        assert!(
            (t.values()[3] - brute).abs() / brute < 0.02,
            "quadrature {} vs brute force {brute}",
            t.values()[3]
        );
    }

    #[test]
    fn even_inputs_give_even_output() {
        let spec = standard_2_1();
        let domain = GridDomain::new(1, &[-2.0], 4.0, 32).unwrap();
        let g = CorpusExpr::from_catalog("gaussian", &[0.0, 0.5], 1).unwrap();
        let f = SampledFunction::from_expr(g, domain);
        let out = GridDomain::new(1, &[-2.0], 4.0, 16).unwrap();
        let t = apply_fractional_integral(&spec, &[f.clone(), f], &out).unwrap();
        for i in 0..out.node_count() {
            let j = out.node_count() - 1 - i;
            assert_abs_diff_eq!(t.values()[i], t.values()[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn operator_is_multilinear() {
        let spec = standard_2_1();
        let domain = GridDomain::new(1, &[-1.0], 2.0, 16).unwrap();
        let f = indicator01(&domain);
        let g = SampledFunction::from_expr(
            CorpusExpr::from_catalog("gaussian", &[0.2, 0.4], 1).unwrap(),
            domain,
        );
        let out = domain.offset_half_cell();
        let a = 2.5;
        let combo = SampledFunction::from_values(
            domain,
            f.values()
                .iter()
                .zip(g.values())
                .map(|(x, y)| a * x + y)
                .collect(),
        )
        .unwrap();
        let lhs = apply_fractional_integral(&spec, &[combo, f.clone()], &out).unwrap();
        let t_f = apply_fractional_integral(&spec, &[f.clone(), f.clone()], &out).unwrap();
        let t_g = apply_fractional_integral(&spec, &[g, f], &out).unwrap();
        for i in 0..out.node_count() {
            assert_abs_diff_eq!(
                lhs.values()[i],
                a * t_f.values()[i] + t_g.values()[i],
                epsilon = 1e-12 * (1.0 + lhs.values()[i].abs())
            );
        }
    }

    #[test]
    fn riesz_potential_matches_antiderivative() {
        // I_{1/2} chi_{[0,1]} (-1) = (2^{1/2} * 2 - 2) / gamma_1(1/2):
        // the inner integral has antiderivative 2 sqrt(1 + y).
        let domain = GridDomain::new(1, &[-1.0], 2.0, 512).unwrap();
        let f = indicator01(&domain);
        let out = GridDomain::new(1, &[-3.25], 4.0, 8).unwrap();
        let x = out.node(4)[0];
        assert_abs_diff_eq!(x, -1.0, epsilon = 0.0);
        let t = apply_riesz_potential(0.5, &f, &out).unwrap();
        let expected = 2.0 * (2f64.sqrt() - 1.0) / riesz_gamma(1, 0.5);
        assert!(
            (t.values()[4] - expected).abs() / expected < 5e-3,
            "got {}, expected {expected}",
            t.values()[4]
        );
    }

    #[test]
    fn riesz_potential_is_homogeneous() {
        let domain = GridDomain::new(1, &[-1.0], 2.0, 64).unwrap();
        let f = indicator01(&domain);
        let scaled =
            SampledFunction::from_values(domain, f.values().iter().map(|v| 3.0 * v).collect())
                .unwrap();
        let out = domain.offset_half_cell();
        let a = apply_riesz_potential(0.5, &f, &out).unwrap();
        let b = apply_riesz_potential(0.5, &scaled, &out).unwrap();
        for i in 0..out.node_count() {
            assert_abs_diff_eq!(b.values()[i], 3.0 * a.values()[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_symbols_telescope_to_zero() {
        let spec = standard_2_1();
        let domain = GridDomain::new(1, &[-1.0], 2.0, 16).unwrap();
        let f = indicator01(&domain);
        let c = SampledFunction::from_expr(
            CorpusExpr::from_catalog("constant", &[2.0], 1).unwrap(),
            domain,
        );
        let out = domain.offset_half_cell();
        let comm = apply_commutator(&spec, &[c.clone(), c], &[f.clone(), f.clone()], &out).unwrap();
        let t = apply_fractional_integral(&spec, &[f.clone(), f], &out).unwrap();
        let scale = t.sup_norm();
        assert!(comm.values().iter().all(|v| v.abs() <= 1e-10 * scale));
    }

    #[test]
    fn linear_symbol_matches_moment_kernel() {
        // b(x) = x, m = 1, riesz kernel: the commutator collapses to
        // int (x - y) |x-y|^{a-n} f(y) dy / gamma_n(a).
        let domain = GridDomain::new(1, &[0.25], 1.0, 128).unwrap();
        let spec = KernelSpec::riesz(1, 0.5).unwrap();
        let b = SampledFunction::from_expr(
            CorpusExpr::from_catalog("power_weight", &[1.0], 1).unwrap(),
            domain,
        );
        let f = SampledFunction::from_expr(
            CorpusExpr::from_catalog("gaussian", &[0.75, 0.2], 1).unwrap(),
            domain,
        );
        let out = GridDomain::new(1, &[0.25], 1.0, 8).unwrap();
        let comm = apply_commutator(
            &spec,
            std::slice::from_ref(&b),
            std::slice::from_ref(&f),
            &out,
        )
        .unwrap();
        let g = riesz_gamma(1, 0.5);
        for idx in 0..out.node_count() {
            let x = out.node(idx)[0];
            let mut direct = 0.0;
            for i in 0..domain.node_count() {
                let y = domain.node(i)[0];
                direct += (x - y) * (x - y).abs().powf(0.5 - 1.0) * f.values()[i];
            }
            direct *= domain.cell_volume() / g;
            assert!(
                (comm.values()[idx] - direct).abs() <= 0.02 * direct.abs().max(1e-6),
                "node {idx}: commutator {} vs direct {direct}",
                comm.values()[idx]
            );
        }
    }

    #[test]
    fn missing_closed_form_symbol_is_refused() {
        let spec = standard_2_1();
        let domain = GridDomain::new(1, &[-1.0], 2.0, 16).unwrap();
        let f = indicator01(&domain);
        let raw = SampledFunction::from_values(domain, vec![1.0; domain.node_count()]).unwrap();
        let out = domain.offset_half_cell();
        let err = apply_commutator(&spec, &[raw.clone(), raw], &[f.clone(), f], &out).unwrap_err();
        assert!(matches!(err, FraclabError::InvalidConfig(_)));
    }
}
