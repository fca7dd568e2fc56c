//! Maximal operators over finite cube families.
//!
//! Every operator here replaces the supremum over all cubes by a supremum
//! over the members of a [`CubeFamily`] containing the evaluation point, so
//! values are exact lower bounds of the continuum operators that converge
//! from below as the family refines. Cubes are clipped to the grid box:
//! averages divide by `|Q ∩ box|` and the fractional prefactor uses the same
//! clipped measure, which keeps indicator test cases exact and avoids
//! zero-padding bias on half-exterior cubes.
//!
//! Per-cube statistics (averages, oscillations) are computed once from
//! prefix-sum tables, in parallel over cubes; evaluation is then a per-node
//! maximum over containing cubes, in parallel over nodes. Evaluation nodes
//! may come from a different grid than the sampled data, which is how
//! operator outputs (living on half-cell offset grids) are compared against
//! maximal functions of the inputs.

use crate::error::FraclabError;
use crate::exec;
use crate::grid::{
    clipped_weight, for_cells_in, CellTable, Cube, CubeFamily, GridDomain, SampledFunction,
};
use crate::Result;

fn check_family(f: &SampledFunction, family: &CubeFamily) -> Result<()> {
    if family.domain() != f.domain() {
        return Err(FraclabError::GridMismatch(
            "cube family was built for a different grid than the sampled function".into(),
        ));
    }
    Ok(())
}

/// Per-node supremum of `cube_values` over family cubes containing the node.
fn sup_over_cubes(
    family: &CubeFamily,
    eval: &GridDomain,
    cube_values: &[f64],
) -> Result<SampledFunction> {
    let n = family.domain().dim();
    if eval.dim() != n {
        return Err(FraclabError::GridMismatch(
            "evaluation grid dimension does not match the cube family".into(),
        ));
    }
    let cubes = family.cubes();
    let values = exec::map_indexed(eval.node_count(), |idx| {
        let x = eval.node(idx);
        let mut best = 0.0f64;
        for (cube, v) in cubes.iter().zip(cube_values) {
            if cube.contains(x, n) && *v > best {
                best = *v;
            }
        }
        best
    });
    SampledFunction::from_values(*eval, values)
}

fn cube_averages(table: &CellTable, family: &CubeFamily) -> Vec<f64> {
    exec::map_indexed(family.cubes().len(), |i| {
        table.average_over(&family.cubes()[i])
    })
}

/// `M_δ(f) = [M(|f|^δ)]^{1/δ}` evaluated at the nodes of `eval`.
pub fn hl_maximal_delta_on(
    f: &SampledFunction,
    delta: f64,
    family: &CubeFamily,
    eval: &GridDomain,
) -> Result<SampledFunction> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(FraclabError::invalid(format!(
            "maximal power delta must be positive, got {delta}"
        )));
    }
    check_family(f, family)?;
    let table = CellTable::for_powered(f, delta);
    let vals: Vec<f64> = cube_averages(&table, family)
        .into_iter()
        .map(|a| a.powf(1.0 / delta))
        .collect();
    sup_over_cubes(family, eval, &vals)
}

/// `M_δ(f)` on the function's own grid.
pub fn hl_maximal_delta(
    f: &SampledFunction,
    delta: f64,
    family: &CubeFamily,
) -> Result<SampledFunction> {
    hl_maximal_delta_on(f, delta, family, f.domain())
}

/// Mean oscillation of raw samples `g` over each family cube.
fn cube_oscillations(domain: &GridDomain, g: &[f64], family: &CubeFamily) -> Vec<f64> {
    let table = CellTable::new(*domain, g);
    let cell_vol = domain.cell_volume();
    exec::map_indexed(family.cubes().len(), |i| {
        let cube: &Cube = &family.cubes()[i];
        let weight = clipped_weight(domain, cube);
        if weight <= 0.0 {
            return 0.0;
        }
        let measure = weight * cell_vol;
        let mean = table.integral_over(cube) / measure;
        let mut acc = 0.0;
        for_cells_in(domain, cube, |idx, w| {
            acc += (g[idx] - mean).abs() * w;
        });
        acc * cell_vol / measure
    })
}

/// Sharp maximal function `M# f` (f_Q form) of the raw, possibly signed
/// samples, evaluated at the nodes of `eval`.
pub fn sharp_maximal_on(
    f: &SampledFunction,
    family: &CubeFamily,
    eval: &GridDomain,
) -> Result<SampledFunction> {
    check_family(f, family)?;
    let osc = cube_oscillations(f.domain(), f.values(), family);
    sup_over_cubes(family, eval, &osc)
}

/// `M# f` on the function's own grid.
pub fn sharp_maximal(f: &SampledFunction, family: &CubeFamily) -> Result<SampledFunction> {
    sharp_maximal_on(f, family, f.domain())
}

/// `M#_δ(f) = [M#(|f|^δ)]^{1/δ}` at the nodes of `eval`. For `δ = 1` the
/// oscillation acts on the signed samples (so sign patterns register, as in
/// the BMO norm); for `δ != 1` fractional powers force `|f|^δ`.
pub fn sharp_maximal_delta_on(
    f: &SampledFunction,
    delta: f64,
    family: &CubeFamily,
    eval: &GridDomain,
) -> Result<SampledFunction> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(FraclabError::invalid(format!(
            "maximal power delta must be positive, got {delta}"
        )));
    }
    if delta == 1.0 {
        return sharp_maximal_on(f, family, eval);
    }
    check_family(f, family)?;
    let powered: Vec<f64> = f.values().iter().map(|v| v.abs().powf(delta)).collect();
    let osc = cube_oscillations(f.domain(), &powered, family);
    let powered_back: Vec<f64> = osc.into_iter().map(|v| v.powf(1.0 / delta)).collect();
    sup_over_cubes(family, eval, &powered_back)
}

/// `M#_δ(f)` on the function's own grid.
pub fn sharp_maximal_delta(
    f: &SampledFunction,
    delta: f64,
    family: &CubeFamily,
) -> Result<SampledFunction> {
    sharp_maximal_delta_on(f, delta, family, f.domain())
}

fn check_frac_params(alpha: f64, r: f64, mn: usize) -> Result<()> {
    if !(0.0..(mn as f64)).contains(&alpha) {
        return Err(FraclabError::invalid(format!(
            "fractional maximal order must lie in [0, {mn}), got {alpha}"
        )));
    }
    if !(r >= 1.0) || !r.is_finite() {
        return Err(FraclabError::invalid(format!(
            "fractional maximal power r must be at least 1, got {r}"
        )));
    }
    Ok(())
}

/// Fractional maximal operator
/// `M_{α,r} f = sup |Q|^{α/n} ((1/|Q|) ∫_Q |f|^r)^{1/r}` at `eval` nodes.
pub fn frac_maximal_r_on(
    f: &SampledFunction,
    alpha: f64,
    r: f64,
    family: &CubeFamily,
    eval: &GridDomain,
) -> Result<SampledFunction> {
    check_frac_params(alpha, r, f.domain().dim())?;
    check_family(f, family)?;
    let n = f.domain().dim() as f64;
    let table = CellTable::for_powered(f, r);
    let vals = exec::map_indexed(family.cubes().len(), |i| {
        let (integral, measure) = table.integral_and_measure(&family.cubes()[i]);
        if measure <= 0.0 {
            return 0.0;
        }
        measure.powf(alpha / n) * (integral / measure).powf(1.0 / r)
    });
    sup_over_cubes(family, eval, &vals)
}

/// `M_{α,r} f` on the function's own grid.
pub fn frac_maximal_r(
    f: &SampledFunction,
    alpha: f64,
    r: f64,
    family: &CubeFamily,
) -> Result<SampledFunction> {
    frac_maximal_r_on(f, alpha, r, family, f.domain())
}

/// Multilinear fractional maximal operator
/// `M_{α,r}(f⃗) = sup |Q|^{α/n} Π_j ((1/|Q|) ∫_Q |f_j|^r)^{1/r}` at `eval`.
pub fn multilinear_frac_maximal_r_on(
    fs: &[SampledFunction],
    alpha: f64,
    r: f64,
    family: &CubeFamily,
    eval: &GridDomain,
) -> Result<SampledFunction> {
    if fs.is_empty() || fs.len() > 3 {
        return Err(FraclabError::invalid(format!(
            "multilinear maximal operator expects 1..=3 inputs, got {}",
            fs.len()
        )));
    }
    let domain = *fs[0].domain();
    for f in fs {
        if *f.domain() != domain {
            return Err(FraclabError::GridMismatch(
                "maximal inputs must share one grid".into(),
            ));
        }
    }
    check_frac_params(alpha, r, fs.len() * domain.dim())?;
    check_family(&fs[0], family)?;
    let n = domain.dim() as f64;
    let tables: Vec<CellTable> = fs.iter().map(|f| CellTable::for_powered(f, r)).collect();
    let vals = exec::map_indexed(family.cubes().len(), |i| {
        let cube = &family.cubes()[i];
        let mut prod = f64::NAN;
        let mut measure = 0.0;
        for (j, table) in tables.iter().enumerate() {
            let (integral, meas) = table.integral_and_measure(cube);
            if meas <= 0.0 {
                return 0.0;
            }
            if j == 0 {
                measure = meas;
                prod = 1.0;
            }
            prod *= (integral / meas).powf(1.0 / r);
        }
        measure.powf(alpha / n) * prod
    });
    sup_over_cubes(family, eval, &vals)
}

/// Multilinear `M_{α,r}(f⃗)` on the shared input grid.
pub fn multilinear_frac_maximal_r(
    fs: &[SampledFunction],
    alpha: f64,
    r: f64,
    family: &CubeFamily,
) -> Result<SampledFunction> {
    let domain = *fs
        .first()
        .ok_or_else(|| FraclabError::invalid("multilinear maximal operator expects inputs"))?
        .domain();
    multilinear_frac_maximal_r_on(fs, alpha, r, family, &domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusExpr;
    use approx::assert_abs_diff_eq;

    fn sample(id: &str, params: &[f64], domain: &GridDomain) -> SampledFunction {
        SampledFunction::from_expr(CorpusExpr::from_catalog(id, params, 1).unwrap(), *domain)
    }

    #[test]
    fn constants_are_fixed_points_of_hl() {
        let domain = GridDomain::new(1, &[-2.0], 4.0, 16).unwrap();
        let family = CubeFamily::new(&domain, 2).unwrap();
        let f = sample("constant", &[3.0], &domain);
        for delta in [0.7, 1.0, 2.0] {
            let m = hl_maximal_delta(&f, delta, &family).unwrap();
            for v in m.values() {
                assert_abs_diff_eq!(*v, 3.0, epsilon = 1e-12);
            }
        }
        let sharp = sharp_maximal(&f, &family).unwrap();
        assert!(sharp.values().iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn constant_fractional_maximal_is_truncation_sensitive() {
        // With f ≡ c the sup picks the largest clipped cube: the whole box,
        // measure 4, prefactor 4^{1/2} = 2.
        let domain = GridDomain::new(1, &[-2.0], 4.0, 16).unwrap();
        let family = CubeFamily::new(&domain, 2).unwrap();
        let f = sample("constant", &[3.0], &domain);
        let m = frac_maximal_r(&f, 0.5, 1.0, &family).unwrap();
        for v in m.values() {
            assert_abs_diff_eq!(*v, 6.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn hl_of_indicator_finds_family_optimum() {
        let domain = GridDomain::new(1, &[-2.0], 4.0, 64).unwrap();
        let family = CubeFamily::new(&domain, 5).unwrap();
        let f = sample("indicator", &[0.0, 1.0], &domain);
        let m = hl_maximal_delta(&f, 1.0, &family).unwrap();
        let h = domain.h();
        for i in 0..domain.node_count() {
            let x = domain.node(i)[0];
            if x > 1.0 + h && x < 2.0 - h {
                // Best family cube is [0, 2]: average 1/2, exactly.
                assert_abs_diff_eq!(m.values()[i], 0.5, epsilon = 1e-14);
            }
            if x > 0.0 + h && x < 1.0 - h {
                assert_abs_diff_eq!(m.values()[i], 1.0, epsilon = 1e-14);
            }
        }
        // Far tail: the family value approaches the continuum 1/x.
        let last = domain.node_count() - 1;
        let x = domain.node(last)[0];
        assert!((m.values()[last] - 1.0 / x).abs() <= 2.0 * h);
    }

    #[test]
    fn hl_power_is_monotone_in_delta() {
        let domain = GridDomain::new(1, &[-2.0], 4.0, 32).unwrap();
        let family = CubeFamily::new(&domain, 3).unwrap();
        let g = sample("gaussian", &[0.3, 0.8], &domain);
        let o = sample("oscillatory", &[3.0], &domain);
        let f = SampledFunction::from_values(
            domain,
            g.values()
                .iter()
                .zip(o.values())
                .map(|(a, b)| a + 0.3 * b)
                .collect(),
        )
        .unwrap();
        let m07 = hl_maximal_delta(&f, 0.7, &family).unwrap();
        let m1 = hl_maximal_delta(&f, 1.0, &family).unwrap();
        let m2 = hl_maximal_delta(&f, 2.0, &family).unwrap();
        for i in 0..domain.node_count() {
            assert!(m07.values()[i] <= m1.values()[i] + 1e-12);
            assert!(m1.values()[i] <= m2.values()[i] + 1e-12);
        }
    }

    #[test]
    fn sharp_maximal_of_sign_is_one() {
        // Any symmetric cube has zero average, so the oscillation is
        // exactly 1; asymmetric cubes give 1 - (average)^2 < 1.
        let domain = GridDomain::new(1, &[-1.0], 2.0, 32).unwrap();
        let family = CubeFamily::new(&domain, 4).unwrap();
        let f = sample("sign", &[], &domain);
        let sharp = sharp_maximal(&f, &family).unwrap();
        let first_positive = domain.node_count() / 2;
        assert_abs_diff_eq!(sharp.values()[first_positive], 1.0, epsilon = 1e-15);
        let viadelta = sharp_maximal_delta(&f, 1.0, &family).unwrap();
        assert_eq!(sharp.values(), viadelta.values());
    }

    #[test]
    fn sharp_maximal_ignores_constant_shifts() {
        let domain = GridDomain::new(1, &[-2.0], 4.0, 32).unwrap();
        let family = CubeFamily::new(&domain, 3).unwrap();
        let f = sample("gaussian", &[0.5, 0.7], &domain);
        let shifted = f.map(|v| v + 7.5);
        let a = sharp_maximal(&f, &family).unwrap();
        let b = sharp_maximal(&shifted, &family).unwrap();
        for i in 0..domain.node_count() {
            assert_abs_diff_eq!(a.values()[i], b.values()[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn sharp_delta_uses_absolute_powers() {
        let domain = GridDomain::new(1, &[-1.0], 2.0, 16).unwrap();
        let family = CubeFamily::new(&domain, 2).unwrap();
        let f = sample("sign", &[], &domain);
        // |sign|^δ ≡ 1 has zero oscillation for δ != 1.
        let sharp = sharp_maximal_delta(&f, 0.5, &family).unwrap();
        assert!(sharp.values().iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn fractional_indicator_optimum_is_exact() {
        let domain = GridDomain::new(1, &[-2.0], 4.0, 64).unwrap();
        let family = CubeFamily::new(&domain, 5).unwrap();
        let f = sample("indicator", &[0.0, 1.0], &domain);
        let m = frac_maximal_r(&f, 0.5, 1.0, &family).unwrap();
        let mid = domain.node(0).map(|_| 0).into_iter().sum::<usize>();
        let _ = mid;
        // Node at x = 0.5 - h/2 sits in [0, 1], the optimal cube.
        let idx = (0..domain.node_count())
            .find(|i| (domain.node(*i)[0] - (0.5 - domain.h() / 2.0)).abs() < 1e-12)
            .unwrap();
        assert_abs_diff_eq!(m.values()[idx], 1.0, epsilon = 1e-14);

        let m2 = multilinear_frac_maximal_r(&[f.clone(), f.clone()], 1.0, 1.0, &family).unwrap();
        assert_abs_diff_eq!(m2.values()[idx], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn multilinear_zero_slot_annihilates() {
        let domain = GridDomain::new(1, &[-2.0], 4.0, 16).unwrap();
        let family = CubeFamily::new(&domain, 2).unwrap();
        let f = sample("gaussian", &[0.0, 1.0], &domain);
        let z = SampledFunction::zeros(domain);
        let m = multilinear_frac_maximal_r(&[f, z], 0.5, 1.0, &family).unwrap();
        assert!(m.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn multilinear_splitting_bound() {
        let domain = GridDomain::new(1, &[-2.0], 4.0, 32).unwrap();
        let family = CubeFamily::new(&domain, 3).unwrap();
        let f = sample("gaussian", &[0.0, 0.6], &domain);
        let g = sample("indicator", &[-1.0, 0.5], &domain);
        let joint =
            multilinear_frac_maximal_r(&[f.clone(), g.clone()], 0.75, 1.0, &family).unwrap();
        let a = frac_maximal_r(&f, 0.5, 1.0, &family).unwrap();
        let b = frac_maximal_r(&g, 0.25, 1.0, &family).unwrap();
        for i in 0..domain.node_count() {
            assert!(joint.values()[i] <= a.values()[i] * b.values()[i] + 1e-12);
        }
    }

    #[test]
    fn enlarging_the_family_never_decreases() {
        let domain = GridDomain::new(1, &[-2.0], 4.0, 32).unwrap();
        let small = CubeFamily::new(&domain, 2).unwrap();
        let large = CubeFamily::new(&domain, 4).unwrap();
        let f = sample("bump", &[0.2, 1.1], &domain);
        let ms = hl_maximal_delta(&f, 1.0, &small).unwrap();
        let ml = hl_maximal_delta(&f, 1.0, &large).unwrap();
        for i in 0..domain.node_count() {
            assert!(ml.values()[i] >= ms.values()[i] - 1e-15);
        }
    }

    #[test]
    fn maximal_operators_are_homogeneous() {
        let domain = GridDomain::new(1, &[-2.0], 4.0, 32).unwrap();
        let family = CubeFamily::new(&domain, 3).unwrap();
        let f = sample("gaussian", &[-0.4, 0.9], &domain);
        let scaled = f.map(|v| -2.0 * v);
        let a = hl_maximal_delta(&f, 0.8, &family).unwrap();
        let b = hl_maximal_delta(&scaled, 0.8, &family).unwrap();
        for i in 0..domain.node_count() {
            assert_abs_diff_eq!(b.values()[i], 2.0 * a.values()[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn reduction_identities_hold_nodewise() {
        let domain = GridDomain::new(1, &[-2.0], 4.0, 32).unwrap();
        let family = CubeFamily::new(&domain, 3).unwrap();
        let f = sample("gaussian", &[0.1, 0.8], &domain);

        let hl = hl_maximal_delta(&f, 1.0, &family).unwrap();
        let frac0 = frac_maximal_r(&f, 0.0, 1.0, &family).unwrap();
        for i in 0..domain.node_count() {
            assert_abs_diff_eq!(hl.values()[i], frac0.values()[i], epsilon = 1e-14);
        }

        // M_{α,r}(f) = [M_{αr}(|f|^r)]^{1/r} with αr < n.
        let (alpha, r) = (0.25, 2.0);
        let lhs = frac_maximal_r(&f, alpha, r, &family).unwrap();
        let powered = SampledFunction::from_values(domain, f.powered_abs(r)).unwrap();
        let inner = frac_maximal_r(&powered, alpha * r, 1.0, &family).unwrap();
        for i in 0..domain.node_count() {
            assert_abs_diff_eq!(
                lhs.values()[i],
                inner.values()[i].powf(1.0 / r),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn evaluation_grid_can_differ_from_data_grid() {
        let domain = GridDomain::new(1, &[-2.0], 4.0, 32).unwrap();
        let family = CubeFamily::new(&domain, 3).unwrap();
        let f = sample("constant", &[2.0], &domain);
        let offset = domain.offset_half_cell();
        let m = hl_maximal_delta_on(&f, 1.0, &family, &offset).unwrap();
        assert_eq!(m.domain(), &offset);
        for v in m.values() {
            assert_abs_diff_eq!(*v, 2.0, epsilon = 1e-12);
        }
    }

    /// Golden-section search for `inf_c (1/|Q|) ∫_Q |f - c|`, the
    /// second-form oscillation. The f_Q form is 2-equivalent to it.
    fn inf_c_oscillation(f: &SampledFunction, cube: &Cube) -> f64 {
        let domain = f.domain();
        let cell_vol = domain.cell_volume();
        let measure = clipped_weight(domain, cube) * cell_vol;
        let objective = |c: f64| -> f64 {
            let mut acc = 0.0;
            for_cells_in(domain, cube, |idx, w| {
                acc += (f.values()[idx] - c).abs() * w;
            });
            acc * cell_vol / measure
        };
        let (mut lo, mut hi) = (-10.0f64, 10.0f64);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let (mut f1, mut f2) = (objective(x1), objective(x2));
        for _ in 0..120 {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = objective(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = objective(x2);
            }
        }
        f1.min(f2)
    }

    #[test]
    fn mean_oscillation_is_two_equivalent_to_inf_form() {
        let domain = GridDomain::new(1, &[-2.0], 4.0, 16).unwrap();
        let family = CubeFamily::new(&domain, 2).unwrap();
        let g = sample("gaussian", &[0.3, 0.8], &domain);
        let o = sample("oscillatory", &[2.0], &domain);
        let f = SampledFunction::from_values(
            domain,
            g.values()
                .iter()
                .zip(o.values())
                .map(|(a, b)| 2.0 * a + b)
                .collect(),
        )
        .unwrap();
        let osc = cube_oscillations(&domain, f.values(), &family);
        for (cube, fq_form) in family.cubes().iter().zip(&osc) {
            let inf_form = inf_c_oscillation(&f, cube);
            assert!(
                *fq_form <= 2.0 * inf_form + 1e-12,
                "fq {fq_form} inf {inf_form}"
            );
            assert!(*fq_form >= inf_form - 1e-12);
        }
    }
}
