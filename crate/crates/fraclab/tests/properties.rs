//! Randomized invariants: algebraic identities and monotonicity laws that
//! must hold for every admissible input, not just the frozen test anchors.

use fraclab::corpus::CorpusExpr;
use fraclab::grid::{CubeFamily, GridDomain, SampledFunction};
use fraclab::kernels::{KernelKind, KernelSpec, ModulusOfContinuity};
use fraclab::maximal::{
    frac_maximal_r, hl_maximal_delta, multilinear_frac_maximal_r, sharp_maximal,
};
use fraclab::spaces::{self, ExponentFunction, ExponentVector};
use proptest::prelude::*;

fn domain32() -> GridDomain {
    GridDomain::new(1, &[-2.0], 4.0, 32).unwrap()
}

fn family(domain: &GridDomain) -> CubeFamily {
    CubeFamily::new(domain, 3).unwrap()
}

fn expr(id: &str, params: &[f64]) -> CorpusExpr {
    CorpusExpr::from_catalog(id, params, 1).unwrap()
}

/// Strategy over catalog expressions with randomized parameters.
fn arb_expr() -> impl Strategy<Value = CorpusExpr> {
    prop_oneof![
        (-1.5f64..0.5, 0.1f64..1.5).prop_map(|(a, len)| expr("indicator", &[a, a + len])),
        (-1.0f64..1.0, 0.3f64..1.5).prop_map(|(c, w)| expr("gaussian", &[c, w])),
        (-0.8f64..0.8, 0.4f64..1.5).prop_map(|(c, r)| expr("bump", &[c, r])),
        (0.5f64..4.0).prop_map(|freq| expr("oscillatory", &[freq])),
    ]
}

fn sample(e: &CorpusExpr, domain: &GridDomain) -> SampledFunction {
    SampledFunction::from_expr(*e, *domain)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The two-slot kernel is symmetric in its arguments and homogeneous of
    /// degree `alpha - mn` under joint dilation.
    #[test]
    fn kernel_symmetry_and_homogeneity(
        alpha in 0.05f64..0.95,
        x in -2.0f64..2.0,
        y1 in -2.0f64..2.0,
        y2 in -2.0f64..2.0,
        lambda in 0.2f64..5.0,
    ) {
        let spec = KernelSpec::new(KernelKind::Standard, 2, 1, alpha, 1.0, 2.0).unwrap();
        let p = |v: f64| [v, 0.0];
        prop_assume!((x - y1).abs() > 1e-6 && (x - y2).abs() > 1e-6);
        let k12 = spec.eval(p(x), &[p(y1), p(y2)]).unwrap();
        let k21 = spec.eval(p(x), &[p(y2), p(y1)]).unwrap();
        prop_assert!((k12 - k21).abs() <= 1e-12 * k12.abs().max(1.0));

        let k_scaled = spec.eval(p(lambda * x), &[p(lambda * y1), p(lambda * y2)]).unwrap();
        let expected = lambda.powf(alpha - 2.0) * k12;
        prop_assert!(
            (k_scaled - expected).abs() <= 1e-9 * expected.abs().max(1e-12),
            "scaled {k_scaled} vs {expected}"
        );
    }

    /// Every catalog kernel obeys its size bound: `|K| <= c A / (sum |x - y_j|)^{mn - alpha}`
    /// with `c = 1` for the standard kernel and `c = 3` for the modulated one
    /// (its modulation factor lies in `[1, 3]`).
    #[test]
    fn kernel_size_bound(
        alpha in 0.05f64..0.95,
        gamma in 0.2f64..1.0,
        x in -2.0f64..2.0,
        y1 in -2.0f64..2.0,
        y2 in -2.0f64..2.0,
    ) {
        prop_assume!((x - y1).abs() > 1e-6 || (x - y2).abs() > 1e-6);
        let p = |v: f64| [v, 0.0];
        let denom = (x - y1).abs() + (x - y2).abs();
        for (kind, c) in [
            (KernelKind::Standard, 1.0),
            (KernelKind::HolderModulated { gamma }, 3.0),
        ] {
            let spec = KernelSpec::new(kind, 2, 1, alpha, 1.0, 2.0).unwrap();
            let k = spec.eval(p(x), &[p(y1), p(y2)]).unwrap();
            let bound = c * denom.powf(alpha - 2.0);
            prop_assert!(k.abs() <= bound * (1.0 + 1e-12), "kind {kind:?}: {k} > {bound}");
        }
    }

    /// Moduli of continuity vanish at zero and are nondecreasing.
    #[test]
    fn modulus_is_monotone(gamma in 0.2f64..1.0, m in 1u32..4) {
        for omega in [
            ModulusOfContinuity::power(gamma).unwrap(),
            ModulusOfContinuity::log_damped(gamma, m).unwrap(),
        ] {
            prop_assert_eq!(omega.eval(0.0), 0.0);
            let mut prev = 0.0;
            for i in 1..=40 {
                let t = i as f64 / 40.0;
                let v = omega.eval(t);
                prop_assert!(v >= prev - 1e-15, "omega({t}) = {v} < {prev}");
                prev = v;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// `M_1` is positively homogeneous and monotone in `|f|`.
    #[test]
    fn maximal_homogeneity_and_monotonicity(e in arb_expr(), c in 0.1f64..10.0) {
        let domain = domain32();
        let fam = family(&domain);
        let f = sample(&e, &domain);
        let scaled = SampledFunction::from_values(
            domain,
            f.values().iter().map(|v| c * v).collect(),
        ).unwrap();
        let mf = hl_maximal_delta(&f, 1.0, &fam).unwrap();
        let mscaled = hl_maximal_delta(&scaled, 1.0, &fam).unwrap();
        for (a, b) in mscaled.values().iter().zip(mf.values()) {
            prop_assert!((a - c * b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        // |f| <= |f| + 1 pointwise implies M f <= M(|f| + 1) pointwise.
        let bigger = SampledFunction::from_values(
            domain,
            f.values().iter().map(|v| v.abs() + 1.0).collect(),
        ).unwrap();
        let mbig = hl_maximal_delta(&bigger, 1.0, &fam).unwrap();
        for (a, b) in mf.values().iter().zip(mbig.values()) {
            prop_assert!(*a <= b + 1e-12);
        }
    }

    /// The sharp maximal function is dominated by twice the maximal function.
    #[test]
    fn sharp_below_twice_maximal(e in arb_expr()) {
        let domain = domain32();
        let fam = family(&domain);
        let f = sample(&e, &domain);
        let sharp = sharp_maximal(&f, &fam).unwrap();
        let m = hl_maximal_delta(&f, 1.0, &fam).unwrap();
        for (s, v) in sharp.values().iter().zip(m.values()) {
            prop_assert!(*s <= 2.0 * v + 1e-12, "sharp {s} > 2 * {v}");
        }
    }

    /// At order zero the fractional maximal operator reduces to
    /// Hardy-Littlewood, and the one-slot multilinear operator reduces to
    /// the linear one.
    #[test]
    fn fractional_maximal_reductions(e in arb_expr(), alpha in 0.0f64..0.9, r in 1.0f64..3.0) {
        let domain = domain32();
        let fam = family(&domain);
        let f = sample(&e, &domain);
        let zero_order = frac_maximal_r(&f, 0.0, 1.0, &fam).unwrap();
        let hl = hl_maximal_delta(&f, 1.0, &fam).unwrap();
        for (a, b) in zero_order.values().iter().zip(hl.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        let multi = multilinear_frac_maximal_r(
            std::slice::from_ref(&f), alpha, r, &fam,
        ).unwrap();
        let linear = frac_maximal_r(&f, alpha, r, &fam).unwrap();
        for (a, b) in multi.values().iter().zip(linear.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    /// Weak Lebesgue norms never exceed strong ones (same exponent).
    #[test]
    fn weak_norm_below_strong(e in arb_expr(), p in 1.0f64..4.0) {
        let domain = domain32();
        let f = sample(&e, &domain);
        let strong = spaces::lp_norm(&f, p, None).unwrap();
        let weak = spaces::weak_lp_norm(&f, p, None).unwrap();
        prop_assert!(weak <= strong * (1.0 + 1e-12), "weak {weak} > strong {strong}");
    }

    /// `L^p` norms are absolutely homogeneous and satisfy the triangle
    /// inequality for `p >= 1`.
    #[test]
    fn lp_norm_is_a_norm(e1 in arb_expr(), e2 in arb_expr(), p in 1.0f64..4.0, c in -5.0f64..5.0) {
        let domain = domain32();
        let f = sample(&e1, &domain);
        let g = sample(&e2, &domain);
        let nf = spaces::lp_norm(&f, p, None).unwrap();
        let scaled = SampledFunction::from_values(
            domain,
            f.values().iter().map(|v| c * v).collect(),
        ).unwrap();
        let nscaled = spaces::lp_norm(&scaled, p, None).unwrap();
        prop_assert!((nscaled - c.abs() * nf).abs() <= 1e-10 * nscaled.max(1.0));

        let sum = SampledFunction::from_values(
            domain,
            f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect(),
        ).unwrap();
        let nsum = spaces::lp_norm(&sum, p, None).unwrap();
        let ng = spaces::lp_norm(&g, p, None).unwrap();
        prop_assert!(nsum <= nf + ng + 1e-10, "{nsum} > {nf} + {ng}");
    }

    /// Muckenhoupt constants are at least 1 (Jensen), and BMO norms are
    /// invariant under adding constants.
    #[test]
    fn ap_jensen_and_bmo_shift(a in -0.5f64..0.9, p in 1.5f64..4.0, shift in -10.0f64..10.0) {
        let domain = domain32();
        let fam = family(&domain);
        let w = sample(&expr("power_weight", &[a]), &domain);
        prop_assume!(w.values().iter().all(|v| *v > 0.0));
        let ap = spaces::ap_constant(&w, p, &fam).unwrap();
        prop_assert!(ap >= 1.0 - 1e-12, "A_p = {ap} < 1");

        let b = sample(&expr("log_abs", &[]), &domain);
        let shifted = SampledFunction::from_values(
            domain,
            b.values().iter().map(|v| v + shift).collect(),
        ).unwrap();
        let n1 = spaces::bmo_norm(&b, &fam).unwrap();
        let n2 = spaces::bmo_norm(&shifted, &fam).unwrap();
        prop_assert!((n1 - n2).abs() <= 1e-10 * n1.max(1.0));
    }

    /// For constant exponents the Luxemburg norm agrees with the classical
    /// Lebesgue norm, and it is absolutely homogeneous.
    #[test]
    fn luxemburg_matches_constant_exponent(e in arb_expr(), p in 1.5f64..4.0, c in 0.1f64..10.0) {
        let domain = domain32();
        let f = sample(&e, &domain);
        let q = ExponentFunction::constant(p, domain).unwrap();
        let lux = spaces::luxemburg_norm(&f, &q).unwrap();
        let classical = spaces::lp_norm(&f, p, None).unwrap();
        prop_assert!((lux - classical).abs() <= 1e-8 * classical.max(1e-12));

        let scaled = SampledFunction::from_values(
            domain,
            f.values().iter().map(|v| c * v).collect(),
        ).unwrap();
        let lux_scaled = spaces::luxemburg_norm(&scaled, &q).unwrap();
        prop_assert!((lux_scaled - c * lux).abs() <= 1e-8 * lux_scaled.max(1e-12));
    }

    /// Functions on the Luxemburg unit sphere have modular at most 1.
    #[test]
    fn luxemburg_unit_ball(e in arb_expr(), p_lo in 1.5f64..2.5, bump in 0.1f64..1.5) {
        let domain = domain32();
        let f = sample(&e, &domain);
        let q = ExponentFunction::smoothstep(p_lo, p_lo + bump, 0.5, 1.0, domain).unwrap();
        let lux = spaces::luxemburg_norm(&f, &q).unwrap();
        prop_assume!(lux > 1e-9);
        let normalized = SampledFunction::from_values(
            domain,
            f.values().iter().map(|v| v / lux).collect(),
        ).unwrap();
        let rho = spaces::modular(&normalized, &q).unwrap();
        prop_assert!(rho <= 1.0 + 1e-7, "modular {rho} > 1 on the unit sphere");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Scaling every Lebesgue exponent down by `d` scales the target
    /// exponent down by `d` as well.
    #[test]
    fn exponent_vector_scaling(
        p1 in 1.5f64..8.0,
        p2 in 1.5f64..8.0,
        alpha in 0.05f64..0.4,
        d in 1.0f64..1.4,
    ) {
        let Ok(exps) = ExponentVector::new(&[p1, p2], alpha, 1) else {
            return Ok(()); // inadmissible combination (target exponent not positive)
        };
        let q = exps.q();
        prop_assume!(p1 / d >= 1.0 && p2 / d >= 1.0);
        let Ok(scaled) = exps.scaled_down(d) else { return Ok(()) };
        let qs = scaled.q();
        prop_assert!((qs - q / d).abs() <= 1e-10 * qs.max(1.0), "{qs} vs {}", q / d);
    }
}
