//! Subcommand implementations: suite execution, kernel certification, and
//! direct evaluation.

use std::path::Path;

use fraclab::corpus::CorpusExpr;
use fraclab::grid::{CubeFamily, SampledFunction};
use fraclab::kernels::{self, KernelCertification, SizeCheck};
use fraclab::verify;
use fraclab::{GridDomain, VerificationReport};
use serde::Serialize;

use crate::config::{CliError, RunConfig, SuiteSpec};
use crate::output;

/// Exit codes: suites passed / a suite failed / configuration error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_SUITE_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Serialize)]
struct SuiteReportFile<'a> {
    schema: u32,
    config: &'a RunConfig,
    report: &'a VerificationReport,
}

/// Run every configured suite at the configured resolution and its
/// refinement, write one JSON report per suite plus a combined CSV, and
/// report overall success.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<i32, CliError> {
    if cfg.suites.is_empty() {
        return Err(CliError::Config(
            "suites: at least one suite is required".to_string(),
        ));
    }
    let domain = cfg.build_domain()?;
    let levels = cfg.levels();
    let mut reports: Vec<VerificationReport> = Vec::new();
    for (idx, suite) in cfg.suites.iter().enumerate() {
        suite.check_fields(idx)?;
        reports.extend(dispatch(cfg, suite, idx, &domain, levels)?);
    }

    let mut failed = 0usize;
    for report in &reports {
        let verdict = if report.pass { "PASS" } else { "FAIL" };
        if !report.pass {
            failed += 1;
        }
        println!(
            "{verdict} {}  constant {} -> {} (change {:.2}%)",
            report.suite,
            output::fmt_f64(report.empirical_constant),
            output::fmt_f64(report.empirical_constant_fine),
            100.0 * report.relative_change
        );
        for note in &report.notes {
            println!("  note: {note}");
        }
    }

    for (idx, report) in reports.iter().enumerate() {
        let name = format!("report-{idx:02}-{}.json", report.suite);
        let file = SuiteReportFile {
            schema: cfg.schema,
            config: cfg,
            report,
        };
        let path = output::write_json(out_dir, &name, &file)?;
        println!("wrote {}", path.display());
    }

    let refs: Vec<&VerificationReport> = reports.iter().collect();
    let csv = output::cases_csv(&refs);
    let path = output::write_text(out_dir, &cfg.output().csv, &csv)?;
    println!("wrote {}", path.display());

    if failed == 0 {
        println!("all {} suite report(s) passed", reports.len());
        Ok(EXIT_OK)
    } else {
        println!("{failed} of {} suite report(s) failed", reports.len());
        Ok(EXIT_SUITE_FAILED)
    }
}

fn dispatch(
    cfg: &RunConfig,
    suite: &SuiteSpec,
    idx: usize,
    domain: &GridDomain,
    levels: usize,
) -> Result<Vec<VerificationReport>, CliError> {
    let symbols = |needed: bool| -> Result<Option<Vec<CorpusExpr>>, CliError> {
        if needed {
            Ok(Some(cfg.build_symbols()?))
        } else {
            Ok(None)
        }
    };
    match suite.suite.as_str() {
        "sharp-estimate" => {
            let params = cfg.build_params()?;
            let corpus = cfg.build_corpus()?;
            let syms = symbols(suite.commutator)?;
            let report =
                verify::verify_sharp_estimate(&params, &corpus, domain, levels, syms.as_deref())?;
            Ok(vec![report])
        }
        "weighted" => {
            let params = cfg.build_params()?;
            let corpus = cfg.build_corpus()?;
            let exponents = cfg.exponent_vector()?;
            let weights = cfg.build_weights()?;
            let mode = suite.mode(idx)?;
            let syms = symbols(suite.commutator)?;
            let report = verify::verify_weighted_bounds(
                &params,
                &exponents,
                &weights,
                &corpus,
                domain,
                levels,
                mode,
                syms.as_deref(),
            )?;
            Ok(vec![report])
        }
        "maximal" => {
            let corpus = cfg.build_corpus()?;
            let exponents = cfg.exponent_vector()?;
            let weights = cfg.build_weights()?;
            let mode = suite.mode(idx)?;
            let report =
                verify::verify_maximal_bounds(&exponents, &weights, &corpus, domain, levels, mode)?;
            Ok(vec![report])
        }
        "fefferman-stein" => {
            let fs = cfg.build_flat_corpus()?;
            let delta = suite.require_f64("delta", suite.delta, idx)?;
            let p = suite.require_f64("p", suite.p, idx)?;
            let weight = match &suite.weight {
                Some(spec) => spec.to_expr(cfg.domain.n)?,
                None => CorpusExpr::from_catalog("constant", &[1.0], cfg.domain.n)
                    .map_err(CliError::from)?,
            };
            let report = verify::verify_fefferman_stein(&fs, delta, p, &weight, domain, levels)?;
            Ok(vec![report])
        }
        "variable-exponent" => {
            let params = cfg.build_params()?;
            let corpus = cfg.build_corpus()?;
            let forms = cfg.variable_forms()?;
            let split = cfg.alpha_split()?;
            let syms = symbols(suite.commutator)?;
            let reports = verify::verify_variable_exponent(
                &params,
                &forms,
                split,
                &corpus,
                domain,
                levels,
                syms.as_deref(),
            )?;
            Ok(vec![
                reports.main,
                reports.holder_product,
                reports.fractional_maximal,
            ])
        }
        "kolmogorov" => {
            let fs = cfg.build_flat_corpus()?;
            let p = suite.require_f64("p", suite.p, idx)?;
            let u = suite.require_f64("u", suite.u, idx)?;
            let report = verify::verify_kolmogorov(p, u, &fs, domain, levels)?;
            Ok(vec![report])
        }
        "bmo-dilation" => {
            let bs = cfg.build_flat_corpus()?;
            let k_max = suite.k_max.ok_or_else(|| {
                CliError::Config(format!(
                    "suites[{idx}].k_max: required by suite `bmo-dilation`"
                ))
            })?;
            let report = verify::verify_bmo_cubes(&bs, domain, levels, k_max)?;
            Ok(vec![report])
        }
        // check_fields already rejected unknown suites
        other => Err(CliError::Config(format!("unknown suite `{other}`"))),
    }
}

#[derive(Serialize)]
struct CertifyReportFile<'a> {
    schema: u32,
    config: &'a RunConfig,
    size_check: &'a SizeCheck,
    certification: &'a KernelCertification,
}

/// Certify the configured kernel: spot-check the size condition on random
/// point tuples and tabulate the annulus smoothness sequence at two
/// quadrature resolutions.
pub fn certify(cfg: &RunConfig, out_dir: &Path) -> Result<i32, CliError> {
    let spec = cfg.build_kernel()?;
    let block = cfg.resolved_certify();
    let size = kernels::check_size_condition(&spec, block.size_samples, block.seed)?;
    let cert = kernels::verify_dini_implies_generalized(
        &spec,
        block.k_max,
        block.separation,
        block.nodes_per_axis,
    )?;

    // Embed the exact parameters the certification ran with.
    let mut resolved = cfg.clone();
    resolved.certify = Some(block);
    let file = CertifyReportFile {
        schema: cfg.schema,
        config: &resolved,
        size_check: &size,
        certification: &cert,
    };
    let path = output::write_json(out_dir, "certify.json", &file)?;
    println!("wrote {}", path.display());

    let mut csv = String::from("k,c_k,c_k_fine,resolution_change,modulus_ratio,tail_ratio\n");
    for (i, value) in cert.sequence.values.iter().enumerate() {
        let tail = cert
            .tail_ratios
            .get(i)
            .map(|v| output::fmt_f64(*v))
            .unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            i + 1,
            output::fmt_f64(*value),
            output::fmt_f64(cert.sequence_fine.values[i]),
            output::fmt_f64(cert.resolution_change[i]),
            output::fmt_f64(cert.modulus_ratios[i]),
            tail
        ));
    }
    let path = output::write_text(out_dir, "certify.csv", &csv)?;
    println!("wrote {}", path.display());

    println!(
        "kernel {}: size-condition worst ratio {} over {} samples ({})",
        spec.kind().name(),
        output::fmt_f64(size.worst_ratio),
        size.samples,
        if size.pass { "pass" } else { "FAIL" }
    );
    println!(
        "annulus sequence: fitted decay exponent {} (fine {}), sum C_k {}, sum k C_k {}, ratio spread {}",
        output::fmt_f64(cert.sequence.fitted_decay_exponent),
        output::fmt_f64(cert.sequence_fine.fitted_decay_exponent),
        output::fmt_f64(cert.sum_ck),
        output::fmt_f64(cert.sum_k_ck),
        output::fmt_f64(cert.ratio_spread)
    );
    Ok(if size.pass {
        EXIT_OK
    } else {
        EXIT_SUITE_FAILED
    })
}

/// What `fraclab eval` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalWhat {
    Operator,
    Norms,
    Maximal,
}

/// Evaluate the configured operator, norms, or maximal function on the
/// first corpus tuple and write the samples as CSV in node order.
pub fn eval(cfg: &RunConfig, what: EvalWhat, out_dir: &Path) -> Result<i32, CliError> {
    let domain = cfg.build_domain()?;
    let corpus = cfg.build_corpus()?;
    match what {
        EvalWhat::Operator => {
            let spec = cfg.build_kernel()?;
            let tuple = &corpus[0];
            if tuple.len() != spec.m() {
                return Err(CliError::Config(format!(
                    "corpus[0]: kernel has {} slots, tuple has {}",
                    spec.m(),
                    tuple.len()
                )));
            }
            let fs: Vec<SampledFunction> = tuple
                .iter()
                .map(|e| SampledFunction::from_expr(*e, domain))
                .collect();
            let out = verify::eval_grid(&domain);
            let tf = fraclab::operators::apply_fractional_integral(&spec, &fs, &out)?;
            let csv = output::nodes_csv(&out, &[("value".to_string(), tf.values())]);
            let path = output::write_text(out_dir, "eval-operator.csv", &csv)?;
            println!("wrote {}", path.display());
        }
        EvalWhat::Maximal => {
            let family = CubeFamily::new(&domain, cfg.levels())?;
            let columns: Vec<(String, SampledFunction)> = corpus[0]
                .iter()
                .enumerate()
                .map(|(j, e)| {
                    let f = SampledFunction::from_expr(*e, domain);
                    fraclab::maximal::hl_maximal_delta(&f, 1.0, &family)
                        .map(|mf| (format!("value{j}"), mf))
                })
                .collect::<fraclab::Result<_>>()?;
            let refs: Vec<(String, &[f64])> = columns
                .iter()
                .map(|(name, f)| (name.clone(), f.values()))
                .collect();
            let csv = output::nodes_csv(&domain, &refs);
            let path = output::write_text(out_dir, "eval-maximal.csv", &csv)?;
            println!("wrote {}", path.display());
        }
        EvalWhat::Norms => {
            let mut csv = String::from("tuple,slot,inputs,l1,l2,sup\n");
            for (t, tuple) in corpus.iter().enumerate() {
                for (j, e) in tuple.iter().enumerate() {
                    let f = SampledFunction::from_expr(*e, domain);
                    let l1 = fraclab::spaces::lp_norm(&f, 1.0, None)?;
                    let l2 = fraclab::spaces::lp_norm(&f, 2.0, None)?;
                    csv.push_str(&format!(
                        "{t},{j},{},{},{},{}\n",
                        output::quote(&e.label()),
                        output::fmt_f64(l1),
                        output::fmt_f64(l2),
                        output::fmt_f64(f.sup_norm())
                    ));
                }
            }
            let path = output::write_text(out_dir, "eval-norms.csv", &csv)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(EXIT_OK)
}
