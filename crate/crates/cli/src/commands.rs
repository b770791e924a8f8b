//! Subcommand implementations. Each builds its result through the library,
//! assembles a record with provenance metadata, and writes it in the
//! requested format.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fockmix::detection::{
    click_distribution_mode, monte_carlo_clicks, BetaSchedule, DetectorConfig,
};
use fockmix::fock::JointPND;
use fockmix::metrics::optimal_squeezing;
use fockmix::nonlocality::{CurveSource, OptimizerSettings};
use fockmix::optics::{joint_pnd, mix_cs_sv, per_n_normalized, Mode};
use fockmix::states::{
    adaptive_single_mode, alpha_sq_for_mean_photons, coherent, css, ecs, noon_with_phase,
    squeezed_vacuum, CoherentParams, EcsParams, SqueezeParams,
};
use fockmix::Complex64;

use crate::output::{fmt_num, SeriesRecord, SCHEMA_VERSION};
use crate::{
    ClickSimArgs, Ctx, FidelityCurveArgs, Format, J3CurveArgs, OptimalOr, PndArgs,
    SimilaritySweepArgs, SourceArg, StateArgs, StateKind,
};

fn base_metadata(ctx: &Ctx, schema: &str) -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("tool".into(), format!("fockmix {}", env!("CARGO_PKG_VERSION")));
    meta.insert("schema".into(), format!("{schema}/{SCHEMA_VERSION}"));
    meta.insert("command".into(), format!("fockmix {}", ctx.invocation));
    meta.insert(
        "cutoff".into(),
        if ctx.adaptive_cutoff {
            format!("adaptive(tail_tol={})", ctx.tail_tol)
        } else {
            ctx.cutoff.to_string()
        },
    );
    meta.insert("tail_tol".into(), ctx.tail_tol.to_string());
    meta.insert("seed".into(), ctx.seed.to_string());
    meta.insert("timestamp".into(), chrono::Utc::now().to_rfc3339());
    meta
}

fn write_text(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write output to {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_series(ctx: &Ctx, record: &SeriesRecord) -> Result<()> {
    let text = match ctx.format {
        Format::Csv => record.to_csv(),
        Format::Json => record.to_json(),
        Format::Svg => record.to_svg()?,
    };
    write_text(&ctx.out, &text)
}

fn grid(max: f64, step: f64) -> Vec<f64> {
    let count = (max / step + 1e-9).floor() as usize;
    (0..=count).map(|i| i as f64 * step).collect()
}

pub fn state(ctx: &Ctx, args: &StateArgs) -> Result<()> {
    let adaptive = |build: &dyn Fn(usize) -> fockmix::fock::ModeAmplitudes| {
        if ctx.adaptive_cutoff {
            adaptive_single_mode(build, ctx.tail_tol).map_err(anyhow::Error::from)
        } else {
            Ok(build(ctx.cutoff))
        }
    };
    let dump = match args.kind {
        StateKind::Coherent => {
            let p = CoherentParams { magnitude: args.mag, phase: args.phase };
            adaptive(&|c| coherent(&p, c))?.to_dump()
        }
        StateKind::Squeezed => {
            let p = SqueezeParams { r: args.r, theta: args.theta };
            adaptive(&|c| squeezed_vacuum(&p, c))?.to_dump()
        }
        StateKind::Css => {
            let p = CoherentParams { magnitude: args.mag, phase: args.phase };
            adaptive(&|c| css(&p, c))?.to_dump()
        }
        StateKind::Ecs => {
            let alpha = Complex64::from_polar(args.mag, args.phase);
            let cutoff = if ctx.adaptive_cutoff {
                fockmix::states::adaptive_cutoff_for(
                    |c| coherent(&CoherentParams::from_complex(alpha), c),
                    ctx.tail_tol,
                )?
            } else {
                ctx.cutoff
            };
            ecs(&EcsParams { alpha }, cutoff).to_dump()
        }
        StateKind::Noon => noon_with_phase(args.n, args.rel_phase, ctx.cutoff)?.to_dump(),
    };
    write_text(&ctx.out, &dump)
}

/// Resolved physics inputs for the `pnd` subcommand.
struct PndSetup {
    cs: CoherentParams,
    sv: SqueezeParams,
    alpha_sq: f64,
    overridden_beta: bool,
}

fn resolve_pnd(args: &PndArgs) -> Result<PndSetup> {
    let (beta_mag, overridden_beta) = match (args.nbar, args.beta) {
        (Some(n_bar), explicit) => {
            ((alpha_sq_for_mean_photons(n_bar) / 2.0).sqrt(), explicit.is_some())
        }
        (None, Some(beta)) => (beta, false),
        (None, None) => bail!("pnd needs either --beta or --nbar"),
    };
    let alpha_sq = 2.0 * beta_mag * beta_mag;
    let alpha = Complex64::from_polar(alpha_sq.sqrt(), args.phi);
    let optimal = optimal_squeezing(alpha);
    let sv = SqueezeParams {
        r: match args.r {
            OptimalOr::Optimal => optimal.r,
            OptimalOr::Value(v) => v,
        },
        theta: match args.theta {
            OptimalOr::Optimal => optimal.theta,
            OptimalOr::Value(v) => v,
        },
    };
    Ok(PndSetup {
        cs: CoherentParams { magnitude: beta_mag, phase: args.phi },
        sv,
        alpha_sq,
        overridden_beta,
    })
}

fn table_csv(header: &mut String, pnd: &JointPND) {
    let _ = writeln!(header, "m,n,p");
    for m in 0..=pnd.cutoff() {
        for n in 0..=pnd.cutoff() {
            let p = pnd.prob(m, n);
            if p != 0.0 {
                let _ = writeln!(header, "{m},{n},{}", fmt_num(p));
            }
        }
    }
}

fn table_rows_json(pnd: &JointPND) -> Vec<serde_json::Value> {
    let mut rows = Vec::new();
    for m in 0..=pnd.cutoff() {
        for n in 0..=pnd.cutoff() {
            let p = pnd.prob(m, n);
            if p != 0.0 {
                rows.push(serde_json::json!([m, n, p]));
            }
        }
    }
    rows
}

/// Sibling path for the per-N normalized table: `joint.csv` → `joint.per-n.csv`.
fn per_n_path(path: &Path) -> PathBuf {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => path.with_extension(format!("per-n.{ext}")),
        None => path.with_extension("per-n"),
    }
}

pub fn pnd(ctx: &Ctx, args: &PndArgs) -> Result<()> {
    let setup = resolve_pnd(args)?;
    let mixed = mix_cs_sv(&setup.cs, &setup.sv, ctx.cutoff_spec())?;
    let joint = joint_pnd(&mixed.state);
    let tilde = per_n_normalized(&joint);

    // flatten the per-N table into a JointPND-shaped grid of present cells
    let mut tilde_grid = JointPND::zero(joint.cutoff());
    for m in 0..=joint.cutoff() {
        for n in 0..=joint.cutoff() {
            if let Some(p) = tilde.prob(m, n) {
                tilde_grid.set_prob(m, n, p);
            }
        }
    }

    let mut meta = base_metadata(ctx, "pnd");
    meta.insert("beta".into(), setup.cs.magnitude.to_string());
    meta.insert("phi".into(), setup.cs.phase.to_string());
    meta.insert("r".into(), setup.sv.r.to_string());
    meta.insert("theta".into(), setup.sv.theta.to_string());
    meta.insert("alpha_sq".into(), setup.alpha_sq.to_string());
    meta.insert("input_mean_photons".into(), mixed.input_mean_photons.to_string());
    meta.insert("resolved_cutoff".into(), mixed.cutoff.to_string());
    meta.insert("tail_mass".into(), format!("{:e}", mixed.tail_mass));
    if setup.overridden_beta {
        meta.insert("warning".into(), "--beta overridden by --nbar".into());
    }
    if mixed.tail_mass > 100.0 * ctx.tail_tol {
        meta.insert(
            "truncation_warning".into(),
            format!("tail mass {:e} exceeds 100×tail_tol", mixed.tail_mass),
        );
    }

    match ctx.format {
        Format::Csv => {
            let mut header = String::new();
            for (k, v) in &meta {
                let _ = writeln!(header, "# {k}: {v}");
            }
            let mut joint_text = header.clone();
            let _ = writeln!(joint_text, "# table: joint");
            table_csv(&mut joint_text, &joint);
            let mut tilde_text = header;
            let _ = writeln!(tilde_text, "# table: per_n_normalized");
            table_csv(&mut tilde_text, &tilde_grid);
            match &ctx.out {
                Some(path) => {
                    write_text(&Some(path.clone()), &joint_text)?;
                    write_text(&Some(per_n_path(path)), &tilde_text)?;
                    eprintln!(
                        "wrote {} and {}",
                        path.display(),
                        per_n_path(path).display()
                    );
                    Ok(())
                }
                None => write_text(&None, &format!("{joint_text}{tilde_text}")),
            }
        }
        Format::Json => {
            let doc = serde_json::json!({
                "metadata": meta,
                "joint": table_rows_json(&joint),
                "per_n_normalized": table_rows_json(&tilde_grid),
            });
            write_text(&ctx.out, &format!("{:#}\n", doc))
        }
        Format::Svg => bail!("svg output is not defined for pnd tables; use csv or json"),
    }
}

pub fn fidelity_curve(ctx: &Ctx, args: &FidelityCurveArgs) -> Result<()> {
    let n_bar = grid(args.nbar_max, args.step);
    let curve = fockmix::metrics::fidelity_curve(&n_bar, args.phi, ctx.cutoff.max(40));
    let mut record = SeriesRecord::new("n_bar", n_bar);
    record.push_column("F_opt", curve.iter().map(|p| p.f_opt).collect());
    record.push_column("F_vacuum", curve.iter().map(|p| p.f_vacuum).collect());
    record.metadata = base_metadata(ctx, "fidelity-curve");
    record.meta("phi", args.phi);
    record.meta("nbar_max", args.nbar_max);
    record.meta("step", args.step);
    write_series(ctx, &record)
}

pub fn j3_curve(ctx: &Ctx, args: &J3CurveArgs) -> Result<()> {
    let n_bar = grid(args.nbar_max, args.step);
    let source = match args.source {
        SourceArg::Ecs => CurveSource::Ecs,
        SourceArg::Mixed => CurveSource::Mixed,
    };
    let settings = OptimizerSettings {
        restarts: args.restarts as usize,
        seed: ctx.seed,
        tol: args.tol,
        max_iters: args.max_iters as usize,
        ..Default::default()
    };
    let points = fockmix::nonlocality::j3_curve(&n_bar, source, &settings, ctx.cutoff_spec())?;

    let mut warnings = 0usize;
    let mut record = SeriesRecord::new("n_bar", n_bar);
    record.push_column("j3_min", points.iter().map(|p| p.minimum.value).collect());
    record.push_column("j3_max", points.iter().map(|p| p.maximum.value).collect());
    record.push_flag_column(
        "converged",
        points
            .iter()
            .map(|p| {
                let ok = p.minimum.converged && p.maximum.converged;
                if !ok {
                    warnings += 1;
                }
                ok.to_string()
            })
            .collect(),
    );
    record.metadata = base_metadata(ctx, "j3-curve");
    record.meta("source", format!("{:?}", args.source).to_lowercase());
    record.meta("restarts", args.restarts);
    record.meta("optimizer_tol", args.tol);
    record.meta("max_iters", args.max_iters);
    record.meta("phase_shift_mode_d", "pi/2");
    record.meta(
        "direction_note",
        "both extrema reported; the functional is evaluated verbatim with its single-mode term in mode c",
    );
    record.meta("warnings", warnings);
    if warnings > 0 {
        eprintln!("warning: {warnings} grid point(s) did not converge; see the converged column");
    }
    write_series(ctx, &record)
}

pub fn similarity_sweep(ctx: &Ctx, args: &SimilaritySweepArgs) -> Result<()> {
    let eta_c = args.eta;
    let eta_d = args.eta_d.unwrap_or(args.eta);
    let detectors = args.detectors as usize;
    let cfg = match (&args.weights_c, &args.weights_d) {
        (None, None) => DetectorConfig::new(detectors, eta_c, eta_d)?,
        (wc, wd) => {
            let uniform = vec![1.0 / detectors as f64; detectors];
            let wc = wc.as_deref().map(parse_weights).transpose()?.unwrap_or_else(|| uniform.clone());
            let wd = wd.as_deref().map(parse_weights).transpose()?.unwrap_or(uniform);
            DetectorConfig::with_weights(wc, wd, eta_c, eta_d)?
        }
    };
    let schedule = match args.fixed_nbar {
        Some(n_bar) => BetaSchedule::FixedMeanPhotons(n_bar),
        None => BetaSchedule::Linear { beta_start: 0.75, beta_end: 0.45, x_end: args.x_max },
    };
    let x = grid(args.x_max, args.step);
    let points =
        fockmix::detection::similarity_sweep(&x, schedule, &cfg, ctx.cutoff_spec())?;

    let mut record = SeriesRecord::new("x", x);
    record.push_column("similarity", points.iter().map(|p| p.similarity).collect());
    record.push_column("n_bar", points.iter().map(|p| p.n_bar).collect());
    record.push_column("beta", points.iter().map(|p| p.beta).collect());
    record.push_column("r", points.iter().map(|p| p.r).collect());
    record.metadata = base_metadata(ctx, "similarity-sweep");
    record.meta("eta_c", eta_c);
    record.meta("eta_d", eta_d);
    record.meta("detectors", detectors);
    record.meta(
        "beta_schedule",
        match schedule {
            BetaSchedule::Linear { beta_start, beta_end, x_end } => {
                format!("linear {beta_start}->{beta_end} over x in [0,{x_end}] (assumed schedule)")
            }
            BetaSchedule::FixedMeanPhotons(n) => format!("fixed n_bar = {n}"),
        },
    );
    record.meta("x_definition", "sinh(2r)/|alpha|^2 with |alpha|^2 = 2 beta^2");
    if ctx.format == Format::Svg {
        // a single-series plot reads better without the parameter columns
        let mut plot = SeriesRecord::new("x", record.x.clone());
        plot.push_column("similarity", points.iter().map(|p| p.similarity).collect());
        plot.metadata = record.metadata.clone();
        return write_series(ctx, &plot);
    }
    write_series(ctx, &record)
}

fn parse_weights(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .with_context(|| format!("bad weight `{tok}`"))
        })
        .collect()
}

pub fn click_sim(ctx: &Ctx, args: &ClickSimArgs) -> Result<()> {
    let detectors = args.detectors as usize;
    let uniform = vec![1.0 / detectors as f64; detectors];
    let wc = args.weights_c.as_deref().map(parse_weights).transpose()?.unwrap_or_else(|| uniform.clone());
    let wd = args.weights_d.as_deref().map(parse_weights).transpose()?.unwrap_or(uniform);
    let cfg = DetectorConfig::with_weights(wc.clone(), wd.clone(), 1.0, 1.0)?;

    let mode_doc = |mode: Mode, photons: usize, weights: &[f64], stream_tag: u64| {
        let model = click_distribution_mode(photons, &cfg, mode);
        let mc = monte_carlo_clicks(photons, weights, args.samples, ctx.seed ^ stream_tag);
        let tv: f64 = model.iter().zip(&mc).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        serde_json::json!({
            "photons": photons,
            "model": model,
            "monte_carlo": mc,
            "total_variation": tv,
        })
    };

    let doc = serde_json::json!({
        "metadata": base_metadata(ctx, "click-sim"),
        "detectors": detectors,
        "samples": args.samples,
        "mode_c": mode_doc(Mode::C, args.m, &wc, 0),
        "mode_d": mode_doc(Mode::D, args.n, &wd, 1),
    });
    write_text(&ctx.out, &format!("{:#}\n", doc))
}
