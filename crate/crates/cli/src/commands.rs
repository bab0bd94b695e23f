use moebius_core::averages::{
    dkbsz_correlation, hopf_ratio, orbit_values, weighted_average, AverageSeries,
};
use moebius_core::numtheory::{sieve, twisted_sum_scan, write_mobius_cache};
use moebius_core::spectral::{
    divergence_residue, dkbsz_bound, evaluate_density, hellinger, klemes_reinhold_check,
    mj_sequence, peyriere_diagnostics, product_coeffs, riesz_factors, Dilated, RieszFactor,
    RieszProduct,
};
use moebius_core::symbolic::{
    build_blocks, cylinder_measure, is_infinite, periodicity_report, InfinityVerdict,
    PeriodicityStatus,
};
use moebius_core::{Error, Result};
use num_bigint::BigInt;
use num_complex::Complex;

use crate::config::{CommandKind, ExperimentConfig, Violation};
use crate::report::{float, Report, Table};

/// Runs a validated configuration.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let cmd = cfg.command.expect("validated configuration has a command");
    let mut report = Report::new(cmd.name(), cfg.to_toml());
    match cmd {
        CommandKind::Sieve => sieve_cmd(cfg, &mut report)?,
        CommandKind::Words => words(cfg, &mut report)?,
        CommandKind::Measure => measure(cfg, &mut report)?,
        CommandKind::Avg | CommandKind::Hopf | CommandKind::Dkbsz => {
            averages(cmd, cfg, &mut report)?
        }
        CommandKind::Spectra => spectra(cfg, &mut report)?,
        CommandKind::Hellinger => hellinger_cmd(cfg, &mut report)?,
        CommandKind::Klemes => klemes(cfg, &mut report)?,
        CommandKind::Peyriere => peyriere(cfg, &mut report)?,
        CommandKind::Divergence => divergence(cfg, &mut report)?,
    }
    Ok(report)
}

// validation has already succeeded, so these only unwrap
fn checked<T>(r: std::result::Result<T, Violation>) -> Result<T> {
    r.map_err(|v| Error::InvalidArgument(format!("{}: {}", v.field, v.reason)))
}

fn sieve_cmd(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let limit = cfg.limit.unwrap();
    let checkpoints = cfg.checkpoints.clone().unwrap();
    let table = sieve(limit)?;
    if let Some(path) = &cfg.cache {
        write_mobius_cache(&table, path)?;
    }
    let mut csv = Table::new("mertens", &["N", "mertens"]);
    for &n in &checkpoints {
        let m = table.mertens(n as usize);
        report.int(format!("mertens[{n}]"), m);
        csv.row(vec![n.to_string(), m.to_string()]);
    }
    report.int("squarefree_count", table.squarefree_count());
    report.float(
        "squarefree_density",
        table.squarefree_count() as f64 / limit as f64,
    );
    report.float(
        "mertens_ratio",
        table.mertens(limit).unsigned_abs() as f64 / limit as f64,
    );
    report.table(csv);
    if let Some(grid) = cfg.grid {
        let scan = twisted_sum_scan::<f64>(&table, &checkpoints, grid)?;
        let mut csv = Table::new("twisted", &["N", "supremum", "argmax_t"]);
        for ((n, sup), t) in checkpoints.iter().zip(&scan.supremum).zip(&scan.argmax_t) {
            csv.row(vec![n.to_string(), float(*sup), float(*t)]);
        }
        report.floats("twisted_supremum", &scan.supremum);
        if let Some(s) = scan.loglog_slope {
            report.float("twisted_loglog_slope", s);
        }
        report.table(csv);
    }
    Ok(())
}

fn words(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let params = checked(cfg.rank_one())?;
    let blocks = build_blocks(&params, cfg.stages.unwrap(), cfg.length_cap.unwrap())?;
    let mut csv = Table::new(
        "blocks",
        &["stage", "height", "zeros", "ones", "materialized"],
    );
    for b in &blocks {
        csv.row(vec![
            b.stage.to_string(),
            b.height.to_string(),
            b.zeros.to_string(),
            b.ones.to_string(),
            b.word.is_some().to_string(),
        ]);
    }
    report.ints(
        "heights",
        &blocks.iter().map(|b| &b.height).collect::<Vec<_>>(),
    );
    report.ints(
        "zeros",
        &blocks.iter().map(|b| &b.zeros).collect::<Vec<_>>(),
    );
    report.int(
        "materialized_stages",
        blocks.iter().filter(|b| b.word.is_some()).count(),
    );
    report.table(csv);
    if cfg.dump_words == Some(true) {
        let mut dump = Table::new("words", &["stage", "word"]);
        for b in &blocks {
            if let Some(w) = &b.word {
                dump.row(vec![b.stage.to_string(), w.to_string()]);
            }
        }
        report.table(dump);
    }
    Ok(())
}

fn measure(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let params = checked(cfg.rank_one())?;
    let stages = cfg.stages.unwrap();
    let cap = cfg.length_cap.unwrap();
    let word = cfg.word.as_deref().unwrap();
    let series = cylinder_measure(&params, word, stages, cap)?;
    let mut csv = Table::new("measure", &["stage", "occurrences", "zeros", "value"]);
    for pt in &series.points {
        csv.row(vec![
            pt.stage.to_string(),
            pt.occurrences.to_string(),
            pt.zeros.to_string(),
            float(pt.value),
        ]);
    }
    report.text("word", word);
    report.int("last_stage", series.points.last().map_or(0, |p| p.stage));
    report.float("estimate", series.estimate());
    report.table(csv);

    let inf = is_infinite(&params, stages, cfg.threshold.unwrap())?;
    report.text(
        "spacer_mass",
        match inf.verdict {
            InfinityVerdict::InfiniteSuspected => "infinite-suspected",
            InfinityVerdict::FiniteSuspected => "finite-suspected",
        },
    );
    report.float("spacer_ratio", inf.curve.last().unwrap().value);

    let max_period = cfg.max_period.unwrap();
    let depth = blocks_depth(&params, stages, cap)?.max(max_period + 1);
    let per = periodicity_report(&params, depth, max_period, cap.max(depth))?;
    report.int("periodicity_depth", per.depth);
    match per.status {
        PeriodicityStatus::AperiodicityWitnessed => report.text("periodicity", "aperiodic"),
        PeriodicityStatus::PeriodicUpToDepth { period } => {
            report.text("periodicity", "periodic-up-to-depth");
            report.int("period", period);
        }
    }
    Ok(())
}

/// Length of the deepest materializable block W_n, n ≤ stages.
fn blocks_depth(
    params: &moebius_core::symbolic::RankOneParams,
    stages: usize,
    cap: usize,
) -> Result<usize> {
    let blocks = build_blocks(params, stages, cap)?;
    Ok(blocks
        .iter()
        .filter_map(|b| b.word.as_ref().map(|w| w.len()))
        .max()
        .unwrap_or(1))
}

fn average_rows(csv: &mut Table, s: &AverageSeries<f64>, model: &str, observable: &str) {
    for (n, v) in s.checkpoints.iter().zip(&s.values) {
        csv.row(vec![
            n.to_string(),
            float(*v),
            s.weight.to_string(),
            model.to_string(),
            observable.to_string(),
        ]);
    }
}

fn averages(cmd: CommandKind, cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let model = checked(cfg.model())?;
    let f = checked(cfg.observable())?;
    let checkpoints = cfg.checkpoints.clone().unwrap();
    let (model_name, f_name) = (model.to_string(), f.to_string());
    let mut csv = Table::new("averages", &["N", "value", "weight", "model", "observable"]);
    report.text("model", &model_name);
    report.text("observable", &f_name);
    match cmd {
        CommandKind::Avg => {
            let s = weighted_average(&model, &f, &checkpoints, checked(cfg.weight())?)?;
            report.floats("values", &s.values);
            average_rows(&mut csv, &s, &model_name, &f_name);
        }
        CommandKind::Hopf => {
            let p = checked(cfg.density_observable())?;
            let h = hopf_ratio(&model, &f, &p, &checkpoints, checked(cfg.weight())?, None)?;
            report.text("density", &p.to_string());
            report.floats("values", &h.series.values);
            average_rows(&mut csv, &h.series, &model_name, &f_name);
        }
        CommandKind::Dkbsz => {
            let (p, q) = (cfg.p.unwrap(), cfg.q.unwrap());
            let s = dkbsz_correlation(&model, &f, p, q, &checkpoints)?;
            report.floats("values", &s.values);
            average_rows(&mut csv, &s, &model_name, &f_name);
            if let Some(grid) = cfg.grid {
                let n_max = *checkpoints.last().unwrap() as usize;
                let values = orbit_values(&model, &f, n_max)?;
                let mut bounds = Table::new(
                    "bound",
                    &["N", "n_tilde", "lhs", "affinity", "rhs", "holds"],
                );
                let mut affinities = Vec::new();
                let mut all_hold = true;
                for &n in &checkpoints {
                    let b = dkbsz_bound(&values, p, q, n as usize, grid)?;
                    bounds.row(vec![
                        n.to_string(),
                        b.n_tilde.to_string(),
                        float(b.lhs),
                        float(b.affinity),
                        float(b.rhs),
                        b.holds.to_string(),
                    ]);
                    affinities.push(b.affinity);
                    all_hold &= b.holds;
                    if n as usize == n_max {
                        report.float("lhs", b.lhs);
                        report.float("rhs", b.rhs);
                        report.int("n_tilde", b.n_tilde);
                    }
                }
                report.floats("affinity_series", &affinities);
                report.int("holds", all_hold);
                report.table(bounds);
            }
        }
        _ => unreachable!("not an orbit command"),
    }
    report.table(csv);
    Ok(())
}

fn stage_range(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn spectra(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let params = checked(cfg.rank_one())?;
    let budget = checked(ExperimentConfig::budget())?;
    let grid = cfg.grid.unwrap();
    let factors = riesz_factors(&params, &stage_range(cfg.stages.unwrap()))?;
    let coeffs = product_coeffs::<f64>(&factors, budget)?;
    let density = evaluate_density::<f64>(&factors, grid)?;
    let mut c = Table::new("coefficients", &["freq", "re", "im"]);
    for &(f, z) in coeffs.entries() {
        c.row(vec![f.to_string(), float(z.re), float(z.im)]);
    }
    let mut d = Table::new("density", &["t", "value"]);
    for (k, &v) in density.samples().iter().enumerate() {
        d.row(vec![float(density.t(k)), float(v)]);
    }
    report.int("coefficients", coeffs.len());
    report.int("max_frequency", coeffs.max_frequency());
    report.float("c0", coeffs.get(0).re);
    report.float("grid_mean", density.mean());
    report.float("hermitian_defect", coeffs.hermitian_defect());
    report.int("grid_exact", grid as u64 > 2 * coeffs.max_frequency());
    report.table(c);
    report.table(d);
    Ok(())
}

fn dilated(factors: &[RieszFactor], m: u64) -> Vec<RieszFactor> {
    factors.iter().map(|f| f.dilate(m)).collect()
}

fn hellinger_cmd(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let params = checked(cfg.rank_one())?;
    let (p, q, grid) = (cfg.p.unwrap(), cfg.q.unwrap(), cfg.grid.unwrap());
    let factors = riesz_factors(&params, &stage_range(cfg.stages.unwrap()))?;
    let mut csv = Table::new("hellinger", &["stages", "value"]);
    let mut series = Vec::new();
    for k in 1..=factors.len() {
        let a = evaluate_density::<f64>(&dilated(&factors[..k], p), grid)?;
        let b = evaluate_density::<f64>(&dilated(&factors[..k], q), grid)?;
        let h = hellinger(&a, &b)?;
        csv.row(vec![k.to_string(), float(h)]);
        series.push(h);
    }
    let top: BigInt = factors
        .iter()
        .map(|f| BigInt::from(f.exponents.last().unwrap().clone()))
        .sum();
    report.float("hellinger", *series.last().unwrap());
    report.floats("series", &series);
    report.int("grid_exact", BigInt::from(grid) > top * 2 * p.max(q));
    report.table(csv);
    Ok(())
}

fn cplx(z: Complex<f64>) -> [String; 2] {
    [float(z.re), float(z.im)]
}

fn opt_cplx(z: Option<Complex<f64>>) -> [String; 2] {
    z.map_or_else(|| [String::new(), String::new()], cplx)
}

fn klemes(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let params = checked(cfg.rank_one())?;
    let plan = checked(cfg.plan())?;
    let budget = checked(ExperimentConfig::budget())?;
    let table = klemes_reinhold_check::<f64>(&params, &plan, checked(cfg.reading())?, budget)?;
    report.ints("m", &table.m);
    report.int("deepest", table.deepest);
    let mut csv = Table::new(
        "klemes",
        &[
            "j",
            "K",
            "m_j",
            "alpha_re",
            "alpha_im",
            "alpha_neg_re",
            "alpha_neg_im",
            "predicted",
            "sum_re",
            "sum_im",
            "product_re",
            "product_im",
            "increment",
        ],
    );
    for r in &table.records {
        let [a_re, a_im] = cplx(r.coeff);
        let [n_re, n_im] = cplx(r.coeff_neg);
        let [s_re, s_im] = opt_cplx(r.coeff_sum);
        let [p_re, p_im] = opt_cplx(r.product);
        let inc = r.increment.map(float).unwrap_or_default();
        csv.row(vec![
            r.j.to_string(),
            r.truncation.to_string(),
            r.m_j.to_string(),
            a_re.clone(),
            a_im.clone(),
            n_re,
            n_im,
            float(r.predicted),
            s_re.clone(),
            s_im,
            p_re.clone(),
            p_im,
            inc.clone(),
        ]);
        let mut fields = vec![
            ("j", r.j.to_string()),
            ("K", r.truncation.to_string()),
            ("m_j", r.m_j.to_string()),
            ("alpha", a_re),
            ("predicted", float(r.predicted)),
        ];
        if r.coeff_sum.is_some() {
            fields.push(("alpha_sum", s_re));
            fields.push(("alpha_product", p_re));
        }
        if r.increment.is_some() {
            fields.push(("increment", inc));
        }
        report.record(fields);
    }
    report.table(csv);
    Ok(())
}

fn peyriere(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let params = checked(cfg.rank_one())?;
    let plan = checked(cfg.plan())?;
    let (p, q) = (cfg.p.unwrap(), cfg.q.unwrap());
    let truncation = cfg.truncation.unwrap();
    let m = mj_sequence(&params, &plan, checked(cfg.reading())?)?;
    let factors = riesz_factors(&params, plan.indices())?;
    let alpha = RieszProduct::<f64>::new(&factors);
    let (a, b) = (Dilated::new(&alpha, p)?, Dilated::new(&alpha, q)?);
    let freqs: Vec<BigInt> = m.iter().map(|x| x * p).collect();
    let s = peyriere_diagnostics(&a, &b, &freqs, truncation.min(freqs.len()))?;
    let mut csv = Table::new("peyriere", &["J", "br1_a", "br1_b", "br2"]);
    for j in 0..s.br2.len() {
        csv.row(vec![
            (j + 1).to_string(),
            float(s.br1_a[j]),
            float(s.br1_b[j]),
            float(s.br2[j]),
        ]);
    }
    let n = s.br2.len() as f64;
    let slope = if s.br2.len() >= 2 {
        let mx = (n + 1.0) / 2.0;
        let my = s.br2.iter().sum::<f64>() / n;
        let num: f64 = s
            .br2
            .iter()
            .enumerate()
            .map(|(i, y)| (i as f64 + 1.0 - mx) * (y - my))
            .sum();
        let den: f64 = (1..=s.br2.len()).map(|i| (i as f64 - mx).powi(2)).sum();
        num / den
    } else {
        f64::NAN
    };
    let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    report.float("br2_slope", slope);
    report.float("br2_last", *s.br2.last().unwrap());
    report.float("br1_a_sup", sup(&s.br1_a));
    report.float("br1_b_sup", sup(&s.br1_b));
    report.table(csv);
    Ok(())
}

fn divergence(cfg: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let params = checked(cfg.rank_one())?;
    let r = divergence_residue::<f64>(&params, cfg.modulus.unwrap(), cfg.horizon.unwrap())?;
    let mut csv = Table::new("divergence", &["residue", "sum"]);
    for (i, &v) in r.sums.iter().enumerate() {
        csv.row(vec![i.to_string(), float(v)]);
    }
    report.floats("sums", &r.sums);
    report.int("best", r.best);
    report.table(csv);
    Ok(())
}
