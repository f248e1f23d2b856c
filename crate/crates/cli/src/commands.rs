use kamtree::lindstedt::{
    coefficient_rows, kernel_check, solve, OrderedCoefficients, SIGN_CONVENTION,
};
use kamtree::modes::WeightSequence;
use kamtree::ode::{validate_torus, Integrator, Validation};
use kamtree::renorm::{cancellation_report, check_counting_bound, CancellationRow, CountingReport};
use kamtree::smalldiv::{
    beta_sequence, bryuno_sum, calibrate, diophantine_check, measure_estimate, product_profile,
    scale_sequence, BetaSequence, BetaStar, Calibration, DiophantineOutcome, ScaleSequence, Scales,
};
use kamtree::torus::{
    empirical_radius, residual_spectrum, synthesize, threshold_estimates, Engine, Problem,
    SeriesSolution, ThresholdParams, Thresholds,
};
use kamtree::trees::{for_each_tree, lines, tree_orders};
use kamtree::Error;
use serde_json::{json, Value};

use crate::config::{Model, RunConfig};

/// A finished report, written only after every computation succeeded.
pub struct Report {
    pub name: String,
    pub body: String,
}

pub enum Failure {
    Config(String),
    Compute(Error),
    Acceptance(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Compute(Error::Domain(_) | Error::Parse { .. }) => 2,
            Failure::Compute(Error::Resonance(_) | Error::Truncation(_) | Error::Singular(_)) => 3,
            Failure::Compute(Error::Resource { .. }) => 4,
            Failure::Acceptance(_) => 5,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Config(m) => format!("config error: {m}"),
            Failure::Compute(e) => e.to_string(),
            Failure::Acceptance(failed) => format!("acceptance failed: {}", failed.join(", ")),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

pub struct Context {
    pub cfg: RunConfig,
    pub model: Model,
    header: Value,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Outcome<Self> {
        let model = cfg.model().map_err(Failure::Config)?;
        let header = serde_json::to_value(&cfg).expect("serializable");
        Ok(Context { cfg, model, header })
    }

    fn json(&self, name: &str, mut body: Value) -> Report {
        body["config"] = self.header.clone();
        Report {
            name: name.into(),
            body: serde_json::to_string_pretty(&body).expect("serializable") + "\n",
        }
    }

    fn csv(&self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Report {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in memory");
        for r in rows {
            w.write_record(&r).expect("in memory");
        }
        let table = String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8");
        Report {
            name: name.into(),
            body: format!("# config: {}\n{table}", self.header),
        }
    }

    fn beta(&self) -> Outcome<BetaSequence> {
        Ok(beta_sequence(
            &self.model.om,
            &self.model.w,
            self.cfg.m_max,
        )?)
    }

    fn ladder(&self, beta: &BetaSequence) -> ScaleSequence {
        let mut seq = scale_sequence(beta);
        if let Some(n) = self.cfg.n_max {
            seq.ms.truncate(n + 1);
        }
        seq
    }

    fn scales(&self) -> Outcome<Scales> {
        let beta = self.beta()?;
        Ok(Scales::new(&beta, &self.ladder(&beta)))
    }

    fn problem(&self) -> Outcome<Problem> {
        let m = &self.model;
        Ok(Problem::new(
            m.f.clone(),
            m.om.clone(),
            m.w.clone(),
            self.scales()?,
            self.cfg.s,
            self.cfg.s2,
        )?)
    }

    fn engine(&self) -> Engine {
        self.cfg.engine.parse().expect("validated")
    }
}

fn mode_text(m: &kamtree::modes::Mode) -> String {
    m.to_string()
}

/// Shortest round-trip form, with an exponent for very small or large values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn coefficient_table(
    ctx: &Context,
    name: &str,
    u: &OrderedCoefficients,
    w: &WeightSequence,
) -> Report {
    let rows = coefficient_rows(u, w)
        .into_iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                mode_text(&r.mode),
                r.j.to_string(),
                num(r.value.re),
                num(r.value.im),
            ]
        })
        .collect();
    ctx.csv(name, &["k", "mode", "j", "re", "im"], rows)
}

pub fn betaseq(ctx: &Context) -> Outcome<Vec<Report>> {
    let beta = ctx.beta()?;
    let seq = ctx.ladder(&beta);
    let rows = (0..=beta.m_max())
        .map(|m| {
            vec![
                m.to_string(),
                num(2f64.powi(m as i32)),
                num(beta.value(m)),
                beta.witness(m).map(mode_text).unwrap_or_default(),
            ]
        })
        .collect();
    let scales = json!({
        "ms": seq.ms,
        "betas": seq.ms.iter().map(|&m| beta.value(m)).collect::<Vec<_>>(),
        "truncated": seq.truncated,
    });
    Ok(vec![
        ctx.csv(
            "betaseq.csv",
            &["m", "two_pow_m", "beta", "witness_mode"],
            rows,
        ),
        ctx.json("scales.json", scales),
    ])
}

pub fn bryuno(ctx: &Context) -> Outcome<Vec<Report>> {
    let beta = ctx.beta()?;
    let b = bryuno_sum(&beta, ctx.cfg.m_max)?;
    Ok(vec![ctx.json(
        "bryuno.json",
        json!({"m_top": ctx.cfg.m_max, "value": b.value, "last_increment": b.last_increment}),
    )])
}

pub fn dioph(ctx: &Context) -> Outcome<Vec<Report>> {
    let p = ctx.cfg.diophantine();
    let out = diophantine_check(&ctx.model.om, &p, &ctx.model.w, ctx.cfg.dioph_n)?;
    let witness = match &out {
        DiophantineOutcome::Pass => Value::Null,
        DiophantineOutcome::Fail(m) => Value::String(mode_text(m)),
    };
    Ok(vec![ctx.json(
        "dioph.json",
        json!({"gamma": p.gamma, "mu1": p.mu1, "mu2": p.mu2, "N": ctx.cfg.dioph_n, "passed": out.passed(), "witness": witness}),
    )])
}

pub fn measure(ctx: &Context) -> Outcome<Vec<Report>> {
    let c = &ctx.cfg;
    let p = c.diophantine();
    let est = measure_estimate(&p, c.q, c.rho, &ctx.model.w, c.measure_n, c.samples, c.seed)?;
    Ok(vec![ctx.json(
        "measure.json",
        json!({
            "gamma": p.gamma, "mu1": p.mu1, "mu2": p.mu2, "q": c.q, "rho": c.rho, "N": c.measure_n,
            "samples": est.samples, "seed": c.seed, "passed": est.passed, "fraction": est.fraction,
        }),
    )])
}

pub struct Expansion {
    pub u: OrderedCoefficients,
    pub kernel_defects: Vec<f64>,
}

pub fn expansion(ctx: &Context) -> Outcome<Expansion> {
    let m = &ctx.model;
    let u = solve(&m.f, &m.om, &ctx.scales()?, ctx.cfg.k, None)?;
    let kernel_defects = (1..=ctx.cfg.k)
        .map(|k| kernel_check(&m.f, &u, k, None))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Expansion { u, kernel_defects })
}

pub fn expand(ctx: &Context) -> Outcome<Vec<Report>> {
    let e = expansion(ctx)?;
    let w = &ctx.model.w;
    let norms = e.u.norms(ctx.cfg.s, w)?;
    let reality: Vec<f64> = e.u.orders().iter().map(|o| o.hermitian_defect()).collect();
    Ok(vec![
        coefficient_table(ctx, "coefficients.csv", &e.u, w),
        ctx.json(
            "expand.json",
            json!({
                "K": ctx.cfg.k, "sign_convention": SIGN_CONVENTION, "per_order_norms": norms,
                "kernel_defects": e.kernel_defects, "hermitian_defects": reality,
            }),
        ),
    ])
}

pub struct TreeComparison {
    pub trees: OrderedCoefficients,
    pub relative: Vec<f64>,
    pub counting: CountingReport,
}

pub fn tree_comparison(ctx: &Context) -> Outcome<TreeComparison> {
    let m = &ctx.model;
    let scales = ctx.scales()?;
    let k = ctx.cfg.tree_k;
    let trees = tree_orders(k, &m.f, &m.om, &scales, ctx.cfg.tree_cap)?;
    let rec = solve(&m.f, &m.om, &scales, k, None)?;
    let relative = (1..=k)
        .map(|i| {
            let (a, b) = (trees.order(i), rec.order(i));
            let scale = b.sup().max(a.sup());
            if scale == 0.0 {
                0.0
            } else {
                a.distance(b) / scale
            }
        })
        .collect();
    let counting = check_counting_bound(ctx.cfg.counting_k, &m.f, &m.om, &m.w, &scales)?;
    Ok(TreeComparison {
        trees,
        relative,
        counting,
    })
}

fn dump_trees(ctx: &Context) -> Outcome<Report> {
    let m = &ctx.model;
    let scales = ctx.scales()?;
    let win = m.om.window();
    let mut rows = Vec::new();
    for_each_tree(ctx.cfg.dump_k, &m.f, &m.om, &scales, &mut |t, c| {
        let labels: Vec<String> = t.labels().iter().map(mode_text).collect();
        let ls: Vec<String> = lines(t, &m.om, &scales)?
            .iter()
            .map(|l| {
                let n = l.scale_number().map_or("-".to_string(), |n| n.to_string());
                format!("{}|{}|{}", l.momentum, num(l.divisor), n)
            })
            .collect();
        let root = t.label(0);
        let value: Vec<String> = win
            .indices()
            .map(|j| {
                let z = kamtree::Complex64::new(0.0, 1.0) * c * root.get(j) as f64;
                format!("{:?}{:+?}i", z.re, z.im)
            })
            .collect();
        rows.push(vec![
            t.shape().to_parens(),
            labels.join(" "),
            ls.join(" "),
            value.join(" "),
        ]);
        Ok(())
    })?;
    Ok(ctx.csv(
        "trees_dump.csv",
        &["shape", "labels", "lines", "value"],
        rows,
    ))
}

fn counting_json(c: &CountingReport) -> Value {
    json!({
        "k": c.k, "trees": c.trees, "clusters": c.clusters, "comparisons": c.comparisons,
        "violations": c.violations.len(), "min_slack": c.min_slack,
    })
}

pub fn trees(ctx: &Context, dump: bool) -> Outcome<Vec<Report>> {
    let cmp = tree_comparison(ctx)?;
    let mut out = vec![
        coefficient_table(ctx, "tree_coefficients.csv", &cmp.trees, &ctx.model.w),
        ctx.json(
            "trees.json",
            json!({"K": ctx.cfg.tree_k, "relative_difference": cmp.relative, "counting": counting_json(&cmp.counting)}),
        ),
    ];
    if dump {
        out.push(dump_trees(ctx)?);
    }
    Ok(out)
}

pub fn cancellations(ctx: &Context) -> Outcome<Vec<CancellationRow>> {
    let m = &ctx.model;
    Ok(cancellation_report(
        ctx.cfg.cancel_k,
        &m.f,
        &m.om,
        &ctx.scales()?,
        ctx.cfg.tree_cap,
    )?)
}

pub fn cancel(ctx: &Context) -> Outcome<Vec<Report>> {
    let rows = cancellations(ctx)?
        .iter()
        .map(|r| {
            let mut row = vec![r.k.to_string(), r.n.to_string()];
            row.extend(
                [
                    r.norm_m0,
                    r.norm_dm0,
                    r.raw_scale,
                    r.ratio0,
                    r.ratio1,
                    r.x,
                    r.norm_r,
                ]
                .map(num),
            );
            row
        })
        .collect();
    Ok(vec![ctx.csv(
        "cancel.csv",
        &[
            "k",
            "n",
            "norm_M0",
            "norm_dM0",
            "raw_scale",
            "ratio0",
            "ratio1",
            "x",
            "norm_R",
        ],
        rows,
    )])
}

pub fn threshold_data(ctx: &Context) -> Outcome<(Calibration, Thresholds)> {
    let c = &ctx.cfg;
    let w = &ctx.model.w;
    let profile = product_profile(w, c.n_cal, c.mu1, c.mu2, c.frontier_cap)?;
    let cal = calibrate(&profile, c.sigma, c.n_cal)?;
    let star = BetaStar::new(c.gamma, cal.k1, cal.k2, c.sigma)?;
    let beta = BetaSequence::analytic(star, c.m_max);
    let params = ThresholdParams {
        s: c.s,
        s2: c.s2,
        c0: c.c0,
        scaled: true,
    };
    Ok((cal, threshold_estimates(&ctx.model.f, w, &beta, params)?))
}

fn thresholds_json(cal: &Calibration, t: &Thresholds) -> Value {
    let scaled = t.scaled.as_ref().map(|s| {
        json!({"gamma": s.gamma, "n0": s.n0, "m_n0": s.m_n0, "ln_C0_prime": s.ln_c0_prime, "ln_eps1": s.ln_eps1, "ln_eps2": s.ln_eps2})
    });
    json!({
        "calibration": {"K1": cal.k1, "K2": cal.k2, "sigma": cal.sigma, "n_cal": cal.n_cal},
        "n0": t.n0, "m_n0": t.m_n0, "ln_beta_n0": t.ln_beta_n0, "tail": t.tail,
        "c0": t.c0, "c1": t.c1, "f_norm_2s": t.f_norm,
        "ln_C0": t.ln_c0, "ln_C0_prime": t.ln_c0_prime,
        "ln_eps1": t.ln_eps1, "ln_eps2": t.ln_eps2, "eps1": t.eps1(), "eps2": t.eps2(),
        "eps2_over_eps1": t.eps_ratio, "scaled": scaled,
    })
}

pub fn thresholds(ctx: &Context) -> Outcome<Vec<Report>> {
    let (cal, t) = threshold_data(ctx)?;
    let dioph = diophantine_check(
        &ctx.model.om,
        &ctx.cfg.diophantine(),
        &ctx.model.w,
        ctx.cfg.dioph_n,
    )?;
    let mut body = thresholds_json(&cal, &t);
    body["omega_diophantine"] = json!(dioph.passed());
    Ok(vec![ctx.json("thresholds.json", body)])
}

pub fn solutions(ctx: &Context) -> Outcome<Vec<SeriesSolution>> {
    let p = ctx.problem()?;
    let base = synthesize(
        &p,
        ctx.cfg.epsilons[0],
        ctx.cfg.k,
        ctx.engine(),
        ctx.cfg.tree_cap,
    )?;
    Ok(ctx
        .cfg
        .epsilons
        .iter()
        .map(|&e| base.with_epsilon(e))
        .collect())
}

pub fn synthesize_cmd(ctx: &Context) -> Outcome<Vec<Report>> {
    let sols = solutions(ctx)?;
    let thresholds = match threshold_data(ctx) {
        Ok((cal, t)) => thresholds_json(&cal, &t),
        Err(f) => json!({"error": f.message()}),
    };
    let mut runs = Vec::new();
    for sol in &sols {
        let residual = residual_spectrum(sol)?;
        runs.push(json!({
            "epsilon": sol.epsilon, "K": sol.order(), "engine": sol.engine.name(),
            "per_order_norms": sol.norms, "epsilon_hat": empirical_radius(&sol.norms).ok().flatten(),
            "residual_sup": residual.sup(sol.epsilon), "solved_order_defect": residual.solved_defect(),
            "thresholds": thresholds,
        }));
    }
    Ok(vec![
        coefficient_table(ctx, "coefficients.csv", &sols[0].coefficients, &ctx.model.w),
        ctx.json("synthesize.json", json!({ "runs": runs })),
    ])
}

pub fn integrator(cfg: &RunConfig) -> Integrator {
    Integrator {
        dt: cfg.dt,
        t_end: cfg.t_end,
        stride: cfg.stride,
    }
}

pub fn validations(ctx: &Context) -> Outcome<Vec<(f64, Validation)>> {
    let cfg = integrator(&ctx.cfg);
    solutions(ctx)?
        .iter()
        .map(|s| Ok((s.epsilon, validate_torus(s, cfg)?)))
        .collect()
}

pub fn validate(ctx: &Context) -> Outcome<Vec<Report>> {
    let runs = validations(ctx)?;
    let mut out = Vec::new();
    let mut summary = Vec::new();
    for (i, (eps, v)) in runs.iter().enumerate() {
        summary.push(
            json!({"epsilon": eps, "sup_error": v.sup_error, "energy_drift": v.energy_drift}),
        );
        let rows = v
            .rows
            .iter()
            .map(|r| vec![num(r.t), num(r.error), num(r.energy)])
            .collect();
        out.push(ctx.csv(
            &format!("validate_{i}.csv"),
            &["t", "error", "energy"],
            rows,
        ));
    }
    out.push(ctx.json("validate.json", json!({ "runs": summary })));
    Ok(out)
}

/// One pass/fail line of the `all` pipeline.
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs every command and checks the configured problem against the
/// acceptance tolerances.
pub fn all(ctx: &Context) -> Outcome<(Vec<Report>, Vec<Check>)> {
    let mut reports = Vec::new();
    for part in [
        betaseq(ctx)?,
        bryuno(ctx)?,
        dioph(ctx)?,
        measure(ctx)?,
        expand(ctx)?,
        trees(ctx, false)?,
        cancel(ctx)?,
    ] {
        reports.extend(part);
    }
    reports.extend(thresholds(ctx)?);
    reports.extend(synthesize_cmd(ctx)?);
    reports.extend(validate(ctx)?);

    let mut checks = Vec::new();
    let cmp = tree_comparison(ctx)?;
    let worst = cmp.relative.iter().copied().fold(0.0, f64::max);
    checks.push(Check {
        name: "oracle_equivalence",
        passed: worst <= 1e-10,
        detail: format!("max relative difference {worst:e}"),
    });

    let sols = solutions(ctx)?;
    let e = sols[0].epsilon;
    let short = synthesize(
        &ctx.problem()?,
        e,
        ctx.cfg.residual_k,
        ctx.engine(),
        ctx.cfg.tree_cap,
    )?;
    let residual = residual_spectrum(&short)?;
    let ratio = residual.sup(2.0 * e) / residual.sup(e);
    let k = short.order() as f64;
    checks.push(Check {
        name: "residual_order",
        passed: ratio >= 2f64.powf(k + 0.5) && residual.solved_defect() <= 1e-12,
        detail: format!("ratio {ratio}, defect {:e}", residual.solved_defect()),
    });

    let vals = validations(ctx)?;
    let sup = vals.iter().map(|(_, v)| v.sup_error).fold(0.0, f64::max);
    checks.push(Check {
        name: "ode_validation",
        passed: sup <= 1e-6,
        detail: format!("sup error {sup:e}"),
    });

    let rows = cancellations(ctx)?;
    let (r0, r1) = rows.iter().fold((0.0f64, 0.0f64), |(a, b), r| {
        (a.max(r.ratio0), b.max(r.ratio1))
    });
    checks.push(Check {
        name: "cancellations",
        passed: r0 <= 1e-10 && r1 <= 1e-9,
        detail: format!("max ratio0 {r0:e}, max ratio1 {r1:e}"),
    });
    checks.push(Check {
        name: "counting_bound",
        passed: cmp.counting.violations.is_empty(),
        detail: format!(
            "{} trees, {} violations",
            cmp.counting.trees,
            cmp.counting.violations.len()
        ),
    });

    let kernel = expansion(ctx)?
        .kernel_defects
        .iter()
        .copied()
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "kernel_identity",
        passed: kernel <= 1e-12,
        detail: format!("max defect {kernel:e}"),
    });

    let (_, t) = threshold_data(ctx)?;
    let hat = empirical_radius(&sols[0].norms).ok().flatten();
    let ok_ratio =
        (t.eps2() / t.eps1() - (ctx.cfg.s - ctx.cfg.s2) / (ctx.cfg.s - ctx.cfg.s2 + 2.0)).abs()
            <= 1e-14;
    checks.push(Check {
        name: "thresholds",
        passed: hat.is_some_and(|h| h.ln() >= t.ln_eps1) && ok_ratio,
        detail: format!("epsilon_hat {hat:?}, ln eps1 {}", t.ln_eps1),
    });

    let summary: Vec<Value> = checks
        .iter()
        .map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail}))
        .collect();
    reports.push(ctx.json("acceptance.json", json!({ "checks": summary })));
    Ok((reports, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kinds() {
        assert_eq!(Failure::Config("x".into()).exit_code(), 2);
        assert_eq!(
            Failure::Compute(Error::Truncation("x".into())).exit_code(),
            3
        );
        assert_eq!(
            Failure::Compute(Error::Resonance(kamtree::modes::Mode::zero())).exit_code(),
            3
        );
        assert_eq!(
            Failure::Compute(Error::Resource {
                what: "x".into(),
                limit: 1
            })
            .exit_code(),
            4
        );
        assert_eq!(Failure::Acceptance(vec![]).exit_code(), 5);
    }
}
