use mdheston::experiments::{self, Criterion, ExperimentOptions, Verdict};
use mdheston::heston::{limit_cgf, randomised_mgf};
use mdheston::laws::TailRegime;
use mdheston::num_complex::Complex;
use mdheston::oracles::{
    fourier_call, fourier_log_otm, implied_total_variance_from_log_otm, implied_vol, mc_estimate,
    simulate_paths,
};
use mdheston::rates::{thin_tail_constants, BoundaryCgf, MdpRegime, RateFunction};
use mdheston::sharp::{implied_var_expansion, FatTailConstants, RescalingG};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{config_err, NamedSpeed, RunConfig, Speed};
use crate::error::CliError;
use crate::table::{Cell, Document, Section};

/// A finished command: its table and the failures that decide the exit code.
pub struct Outcome {
    pub document: Document,
    pub failures: Vec<Value>,
}

fn flatten(prefix: &str, v: &Value, out: &mut Document) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Null => {
            out.header.insert(prefix.to_owned(), "unset".into());
        }
        other => {
            out.header.insert(prefix.to_owned(), other.to_string());
        }
    }
}

/// Header recording the command and every resolved setting.
pub fn header(command: &str, cfg: &RunConfig, jobs: usize) -> Document {
    let mut doc = Document::default();
    doc.header.insert("command".into(), command.into());
    doc.header
        .insert("version".into(), env!("CARGO_PKG_VERSION").into());
    doc.header.insert("jobs".into(), jobs.to_string());
    flatten(
        "",
        &serde_json::to_value(cfg).expect("config serialises"),
        &mut doc,
    );
    doc
}

fn grid(outer: &[f64], inner: &[f64]) -> Vec<(f64, f64)> {
    outer
        .iter()
        .flat_map(|&a| inner.iter().map(move |&b| (a, b)))
        .collect()
}

pub fn mgf(cfg: &RunConfig, mut doc: Document) -> Result<Outcome, CliError> {
    let (p, law) = (cfg.params()?, cfg.law()?);
    let rows: Vec<(Vec<Cell>, Option<Value>)> = grid(&cfg.t, &cfg.u)
        .into_par_iter()
        .map(
            |(t, u)| match randomised_mgf(&p, &law, t, Complex::new(u, 0.0)) {
                Ok(m) => (
                    vec![
                        t.into(),
                        u.into(),
                        m.re.into(),
                        m.im.into(),
                        1.0.into(),
                        "ok".into(),
                    ],
                    None,
                ),
                Err(e) => {
                    let fail = (!e.is_outside_domain())
                        .then(|| serde_json::json!({ "t": t, "u": u, "error": e.to_string() }));
                    (
                        vec![
                            t.into(),
                            u.into(),
                            f64::NAN.into(),
                            f64::NAN.into(),
                            0.0.into(),
                            e.to_string().into(),
                        ],
                        fail,
                    )
                }
            },
        )
        .collect();
    let mut s = Section::new("mgf", &["t", "u", "re", "im", "defined", "status"]);
    let mut failures = Vec::new();
    for (row, fail) in rows {
        s.push(row);
        failures.extend(fail);
    }
    doc.sections.push(s);
    Ok(Outcome {
        document: doc,
        failures,
    })
}

/// Resolves the configured speed for the law's tail class.
pub fn regime(cfg: &RunConfig) -> Result<MdpRegime<f64>, CliError> {
    let (p, law) = (cfg.params()?, cfg.law()?);
    let class = law.classify_tail();
    let gamma = match (cfg.regime.gamma, class) {
        (Some(Speed::Exponent(g)), _) => g,
        (Some(Speed::Named(NamedSpeed::Boundary)) | None, TailRegime::ThinTail { l1, l2 }) => {
            thin_tail_constants(l1, l2).map_err(config_err)?.gamma_hi
        }
        (Some(Speed::Named(NamedSpeed::Boundary)), other) => {
            return Err(CliError::Config(format!(
                "\"boundary\" speed needs a thin tail, law is {}",
                other.name()
            )))
        }
        (None, TailRegime::FatTail { .. }) => 0.5 - cfg.g.beta,
        (None, _) => 0.5,
    };
    MdpRegime::new(class, gamma, limit_cgf(&p)).map_err(config_err)
}

pub fn rate(cfg: &RunConfig, mut doc: Document) -> Result<Outcome, CliError> {
    let r = regime(cfg)?;
    doc.header
        .insert("regime.class".into(), r.law_class.name().into());
    doc.header
        .insert("regime.speed_exponent".into(), r.gamma.to_string());
    doc.header
        .insert("regime.alpha".into(), r.alpha.to_string());
    let speed = if matches!(r.law_class, TailRegime::FatTail { .. }) {
        "h(t) = t^gamma"
    } else {
        "t^gamma"
    };
    doc.header.insert("regime.speed".into(), speed.into());
    let mut s = Section::new(
        "rate",
        &["x", "rate", "maximiser", "duality_gap", "duality"],
    );
    let mut failures = Vec::new();
    for &x in &cfg.x {
        let row = match &r.rate {
            RateFunction::ThinConjugate(c, limit) => {
                match mdheston::rates::thin_tail_rate_hi(c, limit, x) {
                    Ok(conj) => {
                        let f = BoundaryCgf::new(c, *limit);
                        let gap = (conj.value + f.value(conj.maximiser) - conj.maximiser * x).abs();
                        let ok = gap <= 1e-8;
                        if !ok {
                            failures.push(serde_json::json!({ "x": x, "duality_gap": gap }));
                        }
                        vec![
                            x.into(),
                            conj.value.into(),
                            conj.maximiser.into(),
                            gap.into(),
                            if ok { "pass" } else { "fail" }.into(),
                        ]
                    }
                    Err(e) => {
                        failures.push(serde_json::json!({ "x": x, "error": e.to_string() }));
                        vec![
                            x.into(),
                            f64::NAN.into(),
                            f64::NAN.into(),
                            f64::NAN.into(),
                            e.to_string().into(),
                        ]
                    }
                }
            }
            _ => {
                let v = r.rate(x)?;
                vec![
                    x.into(),
                    v.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    "n/a".into(),
                ]
            }
        };
        s.push(row);
    }
    doc.sections.push(s);
    Ok(Outcome {
        document: doc,
        failures,
    })
}

pub fn price(cfg: &RunConfig, mut doc: Document) -> Result<Outcome, CliError> {
    let (p, law) = (cfg.params()?, cfg.law()?);
    let with_mc = cfg.mc.n_paths > 0;
    let mut cols = vec!["t", "k", "call", "call_error", "implied_vol", "status"];
    if with_mc {
        cols.extend(["mc", "mc_se", "z"]);
    }
    let mut s = Section::new("price", &cols);
    let mut failures = Vec::new();
    for (i, &t) in cfg.t.iter().enumerate() {
        let paths = if with_mc {
            let mc = mdheston::oracles::McConfig {
                seed: cfg.mc.seed.wrapping_add(i as u64),
                ..cfg.mc.to_config()
            };
            Some(simulate_paths(&p, &law, t, &mc)?)
        } else {
            None
        };
        let rows: Vec<_> = cfg
            .x
            .par_iter()
            .map(|&k| {
                let mut row: Vec<Cell> = vec![t.into(), k.into()];
                let mut fail = None;
                match fourier_call(&p, &law, t, k) {
                    Ok(c) => {
                        let vol = implied_vol(c.value, k, t).unwrap_or(f64::NAN);
                        row.extend([c.value.into(), c.error.into(), vol.into(), "ok".into()]);
                    }
                    Err(e) => {
                        fail = Some(serde_json::json!({ "t": t, "k": k, "error": e.to_string() }));
                        row.extend([
                            f64::NAN.into(),
                            f64::NAN.into(),
                            f64::NAN.into(),
                            e.to_string().into(),
                        ]);
                    }
                }
                if let Some(x) = &paths {
                    let strike = k.exp();
                    let est = mc_estimate(x, |v| (v.exp() - strike).max(0.0))
                        .expect("at least two paths");
                    let z = match &row[2] {
                        Cell::Num(c) => (est.value - c) / est.error,
                        Cell::Text(_) => f64::NAN,
                    };
                    row.extend([est.value.into(), est.error.into(), z.into()]);
                }
                (row, fail)
            })
            .collect();
        for (row, fail) in rows {
            s.push(row);
            failures.extend(fail);
        }
    }
    doc.sections.push(s);
    Ok(Outcome {
        document: doc,
        failures,
    })
}

type StrikeMap = Box<dyn Fn(f64, f64) -> f64 + Sync>;
/// `(t, x, σ²) ↦ (scaled σ², asymptote)`.
type AsymptoteMap = Box<dyn Fn(f64, f64, f64) -> (f64, f64) + Sync>;

pub fn impvol(cfg: &RunConfig, mut doc: Document) -> Result<Outcome, CliError> {
    let (p, law) = (cfg.params()?, cfg.law()?);
    let class = law.classify_tail();
    let g = RescalingG::new(cfg.g.beta).map_err(config_err)?;
    let alpha = cfg.impvol.alpha;
    // Strike map and asymptote per tail class.
    let (strike, asymptote): (StrikeMap, AsymptoteMap) = match class {
        TailRegime::FatTail { .. } => {
            let c = FatTailConstants::from_law(&law).map_err(config_err)?;
            doc.header.insert("impvol.strike".into(), "x g(t)".into());
            (
                Box::new(move |t, x| x * g.g(t)),
                Box::new(move |t, x, var| {
                    let e = implied_var_expansion(&c, &g, t, x).map_or(f64::NAN, |e| e.total);
                    (var, e)
                }),
            )
        }
        TailRegime::ThinTail { l1, l2 } => {
            let c = thin_tail_constants(l1, l2).map_err(config_err)?;
            for &x in &cfg.x {
                mdheston::rates::motm_implied_vol_limit(&c, alpha, x).map_err(config_err)?;
            }
            doc.header
                .insert("impvol.strike".into(), "x t^alpha".into());
            (
                Box::new(move |t: f64, x| x * t.powf(alpha)),
                Box::new(move |t: f64, x, var| {
                    let (gh, lim) = mdheston::rates::motm_implied_vol_limit(&c, alpha, x)
                        .expect("checked above");
                    (t.powf(gh) * var, lim)
                }),
            )
        }
        TailRegime::BoundedSupport { .. } => {
            doc.header
                .insert("impvol.strike".into(), "x t^alpha".into());
            (
                Box::new(move |t: f64, x| x * t.powf(alpha)),
                Box::new(|_, _, var| (var, f64::NAN)),
            )
        }
    };
    let rows: Vec<(Vec<Cell>, Option<Value>)> = grid(&cfg.t, &cfg.x)
        .into_par_iter()
        .map(|(t, x)| {
            let k = strike(t, x);
            match fourier_log_otm(&p, &law, t, k)
                .and_then(|l| implied_total_variance_from_log_otm(l.log_value, k))
            {
                Ok(w) => {
                    let (scaled, asym) = asymptote(t, x, w / t);
                    (
                        vec![
                            t.into(),
                            x.into(),
                            k.into(),
                            (w / t).into(),
                            scaled.into(),
                            asym.into(),
                            "ok".into(),
                        ],
                        None,
                    )
                }
                Err(e) => {
                    let fail = serde_json::json!({ "t": t, "x": x, "error": e.to_string() });
                    let nan = Cell::Num(f64::NAN);
                    (
                        vec![
                            t.into(),
                            x.into(),
                            k.into(),
                            nan.clone(),
                            nan.clone(),
                            nan,
                            e.to_string().into(),
                        ],
                        Some(fail),
                    )
                }
            }
        })
        .collect();
    let mut s = Section::new(
        "impvol",
        &[
            "t",
            "x",
            "k",
            "implied_variance",
            "scaled",
            "asymptote",
            "status",
        ],
    );
    let mut failures = Vec::new();
    for (row, fail) in rows {
        s.push(row);
        failures.extend(fail);
    }
    doc.sections.push(s);
    Ok(Outcome {
        document: doc,
        failures,
    })
}

pub fn verify(cfg: &RunConfig, mut doc: Document) -> Result<Outcome, CliError> {
    let criteria: Vec<Criterion> = if cfg.verify.criteria.is_empty() {
        Criterion::ALL.to_vec()
    } else {
        let mut c: Vec<_> = cfg
            .verify
            .criteria
            .iter()
            .filter_map(|s| Criterion::parse(s))
            .collect();
        c.sort();
        c.dedup();
        c
    };
    let opts = ExperimentOptions {
        params: cfg.params()?,
        seed: cfg.verify.seed,
        n_paths: cfg.verify.n_paths,
        n_steps: cfg.verify.n_steps,
    };
    let mut summary = Section::new(
        "verdicts",
        &["criterion", "name", "verdict", "summary", "oracle_failures"],
    );
    let mut failures = Vec::new();
    for c in criteria {
        let r = experiments::run(c, &opts)?;
        let mut s = Section::new(format!("criterion-{}-{}", c.number(), c.name()), &r.columns);
        for row in &r.rows {
            s.push(row.iter().map(|&v| Cell::Num(v)).collect());
        }
        doc.sections.push(s);
        if r.verdict != Verdict::Pass {
            failures.push(serde_json::json!({
                "criterion": c.number(),
                "name": c.name(),
                "verdict": r.verdict.as_str(),
                "summary": r.summary,
                "oracle_failures": r.failures,
            }));
        }
        summary.push(vec![
            f64::from(c.number()).into(),
            c.name().into(),
            r.verdict.as_str().into(),
            r.summary.clone().into(),
            r.failures.join("; ").into(),
        ]);
    }
    doc.sections.push(summary);
    Ok(Outcome {
        document: doc,
        failures,
    })
}
