use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use orthosig::esig::{Cached, Fawcett};
use orthosig::expansion::{fit_expansion, metrics, ols_fit};
use orthosig::experiments::{
    black_scholes, horizon_of, ito_basis_for, orthcheck, records_csv, records_json, sde_compare,
    BlackScholes, SdeCompare, TEST_SEED_OFFSET,
};
use orthosig::naturality::{audit, report_json};
use orthosig::ortho::{ito_orthogonal_basis, lift_basis, OrthoBasis};
use orthosig::path::{ito_features, sample_paths, strat_features, PathBatch, PathSpec};
use orthosig::poly::fmt_rational;
use orthosig::recurrence::{
    block_orth_polys, commutativity_residual, jacobi_truncation, rank_audit, recurrence_matrices,
    GradedFrame,
};
use orthosig::word::w;

#[derive(Parser, Serialize)]
#[command(
    name = "orthosig",
    version,
    about = "Orthogonal signature polynomials for Brownian motion"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Serialize)]
struct Common {
    /// Number of Brownian letters.
    #[arg(long, global = true, default_value_t = 2)]
    d: usize,
    #[arg(long, global = true, default_value_t = 100)]
    steps: usize,
    #[arg(long, global = true, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, global = true, default_value_t = true, action = clap::ArgAction::Set)]
    augment_time: bool,
    /// Truncation level.
    #[arg(long, global = true, default_value_t = 3)]
    max_degree: usize,
    #[arg(long, global = true, default_value_t = 0.0)]
    ridge: f64,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Target {
    /// B¹_T
    Terminal,
    /// (B¹_T)²
    Square,
    /// Lévy area of letters 1 and 2
    Area,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Cmd {
    /// Itô orthogonal basis up to tensor degree --max-degree, with squared norms.
    Basis {
        /// Lift binary patterns to the --d letters.
        #[arg(long)]
        lift: bool,
    },
    /// Correlations of Stratonovich, Itô and orthogonalised features.
    Orthcheck,
    /// Orthogonal expansion of a path functional.
    Expand {
        #[arg(long, value_enum, default_value_t = Target::Square)]
        target: Target,
        #[arg(long)]
        test_paths: Option<usize>,
    },
    /// Least squares on the Stratonovich signature.
    Regress {
        #[arg(long, value_enum, default_value_t = Target::Square)]
        target: Target,
        #[arg(long)]
        test_paths: Option<usize>,
    },
    /// Taylor against orthogonal expansion for random linear SDEs.
    SdeCompare {
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 2)]
        state_dim: usize,
        #[arg(long)]
        test_paths: Option<usize>,
    },
    /// Call and lookback payoffs under Black-Scholes.
    Bs {
        #[arg(long, default_value_t = 0.2)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        s0: f64,
        #[arg(long, default_value_t = 1.0)]
        strike: f64,
        #[arg(long)]
        test_paths: Option<usize>,
    },
    /// Rank audit of the pairing ansatz for a natural orthogonalisation.
    Naturality {
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long)]
        noncrossing: bool,
    },
    /// Exact checks of the multivariate three-term recurrence.
    Recurrence,
}

struct Output {
    csv: String,
    json: Value,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let out = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let config = serde_json::to_value(&cli).expect("config serializes");
    let text = match cli.common.format {
        Format::Csv => format!("# config: {config}\n{}", out.csv),
        Format::Json => {
            let mut obj = json!({ "config": config });
            obj["result"] = out.json;
            format!("{}\n", serde_json::to_string_pretty(&obj).expect("json"))
        }
    };
    match &cli.common.out {
        Some(p) => {
            if let Err(e) = fs::write(p, text) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    if out.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn spec(c: &Common, paths: usize, seed: u64) -> PathSpec {
    PathSpec {
        d: c.d,
        augment_time: c.augment_time,
        horizon: c.horizon,
        steps: c.steps,
        paths,
        seed,
    }
}

fn run(cli: &Cli) -> orthosig::Result<Output> {
    let c = &cli.common;
    match &cli.cmd {
        Cmd::Basis { lift } => basis(c, *lift),
        Cmd::Orthcheck => {
            let oc = orthcheck(&spec(c, c.paths, c.seed), c.max_degree)?;
            let gram: Vec<Value> = oc
                .gram
                .iter()
                .map(|g| {
                    json!({"u": g.u.key(), "v": g.v.key(), "estimate": g.estimate,
                           "std_err": g.std_err, "exact": g.exact})
                })
                .collect();
            let mat = |k: &orthosig::experiments::Correlation| json!({"words": k.words.iter().map(|w| w.key()).collect::<Vec<_>>(), "rho": k.rho});
            Ok(Output {
                csv: oc.to_csv(),
                json: json!({
                    "stratonovich": mat(&oc.stratonovich),
                    "ito": mat(&oc.ito),
                    "orthogonal": mat(&oc.orthogonal),
                    "max_off_diagonal": {
                        "stratonovich": oc.stratonovich.max_off_diagonal(),
                        "ito": oc.ito.max_off_diagonal(),
                        "orthogonal": oc.orthogonal.max_off_diagonal(),
                    },
                    "gram": gram,
                }),
                ok: true,
            })
        }
        Cmd::Expand { target, test_paths } | Cmd::Regress { target, test_paths } => {
            let expand = matches!(cli.cmd, Cmd::Expand { .. });
            fit(c, *target, test_paths.unwrap_or(c.paths), expand)
        }
        Cmd::SdeCompare {
            seeds,
            state_dim,
            test_paths,
        } => {
            let cfg = SdeCompare {
                d: c.d,
                state_dim: *state_dim,
                steps: c.steps,
                train_paths: c.paths,
                test_paths: test_paths.unwrap_or(c.paths),
                seeds: (c.seed..c.seed + seeds).collect(),
                max_level: c.max_degree,
                horizon: c.horizon,
            };
            records(sde_compare(&cfg)?)
        }
        Cmd::Bs {
            sigma,
            mu,
            s0,
            strike,
            test_paths,
        } => {
            let cfg = BlackScholes {
                sigma: *sigma,
                mu: *mu,
                s0: *s0,
                strike: *strike,
                horizon: c.horizon,
                steps: c.steps,
                train_paths: c.paths,
                test_paths: test_paths.unwrap_or(c.paths),
                seed: c.seed,
                max_level: c.max_degree,
                ridge: c.ridge,
            };
            records(black_scholes(&cfg)?)
        }
        Cmd::Naturality {
            degree,
            noncrossing,
        } => {
            let (sys, rep) = audit(*degree, *noncrossing)?;
            let mut csv = String::from("kind,key,value\n");
            csv += &format!(
                "rank,rank_A,{}\nrank,rank_aug,{}\n",
                rep.rank_a, rep.rank_aug
            );
            csv += &format!("rank,consistent,{}\n", rep.consistent);
            if let Some(x) = &rep.solution {
                for (p, v) in sys.vars.iter().zip(x) {
                    csv += &format!("solution,{p},{}\n", fmt_rational(v));
                }
            }
            if let Some(cert) = &rep.certificate {
                for (r, wgt) in cert.rows.iter().zip(&cert.weights) {
                    let e = &sys.equations[*r];
                    csv += &format!(
                        "certificate,k={} {},{}\n",
                        e.test_length,
                        e.monomial,
                        fmt_rational(wgt)
                    );
                }
            }
            Ok(Output {
                csv,
                json: report_json(&sys, &rep),
                ok: true,
            })
        }
        Cmd::Recurrence => recurrence(c),
    }
}

fn basis(c: &Common, lift: bool) -> orthosig::Result<Output> {
    let t = horizon_of(&spec(c, 1, 0))?;
    // Every word of tensor degree n has weighted degree at most 2n.
    let binary = ito_orthogonal_basis(2 * c.max_degree, &t);
    let full = if lift {
        lift_basis(&binary, c.d)?
    } else {
        binary
    };
    let basis = OrthoBasis {
        entries: full
            .entries
            .into_iter()
            .filter(|e| e.key.tensor_degree() <= c.max_degree)
            .collect(),
        ..full
    };
    let mut csv = String::from("word,polynomial,sq_norm\n");
    let mut rows = Vec::new();
    for e in &basis.entries {
        let key = if e.key.is_empty() {
            "∅".to_string()
        } else {
            e.key.key()
        };
        csv += &format!("{key},{},{}\n", e.poly, fmt_rational(&e.sq_norm));
        rows.push(format!("{key} → {}", e.poly));
    }
    Ok(Output {
        csv,
        json: json!({"basis": basis.to_json(), "table": rows}),
        ok: true,
    })
}

fn target_values(batch: &PathBatch, target: Target) -> orthosig::Result<Vec<f64>> {
    if matches!(target, Target::Area) && batch.spec().d < 2 {
        return Err(orthosig::Error::InvalidConfig(
            "area target needs --d 2 or more".into(),
        ));
    }
    Ok((0..batch.len())
        .map(|i| match target {
            Target::Terminal => batch.terminal(i, 1),
            Target::Square => batch.terminal(i, 1).powi(2),
            Target::Area => {
                let s = orthosig::path::strat_signature(
                    &batch.increments(i),
                    batch.spec().dim(),
                    batch.spec().augment_time,
                    2,
                );
                0.5 * (s.coord(&w("12")).unwrap_or(0.0) - s.coord(&w("21")).unwrap_or(0.0))
            }
        })
        .collect())
}

fn fit(c: &Common, target: Target, test_paths: usize, expand: bool) -> orthosig::Result<Output> {
    let train = sample_paths(spec(c, c.paths, c.seed))?;
    let test = sample_paths(spec(c, test_paths, c.seed + TEST_SEED_OFFSET))?;
    let (y, y_test) = (
        target_values(&train, target)?,
        target_values(&test, target)?,
    );
    let n = c.max_degree;
    let mut csv = String::from("kind,key,value\n");
    let (model, pred) = if expand {
        let basis = ito_basis_for(train.spec(), n)?;
        let m = fit_expansion(&y, &ito_features(&train, n)?, &basis, n)?;
        for (word, v, _) in &m.terms {
            csv += &format!("coef,{},{v}\n", word.key());
        }
        let pred = m.predict(&ito_features(&test, n)?, &basis)?;
        (m.to_json(), pred)
    } else {
        let m = ols_fit(&y, &strat_features(&train, n), n, c.ridge)?;
        for (word, v) in m.words.iter().zip(&m.beta) {
            csv += &format!("coef,{},{v}\n", word.key());
        }
        let pred = m.predict(&strat_features(&test, n))?;
        (m.to_json(), pred)
    };
    let mt = metrics(&pred, &y_test)?;
    csv += &format!("metric,L2,{}\nmetric,R2,{}\n", mt.l2, mt.r2);
    Ok(Output {
        csv,
        json: json!({"model": model, "test": {"paths": test_paths, "L2": mt.l2, "R2": mt.r2}}),
        ok: true,
    })
}

fn records(r: Vec<orthosig::experiments::Record>) -> orthosig::Result<Output> {
    Ok(Output {
        csv: records_csv(&r),
        json: records_json(&r),
        ok: true,
    })
}

fn recurrence(c: &Common) -> orthosig::Result<Output> {
    let t = horizon_of(&spec(c, 1, 0))?;
    let f = Fawcett::new(t, c.d);
    let cached = Cached::new(&f);
    let frame = GradedFrame::new(c.d, c.max_degree);
    let polys = block_orth_polys(&frame, &cached)?;
    let rs = recurrence_matrices(&frame, polys, &cached)?;
    let audit = rank_audit(&rs);
    let gens: Vec<(usize, usize)> = (1..=c.max_degree)
        .flat_map(|m| (0..rs.frame.gens(m)).map(move |i| (m, i)))
        .collect();
    let (mut asym, mut comm) = (0.0f64, 0.0f64);
    for &(m, i) in &gens {
        let j = jacobi_truncation(&rs, m, i, c.max_degree)?;
        asym = asym.max((&j - j.transpose()).amax());
        for &g in &gens {
            comm = comm.max(commutativity_residual(&rs, (m, i), g, c.max_degree)?);
        }
    }
    let mut csv = String::from("kind,key,value\n");
    csv += &format!(
        "audit,checks,{}\naudit,passed,{}\n",
        audit.checks,
        audit.passed()
    );
    for f in &audit.failures {
        csv += &format!("failure,\"{}\",1\n", f.replace('"', "'"));
    }
    csv += &format!("jacobi,asymmetry,{asym}\njacobi,commutator,{comm}\n");
    let mut json = audit.to_json();
    json["jacobi"] = json!({"asymmetry": asym, "commutator": comm});
    Ok(Output {
        csv,
        json,
        ok: audit.passed(),
    })
}
