use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};

use kaf_core::estimates::{check_duran, check_koornwinder, check_weighted};
use kaf_core::exprparse::{parse, render_diagnostic, Expr};
use kaf_core::schwartz::{decay_report, rank1_split, restrict_to_sector, DECAY_FLOOR};
use kaf_core::transform::{
    analyze, apply_fourier, classical_fourier_oracle, synthesize, weighted_norm_sqr, CoeffField, OracleBox,
};
use kaf_core::verify::{run_suite, VerifyConfig, SUITES};
use kaf_core::{Complex64, Params};
use serde_json::{json, Value};

use crate::config::{Config, Format};
use crate::Failure;

fn snapshot(cfg: &Config, params: &Params) -> Value {
    json!({ "config": cfg, "params": params })
}

fn compile(src: &str, dim: usize) -> Result<Expr, Failure> {
    parse(src, dim).map_err(|e| Failure::Usage(format!("invalid expression\n{}", render_diagnostic(src, &e))))
}

/// The expression as a complex field, remembering whether any sample was not finite.
struct Sampled<'a> {
    expr: &'a Expr,
    bad: AtomicBool,
}

impl<'a> Sampled<'a> {
    fn new(expr: &'a Expr) -> Self {
        Sampled { expr, bad: AtomicBool::new(false) }
    }

    fn at(&self, x: &[f64]) -> Complex64 {
        let (v, bad) = self.expr.eval_flagged(x);
        if bad {
            self.bad.store(true, Ordering::Relaxed);
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(v, 0.0)
    }

    fn check(&self, src: &str) -> Result<(), Failure> {
        if self.bad.load(Ordering::Relaxed) {
            return Err(Failure::Usage(format!("'{src}' is not finite at some quadrature node")));
        }
        Ok(())
    }
}

fn print_json(v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("report serializes");
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| Failure::Io(e.to_string()))
}

fn csv_to<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Failure::Io(e.to_string());
    wr.write_record(header).map_err(io)?;
    for r in rows {
        wr.write_record(r).map_err(io)?;
    }
    wr.flush().map_err(|e| Failure::Io(e.to_string()))
}

fn print_csv(header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    csv_to(std::io::stdout().lock(), header, rows)
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn pair(c: Complex64) -> Value {
    json!([c.re, c.im])
}

fn analyze_expr(cfg: &Config, params: &Params, src: &str, expr: &Expr) -> Result<CoeffField, Failure> {
    let f = Sampled::new(expr);
    let field = analyze(params, |x: &[f64]| f.at(x), cfg.m_max, cfg.l_max, &cfg.rules())?;
    f.check(src)?;
    Ok(field)
}

pub fn transform(cfg: &Config, params: &Params, src: &str, out: &Path, oracle: bool) -> Result<(), Failure> {
    let expr = compile(src, params.dim)?;
    let dir = out.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !dir.is_dir() {
        return Err(Failure::Io(format!("{}: output directory does not exist", dir.display())));
    }
    if oracle && !(params.a == 2.0 && params.k == 0.0 && params.dim <= 2) {
        return Err(Failure::Capability("--oracle needs a = 2, k = 0 and N <= 2".into()));
    }
    let field = analyze_expr(cfg, params, src, &expr)?;
    let ff = apply_fourier(&field);
    let f = Sampled::new(&expr);
    let quad = weighted_norm_sqr(params, |x: &[f64]| f.at(x), &cfg.rules())?;
    f.check(src)?;
    let coeff = field.norm_sqr();
    let parseval = (quad - coeff).abs() / quad.max(f64::MIN_POSITIVE);
    let leak = (quad - coeff).max(0.0).sqrt();
    let unitarity = (ff.norm_sqr() - coeff).abs() / coeff.max(f64::MIN_POSITIVE);

    let n = cfg.samples;
    let xs: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let s = if n == 1 { 0.0 } else { -cfg.sample_max + 2.0 * cfg.sample_max * i as f64 / (n - 1) as f64 };
            let mut x = vec![0.0; params.dim];
            x[0] = s;
            x
        })
        .collect();
    let mut samples = Vec::with_capacity(n);
    let mut oracle_dev: f64 = 0.0;
    for x in &xs {
        let input = Complex64::new(expr.eval(x), 0.0);
        let recon = synthesize(&field, x)?;
        let out_v = synthesize(&ff, x)?;
        let mut row = json!({ "x": x, "input": pair(input), "reconstructed": pair(recon), "transformed": pair(out_v) });
        if oracle {
            let direct = classical_fourier_oracle(|y: &[f64]| Complex64::new(expr.eval(y), 0.0), x, &OracleBox::default())?;
            oracle_dev = oracle_dev.max((direct - out_v).norm());
            row["oracle"] = pair(direct);
        }
        samples.push(row);
    }

    let mut summary = json!({
        "parseval": { "coefficients": coeff, "quadrature": quad, "rel_defect": parseval },
        "truncation_leak": leak,
        "unitarity_defect": unitarity,
    });
    if oracle {
        summary["oracle_max_deviation"] = json!(oracle_dev);
        summary["oracle_points"] = json!(n);
    }

    let file = std::fs::File::create(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    let mut w = std::io::BufWriter::new(file);
    match cfg.format {
        Format::Json => {
            let doc = json!({
                "snapshot": snapshot(cfg, params),
                "fn": expr.to_string(),
                "input": field.to_json(),
                "transformed": ff.to_json(),
                "samples": samples,
                "summary": summary,
            });
            serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| Failure::Io(e.to_string()))?;
            writeln!(w).map_err(|e| Failure::Io(e.to_string()))?;
        }
        Format::Csv => {
            let mut header = vec!["kind", "m", "mu", "l"];
            let names: Vec<String> = (1..=params.dim).map(|j| format!("x{j}")).collect();
            header.extend(names.iter().map(String::as_str));
            header.extend(["in_re", "in_im", "out_re", "out_im"]);
            let blank = || vec![String::new(); params.dim];
            let mut rows = Vec::new();
            for ((m, mu, l, c), (_, _, _, d)) in field.entries().zip(ff.entries()) {
                let mut r = vec!["coeff".to_string(), m.to_string(), mu.to_string(), l.to_string()];
                r.extend(blank());
                r.extend([num(c.re), num(c.im), num(d.re), num(d.im)]);
                rows.push(r);
            }
            for (x, s) in xs.iter().zip(&samples) {
                let mut r = vec!["sample".to_string(), String::new(), String::new(), String::new()];
                r.extend(x.iter().map(|v| num(*v)));
                let re = |k: &str, i: usize| num(s[k][i].as_f64().unwrap_or(f64::NAN));
                r.extend([re("input", 0), re("input", 1), re("transformed", 0), re("transformed", 1)]);
                rows.push(r);
            }
            csv_to(&mut w, &header, &rows)?;
        }
    }
    w.flush().map_err(|e| Failure::Io(e.to_string()))?;

    match cfg.format {
        Format::Json => print_json(&summary),
        Format::Csv => {
            let mut rows = vec![
                vec!["parseval_rel_defect".into(), num(parseval)],
                vec!["truncation_leak".into(), num(leak)],
                vec!["unitarity_defect".into(), num(unitarity)],
            ];
            if oracle {
                rows.push(vec!["oracle_max_deviation".into(), num(oracle_dev)]);
            }
            print_csv(&["quantity", "value"], &rows)
        }
    }
}

pub fn verify(cfg: &Config, params: &Params, suite: &str) -> Result<(), Failure> {
    if !SUITES.contains(&suite) {
        return Err(Failure::Usage(format!("unknown suite '{suite}' (expected one of {})", SUITES.join(", "))));
    }
    let vc = VerifyConfig { params: params.clone(), m_max: cfg.m_max, l_max: cfg.l_max, seed: cfg.seed };
    let rep = run_suite(suite, &vc)?;
    for r in &rep.rows {
        eprintln!(
            "{:<4} {:<45} {:>12.3e} (limit {:.1e}){}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.value,
            r.limit,
            if r.detail.is_empty() { String::new() } else { format!("  {}", r.detail) }
        );
    }
    match cfg.format {
        Format::Json => print_json(&json!({ "snapshot": snapshot(cfg, params), "report": rep }))?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = rep
                .rows
                .iter()
                .map(|r| vec![suite.to_string(), r.name.clone(), num(r.value), num(r.limit), r.pass.to_string(), r.detail.clone()])
                .collect();
            print_csv(&["suite", "check", "value", "limit", "pass", "detail"], &rows)?;
        }
    }
    if rep.passed {
        Ok(())
    } else {
        Err(Failure::Failed)
    }
}

pub fn decay(cfg: &Config, params: &Params, src: &str) -> Result<(), Failure> {
    let expr = compile(src, params.dim)?;
    let field = analyze_expr(cfg, params, src, &expr)?;
    let rep = decay_report(&field, cfg.p_max);
    let total = field.norm_sqr();
    let sectors: Vec<Value> = (0..=cfg.m_max)
        .map(|m| {
            let sector = restrict_to_sector(&field, m);
            // sectors holding only quadrature noise have no meaningful verdict
            if sector.norm_sqr() <= DECAY_FLOOR * total {
                return json!({ "m": m, "empty": true });
            }
            let r = decay_report(&sector, cfg.p_max);
            json!({ "m": m, "verdict": r.verdict, "first_failing_order": r.first_failing_order })
        })
        .collect();
    match cfg.format {
        Format::Json => print_json(&json!({
            "snapshot": snapshot(cfg, params),
            "fn": expr.to_string(),
            "report": rep,
            "sectors": sectors,
        })),
        Format::Csv => {
            let rows: Vec<Vec<String>> = rep
                .orders
                .iter()
                .map(|o| {
                    let pass = rep.first_failing_order.is_none_or(|f| o.p < f);
                    vec![o.p.to_string(), num(o.sup), num(o.tail_ratio), pass.to_string()]
                })
                .collect();
            print_csv(&["p", "sup", "tail_ratio", "pass"], &rows)
        }
    }
}

pub fn rank1(cfg: &Config, params: &Params, src: &str) -> Result<(), Failure> {
    if params.dim != 1 {
        return Err(Failure::Usage(format!("rank1 needs N = 1, got N = {}", params.dim)));
    }
    let expr = compile(src, 1)?;
    let f = Sampled::new(&expr);
    let n = cfg.t_points;
    let grid: Vec<f64> =
        (0..n).map(|i| if n == 1 { 0.0 } else { cfg.t_max * i as f64 / (n - 1) as f64 }).collect();
    let split = rank1_split(|x: f64| f.at(&[x]).re, params, &grid, cfg.l_max, cfg.p_max)?;
    f.check(src)?;
    match cfg.format {
        Format::Json => print_json(&json!({
            "snapshot": snapshot(cfg, params),
            "fn": expr.to_string(),
            "split": split,
        })),
        Format::Csv => {
            let rows: Vec<Vec<String>> = split
                .t
                .iter()
                .zip(&split.u)
                .zip(&split.v)
                .map(|((t, u), v)| vec![num(*t), num(*u), num(*v), split.flagged.contains(t).to_string()])
                .collect();
            print_csv(&["t", "u", "v", "flagged"], &rows)
        }
    }
}

pub fn estimates(cfg: &Config) -> Result<(), Failure> {
    let e = &cfg.estimates;
    if e.duran.t_points == 0 || e.weighted.t_points == 0 || e.koornwinder.t_points == 0 {
        return Err(Failure::Usage("estimate grids need t_points > 0".into()));
    }
    let duran = check_duran(&e.duran);
    let weighted = check_weighted(&e.weighted);
    let koorn = check_koornwinder(&e.koornwinder);
    let passed = duran.passed() && weighted.passed() && koorn.passed();
    match cfg.format {
        Format::Json => print_json(&json!({
            "snapshot": { "estimates": e },
            "duran": duran,
            "weighted": weighted,
            "koornwinder": koorn,
            "passed": passed,
        }))?,
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = [&duran, &weighted]
                .iter()
                .map(|r| {
                    vec![
                        r.name.clone(),
                        r.cases.to_string(),
                        r.violations.to_string(),
                        num(r.min_rel_margin),
                        r.worst_case.clone(),
                        r.passed().to_string(),
                    ]
                })
                .collect();
            rows.push(vec![
                "Koornwinder sums".into(),
                koorn.cases.to_string(),
                String::new(),
                num(koorn.max_final_error),
                format!("max overshoot {:e}, monotone {}", koorn.max_overshoot, koorn.monotone),
                koorn.passed().to_string(),
            ]);
            print_csv(&["check", "cases", "violations", "margin", "worst_case", "pass"], &rows)?;
        }
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Failed)
    }
}
