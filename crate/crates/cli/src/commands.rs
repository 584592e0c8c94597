use serde_json::{json, Map, Value};

use cmlab::cmdegree::{conjecture_probe, degree_estimate, DegreeSettings, FunctionFamily};
use cmlab::precision::format_sci;
use cmlab::quadrature::GridSpec;
use cmlab::verify::{run_suites, Suite, VerifyOptions};
use cmlab::{gammakit, kernels, remainders, PrecisionContext, Real};

use crate::output::emit;
use crate::{CliError, DegreeArgs, EvalArgs, Global, VerifyArgs};

/// A parsed `a:b:n` grid.
struct GridArg {
    lo: f64,
    hi: f64,
    count: usize,
    lo_text: String,
}

fn parse_grid(s: &str) -> Result<GridArg, CliError> {
    let bad = || CliError::Usage(format!("grid must look like a:b:n, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    let count: usize = n.trim().parse().map_err(|_| bad())?;
    let g = GridArg {
        lo,
        hi,
        count,
        lo_text: a.trim().to_string(),
    };
    if count == 1 {
        if lo != hi || !(lo > 0.0 && lo.is_finite()) {
            return Err(CliError::Usage(format!("a one-point grid needs a = b > 0, got {s:?}")));
        }
    } else {
        g.spec()?;
    }
    Ok(g)
}

impl GridArg {
    fn spec(&self) -> Result<GridSpec, CliError> {
        GridSpec::log(self.lo, self.hi, self.count).map_err(|e| CliError::Usage(e.to_string()))
    }

    fn points(&self, ctx: &PrecisionContext) -> Result<Vec<Real>, CliError> {
        if self.count == 1 {
            return Ok(vec![ctx.parse(&self.lo_text).map_err(|e| CliError::Usage(e.to_string()))?]);
        }
        Ok(self.spec()?.points(ctx)?)
    }
}

type Evaluator = Box<dyn Fn(&PrecisionContext, &Real) -> cmlab::Result<Real>>;

/// Resolves an `eval` function name to its evaluator and argument name.
fn evaluator(name: &str) -> Result<(Evaluator, &'static str), CliError> {
    let unknown = || CliError::Usage(format!("unknown function {name:?}"));
    let (head, idx) = match name.split_once(':') {
        Some((h, i)) => (h, Some(i.parse::<u32>().map_err(|_| unknown())?)),
        None => (name, None),
    };
    let e: (Evaluator, &'static str) = match (head, idx) {
        ("lngamma", None) => (Box::new(gammakit::ln_gamma), "t"),
        ("psi", None) => (Box::new(gammakit::digamma), "t"),
        ("phi", None) => (Box::new(remainders::phi), "t"),
        ("polygamma", Some(m)) => (Box::new(move |c, t| gammakit::polygamma(c, m, t)), "t"),
        ("R", Some(n)) => (Box::new(move |c, t| remainders::remainder(c, n, t)), "t"),
        ("R1", Some(n)) => (Box::new(move |c, t| remainders::remainder_d1(c, n, t)), "t"),
        ("R2", Some(n)) => (Box::new(move |c, t| remainders::remainder_d2(c, n, t)), "t"),
        ("f", Some(n)) => (Box::new(move |c, v| kernels::f_kernel(c, n, v)), "v"),
        ("K", Some(m)) => (Box::new(move |c, v| kernels::k_kernel(c, m, v)), "v"),
        _ => return Err(unknown()),
    };
    Ok(e)
}

fn base_config(g: &Global, command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("digits".into(), json!(g.ctx.digits()));
    m.insert("format".into(), json!(g.format.name()));
    m.insert("sig".into(), json!(g.sig));
    m.insert(
        "out".into(),
        g.out.as_ref().map_or(Value::Null, |p| json!(p.display().to_string())),
    );
    m
}

pub fn eval(g: &Global, a: &EvalArgs) -> Result<(), CliError> {
    let (f, var) = evaluator(&a.func)?;
    let grid = parse_grid(&a.grid)?;
    let mut config = base_config(g, "eval");
    config.insert("fn".into(), json!(a.func));
    config.insert("grid".into(), json!(a.grid));
    let mut rows = Vec::new();
    for x in grid.points(&g.ctx)? {
        let y = f(&g.ctx, &x)?;
        let mut row = Map::new();
        row.insert(var.into(), json!(format_sci(&x, g.sig)));
        row.insert("value".into(), json!(format_sci(&y, g.sig)));
        rows.push(Value::Object(row));
    }
    emit(g, &config, &rows)
}

fn parse_pair(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Usage(format!("expected n:m, got {s:?}"));
    let (n, m) = s.split_once(':').ok_or_else(bad)?;
    Ok((n.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?))
}

pub fn degree(g: &Global, a: &DegreeArgs) -> Result<(), CliError> {
    let grid = parse_grid(&a.grid)?.spec()?;
    let mut settings = DegreeSettings::defaults(&g.ctx);
    settings.grid = grid;
    settings.order = a.order;
    settings.resolution = a.resolution;
    if let Some(t) = a.tol {
        settings.tol = g.ctx.real(t);
    }
    let mut config = base_config(g, "degree");
    config.insert("grid".into(), json!(a.grid));
    config.insert("order".into(), json!(a.order));
    config.insert("resolution".into(), json!(a.resolution));
    config.insert("tol".into(), json!(format_sci(&settings.tol, g.sig)));
    let bracket = match (&a.func, &a.conjecture) {
        (Some(name), _) => {
            let fam = FunctionFamily::builtin(name).map_err(|e| CliError::Usage(e.to_string()))?;
            let (Some(lo), Some(hi)) = (a.lo, a.hi) else {
                return Err(CliError::Usage("--fn needs --lo and --hi".into()));
            };
            config.insert("fn".into(), json!(name));
            config.insert("lo".into(), json!(lo));
            config.insert("hi".into(), json!(hi));
            degree_estimate(&g.ctx, &fam, lo, hi, &settings)?
        }
        (None, Some(pair)) => {
            let (n, m) = parse_pair(pair)?;
            config.insert("conjecture".into(), json!(pair));
            conjecture_probe(&g.ctx, n, m, &settings)?
        }
        (None, None) => return Err(CliError::Usage("need --fn or --conjecture".into())),
    };
    let result = serde_json::to_value(&bracket).expect("serializable");
    emit(g, &config, &[result])
}

pub fn verify(g: &Global, a: &VerifyArgs) -> Result<(), CliError> {
    let suites = Suite::parse_list(&a.suite).map_err(|e| CliError::Usage(e.to_string()))?;
    let opts = VerifyOptions {
        tol: a.tol,
        find_negative: a.find_negative,
        sig: g.sig,
    };
    let mut config = base_config(g, "verify");
    config.insert("suite".into(), json!(a.suite));
    config.insert("tol".into(), a.tol.map_or(Value::Null, |t| json!(t)));
    config.insert("find_negative".into(), json!(a.find_negative));
    let records = run_suites(&g.ctx, &suites, &opts);
    let failed = records.iter().filter(|r| !r.pass).count();
    let results: Vec<Value> = records
        .iter()
        .map(|r| serde_json::to_value(r).expect("serializable"))
        .collect();
    emit(g, &config, &results)?;
    eprintln!("{} of {} checks passed", records.len() - failed, records.len());
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
