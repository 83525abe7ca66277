use serde_json::{json, Map, Value};

use nonlocality::activation::{ancilla_r, ancilla_spectrum_bounds, verify_ancilla};
use nonlocality::measures::teleport::k_factor;
use nonlocality::measures::PropertyKind;
use nonlocality::sdp::SdpOptions;
use nonlocality::states::{ket0_state, wi_state};
use nonlocality::sweep::{
    build_table, linspace, sample_curve, sample_hirsch_grid, CellValue, Provenance, TableRow,
};
use nonlocality::{Error, Family, FamilySpec};

use crate::output::{csv, emit, fmt_float, fmt_opt, json, json_float};
use crate::{
    AncillaArgs, Failure, Format, KfactorArgs, OutputArgs, SolverArgs, SweepArgs, TableArgs,
};

/// Open interval of WI parameters where the ancilla trace must be negative.
const ANCILLA_GRID: (f64, f64) = (0.6569, 1.0);
const ANCILLA_POINTS: usize = 20;
const ANCILLA_TOL: f64 = 1e-10;

type Outcome = Result<(), Failure>;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Unsupported(_)
            | Error::UnknownFamily(_)
            | Error::UnknownProperty(_)
            | Error::UnsupportedDimension(_)
            | Error::ParameterOutOfRange { .. }
            | Error::DimensionMismatch(_) => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn write(output: &OutputArgs, contents: &str) -> Outcome {
    emit(output.out.as_deref(), contents).map_err(|e| {
        let target = output
            .out
            .as_ref()
            .map_or("standard output".to_string(), |p| p.display().to_string());
        Failure::Io(format!("cannot write {target}: {e}"))
    })
}

fn solver_options(args: &SolverArgs) -> Result<SdpOptions, Failure> {
    if args.sdp_tol.is_nan() || args.sdp_tol <= 0.0 {
        return Err(usage("--sdp-tol must be positive"));
    }
    Ok(SdpOptions {
        max_iters: args.sdp_max_iters as usize,
        tol_objective: args.sdp_tol,
        ..SdpOptions::default()
    })
}

fn grid(lo: f64, hi: f64, steps: usize, what: &str) -> Result<Vec<f64>, Failure> {
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(usage(format!(
            "{what}: lower end {lo} must be below upper end {hi}"
        )));
    }
    if steps < 2 {
        return Err(usage(format!(
            "{what}: at least 2 steps required, got {steps}"
        )));
    }
    Ok(linspace(lo, hi, steps))
}

fn parse_family(s: &str) -> Result<Family, Failure> {
    Ok(s.parse::<Family>()?)
}

fn bool_str(b: Option<bool>) -> String {
    b.map(|b| b.to_string()).unwrap_or_default()
}

pub fn sweep(args: &SweepArgs) -> Outcome {
    let family = parse_family(&args.family)?;
    let kind: PropertyKind = args.property.parse()?;
    let sdp = solver_options(&args.solver)?;
    let format = args.output.format.unwrap_or(Format::Csv);
    let two_d = args.q_grid.is_some() || args.p_grid.is_some();
    if family != Family::Hirsch2 && (two_d || args.q.is_some()) {
        return Err(usage("--q, --q-grid and --p-grid apply to hirsch2 only"));
    }
    if !family.is_qudit() && args.d != 2 {
        return Err(usage(format!(
            "{family} is a two-qubit family; --d must be 2"
        )));
    }
    if two_d {
        if args.p.is_some() || args.q.is_some() {
            return Err(usage("--p and --q cannot be combined with a (p, q) grid"));
        }
        return hirsch_grid(args, kind, &sdp, format);
    }

    let spec = match family {
        Family::Hirsch2 => FamilySpec::hirsch(args.q.unwrap_or(1.0), ket0_state())?,
        _ => FamilySpec::qudit(family, args.d)?,
    };
    let points = match args.p {
        Some(p) => vec![p],
        None => grid(args.pmin, args.pmax, args.steps, "p range")?,
    };
    let curve = sample_curve(&spec, kind, &points, &sdp)?;
    for m in &curve.missing {
        eprintln!("warning: no value at p = {}: {}", fmt_float(m.p), m.reason);
    }
    let contents = match format {
        Format::Csv => csv(
            &["p", "value", "indicator"],
            curve
                .grid
                .iter()
                .zip(&curve.values)
                .zip(&curve.indicators)
                .map(|((&p, &v), &i)| vec![fmt_float(p), fmt_opt(v), bool_str(i)]),
        ),
        Format::Json => {
            let points: Vec<Value> = curve
                .grid
                .iter()
                .zip(&curve.values)
                .zip(&curve.indicators)
                .map(|((&p, &v), &i)| {
                    json!({
                        "p": json_float(p),
                        "value": v.map_or(Value::Null, json_float),
                        "indicator": i,
                    })
                })
                .collect();
            let missing: Vec<Value> = curve
                .missing
                .iter()
                .map(|m| json!({"p": json_float(m.p), "reason": m.reason}))
                .collect();
            let mut doc = json!({
                "family": family.name(),
                "d": spec.d,
                "property": kind.name(),
                "points": points,
                "missing": missing,
            });
            if family == Family::Hirsch2 {
                doc["q"] = json_float(spec.q);
            }
            json(&doc)
        }
    };
    write(&args.output, &contents)
}

fn hirsch_grid(args: &SweepArgs, kind: PropertyKind, sdp: &SdpOptions, format: Format) -> Outcome {
    let p_grid = grid(args.pmin, args.pmax, args.p_grid.unwrap_or(41), "p grid")?;
    let q_grid = grid(0.0, 1.0, args.q_grid.unwrap_or(41), "q grid")?;
    let cells = sample_hirsch_grid(&ket0_state(), kind, &p_grid, &q_grid, sdp)?;
    let contents = match format {
        Format::Csv => csv(
            &["p", "q", "value"],
            cells
                .iter()
                .map(|c| vec![fmt_float(c.p), fmt_float(c.q), fmt_opt(c.value)]),
        ),
        Format::Json => {
            let points: Vec<Value> = cells
                .iter()
                .map(|c| {
                    json!({
                        "p": json_float(c.p),
                        "q": json_float(c.q),
                        "value": c.value.map_or(Value::Null, json_float),
                        "indicator": c.indicator,
                    })
                })
                .collect();
            json(&json!({"family": "hirsch2", "property": kind.name(), "points": points}))
        }
    };
    write(&args.output, &contents)
}

fn cell_json(value: &CellValue) -> Value {
    match value {
        CellValue::Number(x) => json_float(*x),
        CellValue::Marker(m) => Value::String(m.to_string()),
    }
}

fn provenance_name(p: Provenance) -> &'static str {
    match p {
        Provenance::Computed => "computed",
        Provenance::PaperConstant => "paper-constant",
    }
}

fn cell_text(value: &CellValue) -> String {
    match value {
        CellValue::Number(x) => fmt_float(*x),
        CellValue::Marker(m) => m.to_string(),
    }
}

fn table_json(family: Family, rows: &[TableRow]) -> String {
    let rows: Vec<Value> = rows
        .iter()
        .map(|row| {
            let thresholds: Map<String, Value> = row
                .thresholds
                .iter()
                .map(|(name, cell)| {
                    (
                        name.clone(),
                        json!({
                            "value": cell_json(&cell.value),
                            "tolerance": json_float(cell.tolerance),
                            "provenance": provenance_name(cell.provenance),
                        }),
                    )
                })
                .collect();
            json!({"d": row.d, "thresholds": thresholds})
        })
        .collect();
    json(&json!({"family": family.name(), "rows": rows}))
}

pub fn table(args: &TableArgs) -> Outcome {
    let family = parse_family(&args.family)?;
    let sdp = solver_options(&args.solver)?;
    if args.dmax < 2 {
        return Err(usage("--dmax must be at least 2"));
    }
    let dims: Vec<usize> = (2..=args.dmax).collect();
    let rows = build_table(family, &dims, &sdp)?;
    let contents = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => table_json(family, &rows),
        Format::Csv => csv(
            &["d", "name", "value", "tolerance", "provenance"],
            rows.iter().flat_map(|row| {
                row.thresholds.iter().map(move |(name, cell)| {
                    vec![
                        row.d.to_string(),
                        name.clone(),
                        cell_text(&cell.value),
                        fmt_float(cell.tolerance),
                        provenance_name(cell.provenance).to_string(),
                    ]
                })
            }),
        ),
    };
    write(&args.output, &contents)
}

pub fn check_ancilla(args: &AncillaArgs) -> Outcome {
    let rho = ancilla_r();
    let (psd, ppt) = ancilla_spectrum_bounds(&rho)?;
    let trace_err = (rho.matrix().trace().re - 1.0).abs();
    println!(
        "ancilla: min eigenvalue {}, min eigenvalue of partial transpose {}, trace error {}",
        fmt_float(psd),
        fmt_float(ppt),
        fmt_float(trace_err)
    );
    if psd < -ANCILLA_TOL || ppt < -ANCILLA_TOL || trace_err > ANCILLA_TOL {
        return Err(Failure::Check(
            "ancilla is not a normalized PPT state".into(),
        ));
    }
    let points = match args.p {
        Some(p) => vec![p],
        None => {
            let (lo, hi) = ANCILLA_GRID;
            (1..=ANCILLA_POINTS)
                .map(|k| lo + (hi - lo) * k as f64 / (ANCILLA_POINTS + 1) as f64)
                .collect()
        }
    };
    println!("p,trace_value");
    let mut failing = None;
    for p in points {
        let check = verify_ancilla(&wi_state(p)?, &rho)?;
        println!("{},{}", fmt_float(p), fmt_float(check.trace_value));
        if !check.activated && failing.is_none() {
            failing = Some((p, check.trace_value));
        }
    }
    match failing {
        None => {
            println!("pass");
            Ok(())
        }
        Some((p, v)) => Err(Failure::Check(format!(
            "trace value {} is not negative at p = {}",
            fmt_float(v),
            fmt_float(p)
        ))),
    }
}

pub fn kfactor(args: &KfactorArgs) -> Outcome {
    if args.dmin < 2 || args.dmin > args.dmax {
        return Err(usage("need 2 <= --dmin <= --dmax"));
    }
    if args.fmin < 0.0 || args.fmax > 1.0 {
        return Err(usage("f range must lie in [0, 1]"));
    }
    let fs = grid(args.fmin, args.fmax, args.steps, "f range")?;
    let rows: Vec<(usize, f64, Option<u64>)> = (args.dmin..=args.dmax)
        .flat_map(|d| fs.iter().map(move |&f| (d, f, k_factor(d, f))))
        .collect();
    let contents = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => csv(
            &["d", "f", "k"],
            rows.iter().map(|&(d, f, k)| {
                vec![
                    d.to_string(),
                    fmt_float(f),
                    k.map(|k| k.to_string()).unwrap_or_default(),
                ]
            }),
        ),
        Format::Json => {
            let points: Vec<Value> = rows
                .iter()
                .map(|&(d, f, k)| json!({"d": d, "f": json_float(f), "k": k}))
                .collect();
            json(&json!({"points": points}))
        }
    };
    write(&args.output, &contents)
}
