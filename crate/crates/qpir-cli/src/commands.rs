//! Subcommand implementations: validate, compute, serialize, emit.

use crate::report::{csv_field, emit, envelope};
use crate::{
    AuditArgs, BasisCheckArgs, CliError, CompareArgs, ConverseArgs, Format, Lemma3Args, Mode,
    RunArgs, Variant,
};
use qpir_core::baseline::{comparison_table, CapacityTable};
use qpir_core::converse::{
    exhaustive_multiround_runs, feff_sweep, honest_instance, multiround_converse_check,
    uniform_maximizer_check,
};
use qpir_core::linalg::sampling::seeded_rng;
use qpir_core::linalg::DEFAULT_KERNEL_CUTOFF;
use qpir_core::protocol::{exhaustive_file_sets, run as run_protocol, FileSet, Transcript};
use qpir_core::secmeasures::{
    audit_with_strategy, lemma3_check, QueryStrategy, EXHAUSTIVE_MAX_ANSWER_DIM,
    EXHAUSTIVE_MAX_FILE_TUPLES,
};
use qpir_core::weyl::bell_basis;
use rand::Rng;
use serde_json::{json, Value};

fn check_run_caps(ell: u64, f: usize) -> Result<(), CliError> {
    if ell < 2 {
        return Err(CliError::validation(format!("--ell {ell}: need ℓ ≥ 2")));
    }
    if f < 2 {
        return Err(CliError::validation(format!("--files {f}: need F ≥ 2")));
    }
    let m = ell * ell;
    if m > EXHAUSTIVE_MAX_ANSWER_DIM {
        return Err(CliError::validation(format!(
            "answer dimension ℓ² = {m} exceeds exhaustive cap {EXHAUSTIVE_MAX_ANSWER_DIM}"
        )));
    }
    let tuples = m.checked_pow(f as u32).unwrap_or(u64::MAX);
    if tuples > EXHAUSTIVE_MAX_FILE_TUPLES {
        return Err(CliError::validation(format!(
            "file assignments M^F = {tuples} exceed exhaustive cap {EXHAUSTIVE_MAX_FILE_TUPLES}"
        )));
    }
    Ok(())
}

pub fn run(args: RunArgs) -> Result<u8, CliError> {
    if args.format == Format::Csv {
        return Err(CliError::validation(
            "run emits transcript JSON only; csv is not supported",
        ));
    }
    check_run_caps(args.ell, args.files)?;
    let seed = crate::resolve_seed(args.seed)?;

    let mut transcripts: Vec<Value> = Vec::new();
    let mut all_correct = true;
    let mut record = |t: &Transcript, expected: u64| {
        all_correct &= t.outcome == expected;
        transcripts.push(t.to_json(args.dump_state));
    };

    match args.mode {
        Mode::Exhaustive => {
            for files in exhaustive_file_sets(args.ell, args.files) {
                for k in 1..=args.files {
                    for mask in 0..(1u64 << args.files) {
                        let t = run_protocol(&files, k, mask)?;
                        record(&t, files.file(k).value());
                    }
                }
            }
        }
        Mode::Sampled => {
            let m = args.ell * args.ell;
            let mut rng = seeded_rng(seed);
            for _ in 0..args.trials {
                let values: Vec<u64> = (0..args.files).map(|_| rng.gen_range(0..m)).collect();
                let files = FileSet::new(args.ell, &values)?;
                let k = rng.gen_range(1..=args.files);
                let mask = rng.gen_range(0..(1u64 << args.files));
                let t = run_protocol(&files, k, mask)?;
                record(&t, files.file(k).value());
            }
        }
    }

    let config = json!({
        "ell": args.ell,
        "files": args.files,
        "mode": match args.mode { Mode::Exhaustive => "exhaustive", Mode::Sampled => "sampled" },
        "trials": if args.mode == Mode::Sampled { Some(args.trials) } else { None },
        "dump_state": args.dump_state,
    });
    let payload = json!({
        "all_correct": all_correct,
        "count": transcripts.len(),
        "transcripts": transcripts,
    });
    emit(args.out.as_deref(), &envelope("run", seed, config, payload))?;
    Ok(if all_correct { 0 } else { 1 })
}

pub fn audit(args: AuditArgs) -> Result<u8, CliError> {
    let seed = crate::resolve_seed(args.seed)?;
    let strategy = match args.variant {
        Variant::Honest => QueryStrategy::Honest,
        Variant::SingletonLeak => QueryStrategy::SingletonLeak,
    };
    let report = audit_with_strategy(args.ell, args.files, strategy)?;

    let content = match args.format {
        Format::Json => {
            let config = json!({
                "ell": args.ell,
                "files": args.files,
                "variant": strategy.name(),
            });
            let payload =
                json!({ "report": serde_json::to_value(&report).expect("report serializes") });
            envelope("audit", seed, config, payload)
        }
        Format::Csv => {
            let mut text = String::from(
                "ell,F,p_err,s_serv_bits,s_user_bits,upload_bits,download_logdim,rate,notes\n",
            );
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                report.ell,
                report.f,
                report.p_err,
                report.s_serv_bits,
                report.s_user_bits,
                report.upload_bits,
                report.download_logdim,
                report.rate,
                csv_field(&report.notes)
            ));
            text
        }
    };
    emit(args.out.as_deref(), &content)?;
    Ok(0)
}

fn parse_s_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::validation(format!(
            "--s-grid {text:?}: expected start:end:step"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| CliError::validation(format!("--s-grid {text:?}: bad number {p:?}")))
        })
        .collect::<Result<_, _>>()?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 {
        return Err(CliError::validation("--s-grid step must be positive"));
    }
    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let s = start + step * i as f64;
        if s > end + 1e-12 {
            break;
        }
        grid.push(s);
        i += 1;
    }
    if grid.is_empty() {
        return Err(CliError::validation(format!("--s-grid {text:?} is empty")));
    }
    if grid.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(CliError::validation(
            "--s-grid values must lie strictly inside (0,1)",
        ));
    }
    Ok(grid)
}

fn parse_targets(text: &str, f: usize) -> Result<Vec<usize>, CliError> {
    let targets: Vec<usize> = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| CliError::validation(format!("--targets: bad index {p:?}")))
        })
        .collect::<Result<_, _>>()?;
    if targets.is_empty() || targets.iter().any(|&k| k < 1 || k > f) {
        return Err(CliError::validation(format!(
            "--targets must be nonempty indices in 1..={f}"
        )));
    }
    Ok(targets)
}

pub fn converse(args: ConverseArgs) -> Result<u8, CliError> {
    let seed = crate::resolve_seed(args.seed)?;
    match args.multiround {
        None => {
            let grid = parse_s_grid(&args.s_grid)?;
            if args.ell < 2 {
                return Err(CliError::validation(format!("--ell {}: need ℓ ≥ 2", args.ell)));
            }
            let (states, decoder) = honest_instance(args.ell)?;
            let report = feff_sweep(&states, &decoder, &grid, DEFAULT_KERNEL_CUTOFF)?;
            let uniform_ok =
                uniform_maximizer_check((args.ell * args.ell) as usize, grid[0], 200, seed)?;

            let content = match args.format {
                Format::Csv => report.to_csv(),
                Format::Json => {
                    let config = json!({
                        "ell": args.ell,
                        "files": args.files,
                        "s_grid": grid,
                    });
                    let payload = json!({
                        "rows": serde_json::to_value(&report.rows).expect("rows serialize"),
                        "summary": report.summary_json(),
                        "uniform_maximizer_ok": uniform_ok,
                    });
                    envelope("converse", seed, config, payload)
                }
            };
            emit(args.out.as_deref(), &content)?;
            Ok(if report.max_violation <= 1e-8 && uniform_ok { 0 } else { 1 })
        }
        Some(rounds) => {
            if rounds < 1 {
                return Err(CliError::validation("--multiround must be at least 1"));
            }
            let targets = match &args.targets {
                Some(text) => parse_targets(text, args.files)?,
                None => (0..rounds).map(|i| 1 + i % args.files).collect(),
            };
            if targets.len() != rounds {
                return Err(CliError::validation(format!(
                    "--targets lists {} rounds but --multiround is {rounds}",
                    targets.len()
                )));
            }
            let runs = exhaustive_multiround_runs(args.ell, args.files, &targets)?;
            let report = multiround_converse_check(runs)?;

            let content = match args.format {
                Format::Csv => {
                    let mut text = String::from("rounds,epsilon,lhs_bits,rhs_bits,gap\n");
                    text.push_str(&format!(
                        "{},{},{},{},{}\n",
                        report.rounds, report.epsilon, report.lhs_bits, report.rhs_bits, report.gap
                    ));
                    text
                }
                Format::Json => {
                    let config = json!({
                        "ell": args.ell,
                        "files": args.files,
                        "rounds": rounds,
                        "targets": targets,
                    });
                    let payload = json!({
                        "report": serde_json::to_value(&report).expect("report serializes"),
                    });
                    envelope("converse", seed, config, payload)
                }
            };
            emit(args.out.as_deref(), &content)?;
            Ok(if report.gap >= -1e-8 { 0 } else { 1 })
        }
    }
}

fn parse_sweep(text: &str) -> Result<(u64, u64), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(CliError::validation(format!(
            "--sweep-n {text:?}: expected a:b"
        )));
    }
    let a = parts[0]
        .parse::<u64>()
        .map_err(|_| CliError::validation(format!("--sweep-n: bad number {:?}", parts[0])))?;
    let b = parts[1]
        .parse::<u64>()
        .map_err(|_| CliError::validation(format!("--sweep-n: bad number {:?}", parts[1])))?;
    if a > b {
        return Err(CliError::validation("--sweep-n range is empty"));
    }
    Ok((a, b))
}

pub fn compare(args: CompareArgs) -> Result<u8, CliError> {
    let rows: Vec<CapacityTable> = match &args.sweep_n {
        None => vec![comparison_table(args.n, args.files, args.ell)?],
        Some(text) => {
            let (a, b) = parse_sweep(text)?;
            (a..=b)
                .map(|n| comparison_table(n, args.files, args.ell))
                .collect::<Result<_, _>>()?
        }
    };

    let content = match args.format {
        Format::Csv => {
            let mut text = String::from(CapacityTable::csv_header());
            text.push('\n');
            for row in &rows {
                text.push_str(&row.csv_row());
                text.push('\n');
            }
            text
        }
        Format::Json => {
            let config = json!({
                "n": args.n,
                "files": args.files,
                "ell": args.ell,
                "sweep_n": args.sweep_n,
            });
            let payload = if rows.len() == 1 {
                json!({ "table": serde_json::to_value(&rows[0]).expect("row serializes") })
            } else {
                json!({ "tables": serde_json::to_value(&rows).expect("rows serialize") })
            };
            envelope("compare", 0, config, payload)
        }
    };
    emit(args.out.as_deref(), &content)?;
    Ok(0)
}

pub fn basis_check(args: BasisCheckArgs) -> Result<u8, CliError> {
    if args.ell < 2 {
        return Err(CliError::validation(format!("--ell {}: need ℓ ≥ 2", args.ell)));
    }
    if args.ell > 16 {
        return Err(CliError::validation(format!(
            "--ell {}: basis check supports ℓ ≤ 16",
            args.ell
        )));
    }
    let basis = bell_basis(args.ell);
    let mut max_dev = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let g = a.inner(b);
            let expect = if i == j { 1.0 } else { 0.0 };
            max_dev = max_dev.max((g.re - expect).abs().max(g.im.abs()));
        }
    }
    let pass = max_dev <= 1e-10;
    let config = json!({ "ell": args.ell });
    let payload = json!({
        "basis_size": basis.len(),
        "max_gram_deviation": max_dev,
        "pass": pass,
    });
    emit(
        args.out.as_deref(),
        &envelope("basis-check", 0, config, payload),
    )?;
    Ok(if pass { 0 } else { 1 })
}

pub fn lemma3(args: Lemma3Args) -> Result<u8, CliError> {
    if args.trials == 0 {
        return Err(CliError::validation("--trials must be positive"));
    }
    let seed = crate::resolve_seed(args.seed)?;
    let max_slack = lemma3_check(seed, args.trials)?;
    let pass = max_slack <= 1e-8;
    let config = json!({ "trials": args.trials });
    let payload = json!({
        "max_slack_bits": max_slack,
        "pass": pass,
    });
    emit(args.out.as_deref(), &envelope("lemma3", seed, config, payload))?;
    Ok(if pass { 0 } else { 1 })
}
