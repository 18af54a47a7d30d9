use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use galmckay::charkit::{dixon_table, CachedTable, Classes};
use galmckay::mckaybij::{sp_pairing, verify_equivariance, verify_rationality_n1, McKayError, ParamRecord, VerificationReport};
use galmckay::relweyl::{enumerate_params, Setting};
use galmckay::rootsys::{Family, RootSystem, WeylGroup};

#[derive(Parser)]
#[command(name = "galmckay", version, about = "Galois-equivariant McKay checks for small groups of Lie type")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the ℓ′-degree principal-series parameters.
    Enumerate(RunArgs),
    /// Run the full equivariance check suite.
    Verify(RunArgs),
    /// Rationality of the odd-degree characters of N₁ (twisted torus).
    Rationality(RunArgs),
    /// Parameter-level pairing for Sp_2n at ℓ = 2.
    SpPairing(RunArgs),
    /// Compute (or load and check) the Weyl group character table cache.
    Table(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Cartan type, e.g. G2, B3, C2
    #[arg(long = "type")]
    group_type: String,
    #[arg(long)]
    q: u64,
    #[arg(long, default_value_t = 2)]
    ell: u64,
    #[arg(long)]
    twisted: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for cached character tables.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Treat flagged and indeterminate checks as failures.
    #[arg(long)]
    strict: bool,
}

fn emit(args: &RunArgs, text: &str) -> Result<(), McKayError> {
    match &args.out {
        Some(p) => std::fs::write(p, text).map_err(|e| McKayError::Report(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn setting(args: &RunArgs) -> Result<Arc<Setting>, McKayError> {
    Ok(Arc::new(Setting::from_str(&args.group_type, args.q, args.twisted)?))
}

fn type_c_rank(label: &str) -> Option<usize> {
    let t: galmckay::rootsys::CartanType = label.parse().ok()?;
    match (t.family, t.rank) {
        (Family::C, n) => Some(n),
        (Family::A, 1) => Some(1),
        _ => None,
    }
}

fn report_exit(args: &RunArgs, rep: &VerificationReport) -> Result<bool, McKayError> {
    emit(args, &rep.to_json())?;
    Ok(rep.success(args.strict))
}

fn enumerate(args: &RunArgs) -> Result<bool, McKayError> {
    let s = setting(args)?;
    let ps = enumerate_params(&s, args.ell)?;
    let nw = s.weyl.order() as i64;
    let params: Vec<ParamRecord> = ps
        .params
        .iter()
        .map(|p| {
            let od = ps.orbit_of(p.lambda()).expect("parameter orbit exists");
            let deg = nw / od.rel.w_lambda.len() as i64 * od.table.irr[p.eta()].degree_int();
            ParamRecord { lambda: p.lambda().exps.clone(), eta: p.eta(), kind: "principal".into(), degree: Some(deg) }
        })
        .collect();
    let body = serde_json::json!({ "type": s.cartan.to_string(), "q": s.q, "ell": args.ell, "flags": ps.flags, "params": params });
    emit(args, &serde_json::to_string_pretty(&body).expect("serializable"))?;
    Ok(true)
}

fn verify(args: &RunArgs) -> Result<bool, McKayError> {
    if args.ell == 2 && args.q % 2 == 1 && args.q % 8 != 1 && !args.twisted {
        if let Some(n) = type_c_rank(&args.group_type) {
            eprintln!("type C at ℓ = 2 with q ≠ 1 mod 8: running the parameter-level pairing");
            return report_exit(args, &sp_pairing(n, args.q)?);
        }
    }
    report_exit(args, &verify_equivariance(setting(args)?, args.ell)?)
}

fn table(args: &RunArgs, dir: &Path) -> Result<bool, McKayError> {
    let rs = RootSystem::build_str(&args.group_type).map_err(|e| McKayError::Unsupported(e.to_string()))?;
    let weyl = WeylGroup::new(Arc::new(rs)).map_err(|e| McKayError::Unsupported(e.to_string()))?;
    let path = dir.join(format!("W_{}.chartable", args.group_type));
    let io = |e: std::io::Error| McKayError::Report(format!("{}: {e}", path.display()));
    if path.exists() {
        let text = std::fs::read_to_string(&path).map_err(io)?;
        let cached = CachedTable::parse(&text)?;
        let t = cached.into_table(Arc::new(Classes::compute(&weyl)))?;
        emit(args, &format!("{}: {} classes, loaded and verified", path.display(), t.irr.len()))?;
    } else {
        std::fs::create_dir_all(dir).map_err(io)?;
        let t = dixon_table(&weyl)?;
        let text = CachedTable::from_table(&format!("W({})", args.group_type), args.q, &t).to_text();
        std::fs::write(&path, text).map_err(io)?;
        emit(args, &format!("{}: {} classes written", path.display(), t.irr.len()))?;
    }
    Ok(true)
}

fn run(cli: Cli) -> Result<bool, McKayError> {
    let args = match &cli.cmd {
        Cmd::Enumerate(a) | Cmd::Verify(a) | Cmd::Rationality(a) | Cmd::SpPairing(a) | Cmd::Table(a) => a.clone(),
    };
    if let Some(j) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| McKayError::Unsupported(e.to_string()))?;
    }
    match cli.cmd {
        Cmd::Enumerate(_) => enumerate(&args),
        Cmd::Verify(_) => verify(&args),
        Cmd::Rationality(_) => {
            let mut a = args.clone();
            a.twisted = true;
            report_exit(&a, &verify_rationality_n1(setting(&a)?)?)
        }
        Cmd::SpPairing(_) => {
            let n = type_c_rank(&args.group_type)
                .ok_or_else(|| McKayError::Unsupported("the pairing is for type C (or A1)".into()))?;
            report_exit(&args, &sp_pairing(n, args.q)?)
        }
        Cmd::Table(_) => {
            let dir = args.cache.clone().unwrap_or_else(|| PathBuf::from(".galmckay-cache"));
            table(&args, &dir)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
