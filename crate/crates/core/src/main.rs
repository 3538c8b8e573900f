use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use lattice_bdd::decode::{babai_nearest_plane, bdd_solve, DecodeReport};
use lattice_bdd::duality::{dual_basis, dual_identities, DualChecks};
use lattice_bdd::gso::BasisMatrix;
use lattice_bdd::harness::io::{parse_json, parse_value, to_json, Parsed};
use lattice_bdd::harness::{gen_instance_prepared, run_experiment, BddInstance, ExperimentConfig, RadiusPolicy};
use lattice_bdd::numerics::rational::rational_str;
use lattice_bdd::numerics::{ExactScalar, RatVector, Rational};
use lattice_bdd::qary::{bound_report_prepared, fact24_check, validate_spec, PreparedLattice, QaryLatticeSpec, SuffixReport};
use lattice_bdd::reduction::{is_lll_reduced, lll_reduce, svp_enumerate, ReducednessReport, ReductionTrace, DEFAULT_SVP_CAP};
use lattice_bdd::{LatticeError, LllParams, Result};

#[derive(Parser)]
#[command(name = "latbdd", version, about = "Exact LLL reduction and bounded distance decoding on q-ary lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// LLL parameter, a rational in (1/4, 1)
    #[arg(long, global = true, value_name = "P/Q")]
    delta: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    svp_cap: Option<usize>,
    #[arg(long, global = true)]
    cvp_cap: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Input file; standard input when absent
    #[arg(long = "in", global = true, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Output file; standard output when absent
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Plant a decoding instance for a q-ary lattice spec
    Gen {
        /// theorem:F, half-min-gs:F, or absolute:R
        #[arg(long, default_value = "theorem:1")]
        policy: String,
    },
    /// LLL-reduce a basis
    Reduce,
    /// Decode an instance, or a {"basis", "target"} pair with nearest plane
    Decode,
    /// Shortest nonzero vector of a basis
    Svp,
    /// Dual basis
    Dual,
    /// Bound report for a q-ary lattice spec
    Bounds,
    /// Reducedness, suffix volume, and duality checks for a basis
    Verify {
        /// Modulus for the suffix volume check
        #[arg(long)]
        q: Option<u64>,
    },
    /// Run a batch experiment from a config
    Experiment,
}

struct Ctx {
    params: LllParams,
    svp_cap: usize,
    format: Format,
    input: Option<PathBuf>,
    out: Option<PathBuf>,
}

impl Ctx {
    fn read_text(&self) -> Result<String> {
        match &self.input {
            Some(p) => Ok(fs::read_to_string(p)?),
            None => {
                let mut s = String::new();
                io::stdin().read_to_string(&mut s)?;
                Ok(s)
            }
        }
    }

    fn read<T: DeserializeOwned>(&self) -> Result<T> {
        Ok(report_notices(parse_json(&self.read_text()?)?))
    }

    fn read_value<T: DeserializeOwned>(&self, value: serde_json::Value) -> Result<T> {
        Ok(report_notices(parse_value(value)?))
    }

    fn emit<T: Serialize>(&self, value: &T, text: impl FnOnce() -> String) -> Result<()> {
        let body = match self.format {
            Format::Json => to_json(value)?,
            Format::Text => text(),
        };
        match &self.out {
            Some(p) => fs::write(p, body)?,
            None => io::stdout().write_all(body.as_bytes())?,
        }
        Ok(())
    }
}

fn report_notices<T>(parsed: Parsed<T>) -> T {
    for n in &parsed.notices {
        eprintln!("notice: {n}");
    }
    parsed.value
}

fn parse_rational(s: &str) -> Result<Rational> {
    Rational::parse_canonical(s).map(|(v, _)| v).map_err(|e| LatticeError::InvalidParameter(e.to_string()))
}

fn parse_policy(s: &str) -> Result<RadiusPolicy> {
    let (kind, value) = s
        .split_once(':')
        .ok_or_else(|| LatticeError::InvalidParameter(format!("policy {s:?} is not of the form kind:value")))?;
    let v = parse_rational(value)?;
    let p = match kind {
        "theorem" => RadiusPolicy::TheoremRadiusFraction(v),
        "half-min-gs" => RadiusPolicy::HalfMinGsFraction(v),
        "absolute" => RadiusPolicy::Absolute(v),
        _ => return Err(LatticeError::InvalidParameter(format!("unknown policy kind {kind:?}"))),
    };
    p.validate()?;
    Ok(p)
}

fn basis_text(b: &BasisMatrix) -> String {
    b.columns().iter().enumerate().map(|(i, c)| format!("b{i} = {c}\n")).collect()
}

fn check_mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct ReduceOutput {
    basis: BasisMatrix,
    trace: ReductionTrace,
}

#[derive(Serialize)]
struct DecodeOutput {
    #[serde(flatten)]
    report: DecodeReport,
    planted_recovered: Option<bool>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisTarget {
    basis: BasisMatrix,
    target: RatVector,
}

#[derive(Serialize)]
struct SvpOutput {
    vector: RatVector,
    #[serde(with = "rational_str")]
    norm_sq: Rational,
}

#[derive(Serialize)]
struct VerifyOutput {
    lll: ReducednessReport,
    is_lll_reduced: bool,
    suffix_volumes: Option<SuffixReport>,
    dual: DualChecks,
    all_pass: bool,
}

fn decode_text(r: &DecodeReport, recovered: Option<bool>) -> String {
    let mut s = format!(
        "decoded   {}\nresidual_sq {}\nradius    {:.6} ({:?})\nwithin    {}\n",
        r.decoded_vector, r.residual_sq, r.radius_guarantee, r.radius_source, r.within_guarantee
    );
    if let Some(ok) = recovered {
        s.push_str(&format!("planted   {}\n", if ok { "recovered" } else { "missed" }));
    }
    s
}

fn run(cli: Cli) -> Result<()> {
    let params = match &cli.delta {
        Some(d) => LllParams::new(parse_rational(d)?)?,
        None => LllParams::default(),
    };
    let ctx = Ctx {
        params,
        svp_cap: cli.svp_cap.unwrap_or(DEFAULT_SVP_CAP),
        format: cli.format,
        input: cli.input,
        out: cli.out,
    };
    match cli.command {
        Command::Gen { policy } => {
            let spec: QaryLatticeSpec = ctx.read()?;
            for w in validate_spec(&spec)?.warnings {
                eprintln!("warning: {w}");
            }
            let policy = parse_policy(&policy)?;
            let prep = PreparedLattice::new(&spec, &ctx.params, ctx.svp_cap)?;
            let inst = gen_instance_prepared(&prep, &policy, cli.seed.unwrap_or(0))?;
            ctx.emit(&inst, || format!("target {}\nseed   {}\n", inst.target, inst.seed))
        }
        Command::Reduce => {
            let b: BasisMatrix = ctx.read()?;
            let (reduced, trace) = lll_reduce(&b, &ctx.params)?;
            let out = ReduceOutput { basis: reduced, trace };
            ctx.emit(&out, || format!("{}swaps {}\n", basis_text(&out.basis), out.trace.swap_count))
        }
        Command::Decode => {
            let value: serde_json::Value = ctx.read()?;
            let (report, recovered) = if value.get("basis").is_some() {
                let bt: BasisTarget = ctx.read_value(value)?;
                (babai_nearest_plane(&bt.basis, &bt.target)?, None)
            } else {
                let inst: BddInstance = ctx.read_value(value)?;
                let report = bdd_solve(&inst.spec, &inst.target, &ctx.params, ctx.svp_cap)?;
                let truth = inst.planted_vector()?;
                let recovered = truth.map(|v| v == report.decoded_vector);
                (report, recovered)
            };
            let out = DecodeOutput { report, planted_recovered: recovered };
            ctx.emit(&out, || decode_text(&out.report, out.planted_recovered))
        }
        Command::Svp => {
            let b: BasisMatrix = ctx.read()?;
            let v = svp_enumerate(&b, ctx.svp_cap)?;
            let out = SvpOutput { norm_sq: v.norm_sq(), vector: v };
            ctx.emit(&out, || format!("vector  {}\nnorm_sq {}\n", out.vector, out.norm_sq))
        }
        Command::Dual => {
            let b: BasisMatrix = ctx.read()?;
            let d = dual_basis(&b)?;
            ctx.emit(&d, || basis_text(&d))
        }
        Command::Bounds => {
            let spec: QaryLatticeSpec = ctx.read()?;
            for w in validate_spec(&spec)?.warnings {
                eprintln!("warning: {w}");
            }
            let rep = bound_report_prepared(&PreparedLattice::new(&spec, &ctx.params, ctx.svp_cap)?);
            ctx.emit(&rep, || {
                format!(
                    "ln delta'      {:.9}\nd              {}\nlambda1_sq     {}\nprofile floor  {:.9}\nmin ell        {:.9} [{}]\nradius         {:.9}\nhalf min gs    {:.9}\nsuffix volumes {}\n",
                    rep.delta_prime_log,
                    rep.d,
                    rep.lambda1_sq.as_ref().map_or_else(|| "unknown (min |b*| used)".into(), |l| l.to_string()),
                    rep.prop25_floor,
                    rep.min_ell,
                    check_mark(rep.prop25_holds),
                    rep.radius,
                    rep.half_min_gs,
                    check_mark(rep.fact24_holds),
                )
            })
        }
        Command::Verify { q } => {
            let b: BasisMatrix = ctx.read()?;
            let lll = is_lll_reduced(&b, &ctx.params)?;
            let suffix_volumes = q.map(|q| fact24_check(&b, q)).transpose()?;
            let dual = dual_identities(&b)?;
            let is_reduced = lll.is_reduced();
            let all_pass = is_reduced && dual.all_hold() && suffix_volumes.as_ref().is_none_or(SuffixReport::all_hold);
            let out = VerifyOutput { lll, is_lll_reduced: is_reduced, suffix_volumes, dual, all_pass };
            ctx.emit(&out, || {
                let mut s = format!(
                    "size reduced   {}\nlovasz         {}\ndual identities {}\n",
                    check_mark(out.lll.size_reduced()),
                    check_mark(out.lll.lovasz_holds()),
                    check_mark(out.dual.all_hold())
                );
                if let Some(f) = &out.suffix_volumes {
                    s.push_str(&format!("suffix volumes {} (min log margin {:.6})\n", check_mark(f.all_hold()), f.min_log_margin()));
                }
                s
            })
        }
        Command::Experiment => {
            let mut cfg: ExperimentConfig = ctx.read()?;
            if let Some(d) = &cli.delta {
                cfg.delta = parse_rational(d)?;
            }
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(t) = cli.trials {
                cfg.trials = t;
            }
            if let Some(c) = cli.svp_cap {
                cfg.svp_cap = c;
            }
            cfg.cvp_cap = cli.cvp_cap.unwrap_or(cfg.cvp_cap);
            let summary = run_experiment(&cfg)?;
            ctx.emit(&summary, || summary.to_text())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
