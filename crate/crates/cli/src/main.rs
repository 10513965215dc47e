//! `wb`: frames, universal polynomials, Witt arithmetic and verification
//! suites for finite p-groups.
//!
//! Exit status: 0 on success or a passing suite, 1 when a suite fails,
//! 2 on a usage error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use wb_core::frame::FrameOptions;
use wb_core::polygen::{self, Congruence, CongruenceParams};
use wb_core::verify::{self, VerifyReport, DEFAULT_TRIALS};
use wb_core::{
    build_frame_with, BigInt, CoeffRing, Frame, GroupSpec, Ideal, Integers, IntegersMod, PolyKind,
    WittRing, WittVector,
};

#[derive(Parser, Debug)]
#[command(name = "wb", version, about = "Witt vectors over frames of finite p-groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the frame: nodes, order, covers and map counts.
    Frame {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Universal sum or product polynomials up to a node size cap.
    Poly {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, value_enum, default_value_t = KindArg::Sum)]
        kind: KindArg,
        /// Largest node size to generate; defaults to p^2, at most p^3.
        #[arg(long, env = "WB_SIZE_CAP")]
        cap: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// One Witt vector operation.
    Witt {
        #[arg(value_enum)]
        op: WittOp,
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        vec: VectorArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u32,
        /// Ideal exponents for `ideals`: I_{p^m} I_{p^n}.
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Number of products summed for `congruence-gen3`.
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long, env = "WB_SIZE_CAP")]
        cap: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct GroupArgs {
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// Rank of (Z/p^n)^d.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Truncation exponent n.
    #[arg(long = "trunc", default_value_t = 2)]
    trunc: u32,
    /// Comma-separated exponents of Z/p^e1 x ... instead of (Z/p^n)^d.
    #[arg(long, value_delimiter = ',', conflicts_with = "dihedral")]
    exponents: Option<Vec<u32>>,
    /// Dihedral group of order 2^k.
    #[arg(long, value_name = "K")]
    dihedral: Option<u32>,
    /// JSON file with {"table": [[...]], "identity": e}.
    #[arg(long, conflicts_with_all = ["dihedral", "exponents"])]
    cayley: Option<PathBuf>,
    /// Keep only frame nodes of at most this size.
    #[arg(long)]
    max_size: Option<u64>,
    /// Accept any prime, not only 2, 3, 5.
    #[arg(long)]
    any_prime: bool,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Shorthand for --format json.
    #[arg(long)]
    json: bool,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct VectorArgs {
    /// Coefficient ring: z, fp, or mod:M.
    #[arg(long, default_value = "fp")]
    ring: String,
    /// First operand: comma-separated integers, a JSON array, or @file.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Second operand, same forms as --a.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// Node id for teich, or top node for project and K ideals.
    #[arg(long)]
    node: Option<usize>,
    /// Value for teich, integer for scalar, n for I_n.
    #[arg(long, allow_hyphen_values = true)]
    value: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    Sum,
    Product,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum WittOp {
    Add,
    Sub,
    Mul,
    Neg,
    Scalar,
    Teich,
    Ghost,
    Ghostinv,
    Inv,
    Project,
    Ideal,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Suite {
    Ratio,
    Ideals,
    Linked,
    Annihilator,
    Nondomain,
    Nilpotent,
    Reduced,
    Prime,
    Homogeneity,
    CongruenceGen1,
    CongruenceGen3,
    CongruenceNicyclicprod,
    CongruencePmult,
}

/// Bad input from the user, as opposed to a failed check.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Usage(msg.into()))
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| p % k != 0)
}

impl GroupArgs {
    fn spec(&self) -> Result<GroupSpec> {
        if let Some(path) = &self.cayley {
            #[derive(Deserialize)]
            struct Table {
                table: Vec<Vec<u32>>,
                identity: u32,
            }
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let t: Table = serde_json::from_str(&text).map_err(|e| usage(format!("--cayley: {e}")))?;
            return GroupSpec::cayley(t.table, t.identity).map_err(|e| usage(format!("--cayley: {e}")));
        }
        if let Some(k) = self.dihedral {
            return GroupSpec::dihedral(k).map_err(|e| usage(format!("--dihedral: {e}")));
        }
        if !is_prime(self.p) {
            return Err(usage(format!("--p {}: not a prime", self.p)));
        }
        if !self.any_prime && ![2, 3, 5].contains(&self.p) {
            return Err(usage(format!("--p {}: expected 2, 3 or 5 (pass --any-prime to override)", self.p)));
        }
        if self.trunc == 0 {
            return Err(usage("--trunc must be at least 1"));
        }
        let spec = match &self.exponents {
            Some(e) => GroupSpec::abelian(self.p, e.clone()),
            None => GroupSpec::homocyclic(self.p, self.d, self.trunc),
        };
        spec.map_err(|e| usage(e.to_string()))
    }

    fn frame(&self) -> Result<Arc<Frame>> {
        let spec = self.spec()?;
        let opts = FrameOptions {
            max_size: self.max_size.unwrap_or(u64::MAX),
            ..FrameOptions::default()
        };
        let f = build_frame_with(&spec, opts).map_err(|e| usage(e.to_string()))?;
        Ok(Arc::new(f))
    }
}

impl OutArgs {
    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }

    fn emit(&self, body: &str) -> Result<()> {
        let mut body = body.to_string();
        if !body.ends_with('\n') {
            body.push('\n');
        }
        match &self.out {
            Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
            None => io::stdout().write_all(body.as_bytes()).context("writing stdout"),
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn cmd_frame(group: &GroupArgs, out: &OutArgs) -> Result<bool> {
    let f = group.frame()?;
    let body = match out.format() {
        Format::Text => f.to_text(),
        Format::Json => pretty(&f.to_json())?,
        Format::Dot => f.to_dot(),
    };
    out.emit(&body)?;
    Ok(true)
}

fn cmd_poly(group: &GroupArgs, kind: KindArg, cap: Option<u64>, out: &OutArgs) -> Result<bool> {
    let f = group.frame()?;
    let kind = match kind {
        KindArg::Sum => PolyKind::Sum,
        KindArg::Product => PolyKind::Product,
    };
    let set = polygen::gen_polys(&f, kind, cap).map_err(|e| usage(e.to_string()))?;
    let body = match out.format() {
        Format::Json => pretty(&set.to_json())?,
        Format::Text => set.to_text(),
        Format::Dot => return Err(usage("--format dot only applies to frames")),
    };
    out.emit(&body)?;
    Ok(true)
}

fn parse_vector(arg: &str, flag: &str) -> Result<Vec<BigInt>> {
    let text = match arg.strip_prefix('@') {
        Some("-") => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => arg.to_string(),
    };
    let text = text.trim();
    let parse = |s: &str| {
        s.trim()
            .trim_matches('"')
            .parse::<BigInt>()
            .map_err(|_| usage(format!("{flag}: {s:?} is not an integer")))
    };
    if text.starts_with('{') || text.starts_with('[') {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| usage(format!("{flag}: {e}")))?;
        let coords = v.get("coords").unwrap_or(&v);
        let items = coords
            .as_array()
            .ok_or_else(|| usage(format!("{flag}: expected an array of coordinates")))?;
        items
            .iter()
            .map(|c| match c {
                serde_json::Value::String(s) => parse(s),
                serde_json::Value::Number(n) => parse(&n.to_string()),
                _ => Err(usage(format!("{flag}: coordinates must be integers"))),
            })
            .collect()
    } else {
        text.split(',').filter(|s| !s.trim().is_empty()).map(parse).collect()
    }
}

enum RingArg {
    Z,
    Mod(BigInt),
}

fn parse_ring(s: &str, p: Option<u32>) -> Result<RingArg> {
    match s {
        "z" | "Z" => Ok(RingArg::Z),
        "fp" | "Fp" => p
            .map(|p| RingArg::Mod(BigInt::from(p)))
            .ok_or_else(|| usage("--ring fp needs a p-group frame")),
        _ => {
            let m = s
                .strip_prefix("mod:")
                .and_then(|m| m.parse::<BigInt>().ok())
                .filter(|m| *m >= BigInt::from(2))
                .ok_or_else(|| usage(format!("--ring {s:?}: expected z, fp or mod:M with M >= 2")))?;
            Ok(RingArg::Mod(m))
        }
    }
}

fn vector_json<R: CoeffRing<Elem = BigInt>>(w: &WittRing<R>, v: &WittVector<BigInt>) -> serde_json::Value {
    serde_json::json!({
        "group": w.frame().spec().to_string(),
        "ring": w.ring().tag(),
        "coords": v.coords.iter().map(ToString::to_string).collect::<Vec<_>>(),
    })
}

fn render(value: &serde_json::Value, format: Format) -> Result<String> {
    match format {
        Format::Json => pretty(value),
        Format::Dot => Err(usage("--format dot only applies to frames")),
        Format::Text => Ok(match value.get("coords") {
            Some(serde_json::Value::Array(c)) => {
                let parts: Vec<&str> = c.iter().filter_map(|x| x.as_str()).collect();
                format!("({})", parts.join(", "))
            }
            _ => value
                .as_object()
                .map(|o| {
                    o.iter()
                        .map(|(k, v)| format!("{k}: {v}"))
                        .collect::<Vec<_>>()
                        .join("\n")
                })
                .unwrap_or_else(|| value.to_string()),
        }),
    }
}

fn witt_op<R: CoeffRing<Elem = BigInt, Lift = BigInt>>(w: &WittRing<R>, op: WittOp, args: &VectorArgs) -> Result<serde_json::Value> {
    let need = |arg: &Option<String>, flag: &str| -> Result<WittVector<BigInt>> {
        let raw = arg.as_deref().ok_or_else(|| usage(format!("{flag} is required for this operation")))?;
        let coords = parse_vector(raw, flag)?;
        w.vector(coords).map_err(|e| usage(format!("{flag}: {e}")))
    };
    let value = |flag: &str| -> Result<BigInt> {
        let raw = args.value.as_deref().ok_or_else(|| usage(format!("--value is required ({flag})")))?;
        raw.parse::<BigInt>().map_err(|_| usage(format!("--value {raw:?} is not an integer")))
    };
    let node = || -> Result<usize> {
        let t = args.node.ok_or_else(|| usage("--node is required for this operation"))?;
        if t >= w.frame().len() {
            return Err(usage(format!("--node {t}: frame has {} nodes", w.frame().len())));
        }
        Ok(t)
    };
    let v = match op {
        WittOp::Add => w.add(&need(&args.a, "--a")?, &need(&args.b, "--b")?)?,
        WittOp::Sub => w.sub(&need(&args.a, "--a")?, &need(&args.b, "--b")?)?,
        WittOp::Mul => w.mul(&need(&args.a, "--a")?, &need(&args.b, "--b")?)?,
        WittOp::Neg => w.neg(&need(&args.a, "--a")?)?,
        WittOp::Scalar => w.int_scalar(&value("integer multiplier")?, &need(&args.a, "--a")?)?,
        WittOp::Teich => {
            let t = node()?;
            let c = w.ring().reduce(value("Teichmuller value")?);
            w.teichmuller(t, c)
        }
        WittOp::Ghost => {
            let g = w.ghost(&need(&args.a, "--a")?)?;
            return Ok(serde_json::json!({
                "group": w.frame().spec().to_string(),
                "ring": w.ring().tag(),
                "coords": g.comps.iter().map(ToString::to_string).collect::<Vec<_>>(),
            }));
        }
        WittOp::Ghostinv => {
            let g = wb_core::GhostVector {
                comps: need(&args.a, "--a")?.coords,
            };
            w.ghost_inverse(&g)?
        }
        WittOp::Inv => w.invert_unit(&need(&args.a, "--a")?)?,
        WittOp::Project => {
            let t = node()?;
            let keep = w.frame().downset(t).to_vec();
            let (sub, v) = w.project(&need(&args.a, "--a")?, &keep)?;
            return Ok(vector_json(&sub, &v));
        }
        WittOp::Ideal => {
            let a = need(&args.a, "--a")?;
            let ideal = match (args.node, args.value.as_deref()) {
                (Some(_), None) => Ideal::K(node()?),
                (None, Some(_)) => {
                    let n = value("n of I_n")?;
                    Ideal::I(u64::try_from(&n).map_err(|_| usage("--value must be a positive size"))?)
                }
                _ => return Err(usage("ideal needs exactly one of --node (K ideal) or --value (I_n)")),
            };
            return Ok(serde_json::json!({ "ideal": format!("{ideal:?}"), "member": w.in_ideal(&a, &ideal) }));
        }
    };
    Ok(vector_json(w, &v))
}

fn cmd_witt(op: WittOp, group: &GroupArgs, args: &VectorArgs, out: &OutArgs) -> Result<bool> {
    let f = group.frame()?;
    let value = match parse_ring(&args.ring, f.prime())? {
        RingArg::Z => witt_op(&WittRing::new(f, Integers), op, args),
        RingArg::Mod(m) => witt_op(&WittRing::new(f, IntegersMod::new(m)), op, args),
    };
    // Arithmetic errors (non-unit, non-integral ghost vector) come from the input.
    let value = value.map_err(|e| if e.is::<Usage>() { e } else { usage(format!("{e:#}")) })?;
    out.emit(&render(&value, out.format())?)?;
    Ok(true)
}

struct VerifyArgs {
    suite: Suite,
    seed: u64,
    trials: u32,
    m: u32,
    n: u32,
    r: u32,
    cap: Option<u64>,
}

fn run_suite(group: &GroupArgs, a: &VerifyArgs) -> Result<VerifyReport> {
    let (p, d, n) = (group.p, group.d, group.trunc);
    let domain = |e: verify::VerifyError| usage(e.to_string());
    // Suites built on (Z/p^n)^d read only --p, --d, --trunc; the rest take
    // any frame from the group flags.
    let report = match a.suite {
        Suite::Ratio => verify::check_ratio_property(&*group.frame()?),
        Suite::Ideals => verify::check_ideal_products(&group.frame()?, a.m, a.n, a.seed, a.trials).map_err(domain)?,
        Suite::Linked => verify::check_linked_constraints(&group.frame()?, a.seed, a.trials).map_err(domain)?,
        Suite::Annihilator => {
            group.spec()?;
            verify::check_annihilator(p, n, a.seed, a.trials).map_err(domain)?
        }
        Suite::Nondomain => {
            group.spec()?;
            verify::check_nondomain(p, d, n).map_err(domain)?
        }
        Suite::Nilpotent => {
            group.spec()?;
            verify::nilpotent_witness(p, n).map_err(domain)?.1
        }
        Suite::Reduced => {
            group.spec()?;
            verify::check_reduced_coordinate(p, n, a.seed, a.trials).map_err(domain)?
        }
        Suite::Prime => {
            group.spec()?;
            verify::prime_ideal_paths(p, n, a.seed, a.trials).map_err(domain)?
        }
        Suite::Homogeneity => {
            let f = group.frame()?;
            let params = verify::ReportParams {
                p: f.prime(),
                d: f.rank(),
                truncation: f.truncation(),
                ..Default::default()
            };
            let mut report = VerifyReport::new("homogeneity", params);
            for kind in [PolyKind::Sum, PolyKind::Product] {
                let set = polygen::gen_polys(&f, kind, a.cap).map_err(|e| usage(e.to_string()))?;
                report.absorb(polygen::check_homogeneity(&set));
            }
            report
        }
        Suite::CongruenceGen1 | Suite::CongruenceGen3 | Suite::CongruenceNicyclicprod | Suite::CongruencePmult => {
            let which = match a.suite {
                Suite::CongruenceGen1 => Congruence::Gen1,
                Suite::CongruenceGen3 => Congruence::Gen3,
                Suite::CongruenceNicyclicprod => Congruence::NiCyclicProd,
                _ => Congruence::PMult,
            };
            let params = CongruenceParams { r: a.r, size_cap: a.cap };
            polygen::universal_congruence(&*group.frame()?, which, &params).map_err(|e| usage(e.to_string()))?
        }
    };
    Ok(report)
}

fn cmd_verify(group: &GroupArgs, a: &VerifyArgs, out: &OutArgs) -> Result<bool> {
    if a.trials == 0 {
        bail!(Usage("--trials must be at least 1".into()));
    }
    let report = run_suite(group, a)?;
    let body = match out.format() {
        Format::Json => pretty(&report)?,
        Format::Text => report.to_text(),
        Format::Dot => return Err(usage("--format dot only applies to frames")),
    };
    out.emit(&body)?;
    Ok(report.passed())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Frame { group, out } => cmd_frame(&group, &out),
        Command::Poly { group, kind, cap, out } => cmd_poly(&group, kind, cap, &out),
        Command::Witt { op, group, vec, out } => cmd_witt(op, &group, &vec, &out),
        Command::Verify {
            suite,
            group,
            seed,
            trials,
            m,
            n,
            r,
            cap,
            out,
        } => cmd_verify(&group, &VerifyArgs { suite, seed, trials, m, n, r, cap }, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<Usage>() { 2 } else { 1 })
        }
    }
}
