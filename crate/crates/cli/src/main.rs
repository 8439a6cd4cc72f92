use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::json;
use sqfree::costmodel::emit_curves;
use sqfree::driver::{self, DecomposeMode, DecomposeOptions};
use sqfree::gauss::{gauss_sum, GaussSumTable};
use sqfree::numtheory::{binary_gcd, gcd_u64, jacobi_binary, jacobi_u64};
use sqfree::qsim::{omega, OmegaMode, OmegaReport};
use sqfree::reversible::{
    build_gcd_circuit, build_gcd_circuit_clean, build_jacobi_circuit, build_jacobi_circuit_clean,
    decode_jacobi, gate_count, permutation_check_method, to_netlist, verify_permutation,
    write_gate_count_csv, GateKind, PermutationCheck, ReversibleCircuit,
};
use sqfree::{Error, Result};

/// Square-free decomposition by Gauss sums, with its simulator, reversible
/// circuits and cost model.
#[derive(Debug, Parser)]
#[command(name = "sqfree", version)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format for structured results.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Sample,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CircuitKind {
    Gcd,
    Jacobi,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose N = r * s^2 and print the recursion trace.
    Decompose {
        n: u64,
        #[arg(long, value_enum, default_value = "sample")]
        mode: Mode,
        /// Split on square M2 gcds instead of recursing on N / z^2.
        #[arg(long)]
        plain: bool,
    },
    /// One run of the Gauss-sum subroutine, or its outcome distribution.
    Omega {
        n: u64,
        #[arg(long, value_enum, default_value = "sample")]
        mode: Mode,
    },
    /// G(a, chi_N), or the table over all a.
    Gauss { n: u64, a: Option<u64> },
    /// Jacobi symbol (m / N).
    Jacobi { m: BigUint, n: BigUint },
    /// Binary GCD.
    Gcd { u: BigUint, v: BigUint },
    /// Build a reversible circuit and print its netlist.
    Circuit {
        #[arg(value_enum)]
        kind: CircuitKind,
        #[arg(long)]
        bits: u32,
        /// Odd modulus for the Jacobi circuit; defaults to 2^bits - 1.
        #[arg(long)]
        modulus: Option<u64>,
        /// Copy the result out and uncompute all scratch registers.
        #[arg(long)]
        clean: bool,
        /// Check bijectivity and, up to 8 bits, the classical oracle.
        #[arg(long)]
        verify: bool,
    },
    /// Upper bound on the chance the recursion is unfinished after K steps.
    Bound {
        n: u64,
        #[arg(long)]
        k: u32,
    },
    /// Cost curves in log10 units for 2..=D decimal digits.
    BenchCosts {
        #[arg(long)]
        max_digits: u32,
        #[arg(long, default_value_t = 1)]
        step: u32,
    },
}

/// Largest width for which `--verify` also runs the exhaustive oracle.
const MAX_ORACLE_BITS: u32 = 8;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let mut buf = Vec::new();
    dispatch(cli, &mut buf)?;
    match &cli.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(&buf)?;
            f.flush()?;
        }
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

/// Fixed six decimals without a negative zero.
fn fixed(x: f64) -> String {
    let s = format!("{x:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn write_json<W: Write, T: serde::Serialize>(out: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn dispatch<W: Write>(cli: &Cli, out: &mut W) -> Result<()> {
    match &cli.command {
        &Command::Decompose { n, mode, plain } => {
            let mode = match mode {
                Mode::Sample => DecomposeMode::Sample { seed: cli.seed },
                Mode::Exhaustive => DecomposeMode::Exhaustive,
            };
            let (d, trace) = driver::decompose(n, DecomposeOptions { mode, refine: !plain })?;
            if cli.format == Some(Format::Csv) {
                writeln!(out, "N,r,s,rounds")?;
                writeln!(out, "{n},{},{},{}", d.r, d.s, driver::rounds_to_finish(&trace))?;
            } else {
                write_json(out, &trace)?;
            }
        }
        &Command::Omega { n, mode } => {
            let mode = match mode {
                Mode::Sample => OmegaMode::Sample { seed: cli.seed },
                Mode::Exhaustive => OmegaMode::Exhaustive,
            };
            let report = omega(n, mode)?;
            if cli.format == Some(Format::Csv) {
                write_omega_csv(out, &report)?;
            } else {
                write_json(out, &report)?;
            }
        }
        &Command::Gauss { n, a: Some(a) } => {
            let g = gauss_sum(a, n)?;
            if cli.format == Some(Format::Json) {
                write_json(out, &json!({ "N": n, "a": a, "re": g.re, "im": g.im }))?;
            } else {
                writeln!(out, "{} {}", fixed(g.re), fixed(g.im))?;
            }
        }
        &Command::Gauss { n, a: None } => {
            let table = GaussSumTable::compute(n)?;
            let rows = table
                .values()
                .iter()
                .enumerate()
                .map(|(a, g)| (a as u64, g, gcd_u64(a as u64, n)));
            if cli.format == Some(Format::Json) {
                let rows: Vec<_> = rows
                    .map(|(a, g, d)| json!({ "a": a, "re": g.re, "im": g.im, "gcd": d }))
                    .collect();
                write_json(out, &json!({ "N": n, "values": rows }))?;
            } else {
                writeln!(out, "a,re,im,gcd")?;
                for (a, g, d) in rows {
                    writeln!(out, "{a},{},{},{d}", fixed(g.re), fixed(g.im))?;
                }
            }
        }
        Command::Jacobi { m, n } => {
            let value = jacobi_binary(m, n)?;
            if cli.format == Some(Format::Json) {
                write_json(out, &json!({ "m": m.to_string(), "N": n.to_string(), "jacobi": value.to_i8() }))?;
            } else {
                writeln!(out, "{value}")?;
            }
        }
        Command::Gcd { u, v } => {
            let g = binary_gcd(u, v);
            if cli.format == Some(Format::Json) {
                write_json(out, &json!({ "u": u.to_string(), "v": v.to_string(), "gcd": g.to_string() }))?;
            } else {
                writeln!(out, "{g}")?;
            }
        }
        &Command::Circuit {
            kind,
            bits,
            modulus,
            clean,
            verify,
        } => {
            let circuit = build_circuit(kind, bits, modulus, clean)?;
            let verified = if verify {
                verify_circuit(&circuit, kind, bits, modulus)?;
                Some(permutation_check_method(&circuit))
            } else {
                None
            };
            let count = gate_count(&circuit);
            match cli.format {
                Some(Format::Json) => {
                    let by_kind: serde_json::Map<_, _> = GateKind::ALL
                        .iter()
                        .map(|k| (k.name().to_string(), json!(count.by_kind.get(k).copied().unwrap_or(0))))
                        .collect();
                    let mut value = json!({
                        "circuit": match kind { CircuitKind::Gcd => "gcd", CircuitKind::Jacobi => "jacobi" },
                        "bits": bits,
                        "width": circuit.width(),
                        "clean": clean,
                        "gates": count.total,
                        "by_kind": by_kind,
                    });
                    if let Some(method) = verified {
                        value["verified"] = json!(check_name(method));
                    }
                    write_json(out, &value)?;
                }
                Some(Format::Csv) => write_gate_count_csv(&[(bits, count)], &mut *out)?,
                None => {
                    if let Some(method) = verified {
                        writeln!(out, "# verified: {}", check_name(method))?;
                    }
                    out.write_all(to_netlist(&circuit).as_bytes())?;
                }
            }
        }
        &Command::Bound { n, k } => {
            let report = driver::iteration_bound(n, k)?;
            if cli.format == Some(Format::Json) {
                write_json(out, &report)?;
            } else {
                driver::write_bounds_csv(&[report], &mut *out)?;
            }
        }
        &Command::BenchCosts { max_digits, step } => {
            if cli.format == Some(Format::Json) {
                let points = emit_curves(2, max_digits, step, io::sink())?;
                write_json(out, &points)?;
            } else {
                emit_curves(2, max_digits, step, &mut *out)?;
            }
        }
    }
    Ok(())
}

fn write_omega_csv<W: Write>(out: &mut W, report: &OmegaReport) -> Result<()> {
    match report {
        OmegaReport::Distribution(set) => {
            writeln!(out, "kind,factor,probability,exact")?;
            for e in &set.entries {
                let kind = serde_json::to_value(e.kind)?;
                writeln!(
                    out,
                    "{},{},{},{}",
                    kind.as_str().unwrap_or_default(),
                    e.factor.map(|f| f.to_string()).unwrap_or_default(),
                    fixed(e.probability),
                    e.exact.map(|r| r.to_string()).unwrap_or_default(),
                )?;
            }
        }
        OmegaReport::Run(trace) => {
            let kind = serde_json::to_value(trace.classification)?;
            writeln!(out, "N,seed,m1,m2,kind,factor")?;
            writeln!(
                out,
                "{},{},{},{},{},{}",
                trace.n,
                trace.seed,
                trace.m1_outcome,
                trace.m2_outcome.map(|v| v.to_string()).unwrap_or_default(),
                kind.as_str().unwrap_or_default(),
                trace.factor.map(|f| f.to_string()).unwrap_or_default(),
            )?;
        }
    }
    Ok(())
}

fn default_modulus(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn build_circuit(kind: CircuitKind, bits: u32, modulus: Option<u64>, clean: bool) -> Result<ReversibleCircuit> {
    match kind {
        CircuitKind::Gcd if modulus.is_some() => Err(Error::Circuit("--modulus applies to the jacobi circuit only".into())),
        CircuitKind::Gcd if clean => build_gcd_circuit_clean(bits),
        CircuitKind::Gcd => build_gcd_circuit(bits),
        CircuitKind::Jacobi => {
            let n = modulus.unwrap_or_else(|| default_modulus(bits));
            if clean {
                build_jacobi_circuit_clean(bits, n)
            } else {
                build_jacobi_circuit(bits, n)
            }
        }
    }
}

fn check_name(method: PermutationCheck) -> &'static str {
    match method {
        PermutationCheck::Global => "global",
        PermutationCheck::GateLocal => "gate-local",
    }
}

fn verify_circuit(circuit: &ReversibleCircuit, kind: CircuitKind, bits: u32, modulus: Option<u64>) -> Result<()> {
    if !verify_permutation(circuit)? {
        return Err(Error::Circuit("circuit is not a bijection".into()));
    }
    if bits > MAX_ORACLE_BITS {
        return Ok(());
    }
    let output = if circuit.layout().get(sqfree::reversible::OUT).is_ok() {
        sqfree::reversible::OUT
    } else {
        "r"
    };
    let limit = 1u64 << bits;
    for x in 0..limit {
        match kind {
            CircuitKind::Gcd => {
                for y in 0..limit {
                    let mut state = circuit.encode(&[("u", x), ("v", y)])?;
                    check_contract(circuit, &state)?;
                    circuit.run(&mut state);
                    let got = circuit.read(&state, output)?;
                    if got != gcd_u64(x, y) {
                        return Err(Error::Circuit(format!("gcd({x}, {y}) gave {got}")));
                    }
                }
            }
            CircuitKind::Jacobi => {
                let n = modulus.unwrap_or_else(|| default_modulus(bits));
                let mut state = circuit.encode(&[("a", x)])?;
                check_contract(circuit, &state)?;
                circuit.run(&mut state);
                let got = decode_jacobi(circuit.read(&state, output)?, n);
                if got != Some(jacobi_u64(x, n)?) {
                    return Err(Error::Circuit(format!("jacobi({x}, {n}) gave {got:?}")));
                }
            }
        }
    }
    Ok(())
}

fn check_contract(circuit: &ReversibleCircuit, input: &sqfree::reversible::BitString) -> Result<()> {
    let violations = circuit.contract_violations(input)?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Circuit(format!("registers not restored: {}", violations.join(", "))))
    }
}
