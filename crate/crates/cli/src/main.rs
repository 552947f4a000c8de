use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oqam_chest::fbcore::{FilterBank, FrameGrid, PrototypeFilter};
use oqam_chest::harness::{papr_csv, papr_profile, run_sweep, ExperimentConfig, Method};
use oqam_chest::interference::InterferenceTable;
use oqam_chest::preamble::{
    generate, ExtendedLayout, Family, IamVariant, PreambleSpec, SparseLayout, StructuredSource,
    SymbolSource,
};
use oqam_chest::{Complex64, Error};

#[derive(Parser)]
#[command(
    name = "oqam",
    version,
    about = "OFDM/OQAM preamble-based channel estimation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the intrinsic interference weights of the designed prototype filter.
    Weights {
        #[arg(long = "M", default_value_t = 512)]
        m: usize,
        #[arg(long = "K", default_value_t = 3)]
        k: usize,
        /// Also write `name,value` CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Inspect preamble grids.
    Preamble {
        #[command(subcommand)]
        action: PreambleAction,
    },
    /// Run a Monte Carlo NMSE sweep.
    Simulate {
        /// TOML experiment config; omitted keys take the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// `key=value` override applied after the file, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory for `nmse.csv`, `manifest.json` and the resolved
        /// `config.toml`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Power trace and PAPR of the IAM preambles.
    Papr {
        #[arg(long = "M", default_value_t = 512)]
        m: usize,
        #[arg(long = "K", default_value_t = 3)]
        k: usize,
        /// Power traces as `method,sample_index,power` CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PreambleAction {
    /// Print one antenna's grid per block: a row per subcarrier, a column per symbol.
    Dump {
        #[arg(long)]
        family: String,
        #[arg(long = "M", default_value_t = 8)]
        m: usize,
        #[arg(long = "K", default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        antennas: usize,
        /// Receive antennas, used by MIMO POP.
        #[arg(long)]
        receive: Option<usize>,
        /// Channel length assumed by the sparse layout.
        #[arg(long, default_value_t = 2)]
        channel_len: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parameter(_) | Error::Unsupported(_) => {
                Failure::Config(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn table(m: usize, k: usize) -> Result<InterferenceTable, Failure> {
    Ok(InterferenceTable::from_filter(&PrototypeFilter::design(
        m, k,
    )?)?)
}

fn weights(m: usize, k: usize, csv: Option<&Path>) -> Result<(), Failure> {
    let t = table(m, k)?;
    println!("M = {m}, K = {k}");
    for (name, v) in [
        ("beta", t.beta),
        ("gamma", t.gamma),
        ("delta", t.delta),
        ("epsilon", t.epsilon),
    ] {
        println!("{name:<8} {v:.6}");
    }
    if let Some(path) = csv {
        let text = format!(
            "name,value\nbeta,{:.12}\ngamma,{:.12}\ndelta,{:.12}\nepsilon,{:.12}\n",
            t.beta, t.gamma, t.delta, t.epsilon
        );
        write(path, &text)?;
    }
    Ok(())
}

fn format_cell(v: Complex64) -> String {
    let num = |x: f64| {
        if x.fract() == 0.0 {
            format!("{}", x as i64)
        } else {
            format!("{x}")
        }
    };
    match (v.re, v.im) {
        (re, im) if im == 0.0 => num(re),
        (re, 1.0) if re == 0.0 => "j".into(),
        (re, -1.0) if re == 0.0 => "-j".into(),
        (re, im) if re == 0.0 => format!("{}j", num(im)),
        (re, im) => format!("{}{:+}j", num(re), im),
    }
}

fn grid_csv(frames: &[FrameGrid]) -> String {
    let n = frames[0].symbols();
    let mut out = String::from("antenna,subcarrier");
    for q in 0..n {
        out.push_str(&format!(",q{q}"));
    }
    out.push('\n');
    for (a, f) in frames.iter().enumerate() {
        for p in 0..f.subcarriers() {
            out.push_str(&format!("{a},{p}"));
            for q in 0..n {
                out.push(',');
                out.push_str(&format_cell(f.symbol(p, q)));
            }
            out.push('\n');
        }
    }
    out
}

struct DumpArgs {
    m: usize,
    k: usize,
    antennas: usize,
    receive: Option<usize>,
    channel_len: usize,
    seed: u64,
}

fn family(method: Method, a: &DumpArgs) -> Result<Family, Failure> {
    let iam = |v: IamVariant| {
        if a.antennas == 1 {
            Family::Iam(v)
        } else {
            Family::MimoIam(v)
        }
    };
    Ok(match method {
        Method::Pop if a.antennas == 1 => Family::Pop,
        Method::Pop => Family::MimoPop {
            receive_antennas: a.receive.unwrap_or(a.antennas),
            seed: a.seed,
        },
        Method::IamR => iam(IamVariant::Real),
        Method::IamI => iam(IamVariant::Imaginary(SymbolSource::Seeded(a.seed))),
        Method::IamC => iam(IamVariant::Complex),
        Method::EIamC => iam(IamVariant::Extended(ExtendedLayout::for_table(&table(
            a.m, a.k,
        )?))),
        Method::IcmA => Family::IcmA,
        Method::IcmB => Family::IcmB,
        Method::IcmC => Family::IcmC(StructuredSource::Seeded(a.seed)),
        Method::IcmD => Family::IcmD,
        Method::Sparse => Family::MimoSparse(SparseLayout::hadamard(a.channel_len, a.antennas)?),
        Method::CpOfdm => return Err(Failure::Config("cp-ofdm has no OQAM preamble grid".into())),
    })
}

fn dump(name: &str, args: DumpArgs, out: Option<&Path>) -> Result<(), Failure> {
    let method: Method = name.parse()?;
    let spec = PreambleSpec::new(family(method, &args)?, args.m).with_antennas(args.antennas);
    emit(out, &grid_csv(&generate(&spec)?))
}

fn simulate(config: Option<&Path>, overrides: &[String], out: &Path) -> Result<(), Failure> {
    let text = match config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let cfg = ExperimentConfig::from_toml(&text, overrides)?;
    let result = run_sweep(&cfg)?;
    std::fs::create_dir_all(out)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", out.display())))?;
    write(&out.join("nmse.csv"), &result.to_csv())?;
    write(&out.join("manifest.json"), &result.manifest().to_json())?;
    write(&out.join("config.toml"), &cfg.to_toml())?;
    for p in &result.points {
        let failed = if p.failures > 0 {
            format!("  ({} failed)", p.failures)
        } else {
            String::new()
        };
        println!(
            "{:<8} {:>6.1} dB  NMSE {:>8.2} dB{failed}",
            p.method.name(),
            p.snr_db,
            10.0 * p.nmse_mean.log10()
        );
    }
    Ok(())
}

fn papr(m: usize, k: usize, out: Option<&Path>) -> Result<(), Failure> {
    let bank = FilterBank::new(PrototypeFilter::design(m, k)?);
    let args = DumpArgs {
        m,
        k,
        antennas: 1,
        receive: None,
        channel_len: 2,
        seed: 1,
    };
    let mut entries = Vec::new();
    for method in [Method::IamR, Method::IamI, Method::IamC, Method::EIamC] {
        let frames = generate(&PreambleSpec::new(family(method, &args)?, m))?;
        let profile = papr_profile(&frames, &bank)?;
        println!(
            "{:<8} peak {:>10.3}  mean {:>8.4}  PAPR {:>6.2} dB",
            method.name(),
            profile.peak,
            profile.mean,
            profile.papr_db()
        );
        entries.push((method.name().to_string(), profile));
    }
    if let Some(path) = out {
        write(path, &papr_csv(&entries))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Weights { m, k, csv } => weights(m, k, csv.as_deref()),
        Command::Preamble {
            action:
                PreambleAction::Dump {
                    family,
                    m,
                    k,
                    antennas,
                    receive,
                    channel_len,
                    seed,
                    out,
                },
        } => dump(
            &family,
            DumpArgs {
                m,
                k,
                antennas,
                receive,
                channel_len,
                seed,
            },
            out.as_deref(),
        ),
        Command::Simulate {
            config,
            overrides,
            out,
        } => simulate(config.as_deref(), &overrides, &out),
        Command::Papr { m, k, out } => papr(m, k, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("oqam: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("oqam: {msg}");
            ExitCode::from(4)
        }
    }
}
