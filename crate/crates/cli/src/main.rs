use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use phasekick::algorithms::{
    affine_recovery, bernstein_vazirani, default_iterations, deutsch, deutsch_jozsa, grover_search,
    mach_zehnder, parity_promise, pattern_generate, AffineSpec, GroverOracle, PatternSpec,
};
use phasekick::analysis::{phase_grid, sweep_success_bound, sweep_tail_bound, BoundSweepReport};
use phasekick::order_finding::{
    find_order_with_cap, mod_exp, rsa_crack, totient_decrypt, OrderProblem, RsaInstance,
    DEFAULT_TRIAL_CAP,
};
use phasekick::phase_estimation::{
    analytic_distribution, estimate_phase, estimate_phase_amplified, precision_for_error,
    wrap_distance, DiagonalPhaseOracle,
};
use phasekick::qft::{inverse_qft, qft, QftPlan};
use phasekick::statevec::{sample_index, set_max_qubits};
use phasekick::{Error, Oracle, Prng, StateVector};

/// Environment variable overriding the soft qubit cap.
const MAX_QUBITS_ENV: &str = "PHASEKICK_MAX_QUBITS";

const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "phasekick",
    version,
    about = "State-vector simulations of phase-kickback algorithms"
)]
struct Cli {
    #[command(flatten)]
    run: RunOptions,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunOptions {
    /// Seed for the measurement generator
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of measured runs to sample
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    /// Emit a single JSON record instead of text
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args, Debug)]
struct OracleSource {
    /// Inline table, e.g. "0->0,1->1"
    #[arg(long, conflicts_with = "table_file")]
    table: Option<String>,
    /// File holding one `x -> y` line per input
    #[arg(long)]
    table_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detector probabilities of a Mach-Zehnder interferometer
    MachZehnder {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi0: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi1: f64,
    },
    /// Constant or balanced for a one-bit function
    Deutsch {
        #[command(flatten)]
        oracle: OracleSource,
    },
    /// Deutsch-Jozsa; oracles with several output bits use the parity promise
    Dj {
        #[command(flatten)]
        oracle: OracleSource,
    },
    /// Recover `a` from f(x) = a.x xor b
    Bv {
        #[command(flatten)]
        oracle: OracleSource,
        /// Build f from --n, --a, --b instead of a table
        #[arg(long, requires = "a")]
        n: Option<usize>,
        #[arg(long)]
        a: Option<u64>,
        #[arg(long, default_value_t = 0)]
        b: u64,
    },
    /// Recover the matrix of f(x) = A x xor b in m queries
    Affine {
        #[command(flatten)]
        oracle: OracleSource,
        /// Input width when building f from --rows
        #[arg(long, requires = "rows")]
        n: Option<usize>,
        /// Rows of A as n-bit integers
        #[arg(long, value_delimiter = ',')]
        rows: Option<Vec<u64>>,
        #[arg(long, default_value_t = 0)]
        b: u64,
    },
    /// Search for the single tagged item among 2^n
    Grover {
        #[arg(long)]
        n: usize,
        /// Tagged item
        #[arg(long)]
        k: u64,
        /// Iterations; defaults to the optimal count
        #[arg(long)]
        iterations: Option<u64>,
    },
    /// Fourier transform of a basis state by the gate network
    Qft {
        #[arg(long)]
        m: usize,
        /// Basis state to transform
        #[arg(long, default_value_t = 0)]
        input: u64,
        #[arg(long)]
        inverse: bool,
    },
    /// Estimate phi from a diagonal unitary's |1> eigenstate
    PhaseEst {
        #[arg(long)]
        phi: f64,
        /// Readout bits
        #[arg(long, required_unless_present = "epsilon")]
        m: Option<u32>,
        /// Failure probability; reads extra bits and rounds to --n
        #[arg(long, requires = "n")]
        epsilon: Option<f64>,
        /// Accurate bits wanted with --epsilon
        #[arg(long)]
        n: Option<u32>,
    },
    /// Best-estimate probability against 4/pi^2 over a phase grid
    PhaseSweep {
        /// Readout widths, comma separated
        #[arg(long, value_delimiter = ',', default_values_t = [3u32, 4, 5, 6, 7, 8, 9, 10])]
        m: Vec<u32>,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        /// Also write the sweep points as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Tail mass beyond k/2^m against 1/(2k-1)
    TailSweep {
        #[arg(long, value_delimiter = ',', default_values_t = [2u32, 3, 4, 5, 6, 7, 8, 9, 10])]
        m: Vec<u32>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        k_min: Option<u64>,
        #[arg(long)]
        k_max: Option<u64>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Multiplicative order of a modulo N
    OrderFind {
        #[arg(long)]
        a: u64,
        #[arg(long = "N")]
        modulus: u64,
        /// Control bits; defaults to twice the target width
        #[arg(long)]
        m: Option<usize>,
        /// Maximum number of network runs
        #[arg(long, default_value_t = DEFAULT_TRIAL_CAP, value_parser = clap::value_parser!(u32).range(1..))]
        cap: u32,
    },
    /// Decrypt C = P^e mod N through the order of C
    RsaCrack {
        #[arg(long = "N")]
        modulus: u64,
        #[arg(long)]
        e: u64,
        #[arg(long = "C")]
        ciphertext: u64,
        /// Prime factors of N for the classical cross-check
        #[arg(long, value_delimiter = ',')]
        factors: Option<Vec<u64>>,
    },
    /// Write the phase pattern exp(2 pi i phi(x) / 2^m) onto n qubits
    Pattern {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// 2^n numerators, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        phi: Vec<u64>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
    Sim(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Sim(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => 2,
            CliError::Sim(Error::Domain(_) | Error::Validation(_) | Error::Capacity(_)) => 2,
            CliError::Sim(Error::Failure(_)) => 3,
            CliError::Sim(Error::Internal(_)) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Input(m) => m.clone(),
            CliError::Sim(e) => e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn load_oracle(src: &OracleSource) -> CliResult<Oracle> {
    let text = match (&src.table, &src.table_file) {
        (Some(t), _) => t.clone(),
        (None, Some(path)) => fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?,
        (None, None) => {
            return Err(CliError::Usage(
                "an oracle is required: pass --table or --table-file".into(),
            ))
        }
    };
    Ok(Oracle::parse(&text)?)
}

/// Runs `sample` `shots` times; the first run's report is the record and any
/// further outcomes are attached as `samples`.
fn with_samples(
    shots: u64,
    rng: &mut Prng,
    mut sample: impl FnMut(&mut Prng) -> CliResult<(Value, u64)>,
) -> CliResult<Value> {
    let (mut record, first) = sample(rng)?;
    if shots > 1 {
        let mut outcomes = vec![first];
        for _ in 1..shots {
            outcomes.push(sample(rng)?.1);
        }
        record["samples"] = json!(outcomes);
    }
    Ok(record)
}

fn sweep_record(report: &BoundSweepReport, csv: Option<&PathBuf>) -> CliResult<Value> {
    if let Some(path) = csv {
        let file = fs::File::create(path)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
        report.write_csv(io::BufWriter::new(file))?;
    }
    let mut record = to_value(report);
    record["passed"] = json!(report.passed());
    record["worst_point"] = to_value(&report.worst_point());
    Ok(record)
}

fn run(cmd: &Command, opts: &RunOptions) -> CliResult<Value> {
    let mut rng = Prng::seed_from_u64(opts.seed);
    let shots = opts.shots;
    match cmd {
        Command::MachZehnder { phi0, phi1 } => {
            let rep = mach_zehnder(*phi0, *phi1)?;
            with_samples(shots, &mut rng, |rng| {
                Ok((to_value(&rep), sample_index(&[rep.p0, rep.p1], rng)))
            })
        }
        Command::Deutsch { oracle } => {
            let oracle = load_oracle(oracle)?;
            with_samples(shots, &mut rng, |rng| {
                let rep = deutsch(&oracle, rng)?;
                Ok((to_value(&rep), rep.outcome))
            })
        }
        Command::Dj { oracle } => {
            let oracle = load_oracle(oracle)?;
            let (n, m) = (oracle.n_in(), oracle.m_out());
            with_samples(shots, &mut rng, |rng| {
                let rep = if m == 1 {
                    deutsch_jozsa(n, &oracle, rng)?
                } else {
                    parity_promise(n, m, &oracle, rng)?
                };
                Ok((to_value(&rep), rep.outcome))
            })
        }
        Command::Bv { oracle, n, a, b } => {
            let oracle = match (n, a) {
                (Some(n), Some(a)) => {
                    let (a, b) = (*a, *b);
                    Oracle::from_fn(*n, 1, |x| ((a & x).count_ones() as u64 + b) % 2)?
                }
                _ => load_oracle(oracle)?,
            };
            let n = oracle.n_in();
            with_samples(shots, &mut rng, |rng| {
                let rep = bernstein_vazirani(n, &oracle, rng)?;
                Ok((to_value(&rep), rep.a))
            })
        }
        Command::Affine { oracle, n, rows, b } => {
            let oracle = match (n, rows) {
                (Some(n), Some(rows)) => AffineSpec::new(*n, rows.clone(), *b)?.oracle()?,
                _ => load_oracle(oracle)?,
            };
            let rep = affine_recovery(oracle.n_in(), oracle.m_out(), &oracle, &mut rng)?;
            Ok(to_value(&rep))
        }
        Command::Grover { n, k, iterations } => {
            let oracle = GroverOracle::new(*n, *k)?;
            let iterations = iterations.unwrap_or_else(|| default_iterations(*n));
            with_samples(shots, &mut rng, |rng| {
                let rep = grover_search(&oracle, iterations, rng)?;
                Ok((to_value(&rep), rep.outcome))
            })
        }
        Command::Qft { m, input, inverse } => {
            let plan = QftPlan::new(*m)?;
            let mut state = StateVector::basis_state(*m, *input)?;
            let span: Vec<usize> = (0..*m).collect();
            if *inverse {
                inverse_qft(&mut state, &span)?;
            } else {
                qft(&mut state, &span)?;
            }
            let amplitudes: Vec<[f64; 2]> =
                state.amplitudes().iter().map(|a| [a.re, a.im]).collect();
            Ok(json!({
                "m": m,
                "input": input,
                "inverse": inverse,
                "hadamards": plan.hadamard_count(),
                "rotations": plan.rotation_count(),
                "swaps": plan.reversal().len(),
                "amplitudes": amplitudes,
            }))
        }
        Command::PhaseEst { phi, m, epsilon, n } => {
            let oracle = DiagonalPhaseOracle::new(*phi)?;
            match (epsilon, n) {
                (Some(eps), Some(n)) => {
                    let req = precision_for_error(*n, *eps)?;
                    with_samples(shots, &mut rng, |rng| {
                        let est = estimate_phase_amplified(*n, *eps, &oracle, rng)?;
                        let record = json!({
                            "phi": phi,
                            "n": n,
                            "epsilon": eps,
                            "m_prime": req.m_prime,
                            "estimate": est.numerator(),
                            "value": est.value(),
                            "error": wrap_distance(est.value(), *phi),
                        });
                        Ok((record, est.numerator()))
                    })
                }
                _ => {
                    let m = m.ok_or_else(|| CliError::Usage("--m is required".into()))?;
                    let analysis = analytic_distribution(*phi, m)?;
                    with_samples(shots, &mut rng, |rng| {
                        let est = estimate_phase(m as usize, &oracle, rng)?;
                        let record = json!({
                            "phi": phi,
                            "m": m,
                            "estimate": est.numerator(),
                            "value": est.value(),
                            "error": wrap_distance(est.value(), *phi),
                            "best": analysis.best,
                            "delta": analysis.delta,
                            "success_prob": analysis.success_prob,
                            "distribution": analysis.distribution,
                        });
                        Ok((record, est.numerator()))
                    })
                }
            }
        }
        Command::PhaseSweep { m, points, csv } => {
            let report = sweep_success_bound(m, &phase_grid(*points))?;
            sweep_record(&report, csv.as_ref())
        }
        Command::TailSweep {
            m,
            points,
            k_min,
            k_max,
            csv,
        } => {
            let range = match (k_min, k_max) {
                (None, None) => None,
                (lo, hi) => Some((lo.unwrap_or(2), hi.unwrap_or(u64::MAX))),
            };
            let report = sweep_tail_bound(m, range, &phase_grid(*points))?;
            sweep_record(&report, csv.as_ref())
        }
        Command::OrderFind { a, modulus, m, cap } => {
            let mut problem = OrderProblem::new(*a, *modulus)?;
            if let Some(m) = m {
                problem = problem.with_control_bits(*m)?;
            }
            Ok(to_value(&find_order_with_cap(&problem, *cap, &mut rng)?))
        }
        Command::RsaCrack {
            modulus,
            e,
            ciphertext,
            factors,
        } => {
            let inst = RsaInstance {
                modulus: *modulus,
                e: *e,
                ciphertext: *ciphertext,
            };
            let rep = rsa_crack(&inst, &mut rng)?;
            let mut record = to_value(&rep);
            if let Some(factors) = factors {
                let key = totient_decrypt(factors, *e)?;
                if key.modulus != *modulus {
                    return Err(CliError::Input(format!(
                        "factors multiply to {}, not {modulus}",
                        key.modulus
                    )));
                }
                let p = mod_exp(*ciphertext, key.d, *modulus)?;
                record["totient"] = to_value(&key);
                record["agrees"] = json!(p == rep.plaintext);
            }
            Ok(record)
        }
        Command::Pattern { n, m, phi } => {
            let rep = pattern_generate(&PatternSpec::new(*n, *m, phi.clone())?)?;
            let amplitudes: Vec<[f64; 2]> = rep
                .control
                .amplitudes()
                .iter()
                .map(|a| [a.re, a.im])
                .collect();
            Ok(json!({
                "n": n,
                "m": m,
                "phi": phi,
                "amplitudes": amplitudes,
                "max_cross_minor": rep.max_cross_minor,
            }))
        }
    }
}

/// `key: value` lines; long arrays are summarised.
fn render_text(record: &Value) -> String {
    let mut out = String::new();
    let fields = match record {
        Value::Object(map) => map.clone(),
        other => {
            let mut map = Map::new();
            map.insert("result".into(), other.clone());
            map
        }
    };
    for (key, value) in &fields {
        let shown = match value {
            Value::String(s) => s.clone(),
            Value::Array(items) if items.len() > 16 => format!("[{} values]", items.len()),
            other => other.to_string(),
        };
        out.push_str(&format!("{key}: {shown}\n"));
    }
    out
}

fn apply_qubit_cap() -> CliResult<()> {
    match std::env::var(MAX_QUBITS_ENV) {
        Ok(v) => {
            let cap: usize = v.trim().parse().map_err(|_| {
                CliError::Usage(format!("{MAX_QUBITS_ENV}={v:?} is not a qubit count"))
            })?;
            set_max_qubits(cap);
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = apply_qubit_cap().and_then(|()| run(&cli.command, &cli.run));
    match result {
        Ok(record) => {
            let text = if cli.run.json {
                format!("{}\n", serde_json::to_string(&record).expect("json"))
            } else {
                render_text(&record)
            };
            let mut stdout = io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            if let CliError::Usage(_) = e {
                eprintln!("run with --help for usage");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
