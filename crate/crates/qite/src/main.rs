use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qite_core::exact::DENSE_LIMIT;
use qite_core::fermion::pool_size_profile;
use qite_core::{build_hamiltonian, build_pool, build_spin_ops, exact_diag, exact_diag_sector, sector_basis, PoolKind};

use qite::config::RunConfig;
use qite::error::{Error, Result};
use qite::fcidump::read_fcidump;
use qite::format::csv;
use qite::pauli_text::{read_pauli_text, write_pool};
use qite::run::execute;

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "QITE_NUM_THREADS";

#[derive(Parser)]
#[command(name = "qite", version, about = "Statevector quantum imaginary time evolution")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Fcidump,
    Pauli,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the calculation described by a config file.
    Run { config: PathBuf },
    /// Print the lowest eigenvalues of a Hamiltonian with their <S^2>.
    Exactdiag {
        hamiltonian: PathBuf,
        #[arg(long, value_enum, default_value = "fcidump")]
        format: Format,
        /// Qubit count, required for the pauli format.
        #[arg(long)]
        n_qubits: Option<usize>,
        #[arg(short, default_value_t = 6)]
        k: usize,
    },
    /// Print pool-term counts against the screening threshold.
    PoolStats {
        fcidump: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1e-4,1e-3,1e-2,1e-1")]
        epsilon: Vec<f64>,
        /// Also write the hamiltonian pool at this epsilon to a file.
        #[arg(long, num_args = 2, value_names = ["EPSILON", "PATH"])]
        dump: Option<Vec<String>>,
    },
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize =
        v.trim().parse().map_err(|_| Error::Config(format!("{THREADS_VAR} must be an integer, got {v:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn cmd_run(config: &Path) -> Result<ExitCode> {
    let cfg = RunConfig::read(config)?;
    let out = execute(&cfg)?;
    for (k, v) in &out.summary {
        println!("{k} = {v}");
    }
    match out.failure {
        Some(e) => {
            eprintln!("qite: run aborted: {e}");
            Ok(ExitCode::from(1))
        }
        None => Ok(ExitCode::SUCCESS),
    }
}

fn cmd_exactdiag(path: &Path, format: Format, n_qubits: Option<usize>, k: usize) -> Result<ExitCode> {
    let (h, spectrum) = match format {
        Format::Fcidump => {
            let ints = read_fcidump(path)?;
            let h = build_hamiltonian(&ints)?;
            let (na, nb) = ints.n_alpha_beta();
            let basis = sector_basis(ints.n_qubits(), na, nb);
            if basis.len() > 1 << DENSE_LIMIT {
                return Err(Error::Config(format!("sector dimension {} is over the dense limit", basis.len())));
            }
            let spec = exact_diag_sector(&h, &basis)?;
            (h, spec)
        }
        Format::Pauli => {
            let n = n_qubits.ok_or_else(|| Error::Config("--n-qubits is required for the pauli format".into()))?;
            let h = read_pauli_text(path, n)?;
            let spec = exact_diag(&h)?;
            (h, spec)
        }
    };
    let n = h.n_qubits();
    let s2 = if n % 2 == 0 { Some(spectrum.expectations(&build_spin_ops(n / 2)?.s2)?) } else { None };
    println!("{}", if s2.is_some() { "k,energy,s2" } else { "k,energy" });
    for i in 0..k.min(spectrum.len()) {
        match &s2 {
            Some(s) => println!("{i},{},{}", csv(spectrum.eigenvalues[i]), csv(s[i])),
            None => println!("{i},{}", csv(spectrum.eigenvalues[i])),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_pool_stats(path: &Path, eps: &[f64], dump: &Option<Vec<String>>) -> Result<ExitCode> {
    let ints = read_fcidump(path)?;
    for &e in eps {
        if !(e >= 0.0 && e.is_finite()) {
            return Err(Error::Config(format!("epsilon must be non-negative, got {e}")));
        }
    }
    let uccsd = build_pool(PoolKind::Uccsd, &ints, 0.0)?.len();
    let uccgsd = build_pool(PoolKind::Uccgsd, &ints, 0.0)?.len();
    println!("uccsd,{uccsd}");
    println!("uccgsd,{uccgsd}");
    println!("epsilon,hamiltonian");
    for (e, count) in pool_size_profile(&ints, eps)? {
        println!("{},{count}", csv(e));
    }
    if let Some(d) = dump {
        let e: f64 = d[0].parse().map_err(|_| Error::Config(format!("bad epsilon {:?}", d[0])))?;
        let pool = build_pool(PoolKind::Hamiltonian, &ints, e)?;
        let out = PathBuf::from(&d[1]);
        std::fs::write(&out, write_pool(&pool)).map_err(|source| Error::Io { path: out, source })?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = init_threads().and_then(|_| match &cli.cmd {
        Cmd::Run { config } => cmd_run(config),
        Cmd::Exactdiag { hamiltonian, format, n_qubits, k } => cmd_exactdiag(hamiltonian, *format, *n_qubits, *k),
        Cmd::PoolStats { fcidump, epsilon, dump } => cmd_pool_stats(fcidump, epsilon, dump),
    });
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qite: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
