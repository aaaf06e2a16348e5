use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use entcoh::coherence::{coherence_pure, min_coherence_pure, min_relative_coherence, relative_coherence};
use entcoh::entanglement::{
    concurrence_2q, entanglement_entropy, eof_2q, eof_convex_roof, is_ppt, relative_entropy_of_entanglement,
    schmidt_spectrum, OptimizerConfig,
};
use entcoh::entropy::{relative_entropy, von_neumann_entropy, RelativeEntropy};
use entcoh::harness::{self, catalog, load, verify::default_dims, verify_theorem, QObject, StateFile};
use entcoh::locc::locc_distinguishable;
use entcoh::qmat::{Bipartition, DensityMatrix, Dims};
use entcoh::{Error, Result};

#[derive(Parser)]
#[command(name = "entcoh", version, about = "Entanglement and basis-class coherence of small multiparty states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StateArg {
    /// State file (`pure` or `density`)
    #[arg(long)]
    state: PathBuf,
}

#[derive(Args)]
struct CutArg {
    /// Parties on side A, e.g. `0` or `0,2`; default the first party
    #[arg(long, value_delimiter = ',')]
    cut: Option<Vec<usize>>,
}

#[derive(Args, Clone)]
struct OptArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

impl OptArgs {
    fn config(&self) -> OptimizerConfig {
        let mut cfg = OptimizerConfig::default().with_seed(self.seed);
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// von Neumann entropy in bits
    Entropy(StateArg),
    /// Relative entropy S(ρ‖σ): pass `--state` twice
    Releent {
        #[arg(long, num_args = 1, required = true)]
        state: Vec<PathBuf>,
    },
    /// Schmidt coefficients (squared) of a pure state across a cut
    Schmidt {
        #[command(flatten)]
        state: StateArg,
        #[command(flatten)]
        cut: CutArg,
    },
    /// Partial-transpose test
    Ppt {
        #[command(flatten)]
        state: StateArg,
        #[command(flatten)]
        cut: CutArg,
    },
    /// Entanglement of formation (convex roof; closed form too for two qubits)
    Eof {
        #[command(flatten)]
        state: StateArg,
        #[command(flatten)]
        cut: CutArg,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Relative entropy of entanglement
    Ree {
        #[command(flatten)]
        state: StateArg,
        #[command(flatten)]
        cut: CutArg,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Coherence of a state in a given basis
    Coherence {
        #[command(flatten)]
        state: StateArg,
        #[arg(long)]
        basis: PathBuf,
    },
    /// Minimum coherence over conditional product bases across a cut
    MinCoherence {
        #[command(flatten)]
        state: StateArg,
        #[command(flatten)]
        cut: CutArg,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Local distinguishability of a basis
    LoccCheck {
        #[arg(long)]
        basis: PathBuf,
    },
    /// Write a named catalog object as a state file
    Catalog {
        /// e.g. bell_psi-, rho2, ghz(3), w(3), domino_basis, computational(2x3)
        name: String,
        /// Probability for `rho2`
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a theorem-verification suite
    Verify {
        #[arg(long)]
        theorem: u8,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Comma-separated, e.g. `2x2,2x3`
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<String>>,
        #[command(flatten)]
        opt: OptArgs,
        /// JSON report destination
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn density(path: &Path) -> Result<DensityMatrix> {
    load(path)?.density().ok_or_else(|| Error::InvalidArgument("expected a state file, got a basis".into()))
}

fn split_for(cut: &CutArg, dims: &Dims) -> Result<Bipartition> {
    let split = match &cut.cut {
        Some(a) => Bipartition::new(a.clone(), dims.parties())?,
        None => Bipartition::first(dims.parties())?,
    };
    split.check(dims)?;
    Ok(split)
}

/// Exit status of a successful command: 0, or 1 for a failed verdict.
fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Entropy(s) => println!("entropy: {:.12}", von_neumann_entropy(&density(&s.state)?)),
        Command::Releent { state } => {
            let [rho, sigma] = state.as_slice() else {
                return Err(Error::InvalidArgument("releent needs exactly two --state files (rho, sigma)".into()));
            };
            match relative_entropy(&density(rho)?, &density(sigma)?)? {
                RelativeEntropy::Finite(v) => println!("relative_entropy: {v:.12}"),
                RelativeEntropy::Infinite => println!("relative_entropy: inf"),
            }
        }
        Command::Schmidt { state, cut } => {
            let QObject::Pure(psi) = load(&state.state)? else {
                return Err(Error::InvalidArgument("schmidt needs a pure state".into()));
            };
            let split = split_for(&cut, psi.dims())?;
            let spectrum = schmidt_spectrum(&psi, &split)?;
            println!("cut: {split}");
            println!("schmidt_rank: {}", spectrum.iter().filter(|&&x| x > 1e-10).count());
            for (i, p) in spectrum.iter().enumerate() {
                println!("lambda_{i}: {p:.12}");
            }
            println!("entanglement_entropy: {:.12}", entanglement_entropy(&psi, &split)?);
        }
        Command::Ppt { state, cut } => {
            let rho = density(&state.state)?;
            let split = split_for(&cut, rho.dims())?;
            let (ppt, min) = is_ppt(&rho, &split)?;
            println!("{}", if ppt { "PPT" } else { "NPT" });
            println!("min_eigenvalue: {min:.12}");
        }
        Command::Eof { state, cut, opt } => {
            let rho = density(&state.state)?;
            let split = split_for(&cut, rho.dims())?;
            let roof = eof_convex_roof(&rho, &split, &opt.config())?;
            println!("eof: {:.12}", roof.value);
            println!("decomposition_terms: {}", roof.cardinality);
            println!("converged: {}", roof.converged);
            if rho.dims().as_slice() == [2, 2] {
                println!("concurrence: {:.12}", concurrence_2q(&rho)?);
                println!("eof_closed_form: {:.12}", eof_2q(&rho)?);
            }
        }
        Command::Ree { state, cut, opt } => {
            let rho = density(&state.state)?;
            let split = split_for(&cut, rho.dims())?;
            let r = relative_entropy_of_entanglement(&rho, &split, &opt.config())?;
            println!("ree: {:.12}", r.value);
            println!("converged: {}", r.converged);
        }
        Command::Coherence { state, basis } => {
            let QObject::Basis(b) = load(&basis)? else {
                return Err(Error::InvalidArgument("--basis must be a basis file".into()));
            };
            match load(&state.state)? {
                QObject::Pure(psi) => println!("coherence: {:.12}", coherence_pure(&psi, &b)?),
                QObject::Density(rho) => println!("relative_coherence: {:.12}", relative_coherence(&rho, &b)?),
                QObject::Basis(_) => return Err(Error::InvalidArgument("--state must be a state file".into())),
            }
        }
        Command::MinCoherence { state, cut, opt } => {
            let obj = load(&state.state)?;
            let split = split_for(&cut, obj.dims())?;
            let r = match &obj {
                QObject::Pure(psi) => min_coherence_pure(psi, &split, &opt.config())?,
                QObject::Density(rho) => min_relative_coherence(rho, &split, &opt.config())?,
                QObject::Basis(_) => return Err(Error::InvalidArgument("--state must be a state file".into())),
            };
            println!("min_coherence: {:.12}", r.value);
            println!("converged: {}", r.converged);
            if let Some(cpb) = r.achieving_basis {
                println!("measurement_order (cut sides): {:?}", cpb.order());
            }
        }
        Command::LoccCheck { basis } => {
            let QObject::Basis(b) = load(&basis)? else {
                return Err(Error::InvalidArgument("--basis must be a basis file".into()));
            };
            let v = locc_distinguishable(&b)?;
            println!("{}", v.verdict);
            print!("{}", v.certificate);
        }
        Command::Catalog { name, p, out } => {
            let name = match (name.as_str(), p) {
                ("rho2", Some(p)) => format!("rho2({p})"),
                (_, Some(_)) => return Err(Error::InvalidArgument("--p applies to rho2 only".into())),
                _ => name,
            };
            let text = StateFile::from_object(&catalog(&name)?).to_text();
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
        Command::Verify { theorem, trials, dims, opt, out } => {
            let dims = match dims {
                Some(list) => list.iter().map(|s| Dims::parse(s)).collect::<Result<Vec<_>>>()?,
                None => default_dims(theorem),
            };
            let report = verify_theorem(theorem, trials, &dims, opt.seed, &opt.config())?;
            print!("{}", report.summary_table());
            if let Some(path) = out {
                std::fs::write(path, report.to_json())?;
            }
            return Ok(if report.passed() { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = harness::threads_from_env().and_then(|threads| harness::with_threads(threads, || run(cli.command))?);
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
