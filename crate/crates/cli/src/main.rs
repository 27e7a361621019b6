//! `dadw`: markers, covers, F-sets, certificates and freeness checks from the
//! command line.
//!
//! Exit codes: 0 success, 1 violation, 2 unknown or budget exhausted, 3 input
//! error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dadw_core::canonical;
use dadw_core::certificate::{verify_certificate, CertVerdict, DadCertificate};
use dadw_core::corpus::{self, CorpusError};
use dadw_core::dad::{self, CertifyOptions, DadError};
use dadw_core::freeness::{self, FreenessError};
use dadw_core::marker::{self, Marker, MarkerError};
use dadw_core::quotient::SubgroupDoc;
use dadw_core::space::SpaceError;
use dadw_core::Space;

#[derive(Parser)]
#[command(name = "dadw", version, about = "Certify dynamic asymptotic dimension one for virtually cyclic actions")]
struct Cli {
    /// Oracle window budget (substitution iterations) for subshifts.
    #[arg(long, global = true)]
    budget: Option<u32>,
    /// Seed order used by the searches; recorded in certificates.
    #[arg(long, global = true, value_enum, default_value_t = SeedOrder::Fixed)]
    seed_order: SeedOrder,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeedOrder {
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverSet {
    #[value(name = "U0")]
    U0,
    #[value(name = "U1")]
    U1,
}

#[derive(Subcommand)]
enum Command {
    /// Find a marker with disjoint translates over p⁻¹(B_R).
    Marker {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        radius: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build U0 = p⁻¹(B_N)·U and U1 = X ∖ U0 from a marker.
    Cover {
        #[arg(long)]
        system: PathBuf,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        marker: PathBuf,
    },
    /// Compute F(Ui, p⁻¹(B_N)) for one set of the cover.
    Fset {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_enum)]
        set: CoverSet,
        #[arg(long = "N")]
        n: u64,
        /// Word-length cap; defaults to 3N for U0 and 2M+N for U1.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Run the full pipeline and write a certificate.
    Certify {
        #[arg(long)]
        system: PathBuf,
        #[arg(long = "N")]
        n: u64,
        /// Refuse to certify when an oracle answer was unknown.
        #[arg(long)]
        strict: bool,
        /// Extra word length allowed beyond the caps 3N and 2M+N.
        #[arg(long, default_value_t = 0)]
        slack: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-check a certificate.
    Verify {
        #[arg(long)]
        system: PathBuf,
        certificate: PathBuf,
    },
    /// Freeness certificates for every nontrivial element of p⁻¹(B_R).
    Freeness {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        ball: u64,
    },
    /// Check F(π⁻¹(Ui), E) ⊆ q⁻¹(F(Ui, q(E))) for the quotient by K.
    Quotient {
        #[arg(long)]
        system: PathBuf,
        #[arg(long = "K")]
        k: PathBuf,
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 0)]
        slack: u64,
    },
    /// Named example systems.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    List,
    Emit {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Odometer depth.
        #[arg(long)]
        depth: Option<u32>,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn violation(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    fn unknown(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

impl From<SpaceError> for Failure {
    fn from(e: SpaceError) -> Self {
        match e {
            SpaceError::Budget(_) => Failure::unknown(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<MarkerError> for Failure {
    fn from(e: MarkerError) -> Self {
        match e {
            MarkerError::Space(s) => s.into(),
            other => Failure::violation(other.to_string()),
        }
    }
}

impl From<DadError> for Failure {
    fn from(e: DadError) -> Self {
        match e {
            DadError::Input(_) | DadError::InsufficientRadius { .. } => Failure::input(e.to_string()),
            DadError::Marker(m) => m.into(),
            DadError::Space(s) => s.into(),
            DadError::Inconclusive(_) => Failure::unknown(e.to_string()),
            DadError::CapExceeded(_) => Failure::violation(e.to_string()),
        }
    }
}

impl From<FreenessError> for Failure {
    fn from(e: FreenessError) -> Self {
        match e {
            FreenessError::FixedPointFound { .. } => Failure::violation(e.to_string()),
            FreenessError::Unknown(_) => Failure::unknown(e.to_string()),
            FreenessError::Input(_) => Failure::input(e.to_string()),
            FreenessError::Space(s) => s.into(),
        }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        Failure::input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path, budget: Option<u32>) -> Result<Space, Failure> {
    let space = Space::from_json(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    match budget {
        Some(b) => Ok(space.with_budget(b)?),
        None => Ok(space),
    }
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Result<(), Failure> {
    let text = canonical::to_string(value);
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let SeedOrder::Fixed = cli.seed_order;
    let budget = cli.budget;
    match cli.command {
        Command::Marker { system, radius, output } => {
            let space = load_system(&system, budget)?;
            let m = marker::find_marker(&space, radius)?;
            emit(&m, output.as_deref())
        }
        Command::Cover { system, n, marker } => {
            let space = load_system(&system, budget)?;
            let m: Marker = parse(&marker)?;
            match marker::verify_marker(&space, &m) {
                marker::MarkerCheck::Verified => {}
                marker::MarkerCheck::Failed(why) => return Err(Failure::violation(format!("marker: {why}"))),
                marker::MarkerCheck::Inconclusive(why) => return Err(Failure::unknown(format!("marker: {why}"))),
            }
            emit(&dad::build_cover(&space, n, &m)?, None)
        }
        Command::Fset { system, set, n, cap } => {
            let space = load_system(&system, budget)?;
            let m = marker::find_marker(&space, (5 * n).max(1))?;
            let cover = dad::build_cover(&space, n, &m)?;
            let e_set = space.group().preimage_ball(n).elements;
            let (u, default_cap) = match set {
                CoverSet::U0 => (&cover.u0, 3 * n),
                CoverSet::U1 => (&cover.u1, 2 * m.m + n),
            };
            emit(&dad::compute_f_set(&space, u, &e_set, cap.unwrap_or(default_cap))?, None)
        }
        Command::Certify {
            system,
            n,
            strict,
            slack,
            output,
        } => {
            let space = load_system(&system, budget)?;
            let cert = dad::certify_dad_one(&space, n, CertifyOptions { strict, slack })?;
            emit(&cert, output.as_deref())?;
            if cert.exact {
                Ok(())
            } else {
                Err(Failure::unknown("certificate is an upper bound only: some oracle answers were unknown"))
            }
        }
        Command::Verify { system, certificate } => {
            let space = load_system(&system, budget)?;
            let cert = DadCertificate::from_json(&read(&certificate)?)
                .map_err(|e| Failure::input(format!("{}: {e}", certificate.display())))?;
            match verify_certificate(&space, &cert) {
                CertVerdict::Valid => {
                    println!("Valid");
                    Ok(())
                }
                CertVerdict::Invalid { obligation, detail } => {
                    println!("Invalid ({obligation}): {detail}");
                    Err(Failure::violation(format!("obligation {obligation} failed")))
                }
                CertVerdict::Inconclusive(why) => {
                    println!("Inconclusive: {why}");
                    Err(Failure::unknown(why))
                }
            }
        }
        Command::Freeness { system, ball } => {
            let space = load_system(&system, budget)?;
            emit(&freeness::check_free_ball(&space, ball)?, None)
        }
        Command::Quotient { system, k, n, slack } => {
            let space = load_system(&system, budget)?;
            let k: SubgroupDoc = parse(&k)?;
            let report = dad::quotient_check(&space, &k.elements, n, slack)?;
            emit(&report, None)?;
            if report.contained() {
                Ok(())
            } else {
                Err(Failure::violation("containment fails"))
            }
        }
        Command::Corpus { action } => match action {
            CorpusAction::List => {
                for e in corpus::entries() {
                    println!("{:<20} {}", e.name, e.description);
                }
                Ok(())
            }
            CorpusAction::Emit { name, output, depth } => {
                let params = corpus::Params {
                    depth,
                    budget,
                    ..Default::default()
                };
                let space = corpus::build_system(&name, &params)?;
                match output {
                    Some(path) => fs::write(&path, space.to_json())
                        .map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
                    None => {
                        print!("{}", space.to_json());
                        Ok(())
                    }
                }
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dadw: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
