mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fsskit::dpf::{self, DpfEvalShare, DpfNnKey, DpfNnParams, DpfTnKey, DpfTnParams, ShareFormat};
use fsskit::encoding::Codec;
use fsskit::field::Polynomial;
use fsskit::fpcds::{self, CarolOutput, FpcdsMessage, FpcdsShare};
use fsskit::fss::{self, FssKey, PointCds, PointCondition};
use fsskit::group::AbelianGroup;
use fsskit::harness::{run_experiment, ExperimentSpec};
use fsskit::poly_fss::{self, PolyEvalShare, PolyFssKey, PolyFssParams};
use fsskit::{BitString, PrimeField};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use io::{parse_seed, read_object, DirOutput, FileOutput};

#[derive(Parser, Debug)]
#[command(name = "fsskit", version, about = "Threshold function secret sharing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// n-out-of-n multi-evaluation DPF.
    #[command(subcommand)]
    DpfNn(DpfCommand<NnParams>),
    /// t-out-of-n multi-evaluation DPF.
    #[command(subcommand)]
    DpfTn(DpfCommand<TnParams>),
    /// Function-private CDS for point conditions.
    #[command(subcommand)]
    Fpcds(FpcdsCommand),
    /// FSS compiled from the point-condition CDS.
    #[command(subcommand)]
    Fss(FssCommand),
    /// Threshold FSS for polynomials.
    #[command(subcommand)]
    Poly(PolyCommand),
    /// Run a distinguishing experiment described by a JSON spec.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug, Clone)]
struct NnParams {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    ell: usize,
    #[arg(long)]
    lambda: usize,
    #[arg(long)]
    n: usize,
    /// PRF key dimension; `2 ell n + lambda` when absent.
    #[arg(long)]
    key_dim: Option<usize>,
    /// Public PRF master seed (32 hex bytes); zeros when absent.
    #[arg(long, value_parser = parse_seed)]
    master_seed: Option<[u8; 32]>,
}

#[derive(Args, Debug, Clone)]
struct TnParams {
    #[command(flatten)]
    base: NnParams,
    #[arg(long)]
    t: usize,
}

#[derive(Subcommand, Debug)]
enum DpfCommand<P: Args> {
    /// Deal one key per party.
    Gen {
        #[command(flatten)]
        params: P,
        /// Special point as a bit string.
        #[arg(long)]
        a: String,
        #[arg(long)]
        alpha: u64,
        #[arg(long, value_parser = parse_seed)]
        seed: [u8; 32],
        #[command(flatten)]
        output: DirOutput,
    },
    /// Evaluate one key at `x` with PRF input `r`.
    Eval {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        x: String,
        /// PRF input as hex.
        #[arg(long, required_unless_present = "seed", conflicts_with = "seed")]
        r: Option<String>,
        /// Derive `r` from this seed instead.
        #[arg(long, value_parser = parse_seed)]
        seed: Option<[u8; 32]>,
        #[arg(long, default_value_t = 16)]
        r_len: usize,
        #[command(flatten)]
        output: FileOutput,
    },
    /// Reconstruct from evaluation shares.
    Rec {
        #[command(flatten)]
        params: P,
        #[arg(required = true)]
        shares: Vec<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum FpcdsCommand {
    /// Deal the two party shares.
    Gen {
        /// Group descriptor such as `xor:16` or `zq:101`.
        #[arg(long)]
        group: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        s: u64,
        /// Refresh key (32 hex bytes); drawn from the seed when absent.
        #[arg(long, value_parser = parse_seed)]
        refresh_key: Option<[u8; 32]>,
        #[arg(long, value_parser = parse_seed)]
        seed: [u8; 32],
        #[command(flatten)]
        output: DirOutput,
    },
    /// Compute a party's message to Carol.
    Send {
        #[arg(long)]
        share: PathBuf,
        #[arg(long)]
        input: String,
        #[command(flatten)]
        output: FileOutput,
    },
    /// Run Carol on the two messages.
    Carol { m1: PathBuf, m2: PathBuf },
    /// Refresh a share for the next run.
    Refresh {
        #[arg(long)]
        share: PathBuf,
        #[command(flatten)]
        output: FileOutput,
    },
}

#[derive(Subcommand, Debug)]
enum FssCommand {
    /// Generate keys for the point condition `(a, b)`.
    Keygen {
        #[arg(long)]
        group: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, value_parser = parse_seed)]
        seed: [u8; 32],
        #[command(flatten)]
        output: DirOutput,
    },
    /// Evaluate a key on the party's input.
    Eval {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        input: String,
        #[command(flatten)]
        output: FileOutput,
    },
    /// Output 1 iff the condition holds.
    Rec { m1: PathBuf, m2: PathBuf },
}

#[derive(Subcommand, Debug)]
enum PolyCommand {
    /// Share a polynomial among `k` parties.
    Gen {
        #[arg(long)]
        q: u64,
        /// Coefficients, constant term first.
        #[arg(long, value_delimiter = ',', required = true)]
        coeffs: Vec<u64>,
        /// Degree bound; the coefficient count minus one when absent.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_parser = parse_seed)]
        seed: [u8; 32],
        #[command(flatten)]
        output: DirOutput,
    },
    /// Evaluate a key at `x`.
    Eval {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        x: u64,
        #[command(flatten)]
        output: FileOutput,
    },
    /// Reconstruct `p(x)` from evaluation shares.
    Rec {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        k: usize,
        #[arg(required = true)]
        shares: Vec<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the spec's seed.
    #[arg(long, value_parser = parse_seed)]
    seed: Option<[u8; 32]>,
    /// Print the report as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

trait DpfScheme {
    type Params;
    type Key: Codec;
    const SHARE_MAGIC: &'static str;

    fn params(&self) -> Result<Self::Params>;
    fn gen(params: &Self::Params, a: &BitString, alpha: u64, rng: &mut ChaCha20Rng) -> Result<Vec<Self::Key>>;
    fn index(key: &Self::Key) -> u16;
    fn eval(key: &Self::Key, x: &BitString, r: &[u8]) -> Result<(DpfEvalShare, ShareFormat)>;
    fn rec(params: &Self::Params, shares: &[DpfEvalShare]) -> Result<fsskit::FieldElement>;
}

impl NnParams {
    fn build(&self) -> Result<DpfNnParams> {
        Ok(DpfNnParams::new(
            PrimeField::new(self.q)?,
            self.ell,
            self.lambda,
            self.n,
            self.key_dim,
            self.master_seed.unwrap_or([0; 32]),
        )?)
    }
}

impl DpfScheme for NnParams {
    type Params = DpfNnParams;
    type Key = DpfNnKey;
    const SHARE_MAGIC: &'static str = "DPS1";

    fn params(&self) -> Result<DpfNnParams> {
        self.build()
    }

    fn gen(p: &DpfNnParams, a: &BitString, alpha: u64, rng: &mut ChaCha20Rng) -> Result<Vec<DpfNnKey>> {
        Ok(dpf::nn::gen(p, a, p.field().element(alpha), rng)?)
    }

    fn index(key: &DpfNnKey) -> u16 {
        key.index
    }

    fn eval(key: &DpfNnKey, x: &BitString, r: &[u8]) -> Result<(DpfEvalShare, ShareFormat)> {
        Ok((key.eval(x, r)?, ShareFormat::NOfN))
    }

    fn rec(p: &DpfNnParams, shares: &[DpfEvalShare]) -> Result<fsskit::FieldElement> {
        Ok(dpf::nn::rec(p, shares)?)
    }
}

impl DpfScheme for TnParams {
    type Params = DpfTnParams;
    type Key = DpfTnKey;
    const SHARE_MAGIC: &'static str = "DPTS";

    fn params(&self) -> Result<DpfTnParams> {
        let b = &self.base;
        Ok(DpfTnParams::new(
            PrimeField::new(b.q)?,
            b.ell,
            b.lambda,
            b.n,
            self.t,
            b.key_dim,
            b.master_seed.unwrap_or([0; 32]),
        )?)
    }

    fn gen(p: &DpfTnParams, a: &BitString, alpha: u64, rng: &mut ChaCha20Rng) -> Result<Vec<DpfTnKey>> {
        Ok(dpf::tn::gen(p, a, p.field().element(alpha), rng)?)
    }

    fn index(key: &DpfTnKey) -> u16 {
        key.index
    }

    fn eval(key: &DpfTnKey, x: &BitString, r: &[u8]) -> Result<(DpfEvalShare, ShareFormat)> {
        Ok((key.eval(x, r)?, ShareFormat::Threshold { n: key.params.n as u16 }))
    }

    fn rec(p: &DpfTnParams, shares: &[DpfEvalShare]) -> Result<fsskit::FieldElement> {
        Ok(dpf::tn::rec(p, shares)?)
    }
}

fn bits(s: &str) -> Result<BitString> {
    s.parse().with_context(|| format!("bit string {s:?}"))
}

fn check_modulus(name: &str, value: u64, q: u64) -> Result<()> {
    if value >= q {
        bail!("{name} = {value} is not reduced modulo {q}");
    }
    Ok(())
}

fn dpf<P: Args + DpfScheme>(cmd: DpfCommand<P>) -> Result<()> {
    match cmd {
        DpfCommand::Gen {
            params,
            a,
            alpha,
            seed,
            output,
        } => {
            let p = params.params()?;
            let a = bits(&a)?;
            let mut rng = ChaCha20Rng::from_seed(seed);
            let keys = P::gen(&p, &a, alpha, &mut rng)?;
            let items: Vec<_> = keys.iter().map(|k| (P::index(k), k.encode())).collect();
            output.write_all("key", P::Key::FORMAT, &items)
        }
        DpfCommand::Eval {
            key,
            x,
            r,
            seed,
            r_len,
            output,
        } => {
            let key = P::Key::decode(&read_object(&key)?)?;
            let r = match (r, seed) {
                (Some(r), _) => hex::decode(&r).with_context(|| format!("r {r:?} is not hex"))?,
                (None, Some(seed)) => {
                    let mut r = vec![0u8; r_len];
                    ChaCha20Rng::from_seed(seed).fill_bytes(&mut r);
                    r
                }
                (None, None) => unreachable!("clap requires r or seed"),
            };
            let (share, format) = P::eval(&key, &bits(&x)?, &r)?;
            output.write(P::SHARE_MAGIC, &share.encode(format))
        }
        DpfCommand::Rec { params, shares } => {
            let p = params.params()?;
            let shares = shares
                .iter()
                .map(|path| Ok(DpfEvalShare::decode(&read_object(path)?)?.0))
                .collect::<Result<Vec<_>>>()?;
            println!("{}", P::rec(&p, &shares)?);
            Ok(())
        }
    }
}

fn fpcds(cmd: FpcdsCommand) -> Result<()> {
    match cmd {
        FpcdsCommand::Gen {
            group,
            a,
            b,
            s,
            refresh_key,
            seed,
            output,
        } => {
            let g: AbelianGroup = group.parse()?;
            let mut rng = ChaCha20Rng::from_seed(seed);
            let refresh_key = refresh_key.unwrap_or_else(|| {
                let mut k = [0u8; 32];
                rng.fill_bytes(&mut k);
                k
            });
            let (w1, w2) = fpcds::gen(&g, &bits(&a)?, &bits(&b)?, g.element(s)?, refresh_key, &mut rng)?;
            output.write_all("share", FpcdsShare::FORMAT, &[(1, w1.encode()), (2, w2.encode())])
        }
        FpcdsCommand::Send { share, input, output } => {
            let w = FpcdsShare::decode(&read_object(&share)?)?;
            let m = fpcds::send(&bits(&input)?, &w)?;
            output.write(FpcdsMessage::FORMAT, &m.encode())
        }
        FpcdsCommand::Carol { m1, m2 } => {
            let m1 = FpcdsMessage::decode(&read_object(&m1)?)?;
            let m2 = FpcdsMessage::decode(&read_object(&m2)?)?;
            match fpcds::carol(&m1, &m2)? {
                CarolOutput::Secret(s) => println!("secret {}", s.0),
                CarolOutput::Reject => println!("reject"),
            }
            Ok(())
        }
        FpcdsCommand::Refresh { share, output } => {
            let w = FpcdsShare::decode(&read_object(&share)?)?;
            output.write(FpcdsShare::FORMAT, &w.refresh().encode())
        }
    }
}

fn fss(cmd: FssCommand) -> Result<()> {
    match cmd {
        FssCommand::Keygen {
            group,
            a,
            b,
            seed,
            output,
        } => {
            let cds = PointCds {
                group: group.parse()?,
                refresh_key: [0; 32],
            };
            let h = PointCondition {
                a: bits(&a)?,
                b: bits(&b)?,
            };
            let keys = fss::keygen(&cds, &h, &mut ChaCha20Rng::from_seed(seed))?;
            let items: Vec<_> = keys.iter().map(|k| (k.index, k.encode())).collect();
            output.write_all("key", FssKey::<FpcdsShare>::FORMAT, &items)
        }
        FssCommand::Eval { key, input, output } => {
            let key = FssKey::<FpcdsShare>::decode(&read_object(&key)?)?;
            let cds = PointCds {
                group: key.inner.group,
                refresh_key: key.inner.refresh_key,
            };
            let m = fss::eval_share(&cds, &key, &bits(&input)?)?;
            output.write(FpcdsMessage::FORMAT, &m.encode())
        }
        FssCommand::Rec { m1, m2 } => {
            let m1 = FpcdsMessage::decode(&read_object(&m1)?)?;
            let m2 = FpcdsMessage::decode(&read_object(&m2)?)?;
            let cds = PointCds {
                group: m1.group,
                refresh_key: [0; 32],
            };
            println!("{}", fss::rec(&cds, &[m1, m2])?);
            Ok(())
        }
    }
}

fn poly(cmd: PolyCommand) -> Result<()> {
    match cmd {
        PolyCommand::Gen {
            q,
            coeffs,
            degree,
            t,
            k,
            seed,
            output,
        } => {
            let f = PrimeField::new(q)?;
            for &c in &coeffs {
                check_modulus("coefficient", c, q)?;
            }
            let params = PolyFssParams::new(f, degree.unwrap_or(coeffs.len() - 1), t, k)?;
            let p = Polynomial::from_values(f, &coeffs);
            let keys = poly_fss::gen(&p, &params, &mut ChaCha20Rng::from_seed(seed))?;
            let items: Vec<_> = keys.iter().map(|k| (k.index, k.encode())).collect();
            output.write_all("key", PolyFssKey::FORMAT, &items)
        }
        PolyCommand::Eval { key, x, output } => {
            let key = PolyFssKey::decode(&read_object(&key)?)?;
            let f = key.params.field;
            check_modulus("x", x, f.modulus())?;
            output.write(PolyEvalShare::FORMAT, &key.eval(f.element(x))?.encode())
        }
        PolyCommand::Rec { t, k, shares } => {
            let shares = shares
                .iter()
                .map(|path| Ok(PolyEvalShare::decode(&read_object(path)?)?))
                .collect::<Result<Vec<_>>>()?;
            let field = shares[0].value.field();
            let params = PolyFssParams::new(field, 0, t, k)?;
            println!("{}", poly_fss::rec(&shares, &params)?);
            Ok(())
        }
    }
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let mut spec: ExperimentSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.spec.display()))?;
    if let Some(seed) = args.seed {
        spec.seed = Some(hex::encode(seed));
    }
    let report = run_experiment(&spec)?;
    if args.json {
        println!("{}", report.to_json());
    } else {
        print!("{report}");
    }
    if report.passed == Some(false) {
        bail!("experiment {} did not meet its expectation", report.name);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::DpfNn(cmd) => dpf(cmd),
        Command::DpfTn(cmd) => dpf(cmd),
        Command::Fpcds(cmd) => fpcds(cmd),
        Command::Fss(cmd) => fss(cmd),
        Command::Poly(cmd) => poly(cmd),
        Command::Experiment(args) => experiment(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
