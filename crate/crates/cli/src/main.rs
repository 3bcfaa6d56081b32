//! `forge`: command-line front end for the small-cancellation laboratory.
//!
//! Exit codes: 0 success / positive verdict, 1 negative verdict,
//! 2 unknown or refused, 64 usage error.

use clap::{Args, Parser, Subcommand};
use forge_core::{
    absorption_relator, cl_bound, classify, ell_alpha_bound, holds_in_finite,
    injectivity_certificate, is_silly, is_trivial, new_tower_with_targets, parse_rational,
    parse_sentence, rational_string, repro_remark18, sc_report, scl_relator, to_ea_normal, tune,
    w_length_bound, witness_of_disjunct, AbsorptionSpec, Alphabet, Consequence, ConjugatePower,
    Error as CoreError, FiniteGroup, Goal, GoalStatus, NormBudget, NormOutcome, Presentation,
    QuotientHandle, Rational, RelatorCertificate, RelatorSet, SclSpec, Tower, TrivialityStatus,
    TuneFamily, TuneResult, Word,
};
use serde_json::json;
use std::collections::BTreeMap;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "forge", version, about = "small-cancellation quotient laboratory")]
struct Cli {
    /// machine-readable output
    #[arg(long, global = true)]
    json: bool,
    /// seed for randomized behavior (reserved; echoed in JSON output)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// piece analysis and condition verdicts for a presentation file
    CheckSc(CheckScArgs),
    /// decide triviality of a word in the presented quotient
    Dehn(DehnArgs),
    /// decide equality of two words in the presented quotient
    Eq(EqArgs),
    /// certify injectivity of the quotient map on a ball
    Inject(InjectArgs),
    /// build an absorption relator certificate
    GenAbsorb(GenAbsorbArgs),
    /// build a norm-stabilization relator certificate
    GenScl(GenSclArgs),
    /// quotient tower operations
    #[command(subcommand)]
    Tower(TowerCommand),
    /// sentence parsing, witnesses and the finite oracle
    #[command(subcommand)]
    Witness(WitnessCommand),
    /// norm bounds
    #[command(subcommand)]
    Norm(NormCommand),
    /// reproduce the motivating epimorphism computation
    ReproRemark18(ReproArgs),
}

#[derive(Args)]
struct CheckScArgs {
    file: String,
    #[arg(long, default_value = "1/6")]
    lambda: String,
    #[arg(long, default_value = "1/6")]
    epsilon: String,
}

#[derive(Args)]
struct DehnArgs {
    file: String,
    #[arg(long)]
    word: String,
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct EqArgs {
    file: String,
    #[arg(long)]
    lhs: String,
    #[arg(long)]
    rhs: String,
}

#[derive(Args)]
struct InjectArgs {
    file: String,
    #[arg(long)]
    radius: usize,
}

#[derive(Args)]
struct GenAbsorbArgs {
    /// presentation file for the ambient relators and alphabet;
    /// default is the free group on s, t, x, y
    #[arg(long)]
    file: Option<String>,
    #[arg(long)]
    gamma: String,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long, default_value = "1/6")]
    lambda: String,
    #[arg(long, default_value = "1/6")]
    epsilon: String,
    /// exact parameters; when both are given, tuning is skipped
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long, default_value_t = 16)]
    cap: usize,
}

#[derive(Args)]
struct GenSclArgs {
    #[arg(long)]
    file: Option<String>,
    #[arg(long)]
    gamma: String,
    #[arg(long)]
    gamma1: String,
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    sigma: String,
    /// number of conjugating kappas
    #[arg(long, default_value_t = 1)]
    p: u64,
    /// kappa base length
    #[arg(long, default_value_t = 25)]
    m: u64,
    /// power on gamma; default is the least q putting p*L/q below sigma
    #[arg(long)]
    q: Option<u64>,
    /// free pair used to build the kappas
    #[arg(long, default_value = "x")]
    x: String,
    #[arg(long, default_value = "y")]
    y: String,
    #[arg(long, default_value = "1/6")]
    lambda: String,
    #[arg(long, default_value = "1/6")]
    epsilon: String,
}

#[derive(Subcommand)]
enum TowerCommand {
    Init(TowerInitArgs),
    Push(TowerPushArgs),
    Eval(TowerEvalArgs),
    Status(TowerStatusArgs),
}

#[derive(Args)]
struct TowerInitArgs {
    file: String,
    #[arg(long, default_value_t = 4)]
    rank: usize,
    #[arg(long, default_value = "1/6")]
    lambda: String,
    #[arg(long, default_value = "1/6")]
    epsilon: String,
}

#[derive(Args)]
struct TowerPushArgs {
    file: String,
    /// plain relators to push
    #[arg(long)]
    relator: Vec<String>,
    /// absorb this element into the pair given by --x/--y (tuned)
    #[arg(long)]
    absorb: Option<String>,
    #[arg(long, default_value = "x")]
    x: String,
    #[arg(long, default_value = "y")]
    y: String,
    #[arg(long, default_value_t = 2)]
    start_p: u64,
    #[arg(long, default_value_t = 2)]
    start_q: u64,
    #[arg(long, default_value_t = 16)]
    cap: usize,
    /// words that must survive
    #[arg(long)]
    survive: Vec<String>,
    /// certify injectivity on the ball of this radius
    #[arg(long)]
    inject_radius: Option<usize>,
}

#[derive(Args)]
struct TowerEvalArgs {
    file: String,
    #[arg(long)]
    word: String,
    #[arg(long)]
    stage: Option<usize>,
}

#[derive(Args)]
struct TowerStatusArgs {
    file: String,
}

#[derive(Subcommand)]
enum WitnessCommand {
    /// parse and echo the canonical form
    Parse(SentenceArg),
    /// extract the abstract witnesses of the normalized disjuncts
    Extract(SentenceArg),
    /// classify positivity and quantifier shape
    Classify(SentenceArg),
    /// evaluate truth in a finite group by exhaustive search
    CheckFinite(CheckFiniteArgs),
    /// silly-word test for a word over a free group
    Silly(SillyArgs),
}

#[derive(Args)]
struct SentenceArg {
    sentence: String,
}

#[derive(Args)]
struct CheckFiniteArgs {
    sentence: String,
    /// multiplication-table file (first line the order, then the rows)
    #[arg(long)]
    group: Option<String>,
    /// builtin group: z1..z6, v4, s3
    #[arg(long)]
    builtin: Option<String>,
    /// constant assignments, name=index
    #[arg(long = "const")]
    constants: Vec<String>,
}

#[derive(Args)]
struct SillyArgs {
    word: String,
    #[arg(long, default_value_t = 2)]
    rank: usize,
}

#[derive(Subcommand)]
enum NormCommand {
    EllAlpha(NormArgs),
    Cl(NormArgs),
    WLength(NormArgs),
}

#[derive(Args)]
struct NormArgs {
    /// presentation file or tower file (detected by content)
    file: String,
    #[arg(long)]
    element: String,
    #[arg(long)]
    alpha: Option<String>,
    /// verbal word over a free group a, b, ... (w-length only)
    #[arg(long)]
    word: Option<String>,
    /// budget as max_factors,max_component_length
    #[arg(long, default_value = "3,2")]
    budget: String,
}

#[derive(Args)]
struct ReproArgs {
    #[arg(long, default_value_t = 2)]
    n: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Ok(threads) = std::env::var("FORGE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CoreError> {
    match &cli.command {
        Command::CheckSc(args) => check_sc(cli, args),
        Command::Dehn(args) => dehn_cmd(cli, args),
        Command::Eq(args) => eq_cmd(cli, args),
        Command::Inject(args) => inject_cmd(cli, args),
        Command::GenAbsorb(args) => gen_absorb(cli, args),
        Command::GenScl(args) => gen_scl(cli, args),
        Command::Tower(tc) => tower_cmd(cli, tc),
        Command::Witness(wc) => witness_cmd(cli, wc),
        Command::Norm(nc) => norm_cmd(cli, nc),
        Command::ReproRemark18(args) => repro_cmd(cli, args),
    }
}

fn load_presentation(path: &str) -> Result<Presentation, CoreError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Io(format!("cannot read {path}: {e}")))?;
    Presentation::parse(&text)
}

fn load_tower(path: &str) -> Result<Tower, CoreError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Io(format!("cannot read {path}: {e}")))?;
    Tower::from_json(&text)
}

fn save_tower(path: &str, tower: &Tower) -> Result<(), CoreError> {
    std::fs::write(path, tower.to_json())
        .map_err(|e| CoreError::Io(format!("cannot write {path}: {e}")))
}

fn emit(cli: &Cli, command: &str, human: &str, body: serde_json::Value) {
    if cli.json {
        let mut obj = json!({
            "schema_version": 1,
            "command": command,
            "seed": cli.seed,
        });
        obj.as_object_mut()
            .unwrap()
            .extend(body.as_object().cloned().unwrap_or_default());
        println!("{}", serde_json::to_string_pretty(&obj).unwrap());
    } else {
        println!("{human}");
    }
}

fn verdict_exit(status: TrivialityStatus) -> u8 {
    match status {
        TrivialityStatus::Trivial => EXIT_OK,
        TrivialityStatus::Nontrivial => EXIT_NEGATIVE,
        TrivialityStatus::Unknown => EXIT_UNKNOWN,
    }
}

fn check_sc(cli: &Cli, args: &CheckScArgs) -> Result<u8, CoreError> {
    let p = load_presentation(&args.file)?;
    let lambda0 = parse_rational(&args.lambda)?;
    let epsilon0 = parse_rational(&args.epsilon)?;
    let set = RelatorSet::normalized(p.alphabet.clone(), &p.relators)?;
    let report = sc_report(&set, lambda0, epsilon0)?;
    let human = format!(
        "Delta = {}\nT = {}\nlambda = {}\nepsilon = {}\nC'(1/6): {}\nstrengthened (lambda0 {}, epsilon0 {}): {}\ntight: {}",
        report.delta,
        report.t,
        rational_string(report.lambda),
        rational_string(report.epsilon),
        report.cprime_sixth,
        rational_string(report.lambda0),
        rational_string(report.epsilon0),
        report.strengthened,
        report.tight,
    );
    let ok = report.cprime_sixth && report.strengthened;
    emit(
        cli,
        "check-sc",
        &human,
        json!({ "report": report, "pass": ok }),
    );
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}

fn dehn_cmd(cli: &Cli, args: &DehnArgs) -> Result<u8, CoreError> {
    let p = load_presentation(&args.file)?;
    let word = Word::parse(&p.alphabet, &args.word)?;
    let handle = QuotientHandle::sixth(p.clone())?;
    let verdict = is_trivial(&word, &handle);
    let mut human = format!(
        "status: {:?}\nresidue: {}\nsound: {}",
        verdict.status,
        verdict.residue.display(&p.alphabet),
        verdict.sound
    );
    if args.trace {
        human.push_str(&format!("\nsteps: {}", verdict.trace.len()));
        for (i, step) in verdict.trace.iter().enumerate() {
            human.push_str(&format!("\n  {i}: {step:?}"));
        }
    }
    let code = verdict_exit(verdict.status);
    emit(cli, "dehn", &human, json!({ "verdict": verdict }));
    Ok(code)
}

fn eq_cmd(cli: &Cli, args: &EqArgs) -> Result<u8, CoreError> {
    let p = load_presentation(&args.file)?;
    let lhs = Word::parse(&p.alphabet, &args.lhs)?;
    let rhs = Word::parse(&p.alphabet, &args.rhs)?;
    let handle = QuotientHandle::sixth(p)?;
    let verdict = forge_core::eq_in_quotient(&lhs, &rhs, &handle);
    let human = format!("equal: {:?}", verdict.status);
    let code = verdict_exit(verdict.status);
    emit(cli, "eq", &human, json!({ "verdict": verdict }));
    Ok(code)
}

fn inject_cmd(cli: &Cli, args: &InjectArgs) -> Result<u8, CoreError> {
    let p = load_presentation(&args.file)?;
    let handle = QuotientHandle::sixth(p.clone())?;
    let family = forge_core::ball(p.rank(), args.radius);
    match injectivity_certificate(&family, &handle) {
        Ok(cert) => {
            let human = format!(
                "certified: {}\npairs: {}\nfast-path: {}\nfailures: {}",
                cert.certified,
                cert.pairs_checked,
                cert.fast_path_hits,
                cert.failures.len()
            );
            let code = if cert.certified { EXIT_OK } else { EXIT_NEGATIVE };
            emit(cli, "inject", &human, json!({ "certificate": cert }));
            Ok(code)
        }
        Err(CoreError::UnsoundPresentation(msg)) => {
            emit(
                cli,
                "inject",
                &format!("refused: {msg}"),
                json!({ "refused": msg }),
            );
            Ok(EXIT_UNKNOWN)
        }
        Err(e) => Err(e),
    }
}

fn ambient_from(file: &Option<String>) -> Result<(Presentation, RelatorSet), CoreError> {
    let p = match file {
        Some(path) => load_presentation(path)?,
        None => Presentation::free(Alphabet::with_rank(4)?),
    };
    let set = RelatorSet::normalized(p.alphabet.clone(), &p.relators)?;
    Ok((p, set))
}

fn cert_human(cert: &RelatorCertificate, alphabet: &Alphabet) -> String {
    let mut out = format!(
        "relator: {}\n|relator| = {}\nprimitive: {}\nDelta = {}, T = {}, lambda = {}\nC'(1/6): {}, strengthened: {}",
        cert.relator.display(alphabet),
        cert.relator.len(),
        cert.primitive,
        cert.report.delta,
        cert.report.t,
        rational_string(cert.report.lambda),
        cert.report.cprime_sixth,
        cert.report.strengthened,
    );
    match &cert.consequence {
        Consequence::Absorbed {
            gamma, expression, ..
        } => out.push_str(&format!(
            "\nconsequence: {} = {} in the quotient",
            gamma.display(alphabet),
            expression.display(alphabet)
        )),
        Consequence::StableNorm {
            gamma,
            q,
            bound,
            conjugate_count,
            ..
        } => out.push_str(&format!(
            "\nconsequence: {}^{q} is a product of {conjugate_count} conjugates; stable bound {}",
            gamma.display(alphabet),
            rational_string(*bound)
        )),
        Consequence::None => {}
    }
    out
}

fn gen_absorb(cli: &Cli, args: &GenAbsorbArgs) -> Result<u8, CoreError> {
    let (p, ambient) = ambient_from(&args.file)?;
    let gamma = Word::parse(&p.alphabet, &args.gamma)?;
    let x = Word::parse(&p.alphabet, &args.x)?;
    let y = Word::parse(&p.alphabet, &args.y)?;
    let lambda0 = parse_rational(&args.lambda)?;
    let epsilon0 = parse_rational(&args.epsilon)?;
    let cert = match (args.p, args.q) {
        (Some(pp), Some(qq)) => {
            let spec = AbsorptionSpec::new(gamma, x, y, pp, qq)?;
            absorption_relator(spec, &ambient, lambda0, epsilon0)?
        }
        _ => {
            let family = TuneFamily::Absorption {
                gamma,
                x,
                y,
                start_p: args.p.unwrap_or(2),
                start_q: args.q.unwrap_or(2),
            };
            match tune(&family, lambda0, epsilon0, &ambient, args.cap)? {
                TuneResult::Tuned { certificate, .. } => *certificate,
                TuneResult::Failed { best, attempts } => {
                    let human = format!(
                        "tuning failed after {} attempts; best lambda {}, best T {}",
                        attempts.len(),
                        rational_string(best.lambda),
                        best.t
                    );
                    emit(cli, "gen-absorb", &human, json!({ "failed": best }));
                    return Ok(EXIT_NEGATIVE);
                }
            }
        }
    };
    let human = cert_human(&cert, &p.alphabet);
    emit(cli, "gen-absorb", &human, json!({ "certificate": cert }));
    Ok(EXIT_OK)
}

fn gen_scl(cli: &Cli, args: &GenSclArgs) -> Result<u8, CoreError> {
    let (p, ambient) = ambient_from(&args.file)?;
    let gamma = Word::parse(&p.alphabet, &args.gamma)?;
    let gamma1 = Word::parse(&p.alphabet, &args.gamma1)?;
    let alpha = Word::parse(&p.alphabet, &args.alpha)?;
    let x = Word::parse(&p.alphabet, &args.x)?;
    let y = Word::parse(&p.alphabet, &args.y)?;
    let sigma = parse_rational(&args.sigma)?;
    let lambda0 = parse_rational(&args.lambda)?;
    let epsilon0 = parse_rational(&args.epsilon)?;

    // certify gamma1 as a product of conjugates of alpha in the free group
    let free = QuotientHandle::sixth(Presentation::free(p.alphabet.clone()))?;
    let expr: Vec<ConjugatePower> = if gamma1 == alpha {
        vec![ConjugatePower {
            conjugator: Word::identity(),
            inverted: false,
        }]
    } else {
        match ell_alpha_bound(
            &gamma1,
            &alpha,
            &free,
            NormBudget {
                max_factors: 3,
                max_conjugator_len: 2,
            },
        ) {
            NormOutcome::Bounded(c) => match c.expression {
                forge_core::NormExpression::ConjugateProduct { factors, .. } => factors,
                _ => unreachable!("ell_alpha returns conjugate products"),
            },
            _ => {
                return Err(CoreError::InvalidSpec(
                    "cannot certify gamma1 as a short product of conjugates of alpha".into(),
                ))
            }
        }
    };
    let ell = expr.len() as u64;
    let q = args.q.unwrap_or_else(|| {
        // least q with p * L / q < sigma
        let need = Rational::from_integer((args.p * ell) as i64) / sigma;
        let mut q = (need.to_integer() as u64).max(1);
        while Rational::new((args.p * ell) as i64, q as i64) >= sigma {
            q += 1;
        }
        q
    });
    let kappas = forge_core::kappa_family(&x, &y, args.p, args.m);
    let spec = SclSpec::new(gamma, gamma1, alpha, expr, kappas, q, sigma)?;
    let cert = scl_relator(spec, &ambient, lambda0, epsilon0)?;
    let human = cert_human(&cert, &p.alphabet);
    emit(cli, "gen-scl", &human, json!({ "certificate": cert }));
    Ok(EXIT_OK)
}

fn tower_cmd(cli: &Cli, tc: &TowerCommand) -> Result<u8, CoreError> {
    match tc {
        TowerCommand::Init(args) => {
            let lambda0 = parse_rational(&args.lambda)?;
            let epsilon0 = parse_rational(&args.epsilon)?;
            let tower = new_tower_with_targets(args.rank, lambda0, epsilon0)?;
            save_tower(&args.file, &tower)?;
            emit(
                cli,
                "tower-init",
                &format!(
                    "initialized rank-{} tower ({})",
                    args.rank,
                    tower.alphabet.names().join(" ")
                ),
                json!({ "file": args.file, "rank": args.rank }),
            );
            Ok(EXIT_OK)
        }
        TowerCommand::Push(args) => {
            let tower = load_tower(&args.file)?;
            let mut certs: Vec<RelatorCertificate> = Vec::new();
            let top = tower.stage(tower.top_index())?;
            let cumulative = RelatorSet::normalized(tower.alphabet.clone(), &top.cumulative)?;
            for text in &args.relator {
                let w = Word::parse(&tower.alphabet, text)?;
                let core = forge_core::cyclic_reduce(&w).word;
                let single = RelatorSet::normalized(tower.alphabet.clone(), &[core.clone()])?;
                let report = forge_core::joint_report(
                    &[cumulative.clone(), single],
                    tower.lambda0,
                    tower.epsilon0,
                )?;
                let (_, e) = forge_core::primitive_root(&core)?;
                certs.push(RelatorCertificate {
                    relator: core,
                    kind: forge_core::RelatorKind::Plain,
                    report,
                    consequence: Consequence::None,
                    primitive: e == 1,
                });
            }
            let mut goals: Vec<Goal> = Vec::new();
            if let Some(gamma_text) = &args.absorb {
                let gamma = Word::parse(&tower.alphabet, gamma_text)?;
                let x = Word::parse(&tower.alphabet, &args.x)?;
                let y = Word::parse(&tower.alphabet, &args.y)?;
                let family = TuneFamily::Absorption {
                    gamma: gamma.clone(),
                    x,
                    y,
                    start_p: args.start_p,
                    start_q: args.start_q,
                };
                match tune(
                    &family,
                    tower.lambda0,
                    tower.epsilon0,
                    &cumulative,
                    args.cap,
                )? {
                    TuneResult::Tuned { certificate, .. } => {
                        if let Consequence::Absorbed { expression, .. } = &certificate.consequence
                        {
                            goals.push(Goal::Absorb {
                                gamma,
                                expression: expression.clone(),
                            });
                        }
                        certs.push(*certificate);
                    }
                    TuneResult::Failed { best, .. } => {
                        emit(
                            cli,
                            "tower-push",
                            &format!(
                                "absorption tuning failed; best lambda {}",
                                rational_string(best.lambda)
                            ),
                            json!({ "failed": best }),
                        );
                        return Ok(EXIT_NEGATIVE);
                    }
                }
            }
            if !args.survive.is_empty() {
                let words = args
                    .survive
                    .iter()
                    .map(|t| Word::parse(&tower.alphabet, t))
                    .collect::<Result<Vec<_>, _>>()?;
                goals.push(Goal::Survive { words });
            }
            if let Some(r) = args.inject_radius {
                goals.push(Goal::Inject {
                    words: forge_core::ball(tower.alphabet.rank(), r),
                });
            }
            let next = tower.push_stage(&certs, goals)?;
            save_tower(&args.file, &next)?;
            let stage = next.stage(next.top_index())?;
            let mut human = format!(
                "stage {}: {} new relators, heuristic: {}",
                stage.index,
                stage.new_relators.len(),
                stage.heuristic
            );
            let mut worst = GoalStatus::Certified;
            for g in &stage.goals {
                human.push_str(&format!("\n  goal {:?}: {}", g.status, g.detail));
                match g.status {
                    GoalStatus::Failed => worst = GoalStatus::Failed,
                    GoalStatus::Heuristic | GoalStatus::Pending
                        if worst == GoalStatus::Certified =>
                    {
                        worst = GoalStatus::Heuristic
                    }
                    _ => {}
                }
            }
            for p in &stage.poison_checks {
                human.push_str(&format!(
                    "\n  poison {} {:?}: {}",
                    p.witness, p.status, p.detail
                ));
                if p.status == GoalStatus::Failed {
                    worst = GoalStatus::Failed;
                }
            }
            emit(cli, "tower-push", &human, json!({ "stage": stage }));
            Ok(match worst {
                GoalStatus::Certified => EXIT_OK,
                GoalStatus::Failed => EXIT_NEGATIVE,
                _ => EXIT_UNKNOWN,
            })
        }
        TowerCommand::Eval(args) => {
            let tower = load_tower(&args.file)?;
            let word = Word::parse(&tower.alphabet, &args.word)?;
            let stage = args.stage.unwrap_or(tower.top_index());
            let verdict = tower.eval(&word, stage)?;
            let human = format!("stage {stage}: {:?}", verdict.status);
            let code = verdict_exit(verdict.status);
            emit(cli, "tower-eval", &human, json!({ "verdict": verdict }));
            Ok(code)
        }
        TowerCommand::Status(args) => {
            let tower = load_tower(&args.file)?;
            let mut human = format!(
                "alphabet: {}\nstages: {}",
                tower.alphabet.names().join(" "),
                tower.stages.len()
            );
            for s in &tower.stages {
                human.push_str(&format!(
                    "\n  stage {}: {} relators (cumulative {}), heuristic {}, inj-radius >= {}",
                    s.index,
                    s.new_relators.len(),
                    s.cumulative.len(),
                    s.heuristic,
                    s.injectivity_radius_lb
                        .map_or("inf".to_string(), |v| v.to_string())
                ));
                if let Some(r) = &s.report {
                    human.push_str(&format!(
                        " | Delta {}, T {}, lambda {}",
                        r.delta,
                        r.t,
                        rational_string(r.lambda)
                    ));
                }
            }
            human.push_str(&format!(
                "\nledger: {} positive, {} negative, {} sentences",
                tower.ledger.positive.len(),
                tower.ledger.negative.len(),
                tower.ledger.satisfied_sentences.len()
            ));
            emit(cli, "tower-status", &human, json!({ "tower": tower }));
            Ok(EXIT_OK)
        }
    }
}

fn parse_const_assignments(specs: &[String]) -> Result<BTreeMap<String, usize>, CoreError> {
    let mut out = BTreeMap::new();
    for s in specs {
        let (name, idx) = s
            .split_once('=')
            .ok_or_else(|| CoreError::invalid(format!("bad --const {s}, expected name=index")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| CoreError::invalid(format!("bad index in --const {s}")))?;
        out.insert(name.to_string(), idx);
    }
    Ok(out)
}

fn builtin_group(name: &str) -> Result<FiniteGroup, CoreError> {
    match name.to_ascii_lowercase().as_str() {
        "z1" => Ok(FiniteGroup::cyclic(1)),
        "z2" => Ok(FiniteGroup::cyclic(2)),
        "z3" => Ok(FiniteGroup::cyclic(3)),
        "z4" => Ok(FiniteGroup::cyclic(4)),
        "z5" => Ok(FiniteGroup::cyclic(5)),
        "z6" => Ok(FiniteGroup::cyclic(6)),
        "v4" => {
            let z2 = FiniteGroup::cyclic(2);
            Ok(FiniteGroup::direct_product(&z2, &z2))
        }
        "s3" => Ok(FiniteGroup::symmetric3()),
        other => Err(CoreError::invalid(format!("unknown builtin group {other}"))),
    }
}

fn witness_cmd(cli: &Cli, wc: &WitnessCommand) -> Result<u8, CoreError> {
    match wc {
        WitnessCommand::Parse(args) => {
            let s = parse_sentence(&args.sentence)?;
            emit(
                cli,
                "witness-parse",
                &s.to_string(),
                json!({ "sentence": s, "printed": s.to_string() }),
            );
            Ok(EXIT_OK)
        }
        WitnessCommand::Extract(args) => {
            let s = parse_sentence(&args.sentence)?;
            let ea = to_ea_normal(&s)?;
            let mut human = format!(
                "E [{}] A [{}], {} disjuncts",
                ea.y_vars.join(" "),
                ea.x_vars.join(" "),
                ea.disjuncts.len()
            );
            let mut witnesses = Vec::new();
            for i in 0..ea.disjuncts.len() {
                let w = witness_of_disjunct(&ea, i)?;
                human.push_str(&format!(
                    "\n  witness {i}: G = <{} | {} relators>, |V| = {}{}",
                    w.group.alphabet.names().join(" "),
                    w.group.relators.len(),
                    w.v.len(),
                    if w.v_empty_marked { " (empty-marked)" } else { "" }
                ));
                witnesses.push(w);
            }
            emit(
                cli,
                "witness-extract",
                &human,
                json!({ "normalized": ea, "witnesses": witnesses }),
            );
            Ok(EXIT_OK)
        }
        WitnessCommand::Classify(args) => {
            let s = parse_sentence(&args.sentence)?;
            let c = classify(&s);
            let human = format!(
                "positive: {}\none-quantifier: {}\nexists-forall: {}",
                c.positive, c.one_quantifier, c.exists_forall
            );
            emit(cli, "witness-classify", &human, json!({ "classification": c }));
            Ok(EXIT_OK)
        }
        WitnessCommand::CheckFinite(args) => {
            let s = parse_sentence(&args.sentence)?;
            let group = match (&args.group, &args.builtin) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CoreError::Io(format!("cannot read {path}: {e}")))?;
                    FiniteGroup::parse(path, &text)?
                }
                (None, Some(name)) => builtin_group(name)?,
                (None, None) => {
                    return Err(CoreError::invalid("need --group or --builtin"));
                }
            };
            let consts = parse_const_assignments(&args.constants)?;
            match holds_in_finite(&s, &group, &consts) {
                Ok(truth) => {
                    emit(
                        cli,
                        "witness-check-finite",
                        &format!("{} in {}: {}", s, group.name, truth),
                        json!({ "group": group.name, "holds": truth }),
                    );
                    Ok(if truth { EXIT_OK } else { EXIT_NEGATIVE })
                }
                Err(CoreError::BudgetExceeded(msg)) => {
                    emit(
                        cli,
                        "witness-check-finite",
                        &format!("refused: {msg}"),
                        json!({ "refused": msg }),
                    );
                    Ok(EXIT_UNKNOWN)
                }
                Err(e) => Err(e),
            }
        }
        WitnessCommand::Silly(args) => {
            let alphabet = Alphabet::with_rank(args.rank)?;
            let w = Word::parse(&alphabet, &args.word)?;
            let silly = is_silly(&w, args.rank);
            emit(
                cli,
                "witness-silly",
                &format!("silly: {silly}"),
                json!({ "silly": silly }),
            );
            Ok(if silly { EXIT_OK } else { EXIT_NEGATIVE })
        }
    }
}

fn parse_budget(text: &str) -> Result<NormBudget, CoreError> {
    let (f, c) = text
        .split_once(',')
        .ok_or_else(|| CoreError::invalid("budget must be F,C"))?;
    Ok(NormBudget {
        max_factors: f
            .trim()
            .parse()
            .map_err(|_| CoreError::invalid("bad factor budget"))?,
        max_conjugator_len: c
            .trim()
            .parse()
            .map_err(|_| CoreError::invalid("bad conjugator budget"))?,
    })
}

/// A norm target: a presentation file, or a tower file's top stage.
fn load_norm_handle(path: &str) -> Result<QuotientHandle, CoreError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Io(format!("cannot read {path}: {e}")))?;
    if text.trim_start().starts_with('{') {
        let tower = Tower::from_json(&text)?;
        tower.handle(tower.top_index())
    } else {
        QuotientHandle::sixth(Presentation::parse(&text)?)
    }
}

fn norm_outcome_report(
    cli: &Cli,
    command: &str,
    alphabet: &Alphabet,
    outcome: &NormOutcome,
) -> u8 {
    match outcome {
        NormOutcome::Bounded(cert) => {
            emit(
                cli,
                command,
                &format!(
                    "bound: {} ({} factors)",
                    rational_string(cert.bound),
                    cert.factor_count()
                ),
                json!({ "outcome": "bounded", "certificate": cert }),
            );
            EXIT_OK
        }
        NormOutcome::Infinite(cert) => {
            emit(
                cli,
                command,
                &format!(
                    "infinite: {} (element {})",
                    cert.reason,
                    cert.element.display(alphabet)
                ),
                json!({ "outcome": "infinite", "certificate": cert }),
            );
            EXIT_NEGATIVE
        }
        NormOutcome::Unknown => {
            emit(
                cli,
                command,
                "unknown within budget",
                json!({ "outcome": "unknown" }),
            );
            EXIT_UNKNOWN
        }
    }
}

fn norm_cmd(cli: &Cli, nc: &NormCommand) -> Result<u8, CoreError> {
    let (command, args) = match nc {
        NormCommand::EllAlpha(a) => ("norm-ell-alpha", a),
        NormCommand::Cl(a) => ("norm-cl", a),
        NormCommand::WLength(a) => ("norm-w-length", a),
    };
    let handle = load_norm_handle(&args.file)?;
    let alphabet = handle.presentation.alphabet.clone();
    let element = Word::parse(&alphabet, &args.element)?;
    let budget = parse_budget(&args.budget)?;
    let outcome = match nc {
        NormCommand::EllAlpha(_) => {
            let alpha_text = args
                .alpha
                .as_ref()
                .ok_or_else(|| CoreError::invalid("--alpha is required"))?;
            let alpha = Word::parse(&alphabet, alpha_text)?;
            ell_alpha_bound(&element, &alpha, &handle, budget)
        }
        NormCommand::Cl(_) => cl_bound(&element, &handle, budget),
        NormCommand::WLength(_) => {
            let word_text = args
                .word
                .as_ref()
                .ok_or_else(|| CoreError::invalid("--word is required"))?;
            // the verbal word lives over its own free alphabet a, b, ...
            let verbal = Word::parse_canonical(word_text)?;
            let arity = verbal.max_gen().map_or(1, |m| m + 1);
            if is_silly(&verbal, arity) && !cli.json {
                println!("note: the verbal word is silly; its length is at most 1 wherever defined");
            }
            w_length_bound(&element, &verbal, &handle, budget)?
        }
    };
    Ok(norm_outcome_report(cli, command, &alphabet, &outcome))
}

fn repro_cmd(cli: &Cli, args: &ReproArgs) -> Result<u8, CoreError> {
    let report = repro_remark18(args.n)?;
    let human = format!(
        "n = {}\nrelator length = {}\nDelta = {} (reference {})\nT = {}\nlambda = {}\nC'(1/6): {}\nepimorphism x->a, y->b, z->(a2b2)^n verified: {}\ngenerators covered (onto): {}\nsource abelianization: {}\nquotient abelianization: {}\nall checks pass: {}",
        report.n,
        report.relator.len(),
        report.delta,
        report.delta_reference,
        report.t,
        rational_string(report.lambda),
        report.cprime_sixth,
        report.hom_verified,
        report.generators_covered,
        report.source_abelianization,
        report.quotient_abelianization,
        report.all_checks_pass,
    );
    emit(cli, "repro-remark18", &human, json!({ "report": report }));
    Ok(if report.all_checks_pass {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}
