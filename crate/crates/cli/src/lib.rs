//! Command-line front end: `evolve`, `canon`, `verify` and `sweep`.
//!
//! Exit codes: 0 success, 1 falsified certificate, 2 usage or input error,
//! 3 oracle disagreement, 4 seeds in different canonical classes.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linca_core::engine::{evolve, Pattern};
use linca_core::equiv::{
    canonicalize, equivalence_classes, transfer_map, verify_isomorphism, Certificate, EquivError,
    Status,
};
use linca_core::oracle::{search_state_maps, NaiveEvaluator, ORACLE_MAX_STEPS};
use linca_core::render::{render_image, render_text};
use linca_core::rule::{parse_rule, TransitionRule};
use linca_core::zmod::Modulus;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FALSIFIED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_ORACLE: u8 = 3;
pub const EXIT_CLASSES: u8 = 4;

pub const DEFAULT_RULE: &str = "1@(-1);1@(1)";
pub const DEFAULT_STEPS: usize = 15;

#[derive(Debug, Parser)]
#[command(
    name = "linca",
    version,
    about = "Linear cellular automata over Z/nZ from single-site seeds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a single-site seed and write the pattern.
    Evolve(EvolveArgs),
    /// Reduce (n, a) to (n / gcd(n, a), 1) and print the state map.
    Canon(CanonArgs),
    /// Build the state map between two seeds and verify it cell by cell.
    Verify(VerifyArgs),
    /// Partition seeds by canonical class for every n up to a bound.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RuleArgs {
    /// Rule terms, e.g. "1@(-1);1@(1)".
    #[arg(long, default_value = DEFAULT_RULE, allow_hyphen_values = true)]
    pub rule: String,
    /// Spatial dimension of the rule offsets.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Number of time steps.
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Pgm,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub states: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Output path; text goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Cross-check every cell against the recursive reference evaluator.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct CanonArgs {
    #[arg(long)]
    pub states: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Also evolve both patterns and print the certificate.
    #[arg(long)]
    pub certify: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub states: u64,
    #[arg(long = "seed-a")]
    pub seed_a: u64,
    #[arg(long = "seed-b")]
    pub seed_b: u64,
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Also list every witness found by exhaustive search.
    #[arg(long)]
    pub search: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "states-max")]
    pub states_max: u64,
    /// File with one rule per line; blank lines and '#' comments are skipped.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
}

/// An error that ends the command with a given exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

fn io_failure(e: io::Error) -> Failure {
    usage(format!("write failed: {e}"))
}

/// Runs a parsed command, writing the report to `out`. Returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match &cli.command {
        Command::Evolve(args) => cmd_evolve(args, out, err),
        Command::Canon(args) => cmd_canon(args, out),
        Command::Verify(args) => cmd_verify(args, out),
        Command::Sweep(args) => cmd_sweep(args, out),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

fn modulus(n: u64) -> Result<Modulus, Failure> {
    Modulus::new(n).map_err(usage)
}

fn rule(args: &RuleArgs) -> Result<TransitionRule, Failure> {
    parse_rule(&args.rule, args.dim).map_err(|e| usage(format!("--rule: {e}")))
}

fn format_site(site: &[i64]) -> String {
    site.iter()
        .map(i64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn cmd_evolve(args: &EvolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, Failure> {
    let n = modulus(args.states)?;
    let rule = rule(&args.rule)?;
    let pattern = evolve(n, &rule, args.seed, args.rule.steps).map_err(usage)?;

    match (args.format, &args.out) {
        (Format::Text, None) => {
            out.write_all(render_text(&pattern).map_err(usage)?.as_bytes())
                .map_err(io_failure)?;
        }
        (Format::Text, Some(path)) => {
            let text = render_text(&pattern).map_err(usage)?;
            fs::write(path, text)
                .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
            writeln!(err, "wrote {}", path.display()).map_err(io_failure)?;
        }
        (Format::Pgm, None) => return Err(usage("--format pgm needs --out")),
        (Format::Pgm, Some(path)) => {
            for file in render_image(&pattern, path).map_err(usage)? {
                writeln!(err, "wrote {}", file.display()).map_err(io_failure)?;
            }
        }
    }

    if args.oracle {
        return oracle_check(&pattern, &rule, args.seed, err);
    }
    Ok(EXIT_OK)
}

fn oracle_check(
    pattern: &Pattern,
    rule: &TransitionRule,
    seed: u64,
    err: &mut dyn Write,
) -> Result<u8, Failure> {
    let mut eval = NaiveEvaluator::new(pattern.modulus(), rule, seed).map_err(usage)?;
    let checked = pattern.t_max().min(ORACLE_MAX_STEPS);
    for t in 0..=checked {
        let row = pattern.row(t);
        for site in row.bounds().sites() {
            let expected = eval.cell(t, &site).map_err(usage)?;
            let got = row.get(&site);
            if got != expected {
                writeln!(
                    err,
                    "oracle: disagree t={t} i={} engine={got} oracle={expected}",
                    format_site(&site)
                )
                .map_err(io_failure)?;
                return Ok(EXIT_ORACLE);
            }
        }
    }
    writeln!(err, "oracle: agree through t={checked}").map_err(io_failure)?;
    Ok(EXIT_OK)
}

fn justification(cert: &Certificate) -> String {
    format!(
        "note: checked through t={}; for all t the map follows from T(k*u) = k*T(u) and from dividing the subgroup gcd(n,a)Z/nZ by gcd(n,a)\n",
        cert.horizon
    )
}

fn certificate_report(cert: &Certificate) -> String {
    let mut text = cert.to_string();
    if cert.is_verified() {
        text.push_str(&justification(cert));
    }
    text
}

fn cmd_canon(args: &CanonArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    let n = modulus(args.states)?;
    let canon = canonicalize(n, args.seed).map_err(usage)?;
    let mut text = format!("r={} d={}\n", canon.modulus, canon.divisor);
    for (b, v) in canon.map.pairs() {
        let _ = writeln!(text, "map {b}->{v}");
    }
    let mut code = EXIT_OK;
    if args.certify {
        let rule = rule(&args.rule)?;
        let p = evolve(n, &rule, args.seed, args.rule.steps).map_err(usage)?;
        let q = evolve(canon.modulus, &rule, 1, args.rule.steps).map_err(usage)?;
        let cert = verify_isomorphism(&p, &q, &canon.map).map_err(usage)?;
        text.push('\n');
        text.push_str(&certificate_report(&cert));
        if !cert.is_verified() {
            code = EXIT_FALSIFIED;
        }
    }
    out.write_all(text.as_bytes()).map_err(io_failure)?;
    Ok(code)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    let n = modulus(args.states)?;
    let rule = rule(&args.rule)?;
    let map = match transfer_map(n, args.seed_a, args.seed_b) {
        Ok(map) => map,
        Err(e @ EquivError::DifferentClasses { .. }) => {
            writeln!(out, "{e}").map_err(io_failure)?;
            return Ok(EXIT_CLASSES);
        }
        Err(e) => return Err(usage(e)),
    };
    let p = evolve(n, &rule, args.seed_a, args.rule.steps).map_err(usage)?;
    let q = evolve(n, &rule, args.seed_b, args.rule.steps).map_err(usage)?;
    let cert = verify_isomorphism(&p, &q, &map).map_err(usage)?;
    let mut text = certificate_report(&cert);
    if args.search {
        match search_state_maps(&p, &q) {
            Ok(witnesses) => {
                let _ = writeln!(text, "search witnesses={}", witnesses.len());
                for w in &witnesses {
                    let _ = writeln!(text, "witness {w}");
                }
            }
            Err(e) => {
                let _ = writeln!(text, "search skipped: {e}");
            }
        }
    }
    out.write_all(text.as_bytes()).map_err(io_failure)?;
    Ok(if cert.is_verified() {
        EXIT_OK
    } else {
        EXIT_FALSIFIED
    })
}

/// Reads rules one per line, reporting the first bad line by number.
pub fn read_rules(text: &str, dim: usize) -> Result<Vec<TransitionRule>, Failure> {
    let mut rules = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rule = parse_rule(line, dim)
            .map_err(|e| usage(format!("rules file line {}: {e}", idx + 1)))?;
        rules.push(rule);
    }
    if rules.is_empty() {
        return Err(usage("rules file contains no rules"));
    }
    Ok(rules)
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    if args.states_max < 2 {
        return Err(usage("--states-max must be at least 2"));
    }
    modulus(args.states_max)?;
    let rules = match &args.rules {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read rules file {}: {e}", path.display())))?;
            read_rules(&text, args.dim)?
        }
        None => vec![parse_rule(DEFAULT_RULE, 1).map_err(usage)?],
    };

    let mut text = format!(
        "sweep v1 states-max={} steps={} dim={}\n",
        args.states_max, args.steps, args.dim
    );
    let (mut total, mut falsified) = (0usize, 0usize);
    for rule in &rules {
        let _ = writeln!(text, "rule \"{rule}\"");
        for n in 2..=args.states_max {
            let classes = equivalence_classes(modulus(n)?, rule, args.steps).map_err(usage)?;
            let mut parts = Vec::with_capacity(classes.len());
            for class in &classes {
                let seeds: Vec<String> = class.seeds.iter().map(u32::to_string).collect();
                let status = match class.certificates.iter().find(|c| !c.is_verified()) {
                    None => "verified".to_string(),
                    Some(Certificate {
                        source_seed,
                        status: Status::Falsified { t, site },
                        ..
                    }) => format!("falsified(a={source_seed} t={t} i={})", format_site(site)),
                    Some(_) => unreachable!("unverified certificate carries a failure"),
                };
                total += class.certificates.len();
                falsified += class
                    .certificates
                    .iter()
                    .filter(|c| !c.is_verified())
                    .count();
                parts.push(format!(
                    "{{{}}}->r={} {status}",
                    seeds.join(","),
                    class.canonical
                ));
            }
            let _ = writeln!(text, "  n={n} {}", parts.join(" | "));
        }
    }
    let _ = writeln!(
        text,
        "summary certificates={total} verified={} falsified={falsified}",
        total - falsified
    );
    out.write_all(text.as_bytes()).map_err(io_failure)?;
    Ok(if falsified == 0 {
        EXIT_OK
    } else {
        EXIT_FALSIFIED
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (u8, String, String) {
        let cli =
            Cli::try_parse_from(std::iter::once("linca").chain(args.iter().copied())).unwrap();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(&cli, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn defaults() {
        let cli = Cli::try_parse_from(["linca", "evolve", "--states", "2", "--seed", "1"]).unwrap();
        let Command::Evolve(args) = cli.command else {
            panic!()
        };
        assert_eq!(args.rule.rule, DEFAULT_RULE);
        assert_eq!(args.rule.steps, 15);
        assert_eq!(args.rule.dim, 1);
        assert_eq!(args.format, Format::Text);
    }

    #[test]
    fn evolve_zero_steps() {
        let (code, out, _) = run_args(&["evolve", "--states", "2", "--seed", "1", "--steps", "0"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(
            out,
            "linca-pattern v1 dim=1 n=2 seed=1 tmax=0 radius=1\n1\n"
        );
    }

    #[test]
    fn evolve_zero_seed() {
        let (code, out, err) = run_args(&["evolve", "--states", "4", "--seed", "0"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.is_empty());
        assert!(err.contains("seed must be nonzero"));
    }

    #[test]
    fn evolve_pgm_needs_out() {
        let (code, _, err) =
            run_args(&["evolve", "--states", "5", "--seed", "3", "--format", "pgm"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--out"));
    }

    #[test]
    fn evolve_with_oracle() {
        let (code, _, err) = run_args(&[
            "evolve",
            "--states",
            "6",
            "--seed",
            "5",
            "--rule",
            "1@(-1);2@(0);3@(1)",
            "--oracle",
        ]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(err, "oracle: agree through t=15\n");
    }

    #[test]
    fn bad_rule_is_usage_error() {
        let (code, _, err) = run_args(&[
            "evolve", "--states", "5", "--seed", "1", "--rule", "1@(1,1)",
        ]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--rule"));
    }

    #[test]
    fn canon_outputs() {
        let (code, out, _) = run_args(&["canon", "--states", "6", "--seed", "4"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, "r=3 d=2\nmap 0->0\nmap 2->2\nmap 4->1\n");

        let (_, out, _) = run_args(&["canon", "--states", "6", "--seed", "3"]);
        assert_eq!(out, "r=2 d=3\nmap 0->0\nmap 3->1\n");

        let (_, out, _) = run_args(&["canon", "--states", "7", "--seed", "1"]);
        let expected: String = std::iter::once("r=7 d=1\n".to_string())
            .chain((0..7).map(|b| format!("map {b}->{b}\n")))
            .collect();
        assert_eq!(out, expected);
    }

    #[test]
    fn canon_certify() {
        let (code, out, _) = run_args(&[
            "canon",
            "--states",
            "6",
            "--seed",
            "4",
            "--certify",
            "--steps",
            "8",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains(
            "\ncertificate v1\nsource n=6 a=4 rule=\"1@(-1);1@(1)\" tmax=8\ntarget n=3 a=1\n"
        ));
        assert!(out.contains("status verified\nnote: checked through t=8"));
    }

    #[test]
    fn verify_outputs() {
        let (code, out, _) =
            run_args(&["verify", "--states", "3", "--seed-a", "1", "--seed-b", "2"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("map 1->2\nmap 2->1\nstatus verified\n"));

        let (code, out, _) =
            run_args(&["verify", "--states", "6", "--seed-a", "2", "--seed-b", "3"]);
        assert_eq!(code, EXIT_CLASSES);
        assert_eq!(
            out,
            "seeds lie in different canonical classes: r_a=3 r_b=2\n"
        );

        let (code, out, _) =
            run_args(&["verify", "--states", "9", "--seed-a", "4", "--seed-b", "4"]);
        assert_eq!(code, EXIT_OK);
        assert!((0..9).all(|b| out.contains(&format!("map {b}->{b}\n"))));
    }

    #[test]
    fn verify_with_search() {
        let (code, out, _) = run_args(&[
            "verify", "--states", "5", "--seed-a", "1", "--seed-b", "2", "--steps", "10",
            "--search",
        ]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("search witnesses=1\nwitness 0->0 1->2 2->4 3->1 4->3\n"));

        let (_, out, _) = run_args(&[
            "verify", "--states", "11", "--seed-a", "1", "--seed-b", "2", "--steps", "20",
            "--search",
        ]);
        assert!(out.contains("search skipped"));
    }

    #[test]
    fn read_rules_reports_line() {
        let text = "1@(-1);1@(1)\n\n1@(0) ; 1@(1\n";
        let err = read_rules(text, 1).unwrap_err();
        assert_eq!(err.code, EXIT_USAGE);
        assert!(
            err.message.starts_with("rules file line 3:"),
            "{}",
            err.message
        );
        assert_eq!(read_rules("# c\n1@(0)\n", 1).unwrap().len(), 1);
        assert!(read_rules("\n", 1).is_err());
    }

    #[test]
    fn sweep_small() {
        let (code, out, _) = run_args(&["sweep", "--states-max", "2", "--steps", "4"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(
            out,
            "sweep v1 states-max=2 steps=4 dim=1\n\
             rule \"1@(-1);1@(1)\"\n  n=2 {1}->r=2 verified\n\
             summary certificates=1 verified=1 falsified=0\n"
        );
        let (code, _, _) = run_args(&["sweep", "--states-max", "1"]);
        assert_eq!(code, EXIT_USAGE);
    }
}
