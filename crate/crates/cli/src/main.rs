//! Command-line surface for the cusp-atlas library: invariants, equivalence
//! deciders, cusp classification, constructive witnesses, quaternion
//! ramification, the parabolic embedding, unipotent reconstruction, and the
//! avoiding-class enumerator. Output is a single JSON document on stdout;
//! diagnostics go to stderr.
//!
//! Exit codes: 0 success; 1 mathematical negative under `--fail-on-no`;
//! 2 usage error; 3 computation error (factoring or search gave up).

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cusp_atlas_core::arith::{parse_rational, rational_to_string, set_factor_bound};
use cusp_atlas_core::cusp::{
    admits, admits_5d_product, ambient_gram, class_of, enumerate_avoiding, parabolic_embed,
    witness_form, CommensurabilityClass, CuspType, FiveDimVerdict, ParabolicIsometry,
};
use cusp_atlas_core::matrix::{parse_matrix, Matrix};
use cusp_atlas_core::qform::{
    hasse_witt, invariant_profile, projectively_equivalent, rationally_equivalent, relevant_primes,
    DiagonalForm, Equivalence, Place,
};
use cusp_atlas_core::quat::{has_torsion, ramification_set, QuaternionAlgebra};
use cusp_atlas_core::unipotent::{binomial_g, reconstruct_from_power, UnipotentMatrix};
use cusp_atlas_core::{BigRational, Error};

const SCHEMA: &str = "cusp-atlas/1";

#[derive(Parser)]
#[command(
    name = "cusp-atlas",
    about = "Exact invariants of rational quadratic forms and flat cusp classification",
    version
)]
struct Cli {
    /// Emit compact JSON (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    json: bool,

    /// Pretty-print the JSON output.
    #[arg(long, global = true)]
    pretty: bool,

    /// Exit with status 1 when the mathematical answer is negative.
    #[arg(long = "fail-on-no", global = true)]
    fail_on_no: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FormArg {
    /// Diagonal form as comma-separated coefficients, e.g. "1,1,7,7,-1";
    /// fractions like "3/2" are accepted.
    #[arg(long, allow_hyphen_values = true)]
    form: String,
}

#[derive(Subcommand)]
enum Command {
    /// Signature, discriminant class, and Hasse-Witt invariants of a form.
    Invariants(FormArg),
    /// Decide rational equivalence of two forms.
    Equiv {
        #[arg(long, allow_hyphen_values = true)]
        lhs: String,
        #[arg(long, allow_hyphen_values = true)]
        rhs: String,
    },
    /// Decide projective equivalence of two forms.
    ProjEquiv {
        #[arg(long, allow_hyphen_values = true)]
        lhs: String,
        #[arg(long, allow_hyphen_values = true)]
        rhs: String,
    },
    /// Admissible cusp types for the commensurability class of a
    /// signature-(4,1) form.
    Classify(FormArg),
    /// Constructive witness form for a cusp type in a class.
    Witness {
        #[arg(long, allow_hyphen_values = true)]
        form: String,
        /// One of: torus, half_twist, hantzsche_wendt, third_twist,
        /// quarter_twist, sixth_twist.
        #[arg(long)]
        cusp: String,
        /// Re-run the projective-equivalence certification.
        #[arg(long)]
        verify: bool,
    },
    /// Ramification set and torsion of the quaternion algebra (a,b/Q).
    Quat {
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        /// Report whether the projectivized units contain this order (3, 4, or 6).
        #[arg(long)]
        torsion: Option<u32>,
    },
    /// Rank-6 product-cusp obstruction for a signature-(5,1) form.
    #[command(name = "classify-5d")]
    Classify5d {
        #[arg(long, allow_hyphen_values = true)]
        form: String,
        #[arg(long)]
        cusp: String,
    },
    /// Embed an affine isometry (rotation + translation) into the rank-5
    /// isometry group fixing a light-like vector.
    Embed {
        /// 3x3 rational rotation, rows separated by ';', e.g. "0,1,0;-1,0,0;0,0,1".
        #[arg(long, allow_hyphen_values = true)]
        rotation: String,
        /// Rational translation vector, e.g. "1,0,1/2".
        #[arg(long, allow_hyphen_values = true)]
        translation: String,
        /// Rank-3 positive diagonal form, e.g. "7,7,1".
        #[arg(long, allow_hyphen_values = true)]
        q3: String,
    },
    /// Unipotent-matrix tools.
    #[command(subcommand)]
    Unipotent(UnipotentCommand),
    /// Enumerate commensurability classes avoiding a twisted cusp type, one
    /// per obstructing prime up to the bound.
    Enumerate {
        /// third_twist, quarter_twist, or sixth_twist.
        #[arg(long)]
        avoid: String,
        #[arg(long)]
        prime_bound: u64,
        /// Re-run the certification of every enumerated class.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Subcommand)]
enum UnipotentCommand {
    /// Write M as an exact linear combination of powers M^(a k).
    Reconstruct {
        /// Square rational matrix, rows separated by ';'.
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
        #[arg(long)]
        k: u32,
    },
    /// Evaluate the alternating binomial functional of a polynomial.
    Binomial {
        /// Ascending coefficients of f, e.g. "0,0,1" for x^2.
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
}

fn parse_form(s: &str) -> Result<DiagonalForm, Error> {
    let coefficients: Result<Vec<BigRational>, Error> = s.split(',').map(parse_rational).collect();
    DiagonalForm::new(coefficients?)
}

fn parse_vector(s: &str) -> Result<Vec<BigRational>, Error> {
    s.split(',').map(parse_rational).collect()
}

fn parse_cusp(s: &str) -> Result<CuspType, Error> {
    CuspType::from_name(s).ok_or_else(|| {
        Error::Parse(format!(
            "unknown cusp type `{s}` (expected one of: {})",
            CuspType::ALL.map(|t| t.name()).join(", ")
        ))
    })
}

fn form_json(q: &DiagonalForm) -> Value {
    Value::Array(
        q.coefficients()
            .iter()
            .map(|c| Value::String(rational_to_string(c)))
            .collect(),
    )
}

fn matrix_json(m: &Matrix) -> Value {
    Value::Array(
        m.to_rows()
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|x| Value::String(rational_to_string(x)))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn profile_json(q: &DiagonalForm) -> Result<Value, Error> {
    let profile = invariant_profile(q)?;
    let mut witt = serde_json::Map::new();
    for p in relevant_primes(q)? {
        witt.insert(
            p.to_string(),
            Value::String(hasse_witt(q, Place::Finite(p))?.to_string()),
        );
    }
    Ok(json!({
        "signature": [profile.signature.0.to_string(), profile.signature.1.to_string()],
        "discriminant": profile.discriminant_class.to_string(),
        "hasse_witt": Value::Object(witt),
        "negative_places": profile.negative_places.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "epsilon_infinity": profile.epsilon_infinity.to_string(),
    }))
}

fn class_json(prime: Option<u64>, class: &CommensurabilityClass) -> Value {
    let mut obj = json!({
        "representative": form_json(class.representative()),
        "bad_primes": class.bad_primes().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
    });
    if let Some(p) = prime {
        obj["prime"] = Value::String(p.to_string());
    }
    obj
}

/// Runs one subcommand; returns the JSON document and whether the
/// mathematical answer was negative (for `--fail-on-no`).
fn run(command: &Command) -> Result<(Value, bool), Error> {
    match command {
        Command::Invariants(FormArg { form }) => {
            let q = parse_form(form)?;
            let mut doc = json!({
                "schema": SCHEMA,
                "command": "invariants",
                "form": form_json(&q),
            });
            let profile = profile_json(&q)?;
            for (k, v) in profile.as_object().unwrap() {
                doc[k] = v.clone();
            }
            Ok((doc, false))
        }
        Command::Equiv { lhs, rhs } => {
            let (l, r) = (parse_form(lhs)?, parse_form(rhs)?);
            let verdict = rationally_equivalent(&l, &r)?;
            let mut doc = json!({
                "schema": SCHEMA,
                "command": "equiv",
                "lhs": form_json(&l),
                "rhs": form_json(&r),
                "equivalent": verdict.holds(),
            });
            if let Equivalence::Distinct(reason) = verdict {
                doc["reason"] = Value::String(reason.to_string());
            }
            Ok((doc, !verdict.holds()))
        }
        Command::ProjEquiv { lhs, rhs } => {
            let (l, r) = (parse_form(lhs)?, parse_form(rhs)?);
            let equivalent = projectively_equivalent(&l, &r)?;
            let doc = json!({
                "schema": SCHEMA,
                "command": "proj-equiv",
                "lhs": form_json(&l),
                "rhs": form_json(&r),
                "projectively_equivalent": equivalent,
            });
            Ok((doc, !equivalent))
        }
        Command::Classify(FormArg { form }) => {
            let q = parse_form(form)?;
            let class = class_of(&q)?;
            let admissible: Vec<&str> = CuspType::ALL
                .iter()
                .filter(|&&t| admits(&class, t))
                .map(|t| t.name())
                .collect();
            let obstructed: Vec<&str> = CuspType::ALL
                .iter()
                .filter(|&&t| !admits(&class, t))
                .map(|t| t.name())
                .collect();
            let negative = !obstructed.is_empty();
            let doc = json!({
                "schema": SCHEMA,
                "command": "classify",
                "form": form_json(&q),
                "class": class_json(None, &class),
                "admissible": admissible,
                "obstructed": obstructed,
            });
            Ok((doc, negative))
        }
        Command::Witness { form, cusp, verify } => {
            let q = parse_form(form)?;
            let t = parse_cusp(cusp)?;
            let class = class_of(&q)?;
            if !admits(&class, t) {
                let modulus = t.obstruction_modulus().unwrap_or(0);
                let obstructing: Vec<String> = class
                    .bad_primes()
                    .iter()
                    .filter(|&&p| modulus != 0 && p % modulus == 1)
                    .map(|p| p.to_string())
                    .collect();
                let doc = json!({
                    "schema": SCHEMA,
                    "command": "witness",
                    "form": form_json(&q),
                    "cusp": t.name(),
                    "admissible": false,
                    "obstructing_primes": obstructing,
                });
                return Ok((doc, true));
            }
            let w = witness_form(&class, t)?;
            let block = DiagonalForm::new(w.coefficients()[..3].to_vec())?;
            let mut verification = json!({
                "projectively_equivalent_to_class": true,
                "holonomy_invariant_block": form_json(&block),
            });
            if *verify {
                let recheck = projectively_equivalent(&w, class.representative())?;
                assert!(recheck, "verification re-run must agree");
                verification["reverified"] = Value::Bool(true);
            }
            let doc = json!({
                "schema": SCHEMA,
                "command": "witness",
                "form": form_json(&q),
                "cusp": t.name(),
                "admissible": true,
                "witness": form_json(&w),
                "verification": verification,
            });
            Ok((doc, false))
        }
        Command::Quat { a, b, torsion } => {
            if let Some(n) = torsion {
                if ![3, 4, 6].contains(n) {
                    return Err(Error::Parse(format!(
                        "torsion order must be 3, 4, or 6 (got {n})"
                    )));
                }
            }
            let algebra = QuaternionAlgebra::from_ints(*a, *b)?;
            let ram = ramification_set(&algebra)?;
            let places: Vec<String> = ram.places.iter().map(|v| v.to_string()).collect();
            let (na, nb) = algebra.pair();
            let mut torsion_map = serde_json::Map::new();
            for n in [3u32, 4, 6] {
                torsion_map.insert(n.to_string(), Value::Bool(has_torsion(&algebra, n)?));
            }
            let mut doc = json!({
                "schema": SCHEMA,
                "command": "quat",
                "a": a.to_string(),
                "b": b.to_string(),
                "normalized": [na.to_string(), nb.to_string()],
                "ramified_places": places,
                "torsion": Value::Object(torsion_map),
            });
            let mut negative = false;
            if let Some(n) = torsion {
                let has = has_torsion(&algebra, *n)?;
                doc["has_torsion"] = Value::Bool(has);
                negative = !has;
            }
            Ok((doc, negative))
        }
        Command::Classify5d { form, cusp } => {
            let q = parse_form(form)?;
            let t = parse_cusp(cusp)?;
            let verdict = admits_5d_product(&q, t)?;
            let obstructed = verdict == FiveDimVerdict::Obstructed;
            let doc = json!({
                "schema": SCHEMA,
                "command": "classify-5d",
                "form": form_json(&q),
                "cusp": t.name(),
                "verdict": if obstructed { "obstructed" } else { "not_obstructed" },
            });
            Ok((doc, obstructed))
        }
        Command::Embed {
            rotation,
            translation,
            q3,
        } => {
            let q3 = parse_form(q3)?;
            if q3.rank() != 3 {
                return Err(Error::Parse("--q3 must have exactly 3 coefficients".into()));
            }
            let a = parse_matrix(rotation)?;
            if a.rows() != 3 || a.cols() != 3 {
                return Err(Error::Parse("--rotation must be 3x3".into()));
            }
            let w = parse_vector(translation)?;
            if w.len() != 3 {
                return Err(Error::Parse("--translation must have 3 entries".into()));
            }
            let phi = ParabolicIsometry::new(a, w, &q3)?;
            let m = parabolic_embed(&phi, &q3)?;
            let gram = ambient_gram(&q3);
            let preserves = &(&m.transpose() * &gram) * &m == gram;
            let y0: Vec<BigRational> = ["0", "0", "0", "1", "1"]
                .iter()
                .map(|s| parse_rational(s).unwrap())
                .collect();
            let fixes = m.apply(&y0) == y0;
            assert!(
                preserves && fixes,
                "embedding laws must hold for valid input"
            );
            let doc = json!({
                "schema": SCHEMA,
                "command": "embed",
                "q3": form_json(&q3),
                "rotation": matrix_json(&phi.rotation),
                "translation": phi.translation.iter().map(rational_to_string).collect::<Vec<_>>(),
                "matrix": matrix_json(&m),
                "checks": {
                    "preserves_form": preserves,
                    "fixes_base_point": fixes,
                },
            });
            Ok((doc, false))
        }
        Command::Unipotent(UnipotentCommand::Reconstruct { matrix, k }) => {
            if *k == 0 {
                return Err(Error::Parse("--k must be positive".into()));
            }
            let m = parse_matrix(matrix)?;
            if !m.is_square() {
                return Err(Error::Parse("--matrix must be square".into()));
            }
            let u = UnipotentMatrix::new(m)?;
            let coefficients = reconstruct_from_power(&u, *k)?;
            let doc = json!({
                "schema": SCHEMA,
                "command": "unipotent-reconstruct",
                "matrix": matrix_json(u.matrix()),
                "k": k.to_string(),
                "nilpotency_index": u.nilpotency_index().to_string(),
                "coefficients": coefficients.iter().map(rational_to_string).collect::<Vec<_>>(),
            });
            Ok((doc, false))
        }
        Command::Unipotent(UnipotentCommand::Binomial { poly, n, y, x }) => {
            let f = parse_vector(poly)?;
            let y = parse_rational(y)?;
            let x = parse_rational(x)?;
            let value = binomial_g(&f, *n, &y, &x);
            let doc = json!({
                "schema": SCHEMA,
                "command": "unipotent-binomial",
                "poly": f.iter().map(rational_to_string).collect::<Vec<_>>(),
                "n": n.to_string(),
                "y": rational_to_string(&y),
                "x": rational_to_string(&x),
                "value": rational_to_string(&value),
            });
            Ok((doc, false))
        }
        Command::Enumerate {
            avoid,
            prime_bound,
            verify,
        } => {
            let t = parse_cusp(avoid)?;
            if t.obstruction_modulus().is_none() {
                return Err(Error::Parse(format!(
                    "`{}` occurs in every class; enumeration applies to third_twist, quarter_twist, sixth_twist",
                    t.name()
                )));
            }
            let classes = enumerate_avoiding(t, *prime_bound)?;
            if *verify {
                for (_, c) in &classes {
                    let recheck = invariant_profile(c.representative())?;
                    assert_eq!(&recheck, c.profile(), "enumerated class must re-certify");
                    assert!(!admits(c, t));
                }
            }
            let doc = json!({
                "schema": SCHEMA,
                "command": "enumerate",
                "avoid": t.name(),
                "prime_bound": prime_bound.to_string(),
                "count": classes.len().to_string(),
                "classes": classes
                    .iter()
                    .map(|(p, c)| class_json(Some(*p), c))
                    .collect::<Vec<_>>(),
                "verified": *verify,
            });
            Ok((doc, false))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::UnfactoredCofactor { .. } | Error::SearchExhausted(_) | Error::Infeasible(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    if let Ok(raw) = std::env::var("CUSP_ATLAS_FACTOR_BOUND") {
        match raw.parse::<u64>() {
            Ok(bound) if bound >= 2 => set_factor_bound(bound),
            _ => {
                eprintln!("cusp-atlas: invalid CUSP_ATLAS_FACTOR_BOUND `{raw}`");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok((doc, negative)) => {
            let rendered = if cli.pretty {
                serde_json::to_string_pretty(&doc).expect("serializable")
            } else {
                serde_json::to_string(&doc).expect("serializable")
            };
            println!("{rendered}");
            if negative && cli.fail_on_no {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("cusp-atlas: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
