//! Command-line front end: JSON in, verified reports out.
//!
//! Exit codes: 0 = all checks passed, 1 = a mathematical check failed
//! (the report carries the witness), 2 = input or validation error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ksw_core::hodge;
use ksw_core::json as kjson;
use ksw_core::kugasatake;
use ksw_core::normfunctor::{EModule, NormModule};
use ksw_core::par::Parallelism;
use ksw_core::quadspace::EAction;
use ksw_core::reptheory;
use ksw_core::so4quat;
use ksw_core::suite::{run_suite, RunReport};

#[derive(Parser)]
#[command(
    name = "ksw",
    about = "exact checks for quadratic forms, Clifford algebras, norms and Kuga-Satake data",
    version
)]
struct Cli {
    /// Output format
    #[arg(long, global = true, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Transfer an E-valued form down to Q
    Transfer {
        #[arg(long)]
        space: PathBuf,
    },
    /// Lift a rational form with E-action to an E-valued form
    Lift {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        hermitian: bool,
    },
    /// Clifford algebra tables and the even filtration
    Clifford {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_parser = ["table", "filtration"])]
        op: String,
    },
    /// Norm modules and morphisms
    Norm {
        #[arg(long)]
        module: PathBuf,
        #[arg(long)]
        morphism: Option<PathBuf>,
    },
    /// Representation-theoretic checks
    Rep {
        #[arg(long, value_parser = ["doubling", "fullness", "decompose"])]
        check: String,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Classify the Mumford-Tate Lie algebra of a period datum
    Classify {
        #[arg(long)]
        period: PathBuf,
    },
    /// The CM half-twist of a period datum
    #[command(name = "half-twist")]
    HalfTwist {
        #[arg(long)]
        period: PathBuf,
        #[arg(long)]
        cm: PathBuf,
    },
    /// The Kuga-Satake construction
    Ks {
        #[arg(long)]
        period: PathBuf,
        #[arg(long)]
        verify_u: bool,
        #[arg(long)]
        double: bool,
    },
    /// Rank-4 quaternionic checks
    So4 {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_parser = ["split", "delta", "cspin", "epsilon"])]
        check: String,
    },
    /// Run a property suite
    Check {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        sequential: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(report) => {
            emit(&cli, &report);
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn emit(cli: &Cli, report: &RunReport) {
    match cli.format {
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report.canonical_json()).unwrap()
            );
        }
        Format::Text => {
            print!("{}", report.text());
        }
    }
}

fn load(path: &PathBuf) -> Result<Value, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {}", path.display(), e))?;
    serde_json::from_str(&text).map_err(|e| format!("malformed JSON in {}: {}", path.display(), e))
}

fn report(command: &str, inputs: Value, checks: Vec<(String, bool, Value)>) -> RunReport {
    RunReport {
        command: command.to_string(),
        inputs,
        checks: checks
            .into_iter()
            .map(|(name, pass, witness)| ksw_core::suite::CheckResult {
                name,
                pass,
                witness,
            })
            .collect(),
        elapsed_ms: 0,
    }
}

fn dispatch(cli: &Cli) -> Result<RunReport, String> {
    match &cli.command {
        Command::Transfer { space } => {
            let v = load(space)?;
            let s = kjson::quadspace_from_json(&v).map_err(|e| e.to_string())?;
            let t = s.transfer();
            let checks = vec![
                (
                    "transfer/dim".into(),
                    t.dim == s.underlying_q_dim(),
                    json!({"dim": t.dim}),
                ),
                ("transfer/symmetric".into(), t.is_symmetric(), Value::Null),
                (
                    "transfer/nondegenerate".into(),
                    t.is_nondegenerate(),
                    Value::Null,
                ),
            ];
            Ok(report("transfer", kjson::qform_to_json(&t), checks))
        }
        Command::Lift { form, hermitian } => {
            let v = load(form)?;
            let f = kjson::qform_from_json(&v).map_err(|e| e.to_string())?;
            let lifted = if *hermitian {
                f.hermitian_lift().map_err(|e| e.to_string())?
            } else {
                f.bilinear_lift().map_err(|e| e.to_string())?
            };
            let round = lifted.transfer();
            let checks = vec![
                (
                    "lift/rank".into(),
                    lifted.underlying_q_dim() == f.dim,
                    json!({"rank": lifted.rank()}),
                ),
                ("lift/transfer-dim".into(), round.dim == f.dim, Value::Null),
            ];
            Ok(report("lift", kjson::quadspace_to_json(&lifted), checks))
        }
        Command::Clifford { space, op } => {
            let v = load(space)?;
            let s = kjson::quadspace_from_json(&v).map_err(|e| e.to_string())?;
            let alg =
                ksw_core::clifford::CliffordAlgebra::build(&s).map_err(|e| e.to_string())?;
            let mut checks = vec![
                (
                    "clifford/dim".into(),
                    alg.dim() == 1 << s.rank(),
                    json!({"dim": alg.dim()}),
                ),
                (
                    "clifford/even-dim".into(),
                    alg.even_dim() == 1 << (s.rank() - 1),
                    json!({"even_dim": alg.even_dim()}),
                ),
            ];
            match op.as_str() {
                "table" => {
                    let mut table = vec![];
                    for &a in alg.even_monomials() {
                        let mut row = vec![];
                        for &b in alg.even_monomials() {
                            let p = alg
                                .multiply(&alg.basis_element(a), &alg.basis_element(b))
                                .map_err(|e| e.to_string())?;
                            row.push(Value::Array(
                                p.coeffs().iter().map(kjson::element_to_json).collect(),
                            ));
                        }
                        table.push(Value::Array(row));
                    }
                    Ok(report("clifford table", json!({"even_table": table}), checks))
                }
                "filtration" => {
                    let filt = alg.filtration().map_err(|e| e.to_string())?;
                    let so = ksw_core::clifford::so_basis(&s);
                    let cert = filt.equivariance_certificate(&so);
                    checks.push((
                        "clifford/filtration-top-dim".into(),
                        filt.top_quotient_dim() == s.rank(),
                        json!({"dims": filt.level_dims}),
                    ));
                    checks.push((
                        "clifford/filtration-equivariance".into(),
                        cert.is_ok(),
                        match cert {
                            Ok(_) => Value::Null,
                            Err(e) => json!({"error": e.to_string()}),
                        },
                    ));
                    Ok(report(
                        "clifford filtration",
                        json!({"level_dims": filt.level_dims}),
                        checks,
                    ))
                }
                _ => unreachable!(),
            }
        }
        Command::Norm { module, morphism } => {
            let v = load(module)?;
            let m = emodule_from_json(&v)?;
            let n = NormModule::build(&m).map_err(|e| e.to_string())?;
            let want: usize = m
                .base()
                .factors()
                .iter()
                .zip(m.ranks())
                .map(|(f, r)| r.pow(f.degree() as u32))
                .product();
            let mut checks = vec![(
                "norm/dimension-law".into(),
                n.dim() == want,
                json!({"dim": n.dim(), "predicted": want}),
            )];
            if let Some(mp) = morphism {
                let mv = load(mp)?;
                let f = kjson::rat_matrix_from_json(&mv).map_err(|e| e.to_string())?;
                match n.norm_morphism(&f) {
                    Ok(nf) => checks.push((
                        "norm/morphism".into(),
                        true,
                        json!({"matrix": kjson::rat_matrix_to_json(&nf)}),
                    )),
                    Err(e) => checks.push(("norm/morphism".into(), false, json!(e.to_string()))),
                }
            }
            Ok(report("norm", json!({"carrier_dim": n.dim()}), checks))
        }
        Command::Rep { check, input } => {
            let v = load(input)?;
            match check.as_str() {
                "doubling" => {
                    let s = kjson::quadspace_from_json(&v).map_err(|e| e.to_string())?;
                    let rep = reptheory::doubling_check(&s).map_err(|e| e.to_string())?;
                    Ok(report(
                        "rep doubling",
                        json!({"lhs": rep.lhs_dim, "rhs": rep.rhs_dim, "copies": rep.copies}),
                        vec![
                            (
                                "rep/doubling-dims".into(),
                                rep.lhs_dim == rep.rhs_dim,
                                json!({"lhs": rep.lhs_dim, "rhs": rep.rhs_dim}),
                            ),
                            ("rep/doubling-iso".into(), rep.iso_found, Value::Null),
                        ],
                    ))
                }
                "fullness" => {
                    let Some(tuples) = v.get("tuples").and_then(|x| x.as_array()) else {
                        return Err("fullness input needs a tuples array".into());
                    };
                    let mut parsed = vec![];
                    for t in tuples {
                        let Some(pair) = t.as_array() else {
                            return Err("each tuple must be an array of 2x2 matrices".into());
                        };
                        let mats: Result<Vec<_>, _> =
                            pair.iter().map(kjson::rat_matrix_from_json).collect();
                        parsed.push(mats.map_err(|e| e.to_string())?);
                    }
                    let rep =
                        reptheory::product_sl2_fullness(&parsed).map_err(|e| e.to_string())?;
                    Ok(report(
                        "rep fullness",
                        json!({"commutant_dim": rep.commutant_dim, "h_dim": rep.h_dim}),
                        vec![(
                            "rep/fullness".into(),
                            rep.full,
                            json!({"commutant_dim": rep.commutant_dim,
                                   "expected": rep.expected_commutant_dim}),
                        )],
                    ))
                }
                "decompose" => {
                    let Some(basis) = v.get("basis").and_then(|x| x.as_array()) else {
                        return Err("decompose input needs a basis array".into());
                    };
                    let mats: Result<Vec<_>, _> =
                        basis.iter().map(kjson::rat_matrix_from_json).collect();
                    let mats = mats.map_err(|e| e.to_string())?;
                    let gram = kjson::rat_matrix_from_json(
                        v.get("form").ok_or("decompose input needs a form")?,
                    )
                    .map_err(|e| e.to_string())?;
                    let dim = gram.rows;
                    let rep =
                        reptheory::LieAlgebraRep::new(dim, mats).map_err(|e| e.to_string())?;
                    let form = ksw_core::quadspace::QForm::plain(gram);
                    let dec =
                        reptheory::isotypic_decompose(&rep, &form).map_err(|e| e.to_string())?;
                    let labels: Vec<String> = dec
                        .summands
                        .iter()
                        .map(|s| format!("{:?} (dim {})", s.kind, s.basis.len()))
                        .collect();
                    let total: usize = dec.summands.iter().map(|s| s.basis.len()).sum();
                    Ok(report(
                        "rep decompose",
                        json!({"summands": labels}),
                        vec![(
                            "rep/decompose-spans".into(),
                            total == dim,
                            json!({"total": total}),
                        )],
                    ))
                }
                _ => unreachable!(),
            }
        }
        Command::Classify { period } => {
            let v = load(period)?;
            let p = kjson::period_from_json(&v).map_err(|e| e.to_string())?;
            p.hodge_decomposition().map_err(|e| e.to_string())?;
            let z = hodge::zarhin_classify(&p).map_err(|e| e.to_string())?;
            let kind = match z.kind {
                hodge::MumfordTateKind::SpecialOrthogonal => "special_orthogonal",
                hodge::MumfordTateKind::Unitary => "unitary",
            };
            Ok(report(
                "classify",
                json!({
                    "kind": kind,
                    "end_field_min_poly": kjson::rat_vec_to_json(&z.end_field_poly.coeffs),
                    "mt_dim": z.mt_dim,
                    "transcendental_dim": z.trans_dim,
                }),
                vec![
                    (
                        "classify/dimension".into(),
                        z.mt_dim == z.predicted_dim,
                        json!({"mt": z.mt_dim, "predicted": z.predicted_dim}),
                    ),
                    (
                        "classify/weil-operator".into(),
                        z.weil_operator_inside,
                        Value::Null,
                    ),
                ],
            ))
        }
        Command::HalfTwist { period, cm } => {
            let v = load(period)?;
            let p = kjson::period_from_json(&v).map_err(|e| e.to_string())?;
            let cmv = load(cm)?;
            let field =
                kjson::field_from_json(cmv.get("cm_field").ok_or("cm input needs cm_field")?)
                    .map_err(|e| e.to_string())?;
            let mut cm_data = hodge::select_cm_type(&field).map_err(|e| e.to_string())?;
            if let Some(phi) = cmv.get("phi").and_then(|x| x.as_array()) {
                let idx: Option<Vec<usize>> =
                    phi.iter().map(|x| x.as_u64().map(|v| v as usize)).collect();
                cm_data.phi = idx.ok_or("phi must be an index array")?;
            }
            let tw = hodge::half_twist(&p, &cm_data).map_err(|e| e.to_string())?;
            Ok(report(
                "half-twist",
                json!({"dim": tw.dim_q, "h10": tw.h10.len(), "h01": tw.h01.len()}),
                vec![
                    (
                        "half-twist/balanced".into(),
                        tw.h10.len() == tw.dim_q / 2 && tw.h01.len() == tw.dim_q / 2,
                        json!({"h10": tw.h10.len()}),
                    ),
                    ("half-twist/purity".into(), tw.purity_certified, Value::Null),
                    (
                        "half-twist/polarization-transfer".into(),
                        tw.transfer_skew_ok,
                        Value::Null,
                    ),
                ],
            ))
        }
        Command::Ks {
            period,
            verify_u,
            double,
        } => {
            let v = load(period)?;
            let p = kjson::period_from_json(&v).map_err(|e| e.to_string())?;
            let ks = kugasatake::kuga_satake(&p).map_err(|e| e.to_string())?;
            let mut checks = vec![
                ("ks/even-dim".into(), true, json!({"dim": ks.dim})),
                (
                    "ks/weight-split".into(),
                    ks.h10.len() == ks.dim / 2,
                    json!({"h10": ks.h10.len(), "h01": ks.h01.len()}),
                ),
            ];
            if *verify_u {
                match kugasatake::verify_u(&ks) {
                    Ok(vr) => {
                        checks.push((
                            "ks/verify-u".into(),
                            vr.algebra_map && vr.gradings_match && vr.weight_additivity,
                            json!({
                                "end_d_dim": vr.end_d_dim,
                                "graded_end": format!("{:?}", vr.graded_dims_end),
                                "graded_ad": format!("{:?}", vr.graded_dims_ad),
                            }),
                        ));
                    }
                    Err(e) => checks.push(("ks/verify-u".into(), false, json!(e.to_string()))),
                }
            }
            if *double {
                match kugasatake::ks_double(&p) {
                    Ok(dr) => checks.push((
                        "ks/double".into(),
                        dr.doubling.iso_found,
                        json!({"sharp_rank": dr.sharp_rank, "lhs": dr.doubling.lhs_dim}),
                    )),
                    Err(e) => checks.push(("ks/double".into(), false, json!(e.to_string()))),
                }
            }
            Ok(report("ks", json!({"dim": ks.dim}), checks))
        }
        Command::So4 { space, check } => {
            let v = load(space)?;
            let s = kjson::quadspace_from_json(&v).map_err(|e| e.to_string())?;
            let model = so4quat::split_so4(&s).map_err(|e| e.to_string())?;
            match check.as_str() {
                "split" => Ok(report(
                    "so4 split",
                    Value::Null,
                    vec![(
                        "so4/ideals".into(),
                        model.verify_ideals().is_ok(),
                        Value::Null,
                    )],
                )),
                "delta" => {
                    let rep = so4quat::delta_algebras(&model).map_err(|e| e.to_string())?;
                    Ok(report(
                        "so4 delta",
                        json!({
                            "a": kjson::element_to_json(&rep.delta1.a),
                            "b": kjson::element_to_json(&rep.delta1.b),
                        }),
                        vec![
                            (
                                "so4/mutual-commutants".into(),
                                rep.mutual_commutants,
                                Value::Null,
                            ),
                            ("so4/nrd".into(), rep.nrd_matches_det, Value::Null),
                        ],
                    ))
                }
                "cspin" => {
                    let rep = so4quat::cspin4_check(&model).map_err(|e| e.to_string())?;
                    Ok(report(
                        "so4 cspin",
                        json!({"lie_dim": rep.lie_dim_each_side}),
                        vec![
                            (
                                "so4/cspin-brackets".into(),
                                rep.bracket_preserved,
                                Value::Null,
                            ),
                            ("so4/cspin-bijective".into(), rep.iso_bijective, Value::Null),
                        ],
                    ))
                }
                "epsilon" => {
                    let rep = so4quat::epsilon_check(&model).map_err(|e| e.to_string())?;
                    Ok(report(
                        "so4 epsilon",
                        json!({"d_dim": rep.d_dim, "nv_dim": rep.nv_dim}),
                        vec![
                            (
                                "so4/epsilon-bijective".into(),
                                rep.epsilon_bijective,
                                json!({"hom_dim": rep.hom_dim}),
                            ),
                            (
                                "so4/epsilon-d-linear".into(),
                                rep.epsilon_d_linear,
                                Value::Null,
                            ),
                            (
                                "so4/epsilon-equivariant".into(),
                                rep.lie_equivariant,
                                Value::Null,
                            ),
                        ],
                    ))
                }
                _ => unreachable!(),
            }
        }
        Command::Check {
            suite,
            seed,
            sequential,
        } => {
            let seed = seed
                .or_else(|| std::env::var("KSW_SEED").ok().and_then(|s| s.parse().ok()))
                .unwrap_or(0);
            let mode = if *sequential {
                Parallelism::Sequential
            } else {
                Parallelism::auto()
            };
            run_suite(suite, seed, mode)
        }
    }
}

fn emodule_from_json(v: &Value) -> Result<EModule, String> {
    let base = kjson::etale_from_json(v.get("base").ok_or("module needs base")?)
        .map_err(|e| e.to_string())?;
    let Some(mats) = v.get("action").and_then(|x| x.as_array()) else {
        return Err("module needs an action array (one matrix per Q-basis element)".into());
    };
    let matrices: Result<Vec<_>, _> = mats.iter().map(kjson::rat_matrix_from_json).collect();
    let matrices = matrices.map_err(|e| e.to_string())?;
    if matrices.len() != base.total_degree() {
        return Err("one action matrix per Q-basis element of the algebra required".into());
    }
    EModule::new(
        base.clone(),
        EAction {
            algebra: base,
            matrices,
        },
    )
    .map_err(|e| e.to_string())
}
