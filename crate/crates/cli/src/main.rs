use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use k3mirror::curveconfig::{
    gram_from_configuration, invariant_lattice, minimal_generators_of, rank_via_orbits, CurveConfiguration,
};
use k3mirror::invertible_poly::{atomic_decomposition, is_calabi_yau, parse_polynomial, transpose, weight_system};
use k3mirror::lattice::{
    direct_sum_lattice, discriminant_form, discriminant_group, mirror_check, named_lattice, overlattices, rescale,
    signature,
};
use k3mirror::quadform::{direct_sum, gauss_signature, is_isomorphic, negate, parse_form_expression};
use k3mirror::symmetry_groups::{
    dual_group, enumerate_intermediate, j_group, max_group, quotient_invariants, sl_subgroup, subgroup_generated,
    DiagonalSymmetry, SymmetryGroup,
};
use k3mirror::verify::{default_data_dir, run_all, RunOptions};
use k3mirror::{Int, Result};

#[derive(Parser)]
#[command(name = "k3mirror", version, about = "Exact checks for BHK mirror pairs of K3 surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConfigOp {
    Rank,
    Lattice,
    Form,
    MinimalGens,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolyOp {
    Parse,
    Transpose,
    Weights,
    Decompose,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LatticeOp {
    Signature,
    DiscGroup,
    DiscForm,
    Overlattices,
}

#[derive(Subcommand)]
enum Command {
    /// Exponent matrix, weights, atomic types and transpose of a polynomial.
    Poly {
        polynomial: String,
        /// Print only one item instead of the full summary.
        #[arg(long, value_enum)]
        op: Option<PolyOp>,
    },
    /// G = <J, generators>: quotient type, sandwich and dual group.
    Group {
        polynomial: String,
        /// Extra generators such as "1/4,3/4,0,0".
        #[arg(long = "gen")]
        generators: Vec<String>,
        /// List every J <= G <= SL instead.
        #[arg(long)]
        enumerate: bool,
        /// Print the generators of G_max.
        #[arg(long)]
        max: bool,
        /// Print the generators of J.
        #[arg(long)]
        j: bool,
        /// Print the generators of SL.
        #[arg(long)]
        sl: bool,
        /// Print the generators of the dual group.
        #[arg(long)]
        dual: bool,
        /// Print the invariant factors of G/J.
        #[arg(long)]
        quotient: bool,
    },
    /// Parse a form expression such as "v+w_{2,2}^1+w_{2,2}^5".
    Form {
        #[arg(allow_hyphen_values = true)]
        expression: String,
        /// Add further summands.
        #[arg(long, allow_hyphen_values = true)]
        sum: Vec<String>,
        /// Replace the form by its negative.
        #[arg(long)]
        negate: bool,
        #[arg(long, allow_hyphen_values = true)]
        iso: Option<String>,
    },
    /// Named lattice such as "U+D_5+D_9".
    Lattice {
        #[arg(long)]
        name: String,
        /// Multiply the Gram matrix by this factor.
        #[arg(long, allow_hyphen_values = true)]
        rescale: Option<i64>,
        /// Further orthogonal summands.
        #[arg(long)]
        sum: Vec<String>,
        #[arg(long, value_enum)]
        op: Option<LatticeOp>,
        /// Test the mirror condition against a second lattice.
        #[arg(long)]
        mirror: Option<String>,
    },
    /// Invariant lattice of a curve configuration file.
    Config {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value = "sigma")]
        automorphism: String,
        #[arg(long, value_enum, default_value = "lattice")]
        op: ConfigOp,
    },
    /// Run the verification harness on a data directory.
    Verify {
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        line: Option<u32>,
        /// Defaults to $K3MIRROR_DATA, then ./data.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        report: ReportFormat,
        /// Print passing checks too.
        #[arg(long)]
        verbose: bool,
    },
}

fn group_name(f: &[u64]) -> String {
    if f.is_empty() {
        "trivial".into()
    } else {
        f.iter().map(|x| format!("Z/{x}")).collect::<Vec<_>>().join(" x ")
    }
}

fn gens_of(g: &SymmetryGroup) -> String {
    g.generators().iter().map(|x| format!("({x})")).collect::<Vec<_>>().join(" ")
}

fn poly(text: &str, op: Option<PolyOp>) -> Result<()> {
    let p = parse_polynomial(text)?;
    let a = p.exponent_matrix();
    let w = weight_system(&a)?;
    let t = transpose(&p);
    let blocks: Vec<String> = atomic_decomposition(&a)?.iter().map(|b| b.describe(&p.variables)).collect();
    match op {
        Some(PolyOp::Parse) => {
            for r in a.rows() {
                println!("{r:?}");
            }
        }
        Some(PolyOp::Transpose) => println!("{t}"),
        Some(PolyOp::Weights) => println!("{w}"),
        Some(PolyOp::Decompose) => println!("{}", blocks.join(" + ")),
        None => {
            println!("polynomial: {p}");
            println!("exponent matrix:");
            for r in a.rows() {
                println!("  {r:?}");
            }
            println!("weights: {w}  calabi-yau: {}", is_calabi_yau(&w));
            println!("atomic types: {}", blocks.join(" + "));
            println!("transpose: {t}  weights {}", weight_system(&t.exponent_matrix())?);
            let gmax = max_group(&a);
            println!("|G_max| = {}, |SL| = {}, |J| = {}", gmax.order(), sl_subgroup(&gmax).order(), j_group(&w).order());
        }
    }
    Ok(())
}

struct GroupFlags {
    max: bool,
    j: bool,
    sl: bool,
    dual: bool,
    quotient: bool,
}

fn group(text: &str, gens: &[String], enumerate: bool, show: GroupFlags) -> Result<()> {
    let p = parse_polynomial(text)?;
    let a = p.exponent_matrix();
    let w = weight_system(&a)?;
    let gmax = max_group(&a);
    let j = subgroup_generated(&gmax, j_group(&w).generators())?;
    let sl = sl_subgroup(&gmax);
    if enumerate {
        for g in enumerate_intermediate(&j, &sl)? {
            let gt = dual_group(&g, &a)?;
            println!("G/J = {:<12} |G| = {:<4} dual order {:<4} gens {}", group_name(&quotient_invariants(&g, &j)?), g.order(), gt.order(), gens_of(&g));
        }
        return Ok(());
    }
    let mut all = j.generators().to_vec();
    for g in gens {
        all.push(g.parse::<DiagonalSymmetry>()?);
    }
    let g = subgroup_generated(&gmax, &all)?;
    let gt = dual_group(&g, &a)?;
    if show.max || show.j || show.sl || show.dual || show.quotient {
        if show.max {
            println!("G_max: order {}  gens {}", gmax.order(), gens_of(&gmax));
        }
        if show.j {
            println!("J: order {}  gens {}", j.order(), gens_of(&j));
        }
        if show.sl {
            println!("SL: order {}  gens {}", sl.order(), gens_of(&sl));
        }
        if show.dual {
            println!("G^T: order {}  gens {}", gt.order(), gens_of(&gt));
        }
        if show.quotient {
            println!("G/J = {}", group_name(&quotient_invariants(&g, &j)?));
        }
        return Ok(());
    }
    println!("G/J = {}  |G| = {}", group_name(&quotient_invariants(&g, &j)?), g.order());
    println!("J <= G <= SL: {}", j.is_subgroup_of(&g) && g.is_subgroup_of(&sl));
    let t = transpose(&p);
    let tw = weight_system(&t.exponent_matrix())?;
    let jt = subgroup_generated(&max_group(&t.exponent_matrix()), j_group(&tw).generators())?;
    println!("dual: G^T/J = {}  |G^T| = {}  gens {}", group_name(&quotient_invariants(&gt, &jt)?), gt.order(), gens_of(&gt));
    Ok(())
}

fn form(expr: &str, sums: &[String], neg: bool, iso: Option<&str>) -> Result<()> {
    let mut q = parse_form_expression(expr)?;
    for s in sums {
        q = direct_sum(&q, &parse_form_expression(s)?);
    }
    if neg {
        q = negate(&q);
    }
    println!("form: {q}");
    println!("order {}  length {}  gauss signature {}", q.order(), q.length(), gauss_signature(&q)?);
    if let Some(other) = iso {
        let r = parse_form_expression(other)?;
        println!("isomorphic to {other}: {}", is_isomorphic(&q, &r));
    }
    Ok(())
}

fn lattice(name: &str, rescale_by: Option<i64>, sums: &[String], op: Option<LatticeOp>, mirror: Option<&str>) -> Result<()> {
    let mut l = named_lattice::<Int>(name)?;
    if let Some(n) = rescale_by {
        l = rescale(&l, n)?;
    }
    for s in sums {
        l = direct_sum_lattice(&l, &named_lattice::<Int>(s)?);
    }
    match op {
        Some(LatticeOp::Signature) => println!("{}", signature(&l)),
        Some(LatticeOp::DiscGroup) => println!("{}", group_name(&discriminant_group(&l).orders())),
        Some(LatticeOp::DiscForm) => println!("{}", discriminant_form(&l)?),
        Some(LatticeOp::Overlattices) => {
            for o in overlattices(&l)? {
                println!("det {}  even {}  gram {:?}", o.det(), o.is_even(), o.gram().to_rows());
            }
        }
        None => {
            let q = discriminant_form(&l)?;
            println!("rank {}  signature {}  even {}", l.rank(), signature(&l), l.is_even());
            println!("discriminant form: {q}");
            println!("proper even overlattices: {}", overlattices(&l)?.len() - 1);
        }
    }
    if let Some(m) = mirror {
        let n = named_lattice::<Int>(m)?;
        println!("mirror of {m}: {}", mirror_check(l.rank(), &discriminant_form(&l)?, n.rank(), &discriminant_form(&n)?));
    }
    Ok(())
}

fn config(file: &PathBuf, name: &str, op: ConfigOp) -> Result<()> {
    let cfg = CurveConfiguration::load(file)?;
    let a = cfg
        .automorphism(name)
        .ok_or_else(|| k3mirror::Error::InvalidConfiguration(format!("no automorphism {name}")))?
        .clone();
    cfg.check_automorphism(&a)?;
    let inv = invariant_lattice(&cfg, &a)?;
    match op {
        ConfigOp::Rank => println!("{}", rank_via_orbits(&cfg, &a)),
        ConfigOp::Lattice => {
            println!("classes: {:?}", inv.classes.iter().map(|c| c.nodes.clone()).collect::<Vec<_>>());
            println!("rank {}  signature {}", inv.span.rank(), signature(&inv.span.lattice));
            println!("gram: {:?}", inv.span.lattice.gram().to_rows());
        }
        ConfigOp::Form => {
            let q = discriminant_form(&inv.span.lattice)?;
            println!("{q}  (gauss signature {})", gauss_signature(&q)?);
        }
        ConfigOp::MinimalGens => {
            let span = gram_from_configuration(&cfg, &inv.classes)?;
            let idx: Vec<usize> = minimal_generators_of(&span).iter().map(|i| i + 1).collect();
            println!("{idx:?}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Poly { polynomial, op } => poly(&polynomial, op),
        Command::Group { polynomial, generators, enumerate, max, j, sl, dual, quotient } => {
            group(&polynomial, &generators, enumerate, GroupFlags { max, j, sl, dual, quotient })
        }
        Command::Form { expression, sum, negate, iso } => form(&expression, &sum, negate, iso.as_deref()),
        Command::Lattice { name, rescale, sum, op, mirror } => {
            lattice(&name, rescale, &sum, op, mirror.as_deref())
        }
        Command::Config { file, automorphism, op } => config(&file, &automorphism, op),
        Command::Verify { order, line, data, report, verbose } => {
            let dir = data.unwrap_or_else(default_data_dir);
            let opts = RunOptions { orders: order.map(|n| vec![n]), line };
            match run_all(&dir, &opts) {
                Ok(rep) => {
                    match report {
                        ReportFormat::Text => print!("{}", rep.to_text(verbose)),
                        ReportFormat::Json => println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes")),
                    }
                    return if rep.has_failures() { ExitCode::from(1) } else { ExitCode::SUCCESS };
                }
                Err(e) => Err(e),
            }
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
