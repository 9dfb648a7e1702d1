//! periodlab command-line front end: polygons, admissibility, HN
//! filtrations, Drinfeld membership, Kostant combinatorics, cohomology
//! tables, calibration, Steinberg dimensions, fundamental-complex checks,
//! and duality reports. JSON or TSV output, deterministic bytes.

use clap::{Args, Parser, Subcommand};
use periodlab::exactnum::{parse_ratfunc, parse_rational, rational_string, Q};
use periodlab::fundcomplex::{
    assemble_fundamental_complex, build_finite_flag_model, e1_page, homology_dims, RootSubset,
    StalkSelector,
};
use periodlab::isocrystal::{
    drinfeld_membership, hn_filtration, hn_invariants, is_weakly_admissible, FilteredIsocrystal,
    SearchConfig, Verdict,
};
use periodlab::periodcoh::{
    calibrate_degree_function, cohomology_table, duality_report, steinberg_dimension,
    CohomologyTable, DegreeFunction, PeriodDatum,
};
use periodlab::polygons::polygon_compare;
use periodlab::rootdata::{kostant_representatives, weyl_group, RootDatum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "periodlab", version, about = "Exact combinatorics of p-adic period domains for GL_n")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Emit JSON (the default for most subcommands).
    #[arg(long, global = true)]
    json: bool,
    /// Emit tab-separated rows.
    #[arg(long, global = true, conflicts_with = "json")]
    tsv: bool,
    /// Height bound for brute-force subspace search
    /// (default 3; PERIODLAB_HEIGHT overrides the default).
    #[arg(long, global = true)]
    height: Option<u32>,
    /// Partition the subspace enumeration across threads.
    #[arg(long, global = true)]
    parallel: bool,
}

/// A filtered-isocrystal input, from a file or inline JSON.
#[derive(Args)]
struct DatumInput {
    /// Path to a JSON datum.
    #[arg(long, group = "input", required = true)]
    file: Option<std::path::PathBuf>,
    /// Inline JSON datum.
    #[arg(long, group = "input")]
    inline: Option<String>,
}

impl DatumInput {
    fn value(&self) -> periodlab::Result<serde_json::Value> {
        let text = match (&self.file, &self.inline) {
            (Some(path), _) => std::fs::read_to_string(path)
                .map_err(|e| periodlab::Error::Parse(format!("cannot read {}: {e}", path.display())))?,
            (None, Some(s)) => s.clone(),
            (None, None) => unreachable!("clap group requires one"),
        };
        serde_json::from_str(&text).map_err(|e| periodlab::Error::Parse(format!("invalid JSON: {e}")))
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Newton and Hodge polygons of a filtered isocrystal, compared.
    Polygon(DatumInput),
    /// Weak admissibility verdict at the height bound.
    Admissible(DatumInput),
    /// Harder-Narasimhan filtration report.
    Hn(DatumInput),
    /// Drinfeld-space membership of homogeneous coordinates over Q(t...).
    Drinfeld {
        /// Comma-separated coordinates, e.g. "1,t,t^2".
        #[arg(long)]
        coords: String,
    },
    /// Kostant representatives of W/Stab(mu).
    Kostant {
        #[arg(long)]
        n: usize,
        /// Comma-separated dominant cocharacter, e.g. "2,-1,-1".
        #[arg(long)]
        mu: String,
    },
    /// Cohomology summand table of a period datum.
    Cohomology {
        #[command(flatten)]
        input: DatumInput,
        /// Override the calibrated degree rule with "a,b,c".
        #[arg(long)]
        rule: Option<String>,
    },
    /// Calibrate the degree rule against the Drinfeld data GL_2..GL_n.
    Calibrate {
        #[arg(long, default_value_t = 3)]
        n_max: usize,
    },
    /// Dimension of the generalized Steinberg module v_{P_I} over F_q.
    SteinbergDim {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        /// Comma-separated simple-root indices, e.g. "1,2"; empty for I = {}.
        #[arg(long, default_value = "")]
        i: String,
    },
    /// Assemble the fundamental complex on a finite flag model and report
    /// dimensions, homology, and the E_1 page.
    ComplexCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        /// Use the one-point (contractible) selector instead of the full one.
        #[arg(long)]
        singleton: bool,
        #[arg(long, default_value_t = 1)]
        coeff_dim: usize,
    },
    /// Duality bookkeeping for the cohomology table of a period datum.
    Duality {
        #[command(flatten)]
        input: DatumInput,
        /// Finite-field surrogate: also compare Steinberg dimensions.
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        rule: Option<String>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error[{}] {e}", e.code());
        std::process::exit(1);
    }
}

fn search_config(cli: &Cli) -> periodlab::Result<SearchConfig> {
    let height = match cli.height {
        Some(h) => h,
        None => match std::env::var("PERIODLAB_HEIGHT") {
            Ok(v) => v
                .parse()
                .map_err(|_| periodlab::Error::Parse(format!("PERIODLAB_HEIGHT={v} is not a number")))?,
            Err(_) => 3,
        },
    };
    let mut cfg = SearchConfig::new(height)?;
    cfg.parallel = cli.parallel;
    Ok(cfg)
}

fn parse_q_list(s: &str) -> periodlab::Result<Vec<Q>> {
    s.split(',').map(|t| parse_rational(t.trim())).collect()
}

fn parse_i_arg(s: &str) -> periodlab::Result<RootSubset> {
    if s.trim().is_empty() {
        return Ok(RootSubset::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| periodlab::Error::Parse(format!("bad root index '{t}'")))
        })
        .collect()
}

fn parse_rule(s: &str) -> periodlab::Result<DegreeFunction> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| periodlab::Error::Parse(format!("bad rule coefficient '{t}'")))
        })
        .collect::<periodlab::Result<_>>()?;
    match parts[..] {
        [a, b, c] => Ok(DegreeFunction { a, b, c }),
        _ => Err(periodlab::Error::Parse("rule must be three integers a,b,c".into())),
    }
}

fn basis_json(basis: &[Vec<Q>]) -> serde_json::Value {
    json!(basis
        .iter()
        .map(|row| row.iter().map(rational_string).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn emit(value: serde_json::Value, tsv_lines: Vec<String>, tsv: bool) {
    if tsv {
        for line in tsv_lines {
            println!("{line}");
        }
    } else {
        println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
    }
}

fn table_for(input: &DatumInput, rule: &Option<String>) -> periodlab::Result<CohomologyTable> {
    let pd = PeriodDatum::from_json(&input.value()?)?;
    let degf = match rule {
        Some(r) => parse_rule(r)?,
        None => calibrate_degree_function(3)?,
    };
    cohomology_table(&pd, &degf)
}

fn run(cli: &Cli) -> periodlab::Result<()> {
    match &cli.cmd {
        Cmd::Polygon(input) => {
            let fi = FilteredIsocrystal::from_json(&input.value()?)?;
            let newton = fi.newton_polygon();
            let hodge = fi.hodge_polygon();
            let (above, endpoints) = polygon_compare(&newton, &hodge)?;
            emit(
                json!({
                    "newton": newton.to_json(),
                    "hodge": hodge.to_json(),
                    "newton_on_or_above_hodge": above,
                    "endpoints_equal": endpoints,
                }),
                vec![
                    format!("newton\t{}", newton.to_json()),
                    format!("hodge\t{}", hodge.to_json()),
                    format!("newton_on_or_above_hodge\t{above}"),
                    format!("endpoints_equal\t{endpoints}"),
                ],
                cli.tsv,
            );
        }
        Cmd::Admissible(input) => {
            let fi = FilteredIsocrystal::from_json(&input.value()?)?;
            let cfg = search_config(cli)?;
            let (value, lines) = match is_weakly_admissible(&fi, &cfg)? {
                Verdict::Admissible { height_bound } => (
                    json!({"verdict": "admissible", "height_bound": height_bound}),
                    vec![format!("admissible\theight={height_bound}")],
                ),
                Verdict::NonzeroDegree { degree, height_bound } => (
                    json!({
                        "verdict": "not_admissible",
                        "reason": "nonzero_total_degree",
                        "degree": rational_string(&degree),
                        "height_bound": height_bound,
                    }),
                    vec![format!("not_admissible\tnonzero_total_degree\t{}", rational_string(&degree))],
                ),
                Verdict::ViolatedBy { subspace, degree, height_bound } => (
                    json!({
                        "verdict": "not_admissible",
                        "violated_by": basis_json(&subspace),
                        "degree": rational_string(&degree),
                        "height_bound": height_bound,
                    }),
                    vec![format!(
                        "not_admissible\tviolated_by\t{}\tdegree={}",
                        basis_json(&subspace),
                        rational_string(&degree)
                    )],
                ),
            };
            emit(value, lines, cli.tsv);
        }
        Cmd::Hn(input) => {
            let fi = FilteredIsocrystal::from_json(&input.value()?)?;
            let cfg = search_config(cli)?;
            let (rank, degree, slope) = hn_invariants(&fi);
            let report = hn_filtration(&fi, &cfg)?;
            let pieces: Vec<serde_json::Value> = report
                .pieces
                .iter()
                .map(|p| {
                    json!({
                        "subspace": basis_json(&p.subspace_basis),
                        "rank": p.rank,
                        "degree": rational_string(&p.degree),
                        "slope": rational_string(&p.slope),
                    })
                })
                .collect();
            let lines = report
                .pieces
                .iter()
                .map(|p| {
                    format!(
                        "{}\t{}\t{}\t{}",
                        p.rank,
                        rational_string(&p.degree),
                        rational_string(&p.slope),
                        basis_json(&p.subspace_basis)
                    )
                })
                .collect();
            emit(
                json!({
                    "rank": rank,
                    "degree": rational_string(&degree),
                    "slope": rational_string(&slope),
                    "semistable": report.is_semistable(),
                    "pieces": pieces,
                    "height_bound": report.height_bound,
                }),
                lines,
                cli.tsv,
            );
        }
        Cmd::Drinfeld { coords } => {
            let parsed: Vec<_> = coords
                .split(',')
                .map(|t| parse_ratfunc(t.trim()))
                .collect::<periodlab::Result<_>>()?;
            let member = drinfeld_membership(&parsed)?;
            emit(json!({"member": member}), vec![format!("{member}")], cli.tsv);
        }
        Cmd::Kostant { n, mu } => {
            let rd = RootDatum::new(*n)?;
            let mu = parse_q_list(mu)?;
            let reps = kostant_representatives(&rd, &mu)?;
            let stab = weyl_group(&rd)?.len() / reps.len();
            let rows: Vec<serde_json::Value> = reps
                .iter()
                .map(|w| json!({"permutation": w.one_line(), "length": w.length}))
                .collect();
            let lines = reps.iter().map(|w| format!("{}\t{}", w.one_line(), w.length)).collect();
            emit(
                json!({"count": reps.len(), "stabilizer_order": stab, "representatives": rows}),
                lines,
                !cli.json, // TSV by default
            );
        }
        Cmd::Cohomology { input, rule } => {
            let table = table_for(input, rule)?;
            let rows: Vec<serde_json::Value> = table
                .summands
                .iter()
                .map(|s| {
                    json!({
                        "degree": s.degree,
                        "i_set": s.i_set.iter().copied().collect::<Vec<_>>(),
                        "orbit_size": s.orbit_size,
                        "l": s.l_orbit,
                        "rho_twist": s.rho_twist,
                        "overall_twist": s.overall_twist,
                        "description": s.description,
                    })
                })
                .collect();
            let mut lines = vec![
                format!("# d = {}; caveats: {}", table.d, table.caveats.join(", ")),
                "degree\tI_set\torbit_size\tl\trho_twist\toverall_twist\tdescription".into(),
            ];
            lines.extend(table.summands.iter().map(|s| {
                format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    s.degree,
                    s.i_set.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","),
                    s.orbit_size,
                    s.l_orbit,
                    s.rho_twist,
                    s.overall_twist,
                    s.description
                )
            }));
            emit(
                json!({"d": table.d, "caveats": table.caveats, "summands": rows}),
                lines,
                !cli.json, // TSV by default
            );
        }
        Cmd::Calibrate { n_max } => {
            let rule = calibrate_degree_function(*n_max)?;
            emit(
                json!({"a": rule.a, "b": rule.b, "c": rule.c, "tag": rule.tag()}),
                vec![rule.tag()],
                cli.tsv,
            );
        }
        Cmd::SteinbergDim { n, q, i } => {
            let i_set = parse_i_arg(i)?;
            let dim = steinberg_dimension(*n, *q, &i_set)?;
            emit(
                json!({
                    "n": n,
                    "q": q,
                    "i_set": i_set.iter().copied().collect::<Vec<_>>(),
                    "dim": dim,
                }),
                vec![format!("{dim}")],
                cli.tsv,
            );
        }
        Cmd::ComplexCheck { n, q, singleton, coeff_dim } => {
            let m = build_finite_flag_model(*n, *q)?;
            let sel = if *singleton {
                StalkSelector::singleton(&m)
            } else {
                StalkSelector::full(&m)
            };
            let c = assemble_fundamental_complex(&m, &sel, *coeff_dim)?;
            let homology = homology_dims(&c)?;
            let exact_except: Vec<usize> = homology
                .iter()
                .enumerate()
                .filter(|(_, &h)| h != 0)
                .map(|(k, _)| k)
                .collect();
            let page = e1_page(&m, &sel);
            emit(
                json!({
                    "dims": c.dims,
                    "homology": homology,
                    "exact_except": exact_except,
                    "e1_page": page,
                }),
                vec![
                    format!("dims\t{:?}", c.dims),
                    format!("homology\t{homology:?}"),
                    format!("exact_except\t{exact_except:?}"),
                    format!("e1_page\t{page:?}"),
                ],
                cli.tsv,
            );
        }
        Cmd::Duality { input, q, rule } => {
            let table = table_for(input, rule)?;
            let rep = duality_report(&table, *q)?;
            let pairs: Vec<serde_json::Value> = rep
                .pairs
                .iter()
                .map(|p| {
                    json!({
                        "degree": p.degree,
                        "dual_degree": p.dual_degree,
                        "count": p.count,
                        "dual_count": p.dual_count,
                        "from_compact_support": p.from_compact_support,
                        "i_set": p.i_set.iter().copied().collect::<Vec<_>>(),
                        "steinberg_dim": p.steinberg_dim,
                        "dual_steinberg_dim": p.dual_steinberg_dim,
                    })
                })
                .collect();
            let lines = rep
                .pairs
                .iter()
                .map(|p| {
                    format!(
                        "{}\t{}\t{}\t{}\t{}\t{:?}\t{:?}",
                        p.degree,
                        p.dual_degree,
                        p.count,
                        p.dual_count,
                        p.from_compact_support,
                        p.steinberg_dim,
                        p.dual_steinberg_dim
                    )
                })
                .collect();
            emit(
                json!({
                    "d": rep.d,
                    "involution_consistent": rep.involution_consistent,
                    "mismatches": rep.mismatches,
                    "euler_characteristic": rep.euler_characteristic,
                    "pairs": pairs,
                }),
                lines,
                cli.tsv,
            );
        }
    }
    Ok(())
}
