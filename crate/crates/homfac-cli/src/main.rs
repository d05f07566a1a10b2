//! Command-line surface over the factorisation library.
//!
//! Exit codes: 0 success/verified, 1 verification failure, 2 invalid
//! parameters, 3 parse error, 4 cap exceeded. All output is deterministic
//! for identical invocations.

use clap::{Parser, Subcommand, ValueEnum};
use homfac::factorisation::{self, Factorisation};
use homfac::tables::BaseGroup;
use homfac::{designs, formats, graphs, iso, onedim, perm, Error};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

const SCHEMA: &str = "homfac/1";

#[derive(Parser)]
#[command(name = "homfac", version, about = "homogeneous factorisations of complete graphs")]
struct Cli {
    /// Cap on materialized group elements.
    #[arg(long, default_value_t = perm::DEFAULT_CLOSURE_CAP, global = true)]
    closure_cap: usize,
    /// Vertex cap for canonical labeling.
    #[arg(long, default_value_t = iso::DEFAULT_ISO_CAP, global = true)]
    iso_cap: usize,
    /// Output format for the primary report.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Output path for the produced artifact file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build a named graph and print its basic data.
    Construct {
        #[command(subcommand)]
        kind: ConstructKind,
    },
    /// Enumerate the one-dimensional solution rows for a field.
    Enumerate {
        p: u32,
        r: u32,
        /// Also realize each row as a factorisation file with its report.
        #[arg(long)]
        realize: bool,
    },
    /// Verify a factorisation file, with optional group generator files.
    Verify {
        factorisation: PathBuf,
        m_gens: Option<PathBuf>,
        g_gens: Option<PathBuf>,
    },
    /// Isomorphism test between two graph files.
    Iso { g1: PathBuf, g2: PathBuf },
    /// Automorphism group of a graph file.
    Aut { g: PathBuf },
    /// Extract the 2-design of a factorisation file.
    Design { factorisation: PathBuf },
    /// Reproduce the two-dimensional table rows for (q, base).
    Tables {
        q: u32,
        /// Base group: q8, sl23 or sl25.
        base: String,
        /// Add automorphism group orders (q <= 11).
        #[arg(long)]
        aut: bool,
    },
}

#[derive(Subcommand)]
enum ConstructKind {
    Gpaley { p: u32, r: u32, k: u32 },
    Tgpaley { p: u32, r: u32, h: u32 },
    Hamming { a: usize, b: usize },
    Psl28Factor,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter(_) => ExitCode::from(2),
                Error::Parse(_) => ExitCode::from(3),
                Error::CapExceeded(_) => ExitCode::from(4),
            }
        }
    }
}

fn run(cli: &Cli) -> homfac::Result<ExitCode> {
    match &cli.command {
        Command::Construct { kind } => construct(cli, kind),
        Command::Enumerate { p, r, realize } => enumerate(cli, *p, *r, *realize),
        Command::Verify {
            factorisation,
            m_gens,
            g_gens,
        } => verify(cli, factorisation, m_gens.as_ref(), g_gens.as_ref()),
        Command::Iso { g1, g2 } => iso_cmd(cli, g1, g2),
        Command::Aut { g } => aut_cmd(cli, g),
        Command::Design { factorisation } => design_cmd(cli, factorisation),
        Command::Tables { q, base, aut } => tables_cmd(cli, *q, base, *aut),
    }
}

fn read_file(path: &PathBuf) -> homfac::Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::parse(format!("{}: {e}", path.display())))
}

fn write_out(cli: &Cli, content: &str) -> homfac::Result<()> {
    if let Some(path) = &cli.out {
        std::fs::write(path, content).map_err(|e| Error::parse(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn construct(cli: &Cli, kind: &ConstructKind) -> homfac::Result<ExitCode> {
    let g = match kind {
        ConstructKind::Gpaley { p, r, k } => graphs::gpaley(*p, *r, *k)?,
        ConstructKind::Tgpaley { p, r, h } => graphs::tgpaley(*p, *r, *h)?,
        ConstructKind::Hamming { a, b } => graphs::hamming(*a, *b)?,
        ConstructKind::Psl28Factor => {
            let psl = perm::psl2_8_degree28()?;
            let rep = psl.orbitals()[0].representative;
            graphs::orbital_graph(&psl, rep)?
        }
    };
    write_out(cli, &formats::write_graph(&g))?;
    let valency = g.valency();
    let components = g.components().len();
    match cli.format {
        Format::Json => println!(
            "{}",
            json!({
                "schema": SCHEMA,
                "n": g.n(),
                "m": g.edge_count(),
                "valency": valency,
                "connected": g.is_connected(),
                "components": components,
            })
        ),
        Format::Text => println!(
            "n={} m={} valency={} connected={} components={}",
            g.n(),
            g.edge_count(),
            valency.map_or("irregular".into(), |v| v.to_string()),
            g.is_connected(),
            components
        ),
    }
    Ok(ExitCode::SUCCESS)
}

fn enumerate(cli: &Cli, p: u32, r: u32, realize: bool) -> homfac::Result<ExitCode> {
    let rows = onedim::enumerate_solutions(p, r)?;
    let json_rows: Vec<serde_json::Value> = rows.iter().map(|row| row.to_json()).collect();
    println!("{}", json!({ "schema": SCHEMA, "rows": json_rows }));
    if realize {
        let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).map_err(|e| Error::parse(e.to_string()))?;
        for (i, row) in rows.iter().enumerate() {
            let f = factorisation::generic_construction(row)?;
            let report = factorisation::verify_factorisation(&f)?;
            std::fs::write(dir.join(format!("row{i}.fac")), formats::write_factorisation(&f))
                .map_err(|e| Error::parse(e.to_string()))?;
            std::fs::write(
                dir.join(format!("row{i}.report.json")),
                format!("{}\n", json!({ "schema": SCHEMA, "report": report.to_json() })),
            )
            .map_err(|e| Error::parse(e.to_string()))?;
            if !report.all_passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(
    _cli: &Cli,
    fac_path: &PathBuf,
    m_gens: Option<&PathBuf>,
    g_gens: Option<&PathBuf>,
) -> homfac::Result<ExitCode> {
    let mut f: Factorisation = formats::read_factorisation(&read_file(fac_path)?)?;
    if let Some(path) = m_gens {
        f.m_group = Some(formats::read_perm_group(&read_file(path)?)?);
    }
    if let Some(path) = g_gens {
        f.g_group = Some(formats::read_perm_group(&read_file(path)?)?);
    }
    let report = factorisation::verify_factorisation(&f)?;
    println!("{}", json!({ "schema": SCHEMA, "report": report.to_json() }));
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn iso_cmd(cli: &Cli, p1: &PathBuf, p2: &PathBuf) -> homfac::Result<ExitCode> {
    let g1 = formats::read_graph(&read_file(p1)?)?;
    let g2 = formats::read_graph(&read_file(p2)?)?;
    let witness = iso::are_isomorphic_capped(&g1, &g2, cli.iso_cap)?;
    match cli.format {
        Format::Json => println!(
            "{}",
            json!({
                "schema": SCHEMA,
                "isomorphic": witness.is_some(),
                "witness": witness.as_ref().map(|w| w.images().to_vec()),
            })
        ),
        Format::Text => match &witness {
            Some(w) => println!("isomorphic witness={:?}", w.images()),
            None => println!("not isomorphic"),
        },
    }
    Ok(ExitCode::SUCCESS)
}

fn aut_cmd(cli: &Cli, path: &PathBuf) -> homfac::Result<ExitCode> {
    let g = formats::read_graph(&read_file(path)?)?;
    let aut = iso::automorphism_group_capped(&g, iso::AUT_VERTEX_CAP, cli.closure_cap)?;
    let order = aut.order(cli.closure_cap)?;
    let gens: Vec<Vec<u16>> = aut.generators().iter().map(|p| p.images().to_vec()).collect();
    match cli.format {
        Format::Json => println!(
            "{}",
            json!({ "schema": SCHEMA, "order": order, "generators": gens })
        ),
        Format::Text => {
            println!("order={order}");
            for g in gens {
                println!("gen {g:?}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn design_cmd(cli: &Cli, path: &PathBuf) -> homfac::Result<ExitCode> {
    let f = formats::read_factorisation(&read_file(path)?)?;
    let d = designs::extract_design(&f)?;
    write_out(cli, &formats::write_design(&d))?;
    println!("{}", json!({ "schema": SCHEMA, "design": d.to_json() }));
    Ok(ExitCode::SUCCESS)
}

fn tables_cmd(cli: &Cli, q: u32, base: &str, with_aut: bool) -> homfac::Result<ExitCode> {
    let base = BaseGroup::parse(base)?;
    let rows = homfac::tables::twodim_table_rows(q, base)?;
    let mut out = Vec::new();
    for row in &rows {
        let mut value = json!({
            "m0_order": row.m0_order,
            "k": row.k,
            "s_size": row.s_size,
        });
        if with_aut {
            if q > 11 {
                return Err(Error::cap("automorphism orders only for q <= 11".to_string()));
            }
            let aut = iso::automorphism_group_capped(&row.graph, iso::AUT_VERTEX_CAP, cli.closure_cap)?;
            value["aut_order"] = json!(aut.order(cli.closure_cap)?);
        }
        out.push(value);
    }
    println!("{}", json!({ "schema": SCHEMA, "rows": out }));
    Ok(ExitCode::SUCCESS)
}
