use clap::{Parser, Subcommand};
use fanih::decomp::{decomposition_theorem_report, kalai_check};
use fanih::fan::io::{classify, parse_fan, parse_plf, parse_polytope_vertices, DocKind};
use fanih::fan::Fan;
use fanih::ihlib::{ih, ip_table, lefschetz_ranks};
use fanih::poly::Poly;
use fanih::report::full_check;
use fanih::stanley::{compare_ih_h, gh_vectors, parse_lattice};
use fanih::{Error, Result};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fanih",
    version,
    about = "Intersection cohomology of rational polyhedral fans over exact arithmetic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Even degree cap >= 2 for graded computations (default depends on the fan)
    #[arg(long, global = true, value_parser = parse_cap)]
    cap: Option<i64>,
    /// Emit JSON instead of plain text
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for per-cone checks
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a fan document and run the full invariant suite
    Check { input: PathBuf },
    /// Intersection cohomology of the fan
    Ih { input: PathBuf },
    /// Local intersection cohomology of every cone (or one, with --cone)
    Ip {
        input: PathBuf,
        /// Comma-separated ray indices, or "origin"
        #[arg(long)]
        cone: Option<String>,
    },
    /// Push the minimal sheaf forward along a subdivision and decompose it
    Decompose {
        /// The subdividing (fine) fan
        input: PathBuf,
        /// The subdivided (coarse) fan
        #[arg(long)]
        onto: PathBuf,
    },
    /// Rank table of multiplication by a strictly convex conewise linear function
    Lefschetz {
        input: PathBuf,
        /// plf-document with one value per ray
        #[arg(long)]
        l: PathBuf,
    },
    /// g/h of a polytope or face lattice; polytopes also get the ih/ip comparison
    Stanley { input: PathBuf },
    /// Face inequality ip(cone) >= ip(face) * ip(star) on a single-cone fan
    Kalai {
        input: PathBuf,
        /// Generating cone, when the document carries more than one (ray indices)
        #[arg(long)]
        cone: Option<String>,
        /// The face to test (ray indices, or "origin")
        #[arg(long)]
        face: String,
    },
}

fn parse_cap(s: &str) -> std::result::Result<i64, String> {
    let v: i64 = s.parse().map_err(|_| format!("`{s}` is not an integer"))?;
    if v < 2 || v % 2 != 0 {
        return Err(format!("cap must be even and >= 2, got {v}"));
    }
    Ok(v)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

/// "0,2,5" or "origin" to a cone id of the fan.
fn resolve_cone(fan: &Fan, spec: &str) -> Result<usize> {
    let spec = spec.trim();
    if spec.is_empty() || spec == "origin" {
        return Ok(fan.origin());
    }
    let rays: Vec<usize> = spec
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad ray index `{t}` in cone spec")))
        })
        .collect::<Result<_>>()?;
    fan.cone_by_rays(&rays)
        .ok_or_else(|| Error::Parse(format!("no cone on rays {rays:?} in this fan")))
}

/// The subfan generated by one cone, with the ray table cut down to its rays.
/// Returns the fan together with the surviving original ray indices in order.
fn single_cone_fan(fan: &Fan, spec: &str) -> Result<(Fan, Vec<usize>)> {
    let sigma = resolve_cone(fan, spec)?;
    let kept = fan.cone(sigma)?.rays.clone();
    let rays = kept.iter().map(|&i| fan.rays[i].clone()).collect();
    let sub = Fan::from_max_cones(fan.n, rays, vec![(0..kept.len()).collect()])?;
    Ok((sub, kept))
}

fn cone_json(fan: &Fan, id: usize, poly: &Poly) -> serde_json::Value {
    json!({"rays": fan.cone(id).unwrap().rays, "dim": fan.cone(id).unwrap().dim, "poly": poly.to_json()})
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Check { input } => {
            let fan = parse_fan(&read(input)?)?;
            let report = full_check(&fan, cli.cap)?;
            if cli.json {
                println!("{}", report.to_json());
            } else {
                println!("{report}");
            }
            Ok(report.pass())
        }
        Command::Ih { input } => {
            let fan = parse_fan(&read(input)?)?;
            let r = ih(&fan, cli.cap)?;
            if cli.json {
                println!("{}", json!({"ih": r.ih.to_json()}));
            } else {
                println!("ih = {}", r.ih);
            }
            Ok(true)
        }
        Command::Ip { input, cone } => {
            let fan = parse_fan(&read(input)?)?;
            let table = ip_table(&fan, cli.cap)?;
            let ids: Vec<usize> = match cone {
                Some(spec) => vec![resolve_cone(&fan, spec)?],
                None => (0..fan.cones.len()).collect(),
            };
            if cli.json {
                let rows: Vec<_> = ids.iter().map(|&i| cone_json(&fan, i, &table[&i])).collect();
                println!("{}", json!({ "ip": rows }));
            } else {
                for &i in &ids {
                    println!("{}: {}", fan.rayset_label(i), table[&i]);
                }
            }
            Ok(true)
        }
        Command::Decompose { input, onto } => {
            let fine = parse_fan(&read(input)?)?;
            let coarse = parse_fan(&read(onto)?)?;
            let r = decomposition_theorem_report(&fine, &coarse)?;
            if cli.json {
                println!("{}", r.to_json());
            } else {
                println!("ih(fine)   = {}", r.ih_fine);
                println!("ih(coarse) = {}", r.ih_coarse);
                for s in &r.decomposition.summands {
                    println!(
                        "summand at {} shift {} multiplicity {}",
                        coarse.rayset_label(s.cone),
                        s.shift,
                        s.mult
                    );
                }
                println!("verdict: {}", if r.pass { "PASS" } else { "FAIL" });
            }
            Ok(r.pass)
        }
        Command::Lefschetz { input, l } => {
            let fan = parse_fan(&read(input)?)?;
            let plf = parse_plf(&read(l)?, &fan)?;
            let r = lefschetz_ranks(&fan, &plf, cli.cap)?;
            if cli.json {
                println!("{}", r.to_json());
            } else {
                println!("ih = {}", r.ih);
                for p in &r.powers {
                    println!(
                        "l^{}: IH^({}) -> IH^({})  {} -> {}  rank {}{}",
                        p.power,
                        p.source,
                        p.target,
                        p.src_dim,
                        p.tgt_dim,
                        p.rank,
                        if p.bijective { "  bijective" } else { "" }
                    );
                }
                for s in &r.steps {
                    println!(
                        "l: IH^({}) -> IH^({})  {} -> {}  rank {}{}{}",
                        s.source,
                        s.source + 2,
                        s.src_dim,
                        s.tgt_dim,
                        s.rank,
                        if s.injective { "  injective" } else { "" },
                        if s.surjective { "  surjective" } else { "" }
                    );
                }
                println!("all powers bijective: {}; monotone: {}", r.all_bijective, r.monotone_ok);
            }
            // Rank tables are findings, not assertions.
            Ok(true)
        }
        Command::Stanley { input } => {
            let text = read(input)?;
            match classify(&text)? {
                DocKind::Polytope => {
                    let (dim, verts) = parse_polytope_vertices(&text)?;
                    let r = compare_ih_h(dim, &verts)?;
                    if cli.json {
                        println!("{}", r.to_json());
                    } else {
                        println!("h  = {}", r.h);
                        println!("g  = {}", r.g);
                        println!("ih = {}", r.ih);
                        println!("ip = {}", r.ip);
                        println!("verdict: {}", if r.pass { "PASS" } else { "FAIL" });
                    }
                    Ok(r.pass)
                }
                DocKind::Lattice => {
                    let gh = gh_vectors(&parse_lattice(&text)?);
                    if cli.json {
                        println!("{}", json!({"h": gh.h.to_json(), "g": gh.g.to_json()}));
                    } else {
                        println!("h = {}", gh.h);
                        println!("g = {}", gh.g);
                    }
                    Ok(true)
                }
                DocKind::Fan => Err(Error::Parse(
                    "stanley needs a polytope or lattice document, not a fan".into(),
                )),
            }
        }
        Command::Kalai { input, cone, face } => {
            let parsed = parse_fan(&read(input)?)?;
            let (fan, kept) = match cone {
                Some(spec) => single_cone_fan(&parsed, spec)?,
                None => {
                    let all: Vec<usize> = (0..parsed.rays.len()).collect();
                    (parsed, all)
                }
            };
            let tau = if face.trim().is_empty() || face.trim() == "origin" {
                fan.origin()
            } else {
                let original: Vec<usize> = face
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::Parse(format!("bad ray index `{t}` in face spec")))
                    })
                    .collect::<Result<_>>()?;
                let mapped: Vec<usize> = original
                    .iter()
                    .map(|r| {
                        kept.iter().position(|k| k == r).ok_or_else(|| {
                            Error::Parse(format!("ray {r} is not a ray of the chosen cone"))
                        })
                    })
                    .collect::<Result<_>>()?;
                fan.cone_by_rays(&mapped)
                    .ok_or_else(|| Error::Parse(format!("no face on rays {original:?}")))?
            };
            let r = kalai_check(&fan, tau)?;
            if cli.json {
                println!("{}", r.to_json());
            } else {
                println!("ip(cone) = {}", r.ip_sigma);
                println!("ip(face) = {}", r.ip_tau);
                println!("ip(star) = {}", r.ip_star);
                println!("verdict: {}", if r.pass { "PASS" } else { "FAIL" });
            }
            Ok(r.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
