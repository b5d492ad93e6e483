//! Command-line surface: classification scans, star-exponentials, vacuums,
//! matrix elements, residue tables, inverses, co-moving traces, spectre
//! scans and the verification suites. Emits JSON or CSV for plotting.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use starweyl::branch::{self, SheetedPath, Sheet};
use starweyl::comoving::{self, ComovingPath};
use starweyl::fock;
use starweyl::gauss;
use starweyl::integral;
use starweyl::param::ExpressionParameter;
use starweyl::residue;
use starweyl::verify::{run_suite, VerifyConfig, SUITE_NAMES};

type C64 = Complex64;

#[derive(Parser)]
#[command(
    name = "starweyl",
    about = "Star products, star-exponentials and integral elements of the two-generator Weyl algebra in K-ordered expressions",
    version
)]
struct Cli {
    /// Planck constant (positive)
    #[arg(long, global = true, default_value_t = 1.0)]
    hbar: f64,
    /// quadrature node budget
    #[arg(long, global = true, default_value_t = 512)]
    nodes: usize,
    /// matrix truncation dimension
    #[arg(long, global = true, default_value_t = 64)]
    trunc: usize,
    /// tolerance scale for verification suites (1.0 = pinned values)
    #[arg(long, global = true, default_value_t = 1.0)]
    tol: f64,
    /// output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum InverseVariant {
    Plus,
    Minus,
    D,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify expression parameters over a grid of (delta, c, delta')
    Classify {
        /// delta values: "v" or "lo:hi:n"
        #[arg(long, default_value = "0.5")]
        delta: String,
        /// c values: "v" or "lo:hi:n"
        #[arg(long, default_value = "-2:2:41")]
        c: String,
        /// delta' values: "v" or "lo:hi:n"
        #[arg(long = "delta-prime", default_value = "0.5")]
        delta_prime: String,
    },
    /// Star-exponential e^{alpha z} e_*^{z H} traced from the origin
    Starexp {
        /// endpoint z as "re" or "re,im"
        #[arg(long)]
        z: String,
        /// scalar shift alpha
        #[arg(long, default_value = "0")]
        alpha: String,
        #[arg(long, default_value = "0.5")]
        delta: String,
        #[arg(long, default_value = "0")]
        c: String,
        #[arg(long = "delta-prime", default_value = "0.5")]
        delta_prime: String,
        /// optional intermediate waypoints "re,im;re,im;..."
        #[arg(long)]
        via: Option<String>,
    },
    /// Vacuum (or bar-vacuum) closed form
    Vacuum {
        #[arg(long, default_value = "0.5")]
        delta: String,
        #[arg(long, default_value = "0")]
        c: String,
        #[arg(long = "delta-prime", default_value = "0.5")]
        delta_prime: String,
        /// emit the bar-vacuum instead
        #[arg(long)]
        bar: bool,
    },
    /// Matrix element E_{p,q} (or Ebar), or a truncated representation dump
    MatrixElements {
        #[arg(long, default_value_t = 0)]
        p: u32,
        #[arg(long, default_value_t = 0)]
        q: u32,
        #[arg(long)]
        bar: bool,
        #[arg(long, default_value = "0.5")]
        delta: String,
        #[arg(long, default_value = "2")]
        c: String,
        #[arg(long = "delta-prime", default_value = "0.5")]
        delta_prime: String,
        /// dump the truncated matrix of the element's star action as CSV
        #[arg(long)]
        represent: bool,
    },
    /// Residue table at a singular point: Laurent coefficients at the origin
    Residues {
        /// singular point "re,im"; defaults to the base point of the b-line
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long, default_value = "0")]
        alpha: String,
        #[arg(long, default_value_t = 0)]
        k_lo: i32,
        #[arg(long, default_value_t = 2)]
        k_hi: i32,
        #[arg(long, default_value = "0.5")]
        delta: String,
        #[arg(long, default_value = "0")]
        c: String,
        #[arg(long = "delta-prime", default_value = "0.5")]
        delta_prime: String,
    },
    /// One-sided or D-family star-inverse of z + H
    Inverse {
        #[arg(long)]
        z: String,
        #[arg(long, value_enum, default_value_t = InverseVariant::Plus)]
        variant: InverseVariant,
        #[arg(long, default_value = "0.5")]
        delta: String,
        #[arg(long, default_value = "0")]
        c: String,
        #[arg(long = "delta-prime", default_value = "0.5")]
        delta_prime: String,
    },
    /// Trace of the co-moving expression parameters along t
    Comoving {
        #[arg(long, default_value_t = 0.1)]
        t0: f64,
        #[arg(long, default_value_t = 3.0)]
        t1: f64,
        #[arg(long, default_value_t = 59)]
        steps: usize,
    },
    /// Spectre scan: log10 |value| of an inverse family over a z-grid
    Spectre {
        #[arg(long, value_enum, default_value_t = InverseVariant::Plus)]
        variant: InverseVariant,
        /// Re z range "lo:hi:n"
        #[arg(long, default_value = "-3:1:81")]
        re: String,
        /// Im z range "lo:hi:n"
        #[arg(long, default_value = "0.3:0.3:1")]
        im: String,
        #[arg(long, default_value = "0.5")]
        delta: String,
        #[arg(long, default_value = "0")]
        c: String,
        #[arg(long = "delta-prime", default_value = "0.5")]
        delta_prime: String,
    },
    /// Run a verification suite ("all" runs every suite)
    Verify {
        /// suite name or "all"
        suite: String,
    },
}

fn parse_c64(s: &str) -> Result<C64, String> {
    let s = s.trim();
    if let Some((re, im)) = s.split_once(',') {
        let re: f64 = re.trim().parse().map_err(|e| format!("bad complex '{s}': {e}"))?;
        let im: f64 = im.trim().parse().map_err(|e| format!("bad complex '{s}': {e}"))?;
        Ok(C64::new(re, im))
    } else {
        let re: f64 = s.parse().map_err(|e| format!("bad number '{s}': {e}"))?;
        Ok(C64::new(re, 0.0))
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if let Some((lo, rest)) = s.split_once(':') {
        let (hi, n) = rest
            .split_once(':')
            .ok_or_else(|| format!("range '{s}' must be lo:hi:n"))?;
        let lo: f64 = lo.parse().map_err(|e| format!("bad range '{s}': {e}"))?;
        let hi: f64 = hi.parse().map_err(|e| format!("bad range '{s}': {e}"))?;
        let n: usize = n.parse().map_err(|e| format!("bad range '{s}': {e}"))?;
        if n == 0 {
            return Err(format!("range '{s}' has zero points"));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        Ok((0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect())
    } else {
        let v: f64 = s.parse().map_err(|e| format!("bad number '{s}': {e}"))?;
        Ok(vec![v])
    }
}

fn make_param(delta: &str, c: &str, dp: &str, hbar: f64) -> Result<ExpressionParameter, String> {
    ExpressionParameter::new(parse_c64(delta)?, parse_c64(c)?, parse_c64(dp)?, hbar)
        .map_err(|e| e.to_string())
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| e.to_string()),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let cfg = VerifyConfig {
        hbar: cli.hbar,
        nodes: cli.nodes,
        trunc: cli.trunc,
        tol_scale: cli.tol,
    };
    match cli.cmd {
        Cmd::Classify { delta, c, delta_prime } => {
            let deltas = parse_range(&delta)?;
            let cs = parse_range(&c)?;
            let dps = parse_range(&delta_prime)?;
            let mut grid = Vec::new();
            for d in &deltas {
                for cc in &cs {
                    for dp in &dps {
                        grid.push((*d, *cc, *dp));
                    }
                }
            }
            let rows: Vec<String> = grid
                .par_iter()
                .map(|(d, cc, dp)| {
                    let k = ExpressionParameter::from_reals(*d, *cc, *dp);
                    let ss = branch::singular_structure(&k);
                    format!("{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}", d, cc, dp, ss.a, ss.b, ss.class)
                })
                .collect();
            let mut s = String::from("delta,c,delta_prime,a,b,class\n");
            for r in rows {
                let _ = writeln!(s, "{r}");
            }
            emit(&cli.out, &s)?;
            Ok(0)
        }
        Cmd::Starexp { z, alpha, delta, c, delta_prime, via } => {
            let k = make_param(&delta, &c, &delta_prime, cli.hbar)?;
            let z = parse_c64(&z)?;
            let alpha = parse_c64(&alpha)?;
            let g = match via {
                None => gauss::star_exp_quadratic(z, alpha, &k).map_err(|e| e.to_string())?,
                Some(spec) => {
                    let mut pts = Vec::new();
                    for part in spec.split(';') {
                        pts.push(parse_c64(part)?);
                    }
                    pts.push(z);
                    let path = SheetedPath::from_origin(pts, Sheet::Plus);
                    let (g, _) = branch::trace_star_exp(&path, alpha, &k).map_err(|e| e.to_string())?;
                    g
                }
            };
            emit(&cli.out, &format!("{}\n", serde_json::to_string_pretty(&g).unwrap()))?;
            Ok(0)
        }
        Cmd::Vacuum { delta, c, delta_prime, bar } => {
            let k = make_param(&delta, &c, &delta_prime, cli.hbar)?;
            let g = if bar {
                gauss::bar_vacuum(&k).map_err(|e| e.to_string())?
            } else {
                gauss::vacuum(&k).map_err(|e| e.to_string())?
            };
            emit(&cli.out, &format!("{}\n", serde_json::to_string_pretty(&g).unwrap()))?;
            Ok(0)
        }
        Cmd::MatrixElements { p, q, bar, delta, c, delta_prime, represent } => {
            let k = make_param(&delta, &c, &delta_prime, cli.hbar)?;
            let g = if bar {
                integral::matrix_element_ebar(p, q, &k).map_err(|e| e.to_string())?
            } else {
                integral::matrix_element_e(p, q, &k).map_err(|e| e.to_string())?
            };
            if represent {
                let basis = if bar { fock::BasisTag::Ebar } else { fock::BasisTag::E };
                let m = fock::represent(fock::RepresentInput::Gauss(&g), cli.trunc.min(32), basis, &k)
                    .map_err(|e| e.to_string())?;
                let mut s = String::new();
                for i in 0..m.n {
                    let row: Vec<String> = (0..m.n)
                        .map(|j| format!("{:.12e}{:+.12e}i", m[(i, j)].re, m[(i, j)].im))
                        .collect();
                    let _ = writeln!(s, "{}", row.join(","));
                }
                emit(&cli.out, &s)?;
            } else {
                emit(&cli.out, &format!("{}\n", serde_json::to_string_pretty(&g).unwrap()))?;
            }
            Ok(0)
        }
        Cmd::Residues { sigma, alpha, k_lo, k_hi, delta, c, delta_prime } => {
            let k = make_param(&delta, &c, &delta_prime, cli.hbar)?;
            let ss = branch::singular_structure(&k);
            let sigma = match sigma {
                Some(s) => parse_c64(&s)?,
                None => ss
                    .sigma_b
                    .or(ss.sigma_a)
                    .ok_or_else(|| "expression has no singular points".to_string())?,
            };
            let alpha = parse_c64(&alpha)?;
            match residue::laurent_coefficients(sigma, alpha, &k, k_lo, k_hi, 0.55, cli.nodes.max(512), None, 14)
            {
                Ok(data) => {
                    let mut s = String::from("sigma_re,sigma_im,k,coeff_at_origin_re,coeff_at_origin_im\n");
                    for (kk, g) in &data.coeffs {
                        let v = g.eval(C64::new(0.0, 0.0), C64::new(0.0, 0.0), cli.hbar);
                        let _ = writeln!(
                            s,
                            "{:.12e},{:.12e},{},{:.12e},{:.12e}",
                            sigma.re, sigma.im, kk, v.re, v.im
                        );
                    }
                    emit(&cli.out, &s)?;
                    Ok(0)
                }
                Err(starweyl::StarError::NotASingularPoint { .. }) => {
                    let mut s = String::from("sigma_re,sigma_im,k,coeff_at_origin_re,coeff_at_origin_im\n");
                    let _ = writeln!(s, "# status: regular point, residue table empty");
                    emit(&cli.out, &s)?;
                    Ok(0)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Cmd::Inverse { z, variant, delta, c, delta_prime } => {
            let k = make_param(&delta, &c, &delta_prime, cli.hbar)?;
            let z = parse_c64(&z)?;
            let q = match variant {
                InverseVariant::Plus => integral::inverse_plus(z, &k, 40.0, cli.nodes),
                InverseVariant::Minus => integral::inverse_minus(z, &k, 40.0, cli.nodes),
                InverseVariant::D => fock::d_inverse_element(z, &k, cli.trunc, cli.nodes),
            }
            .map_err(|e| e.to_string())?;
            emit(&cli.out, &format!("{}\n", serde_json::to_string_pretty(&q).unwrap()))?;
            Ok(0)
        }
        Cmd::Comoving { t0, t1, steps } => {
            if !(t0 > 0.0 && t1 > t0) || steps == 0 {
                return Err("need 0 < t0 < t1 and steps > 0".to_string());
            }
            let path = ComovingPath::canonical();
            let mut s = String::from("t,delta_re,delta_im,c_re,c_im,delta_prime_re,delta_prime_im,sigequation_residual\n");
            for i in 0..=steps {
                let t = t0 + (t1 - t0) * i as f64 / steps as f64;
                let k = comoving::comoving_k(&path, t).map_err(|e| e.to_string())?;
                let r = comoving::sigequation_residual(&k, t);
                let _ = writeln!(
                    s,
                    "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.3e}",
                    t, k.delta.re, k.delta.im, k.c.re, k.c.im, k.delta_prime.re, k.delta_prime.im, r
                );
            }
            emit(&cli.out, &s)?;
            Ok(0)
        }
        Cmd::Spectre { variant, re, im, delta, c, delta_prime } => {
            let k = make_param(&delta, &c, &delta_prime, cli.hbar)?;
            let res = parse_range(&re)?;
            let ims = parse_range(&im)?;
            let probe = (C64::new(0.7, 0.0), C64::new(0.4, 0.0));
            let mut grid = Vec::new();
            for r in &res {
                for i in &ims {
                    grid.push(C64::new(*r, *i));
                }
            }
            let rows: Vec<String> = grid
                .par_iter()
                .map(|z| {
                    let val = match variant {
                        InverseVariant::Plus => integral::inverse_plus(*z, &k, 40.0, cli.nodes)
                            .map(|q| q.eval(probe.0, probe.1, cli.hbar)),
                        InverseVariant::Minus => integral::inverse_minus(*z, &k, 40.0, cli.nodes)
                            .map(|q| q.eval(probe.0, probe.1, cli.hbar)),
                        InverseVariant::D => fock::d_inverse_element(*z, &k, 48, cli.nodes)
                            .map(|q| q.eval(probe.0, probe.1, cli.hbar)),
                    };
                    match val {
                        Ok(v) => format!("{:.12e},{:.12e},{:.6e}", z.re, z.im, v.norm().log10()),
                        Err(_) => format!("{:.12e},{:.12e},inf", z.re, z.im),
                    }
                })
                .collect();
            let mut s = String::from("z_re,z_im,log10_value\n");
            for r in rows {
                let _ = writeln!(s, "{r}");
            }
            emit(&cli.out, &s)?;
            Ok(0)
        }
        Cmd::Verify { suite } => {
            let names: Vec<&str> = if suite == "all" {
                SUITE_NAMES.to_vec()
            } else if SUITE_NAMES.contains(&suite.as_str()) {
                vec![SUITE_NAMES[SUITE_NAMES.iter().position(|n| *n == suite).unwrap()]]
            } else {
                return Err(format!(
                    "unknown suite '{suite}'; available: all, {}",
                    SUITE_NAMES.join(", ")
                ));
            };
            let mut all_pass = true;
            let mut s = String::new();
            for name in names {
                let report = run_suite(name, &cfg).map_err(|e| e.to_string())?;
                all_pass &= report.pass();
                let _ = writeln!(s, "{}", report.summary());
                for line in &report.lines {
                    let _ = writeln!(
                        s,
                        "  {:<62} residual {:>10.3e}  tol {:>8.1e}  {}",
                        line.label,
                        line.residual,
                        line.tol,
                        if line.pass() { "ok" } else { "FAIL" }
                    );
                }
            }
            emit(&cli.out, &s)?;
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
