//! Command-line surface.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "shilov", version, about = "Certified witnesses for j(z) = p(z), Shilov-boundary geometry and special points")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// JSON run configuration.
    #[arg(long, global = true, env = "SHILOV_CONFIG")]
    pub config: Option<PathBuf>,
    /// Result file; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// q-series terms.
    #[arg(long, global = true)]
    pub truncation: Option<usize>,
    #[arg(long, global = true)]
    pub orbit_depth: Option<usize>,
    /// Override a named tolerance, e.g. `--tol residual=1e-10`.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    pub tolerances: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bergman kernel and distance on the polydisk, with the extremal functional.
    Metric(MetricArgs),
    /// Euclidean extent of Bergman balls near the distinguished boundary.
    ShilovCheck(ShilovArgs),
    /// SL2(Z) orbit of a base point accumulating at a boundary target.
    Orbit(OrbitArgs),
    /// j(z) and j'(z).
    Jeval(JevalArgs),
    /// A point z of the fundamental domain with j(z) = c.
    Jinv(JinvArgs),
    /// Certified solutions of P(z, j(z)) = 0 or j(z) = p(z) near boundary targets.
    Witness(WitnessArgs),
    /// Search tau with j(tau) = c1 and j(g tau) close to c2.
    ProductDensity(DensityArgs),
    /// Broadness and Hodge-genericity of a Moebius subvariety.
    BroadCheck(BroadArgs),
    /// Flag quadratic points among given points or solver witnesses.
    Special(SpecialArgs),
    /// Hilbert class polynomial of a negative discriminant.
    Classpoly(ClassPolyArgs),
    /// Quick checks across all modules.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// Comma-separated disk coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    #[arg(long, allow_hyphen_values = true)]
    pub w: String,
    /// Tangent vector components at z.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
}

#[derive(Debug, Args)]
pub struct ShilovArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Bergman radius of the balls.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Distances 1 - |z_i| of the centres to the boundary.
    #[arg(long, default_value = "1e-1,1e-2,1e-3,1e-4,1e-5")]
    pub t: String,
    /// Angle step between the centre's coordinates.
    #[arg(long, default_value_t = 0.7)]
    pub angle: f64,
    /// Closure point to test for membership in the distinguished boundary.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Samples for the maximum-modulus spot check.
    #[arg(long, default_value_t = 2500)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    /// `p/q`, a real expression such as `sqrt(2)-1`, or `inf`.
    #[arg(long, allow_hyphen_values = true)]
    pub target: String,
    #[arg(long, default_value = "0+2i", allow_hyphen_values = true)]
    pub base: String,
    #[arg(long, default_value_t = 30)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct JevalArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
}

#[derive(Debug, Args)]
pub struct JinvArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c: String,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    /// Polynomial P(z, w), e.g. `w - z` or `z*w - 1`.
    #[arg(long, allow_hyphen_values = true)]
    pub poly: Option<String>,
    /// Right-hand side p of j(z) = p(z): `exp`, `const:<c>` or `poly:<c0,c1,...>`.
    #[arg(long, allow_hyphen_values = true)]
    pub function: Option<String>,
    /// Comma-separated boundary targets.
    #[arg(long, allow_hyphen_values = true)]
    pub targets: String,
    /// Witnesses per target.
    #[arg(long, default_value_t = 3)]
    pub count: usize,
    /// Root of P(x0, w) by modulus rank; the smallest by default.
    #[arg(long)]
    pub branch: Option<usize>,
    #[arg(long)]
    pub ball_radius: Option<f64>,
    /// Contours must stay this close to their target.
    #[arg(long)]
    pub neighborhood: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Entries a,b,c,d of g; `sqrt(k)` allowed.
    #[arg(long, allow_hyphen_values = true)]
    pub g: String,
    #[arg(long, allow_hyphen_values = true)]
    pub c1: String,
    #[arg(long, allow_hyphen_values = true)]
    pub c2: Option<String>,
    /// Plant c2 = j(g gamma* tau0) for the integer matrix gamma* = a,b,c,d.
    #[arg(long, allow_hyphen_values = true)]
    pub plant: Option<String>,
    #[arg(long)]
    pub height: Option<i64>,
}

#[derive(Debug, Args)]
pub struct BroadArgs {
    #[arg(long)]
    pub n: usize,
    /// `i,j:a,b,c,d` meaning x_i = g x_j (1-based); repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub relation: Vec<String>,
    /// `i:z` fixing x_i = z; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub constant: Vec<String>,
    /// `point`, `full`, `hyperplane:i` or `dims:d1,...` indexed by subset bitmask.
    #[arg(long, default_value = "full")]
    pub profile: String,
}

#[derive(Debug, Args)]
pub struct SpecialArgs {
    /// Points to scan; otherwise witnesses are computed first.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["poly", "function"])]
    pub points: Option<String>,
    #[arg(long)]
    pub coef_bound: Option<i64>,
    #[command(flatten)]
    pub witness: SpecialWitness,
}

#[derive(Debug, Args)]
pub struct SpecialWitness {
    #[arg(long, allow_hyphen_values = true)]
    pub poly: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub function: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value = "1/2")]
    pub targets: String,
    #[arg(long, default_value_t = 3)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct ClassPolyArgs {
    /// Negative discriminant.
    #[arg(long = "D", short = 'D', allow_hyphen_values = true)]
    pub d: i64,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {}
