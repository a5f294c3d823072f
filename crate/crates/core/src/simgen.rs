//! Seeded planted instances.
//!
//! All randomness comes from one [`SplitMix64`] stream per instance, consumed
//! in a fixed order so an instance is a pure function of its spec:
//!
//! * `gen_rpca`: `m·n` standard normals, row-major, for the Gaussian matrix;
//!   then for every entry, row-major, two uniforms `(u, v)`: the entry is
//!   corrupted when `u < ρ` and takes value `amplitude·(2v − 1)`.
//! * `gen_photometric`: per light (3 normals, normalized, `z ← |z|`); per
//!   pixel the same for the normal, then one uniform for the albedo; then
//!   the corruption pass as above.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use nalgebra::{DMatrix, Vector3};

use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use crate::matrix::DenseMatrix;
use crate::rng::SplitMix64;

/// Parameters of a random low-rank plus sparse instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentSpec {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    /// Probability that an entry of `S` is nonzero.
    pub rho: f64,
    /// Nonzero values of `S` are `Uniform[−amplitude, amplitude]`.
    pub amplitude: f64,
    pub seed: u64,
}

impl ExperimentSpec {
    pub const DEFAULT_AMPLITUDE: f64 = 10.0;

    pub fn new(m: usize, n: usize, r: usize, rho: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            m,
            n,
            r,
            rho,
            amplitude: Self::DEFAULT_AMPLITUDE,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.r && self.r <= self.m && self.m <= self.n) {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= r <= m <= n, got r={}, m={}, n={}",
                self.r, self.m, self.n
            )));
        }
        check_rho(self.rho)?;
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter("amplitude must be positive".into()));
        }
        Ok(())
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho must lie in [0, 1], got {rho}")));
    }
    Ok(())
}

/// Parameters of a synthetic Lambertian image stack, `num_lights` images of
/// `num_pixels` pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotometricSpec {
    pub num_lights: usize,
    pub num_pixels: usize,
    pub corruption_rho: f64,
    pub corruption_amplitude: f64,
    pub seed: u64,
}

impl PhotometricSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_lights < 3 {
            return Err(Error::InvalidParameter("need at least 3 lights".into()));
        }
        if self.num_pixels == 0 {
            return Err(Error::InvalidParameter("need at least one pixel".into()));
        }
        check_rho(self.corruption_rho)?;
        if !(self.corruption_amplitude > 0.0 && self.corruption_amplitude.is_finite()) {
            return Err(Error::InvalidParameter("corruption_amplitude must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstanceSpec {
    Rpca(ExperimentSpec),
    Photometric(PhotometricSpec),
}

/// `y = x_true + s_true` with known ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance {
    pub y: DenseMatrix,
    pub x_true: DenseMatrix,
    pub s_true: DenseMatrix,
    pub spec: InstanceSpec,
}

/// A photometric instance together with its generating factors:
/// `x_true = lightsᵀ · normals · diag(albedo)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotometricInstance {
    pub planted: PlantedInstance,
    /// 3 × num_lights, unit columns with nonnegative z.
    pub lights: DMatrix<f64>,
    /// 3 × num_pixels, unit columns with nonnegative z.
    pub normals: DMatrix<f64>,
    pub albedo: Vec<f64>,
}

fn sparse_corruption(rng: &mut SplitMix64, m: usize, n: usize, rho: f64, amplitude: f64) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let u = rng.uniform();
            let v = rng.uniform_range(-amplitude, amplitude);
            if u < rho {
                s[(i, j)] = v;
            }
        }
    }
    s
}

fn assemble(x: DMatrix<f64>, s: DMatrix<f64>, spec: InstanceSpec) -> PlantedInstance {
    let y = &x + &s;
    PlantedInstance {
        y: DenseMatrix::new(y).expect("finite generator output"),
        x_true: DenseMatrix::new(x).expect("finite generator output"),
        s_true: DenseMatrix::new(s).expect("finite generator output"),
        spec,
    }
}

/// Rank-`r` truncation of an iid `N(0, 1)` matrix plus Bernoulli(ρ) sparse
/// corruption.
///
/// # Panics
///
/// If the spec does not validate.
pub fn gen_rpca(spec: &ExperimentSpec) -> PlantedInstance {
    spec.validate().expect("invalid ExperimentSpec");
    let (m, n, r) = (spec.m, spec.n, spec.r);
    let mut rng = SplitMix64::new(spec.seed);
    let mut gauss = DMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            gauss[(i, j)] = rng.normal();
        }
    }
    let x = if r >= m {
        gauss
    } else {
        let svd = thin_svd(&gauss);
        let mut x = DMatrix::zeros(m, n);
        for k in 0..r {
            x.ger(svd.s[k], &svd.u.column(k), &svd.vt.row(k).transpose(), 1.0);
        }
        x
    };
    let s = sparse_corruption(&mut rng, m, n, spec.rho, spec.amplitude);
    assemble(x, s, InstanceSpec::Rpca(*spec))
}

fn upper_hemisphere(rng: &mut SplitMix64) -> Vector3<f64> {
    loop {
        let v = Vector3::new(rng.normal(), rng.normal(), rng.normal());
        let norm = v.norm();
        if norm > 1e-12 {
            let mut u = v / norm;
            u.z = u.z.abs();
            return u;
        }
    }
}

/// Lambertian stack `Lᵀ N Υ` (rank ≤ 3) plus sparse corruption.
///
/// # Panics
///
/// If the spec does not validate.
pub fn gen_photometric(spec: &PhotometricSpec) -> PhotometricInstance {
    spec.validate().expect("invalid PhotometricSpec");
    let (m, n) = (spec.num_lights, spec.num_pixels);
    let mut rng = SplitMix64::new(spec.seed);
    let mut lights = DMatrix::zeros(3, m);
    for k in 0..m {
        lights.set_column(k, &upper_hemisphere(&mut rng));
    }
    let mut normals = DMatrix::zeros(3, n);
    let mut albedo = Vec::with_capacity(n);
    for p in 0..n {
        normals.set_column(p, &upper_hemisphere(&mut rng));
        albedo.push(rng.uniform_range(0.2, 1.0));
    }
    let mut x = lights.transpose() * &normals;
    for (p, a) in albedo.iter().enumerate() {
        x.column_mut(p).scale_mut(*a);
    }
    let s = sparse_corruption(&mut rng, m, n, spec.corruption_rho, spec.corruption_amplitude);
    PhotometricInstance {
        planted: assemble(x, s, InstanceSpec::Photometric(*spec)),
        lights,
        normals,
        albedo,
    }
}

impl PlantedInstance {
    /// `key=value` lines describing the generating spec.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        let (m, n) = self.y.shape();
        match self.spec {
            InstanceSpec::Rpca(s) => {
                writeln!(out, "kind=rpca").unwrap();
                writeln!(out, "m={}\nn={}\nrank={}", s.m, s.n, s.r).unwrap();
                writeln!(out, "rho={}\namplitude={}\nseed={}", s.rho, s.amplitude, s.seed).unwrap();
            }
            InstanceSpec::Photometric(s) => {
                writeln!(out, "kind=photometric").unwrap();
                writeln!(out, "m={m}\nn={n}\nrank=3").unwrap();
                writeln!(
                    out,
                    "rho={}\namplitude={}\nseed={}",
                    s.corruption_rho, s.corruption_amplitude, s.seed
                )
                .unwrap();
            }
        }
        writeln!(out, "generator=splitmix64").unwrap();
        out
    }

    /// Writes `y.csv`, `x_true.csv`, `s_true.csv` and `manifest.txt` into
    /// `dir`, creating it if needed.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> io::Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        self.y.write_to(dir.join("y.csv"))?;
        self.x_true.write_to(dir.join("x_true.csv"))?;
        self.s_true.write_to(dir.join("s_true.csv"))?;
        fs::write(dir.join("manifest.txt"), self.manifest())
    }
}

/// Parses `key=value` lines, ignoring blanks and `#` comments.
pub fn parse_manifest(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}
