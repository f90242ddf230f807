//! `generate` subcommand: builds model files from the library's
//! constructors. Every kind writes a complete JSON model that reloads
//! and re-validates.

use kmu_geometry::{
    equality_sigma, invariant_submanifold, random_submanifold, umbilical_sigma, EqualityParams,
    KMuStructure, KmuError, ShapeVariant, SigmaMode, SubmanifoldPoint,
};

use crate::model::ModelFile;

pub struct AmbientSpec {
    pub m: usize,
    pub kappa: f64,
    pub c: Option<f64>,
}

impl AmbientSpec {
    pub fn build(&self) -> Result<KMuStructure, KmuError> {
        KMuStructure::canonical(self.m, self.kappa, self.c)
    }
}

pub fn sasakian(
    m: usize,
    c: f64,
    n: usize,
    seed: u64,
    sigma_scale: f64,
) -> Result<ModelFile, KmuError> {
    let s = KMuStructure::canonical(m, 1.0, Some(c))?;
    let sub = random_submanifold(&s, n, seed, SigmaMode::Contact, sigma_scale)?;
    Ok(ModelFile::from_submanifold(
        &sub,
        &format!("sasakian-m{m}-c{c}-n{n}-seed{seed}"),
        seed,
        "contact",
    ))
}

pub fn kmu(
    m: usize,
    kappa: f64,
    n: usize,
    seed: u64,
    sigma_scale: f64,
) -> Result<ModelFile, KmuError> {
    let s = KMuStructure::canonical(m, kappa, None)?;
    let sub = random_submanifold(&s, n, seed, SigmaMode::Contact, sigma_scale)?;
    Ok(ModelFile::from_submanifold(
        &sub,
        &format!("kmu-m{m}-kappa{kappa}-n{n}-seed{seed}"),
        seed,
        "contact",
    ))
}

pub fn random_sub(
    ambient: &AmbientSpec,
    n: usize,
    seed: u64,
    mode: SigmaMode,
    sigma_scale: f64,
) -> Result<ModelFile, KmuError> {
    let s = ambient.build()?;
    let sub = random_submanifold(&s, n, seed, mode, sigma_scale)?;
    let mode_name = match mode {
        SigmaMode::Contact => "contact",
        SigmaMode::Raw => "raw",
    };
    Ok(ModelFile::from_submanifold(
        &sub,
        &format!("random-sub-n{n}-seed{seed}"),
        seed,
        mode_name,
    ))
}

pub fn invariant_sub(
    ambient: &AmbientSpec,
    n: usize,
    seed: u64,
    sigma_scale: f64,
) -> Result<ModelFile, KmuError> {
    let s = ambient.build()?;
    let sub = invariant_submanifold(&s, n, seed, sigma_scale)?;
    Ok(ModelFile::from_submanifold(
        &sub,
        &format!("invariant-sub-n{n}-seed{seed}"),
        seed,
        "contact",
    ))
}

/// Equality-form sigma on a clean base. The plane bound checkers run
/// these in raw mode: the normal forms do not respect the contact
/// xi-slice discipline in general.
pub fn equality_case(
    ambient: &AmbientSpec,
    n: usize,
    seed: u64,
    variant: ShapeVariant,
    a: f64,
    b: f64,
    cd: &[f64],
) -> Result<ModelFile, KmuError> {
    let s = ambient.build()?;
    let base = random_submanifold(&s, n, seed, SigmaMode::Raw, 0.0)?;
    if cd.len() % 2 != 0 {
        return Err(KmuError::ParameterCount {
            context: "--cd takes flat (c_r, d_r) pairs",
            expected: cd.len() + 1,
            actual: cd.len(),
        });
    }
    let mut pairs: Vec<(f64, f64)> = cd.chunks(2).map(|ch| (ch[0], ch[1])).collect();
    let needed = base.codim().saturating_sub(1);
    if pairs.len() > needed {
        return Err(KmuError::ParameterCount {
            context: "more (c_r, d_r) pairs than extra normal directions",
            expected: needed,
            actual: pairs.len(),
        });
    }
    pairs.resize(needed, (0.0, 0.0));
    let params = EqualityParams { a, b, cd: pairs };
    let sub = equality_sigma(&base, variant, &params)?;
    let tag = match variant {
        ShapeVariant::Shape1 => "shape1",
        ShapeVariant::Shape1Prime => "shape1prime",
    };
    Ok(ModelFile::from_submanifold(
        &sub,
        &format!("equality-{tag}-n{n}-seed{seed}"),
        seed,
        "raw",
    ))
}

/// Umbilical sigma on an invariant base, so that the zero-mean case
/// passes contact validation outright and the nonzero-mean case fails
/// it with residual exactly the requested norm.
pub fn umbilical(
    ambient: &AmbientSpec,
    n: usize,
    seed: u64,
    h_norm: f64,
) -> Result<ModelFile, KmuError> {
    let s = ambient.build()?;
    let base = invariant_submanifold(&s, n, seed, 0.0)?;
    let direction = base.normal_frame().col(0)?;
    let sub: SubmanifoldPoint = umbilical_sigma(&base, &(direction * h_norm))?;
    Ok(ModelFile::from_submanifold(
        &sub,
        &format!("umbilical-n{n}-seed{seed}-h{h_norm}"),
        seed,
        "contact",
    ))
}
