//! Input and output file formats: group definitions, balls, profiles, controls, CSV.

use std::{fs, path::Path};

use carnot_core::{
    algebra::parse_weight,
    control::{ControlSignal, V1Norm},
    heisenberg::{random_lipschitz_profile, ConvexDomain, HeisenbergBall, Profile},
    norms::{euclidean_ball_candidate, Ball},
    plane::{build_fractal_ball, FractalBallParams, FractalProfile, RemarkBall, YRegion},
    BracketEntry, GradedAlgebraSpec, GradedGroup, Weight,
};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const BUILTIN_GROUPS: [&str; 8] =
    ["heisenberg", "heisenberg-x-line", "engel", "engel-x-line", "plane-11", "plane-12", "plane-22", "abelian:<w1,w2,...>"];

/// Weight as written in a group file: an integer or a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightText {
    Int(i64),
    Text(String),
}

/// `{"dim", "weights", "brackets": [[i, j, k, c], ...]}` with 0-based indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub dim: usize,
    pub weights: Vec<WeightText>,
    #[serde(default)]
    pub brackets: Vec<(usize, usize, usize, f64)>,
}

impl GroupFile {
    pub fn to_spec(&self) -> Result<GradedAlgebraSpec> {
        let weights = self
            .weights
            .iter()
            .map(|w| match w {
                WeightText::Int(k) => Ok(Weight::from_integer(*k)),
                WeightText::Text(s) => parse_weight(s).map_err(CliError::from),
            })
            .collect::<Result<Vec<_>>>()?;
        let brackets = self.brackets.iter().map(|&(i, j, k, c)| BracketEntry::new(i, j, k, c)).collect();
        Ok(GradedAlgebraSpec::new(self.dim, weights, brackets))
    }

    pub fn from_spec(spec: &GradedAlgebraSpec) -> Self {
        let weights = spec
            .weights
            .iter()
            .map(|w| if w.is_integer() { WeightText::Int(*w.numer()) } else { WeightText::Text(format!("{}/{}", w.numer(), w.denom())) })
            .collect();
        let brackets = spec.brackets.iter().map(|b| (b.i, b.j, b.k, b.c)).collect();
        Self { dim: spec.dim, weights, brackets }
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { context: path.display().to_string(), source })
}

fn builtin_spec(name: &str) -> Result<Option<GradedAlgebraSpec>> {
    let spec = match name {
        "heisenberg" => GradedAlgebraSpec::heisenberg(),
        "heisenberg-x-line" => GradedAlgebraSpec::heisenberg_times_line(),
        "engel" => GradedAlgebraSpec::engel(),
        "engel-x-line" => GradedAlgebraSpec::engel().product_with_line(),
        "plane-11" => GradedAlgebraSpec::abelian_plane(1, 1),
        "plane-12" => GradedAlgebraSpec::abelian_plane(1, 2),
        "plane-22" => GradedAlgebraSpec::abelian_plane(2, 2),
        _ => match name.strip_prefix("abelian:") {
            Some(list) => {
                let w = list
                    .split(',')
                    .map(|s| s.trim().parse::<i64>().map_err(|_| CliError::usage(format!("bad abelian weight list {list:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                GradedAlgebraSpec::abelian(&w)
            }
            None => return Ok(None),
        },
    };
    Ok(Some(spec))
}

/// Built-in group name or path to a group JSON file; not validated.
pub fn load_spec(reference: &str) -> Result<GradedAlgebraSpec> {
    if let Some(spec) = builtin_spec(reference)? {
        return Ok(spec);
    }
    let path = Path::new(reference);
    if !path.exists() {
        return Err(CliError::usage(format!(
            "unknown group {reference:?}: not a file and not one of {}",
            BUILTIN_GROUPS.join(", ")
        )));
    }
    read_json::<GroupFile>(path)?.to_spec()
}

pub fn resolve_group(reference: &str) -> Result<GradedGroup> {
    Ok(GradedGroup::new(load_spec(reference)?)?)
}

/// Closed-form profile tag or grid over the circumscribed square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileValues {
    Tag(String),
    Grid { nx: usize, ny: usize, values: Vec<f64> },
}

/// `{domain, values, lipschitz?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub domain: ConvexDomain,
    pub values: ProfileValues,
    #[serde(default)]
    pub lipschitz: Option<f64>,
}

/// `abs-x`, `zero`, `constant:<c>` or `random:<lipschitz>` (needs a seed).
pub fn profile_from_tag(tag: &str, domain: &ConvexDomain, seed: Option<u64>) -> Result<Profile> {
    let num = |s: &str| s.parse::<f64>().map_err(|_| CliError::usage(format!("bad number in profile {tag:?}")));
    Ok(match tag {
        "abs-x" => Profile::abs_x(domain),
        "zero" => Profile::zero(),
        _ => {
            if let Some(c) = tag.strip_prefix("constant:") {
                Profile::constant(num(c)?)
            } else if let Some(l) = tag.strip_prefix("random:") {
                let seed = seed.ok_or_else(|| CliError::usage("a random profile needs --seed"))?;
                random_lipschitz_profile(domain, 33, num(l)?, seed)?
            } else {
                return Err(CliError::usage(format!("unknown profile {tag:?} (abs-x, zero, constant:<c>, random:<L>)")));
            }
        }
    })
}

impl ProfileFile {
    pub fn to_profile(&self, seed: Option<u64>) -> Result<Profile> {
        let p = match &self.values {
            ProfileValues::Tag(t) => profile_from_tag(t, &self.domain, seed)?,
            ProfileValues::Grid { nx, ny, values } => Profile::grid(&self.domain, *nx, *ny, values.clone())?,
        };
        Ok(match self.lipschitz {
            Some(l) => p.with_lipschitz(l),
            None => p,
        })
    }
}

/// `disc:<r>` or `regular:<n>:<r>` (regular polygon with an even number of vertices).
pub fn parse_domain(text: &str) -> Result<ConvexDomain> {
    let bad = || CliError::usage(format!("bad domain {text:?} (disc:<r> or regular:<n>:<r>)"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["disc", r] => Ok(ConvexDomain::disc(r.parse().map_err(|_| bad())?)?),
        ["regular", n, r] => Ok(ConvexDomain::regular_polygon(n.parse().map_err(|_| bad())?, r.parse().map_err(|_| bad())?)?),
        _ => Err(bad()),
    }
}

/// Serialized unit ball; the group is implied by the kind except for Euclidean balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BallFile {
    Heisenberg(HeisenbergBall),
    Euclidean { group: String, radius: f64 },
    YRegion(YRegion),
    Fractal { params: FractalBallParams, profile: FractalProfile },
    Remark,
}

pub type DynBall = Box<dyn Ball + Send>;

impl BallFile {
    /// Group and membership predicate; re-runs the constructors' validation.
    pub fn instantiate(&self) -> Result<(GradedGroup, DynBall)> {
        Ok(match self {
            BallFile::Heisenberg(b) => {
                let b = HeisenbergBall::with_offset(b.profile.clone(), b.domain.clone(), b.offset)?;
                (GradedGroup::heisenberg(), Box::new(b))
            }
            BallFile::Euclidean { group, radius } => {
                let g = resolve_group(group)?;
                let b = euclidean_ball_candidate(&g, *radius)?;
                (g, Box::new(b))
            }
            BallFile::YRegion(y) => (GradedGroup::abelian_plane(2, 2), Box::new(*y)),
            BallFile::Fractal { params, profile } => {
                (GradedGroup::abelian_plane(2, 2), Box::new(build_fractal_ball(params.clone(), profile.clone())?))
            }
            BallFile::Remark => (GradedGroup::abelian_plane(2, 2), Box::new(RemarkBall)),
        })
    }
}

pub fn load_ball(path: &Path) -> Result<(BallFile, GradedGroup, DynBall)> {
    let file: BallFile = read_json(path)?;
    let (g, b) = file.instantiate()?;
    Ok((file, g, b))
}

/// `{m, values, norm}`; the norm defaults to Euclidean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlFile {
    pub m: usize,
    pub values: Vec<Vec<f64>>,
    #[serde(default = "euclidean")]
    pub norm: V1Norm,
}

fn euclidean() -> V1Norm {
    V1Norm::Euclidean
}

impl ControlFile {
    pub fn to_control(&self) -> Result<ControlSignal> {
        if self.m != self.values.len() {
            return Err(CliError::usage(format!("control declares m = {} but has {} segments", self.m, self.values.len())));
        }
        let norm = match &self.norm {
            V1Norm::Polygon { vertices } => V1Norm::polygon(vertices.clone())?,
            n => n.clone(),
        };
        Ok(ControlSignal::new(self.values.clone(), norm)?)
    }

    pub fn from_control(u: &ControlSignal) -> Self {
        Self { m: u.m(), values: u.values.clone(), norm: u.norm.clone() }
    }
}

/// `euclidean`, `l1` or `linf`.
pub fn parse_norm(text: &str) -> Result<V1Norm> {
    match text {
        "euclidean" | "l2" => Ok(V1Norm::Euclidean),
        "l1" => Ok(V1Norm::L1),
        "linf" => Ok(V1Norm::LInf),
        _ => Err(CliError::usage(format!("unknown first-layer norm {text:?} (euclidean, l1, linf)"))),
    }
}

/// Comma-separated coordinates.
pub fn parse_point(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',').map(|s| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"))).collect()
}

/// CSV with a header row; floats use the JSON float format.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| if v.is_finite() { crate::json::format_f64(v) } else { v.to_string() }))?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_file_round_trip() {
        for name in ["heisenberg", "engel-x-line", "plane-12", "abelian:1,2,3"] {
            let spec = load_spec(name).unwrap();
            let text = serde_json::to_string(&GroupFile::from_spec(&spec)).unwrap();
            let back: GroupFile = serde_json::from_str(&text).unwrap();
            assert_eq!(back.to_spec().unwrap(), spec);
        }
    }

    #[test]
    fn rational_weights_and_unknown_fields() {
        let f: GroupFile = serde_json::from_str(r#"{"dim":2,"weights":[1,"3/2"],"brackets":[]}"#).unwrap();
        assert_eq!(f.to_spec().unwrap().weights[1], Weight::new(3, 2));
        assert!(serde_json::from_str::<GroupFile>(r#"{"dim":1,"weights":[1],"extra":0}"#).is_err());
    }

    #[test]
    fn ball_files_instantiate() {
        let text = r#"{"kind":"euclidean","group":"heisenberg","radius":0.5}"#;
        let f: BallFile = serde_json::from_str(text).unwrap();
        let (g, b) = f.instantiate().unwrap();
        assert_eq!((g.dim(), b.dim()), (3, 3));
        let f: BallFile = serde_json::from_str(r#"{"kind":"y-region","eps":1.0,"beta":1.0,"c":1.0}"#).unwrap();
        assert!(f.instantiate().unwrap().1.contains(&[0.0, 0.0]));
    }

    #[test]
    fn control_file_checks_m() {
        let f: ControlFile = serde_json::from_str(r#"{"m":2,"values":[[1,0],[0,1]]}"#).unwrap();
        assert_eq!(f.to_control().unwrap().m(), 2);
        let f: ControlFile = serde_json::from_str(r#"{"m":3,"values":[[1,0]],"norm":"l1"}"#).unwrap();
        assert!(f.to_control().is_err());
    }
}
