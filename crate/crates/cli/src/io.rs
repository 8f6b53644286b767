//! Instance files. JSON is the primary format:
//! `{"kind":"point_sequence","points":[[x,y],...]}` or
//! `{"kind":"curve","vertices":[[x,y],...]}`. A `.csv` file holds one `x,y`
//! pair per line and gets its kind from the flag it was passed with.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use shortcut_frechet::{Point, PointSeq, PolyCurve};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    /// Indices of points that were replaced by outliers.
    #[serde(default)]
    pub outliers: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceFile {
    PointSequence {
        points: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metadata: Option<Metadata>,
    },
    Curve {
        vertices: Vec<[f64; 2]>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    PointSequence,
    Curve,
}

fn to_points(raw: &[[f64; 2]]) -> Vec<Point> {
    raw.iter().map(|&[x, y]| Point::new(x, y)).collect()
}

pub fn coords(points: &[Point]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p.x, p.y]).collect()
}

impl InstanceFile {
    pub fn sequence(points: &[Point]) -> Self {
        InstanceFile::PointSequence { points: coords(points), metadata: None }
    }

    pub fn curve(vertices: &[Point]) -> Self {
        InstanceFile::Curve { vertices: coords(vertices) }
    }

    pub fn into_point_seq(self) -> Result<PointSeq> {
        match self {
            InstanceFile::PointSequence { points, .. } => Ok(PointSeq::new(to_points(&points))?),
            InstanceFile::Curve { .. } => bail!("expected a point sequence, found a curve"),
        }
    }

    pub fn into_curve(self) -> Result<PolyCurve> {
        match self {
            InstanceFile::Curve { vertices } => Ok(PolyCurve::new(to_points(&vertices))?),
            InstanceFile::PointSequence { .. } => bail!("expected a curve, found a point sequence"),
        }
    }
}

fn read_csv(path: &Path) -> Result<Vec<[f64; 2]>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let (x, y): (f64, f64) = rec?;
        out.push([x, y]);
    }
    Ok(out)
}

pub fn read_instance(path: &Path, kind: Kind) -> Result<InstanceFile> {
    let ctx = || format!("reading {}", path.display());
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let raw = read_csv(path).with_context(ctx)?;
        return Ok(match kind {
            Kind::PointSequence => InstanceFile::PointSequence { points: raw, metadata: None },
            Kind::Curve => InstanceFile::Curve { vertices: raw },
        });
    }
    let text = fs::read_to_string(path).with_context(ctx)?;
    serde_json::from_str(&text).with_context(ctx)
}

pub fn read_point_seq(path: &Path) -> Result<PointSeq> {
    read_instance(path, Kind::PointSequence)?
        .into_point_seq()
        .with_context(|| format!("in {}", path.display()))
}

pub fn read_curve(path: &Path) -> Result<PolyCurve> {
    read_instance(path, Kind::Curve)?
        .into_curve()
        .with_context(|| format!("in {}", path.display()))
}

pub fn write_instance(path: &Path, inst: &InstanceFile) -> Result<()> {
    let text = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let raw = match inst {
            InstanceFile::PointSequence { points, .. } => points,
            InstanceFile::Curve { vertices } => vertices,
        };
        raw.iter().map(|[x, y]| format!("{x},{y}\n")).collect()
    } else {
        serde_json::to_string(inst)? + "\n"
    };
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
