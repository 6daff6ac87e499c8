//! File formats: spaces, weights, functions, step functions, decomposition
//! exports and K-curve CSV. Everything is UTF-8 JSON with decimal reals
//! (serde_json round-trips every f64 exactly), except curves, which are
//! plain CSV.

use serde::{Deserialize, Serialize};

use crate::calculus::SobolevFunction;
use crate::czd::{BallType, CZDecomposition};
use crate::error::{Error, Result};
use crate::kfunc::KCurve;
use crate::rearrange::StepFunction;
use crate::space::{GradientMode, GridInfo, MeasureMode, Metric, PointField, Space};
use crate::weights::{Weight, WeightKind};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointsSpec {
    Count(usize),
    Coords(Vec<Vec<f64>>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MetricSpec {
    Name(String),
    Matrix { matrix: Vec<Vec<f64>> },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MeasureSpec {
    Name(String),
    Values(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    dim: usize,
    extents: Vec<(f64, f64)>,
    spacing: f64,
    shape: Vec<usize>,
    measure_mode: String,
}

#[derive(Serialize, Deserialize)]
struct SpaceFile {
    points: PointsSpec,
    metric: MetricSpec,
    measure: MeasureSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    adjacency: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridSpec>,
}

pub fn space_to_json(space: &Space) -> String {
    let points = match space.coords() {
        Some(c) => PointsSpec::Coords(c.to_vec()),
        None => PointsSpec::Count(space.len()),
    };
    let metric = match space.metric() {
        Metric::Euclidean => MetricSpec::Name("euclidean".into()),
        Metric::WordL1 => MetricSpec::Name("word-l1".into()),
        Metric::Matrix(m) => {
            let n = space.len();
            MetricSpec::Matrix {
                matrix: (0..n).map(|i| m[i * n..(i + 1) * n].to_vec()).collect(),
            }
        }
    };
    let file = SpaceFile {
        points,
        metric,
        measure: MeasureSpec::Values(space.measures().to_vec()),
        adjacency: space.adjacency().map(|a| a.to_vec()),
        mode: Some(
            match space.gradient_mode() {
                GradientMode::GridCentral => "grid-central",
                GradientMode::GraphUpper => "graph-upper",
            }
            .into(),
        ),
        grid: space.grid_info().map(|g| GridSpec {
            dim: g.dim,
            extents: g.extents.clone(),
            spacing: g.spacing,
            shape: g.shape.clone(),
            measure_mode: match g.measure_mode {
                MeasureMode::Counting => "counting".into(),
                MeasureMode::CellVolume => "cell".into(),
            },
        }),
    };
    serde_json::to_string_pretty(&file).expect("space serialization cannot fail")
}

pub fn space_from_json(text: &str) -> Result<Space> {
    let file: SpaceFile = serde_json::from_str(text)?;
    let coords = match file.points {
        PointsSpec::Coords(c) => Some(c),
        PointsSpec::Count(_) => None,
    };
    let n = match (&coords, &file.metric) {
        (Some(c), _) => c.len(),
        (None, MetricSpec::Matrix { matrix }) => matrix.len(),
        (None, MetricSpec::Name(_)) => {
            return Err(Error::Format(
                "coordinate-free spaces need an explicit distance matrix".into(),
            ))
        }
    };
    let metric = match file.metric {
        MetricSpec::Name(name) => match name.as_str() {
            "euclidean" => Metric::Euclidean,
            "word-l1" => Metric::WordL1,
            other => return Err(Error::Format(format!("unknown metric '{other}'"))),
        },
        MetricSpec::Matrix { matrix } => {
            let mut flat = Vec::with_capacity(n * n);
            if matrix.len() != n {
                return Err(Error::Format("distance matrix row count mismatch".into()));
            }
            for row in &matrix {
                if row.len() != n {
                    return Err(Error::Format("distance matrix is not square".into()));
                }
                flat.extend_from_slice(row);
            }
            Metric::Matrix(flat)
        }
    };
    let grid = match file.grid {
        Some(g) => Some(GridInfo {
            dim: g.dim,
            extents: g.extents,
            spacing: g.spacing,
            shape: g.shape,
            measure_mode: match g.measure_mode.as_str() {
                "counting" => MeasureMode::Counting,
                "cell" => MeasureMode::CellVolume,
                other => return Err(Error::Format(format!("unknown measure mode '{other}'"))),
            },
        }),
        None => None,
    };
    let measure = match file.measure {
        MeasureSpec::Values(v) => {
            if v.len() != n {
                return Err(Error::Format("measure length mismatch".into()));
            }
            v
        }
        MeasureSpec::Name(name) => match name.as_str() {
            "counting" => vec![1.0; n],
            "cell" => {
                let g = grid.as_ref().ok_or_else(|| {
                    Error::Format("cell measure needs grid metadata".into())
                })?;
                vec![g.spacing.powi(g.dim as i32); n]
            }
            other => return Err(Error::Format(format!("unknown measure '{other}'"))),
        },
    };
    let mode = match file.mode.as_deref() {
        Some("grid-central") => GradientMode::GridCentral,
        Some("graph-upper") => GradientMode::GraphUpper,
        None => {
            if grid.is_some() {
                GradientMode::GridCentral
            } else {
                GradientMode::GraphUpper
            }
        }
        Some(other) => return Err(Error::Format(format!("unknown gradient mode '{other}'"))),
    };
    Space::new(coords, metric, measure, file.adjacency, mode, grid)
}

#[derive(Serialize, Deserialize)]
struct WeightFile {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coeffs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

pub fn weight_to_json(kind: Option<&WeightKind>, w: &Weight) -> String {
    let mut file = WeightFile {
        kind: "explicit".into(),
        alpha: None,
        coeffs: None,
        field: None,
        s: None,
        values: Some(w.values().to_vec()),
    };
    match kind {
        Some(WeightKind::Power { alpha }) => {
            file.kind = "power".into();
            file.alpha = Some(*alpha);
        }
        Some(WeightKind::Polynomial { coeffs }) => {
            file.kind = "polynomial".into();
            file.coeffs = Some(coeffs.clone());
        }
        Some(WeightKind::Maximal { field, s }) => {
            file.kind = "maximal".into();
            file.field = Some(field.clone());
            file.s = Some(*s);
        }
        Some(WeightKind::Explicit { .. }) | None => {}
    }
    serde_json::to_string_pretty(&file).expect("weight serialization cannot fail")
}

/// Read a weight; returns the sampled values and, when the file carries a
/// symbolic kind, the kind itself (needed for refinement studies).
pub fn weight_from_json(space: &Space, text: &str) -> Result<(Weight, Option<WeightKind>)> {
    let file: WeightFile = serde_json::from_str(text)?;
    let kind = match file.kind.as_str() {
        "power" => Some(WeightKind::Power {
            alpha: file
                .alpha
                .ok_or_else(|| Error::Format("power weight needs 'alpha'".into()))?,
        }),
        "polynomial" => Some(WeightKind::Polynomial {
            coeffs: file
                .coeffs
                .ok_or_else(|| Error::Format("polynomial weight needs 'coeffs'".into()))?,
        }),
        "maximal" => Some(WeightKind::Maximal {
            field: file
                .field
                .ok_or_else(|| Error::Format("maximal weight needs 'field'".into()))?,
            s: file.s.ok_or_else(|| Error::Format("maximal weight needs 's'".into()))?,
        }),
        "explicit" => None,
        other => return Err(Error::Format(format!("unknown weight kind '{other}'"))),
    };
    let w = match (&kind, file.values) {
        (_, Some(values)) => {
            if values.len() != space.len() {
                return Err(Error::Format("weight values length mismatch".into()));
            }
            Weight::new(PointField::new(values))?
        }
        (Some(k), None) => crate::weights::make_weight(k, space)?,
        (None, None) => return Err(Error::Format("explicit weight needs 'values'".into())),
    };
    Ok((w, kind))
}

#[derive(Serialize, Deserialize)]
struct FunctionFile {
    values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gradient: Option<Vec<f64>>,
}

pub fn function_to_json(u: &SobolevFunction) -> String {
    serde_json::to_string_pretty(&FunctionFile {
        values: u.values.values().to_vec(),
        gradient: Some(u.gradient.values().to_vec()),
    })
    .expect("function serialization cannot fail")
}

/// Read a function; the gradient is recomputed when absent.
pub fn function_from_json(space: &Space, text: &str) -> Result<SobolevFunction> {
    let file: FunctionFile = serde_json::from_str(text)?;
    if file.values.len() != space.len() {
        return Err(Error::Format("function values length mismatch".into()));
    }
    let values = PointField::new(file.values);
    match file.gradient {
        Some(g) => {
            if g.len() != space.len() {
                return Err(Error::Format("gradient length mismatch".into()));
            }
            if g.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                return Err(Error::Format("gradient entries must be nonnegative".into()));
            }
            Ok(SobolevFunction::with_gradient(values, PointField::new(g)))
        }
        None => Ok(SobolevFunction::from_values(space, values)),
    }
}

#[derive(Serialize, Deserialize)]
struct StepFile {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

pub fn step_to_json(sf: &StepFunction) -> String {
    serde_json::to_string_pretty(&StepFile {
        breaks: sf.breaks().to_vec(),
        values: sf.plateau_values().to_vec(),
    })
    .expect("step serialization cannot fail")
}

pub fn step_from_json(text: &str) -> Result<StepFunction> {
    let file: StepFile = serde_json::from_str(text)?;
    StepFunction::from_pieces(file.breaks, file.values)
}

#[derive(Serialize)]
struct PieceExport {
    center: usize,
    radius: f64,
    ball_type: u8,
    mass: f64,
    members: Vec<usize>,
    norm_r: f64,
    norm_s: f64,
    values: Vec<f64>,
}

#[derive(Serialize)]
struct DecompositionExport {
    alpha: f64,
    r: f64,
    s: f64,
    p: f64,
    q: String,
    homogeneous: bool,
    omega_full: bool,
    omega: Vec<usize>,
    complement: Vec<usize>,
    g_values: Vec<f64>,
    g_gradient: Vec<f64>,
    pieces: Vec<PieceExport>,
}

pub fn decomposition_to_json(space: &Space, v: &Weight, d: &CZDecomposition) -> String {
    let pieces = d
        .pieces
        .iter()
        .map(|p| PieceExport {
            center: p.ball.center,
            radius: p.ball.radius,
            ball_type: match p.ball_type {
                BallType::One => 1,
                BallType::Two => 2,
            },
            mass: p.ball.mass,
            members: p.ball.members.clone(),
            norm_r: crate::calculus::sobolev_norm(space, v, &p.b, d.params.r, d.params.homogeneous),
            norm_s: crate::calculus::sobolev_norm(space, v, &p.b, d.params.s, d.params.homogeneous),
            values: p.b.values.values().to_vec(),
        })
        .collect();
    let export = DecompositionExport {
        alpha: d.alpha,
        r: d.params.r,
        s: d.params.s,
        p: d.params.p,
        q: if d.params.q.is_finite() {
            format!("{}", d.params.q)
        } else {
            "inf".into()
        },
        homogeneous: d.params.homogeneous,
        omega_full: d.omega_full,
        omega: d.omega.clone(),
        complement: d.complement.clone(),
        g_values: d.g.values.values().to_vec(),
        g_gradient: d.g.gradient.values().to_vec(),
        pieces,
    };
    serde_json::to_string_pretty(&export).expect("decomposition serialization cannot fail")
}

/// Plot-ready CSV: `t,K,method`, one row per curve point.
pub fn kcurve_to_csv(curve: &KCurve) -> String {
    let mut out = String::from("t,K,method\n");
    for p in &curve.points {
        out.push_str(&format!("{:.12e},{:.12e},{}\n", p.t, p.k, p.method));
    }
    out
}

pub fn read_to_string(path: &std::path::Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn write_string(path: &std::path::Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_cayley_z2, build_grid, MeasureMode};

    #[test]
    fn space_round_trip_grid() {
        let s = build_grid(2, &[(0.0, 1.0), (0.0, 1.0)], 0.5, MeasureMode::CellVolume).unwrap();
        let json = space_to_json(&s);
        let s2 = space_from_json(&json).unwrap();
        assert_eq!(s.len(), s2.len());
        for i in 0..s.len() {
            assert_eq!(s.measure(i), s2.measure(i));
            for j in 0..s.len() {
                assert_eq!(s.distance(i, j), s2.distance(i, j));
            }
        }
        assert!(s2.grid_info().is_some());
        assert_eq!(s2.gradient_mode(), s.gradient_mode());
    }

    #[test]
    fn space_round_trip_cayley() {
        let s = build_cayley_z2(2).unwrap();
        let s2 = space_from_json(&space_to_json(&s)).unwrap();
        assert_eq!(s2.len(), 13);
        for i in 0..13 {
            for j in 0..13 {
                assert_eq!(s.distance(i, j), s2.distance(i, j));
            }
        }
    }

    #[test]
    fn weight_round_trip_keeps_kind() {
        let s = build_grid(1, &[(-1.0, 1.0)], 0.5, MeasureMode::Counting).unwrap();
        let kind = WeightKind::Polynomial { coeffs: vec![1.0, 0.0, 1.0] };
        let w = crate::weights::make_weight(&kind, &s).unwrap();
        let json = weight_to_json(Some(&kind), &w);
        let (w2, kind2) = weight_from_json(&s, &json).unwrap();
        assert_eq!(w.values(), w2.values());
        assert!(matches!(kind2, Some(WeightKind::Polynomial { .. })));
    }

    #[test]
    fn function_round_trip_and_gradient_recompute() {
        let s = build_grid(1, &[(0.0, 4.0)], 1.0, MeasureMode::Counting).unwrap();
        let u = SobolevFunction::from_values(
            &s,
            PointField::new(vec![0.0, 1.0, 4.0, 9.0, 16.0]),
        );
        let json = function_to_json(&u);
        let u2 = function_from_json(&s, &json).unwrap();
        assert_eq!(u.values.values(), u2.values.values());
        assert_eq!(u.gradient.values(), u2.gradient.values());

        // Drop the gradient; it must be recomputed identically.
        let bare = serde_json::json!({ "values": u.values.values() }).to_string();
        let u3 = function_from_json(&s, &bare).unwrap();
        assert_eq!(u.gradient.values(), u3.gradient.values());
    }

    #[test]
    fn step_round_trip() {
        let sf = StepFunction::from_pieces(vec![0.0, 0.5, 2.0], vec![3.0, 1.0]).unwrap();
        let sf2 = step_from_json(&step_to_json(&sf)).unwrap();
        assert_eq!(sf, sf2);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(space_from_json("{}").is_err());
        assert!(space_from_json(r#"{"points": 3, "metric": "euclidean", "measure": "counting"}"#).is_err());
        let s = build_grid(1, &[(0.0, 2.0)], 1.0, MeasureMode::Counting).unwrap();
        assert!(weight_from_json(&s, r#"{"kind": "power"}"#).is_err());
        assert!(function_from_json(&s, r#"{"values": [1.0]}"#).is_err());
    }
}
