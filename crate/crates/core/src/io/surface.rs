use crate::cascade::{SurfaceGrid, SurfacePoint};

use super::{fmt6, ConfigError, RowError};

/// `x,y,score` rows in grid order, six decimals.
pub fn emit_surface_csv(grid: &SurfaceGrid) -> String {
    let mut out = String::with_capacity(24 * (grid.points.len() + 1));
    out.push_str("x,y,score\n");
    for p in &grid.points {
        out.push_str(&fmt6(p.x));
        out.push(',');
        out.push_str(&fmt6(p.y));
        out.push(',');
        out.push_str(&fmt6(p.score));
        out.push('\n');
    }
    out
}

pub fn parse_surface_csv(text: &str) -> Result<Vec<SurfacePoint>, ConfigError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "x,y,score")) => {}
        _ => return Err(ConfigError::Header("expected x,y,score".into())),
    }
    let mut points = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let parsed: Option<Vec<f64>> = (cells.len() == 3)
            .then(|| cells.iter().map(|c| c.parse().ok()).collect())
            .flatten();
        match parsed.as_deref() {
            Some(&[x, y, score]) => points.push(SurfacePoint { x, y, score }),
            _ => errors.push(RowError {
                line: i + 1,
                column: None,
                message: format!("malformed row {line:?}"),
            }),
        }
    }
    if errors.is_empty() {
        Ok(points)
    } else {
        Err(ConfigError::Rows(errors))
    }
}
