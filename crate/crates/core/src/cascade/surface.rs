use serde::{Deserialize, Serialize};

use crate::fis::SugenoFis;

use super::CascadeError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub x: f64,
    pub y: f64,
    pub score: f64,
}

/// Scores over a uniform grid of two inputs, row-major with `x` outermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub fis: String,
    pub x_var: String,
    pub y_var: String,
    pub resolution: usize,
    pub points: Vec<SurfacePoint>,
}

impl SurfaceGrid {
    pub fn at(&self, i: usize, j: usize) -> &SurfacePoint {
        &self.points[i * self.resolution + j]
    }
}

pub fn surface_grid<'a, I>(
    fis: &SugenoFis,
    var_x: &str,
    var_y: &str,
    fixed: I,
    resolution: usize,
) -> Result<SurfaceGrid, CascadeError>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let err = |m: String| CascadeError::Surface(m);
    if resolution < 2 {
        return Err(err(format!("resolution {resolution} < 2")));
    }
    if var_x == var_y {
        return Err(err(format!("x and y are both {var_x:?}")));
    }
    let xi = fis
        .input_index(var_x)
        .ok_or_else(|| err(format!("{} has no input {var_x:?}", fis.name())))?;
    let yi = fis
        .input_index(var_y)
        .ok_or_else(|| err(format!("{} has no input {var_y:?}", fis.name())))?;

    let mut base: Vec<Option<f64>> = vec![None; fis.inputs().len()];
    for (name, value) in fixed {
        let idx = fis
            .input_index(name)
            .ok_or_else(|| err(format!("{} has no input {name:?}", fis.name())))?;
        if idx == xi || idx == yi {
            return Err(err(format!("{name:?} is a swept axis and cannot be fixed")));
        }
        base[idx] = Some(value);
    }
    base[xi] = Some(0.0);
    base[yi] = Some(0.0);
    let mut xs = base
        .into_iter()
        .zip(fis.inputs())
        .map(|(v, var)| v.ok_or_else(|| err(format!("no fixed value for {:?}", var.name()))))
        .collect::<Result<Vec<f64>, _>>()?;

    let x_domain = fis.inputs()[xi].domain();
    let y_domain = fis.inputs()[yi].domain();
    let ys: Vec<f64> = y_domain.linspace(resolution).collect();
    let mut points = Vec::with_capacity(resolution * resolution);
    for x in x_domain.linspace(resolution) {
        for &y in &ys {
            xs[xi] = x;
            xs[yi] = y;
            points.push(SurfacePoint {
                x,
                y,
                score: fis.evaluate_at(&xs)?,
            });
        }
    }
    Ok(SurfaceGrid {
        fis: fis.name().to_string(),
        x_var: var_x.to_string(),
        y_var: var_y.to_string(),
        resolution,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{axis_variable, combiner_fis};
    use crate::fis::{Clause, OutputLevels, Rule, TNorm};

    #[test]
    fn combiner_corners() {
        let fis = combiner_fis();
        let grid = surface_grid(&fis, "EC", "MC", [("HI", 0.0)], 2).unwrap();
        let scores: Vec<f64> = grid.points.iter().map(|p| p.score).collect();
        assert_eq!(scores, [0.0, 0.5, 0.5, 1.0]);
    }

    #[test]
    fn cells_match_evaluate() {
        let fis = combiner_fis();
        let grid = surface_grid(&fis, "MC", "EC", [("HI", 0.0)], 17).unwrap();
        for i in 0..17 {
            for j in 0..17 {
                let p = grid.at(i, j);
                let direct = fis.evaluate([("MC", p.x), ("EC", p.y), ("HI", 0.0)]).unwrap();
                assert_eq!(p.score, direct);
            }
        }
    }

    #[test]
    fn constant_fis_is_flat() {
        let a = axis_variable("a");
        let b = axis_variable("b");
        let rules = ["low", "medium", "high"]
            .iter()
            .map(|t| Rule::new(vec![Clause::new("a", *t)], "good"))
            .collect();
        let fis = SugenoFis::new("flat", vec![a, b], OutputLevels::default(), rules, TNorm::Product).unwrap();
        let grid = surface_grid(&fis, "a", "b", [], 9).unwrap();
        assert!(grid.points.iter().all(|p| p.score == 0.75));
    }

    #[test]
    fn argument_errors() {
        let fis = combiner_fis();
        assert!(surface_grid(&fis, "EC", "EC", [("HI", 0.0)], 5).is_err());
        assert!(surface_grid(&fis, "EC", "XX", [("HI", 0.0)], 5).is_err());
        assert!(surface_grid(&fis, "EC", "MC", [], 5).is_err());
        assert!(surface_grid(&fis, "EC", "MC", [("HI", 0.0)], 1).is_err());
        assert!(surface_grid(&fis, "EC", "MC", [("HI", 0.0), ("QQ", 1.0)], 5).is_err());
    }
}
