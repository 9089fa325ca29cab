use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rate function sampled at cell centers.
///
/// In TOML: a number, an inline array (one value per cell), `{ amplitude, rate }` for
/// `amplitude * exp(-rate * (x - x0))`, `{ at_start, slope }` for `at_start + slope * (x - x0)`,
/// or `{ file = "path.csv" }` with one value per line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Profile {
    Constant(f64),
    Table(Vec<f64>),
    Exponential { amplitude: f64, rate: f64 },
    Affine { at_start: f64, slope: f64 },
    File { file: PathBuf },
}

impl Profile {
    /// Values at `centers`; `x0` is the left end of the domain and `base` resolves relative
    /// file paths.
    pub fn resolve(&self, centers: &[f64], x0: f64, base: Option<&Path>) -> Result<Vec<f64>> {
        let out = match self {
            Profile::Constant(c) => vec![*c; centers.len()],
            Profile::Table(v) => {
                check_len(v.len(), centers.len())?;
                v.clone()
            }
            Profile::Exponential { amplitude, rate } => {
                centers.iter().map(|x| amplitude * (-rate * (x - x0)).exp()).collect()
            }
            Profile::Affine { at_start, slope } => centers.iter().map(|x| at_start + slope * (x - x0)).collect(),
            Profile::File { file } => {
                let path = match base {
                    Some(b) if file.is_relative() => b.join(file),
                    _ => file.clone(),
                };
                let v = read_column(&path)?;
                check_len(v.len(), centers.len())?;
                v
            }
        };
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(out)
    }
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::Parameter(format!(
            "tabulated profile has {found} values, grid has {expected} cells"
        )));
    }
    Ok(())
}

/// One number per record; a non-numeric first record is taken as a header.
pub fn read_column(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = rec.get(0).unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::Parse(format!(
                    "{}: line {} `{field}` is not a number",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Uniform cell centers on `(a, b)`.
pub fn cell_centers(a: f64, b: f64, cells: usize) -> Vec<f64> {
    let w = (b - a) / cells as f64;
    (0..cells).map(|j| a + (j as f64 + 0.5) * w).collect()
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    #[test]
    fn shapes() {
        let c = cell_centers(1.0, 3.0, 4);
        assert_eq!(c, vec![1.25, 1.75, 2.25, 2.75]);
        assert_eq!(Profile::Constant(2.0).resolve(&c, 1.0, None).unwrap(), vec![2.0; 4]);
        let a = Profile::Affine { at_start: 1.0, slope: 2.0 }.resolve(&c, 1.0, None).unwrap();
        assert_eq!(a, vec![1.5, 2.5, 3.5, 4.5]);
        let e = Profile::Exponential { amplitude: 2.0, rate: 1.0 }.resolve(&c, 1.0, None).unwrap();
        assert!((e[0] - 2.0 * (-0.25f64).exp()).abs() < 1e-15);
        assert!(Profile::Table(vec![1.0]).resolve(&c, 1.0, None).is_err());
    }

    #[test]
    fn toml_forms() {
        #[derive(Deserialize)]
        struct T {
            a: Profile,
            b: Profile,
            c: Profile,
            d: Profile,
            e: Profile,
        }
        let t: T = toml::from_str(
            "a = 0.5\nb = [1.0, 2.0]\nc = { amplitude = 1.0, rate = 2.0 }\nd = { at_start = 0.1, slope = 0.0 }\ne = { file = \"x.csv\" }\n",
        )
        .unwrap();
        assert_eq!(t.a, Profile::Constant(0.5));
        assert_eq!(t.b, Profile::Table(vec![1.0, 2.0]));
        assert_eq!(t.c, Profile::Exponential { amplitude: 1.0, rate: 2.0 });
        assert_eq!(t.d, Profile::Affine { at_start: 0.1, slope: 0.0 });
        assert_eq!(t.e, Profile::File { file: "x.csv".into() });
    }

    #[test]
    fn file_profile() {
        let dir = std::env::temp_dir().join(format!("posmild-profile-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut f = std::fs::File::create(dir.join("mu.csv")).unwrap();
        writeln!(f, "mu\n0.1\n0.2\n0.3").unwrap();
        let p = Profile::File { file: "mu.csv".into() };
        let c = cell_centers(0.0, 3.0, 3);
        assert_eq!(p.resolve(&c, 0.0, Some(&dir)).unwrap(), vec![0.1, 0.2, 0.3]);
        assert!(p.resolve(&c[..2], 0.0, Some(&dir)).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
