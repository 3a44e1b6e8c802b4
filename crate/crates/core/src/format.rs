//! Matrix file format.
//!
//! ```json
//! {"rows": 2, "cols": 2, "data": [[1.0, 0.0], [0.5, -1.0], [0.0, 0.0], [1.0, 0.0]]}
//! ```
//!
//! `data` is row-major, one `[re, im]` pair per entry. Readers reject extra
//! fields, non-square shapes, wrong lengths and non-finite values. Doubles are
//! written in shortest round-trip form, so a written matrix re-parses to the
//! same bits.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

pub fn from_json_str(s: &str) -> Result<CMatrix> {
    let file: MatrixFile = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    if file.rows != file.cols {
        return Err(Error::Format(format!(
            "expected a square matrix, got {}x{}",
            file.rows, file.cols
        )));
    }
    if file.rows == 0 {
        return Err(Error::Format("matrix must be at least 1x1".into()));
    }
    if file.data.len() != file.rows * file.cols {
        return Err(Error::Format(format!(
            "data has {} entries, expected {}",
            file.data.len(),
            file.rows * file.cols
        )));
    }
    let entries = file.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
    CMatrix::from_vec(file.rows, file.cols, entries).map_err(|e| Error::Format(e.to_string()))
}

pub fn to_json_string(m: &CMatrix) -> Result<String> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let file = MatrixFile {
        rows: m.rows(),
        cols: m.cols(),
        data: m.data().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_string(&file).map_err(|e| Error::Format(e.to_string()))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<CMatrix> {
    from_json_str(&fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &CMatrix) -> Result<()> {
    let mut text = to_json_string(m)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_reference_shape() {
        let m =
            from_json_str(r#"{"rows":2,"cols":2,"data":[[1,0],[0.5,-1],[0,0],[1e-3,2]]}"#).unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.5, -1.0));
        assert_eq!(m[(1, 1)], C64::new(1e-3, 2.0));
    }

    #[test]
    fn rejects_malformed_files() {
        let bad = [
            r#"{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0]]}"#,
            r#"{"rows":1,"cols":2,"data":[[1,0],[0,0]]}"#,
            r#"{"rows":1,"cols":1,"data":[[1,0,0]]}"#,
            r#"{"rows":1,"cols":1,"data":[[1]]}"#,
            r#"{"rows":1,"cols":1,"data":[[1,0]],"extra":true}"#,
            r#"{"rows":1,"cols":1}"#,
            r#"{"rows":0,"cols":0,"data":[]}"#,
            r#"{"rows":1,"cols":1,"data":[[1e400,0]]}"#,
            r#"{"rows":1,"cols":1,"data":[["1",0]]}"#,
            r#"[1,2]"#,
        ];
        for text in bad {
            assert!(from_json_str(text).is_err(), "accepted {text}");
        }
    }

    proptest! {
        #[test]
        fn writes_reparse_bit_identically(
            n in 1usize..5,
            seed in proptest::collection::vec((any::<f64>(), any::<f64>()), 16),
        ) {
            let entries: Vec<C64> = seed
                .iter()
                .take(n * n)
                .map(|&(re, im)| {
                    let fix = |x: f64| if x.is_finite() { x } else { 0.0 };
                    C64::new(fix(re), fix(im))
                })
                .collect();
            let m = CMatrix::from_vec(n, n, entries).unwrap();
            let back = from_json_str(&to_json_string(&m).unwrap()).unwrap();
            for (a, b) in m.data().iter().zip(back.data()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }
}
