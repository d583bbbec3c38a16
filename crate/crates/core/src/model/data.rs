use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Response and candidate covariates. `x` is stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    x: Vec<f64>,
    n: usize,
    p: usize,
    column_names: Vec<String>,
    centered: bool,
}

/// Which CSV column holds the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseSelector {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for ResponseSelector {
    type Err = std::convert::Infallible;

    /// Plain integers select by position, anything else by header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.trim().parse::<usize>() {
            Ok(i) => ResponseSelector::Index(i),
            Err(_) => ResponseSelector::Name(s.trim().to_string()),
        })
    }
}

impl std::fmt::Display for ResponseSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResponseSelector::Name(s) => f.write_str(s),
            ResponseSelector::Index(i) => write!(f, "{i}"),
        }
    }
}

impl Dataset {
    /// Build from a response vector and row-major design rows.
    pub fn from_rows(y: Vec<f64>, rows: &[Vec<f64>], column_names: Option<Vec<String>>) -> Result<Self> {
        let n = y.len();
        if rows.len() != n {
            return Err(Error::Dimension(format!("{} rows for {} responses", rows.len(), n)));
        }
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Dimension("ragged design rows".into()));
        }
        let mut x = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                x[j * n + i] = *v;
            }
        }
        Self::from_columns(y, x, p, column_names)
    }

    /// Build from a column-major `n × p` buffer.
    pub fn from_columns(y: Vec<f64>, x: Vec<f64>, p: usize, column_names: Option<Vec<String>>) -> Result<Self> {
        let n = y.len();
        if n < 3 {
            return Err(Error::Data(format!("need at least 3 observations, got {n}")));
        }
        if p < 1 {
            return Err(Error::Data("need at least one candidate variable".into()));
        }
        if x.len() != n * p {
            return Err(Error::Dimension(format!("design has {} entries, expected {}", x.len(), n * p)));
        }
        if y.iter().chain(&x).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite value in data".into()));
        }
        let column_names = match column_names {
            Some(names) if names.len() != p => {
                return Err(Error::Dimension(format!("{} names for {} columns", names.len(), p)))
            }
            Some(names) => names,
            None => (0..p).map(|j| format!("x{j}")).collect(),
        };
        Ok(Self {
            y,
            x,
            n,
            p,
            column_names,
            centered: false,
        })
    }

    /// Load a headered CSV; every column other than the response is a candidate.
    pub fn from_csv_path(path: impl AsRef<Path>, response: &ResponseSelector) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Data(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file, response)
    }

    pub fn from_csv_reader<R: Read>(reader: R, response: &ResponseSelector) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Data(e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let resp_idx = match response {
            ResponseSelector::Index(i) if *i < headers.len() => *i,
            ResponseSelector::Index(i) => {
                return Err(Error::Data(format!("response index {i} out of range ({} columns)", headers.len())))
            }
            ResponseSelector::Name(name) => headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Data(format!("no column named {name:?}")))?,
        };
        let names: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != resp_idx)
            .map(|(_, h)| h.clone())
            .collect();
        let p = names.len();
        let mut y = Vec::new();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); p];
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Data(e.to_string()))?;
            if rec.len() != headers.len() {
                return Err(Error::Data(format!("row {} has {} fields, expected {}", line + 2, rec.len(), headers.len())));
            }
            let mut k = 0;
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Data(format!("row {}, column {:?}: {:?} is not numeric", line + 2, headers[j], field))
                })?;
                if j == resp_idx {
                    y.push(v);
                } else {
                    cols[k].push(v);
                    k += 1;
                }
            }
        }
        let x: Vec<f64> = cols.into_iter().flatten().collect();
        Self::from_columns(y, x, p, Some(names))
    }

    /// Subtract column means from `y` and each column of `X`.
    pub fn centered(mut self) -> Self {
        let n = self.n as f64;
        let my = self.y.iter().sum::<f64>() / n;
        self.y.iter_mut().for_each(|v| *v -= my);
        for col in self.x.chunks_mut(self.n) {
            let m = col.iter().sum::<f64>() / n;
            col.iter_mut().for_each(|v| *v -= m);
        }
        self.centered = true;
        self
    }

    /// Center, then scale each covariate column to unit sample variance.
    /// Constant columns are left at zero.
    pub fn standardized(self) -> Self {
        let mut d = self.centered();
        let denom = (d.n - 1) as f64;
        for col in d.x.chunks_mut(d.n) {
            let sd = (col.iter().map(|v| v * v).sum::<f64>() / denom).sqrt();
            if sd > 0.0 {
                col.iter_mut().for_each(|v| *v /= sd);
            }
        }
        d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.x[j * self.n..(j + 1) * self.n]
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Row-major copy of the design, for writing out.
    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.p).map(|j| self.x[j * self.n + i]).collect()
    }

    /// Write as CSV with the response in the first column named `y`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Data(e.to_string());
        let mut header = vec!["y".to_string()];
        header.extend(self.column_names.iter().cloned());
        wtr.write_record(&header).map_err(io)?;
        for i in 0..self.n {
            let mut rec = vec![format!("{:?}", self.y[i])];
            rec.extend(self.row(i).iter().map(|v| format!("{v:?}")));
            wtr.write_record(&rec).map_err(io)?;
        }
        wtr.flush().map_err(|e| Error::Data(e.to_string()))?;
        Ok(())
    }

    /// Same data with `y` multiplied by `c`.
    pub fn with_scaled_response(&self, c: f64) -> Self {
        let mut d = self.clone();
        d.y.iter_mut().for_each(|v| *v *= c);
        d
    }

    /// Same data with column `j` multiplied by `c`.
    pub fn with_scaled_column(&self, j: usize, c: f64) -> Self {
        let mut d = self.clone();
        let n = d.n;
        d.x[j * n..(j + 1) * n].iter_mut().for_each(|v| *v *= c);
        d
    }

    /// Column `j` of the result is column `k` of `self` where `perm[k] = j`.
    pub fn with_permuted_columns(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.p);
        let mut d = self.clone();
        for (k, &j) in perm.iter().enumerate() {
            d.x[j * self.n..(j + 1) * self.n].copy_from_slice(self.column(k));
            d.column_names[j] = self.column_names[k].clone();
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "a,resp,b\n1,2,3\n2,4,5\n3,7,1\n4,1,1\n";

    #[test]
    fn csv_by_name_and_index() {
        let d = Dataset::from_csv_reader(CSV.as_bytes(), &"resp".parse().unwrap()).unwrap();
        assert_eq!(d.y(), &[2.0, 4.0, 7.0, 1.0]);
        assert_eq!(d.column_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(d.column(1), &[3.0, 5.0, 1.0, 1.0]);
        let e = Dataset::from_csv_reader(CSV.as_bytes(), &ResponseSelector::Index(1)).unwrap();
        assert_eq!(d, e);
    }

    #[test]
    fn csv_rejects_non_numeric_and_missing() {
        let bad = "y,x\n1,2\n2,oops\n3,4\n";
        assert!(matches!(
            Dataset::from_csv_reader(bad.as_bytes(), &ResponseSelector::Index(0)),
            Err(Error::Data(_))
        ));
        let missing = "y,x\n1,2\n2,\n3,4\n";
        assert!(Dataset::from_csv_reader(missing.as_bytes(), &ResponseSelector::Index(0)).is_err());
        assert!(Dataset::from_csv_reader(CSV.as_bytes(), &"nope".parse().unwrap()).is_err());
    }

    #[test]
    fn too_few_rows() {
        assert!(Dataset::from_rows(vec![1.0, 2.0], &[vec![1.0], vec![2.0]], None).is_err());
    }

    #[test]
    fn centering_zeroes_means() {
        let d = Dataset::from_csv_reader(CSV.as_bytes(), &ResponseSelector::Index(1))
            .unwrap()
            .centered();
        assert!(d.is_centered());
        let scale = d.y().iter().map(|v| v.abs()).sum::<f64>();
        assert!(d.y().iter().sum::<f64>().abs() <= 1e-10 * scale);
        for j in 0..d.p() {
            assert!(d.column(j).iter().sum::<f64>().abs() < 1e-12);
        }
        let s = d.standardized();
        let var: f64 = s.column(0).iter().map(|v| v * v).sum::<f64>() / 3.0;
        assert!((var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let d = Dataset::from_csv_reader(CSV.as_bytes(), &ResponseSelector::Index(1)).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = Dataset::from_csv_reader(buf.as_slice(), &"y".parse().unwrap()).unwrap();
        assert_eq!(d, back);
    }
}
