//! CSV tables whose rows all start with `seed,method,version`.

use crate::error::CliError;
use crate::manifest::VERSION;

pub struct Table {
    w: csv::Writer<Vec<u8>>,
    width: usize,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = ["seed", "method", "version"].iter().copied().chain(columns.iter().copied()).collect();
        w.write_record(&header).expect("in-memory write");
        Table { w, width: columns.len() }
    }

    pub fn row(&mut self, seed: u64, method: &str, cells: &[String]) {
        assert_eq!(cells.len(), self.width, "row width");
        let mut rec = vec![seed.to_string(), method.to_string(), VERSION.to_string()];
        rec.extend(cells.iter().cloned());
        self.w.write_record(&rec).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Result<Vec<u8>, CliError> {
        self.w.into_inner().map_err(|e| CliError::runtime(e.error()))
    }
}

/// Round-trip float formatting.
pub fn f(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(f).unwrap_or_default()
}

/// Reads a `n0,n1[,n2],tau` table.
pub fn read_tau_table(text: &str, dim: usize, field: &str) -> Result<(Vec<Vec<f64>>, Vec<f64>), CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| CliError::invalid(field, e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::invalid(field, format!("missing column {name}")))
    };
    let ncols: Vec<usize> = (0..dim).map(|k| col(&format!("n{k}"))).collect::<Result<_, _>>()?;
    let tcol = col("tau")?;
    let (mut dirs, mut vals) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::invalid(field, e.to_string()))?;
        let num = |c: usize| -> Result<f64, CliError> {
            rec.get(c)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|e| CliError::invalid(field, format!("row {}: {e}", i + 2)))
        };
        dirs.push(ncols.iter().map(|&c| num(c)).collect::<Result<Vec<_>, _>>()?);
        vals.push(num(tcol)?);
    }
    if dirs.is_empty() {
        return Err(CliError::invalid(field, "table has no rows"));
    }
    Ok((dirs, vals))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_prefixed() {
        let mut t = Table::new(&["a", "b"]);
        t.row(3, "m", &[f(1.0), opt(None)]);
        let s = String::from_utf8(t.into_bytes().unwrap()).unwrap();
        assert_eq!(s, format!("seed,method,version,a,b\n3,m,{VERSION},1.0,\n"));
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 12345.678] {
            assert_eq!(f(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn tau_tables() {
        let (d, v) = read_tau_table("direction,n0,n1,tau\n1:0,1,0,0.5\nx,0.6,0.8,2\n", 2, "t").unwrap();
        assert_eq!(d, vec![vec![1.0, 0.0], vec![0.6, 0.8]]);
        assert_eq!(v, vec![0.5, 2.0]);
        assert!(read_tau_table("n0,tau\n1,1\n", 2, "t").is_err());
        assert!(read_tau_table("n0,n1,tau\n", 2, "t").is_err());
        assert!(read_tau_table("n0,n1,tau\n1,0,abc\n", 2, "t").is_err());
    }
}
