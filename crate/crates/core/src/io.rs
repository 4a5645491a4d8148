//! File formats. Every writer renders to memory first and lands the file with
//! an atomic rename, so readers never observe a partial file.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::homology::{Feature, PersistenceDiagram};
use crate::inference::{BootstrapResult, SweepResult};
use crate::mixing::MultivariateSeries;

pub const BIN_MAGIC: &[u8; 5] = b"TSTS1";

/// Write `bytes` to a temporary file next to `path`, then rename it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn parse_err(origin: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// `t,ch0,...,chP-1` with one row per sample; `t` is the sample index.
pub fn series_to_csv(series: &MultivariateSeries) -> String {
    let (p, t) = series.data.dim();
    let mut s = String::with_capacity(p * t * 20);
    s.push('t');
    for c in 0..p {
        let _ = write!(s, ",ch{c}");
    }
    s.push('\n');
    for i in 0..t {
        let _ = write!(s, "{i}");
        for c in 0..p {
            let _ = write!(s, ",{}", series.data[[c, i]]);
        }
        s.push('\n');
    }
    s
}

pub fn parse_series_csv(text: &str, origin: &Path, sampling_rate_hz: f64) -> Result<MultivariateSeries> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(origin, 1, "empty file"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols[0] != "t" || cols.len() < 2 {
        return Err(parse_err(origin, 1, "header must be `t,ch0,...`"));
    }
    for (c, name) in cols[1..].iter().enumerate() {
        if *name != format!("ch{c}") {
            return Err(parse_err(origin, 1, format!("column {} should be `ch{c}`, found `{name}`", c + 1)));
        }
    }
    let p = cols.len() - 1;
    let mut values = Vec::new();
    let mut t = 0;
    for (no, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != p + 1 {
            return Err(parse_err(origin, no + 1, format!("expected {} fields, found {}", p + 1, fields.len())));
        }
        for f in &fields[1..] {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| parse_err(origin, no + 1, format!("`{}` is not a number", f.trim())))?;
            values.push(v);
        }
        t += 1;
    }
    if t == 0 {
        return Err(parse_err(origin, 2, "no samples"));
    }
    let rows = Array2::from_shape_vec((t, p), values).expect("row lengths checked");
    MultivariateSeries::new(rows.t().to_owned(), sampling_rate_hz)
}

/// `TSTS1`, then `P` and `T` as little-endian u32, then each channel's `T`
/// samples as little-endian f64, channel after channel.
pub fn series_to_bin(series: &MultivariateSeries) -> Vec<u8> {
    let (p, t) = series.data.dim();
    let mut out = Vec::with_capacity(13 + 8 * p * t);
    out.extend_from_slice(BIN_MAGIC);
    out.extend_from_slice(&(p as u32).to_le_bytes());
    out.extend_from_slice(&(t as u32).to_le_bytes());
    for row in series.data.rows() {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn parse_series_bin(bytes: &[u8], origin: &Path, sampling_rate_hz: f64) -> Result<MultivariateSeries> {
    let err = |msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line: 0,
        msg,
    };
    if bytes.len() < 13 || &bytes[..5] != BIN_MAGIC {
        return Err(err("missing TSTS1 header".into()));
    }
    let p = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let t = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let body = &bytes[13..];
    if p == 0 || t == 0 || body.len() != 8 * p * t {
        return Err(err(format!("header says {p}x{t} samples but body has {} bytes", body.len())));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    MultivariateSeries::new(Array2::from_shape_vec((p, t), values).unwrap(), sampling_rate_hz)
}

/// Read a series in either format, detected from the magic bytes.
pub fn read_series(path: &Path, sampling_rate_hz: f64) -> Result<MultivariateSeries> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(BIN_MAGIC) {
        parse_series_bin(&bytes, path, sampling_rate_hz)
    } else {
        let text = String::from_utf8(bytes).map_err(|e| parse_err(path, 0, format!("not UTF-8 text: {e}")))?;
        parse_series_csv(&text, path, sampling_rate_hz)
    }
}

/// Square matrix with node ids labelling rows and columns.
pub fn matrix_to_csv(m: &Array2<f64>) -> String {
    let n = m.nrows();
    let mut s = String::from("node");
    for j in 0..n {
        let _ = write!(s, ",{j}");
    }
    s.push('\n');
    for i in 0..n {
        let _ = write!(s, "{i}");
        for j in 0..m.ncols() {
            let _ = write!(s, ",{}", m[[i, j]]);
        }
        s.push('\n');
    }
    s
}

pub fn parse_matrix_csv(text: &str, origin: &Path) -> Result<Array2<f64>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(origin, 1, "empty file"))?;
    let n = header.split(',').count() - 1;
    let mut values = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (no, line) in lines.filter(|(_, l)| !l.is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n + 1 || fields[0] != rows.to_string() {
            return Err(parse_err(origin, no + 1, "malformed matrix row"));
        }
        for f in &fields[1..] {
            values.push(f.parse().map_err(|_| parse_err(origin, no + 1, format!("`{f}` is not a number")))?);
        }
        rows += 1;
    }
    if rows != n {
        return Err(parse_err(origin, rows + 1, format!("expected {n} rows, found {rows}")));
    }
    Ok(Array2::from_shape_vec((n, n), values).unwrap())
}

/// `dim,birth,death,essential`; essential classes carry the cap as death.
pub fn diagram_to_csv(pd: &PersistenceDiagram) -> String {
    let mut s = String::from("dim,birth,death,essential\n");
    for f in &pd.features {
        let _ = writeln!(s, "{},{},{},{}", f.dim, f.birth, f.death, u8::from(f.essential));
    }
    s
}

pub fn parse_diagram_csv(text: &str, origin: &Path) -> Result<Vec<Feature>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "dim,birth,death,essential")) => {}
        _ => return Err(parse_err(origin, 1, "header must be `dim,birth,death,essential`")),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(no, line)| {
            let e = || parse_err(origin, no + 1, format!("malformed row `{line}`"));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(e());
            }
            Ok(Feature {
                dim: f[0].parse().map_err(|_| e())?,
                birth: f[1].parse().map_err(|_| e())?,
                death: f[2].parse().map_err(|_| e())?,
                essential: match f[3] {
                    "0" => false,
                    "1" => true,
                    _ => return Err(e()),
                },
            })
        })
        .collect()
}

/// One row per (snr, replicate).
pub fn sweep_to_csv(res: &SweepResult) -> String {
    let mut s = String::from("snr,replicate,seed,p0,p1,p2\n");
    for r in &res.runs {
        let t = r.total;
        let _ = writeln!(s, "{},{},{},{},{},{}", r.snr, r.replicate, r.seed, t.p0, t.p1, t.p2);
    }
    s
}

/// One row per (group, bootstrap draw).
pub fn bootstrap_to_csv(res: &BootstrapResult) -> String {
    let mut s = String::from("group,draw,mean_p0,mean_p1,mean_p2\n");
    for (g, group) in res.groups.iter().enumerate() {
        for (b, m) in group.means.iter().enumerate() {
            let _ = writeln!(s, "{},{b},{},{},{}", g + 1, m.p0, m.p1, m.p2);
        }
    }
    s
}

/// The per-replicate summaries the bootstrap resampled.
pub fn bootstrap_samples_to_csv(res: &BootstrapResult) -> String {
    let mut s = String::from("group,replicate,p0,p1,p2\n");
    for (g, group) in res.groups.iter().enumerate() {
        for (i, t) in group.samples.iter().enumerate() {
            let _ = writeln!(s, "{},{i},{},{},{}", g + 1, t.p0, t.p1, t.p2);
        }
    }
    s
}

/// Count data rows of a CSV with the expected header, for post-write checks.
pub fn check_csv(path: &Path, header: &str) -> Result<usize> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(parse_err(path, 1, format!("expected header `{header}`")));
    }
    let width = header.split(',').count();
    let mut n = 0;
    for (i, l) in lines.enumerate() {
        if l.split(',').count() != width {
            return Err(parse_err(path, i + 2, "wrong field count"));
        }
        n += 1;
    }
    Ok(n)
}


#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn series() -> MultivariateSeries {
        MultivariateSeries::new(array![[0.1, -2.5, 1e-300], [3.0, 0.0, -0.125]], 100.0).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = series();
        let text = series_to_csv(&s);
        assert!(text.starts_with("t,ch0,ch1\n0,0.1,3\n"));
        let back = parse_series_csv(&text, Path::new("x.csv"), 100.0).unwrap();
        assert_eq!(back.data, s.data);
    }

    #[test]
    fn bin_round_trip_is_exact() {
        let s = series();
        let bytes = series_to_bin(&s);
        assert_eq!(&bytes[..5], b"TSTS1");
        assert_eq!(bytes.len(), 13 + 6 * 8);
        let back = parse_series_bin(&bytes, Path::new("x.bin"), 100.0).unwrap();
        assert_eq!(back.data, s.data);
        assert!(parse_series_bin(&bytes[..20], Path::new("x.bin"), 100.0).is_err());
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let o = Path::new("s.csv");
        let line = |text: &str| match parse_series_csv(text, o, 100.0) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line(""), 1);
        assert_eq!(line("t,ch0\n0,1\n1,x\n"), 3);
        assert_eq!(line("t,ch0\n0,1,2\n"), 2);
        assert_eq!(line("t,chA\n0,1\n"), 1);
    }

    #[test]
    fn matrix_and_diagram_round_trip() {
        let m = array![[1.0, 0.25], [0.25, 1.0]];
        let text = matrix_to_csv(&m);
        assert_eq!(text, "node,0,1\n0,1,0.25\n1,0.25,1\n");
        assert_eq!(parse_matrix_csv(&text, Path::new("m")).unwrap(), m);
        let pd = PersistenceDiagram {
            features: vec![
                Feature { dim: 0, birth: 0.0, death: 1.0, essential: true },
                Feature { dim: 1, birth: 0.3, death: 0.55, essential: false },
            ],
            cap: 1.0,
            max_dim: 1,
        };
        let text = diagram_to_csv(&pd);
        assert_eq!(parse_diagram_csv(&text, Path::new("d")).unwrap(), pd.features);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
