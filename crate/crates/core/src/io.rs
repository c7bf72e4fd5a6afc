//! Profile files, CSV emission and the flat `key = value` run configuration.
//!
//! Numbers are written in the shortest decimal form that parses back to the
//! same `f64` (plain notation for magnitudes in `[1e-5, 1e16)`, exponent
//! notation otherwise), so identical runs give identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, GridSpec};
use crate::profile::{Profile, TailModel};

/// Shortest round-trip decimal form of `x`.
///
/// ```
/// use mkdv_core::io::fmt_f64;
/// assert_eq!(fmt_f64(0.1), "0.1");
/// assert_eq!(fmt_f64(1e-300), "1e-300");
/// assert_eq!(fmt_f64(-2.5e20), "-2.5e20");
/// ```
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Write `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Domain(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// CSV text with a header row; every cell goes through [`fmt_f64`].
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&v| fmt_f64(v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_atomic(path, csv_string(header, rows).as_bytes())
}

/// Serialize a profile: `# key = value` header lines, then `p,re,im` rows.
///
/// The panel edges are stored so the exact grid is rebuilt on reading.
pub fn profile_to_string(u: &Profile) -> String {
    let edges: Vec<String> = u.grid.edges().iter().map(|&e| fmt_f64(e)).collect();
    let mut s = String::from("# mkdv profile\n");
    s.push_str(&format!("# t = {}\n", fmt_f64(u.time)));
    s.push_str(&format!("# p_max = {}\n", fmt_f64(u.grid.p_max)));
    s.push_str(&format!("# n_nodes = {}\n", u.grid.len()));
    s.push_str(&format!("# limit_at_zero = {} {}\n", fmt_f64(u.limit_at_zero.re), fmt_f64(u.limit_at_zero.im)));
    s.push_str(&format!("# order = {}\n", u.grid.order));
    s.push_str(&format!("# tail = {}\n", if u.tail == TailModel::Frozen { "frozen" } else { "truncated" }));
    s.push_str(&format!("# edges = {}\n", edges.join(" ")));
    s.push_str("p,re,im\n");
    for (p, v) in u.grid.nodes.iter().zip(&u.values) {
        s.push_str(&format!("{},{},{}\n", fmt_f64(*p), fmt_f64(v.re), fmt_f64(v.im)));
    }
    s
}

pub fn write_profile(path: &Path, u: &Profile) -> Result<()> {
    write_atomic(path, profile_to_string(u).as_bytes())
}

fn parse_num(tok: &str, line: usize, what: &str) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| Error::Parse { line, message: format!("{what}: cannot parse '{}' as a number", tok.trim()) })
}

/// Read a profile file.
///
/// Files without `edges` (sampled elsewhere) are resampled by local cubic
/// interpolation onto the default grid with the file's `p_max`.
pub fn profile_from_str(text: &str) -> Result<Profile> {
    let mut head: BTreeMap<String, (String, usize)> = BTreeMap::new();
    let mut rows: Vec<(f64, Complex64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                head.insert(k.trim().to_string(), (v.trim().to_string(), line));
            }
            continue;
        }
        if l.starts_with(|c: char| c.is_ascii_alphabetic()) {
            continue;
        }
        let cols: Vec<&str> = l.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Parse { line, message: format!("expected 3 columns p,re,im, found {}", cols.len()) });
        }
        let p = parse_num(cols[0], line, "p")?;
        let v = Complex64::new(parse_num(cols[1], line, "re")?, parse_num(cols[2], line, "im")?);
        rows.push((p, v));
    }
    let need = |k: &str| head.get(k).ok_or_else(|| Error::Parse { line: 0, message: format!("missing header field '{k}'") });
    let (tv, tl) = need("t")?;
    let t = parse_num(tv, *tl, "t")?;
    let (pv, pl) = need("p_max")?;
    let p_max = parse_num(pv, *pl, "p_max")?;
    let (lv, ll) = need("limit_at_zero")?;
    let lim: Vec<&str> = lv.split_whitespace().collect();
    if lim.len() != 2 {
        return Err(Error::Parse { line: *ll, message: "limit_at_zero needs two numbers (re im)".into() });
    }
    let limit = Complex64::new(parse_num(lim[0], *ll, "limit_at_zero")?, parse_num(lim[1], *ll, "limit_at_zero")?);
    if let Some((nv, nl)) = head.get("n_nodes") {
        let n: usize = nv.parse().map_err(|_| Error::Parse { line: *nl, message: format!("n_nodes: bad count '{nv}'") })?;
        if n != rows.len() {
            return Err(Error::Parse { line: *nl, message: format!("n_nodes = {n} but {} rows follow", rows.len()) });
        }
    }
    let tail = match head.get("tail").map(|v| v.0.as_str()) {
        None | Some("truncated") => TailModel::Truncated,
        Some("frozen") => TailModel::Frozen,
        Some(other) => {
            return Err(Error::Parse { line: head["tail"].1, message: format!("tail: expected truncated|frozen, got '{other}'") })
        }
    };
    let u = match head.get("edges") {
        Some((ev, el)) => {
            let edges = ev.split_whitespace().map(|e| parse_num(e, *el, "edges")).collect::<Result<Vec<f64>>>()?;
            let order = match head.get("order") {
                Some((ov, ol)) => ov.parse().map_err(|_| Error::Parse { line: *ol, message: format!("order: bad value '{ov}'") })?,
                None => GridSpec::default().order,
            };
            let grid = FrequencyGrid::from_edges(&edges, order)?;
            if grid.len() != rows.len() || grid.nodes.iter().zip(&rows).any(|(a, b)| (a - b.0).abs() > 1e-12 * a.max(1.0)) {
                return Err(Error::Parse { line: *el, message: "nodes do not match the stored panel edges".into() });
            }
            Profile::new(std::sync::Arc::new(grid), rows.iter().map(|r| r.1).collect(), limit, t)?
        }
        None => resample(&rows, limit, t, p_max)?,
    };
    Ok(u.with_tail(tail))
}

fn resample(rows: &[(f64, Complex64)], limit: Complex64, t: f64, p_max: f64) -> Result<Profile> {
    if rows.len() < 4 || rows.windows(2).any(|w| w[1].0 <= w[0].0) || rows[0].0 <= 0.0 {
        return Err(Error::Parse { line: 0, message: "need at least 4 strictly increasing positive p rows".into() });
    }
    let grid = GridSpec::default().with_p_max(p_max).build()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    Profile::from_fn(grid, t, |p| {
        if p == 0.0 {
            return limit;
        }
        if p > xs[xs.len() - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let k = xs.partition_point(|&x| x < p).clamp(2, xs.len() - 2);
        let idx = [k - 2, k - 1, k, k + 1];
        let mut acc = Complex64::new(0.0, 0.0);
        for &j in &idx {
            let mut l = 1.0;
            for &m in &idx {
                if m != j {
                    l *= (p - xs[m]) / (xs[j] - xs[m]);
                }
            }
            acc += rows[j].1 * l;
        }
        acc
    })
    .map(|u| Profile { limit_at_zero: limit, ..u })
}

pub fn read_profile(path: &Path) -> Result<Profile> {
    profile_from_str(&fs::read_to_string(path)?)
}

/// Flat `key = value` configuration with `#` comments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, (String, usize)>,
}

impl Config {
    /// Parse, rejecting keys outside `allowed` (when non-empty) and duplicates.
    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let (k, v) = l.split_once('=').ok_or_else(|| Error::Parse { line, message: format!("expected 'key = value', got '{l}'") })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse { line, message: "empty key".into() });
            }
            if !allowed.is_empty() && !allowed.contains(&k) {
                return Err(Error::Parse { line, message: format!("unknown field '{k}'") });
            }
            if entries.insert(k.to_string(), (v.trim().to_string(), line)).is_some() {
                return Err(Error::Parse { line, message: format!("field '{k}' given twice") });
            }
        }
        Ok(Config { entries })
    }

    /// Line on which `key` was set.
    pub fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.1)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.0.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| Error::Parse { line: *line, message: format!("field '{key}': expected a number, got '{v}'") }),
        }
    }

    pub fn get_positive(&self, key: &str) -> Result<Option<f64>> {
        match self.get_f64(key)? {
            Some(x) if x <= 0.0 => {
                Err(Error::Parse { line: self.entries[key].1, message: format!("field '{key}': must be positive, got {x}") })
            }
            other => Ok(other),
        }
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|_| Error::Parse { line: *line, message: format!("field '{key}': expected a non-negative integer, got '{v}'") }),
        }
    }

    /// `epsilon` must be `+1` or `-1`.
    pub fn get_epsilon(&self, key: &str) -> Result<Option<f64>> {
        match self.get_f64(key)? {
            Some(e) if e != 1.0 && e != -1.0 => {
                Err(Error::Parse { line: self.entries[key].1, message: format!("field '{key}': must be +1 or -1, got {e}") })
            }
            other => Ok(other),
        }
    }

    pub fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| parse_num(s, *line, key))
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for &x in &[0.0, 1.0, -0.1, 1.0 / 3.0, 1e-7, 6.02e23, f64::MIN_POSITIVE, 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn profile_round_trip_is_exact() {
        let g = GridSpec::default().with_p_max(3.0).build().unwrap();
        let u = Profile::from_fn(g, 2.5, |p| Complex64::new((-p).exp() / 3.0, p.sin() * 0.1))
            .unwrap()
            .with_tail(TailModel::Frozen);
        let s = profile_to_string(&u);
        let v = profile_from_str(&s).unwrap();
        assert_eq!(v.values, u.values);
        assert_eq!(v.grid.nodes, u.grid.nodes);
        assert_eq!(v.limit_at_zero, u.limit_at_zero);
        assert_eq!(v.tail, TailModel::Frozen);
        assert_eq!(profile_to_string(&v), s);
    }

    #[test]
    fn foreign_samples_are_resampled() {
        let mut s = String::from("# t = 1\n# p_max = 4\n# limit_at_zero = 1 0\np,re,im\n");
        for k in 1..=400 {
            let p = 0.01 * k as f64;
            s.push_str(&format!("{p},{},0\n", (-p * p).exp()));
        }
        let u = profile_from_str(&s).unwrap();
        assert!((u.value_at(1.234).re - (-1.234f64 * 1.234).exp()).abs() < 1e-7);
    }

    #[test]
    fn bad_rows_name_the_line() {
        let s = "# t = 1\n# p_max = 1\n# limit_at_zero = 0 0\np,re,im\n0.1,1,0\n0.2,x,0\n";
        match profile_from_str(s) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 6);
                assert!(message.contains("re"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_diagnostics() {
        let c = Config::parse("# run\nt_end = 10\neps = -1 # defocusing\n", &["t_end", "eps"]).unwrap();
        assert_eq!(c.get_f64("t_end").unwrap(), Some(10.0));
        assert_eq!(c.get_epsilon("eps").unwrap(), Some(-1.0));
        let e = Config::parse("t_end = 10\nbogus = 1\n", &["t_end"]).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, ref message } if message.contains("bogus")));
        let c = Config::parse("tol = abc\n", &[]).unwrap();
        let e = c.get_f64("tol").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, ref message } if message.contains("tol")));
        assert!(Config::parse("a = 1\na = 2\n", &[]).is_err());
        assert!(Config::parse("eps = 2\n", &[]).unwrap().get_epsilon("eps").is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("mkdv_io_{}", std::process::id()));
        let p = dir.join("a.csv");
        write_csv(&p, &["x", "y"], &[vec![1.0, 0.5]]).unwrap();
        write_csv(&p, &["x", "y"], &[vec![2.0, 1e-9]]).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "x,y\n2,1e-9\n");
        fs::remove_dir_all(dir).unwrap();
    }
}
