//! Plain-text file formats: path coefficients, noise dumps, ANR series,
//! summaries and stability snapshot logs.
//!
//! Path files hold one coefficient per line. `# primary`, `# secondary` and
//! `# secondary_estimate` comment lines open named sections; other `#` lines
//! are ignored. A file without section headers is a single coefficient
//! vector.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anc_core::{PathModel, Snapshot};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientFile {
    pub primary: Option<Vec<f64>>,
    pub secondary: Option<Vec<f64>>,
    pub secondary_estimate: Option<Vec<f64>>,
    /// Coefficients appearing before any section header.
    pub unnamed: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Section {
    Unnamed,
    Primary,
    Secondary,
    Estimate,
}

pub fn parse_coefficients(text: &str, origin: &Path) -> Result<CoefficientFile> {
    let mut out = CoefficientFile::default();
    let mut section = Section::Unnamed;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let tag = comment.trim().to_ascii_lowercase();
            section = match tag.as_str() {
                "primary" => Section::Primary,
                "secondary" => Section::Secondary,
                "secondary_estimate" | "secondary estimate" => Section::Estimate,
                _ => continue,
            };
            let slot = match section {
                Section::Primary => &mut out.primary,
                Section::Secondary => &mut out.secondary,
                Section::Estimate => &mut out.secondary_estimate,
                Section::Unnamed => unreachable!(),
            };
            if slot.is_some() {
                return Err(LabError::Parse {
                    path: origin.to_path_buf(),
                    message: format!("line {}: duplicate `{tag}` section", lineno + 1),
                });
            }
            *slot = Some(Vec::new());
            continue;
        }
        let field = line.split(',').next().unwrap_or("").trim();
        let value: f64 = field.parse().map_err(|_| LabError::Parse {
            path: origin.to_path_buf(),
            message: format!("line {}: `{field}` is not a number", lineno + 1),
        })?;
        match section {
            Section::Unnamed => out.unnamed.push(value),
            Section::Primary => out.primary.get_or_insert_with(Vec::new).push(value),
            Section::Secondary => out.secondary.get_or_insert_with(Vec::new).push(value),
            Section::Estimate => out
                .secondary_estimate
                .get_or_insert_with(Vec::new)
                .push(value),
        }
    }
    Ok(out)
}

pub fn read_coefficients(path: &Path) -> Result<CoefficientFile> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_coefficients(&text, path)
}

/// Builds a plant from a two-section path file and an optional separate
/// secondary-path model.
pub fn load_path_model(file: &Path, estimate_file: Option<&Path>) -> Result<PathModel> {
    let coeffs = read_coefficients(file)?;
    let missing = |what: &str| LabError::Parse {
        path: file.to_path_buf(),
        message: format!("missing `# {what}` section"),
    };
    let primary = coeffs.primary.ok_or_else(|| missing("primary"))?;
    let secondary = coeffs.secondary.ok_or_else(|| missing("secondary"))?;
    let estimate = match estimate_file {
        Some(p) => {
            let est = read_coefficients(p)?;
            est.secondary_estimate
                .or(est.secondary)
                .unwrap_or(est.unnamed)
        }
        None => coeffs
            .secondary_estimate
            .unwrap_or_else(|| secondary.clone()),
    };
    Ok(PathModel::new(primary, secondary, estimate)?)
}

pub fn format_path_model(model: &PathModel) -> String {
    let mut s = String::new();
    s.push_str("# primary\n");
    for c in &model.primary {
        let _ = writeln!(s, "{c}");
    }
    s.push_str("# secondary\n");
    for c in &model.secondary {
        let _ = writeln!(s, "{c}");
    }
    if !model.is_exactly_identified() {
        s.push_str("# secondary_estimate\n");
        for c in &model.secondary_estimate {
            let _ = writeln!(s, "{c}");
        }
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| LabError::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| LabError::io(path, e))
}

/// One-column CSV of samples.
pub fn format_samples(samples: &[f64]) -> String {
    let mut s = String::with_capacity(samples.len() * 20);
    s.push_str("x\n");
    for v in samples {
        let _ = writeln!(s, "{v}");
    }
    s
}

fn push_db(line: &mut String, v: f64) {
    line.push(',');
    if v.is_finite() {
        let _ = write!(line, "{v:.6}");
    }
}

/// ANR series as `n,anr_db_mean[,anr_db_trial_k...]`; gaps are empty fields.
pub fn write_anr_csv(path: &Path, mean: &[f64], trials: &[&[f64]]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut header = String::from("n,anr_db_mean");
    for k in 0..trials.len() {
        let _ = write!(header, ",anr_db_trial_{k}");
    }
    let mut line = String::new();
    let io = |e| LabError::io(path, e);
    writeln!(out, "{header}").map_err(io)?;
    for (n, m) in mean.iter().enumerate() {
        line.clear();
        let _ = write!(line, "{n}");
        push_db(&mut line, *m);
        for t in trials {
            push_db(&mut line, t[n]);
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Snapshot log: one row `n,v,lambda,len,x_s[0..len],p_x[0..len]` per step.
pub fn format_snapshots(snapshots: &[Snapshot]) -> String {
    let mut s = String::from("# n,v,lambda,len,x_s...,p_x...\n");
    for snap in snapshots {
        let _ = write!(s, "{},{},{},{}", snap.n, snap.v, snap.lambda, snap.x_s.len());
        for v in snap.x_s.iter().chain(&snap.p_x) {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

pub fn parse_snapshots(text: &str, origin: &Path) -> Result<Vec<Snapshot>> {
    let err = |lineno: usize, message: String| LabError::Parse {
        path: origin.to_path_buf(),
        message: format!("line {}: {message}", lineno + 1),
    };
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 4 {
            return Err(err(lineno, "expected n,v,lambda,len,...".into()));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|_| err(lineno, format!("bad sample index `{}`", fields[0])))?;
        let len: usize = fields[3]
            .parse()
            .map_err(|_| err(lineno, format!("bad length `{}`", fields[3])))?;
        if fields.len() != 4 + 2 * len {
            return Err(err(
                lineno,
                format!("expected {} fields, found {}", 4 + 2 * len, fields.len()),
            ));
        }
        let mut nums = Vec::with_capacity(2 + 2 * len);
        for f in fields[1..3].iter().chain(&fields[4..]) {
            nums.push(
                f.parse::<f64>()
                    .map_err(|_| err(lineno, format!("`{f}` is not a number")))?,
            );
        }
        out.push(Snapshot {
            n,
            v: nums[0],
            lambda: nums[1],
            x_s: nums[2..2 + len].to_vec(),
            p_x: nums[2 + len..].to_vec(),
        });
    }
    Ok(out)
}

pub fn read_snapshots(path: &Path) -> Result<Vec<Snapshot>> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_snapshots(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let text = "# generated\n# primary\n0.5\n0.25, \n\n# secondary\n1.0\n-0.1\n";
        let f = parse_coefficients(text, Path::new("p.csv")).unwrap();
        assert_eq!(f.primary.unwrap(), vec![0.5, 0.25]);
        assert_eq!(f.secondary.unwrap(), vec![1.0, -0.1]);
        assert!(f.secondary_estimate.is_none());
        assert!(f.unnamed.is_empty());
    }

    #[test]
    fn headerless_file_is_one_vector() {
        let f = parse_coefficients("1\n2\n3\n", Path::new("v.csv")).unwrap();
        assert_eq!(f.unnamed, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn bad_numbers_report_the_line() {
        let err = parse_coefficients("# primary\n0.1\nabc\n", Path::new("bad.csv")).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn path_model_text_round_trip() {
        let model = PathModel::new(vec![0.1, -0.2, 0.3], vec![0.9, 0.05], vec![0.8, 0.0]).unwrap();
        let text = format_path_model(&model);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("plant.csv");
        write_text(&p, &text).unwrap();
        assert_eq!(load_path_model(&p, None).unwrap(), model);
    }

    #[test]
    fn snapshot_log_round_trip() {
        let snaps = vec![
            Snapshot::from_matrix(3, 0.25, 0.999, &[2.0, 0.5, 0.5, 1.0], &[0.1, -1e-7]),
            Snapshot::from_matrix(4, 1.0, 0.999, &[2.0, 0.5, 0.5, 1.0], &[3.5, 0.0]),
        ];
        let text = format_snapshots(&snaps);
        assert_eq!(parse_snapshots(&text, Path::new("s.csv")).unwrap(), snaps);
        assert!(parse_snapshots("1,2,3,2,0.1\n", Path::new("s.csv")).is_err());
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = read_coefficients(Path::new("/nonexistent/plant.csv")).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
