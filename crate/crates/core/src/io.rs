//! Plain-text cloud files.
//!
//! One point per row, `d` comma-separated numbers with `.` as decimal
//! separator. An optional first line carries metadata:
//!
//! ```text
//! # tau=0.39 d=3 seed=7
//! 0.12,-1.5,1.98
//! ```

use std::io::{BufRead, Write};

use crate::error::FormatError;
use crate::sampler::PointCloud;

pub fn write_cloud_csv<W: Write>(cloud: &PointCloud, mut out: W) -> Result<(), FormatError> {
    write!(out, "# tau={} d={}", cloud.tau, cloud.dim())?;
    if let Some(seed) = cloud.seed {
        write!(out, " seed={seed}")?;
    }
    if cloud.quantization_step > 0.0 {
        write!(out, " delta={}", cloud.quantization_step)?;
    }
    writeln!(out)?;
    let mut line = String::new();
    for p in cloud.points() {
        line.clear();
        for (k, v) in p.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads a cloud. `tau` from the header is used unless `tau_override` is set;
/// one of the two must be present.
pub fn read_cloud_csv<R: BufRead>(input: R, tau_override: Option<f64>) -> Result<PointCloud, FormatError> {
    let mut tau = None;
    let mut seed = None;
    let mut delta = 0.0;
    let mut header_dim = None;
    let mut dim = None;
    let mut coords = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(meta) = trimmed.strip_prefix('#') {
            for field in meta.split_whitespace() {
                let Some((key, value)) = field.split_once('=') else {
                    continue;
                };
                let bad = |what: &str| FormatError::Syntax {
                    line: line_no,
                    message: format!("invalid {what} '{value}'"),
                };
                match key {
                    "tau" => tau = Some(value.parse::<f64>().map_err(|_| bad("tau"))?),
                    "d" => header_dim = Some(value.parse::<usize>().map_err(|_| bad("d"))?),
                    "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
                    "delta" => delta = value.parse::<f64>().map_err(|_| bad("delta"))?,
                    _ => {}
                }
            }
            continue;
        }
        let start = coords.len();
        for field in trimmed.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| FormatError::Syntax {
                line: line_no,
                message: format!("not a number: '{}'", field.trim()),
            })?;
            coords.push(v);
        }
        let width = coords.len() - start;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(FormatError::Syntax {
                    line: line_no,
                    message: format!("expected {d} columns, found {width}"),
                })
            }
            _ => {}
        }
    }
    let dim = dim.ok_or(FormatError::Syntax {
        line: 0,
        message: "no data rows".into(),
    })?;
    if let Some(hd) = header_dim {
        if hd != dim {
            return Err(FormatError::Syntax {
                line: 1,
                message: format!("header says d={hd} but rows have {dim} columns"),
            });
        }
    }
    let tau = tau_override.or(tau).ok_or(FormatError::Syntax {
        line: 0,
        message: "sampling period missing: no 'tau=' header and no override".into(),
    })?;
    let mut cloud = PointCloud::new(dim, coords, tau)?;
    cloud.seed = seed;
    cloud.quantization_step = delta;
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample_cloud, NoiseModel};
    use crate::signal::PeriodicSignal;

    #[test]
    fn cloud_round_trip_is_exact() {
        let s = PeriodicSignal::sine(1.0, 2.0).unwrap();
        let cloud = sample_cloud(&s, 0.39, 3, 50, NoiseModel::gaussian(0.05), 0.0, 4).unwrap();
        let mut buf = Vec::new();
        write_cloud_csv(&cloud, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# tau=0.39 d=3 seed=4\n"));
        let back = read_cloud_csv(buf.as_slice(), None).unwrap();
        assert_eq!(back, cloud);
    }

    #[test]
    fn headerless_file_needs_tau() {
        let text = "1.0,2.0\n3.0,4.0\n";
        assert!(read_cloud_csv(text.as_bytes(), None).is_err());
        let cloud = read_cloud_csv(text.as_bytes(), Some(0.2)).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.point(1), &[3.0, 4.0]);
    }

    #[test]
    fn ragged_rows_rejected() {
        let text = "# tau=0.1\n1,2\n3\n";
        match read_cloud_csv(text.as_bytes(), None) {
            Err(FormatError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
