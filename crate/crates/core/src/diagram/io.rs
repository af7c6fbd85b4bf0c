//! `PD v1` text interchange format.
//!
//! ```text
//! PD v1
//! # label irish-first-100
//! # cap 2.5
//! 0 0.0000000000000000e0 2.0000000000000001e-1
//! 0 0.0000000000000000e0 inf
//! ```
//!
//! Records are `dim birth death`, single-space separated, with `inf` marking
//! an essential class. Reals carry 17 significant digits so that every finite
//! `f64` survives a round trip. Lines starting with `#` are comments, except
//! the `# label` and `# cap` metadata lines written by [`write_diagram`].

use std::fmt::Write as _;

use super::{DiagramPoint, EssentialClass, PersistenceDiagram};
use crate::error::{Error, Result};

pub const HEADER: &str = "PD v1";

pub(crate) fn format_real(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub(crate) fn parse_real(token: &str, line: usize) -> Result<f64> {
    match token {
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => token
            .parse::<f64>()
            .ok()
            .filter(|x| !x.is_nan())
            .ok_or_else(|| Error::parse(line, format!("invalid real '{token}'"))),
    }
}

pub fn write_diagram(d: &PersistenceDiagram) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    if let Some(label) = &d.label {
        let _ = writeln!(out, "# label {}", label.replace('\n', " "));
    }
    if let Some(cap) = d.cap {
        let _ = writeln!(out, "# cap {}", format_real(cap));
    }
    for p in d.points() {
        let _ = writeln!(
            out,
            "{} {} {}",
            p.dim,
            format_real(p.birth),
            format_real(p.death)
        );
    }
    for e in d.essential() {
        let _ = writeln!(out, "{} {} inf", e.dim, format_real(e.birth));
    }
    out
}

pub fn read_diagram(input: &str) -> Result<PersistenceDiagram> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, first)) if first.trim_end() == HEADER => {}
        Some((n, other)) => {
            return Err(Error::parse(
                n,
                format!("expected header '{HEADER}', got '{other}'"),
            ))
        }
        None => return Err(Error::parse(1, "empty input, missing header")),
    }

    let mut diagram = PersistenceDiagram::empty();
    for (n, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim_start();
            if let Some(label) = comment.strip_prefix("label ") {
                diagram.label = Some(label.to_string());
            } else if let Some(cap) = comment.strip_prefix("cap ") {
                diagram.cap = Some(parse_real(cap.trim(), n)?);
            }
            continue;
        }
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                n,
                format!("expected 'dim birth death', got {} fields", fields.len()),
            ));
        }
        let dim: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(n, format!("invalid dimension '{}'", fields[0])))?;
        let birth = parse_real(fields[1], n)?;
        let death = parse_real(fields[2], n)?;
        let res = if death == f64::INFINITY {
            diagram.push_essential(EssentialClass { birth, dim })
        } else {
            diagram.push(DiagramPoint::new(birth, death, dim))
        };
        res.map_err(|e| match e {
            Error::Validation(msg) => Error::Validation(format!("line {n}: {msg}")),
            other => other,
        })?;
    }
    Ok(diagram)
}
