//! Plain-text field files: a header line `N n L1 .. LN` followed by the
//! `n^N` node values in row-major order.

use std::io::{BufRead, Write};

use super::{DomainSpec, Field};
use crate::error::{Error, Result};

pub fn write_field<W: Write>(mut w: W, u: &Field) -> Result<()> {
    let spec = u.spec();
    write!(w, "{} {}", spec.dim(), spec.n())?;
    for l in spec.lengths() {
        write!(w, " {l}")?;
    }
    writeln!(w)?;
    for v in u.values() {
        writeln!(w, "{v:.16e}")?;
    }
    Ok(())
}

pub fn read_field<R: BufRead>(r: R) -> Result<Field> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing header".into(),
    })??;
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() < 2 {
        return Err(parse_err(1, "header needs `N n L1 .. LN`".into()));
    }
    let dim: usize = toks[0]
        .parse()
        .map_err(|e| parse_err(1, format!("bad N: {e}")))?;
    let n: usize = toks[1]
        .parse()
        .map_err(|e| parse_err(1, format!("bad n: {e}")))?;
    if toks.len() != 2 + dim {
        return Err(parse_err(
            1,
            format!("expected {dim} box lengths, found {}", toks.len() - 2),
        ));
    }
    let lengths = toks[2..]
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| parse_err(1, format!("bad length `{t}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = DomainSpec::new(lengths, n)?;
    let mut values = Vec::with_capacity(spec.num_nodes());
    for (i, line) in lines.enumerate() {
        let line = line?;
        for tok in line.split_whitespace() {
            values.push(
                tok.parse::<f64>()
                    .map_err(|e| parse_err(i + 2, format!("bad value `{tok}`: {e}")))?,
            );
        }
    }
    Field::from_values(&spec, values)
}
