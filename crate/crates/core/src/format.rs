//! Text formats for clustering collections (`FCC1`) and pair-relation
//! streams (`PCS1`).
//!
//! Both start with a header line of `key=value` fields followed by one
//! `<point> <color>` line per point. A clustering file then holds, per
//! clustering, a `# <j>` line and one `<point> <label>` line per point. A
//! stream file holds `<u> <v> <j> <b>` lines, `b = 1` meaning split.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::fairness::{ColorTable, Fairness, FairnessConstraint};
use crate::partition::{Clustering, InputSet};
use crate::streaming::{StreamHeader, StreamMode, StreamTriple};

fn malformed(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Malformed(format!("line {line}: {msg}"))
}

fn ratio_text(f: &Fairness) -> String {
    let parts: Vec<String> = f.constraint().ratio().iter().map(u32::to_string).collect();
    parts.join(":")
}

fn write_colors(w: &mut impl Write, f: &Fairness) -> Result<()> {
    for (v, c) in f.colors().colors().iter().enumerate() {
        writeln!(w, "{v} {c}")?;
    }
    Ok(())
}

pub fn write_fcc(w: &mut impl Write, fairness: &Fairness, inputs: &InputSet) -> Result<()> {
    if fairness.n() != inputs.n() {
        return Err(Error::Dimension {
            expected: fairness.n(),
            found: inputs.n(),
        });
    }
    writeln!(
        w,
        "FCC1 n={} m={} colors={} ratio={}",
        inputs.n(),
        inputs.m(),
        fairness.num_colors(),
        ratio_text(fairness)
    )?;
    write_colors(w, fairness)?;
    for (j, c) in inputs.iter().enumerate() {
        writeln!(w, "# {j}")?;
        for (v, l) in c.assign().iter().enumerate() {
            writeln!(w, "{v} {l}")?;
        }
    }
    Ok(())
}

pub fn write_pcs(w: &mut impl Write, header: &StreamHeader, triples: &[StreamTriple]) -> Result<()> {
    writeln!(
        w,
        "PCS1 n={} m={} colors={} ratio={} mode={}",
        header.n,
        header.m,
        header.fairness.num_colors(),
        ratio_text(&header.fairness),
        header.mode.name()
    )?;
    write_colors(w, &header.fairness)?;
    for t in triples {
        writeln!(w, "{} {} {} {}", t.u, t.v, t.j, u8::from(t.split))?;
    }
    Ok(())
}

/// Numbered lines with I/O errors surfaced.
struct Lines<R> {
    inner: std::io::Lines<R>,
    at: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<Option<(usize, String)>> {
        match self.inner.next() {
            None => Ok(None),
            Some(line) => {
                self.at += 1;
                Ok(Some((self.at, line?)))
            }
        }
    }

    fn expect_line(&mut self, what: &str) -> Result<(usize, String)> {
        self.next_line()?
            .ok_or_else(|| malformed(self.at + 1, format!("unexpected end of file, expected {what}")))
    }
}

struct Header {
    n: usize,
    m: usize,
    colors: usize,
    ratio: Vec<u32>,
    mode: Option<StreamMode>,
}

fn parse_header(line_no: usize, line: &str, magic: &str) -> Result<Header> {
    let mut fields = line.split(' ');
    if fields.next() != Some(magic) {
        return Err(malformed(line_no, format!("expected {magic} header")));
    }
    let mut map = HashMap::new();
    for f in fields {
        let (k, v) = f
            .split_once('=')
            .ok_or_else(|| malformed(line_no, format!("header field {f:?} is not key=value")))?;
        if map.insert(k, v).is_some() {
            return Err(malformed(line_no, format!("duplicate header field {k}")));
        }
    }
    let get = |k: &str| {
        map.get(k)
            .copied()
            .ok_or_else(|| malformed(line_no, format!("missing {k}")))
    };
    let num = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|_| malformed(line_no, format!("{k} is not a number")))
    };
    let ratio = get("ratio")?
        .split(':')
        .map(|r| r.parse::<u32>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| malformed(line_no, "ratio must be colon-separated numbers"))?;
    let mode = match map.get("mode") {
        Some(m) => Some(m.parse()?),
        None => None,
    };
    let expected = if magic == "PCS1" { 5 } else { 4 };
    if map.len() != expected {
        return Err(malformed(line_no, "unexpected header fields"));
    }
    Ok(Header {
        n: num("n")?,
        m: num("m")?,
        colors: num("colors")?,
        ratio,
        mode,
    })
}

fn parse_pair(line_no: usize, line: &str) -> Result<(usize, u64)> {
    let mut it = line.split(' ');
    let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
        return Err(malformed(line_no, "expected two numbers"));
    };
    let a = a.parse().map_err(|_| malformed(line_no, "bad point id"))?;
    let b = b.parse().map_err(|_| malformed(line_no, "bad value"))?;
    Ok((a, b))
}

/// `n` lines of `<point> <value>` with each point exactly once.
fn read_point_block<R: BufRead>(lines: &mut Lines<R>, n: usize, what: &str) -> Result<Vec<u64>> {
    let mut values = vec![None; n];
    for _ in 0..n {
        let (no, line) = lines.expect_line(what)?;
        if line.starts_with('#') {
            return Err(Error::Dimension {
                expected: n,
                found: values.iter().flatten().count(),
            });
        }
        let (v, x) = parse_pair(no, &line)?;
        let slot = values
            .get_mut(v)
            .ok_or_else(|| malformed(no, format!("point {v} out of range for n = {n}")))?;
        if slot.replace(x).is_some() {
            return Err(malformed(no, format!("point {v} listed twice")));
        }
    }
    Ok(values.into_iter().map(|x| x.expect("all filled")).collect())
}

fn read_fairness<R: BufRead>(lines: &mut Lines<R>, h: &Header) -> Result<Fairness> {
    let colors = read_point_block(lines, h.n, "a color line")?;
    let colors = colors
        .into_iter()
        .map(|c| u32::try_from(c).map_err(|_| Error::Malformed(format!("color {c} too large"))))
        .collect::<Result<Vec<u32>>>()?;
    if h.ratio.len() != h.colors {
        return Err(Error::Malformed(format!(
            "ratio has {} parts for {} colors",
            h.ratio.len(),
            h.colors
        )));
    }
    let table = ColorTable::with_num_colors(colors, h.colors)?;
    Fairness::new(table, FairnessConstraint::new(h.ratio.clone())?)
}

pub fn read_fcc(r: impl BufRead) -> Result<(Fairness, InputSet)> {
    let mut lines = Lines {
        inner: r.lines(),
        at: 0,
    };
    let (no, first) = lines.expect_line("the header")?;
    let h = parse_header(no, &first, "FCC1")?;
    let fairness = read_fairness(&mut lines, &h)?;
    let mut inputs = Vec::with_capacity(h.m);
    for j in 0..h.m {
        let (no, line) = lines.expect_line("a clustering marker")?;
        if line != format!("# {j}") {
            return Err(malformed(no, format!("expected \"# {j}\"")));
        }
        let labels = read_point_block(&mut lines, h.n, "a label line")?;
        inputs.push(Clustering::from_labels(&labels));
    }
    if let Some((no, _)) = lines.next_line()? {
        return Err(malformed(
            no,
            format!("content after the {} announced clusterings", h.m),
        ));
    }
    Ok((fairness, InputSet::new(inputs)?))
}

/// Stream reader; the header and colors are read eagerly, triples lazily.
pub struct PcsReader<R> {
    header: StreamHeader,
    lines: Lines<R>,
}

impl<R: BufRead> PcsReader<R> {
    pub fn new(r: R) -> Result<PcsReader<R>> {
        let mut lines = Lines {
            inner: r.lines(),
            at: 0,
        };
        let (no, first) = lines.expect_line("the header")?;
        let h = parse_header(no, &first, "PCS1")?;
        let mode = h.mode.ok_or_else(|| malformed(no, "missing mode"))?;
        let fairness = read_fairness(&mut lines, &h)?;
        let header = StreamHeader::new(h.n, h.m, fairness, mode)?;
        Ok(PcsReader { header, lines })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    fn parse(no: usize, line: &str) -> Result<StreamTriple> {
        let f: Vec<&str> = line.split(' ').collect();
        let [u, v, j, b] = f.as_slice() else {
            return Err(malformed(no, "expected four numbers"));
        };
        let num = |s: &str| s.parse::<u32>().map_err(|_| malformed(no, format!("bad number {s:?}")));
        let split = match *b {
            "0" => false,
            "1" => true,
            other => return Err(malformed(no, format!("b must be 0 or 1, got {other:?}"))),
        };
        Ok(StreamTriple {
            u: num(u)?,
            v: num(v)?,
            j: num(j)?,
            split,
        })
    }
}

impl<R: BufRead> Iterator for PcsReader<R> {
    type Item = Result<StreamTriple>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.lines.next_line() {
            Ok(None) => None,
            Ok(Some((no, line))) => Some(Self::parse(no, &line)),
            Err(e) => Some(Err(e)),
        }
    }
}
