use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use fairconsensus::format::{read_fcc, PcsReader};
use fairconsensus::streaming::{collect_inputs, encode, Consistency, StreamHeader, StreamMode, StreamTriple};
use fairconsensus::{Error, Fairness, InputSet, Result};

/// Triples of a stream view, read lazily.
pub type Triples = Box<dyn Iterator<Item = Result<StreamTriple>>>;

pub enum Source {
    Clusterings(Fairness, InputSet),
    Stream(PcsReader<BufReader<File>>),
}

/// Opens a clustering file or a stream file, told apart by the magic word.
pub fn open(path: &Path) -> Result<Source> {
    let mut r = BufReader::new(File::open(path)?);
    let head = r.fill_buf()?;
    if head.starts_with(b"FCC1") {
        let (f, inputs) = read_fcc(r)?;
        Ok(Source::Clusterings(f, inputs))
    } else if head.starts_with(b"PCS1") {
        Ok(Source::Stream(PcsReader::new(r)?))
    } else {
        Err(Error::Malformed(format!(
            "{} is neither a clustering file nor a stream file",
            path.display()
        )))
    }
}

/// All clusterings of either file kind.
pub fn load_inputs(path: &Path, consistency: Consistency) -> Result<(Fairness, InputSet)> {
    match open(path)? {
        Source::Clusterings(f, inputs) => Ok((f, inputs)),
        Source::Stream(reader) => {
            let header = reader.header().clone();
            let inputs = collect_inputs(&header, reader, consistency)?;
            Ok((header.fairness, inputs))
        }
    }
}

/// Stream view of either file kind; clustering files become contiguous
/// streams.
pub fn open_stream(path: &Path) -> Result<(StreamHeader, Triples)> {
    match open(path)? {
        Source::Stream(reader) => Ok((reader.header().clone(), Box::new(reader))),
        Source::Clusterings(f, inputs) => {
            let header = StreamHeader::new(inputs.n(), inputs.m(), f, StreamMode::Contiguous)?;
            let triples = inputs
                .into_inner()
                .into_iter()
                .enumerate()
                .flat_map(|(j, c)| encode(&c, j))
                .map(Ok);
            Ok((header, Box::new(triples)))
        }
    }
}
