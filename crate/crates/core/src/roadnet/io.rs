//! CSV persistence for road graphs.
//!
//! A graph lives in a directory holding three files:
//!
//! * `nodes.csv`: `id,easting_m,northing_m`
//! * `edges.csv`: `from,to,length_m,profile_emergency,profile_civilian,access`
//!   with `access` one of `ALL` or `EMERGENCY`
//! * `profiles.csv`: `profile_id,h0,...,h167`, speeds in m/s, hour 0 is Monday 00:00

use std::fs::File;
use std::path::{Path, PathBuf};

use csv::StringRecord;

use super::{Access, GraphBuilder, GraphError, RoadGraph, SpeedProfile, HOURS_PER_WEEK};

pub const NODES_FILE: &str = "nodes.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const PROFILES_FILE: &str = "profiles.csv";

const NODE_HEADER: [&str; 3] = ["id", "easting_m", "northing_m"];
const EDGE_HEADER: [&str; 6] = [
    "from",
    "to",
    "length_m",
    "profile_emergency",
    "profile_civilian",
    "access",
];

fn profile_header() -> Vec<String> {
    std::iter::once("profile_id".to_owned())
        .chain((0..HOURS_PER_WEEK).map(|h| format!("h{h}")))
        .collect()
}

struct CsvFile {
    path: PathBuf,
    reader: csv::Reader<File>,
}

impl CsvFile {
    fn open(dir: &Path, name: &str, expected: &[&str]) -> Result<Self, GraphError> {
        let path = dir.join(name);
        let file = File::open(&path).map_err(|source| GraphError::Io {
            path: path.clone(),
            source,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(file);
        let header = reader.headers().map_err(|e| parse_err(&path, 1, e))?;
        if header.iter().ne(expected.iter().copied()) {
            return Err(GraphError::Parse {
                file: path,
                line: 1,
                message: format!("expected header `{}`", expected.join(",")),
            });
        }
        Ok(Self { path, reader })
    }

    fn for_each(
        &mut self,
        mut f: impl FnMut(&Row<'_>) -> Result<(), GraphError>,
    ) -> Result<(), GraphError> {
        let mut record = StringRecord::new();
        loop {
            match self.reader.read_record(&mut record) {
                Ok(false) => return Ok(()),
                Ok(true) => {
                    let line = record.position().map_or(0, |p| p.line());
                    f(&Row {
                        path: &self.path,
                        line,
                        record: &record,
                    })?;
                }
                Err(e) => {
                    let line = e.position().map_or(0, |p| p.line());
                    return Err(parse_err(&self.path, line, e));
                }
            }
        }
    }
}

fn parse_err(path: &Path, line: u64, err: impl std::fmt::Display) -> GraphError {
    GraphError::Parse {
        file: path.to_path_buf(),
        line,
        message: err.to_string(),
    }
}

struct Row<'a> {
    path: &'a Path,
    line: u64,
    record: &'a StringRecord,
}

impl Row<'_> {
    fn error(&self, message: String) -> GraphError {
        GraphError::Parse {
            file: self.path.to_path_buf(),
            line: self.line,
            message,
        }
    }

    fn str(&self, i: usize) -> &str {
        self.record.get(i).unwrap_or("")
    }

    fn parse<T: std::str::FromStr>(&self, i: usize, what: &str) -> Result<T, GraphError>
    where
        T::Err: std::fmt::Display,
    {
        self.str(i)
            .parse()
            .map_err(|e| self.error(format!("bad {what} `{}`: {e}", self.str(i))))
    }
}

/// Reads and validates the graph stored in `dir`.
pub fn load_graph(dir: impl AsRef<Path>) -> Result<RoadGraph, GraphError> {
    let dir = dir.as_ref();
    let mut builder = GraphBuilder::new();

    let header = profile_header();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    CsvFile::open(dir, PROFILES_FILE, &header)?.for_each(|row| {
        let mut profile = SpeedProfile::constant(row.str(0), 1.0);
        for h in 0..HOURS_PER_WEEK {
            let speed: f64 = row.parse(h + 1, "speed")?;
            if !(speed > 0.0 && speed <= super::MAX_SPEED_MPS) {
                return Err(row.error(format!("speed {speed} at hour {h} outside (0, 60]")));
            }
            profile.speeds[h] = speed;
        }
        builder.profile(profile);
        Ok(())
    })?;

    CsvFile::open(dir, NODES_FILE, &NODE_HEADER)?.for_each(|row| {
        let id: u64 = row.parse(0, "node id")?;
        let easting: f64 = row.parse(1, "easting")?;
        let northing: f64 = row.parse(2, "northing")?;
        builder.node(id, easting, northing);
        Ok(())
    })?;

    CsvFile::open(dir, EDGES_FILE, &EDGE_HEADER)?.for_each(|row| {
        let from: u64 = row.parse(0, "from")?;
        let to: u64 = row.parse(1, "to")?;
        let length: f64 = row.parse(2, "length")?;
        if !length.is_finite() || length <= 0.0 {
            return Err(row.error(format!("invalid length {length}")));
        }
        let access = match row.str(5) {
            "ALL" => Access::All,
            "EMERGENCY" => Access::EmergencyOnly,
            other => return Err(row.error(format!("unknown access `{other}`"))),
        };
        builder.edge(from, to, length, row.str(3), row.str(4), access);
        Ok(())
    })?;

    builder.build()
}

/// Writes `graph` into `dir` in the canonical CSV layout.
pub fn save_graph(graph: &RoadGraph, dir: impl AsRef<Path>) -> Result<(), GraphError> {
    let dir = dir.as_ref();
    let io_err = |path: PathBuf| {
        move |e: csv::Error| GraphError::Io {
            path,
            source: e.into(),
        }
    };

    let path = dir.join(NODES_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(io_err(path.clone()))?;
    let write = |w: &mut csv::Writer<File>, rec: &[String]| w.write_record(rec);
    write(&mut w, &NODE_HEADER.map(String::from)).map_err(io_err(path.clone()))?;
    for node in graph.nodes() {
        write(
            &mut w,
            &[
                node.id.to_string(),
                node.position.easting.to_string(),
                node.position.northing.to_string(),
            ],
        )
        .map_err(io_err(path.clone()))?;
    }
    w.flush().map_err(|source| GraphError::Io {
        path: path.clone(),
        source,
    })?;

    let path = dir.join(EDGES_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(io_err(path.clone()))?;
    write(&mut w, &EDGE_HEADER.map(String::from)).map_err(io_err(path.clone()))?;
    for edge in graph.edges() {
        write(
            &mut w,
            &[
                edge.from.to_string(),
                edge.to.to_string(),
                edge.length_m.to_string(),
                edge.profile_emergency.clone(),
                edge.profile_civilian.clone(),
                edge.access.as_str().to_owned(),
            ],
        )
        .map_err(io_err(path.clone()))?;
    }
    w.flush().map_err(|source| GraphError::Io {
        path: path.clone(),
        source,
    })?;

    let path = dir.join(PROFILES_FILE);
    let mut w = csv::Writer::from_path(&path).map_err(io_err(path.clone()))?;
    write(&mut w, &profile_header()).map_err(io_err(path.clone()))?;
    for profile in graph.profiles() {
        let row: Vec<String> = std::iter::once(profile.id.clone())
            .chain(profile.speeds.iter().map(f64::to_string))
            .collect();
        write(&mut w, &row).map_err(io_err(path.clone()))?;
    }
    w.flush().map_err(|source| GraphError::Io { path, source })
}
