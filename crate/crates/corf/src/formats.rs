//! JSON files for polyhedra and certificates, and CSV tables.

use std::path::Path;

use corf_core::polyhedron::{builtin, validate_polyhedron, Polyhedron};
use corf_core::separator::{FoldWitness, SeparationCertificate};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A polyhedron as stored on disk. Everything else (vertices, diameter,
/// volume) is recomputed when the file is loaded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyhedronFile {
    pub name: String,
    pub dim: usize,
    /// Outward unit normals, time coordinate first.
    pub normals: Vec<Vec<f64>>,
    /// Pairs of faces meeting at a right angle.
    pub adjacency: Vec<[usize; 2]>,
}

impl PolyhedronFile {
    pub fn from_polyhedron(p: &Polyhedron) -> Self {
        Self {
            name: p.name().to_string(),
            dim: p.dim(),
            normals: p.normals().iter().map(|h| h.normal().coords().to_vec()).collect(),
            adjacency: p.adjacent_pairs().into_iter().map(|(i, j)| [i, j]).collect(),
        }
    }

    /// Builds and validates the polyhedron.
    pub fn build(&self) -> Result<Polyhedron, CliError> {
        let pairs: Vec<(usize, usize)> = self.adjacency.iter().map(|a| (a[0], a[1])).collect();
        let p = Polyhedron::new(self.name.clone(), self.dim, self.normals.clone(), &pairs)?;
        validate_polyhedron(&p).map_err(corf_core::Error::from)?;
        Ok(p)
    }
}

/// A builtin name (`pentagon`, `dodecahedron`) or the path of a polyhedron
/// file.
pub fn load_polyhedron(source: &str) -> Result<Polyhedron, CliError> {
    if let Some(p) = builtin(source) {
        return Ok(p);
    }
    let text = std::fs::read_to_string(source)
        .map_err(|e| CliError::Input(format!("{source} is neither a builtin polyhedron nor a readable file: {e}")))?;
    let file: PolyhedronFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{source}: {e}")))?;
    file.build()
}

/// A boundary wall, named by its tile both by position and by word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallEntry {
    pub tile: usize,
    pub tile_word: Vec<usize>,
    pub face: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub walls: Vec<usize>,
    pub residual: f64,
}

/// Certificate file. `config` records how it was produced and is ignored
/// when the certificate is read back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub polyhedron: String,
    pub alpha_word: Vec<usize>,
    pub translation_length: f64,
    pub periods: usize,
    pub k: usize,
    pub index: usize,
    pub length_bound: f64,
    pub tile_words: Vec<Vec<usize>>,
    pub walls: Vec<WallEntry>,
    pub slab_wall: WallEntry,
    pub anchor: Vec<usize>,
    pub midpoint: Vec<f64>,
    pub reference_tile: usize,
    pub fold_witness: WitnessEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl CertificateFile {
    pub fn new(c: &SeparationCertificate, config: Option<serde_json::Value>) -> Self {
        let entry = |(tile, face): (usize, usize)| WallEntry {
            tile,
            tile_word: c.tile_words.get(tile).cloned().unwrap_or_default(),
            face,
        };
        Self {
            polyhedron: c.polyhedron.clone(),
            alpha_word: c.alpha_word.clone(),
            translation_length: c.translation_length,
            periods: c.periods,
            k: c.k,
            index: c.index,
            length_bound: c.length_bound,
            tile_words: c.tile_words.clone(),
            walls: c.walls.iter().map(|&w| entry(w)).collect(),
            slab_wall: entry(c.slab_wall),
            anchor: c.anchor.clone(),
            midpoint: c.midpoint.clone(),
            reference_tile: c.reference_tile,
            fold_witness: WitnessEntry {
                walls: c.fold_witness.walls.clone(),
                residual: c.fold_witness.residual,
            },
            config,
        }
    }

    /// The certificate, after checking that every wall names its tile
    /// consistently.
    pub fn certificate(&self) -> Result<SeparationCertificate, CliError> {
        let wall = |w: &WallEntry| {
            if self.tile_words.get(w.tile) == Some(&w.tile_word) {
                Ok((w.tile, w.face))
            } else {
                Err(CliError::Input(format!("wall entry for tile {} does not match its word", w.tile)))
            }
        };
        Ok(SeparationCertificate {
            polyhedron: self.polyhedron.clone(),
            alpha_word: self.alpha_word.clone(),
            translation_length: self.translation_length,
            periods: self.periods,
            k: self.k,
            index: self.index,
            length_bound: self.length_bound,
            tile_words: self.tile_words.clone(),
            walls: self.walls.iter().map(wall).collect::<Result<_, _>>()?,
            slab_wall: wall(&self.slab_wall)?,
            anchor: self.anchor.clone(),
            midpoint: self.midpoint.clone(),
            reference_tile: self.reference_tile,
            fold_witness: FoldWitness {
                walls: self.fold_witness.walls.clone(),
                residual: self.fold_witness.residual,
            },
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("certificate: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// A CSV table preceded by `# key=value` comment lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 fields"));
        out
    }

    /// Parses the output of [`Table::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let comments = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| l.trim_start_matches('#').trim().to_string())
            .collect();
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = r
            .headers()
            .map_err(|e| CliError::Input(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|x| x.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Input(e.to_string()))?;
        Ok(Self { comments, header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}
