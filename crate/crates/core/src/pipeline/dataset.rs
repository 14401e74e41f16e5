//! Training datasets built from a corpus manifest.
//!
//! Every corpus network is reduced to its largest connected component and
//! each of its vertices becomes one row: the scaled degree rank and scaled
//! eigenvector rank as inputs and the scaled exact rank of the target metric
//! as label. A scaled rank is `2 r / n - 1` with `r = 1` for the most central
//! vertex. Standardization is left to the trainer, which fits it on the
//! training split.
//!
//! File layout (UTF-8 CSV with a comment preamble):
//!
//! ```text
//! # centrank dataset v1
//! # target closeness
//! # manifest_sha256 <hex digest of the corpus manifest>
//! network,vertex,degree_rank,eigenvector_rank,label_rank
//! 0,17,-0.94,-0.9,-0.87
//! ```

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::bter::{manifest_hash, read_manifest, Manifest, ManifestRow};
use crate::centrality::{
    betweenness_closeness, degree_centrality, eigenvector_centrality, EigenConfig, Metric,
};
use crate::error::{Error, Result};
use crate::graph::{largest_connected_component, load_edge_list_file, Graph};
use crate::nn::TrainingSet;
use crate::par;
use crate::rank::{rank_transform, scale_rank};

const DATASET_MAGIC: &str = "# centrank dataset v1";
const DATASET_HEADER: &str = "network,vertex,degree_rank,eigenvector_rank,label_rank";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetRow {
    /// Manifest index of the source network.
    pub network: usize,
    /// Original vertex label in the network's edge list.
    pub vertex: u64,
    pub degree_rank: f64,
    pub eigenvector_rank: f64,
    pub label_rank: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub target: Metric,
    pub manifest_hash: String,
    pub rows: Vec<DatasetRow>,
}

/// Scaled degree and eigenvector ranks of a connected graph, row-major
/// `[degree, eigenvector]` per vertex.
#[derive(Debug, Clone)]
pub struct ModelInputs {
    pub scaled: Vec<f64>,
    /// The eigenvector iteration did not converge or oscillated.
    pub eigen_warning: bool,
}

pub fn model_inputs(g: &Graph) -> Result<ModelInputs> {
    let n = g.n();
    let deg = rank_transform(&degree_centrality(g).values)?;
    let eig = eigenvector_centrality(g, EigenConfig::default())?;
    let eig_rank = rank_transform(&eig.scores.values)?;
    let mut scaled = Vec::with_capacity(2 * n);
    for v in 0..n {
        scaled.push(scale_rank(deg.ranks[v], n));
        scaled.push(scale_rank(eig_rank.ranks[v], n));
    }
    Ok(ModelInputs {
        scaled,
        eigen_warning: eig.warning(),
    })
}

fn network_rows(
    manifest: &Manifest,
    row: &ManifestRow,
    targets: &[Metric],
    workers: usize,
) -> Result<Vec<Vec<DatasetRow>>> {
    let path = manifest.path_of(row);
    let (g, _) = load_edge_list_file(&path)?;
    let g = largest_connected_component(&g);
    let n = g.n();
    if n < 2 {
        return Err(Error::config(format!(
            "{}: largest component has {n} vertex",
            path.display()
        )));
    }
    let inputs = model_inputs(&g)?;
    let (btw, clo) = betweenness_closeness(&g, workers)?;
    targets
        .iter()
        .map(|t| {
            let values = match t {
                Metric::Betweenness => &btw.values,
                Metric::Closeness => &clo.values,
                other => return Err(Error::config(format!("{other} is not a dataset target"))),
            };
            let labels = rank_transform(values)?;
            Ok((0..n)
                .map(|v| DatasetRow {
                    network: row.index,
                    vertex: g.label(v),
                    degree_rank: inputs.scaled[2 * v],
                    eigenvector_rank: inputs.scaled[2 * v + 1],
                    label_rank: scale_rank(labels.ranks[v], n),
                })
                .collect())
        })
        .collect()
}

/// Build one dataset per target from the corpus at `manifest_path` (the
/// manifest CSV or its directory). Networks are processed in parallel and
/// concatenated in manifest order.
pub fn make_datasets(manifest_path: &Path, targets: &[Metric], workers: usize) -> Result<Vec<Dataset>> {
    let manifest = read_manifest(manifest_path)?;
    let hash = manifest_hash(manifest_path)?;
    for row in &manifest.rows {
        let p = manifest.path_of(row);
        if !p.is_file() {
            let e = std::io::Error::new(std::io::ErrorKind::NotFound, "corpus file is missing");
            return Err(Error::io(p, e));
        }
    }
    let per_network = par::with_workers(workers, || {
        par::map_slice(&manifest.rows, |row| network_rows(&manifest, row, targets, 1))
    });
    let mut out: Vec<Dataset> = targets
        .iter()
        .map(|&target| Dataset {
            target,
            manifest_hash: hash.clone(),
            rows: Vec::new(),
        })
        .collect();
    for net in per_network {
        for (ds, rows) in out.iter_mut().zip(net?) {
            ds.rows.extend(rows);
        }
    }
    Ok(out)
}

pub fn make_dataset(manifest_path: &Path, target: Metric, workers: usize) -> Result<Dataset> {
    Ok(make_datasets(manifest_path, &[target], workers)?.remove(0))
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Inputs and labels in the layout the trainer expects.
    pub fn training_set(&self) -> TrainingSet {
        let inputs = self
            .rows
            .iter()
            .flat_map(|r| [r.degree_rank, r.eigenvector_rank])
            .collect();
        let targets = self.rows.iter().map(|r| r.label_rank).collect();
        TrainingSet::new(inputs, targets, 2)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{DATASET_MAGIC}")?;
        writeln!(out, "# target {}", self.target)?;
        writeln!(out, "# manifest_sha256 {}", self.manifest_hash)?;
        writeln!(out, "{DATASET_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.network, r.vertex, r.degree_rank, r.eigenvector_rank, r.label_rank
            )?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((i, Err(e))) => Err(Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                }),
                None => Err(Error::Schema(format!("dataset ends before {what}"))),
            }
        };
        let (_, magic) = next("preamble")?;
        if magic.trim() != DATASET_MAGIC {
            return Err(Error::Schema("not a centrank dataset file".into()));
        }
        let (line, t) = next("target")?;
        let target: Metric = t
            .strip_prefix("# target ")
            .ok_or(Error::Parse {
                line,
                msg: "expected target line".into(),
            })?
            .trim()
            .parse()?;
        let (line, h) = next("manifest hash")?;
        let manifest_hash = h
            .strip_prefix("# manifest_sha256 ")
            .ok_or(Error::Parse {
                line,
                msg: "expected manifest hash line".into(),
            })?
            .trim()
            .to_string();
        let (_, header) = next("header")?;
        if header.trim() != DATASET_HEADER {
            return Err(Error::Schema(format!("unexpected dataset header {header:?}")));
        }
        let mut rows = Vec::new();
        for (i, l) in lines {
            let line = i + 1;
            let l = l.map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            if l.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = l.split(',').collect();
            let bad = |msg: &str| Error::Parse {
                line,
                msg: msg.to_string(),
            };
            if f.len() != 5 {
                return Err(bad("expected 5 fields"));
            }
            let num = |s: &str| -> Result<f64> {
                let x: f64 = s.parse().map_err(|_| bad("bad number"))?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(bad("non-finite value"))
                }
            };
            rows.push(DatasetRow {
                network: f[0].parse().map_err(|_| bad("bad network index"))?,
                vertex: f[1].parse().map_err(|_| bad("bad vertex id"))?,
                degree_rank: num(f[2])?,
                eigenvector_rank: num(f[3])?,
                label_rank: num(f[4])?,
            });
        }
        Ok(Dataset {
            target,
            manifest_hash,
            rows,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bter::{write_manifest, NetworkMetadata};

    fn one_network_corpus(dir: &Path, edges: &str) -> std::path::PathBuf {
        std::fs::write(dir.join("g.edges"), edges).unwrap();
        let manifest = Manifest {
            dir: dir.to_path_buf(),
            rows: vec![ManifestRow {
                index: 0,
                file: "g.edges".into(),
                meta: NetworkMetadata {
                    family: "heavy_tailed".into(),
                    parameter: 2.0,
                    n: 3,
                    clustering_target: 0.0,
                    seed: 0,
                    realized_m: 2,
                    realized_clustering: 0.0,
                },
            }],
        };
        let path = dir.join("manifest.csv");
        write_manifest(&path, &manifest).unwrap();
        path
    }

    #[test]
    fn path_of_three_closeness() {
        let dir = tempfile::tempdir().unwrap();
        let m = one_network_corpus(dir.path(), "0 1\n1 2\n");
        let ds = make_dataset(&m, Metric::Closeness, 1).unwrap();
        assert_eq!(ds.len(), 3);
        let center = ds.rows.iter().find(|r| r.vertex == 1).unwrap();
        // Rank 1 of 3 scales to 2/3 - 1.
        assert_eq!(center.degree_rank, scale_rank(1.0, 3));
        assert_eq!(center.label_rank, scale_rank(1.0, 3));
        assert_eq!(center.eigenvector_rank, scale_rank(1.0, 3));
        let leaf = ds.rows.iter().find(|r| r.vertex == 0).unwrap();
        assert_eq!(leaf.label_rank, scale_rank(2.5, 3));
    }

    #[test]
    fn rows_cover_the_largest_component_only() {
        let dir = tempfile::tempdir().unwrap();
        let m = one_network_corpus(dir.path(), "0 1\n1 2\n2 3\n7 8\n");
        let ds = make_dataset(&m, Metric::Betweenness, 1).unwrap();
        assert_eq!(ds.len(), 4);
        assert!(ds.rows.iter().all(|r| r.vertex <= 3));
    }

    #[test]
    fn file_round_trip_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let m = one_network_corpus(dir.path(), "0 1\n1 2\n2 0\n2 3\n3 4\n");
        let a = make_dataset(&m, Metric::Betweenness, 1).unwrap();
        let b = make_dataset(&m, Metric::Betweenness, 2).unwrap();
        let (pa, pb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        a.save(&pa).unwrap();
        b.save(&pb).unwrap();
        assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
        assert_eq!(Dataset::load(&pa).unwrap(), a);
        assert_eq!(a.manifest_hash, manifest_hash(&m).unwrap());
    }

    #[test]
    fn missing_corpus_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let m = one_network_corpus(dir.path(), "0 1\n");
        std::fs::remove_file(dir.path().join("g.edges")).unwrap();
        let err = make_dataset(&m, Metric::Closeness, 1).unwrap_err();
        assert!(err.to_string().contains("g.edges"), "{err}");
    }

    #[test]
    fn bad_rows_report_their_line() {
        let text = format!("{DATASET_MAGIC}\n# target closeness\n# manifest_sha256 ab\n{DATASET_HEADER}\n0,1,0.5,0.5,0.5\n0,2,x,0,0\n");
        match Dataset::read(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
    }
}
