//! Training corpora: many BTER networks written as edge lists with a CSV
//! manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{generate_bter, BterConfig, DegreeDistributionSpec, DegreeFamily};
use crate::error::{Error, Result};
use crate::graph::global_clustering_coefficient;
use crate::{par, seed};

pub const MANIFEST_FILE: &str = "manifest.csv";
const MANIFEST_HEADER: &str =
    "index,file,family,parameter,n,clustering_target,seed,realized_m,realized_clustering";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub families: Vec<DegreeFamily>,
    pub sizes: Vec<usize>,
    pub networks_per_size: usize,
    pub clustering_range: (f64, f64),
    pub master_seed: u64,
}

impl CorpusSpec {
    /// 6 distributions × sizes 100..=1000 (step 100) × 10 networks.
    pub fn full(master_seed: u64) -> Self {
        CorpusSpec {
            families: DegreeFamily::training_set().to_vec(),
            sizes: (1..=10).map(|i| 100 * i).collect(),
            networks_per_size: 10,
            clustering_range: (0.3, 0.7),
            master_seed,
        }
    }

    /// 6 distributions × sizes 100..=500 (step 100) × 4 networks.
    pub fn desk(master_seed: u64) -> Self {
        CorpusSpec {
            families: DegreeFamily::training_set().to_vec(),
            sizes: (1..=5).map(|i| 100 * i).collect(),
            networks_per_size: 4,
            clustering_range: (0.3, 0.7),
            master_seed,
        }
    }

    /// Every network of the corpus with its derived seed and clustering
    /// target, in index order (family, then size, then replicate).
    pub fn plan(&self) -> Vec<CorpusEntry> {
        let mut out = Vec::new();
        for family in &self.families {
            for &n in &self.sizes {
                for _ in 0..self.networks_per_size {
                    let index = out.len();
                    let net_seed = seed::derive_seed(self.master_seed, index as u64);
                    let (lo, hi) = self.clustering_range;
                    let u: f64 = seed::rng(seed::derive_seed(net_seed, 0)).random();
                    out.push(CorpusEntry {
                        index,
                        config: BterConfig {
                            n,
                            dist: DegreeDistributionSpec::new(*family),
                            clustering_target: lo + (hi - lo) * u,
                            seed: net_seed,
                        },
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub index: usize,
    pub config: BterConfig,
}

impl CorpusEntry {
    pub fn file_stem(&self) -> String {
        format!("net_{:04}", self.index)
    }
}

/// Per-network metadata, written next to each edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetadata {
    pub family: String,
    pub parameter: f64,
    pub n: usize,
    pub clustering_target: f64,
    pub seed: u64,
    pub realized_m: usize,
    pub realized_clustering: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub index: usize,
    pub file: String,
    pub meta: NetworkMetadata,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    /// Directory that relative `file` entries resolve against.
    pub dir: PathBuf,
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn path_of(&self, row: &ManifestRow) -> PathBuf {
        self.dir.join(&row.file)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Generate one network and render it as an edge list with a `# bter`
/// comment header.
pub fn render_network(cfg: &BterConfig) -> Result<(NetworkMetadata, Vec<u8>)> {
    let b = generate_bter(cfg)?;
    let meta = NetworkMetadata {
        family: cfg.dist.family.name().to_string(),
        parameter: cfg.dist.family.parameter(),
        n: cfg.n,
        clustering_target: cfg.clustering_target,
        seed: cfg.seed,
        realized_m: b.graph.m(),
        realized_clustering: global_clustering_coefficient(&b.graph),
    };
    let mut edges = Vec::new();
    writeln!(
        edges,
        "# bter family={} parameter={} n={} clustering_target={} seed={}",
        meta.family, meta.parameter, meta.n, meta.clustering_target, meta.seed
    )
    .expect("write to Vec");
    b.graph.write_edge_list(&mut edges).expect("write to Vec");
    Ok((meta, edges))
}

/// Generate one network, write `<stem>.edges` and `<stem>.json` into `dir`.
pub fn write_network(dir: &Path, stem: &str, cfg: &BterConfig) -> Result<NetworkMetadata> {
    let (meta, edges) = render_network(cfg)?;
    write_file(&dir.join(format!("{stem}.edges")), &edges)?;
    let json = serde_json::to_vec_pretty(&meta).expect("metadata serializes");
    write_file(&dir.join(format!("{stem}.json")), &json)?;
    Ok(meta)
}

/// Generate every network of `spec` into `dir` and write `manifest.csv`.
pub fn build_training_corpus(dir: &Path, spec: &CorpusSpec, workers: usize) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let plan = spec.plan();
    let metas = par::with_workers(workers, || {
        par::map_slice(&plan, |entry| write_network(dir, &entry.file_stem(), &entry.config))
    });
    let mut rows = Vec::with_capacity(plan.len());
    for (entry, meta) in plan.iter().zip(metas) {
        rows.push(ManifestRow {
            index: entry.index,
            file: format!("{}.edges", entry.file_stem()),
            meta: meta?,
        });
    }
    let manifest = Manifest {
        dir: dir.to_path_buf(),
        rows,
    };
    write_manifest(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut out = String::new();
    out.push_str(MANIFEST_HEADER);
    out.push('\n');
    for r in &manifest.rows {
        let m = &r.meta;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.index,
            r.file,
            m.family,
            m.parameter,
            m.n,
            m.clustering_target,
            m.seed,
            m.realized_m,
            m.realized_clustering
        ));
    }
    write_file(path, out.as_bytes())
}

/// Read a manifest; `path` may name the CSV or the corpus directory.
pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let path = if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == MANIFEST_HEADER => {}
        _ => {
            return Err(Error::Schema(format!(
                "{}: missing manifest header",
                path.display()
            )))
        }
    }
    let bad = |line: usize, what: &str| Error::Parse {
        line: line + 1,
        msg: format!("{}: bad {what}", path.display()),
    };
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(bad(i, "field count"));
        }
        rows.push(ManifestRow {
            index: f[0].parse().map_err(|_| bad(i, "index"))?,
            file: f[1].to_string(),
            meta: NetworkMetadata {
                family: f[2].to_string(),
                parameter: f[3].parse().map_err(|_| bad(i, "parameter"))?,
                n: f[4].parse().map_err(|_| bad(i, "n"))?,
                clustering_target: f[5].parse().map_err(|_| bad(i, "clustering_target"))?,
                seed: f[6].parse().map_err(|_| bad(i, "seed"))?,
                realized_m: f[7].parse().map_err(|_| bad(i, "realized_m"))?,
                realized_clustering: f[8].parse().map_err(|_| bad(i, "realized_clustering"))?,
            },
        });
    }
    Ok(Manifest {
        dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        rows,
    })
}

/// SHA-256 of the manifest file, hex encoded.
pub fn manifest_hash(path: &Path) -> Result<String> {
    let path = if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    };
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_plan_counts() {
        let plan = CorpusSpec::full(1).plan();
        assert_eq!(plan.len(), 600);
        assert_eq!(plan.iter().map(|e| e.config.n).sum::<usize>(), 330_000);
        assert!(plan
            .iter()
            .all(|e| (0.3..=0.7).contains(&e.config.clustering_target)));
    }

    #[test]
    fn desk_plan_counts() {
        let plan = CorpusSpec::desk(1).plan();
        assert_eq!(plan.len(), 120);
        assert_eq!(plan.iter().map(|e| e.config.n).sum::<usize>(), 36_000);
    }

    #[test]
    fn small_corpus_is_reproducible() {
        let spec = CorpusSpec {
            sizes: vec![100, 200],
            networks_per_size: 2,
            ..CorpusSpec::desk(5)
        };
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ma = build_training_corpus(a.path(), &spec, 2).unwrap();
        let mb = build_training_corpus(b.path(), &spec, 1).unwrap();
        assert_eq!(ma.rows.len(), 24);
        assert_eq!(ma.rows, mb.rows);
        assert_eq!(
            manifest_hash(a.path()).unwrap(),
            manifest_hash(b.path()).unwrap()
        );
        for r in &ma.rows {
            let ea = std::fs::read(ma.path_of(r)).unwrap();
            let eb = std::fs::read(mb.path_of(r)).unwrap();
            assert_eq!(ea, eb);
        }
        let back = read_manifest(a.path()).unwrap();
        assert_eq!(back.rows, ma.rows);
        assert_eq!(back.rows.len(), 24);
    }

    #[test]
    fn missing_manifest_names_the_file() {
        let d = tempfile::tempdir().unwrap();
        let err = read_manifest(&d.path().join("nope.csv")).unwrap_err();
        assert!(err.to_string().contains("nope.csv"));
    }
}
