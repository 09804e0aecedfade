//! Deterministic fuzz-corpus generation. Each instance is derived from the
//! campaign seed and its index alone, so output files are byte-identical no
//! matter how many worker threads run.

use std::path::{Path, PathBuf};

use degone::classify::NormalFormTag;
use degone::families;
use degone::field::FieldSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formats::{write_map_file, write_matrix_file};

#[derive(Clone, Copy, Debug)]
pub enum FuzzKind {
    Tag(NormalFormTag),
    Triangularize,
    SquareZero,
}

#[derive(Clone, Debug)]
pub struct FuzzSpec {
    pub kind: FuzzKind,
    pub field: FieldSpec,
    pub rows: usize,
    pub cols: usize,
    pub nvars: usize,
    pub seed: u64,
    pub count: usize,
    pub jobs: usize,
    pub out: PathBuf,
}

fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn instance(spec: &FuzzSpec, index: usize) -> Result<(String, String, String), String> {
    let mut rng = instance_rng(spec.seed, index);
    match spec.kind {
        FuzzKind::Tag(tag) => {
            if !tag.admissible(spec.field, spec.rows, spec.cols, spec.nvars) {
                return Err(format!(
                    "shape {tag} does not fit a {}x{} matrix over {}",
                    spec.rows, spec.cols, spec.field
                ));
            }
            let (m, rank) = families::scrambled_instance(
                tag, spec.field, spec.rows, spec.cols, spec.nvars, &mut rng,
            );
            let name = format!("fz_{tag}_{}_{index}.mat", spec.seed);
            let expect = format!("family {tag}\nrank {rank}\nclassify-succeeds true\n");
            Ok((name, write_matrix_file(&m), expect))
        }
        FuzzKind::Triangularize => {
            let n = spec.rows.max(2);
            let (h, _) = families::conjugated_triangular_jacobian(spec.field, n, &mut rng);
            let name = format!("fz_triangularize_{}_{index}.map", spec.seed);
            let expect = "family triangularize\nnilpotent true\ntriangularize-succeeds true\n"
                .to_string();
            Ok((name, write_map_file(&h), expect))
        }
        FuzzKind::SquareZero => {
            let n = spec.rows.max(3);
            let homogeneous = index.is_multiple_of(2);
            let h = families::conjugated_square_zero_map(spec.field, n, homogeneous, &mut rng);
            let name = format!("fz_square_zero_{}_{index}.map", spec.seed);
            let expect = format!("family square-zero\nhomogeneous {homogeneous}\nsquare-zero true\n");
            Ok((name, write_map_file(&h), expect))
        }
    }
}

type InstanceBatch = Result<Vec<(String, String, String)>, String>;

/// Generate the corpus; returns the written input file paths.
pub fn generate(spec: &FuzzSpec) -> Result<Vec<PathBuf>, String> {
    std::fs::create_dir_all(&spec.out).map_err(|e| e.to_string())?;
    let jobs = spec.jobs.max(1).min(spec.count.max(1));
    let indices: Vec<usize> = (0..spec.count).collect();
    let chunks: Vec<Vec<usize>> = indices
        .chunks(spec.count.div_ceil(jobs).max(1))
        .map(<[usize]>::to_vec)
        .collect();
    let results: Vec<InstanceBatch> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|&i| instance(spec, i))
                        .collect::<Result<Vec<_>, _>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut written = Vec::new();
    for r in results {
        for (name, body, expect) in r? {
            let path = spec.out.join(&name);
            std::fs::write(&path, body).map_err(|e| e.to_string())?;
            let sidecar = sidecar_path(&path);
            std::fs::write(&sidecar, expect).map_err(|e| e.to_string())?;
            written.push(path);
        }
    }
    written.sort();
    Ok(written)
}

pub fn sidecar_path(input: &Path) -> PathBuf {
    let mut p = input.as_os_str().to_owned();
    p.push(".expect");
    PathBuf::from(p)
}
