//! Splitting a space into invariant blocks of a set of operators.
//!
//! A seeded random Hermitian element of the commutant is diagonalized; its
//! eigenspaces are invariant, and generically irreducible. Blocks of equal
//! dimension are then tested for equivalence with an intertwiner solve, and
//! equivalent blocks are grouped into isotypic sectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, c64, ComplexMatrix, NULLSPACE_REL};

/// Default seed for the random commutant element.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Clone, Debug)]
pub struct Block {
    pub dim: usize,
    /// Orthonormal columns spanning the block.
    pub basis: ComplexMatrix,
    /// Equivalence class of the irreducible action on this block.
    pub class: usize,
    /// Restricted commutant is trivial.
    pub irreducible: bool,
}

/// Isotypic component: all blocks carrying equivalent irreducible actions.
#[derive(Clone, Debug)]
pub struct Sector {
    pub class: usize,
    pub irrep_dim: usize,
    pub multiplicity: usize,
    pub basis: ComplexMatrix,
}

impl Sector {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub blocks: Vec<Block>,
    pub sectors: Vec<Sector>,
    pub commutant_dim: usize,
}

impl Decomposition {
    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    pub fn sector_dims(&self) -> Vec<usize> {
        self.sectors.iter().map(|s| s.dim()).collect()
    }
}

fn random_hermitian(commutant: &[ComplexMatrix], dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = linalg::zeros(dim);
    for m in commutant {
        let w = c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        c += m * w;
    }
    &c + c.adjoint()
}

fn equivalent(ops: &[ComplexMatrix], a: &ComplexMatrix, b: &ComplexMatrix) -> bool {
    if a.ncols() != b.ncols() {
        return false;
    }
    let ra: Vec<_> = ops.iter().map(|m| linalg::compress(m, a)).collect();
    let rb: Vec<_> = ops.iter().map(|m| linalg::compress(m, b)).collect();
    let sols = linalg::intertwiner_space(ra.iter().zip(rb.iter()), a.ncols(), b.ncols());
    match sols.first() {
        None => false,
        Some(t) => {
            let sv = t.clone().singular_values();
            let max = sv.iter().cloned().fold(0.0, f64::max);
            let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            min > NULLSPACE_REL * max
        }
    }
}

/// Sort key making sector order canonical: dimension, then the projector
/// diagonal read lexicographically (largest weight first).
fn canonical_key(basis: &ComplexMatrix) -> (usize, Vec<i64>) {
    let p = linalg::projector(basis);
    let diag = (0..p.nrows())
        .map(|k| -(p[(k, k)].re * 1e6).round() as i64)
        .collect();
    (basis.ncols(), diag)
}

/// Decomposes the space acted on by `ops` (all `dim × dim`).
pub fn decompose(ops: &[ComplexMatrix], dim: usize, seed: u64) -> Decomposition {
    let comm = linalg::commutant(ops, dim);
    let commutant_dim = comm.len();

    let raw: Vec<ComplexMatrix> = if commutant_dim <= 1 {
        vec![linalg::identity(dim)]
    } else {
        let h = random_hermitian(&comm, dim, seed);
        let scale = linalg::frobenius(&h).max(1.0);
        linalg::eigenspaces(&h, 1e-7 * scale)
            .into_iter()
            .map(|(_, v)| v)
            .collect()
    };

    let mut classes: Vec<usize> = Vec::with_capacity(raw.len());
    let mut reps: Vec<usize> = Vec::new();
    for (k, v) in raw.iter().enumerate() {
        let found = reps.iter().position(|&r| equivalent(ops, &raw[r], v));
        match found {
            Some(c) => classes.push(c),
            None => {
                classes.push(reps.len());
                reps.push(k);
            }
        }
    }

    let mut sectors: Vec<Sector> = (0..reps.len())
        .map(|c| {
            let members: Vec<usize> = (0..raw.len()).filter(|&k| classes[k] == c).collect();
            let cols: Vec<_> = members
                .iter()
                .flat_map(|&k| (0..raw[k].ncols()).map(move |j| (k, j)))
                .map(|(k, j)| raw[k].column(j).into_owned())
                .collect();
            Sector {
                class: c,
                irrep_dim: raw[members[0]].ncols(),
                multiplicity: members.len(),
                basis: ComplexMatrix::from_columns(&cols),
            }
        })
        .collect();
    sectors.sort_by_cached_key(|s| canonical_key(&s.basis));

    // Renumber classes in canonical sector order.
    let remap: Vec<usize> = {
        let mut r = vec![0; sectors.len()];
        for (new, s) in sectors.iter().enumerate() {
            r[s.class] = new;
        }
        r
    };
    for s in sectors.iter_mut() {
        s.class = remap[s.class];
    }

    let mut blocks: Vec<Block> = raw
        .into_iter()
        .zip(classes)
        .map(|(basis, class)| {
            let restricted: Vec<_> = ops.iter().map(|m| linalg::compress(m, &basis)).collect();
            let irreducible = linalg::commutant(&restricted, basis.ncols()).len() == 1;
            Block {
                dim: basis.ncols(),
                basis,
                class: remap[class],
                irreducible,
            }
        })
        .collect();
    blocks.sort_by_key(|b| b.class);

    Decomposition {
        blocks,
        sectors,
        commutant_dim,
    }
}
